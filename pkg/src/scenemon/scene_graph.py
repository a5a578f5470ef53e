"""Concrete and abstract scene graphs.

A ConcreteSceneGraph (CSG) is one observed snapshot: typed objects with
attribute values, labeled directed edges between them, a designated ego
vehicle, and a timestamp. An AbstractSceneGraph (ASG) is one property: a
pattern graph over the same vocabulary plus an ordered list of predicates
over the pattern nodes. Both validate against an ObjectModel at load time;
matching and verdicts live in the matching and monitor modules.

Scene records travel as JSON objects (one per line in a stream):

    {"t": 0.0, "ego": "ego",
     "nodes": [{"id": "ego", "class": "Vehicle",
                "attrs": {"velocity": 8.33, "position": [0.0, 0.0]}}],
     "edges": [{"src": "ego", "rel": "isIn", "dst": "l1"}]}

The exact record schema is documented in docs/formats.md.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Iterator, Mapping

from .errors import SceneValidationError
from .object_model import ObjectModel, is_relationship_allowed

if TYPE_CHECKING:  # predicate AST lives in dsl.py; only needed for typing
    from .dsl import Expr


@dataclass(frozen=True)
class SceneObject:
    object_id: str
    cls: str
    attributes: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "attributes", dict(self.attributes))

    def __hash__(self) -> int:
        return hash((self.object_id, self.cls))


@dataclass
class ConcreteSceneGraph:
    timestamp: float
    nodes: dict[str, SceneObject]
    edges: frozenset[tuple[str, str, str]]
    ego_id: str
    om: ObjectModel = field(compare=False, repr=False)
    # adjacency caches, built once; the graph is treated as immutable
    out_edges: dict[str, dict[str, set[str]]] = field(
        default_factory=dict, compare=False, repr=False)
    in_edges: dict[str, dict[str, set[str]]] = field(
        default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        for nid in self.nodes:
            self.out_edges[nid] = {}
            self.in_edges[nid] = {}
        for src, rel, dst in self.edges:
            self.out_edges[src].setdefault(rel, set()).add(dst)
            self.in_edges[dst].setdefault(rel, set()).add(src)

    def has_edge(self, src: str, rel: str, dst: str) -> bool:
        return (src, rel, dst) in self.edges

    def labels_between(self, src: str, dst: str) -> set[str]:
        return {r for r, dsts in self.out_edges.get(src, {}).items() if dst in dsts}


@dataclass
class AbstractSceneGraph:
    name: str
    pattern_nodes: dict[str, str]  # pattern id -> class name (may be abstract)
    pattern_edges: frozenset[tuple[str, str, str]]
    ego_pattern_id: str
    predicates: "tuple[Expr, ...]"
    om: ObjectModel = field(compare=False, repr=False)


# -- validation ------------------------------------------------------------


def _check_attr_value(om: ObjectModel, cls: str, name: str, value: object) -> object:
    """Type-check one attribute value against its declaration; returns the
    normalized value (Real -> float, Vec2 -> tuple of floats)."""
    decl = om.find_attribute(cls, name)
    if decl is None:
        raise SceneValidationError(f"class {cls} has no attribute {name}")
    t = decl.type
    if t == "Real":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SceneValidationError(f"attribute {name} expects Real, got {value!r}")
        return float(value)
    if t == "Int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise SceneValidationError(f"attribute {name} expects Int, got {value!r}")
        return value
    if t == "Bool":
        if not isinstance(value, bool):
            raise SceneValidationError(f"attribute {name} expects Bool, got {value!r}")
        return value
    if t == "String":
        if not isinstance(value, str):
            raise SceneValidationError(f"attribute {name} expects String, got {value!r}")
        return value
    if t == "Vec2":
        ok = (isinstance(value, (list, tuple)) and len(value) == 2
              and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in value))
        if not ok:
            raise SceneValidationError(f"attribute {name} expects Vec2, got {value!r}")
        return (float(value[0]), float(value[1]))
    raise SceneValidationError(f"attribute {name} has unsupported type {t}")


def make_csg(
    om: ObjectModel,
    timestamp: float,
    ego_id: str,
    nodes: Iterable[SceneObject],
    edges: Iterable[tuple[str, str, str]],
) -> ConcreteSceneGraph:
    """Build and fully validate a ConcreteSceneGraph.

    Validation is closed-world over what the record claims: every node class
    and every provided attribute must be declared, every edge must be allowed
    by the object model. Attributes that the class declares but the record
    omits stay absent; predicate evaluation reports them as errors later.
    """
    node_map: dict[str, SceneObject] = {}
    for obj in nodes:
        if not obj.object_id:
            raise SceneValidationError("node with empty id")
        if obj.object_id in node_map:
            raise SceneValidationError(f"duplicate node id: {obj.object_id}")
        cls = om.require_class(obj.cls)
        if cls.abstract:
            raise SceneValidationError(
                f"node {obj.object_id} has abstract class {obj.cls}")
        normalized = {
            name: _check_attr_value(om, obj.cls, name, value)
            for name, value in obj.attributes.items()
        }
        node_map[obj.object_id] = SceneObject(obj.object_id, obj.cls, normalized)
    edge_set: set[tuple[str, str, str]] = set()
    for src, rel, dst in edges:
        if src not in node_map:
            raise SceneValidationError(f"edge references unknown node {src}")
        if dst not in node_map:
            raise SceneValidationError(f"edge references unknown node {dst}")
        if not is_relationship_allowed(om, rel, node_map[src].cls, node_map[dst].cls):
            raise SceneValidationError(
                f"edge ({src}, {rel}, {dst}) not allowed: "
                f"{rel} does not admit {node_map[src].cls} -> {node_map[dst].cls}")
        if rel == "inFrontOf" and src == dst:
            raise SceneValidationError(f"inFrontOf self-loop on {src}")
        edge_set.add((src, rel, dst))
    if ego_id not in node_map:
        raise SceneValidationError(f"ego node {ego_id!r} not present in scene")
    if not om.is_subclass(node_map[ego_id].cls, "Vehicle"):
        raise SceneValidationError(
            f"ego node {ego_id} has class {node_map[ego_id].cls}, expected a Vehicle")
    if isinstance(timestamp, bool) or not isinstance(timestamp, (int, float)):
        raise SceneValidationError(f"timestamp must be a number, got {timestamp!r}")
    return ConcreteSceneGraph(float(timestamp), node_map, frozenset(edge_set), ego_id, om)


def parse_csg(record: Mapping, om: ObjectModel) -> ConcreteSceneGraph:
    """Parse one scene record (a decoded JSON object) into a validated CSG."""
    if not isinstance(record, Mapping):
        raise SceneValidationError(f"scene record must be an object, got {type(record).__name__}")
    for key in ("t", "ego", "nodes", "edges"):
        if key not in record:
            raise SceneValidationError(f"scene record missing field {key!r}")
    raw_nodes = record["nodes"]
    raw_edges = record["edges"]
    if not isinstance(raw_nodes, list) or not isinstance(raw_edges, list):
        raise SceneValidationError("scene record fields nodes/edges must be arrays")
    nodes = []
    for item in raw_nodes:
        if not isinstance(item, Mapping) or "id" not in item or "class" not in item:
            raise SceneValidationError(f"malformed node entry: {item!r}")
        attrs = item.get("attrs", {})
        if not isinstance(attrs, Mapping):
            raise SceneValidationError(f"node {item['id']}: attrs must be an object")
        if not isinstance(item["id"], str) or not isinstance(item["class"], str):
            raise SceneValidationError(f"malformed node entry: {item!r}")
        nodes.append(SceneObject(item["id"], item["class"], attrs))
    edges = []
    for item in raw_edges:
        if not isinstance(item, Mapping) or not {"src", "rel", "dst"} <= set(item):
            raise SceneValidationError(f"malformed edge entry: {item!r}")
        edges.append((item["src"], item["rel"], item["dst"]))
    if not isinstance(record["ego"], str):
        raise SceneValidationError("scene record field 'ego' must be a node id")
    return make_csg(om, record["t"], record["ego"], nodes, edges)


def scene_record(csg: ConcreteSceneGraph) -> dict:
    """Render a CSG back to its JSON record form (canonical: sorted ids)."""

    def attr_out(value: object) -> object:
        if isinstance(value, tuple):
            return list(value)
        return value

    return {
        "t": csg.timestamp,
        "ego": csg.ego_id,
        "nodes": [
            {
                "id": nid,
                "class": obj.cls,
                "attrs": {k: attr_out(v) for k, v in sorted(obj.attributes.items())},
            }
            for nid, obj in sorted(csg.nodes.items())
        ],
        "edges": [
            {"src": s, "rel": r, "dst": d} for s, r, d in sorted(csg.edges)
        ],
    }


def serialize_scene(csg: ConcreteSceneGraph) -> str:
    return json.dumps(scene_record(csg), separators=(", ", ": "))


def read_scene_stream(lines: Iterable[str], om: ObjectModel) -> Iterator[ConcreteSceneGraph]:
    """Parse a JSONL scene stream lazily, one validated CSG per nonblank line."""
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SceneValidationError(f"line {lineno}: invalid JSON: {exc}") from exc
        try:
            yield parse_csg(record, om)
        except SceneValidationError as exc:
            raise SceneValidationError(f"line {lineno}: {exc}") from exc


def validate_asg(asg: AbstractSceneGraph) -> None:
    """Check an ASG's structural invariants against its object model.

    Pattern classes may be abstract (a Vehicle in the scene matches a
    TrafficParticipant pattern node). The pattern must be connected when
    read undirected: with an ego-anchored matcher a disconnected component
    would float free of any spatial constraint.
    """
    om = asg.om
    if not asg.pattern_nodes:
        raise SceneValidationError(f"pattern {asg.name!r} declares no nodes")
    for pid, cls in asg.pattern_nodes.items():
        om.require_class(cls)
        if not pid:
            raise SceneValidationError("pattern node with empty id")
    if asg.ego_pattern_id not in asg.pattern_nodes:
        raise SceneValidationError(
            f"pattern {asg.name!r}: ego pattern node {asg.ego_pattern_id!r} not declared")
    ego_cls = asg.pattern_nodes[asg.ego_pattern_id]
    if not om.is_subclass(ego_cls, "Vehicle"):
        raise SceneValidationError(
            f"pattern {asg.name!r}: ego node has class {ego_cls}, expected a Vehicle")
    for src, rel, dst in asg.pattern_edges:
        for pid in (src, dst):
            if pid not in asg.pattern_nodes:
                raise SceneValidationError(
                    f"pattern {asg.name!r}: edge references unknown node {pid}")
        if not is_relationship_allowed(om, rel, asg.pattern_nodes[src], asg.pattern_nodes[dst]):
            raise SceneValidationError(
                f"pattern {asg.name!r}: edge ({src}, {rel}, {dst}) not allowed for "
                f"{asg.pattern_nodes[src]} -> {asg.pattern_nodes[dst]}")
    # connectivity, undirected
    if len(asg.pattern_nodes) > 1:
        adj: dict[str, set[str]] = {pid: set() for pid in asg.pattern_nodes}
        for src, _, dst in asg.pattern_edges:
            adj[src].add(dst)
            adj[dst].add(src)
        seen = {next(iter(asg.pattern_nodes))}
        frontier = list(seen)
        while frontier:
            cur = frontier.pop()
            for nxt in adj[cur]:
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        if seen != set(asg.pattern_nodes):
            missing = sorted(set(asg.pattern_nodes) - seen)
            raise SceneValidationError(
                f"pattern {asg.name!r} is disconnected; unreachable: {', '.join(missing)}")
    for idx, pred in enumerate(asg.predicates):
        for pid in sorted(pred.pattern_ids()):
            if pid not in asg.pattern_nodes:
                raise SceneValidationError(
                    f"pattern {asg.name!r}: predicate {idx} references unknown node {pid}")


# -- DOT export ------------------------------------------------------------


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def _dot_id(text: str) -> str:
    return f'"{_dot_escape(text)}"'


def export_dot(graph: "ConcreteSceneGraph | AbstractSceneGraph") -> str:
    """Render a scene or pattern graph as Graphviz DOT text.

    Pattern predicates are drawn as annotations in grey: a predicate over
    two pattern nodes becomes a dashed grey edge between them, anything else
    becomes a dashed-linked grey note. The ego node gets a double border.
    """
    lines = ["digraph scene {", "  rankdir=LR;", '  node [shape=box, fontname="Helvetica"];']
    if isinstance(graph, ConcreteSceneGraph):
        for nid, obj in sorted(graph.nodes.items()):
            parts = [f"{nid} : {obj.cls}"]
            for name, value in sorted(obj.attributes.items()):
                if isinstance(value, tuple):
                    value = f"({value[0]:g}, {value[1]:g})"
                parts.append(f"{name} = {value}")
            label = _dot_escape("\\n".join(parts))
            extra = ", peripheries=2" if nid == graph.ego_id else ""
            lines.append(f'  {_dot_id(nid)} [label="{label}"{extra}];')
        for src, rel, dst in sorted(graph.edges):
            lines.append(f'  {_dot_id(src)} -> {_dot_id(dst)} [label="{_dot_escape(rel)}"];')
    else:
        for pid, cls in sorted(graph.pattern_nodes.items()):
            label = _dot_escape(f"{pid} : {cls}")
            extra = ", peripheries=2" if pid == graph.ego_pattern_id else ""
            lines.append(f'  {_dot_id(pid)} [label="{label}"{extra}];')
        for src, rel, dst in sorted(graph.pattern_edges):
            lines.append(f'  {_dot_id(src)} -> {_dot_id(dst)} [label="{_dot_escape(rel)}"];')
        for idx, pred in enumerate(graph.predicates):
            text = _dot_escape(pred.to_text())
            pids = sorted(pred.pattern_ids())
            if len(pids) == 2:
                lines.append(
                    f'  {_dot_id(pids[0])} -> {_dot_id(pids[1])} '
                    f'[label="{text}", style=dashed, color=grey, fontcolor=grey, dir=none];')
            else:
                note = f"pred{idx}"
                lines.append(
                    f'  {_dot_id(note)} [label="{text}", shape=plaintext, fontcolor=grey];')
                anchor = pids[0] if pids else graph.ego_pattern_id
                lines.append(
                    f'  {_dot_id(note)} -> {_dot_id(anchor)} '
                    f'[style=dashed, color=grey, dir=none];')
    lines.append("}")
    return "\n".join(lines) + "\n"
