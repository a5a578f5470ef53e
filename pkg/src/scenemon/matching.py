"""Ego-anchored subgraph matching between pattern and scene graphs.

An embedding maps every pattern node of an AbstractSceneGraph to a distinct
scene object of a ConcreteSceneGraph such that

  * the ego pattern node maps to the scene's ego object,
  * each object's class is the pattern node's class or a subclass of it,
  * every labeled pattern edge is present between the images.

The default semantics is monomorphism: the scene may contain any number of
additional edges between matched objects. `induced=True` switches to strict
induced matching where edges between images must mirror the pattern exactly.

`iter_embeddings` runs a VF2-style backtracking search. The pattern visit
order is fixed up front (`pattern_order`): ego first, then ascending BFS
distance from ego, then ascending candidate count, then pattern id; scene
candidates are tried in lexicographic object-id order. Enumeration order is
therefore the lexicographic order of mapped-object tuples along the visit
order, which makes results reproducible and lets callers reason about "the
first embedding".

`brute_force_embeddings` is an intentionally naive oracle for testing: it
enumerates the full candidate product and filters. It shares no search code
with the matcher; keep it that way so the two routes stay independent.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

from .errors import OracleSizeError, SceneValidationError
from .scene_graph import AbstractSceneGraph, ConcreteSceneGraph

ORACLE_SIZE_BOUND = 12


@dataclass(frozen=True)
class Embedding:
    """Immutable pattern-id to object-id mapping, stored sorted by pattern id."""

    mapping: tuple[tuple[str, str], ...]

    @staticmethod
    def from_dict(d: dict[str, str]) -> "Embedding":
        return Embedding(tuple(sorted(d.items())))

    def as_dict(self) -> dict[str, str]:
        return dict(self.mapping)

    def __getitem__(self, pattern_id: str) -> str:
        for pid, oid in self.mapping:
            if pid == pattern_id:
                return oid
        raise KeyError(pattern_id)


def _require_same_om(asg: AbstractSceneGraph, csg: ConcreteSceneGraph) -> None:
    if asg.om is not csg.om and asg.om != csg.om:
        raise SceneValidationError(
            "pattern and scene were validated against different object models")


def _candidates(asg: AbstractSceneGraph, csg: ConcreteSceneGraph) -> dict[str, list[str]]:
    """Class-compatible scene objects per pattern node, ego pinned, sorted."""
    om = asg.om
    out: dict[str, list[str]] = {}
    for pid, cls in asg.pattern_nodes.items():
        if pid == asg.ego_pattern_id:
            ego_obj = csg.nodes[csg.ego_id]
            out[pid] = [csg.ego_id] if om.is_subclass(ego_obj.cls, cls) else []
        else:
            out[pid] = sorted(
                oid for oid, obj in csg.nodes.items() if om.is_subclass(obj.cls, cls)
            )
    return out


def pattern_order(asg: AbstractSceneGraph, csg: ConcreteSceneGraph) -> tuple[str, ...]:
    """The matcher's static pattern-node visit order.

    Ego is always first (BFS distance 0). Remaining nodes sort by distance
    from ego in the undirected pattern, then by how few scene candidates
    they have, then by pattern id for a total order.
    """
    dist = {asg.ego_pattern_id: 0}
    frontier = [asg.ego_pattern_id]
    adj: dict[str, set[str]] = {pid: set() for pid in asg.pattern_nodes}
    for src, _, dst in asg.pattern_edges:
        adj[src].add(dst)
        adj[dst].add(src)
    while frontier:
        nxt: list[str] = []
        for pid in frontier:
            for nb in adj[pid]:
                if nb not in dist:
                    dist[nb] = dist[pid] + 1
                    nxt.append(nb)
        frontier = nxt
    cand = _candidates(asg, csg)
    return tuple(sorted(
        asg.pattern_nodes,
        key=lambda pid: (dist.get(pid, len(asg.pattern_nodes)), len(cand[pid]), pid),
    ))


def _pattern_adjacency(asg: AbstractSceneGraph):
    p_out: dict[str, dict[str, set[str]]] = {pid: {} for pid in asg.pattern_nodes}
    p_in: dict[str, dict[str, set[str]]] = {pid: {} for pid in asg.pattern_nodes}
    for src, rel, dst in asg.pattern_edges:
        p_out[src].setdefault(rel, set()).add(dst)
        p_in[dst].setdefault(rel, set()).add(src)
    return p_out, p_in


def iter_embeddings(
    asg: AbstractSceneGraph,
    csg: ConcreteSceneGraph,
    *,
    induced: bool = False,
) -> Iterator[Embedding]:
    """Yield all embeddings in deterministic matcher order."""
    _require_same_om(asg, csg)
    order = pattern_order(asg, csg)
    cand = _candidates(asg, csg)
    p_out, p_in = _pattern_adjacency(asg)
    mapping: dict[str, str] = {}
    used: set[str] = set()

    def degree_ok(pid: str, oid: str) -> bool:
        # label lookahead: the object needs at least the pattern node's
        # labeled degree in each direction for a monomorphism to exist
        for rel, dsts in p_out[pid].items():
            if len(csg.out_edges[oid].get(rel, ())) < len(dsts):
                return False
        for rel, srcs in p_in[pid].items():
            if len(csg.in_edges[oid].get(rel, ())) < len(srcs):
                return False
        return True

    def consistent(pid: str, oid: str) -> bool:
        for rel, dsts in p_out[pid].items():
            for q in dsts:
                if q in mapping and not csg.has_edge(oid, rel, mapping[q]):
                    return False
        for rel, srcs in p_in[pid].items():
            for q in srcs:
                if q in mapping and not csg.has_edge(mapping[q], rel, oid):
                    return False
        if induced:
            for q, w in mapping.items():
                extra_out = csg.labels_between(oid, w) - {
                    rel for rel, dsts in p_out[pid].items() if q in dsts}
                if extra_out:
                    return False
                extra_in = csg.labels_between(w, oid) - {
                    rel for rel, srcs in p_in[pid].items() if q in srcs}
                if extra_in:
                    return False
        return True

    def search(depth: int) -> Iterator[Embedding]:
        if depth == len(order):
            yield Embedding.from_dict(mapping)
            return
        pid = order[depth]
        for oid in cand[pid]:
            if oid in used:
                continue
            if not degree_ok(pid, oid):
                continue
            if not consistent(pid, oid):
                continue
            mapping[pid] = oid
            used.add(oid)
            yield from search(depth + 1)
            del mapping[pid]
            used.discard(oid)

    yield from search(0)


def find_embeddings(
    asg: AbstractSceneGraph,
    csg: ConcreteSceneGraph,
    *,
    limit: int | None = None,
    induced: bool = False,
) -> list[Embedding]:
    """All embeddings of `asg` into `csg`, in deterministic matcher order.

    `limit` stops the search after that many embeddings. The list is empty
    iff no embedding exists.
    """
    if limit is not None and limit < 1:
        raise ValueError("limit must be >= 1")
    out: list[Embedding] = []
    for emb in iter_embeddings(asg, csg, induced=induced):
        out.append(emb)
        if limit is not None and len(out) >= limit:
            break
    return out


def brute_force_embeddings(
    asg: AbstractSceneGraph,
    csg: ConcreteSceneGraph,
    *,
    size_bound: int = ORACLE_SIZE_BOUND,
    induced: bool = False,
) -> list[Embedding]:
    """Enumerate embeddings by exhaustive candidate product. Oracle use only.

    Independent of the search in iter_embeddings by construction: no shared
    pruning, no shared ordering. Output is sorted canonically (object ids in
    sorted-pattern-id order). Scenes larger than `size_bound` nodes raise
    OracleSizeError.
    """
    _require_same_om(asg, csg)
    if len(csg.nodes) > size_bound:
        raise OracleSizeError(
            f"scene has {len(csg.nodes)} nodes, oracle bound is {size_bound}")
    pids = sorted(asg.pattern_nodes)
    om = asg.om
    cand_lists: list[list[str]] = []
    for pid in pids:
        if pid == asg.ego_pattern_id:
            pool = [csg.ego_id]
        else:
            pool = sorted(csg.nodes)
        cls = asg.pattern_nodes[pid]
        cand_lists.append([oid for oid in pool if om.is_subclass(csg.nodes[oid].cls, cls)])
    results: list[Embedding] = []
    for combo in itertools.product(*cand_lists):
        if len(set(combo)) != len(combo):
            continue
        mapping = dict(zip(pids, combo))
        ok = all(
            csg.has_edge(mapping[src], rel, mapping[dst])
            for src, rel, dst in asg.pattern_edges
        )
        if ok and induced:
            for (pa, oa), (pb, ob) in itertools.permutations(mapping.items(), 2):
                for rel in csg.labels_between(oa, ob):
                    if (pa, rel, pb) not in asg.pattern_edges:
                        ok = False
        if ok:
            results.append(Embedding.from_dict(mapping))
    results.sort(key=lambda e: tuple(oid for _, oid in e.mapping))
    return results


def check_embedding(
    asg: AbstractSceneGraph,
    csg: ConcreteSceneGraph,
    embedding: Embedding,
    *,
    induced: bool = False,
) -> list[str]:
    """Independently verify an embedding; returns human-readable defects.

    An empty list means the embedding is valid. Used by tests and by the
    oracle cross-check mode; intentionally re-derives every condition
    instead of trusting matcher internals.
    """
    problems: list[str] = []
    mapping = embedding.as_dict()
    if set(mapping) != set(asg.pattern_nodes):
        problems.append("mapped pattern ids do not equal declared pattern ids")
        return problems
    if len(set(mapping.values())) != len(mapping):
        problems.append("mapping is not injective")
    if mapping.get(asg.ego_pattern_id) != csg.ego_id:
        problems.append("ego pattern node is not mapped to the scene ego")
    for pid, oid in mapping.items():
        if oid not in csg.nodes:
            problems.append(f"{pid} mapped to unknown object {oid}")
            continue
        if not asg.om.is_subclass(csg.nodes[oid].cls, asg.pattern_nodes[pid]):
            problems.append(
                f"{pid}: object {oid} has class {csg.nodes[oid].cls}, "
                f"not compatible with {asg.pattern_nodes[pid]}")
    for src, rel, dst in sorted(asg.pattern_edges):
        if (mapping.get(src), rel, mapping.get(dst)) not in csg.edges:
            problems.append(f"pattern edge ({src}, {rel}, {dst}) not preserved")
    if induced:
        for (pa, oa), (pb, ob) in itertools.permutations(sorted(mapping.items()), 2):
            for rel in sorted(csg.labels_between(oa, ob)):
                if (pa, rel, pb) not in asg.pattern_edges:
                    problems.append(
                        f"scene edge ({oa}, {rel}, {ob}) has no pattern counterpart")
    return problems
