"""Predicate evaluation over bound pattern nodes.

Once the matcher has mapped pattern nodes to scene objects, a Binding
snapshots the mapped objects' attribute values and the predicate list is
evaluated against it in declaration order, stopping at the first failure.

Comparisons are exact by default: dist(ego, obstacle) == 20.0 means float
equality, and interval bounds are honored exactly, so thresholds behave
boundary-inclusive or -exclusive precisely as written. An optional epsilon
loosens every numeric comparison by that margin for noisy inputs; 0.0 (the
default) keeps exact semantics.

A predicate that touches an attribute the scene did not provide raises
MissingAttributeError naming "<pattern-id>.<attribute>"; callers decide how
to surface it (the monitor turns it into an Error verdict, distinct from
Violated).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import MissingAttributeError, SceneMonError
from .dsl import (
    And,
    AttrRef,
    BoolLit,
    Call,
    Compare,
    Expr,
    InInterval,
    NodeRef,
    NumberLit,
    StringLit,
)
from .matching import Embedding
from .scene_graph import ConcreteSceneGraph


@dataclass(frozen=True)
class BoundObject:
    pattern_id: str
    object_id: str
    cls: str
    attributes: Mapping[str, object]

    def attribute(self, name: str) -> object:
        try:
            return self.attributes[name]
        except KeyError:
            raise MissingAttributeError(f"{self.pattern_id}.{name}") from None


@dataclass(frozen=True)
class Binding:
    """Pattern-id keyed snapshot of the matched objects' attribute values."""

    objects: Mapping[str, BoundObject]

    def __getitem__(self, pattern_id: str) -> BoundObject:
        return self.objects[pattern_id]


def bind(embedding: Embedding, csg: ConcreteSceneGraph) -> Binding:
    """Snapshot attribute values for every mapped object."""
    objects = {}
    for pid, oid in embedding.mapping:
        obj = csg.nodes[oid]
        objects[pid] = BoundObject(pid, oid, obj.cls, dict(obj.attributes))
    return Binding(objects)


def dist(a: BoundObject, b: BoundObject) -> float:
    """Euclidean distance between two bound objects' positions."""
    pa = a.attribute("position")
    pb = b.attribute("position")
    return math.hypot(pa[0] - pb[0], pa[1] - pb[1])


BUILTIN_FUNCTIONS = {"dist": dist}


def _compare(op: str, left: object, right: object, epsilon: float) -> bool:
    if isinstance(left, (str, bool)) or isinstance(right, (str, bool)):
        if op == "==":
            return left == right
        if op == "!=":
            return left != right
        raise SceneMonError(f"operator {op} not defined for {left!r} and {right!r}")
    a = float(left)  # type: ignore[arg-type]
    b = float(right)  # type: ignore[arg-type]
    if op == "==":
        return abs(a - b) <= epsilon
    if op == "!=":
        return abs(a - b) > epsilon
    if op == "<":
        return a < b + epsilon
    if op == "<=":
        return a <= b + epsilon
    if op == ">":
        return a > b - epsilon
    if op == ">=":
        return a >= b - epsilon
    raise SceneMonError(f"unknown comparison operator {op}")


def _eval(expr: Expr, binding: Binding, epsilon: float) -> object:
    if isinstance(expr, NumberLit):
        return expr.value
    if isinstance(expr, BoolLit):
        return expr.value
    if isinstance(expr, StringLit):
        return expr.value
    if isinstance(expr, AttrRef):
        return binding[expr.node_id].attribute(expr.attr)
    if isinstance(expr, Call):
        impl = BUILTIN_FUNCTIONS.get(expr.fn)
        if impl is None:
            raise SceneMonError(f"no implementation for function {expr.fn!r}")
        args = [
            binding[a.name] if isinstance(a, NodeRef) else _eval(a, binding, epsilon)
            for a in expr.args
        ]
        return impl(*args)
    if isinstance(expr, Compare):
        return _compare(expr.op,
                        _eval(expr.left, binding, epsilon),
                        _eval(expr.right, binding, epsilon),
                        epsilon)
    if isinstance(expr, InInterval):
        x = float(_eval(expr.value, binding, epsilon))  # type: ignore[arg-type]
        lo = float(_eval(expr.lo, binding, epsilon))  # type: ignore[arg-type]
        hi = float(_eval(expr.hi, binding, epsilon))  # type: ignore[arg-type]
        lo_ok = (x >= lo - epsilon) if expr.lo_closed else (x > lo - epsilon)
        hi_ok = (x <= hi + epsilon) if expr.hi_closed else (x < hi + epsilon)
        return lo_ok and hi_ok
    if isinstance(expr, And):
        return bool(_eval(expr.left, binding, epsilon)) and bool(
            _eval(expr.right, binding, epsilon))
    raise SceneMonError(f"cannot evaluate expression {expr!r}")


def evaluate(
    predicates: Sequence[Expr],
    binding: Binding,
    *,
    epsilon: float = 0.0,
) -> tuple[bool, int | None]:
    """Evaluate predicates in order against a binding.

    Returns (True, None) when every predicate holds, else (False, i) for the
    first failing predicate's index. Raises MissingAttributeError if a
    predicate touches an attribute the binding does not carry.
    """
    for idx, pred in enumerate(predicates):
        if not _eval(pred, binding, epsilon):
            return False, idx
    return True, None
