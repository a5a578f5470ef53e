"""Scene-against-property verdicts, online stream monitoring, phase tracking.

`sg_comparison` decides one (property, scene) pair: the scene satisfies the
property iff some embedding of the pattern exists whose bound attribute
values satisfy every predicate. Verdicts distinguish three outcomes:

  * Satisfied, carrying the witness embedding that satisfied the predicates;
  * Violated, with cause NoEmbedding (pattern absent) or
    PredicateFailed(index) (pattern present, a predicate broke);
  * Error, with cause MissingAttribute (a predicate touched data the scene
    does not carry - deliberately distinct from Violated).

Embeddings are scanned lazily in deterministic matcher order and the scan
stops at the first satisfying one, so the witness is always the first
satisfying embedding in that order. When nothing satisfies: if every
evaluation completed, the cause is the first failure of the first embedding;
if any evaluation hit missing data, the verdict is an Error (a data gap must
not masquerade as a threshold violation).

`monitor_stream` applies a list of properties to a time-ordered scene
stream, yielding per-scene verdicts in (scene order, property order) before
the next scene is consumed. `PhaseAutomaton` layers maneuver-sequence
tracking on top: phases advance only when the successor phase is satisfied,
never skipping, and scenes satisfying neither the current nor the next
phase are recorded as stream-level violations.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import MissingAttributeError, StreamOrderError
from .matching import Embedding, iter_embeddings
from .predicates import bind, evaluate
from .scene_graph import AbstractSceneGraph, ConcreteSceneGraph


class Result(str, Enum):
    SATISFIED = "satisfied"
    VIOLATED = "violated"
    ERROR = "error"


class CauseKind(str, Enum):
    NO_EMBEDDING = "no_embedding"
    PREDICATE_FAILED = "predicate_failed"
    MISSING_ATTRIBUTE = "missing_attribute"


@dataclass(frozen=True)
class Cause:
    kind: CauseKind
    index: int | None = None  # failing predicate index, for PREDICATE_FAILED
    ref: str | None = None  # "<pattern-id>.<attr>", for MISSING_ATTRIBUTE

    @staticmethod
    def no_embedding() -> "Cause":
        return Cause(CauseKind.NO_EMBEDDING)

    @staticmethod
    def predicate_failed(index: int) -> "Cause":
        return Cause(CauseKind.PREDICATE_FAILED, index=index)

    @staticmethod
    def missing_attribute(ref: str) -> "Cause":
        return Cause(CauseKind.MISSING_ATTRIBUTE, ref=ref)


@dataclass(frozen=True)
class Verdict:
    timestamp: float
    property_name: str
    result: Result
    witness: Embedding | None = None
    cause: Cause | None = None
    phase_index: int | None = None

    @property
    def satisfied(self) -> bool:
        return self.result is Result.SATISFIED


def sg_comparison(
    asg: AbstractSceneGraph,
    csg: ConcreteSceneGraph,
    *,
    epsilon: float = 0.0,
    induced: bool = False,
) -> Verdict:
    """Decide whether one scene satisfies one property. See module docstring."""
    first_failure: Cause | None = None
    first_error: Cause | None = None
    saw_embedding = False
    for emb in iter_embeddings(asg, csg, induced=induced):
        saw_embedding = True
        try:
            ok, idx = evaluate(asg.predicates, bind(emb, csg), epsilon=epsilon)
        except MissingAttributeError as exc:
            if first_error is None:
                first_error = Cause.missing_attribute(exc.ref)
            continue
        if ok:
            return Verdict(csg.timestamp, asg.name, Result.SATISFIED, witness=emb)
        if first_failure is None:
            first_failure = Cause.predicate_failed(idx if idx is not None else 0)
    if not saw_embedding:
        return Verdict(csg.timestamp, asg.name, Result.VIOLATED, cause=Cause.no_embedding())
    if first_error is not None:
        return Verdict(csg.timestamp, asg.name, Result.ERROR, cause=first_error)
    return Verdict(csg.timestamp, asg.name, Result.VIOLATED, cause=first_failure)


def monitor_stream(
    asgs: Sequence[AbstractSceneGraph],
    scenes: Iterable[ConcreteSceneGraph],
    *,
    epsilon: float = 0.0,
    induced: bool = False,
) -> Iterator[Verdict]:
    """Yield one verdict per (scene, property), online.

    Verdicts for scene i appear in property declaration order and are all
    yielded before scene i+1 is pulled from the iterable. A timestamp lower
    than its predecessor raises StreamOrderError; equal timestamps are
    allowed (two snapshots may legitimately coincide).
    """
    last_t: float | None = None
    for csg in scenes:
        if last_t is not None and csg.timestamp < last_t:
            raise StreamOrderError(
                f"scene timestamp {csg.timestamp} after {last_t} is out of order")
        last_t = csg.timestamp
        for asg in asgs:
            yield sg_comparison(asg, csg, epsilon=epsilon, induced=induced)


@dataclass(frozen=True)
class PhaseAutomaton:
    """Progress tracker over an ordered phase sequence.

    `step` consumes the per-scene verdicts and returns the successor state:
    advance by one when the next phase is satisfied, stay when the current
    phase still is, otherwise record a stream-level violation and stay. The
    phase index never decreases and never skips. `completed` latches once
    the final phase is satisfied while current.
    """

    phases: tuple[str, ...]
    index: int = 0
    dwell: tuple[int, ...] = field(default=())
    completed: bool = False
    violations: int = 0

    def __post_init__(self) -> None:
        if not self.phases:
            raise ValueError("phase automaton needs at least one phase")
        if not self.dwell:
            object.__setattr__(self, "dwell", (0,) * len(self.phases))

    @property
    def current_phase(self) -> str:
        return self.phases[self.index]

    def step(self, verdicts: Mapping[str, Verdict]) -> "PhaseAutomaton":
        def verdict_for(name: str) -> Verdict:
            if name not in verdicts:
                raise ValueError(f"no verdict provided for phase {name!r}")
            return verdicts[name]

        current = verdict_for(self.phases[self.index])
        nxt = None
        if self.index + 1 < len(self.phases):
            nxt = verdict_for(self.phases[self.index + 1])
        if nxt is not None and nxt.satisfied:
            new_index = self.index + 1
            violations = self.violations
        elif current.satisfied:
            new_index = self.index
            violations = self.violations
        else:
            new_index = self.index
            violations = self.violations + 1
        dwell = list(self.dwell)
        dwell[new_index] += 1
        completed = self.completed or (
            new_index == len(self.phases) - 1 and verdict_for(self.phases[new_index]).satisfied)
        return replace(self, index=new_index, dwell=tuple(dwell),
                       completed=completed, violations=violations)


def step_phase(pa: PhaseAutomaton, verdicts: Mapping[str, Verdict]) -> PhaseAutomaton:
    """Functional alias for PhaseAutomaton.step."""
    return pa.step(verdicts)


# -- verdict records -------------------------------------------------------


def verdict_record(v: Verdict) -> dict:
    """JSON-ready record; field order is fixed for byte-stable output."""
    rec: dict = {"t": v.timestamp, "property": v.property_name, "result": v.result.value}
    if v.witness is not None:
        rec["witness"] = {pid: oid for pid, oid in v.witness.mapping}
    if v.cause is not None:
        cause: dict = {"kind": v.cause.kind.value}
        if v.cause.index is not None:
            cause["index"] = v.cause.index
        if v.cause.ref is not None:
            cause["ref"] = v.cause.ref
        rec["cause"] = cause
    if v.phase_index is not None:
        rec["phase_index"] = v.phase_index
    return rec


def serialize_verdict(v: Verdict) -> str:
    return json.dumps(verdict_record(v), separators=(", ", ": "))
