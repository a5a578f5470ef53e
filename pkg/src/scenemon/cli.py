"""Command line front end.

Subcommands:

* ``check``: evaluate one scene record against properties.
* ``monitor``: evaluate a scene stream, optionally tracking a maneuver's
  phase sequence.
* ``gen``: sample a built-in scenario script into a scene stream.
* ``bench``: time property checking on a synthetic dense scene.
* ``export``: render a scene or property as Graphviz DOT.

Verdicts are emitted as JSON lines on stdout (or ``--out``); diagnostics go
to stderr. Exit codes: 0 all satisfied, 1 at least one violated verdict
(under ``--phases``, a phase-sequence violation; off-phase properties are
expected to be unsatisfied), 2 usage or input validation failure, 3
evaluation errors or an oracle divergence.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import statistics
import sys
import time
from contextlib import contextmanager
from dataclasses import replace
from typing import Iterator, Sequence, TextIO

from .dsl import load_asg
from .errors import SceneMonError, StreamOrderError
from .matching import brute_force_embeddings, check_embedding, find_embeddings
from .monitor import (
    CauseKind,
    PhaseAutomaton,
    Result,
    Verdict,
    serialize_verdict,
    sg_comparison,
)
from .object_model import ObjectModel, load_object_model
from .scene_graph import (
    AbstractSceneGraph,
    ConcreteSceneGraph,
    SceneObject,
    export_dot,
    make_csg,
    parse_csg,
    read_scene_stream,
    serialize_scene,
)
from .scenarios import (
    LANE_WIDTH,
    ParticipantState,
    builtin_asgs,
    builtin_script,
    derive_edges,
    environment_nodes,
    generate_trace,
    load_bundled_asg,
    scenario_names,
    _two_lane_layout,
)


def _kv_offset(text: str) -> tuple[str, float]:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(
            f"expected KEY=OFFSET, got {text!r}")
    try:
        return key, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"offset for {key!r} must be a number, got {value!r}") from None


def _build_parser() -> argparse.ArgumentParser:
    om_parent = argparse.ArgumentParser(add_help=False)
    om_parent.add_argument(
        "--om", default=os.environ.get("SCENEMON_OM", "default"),
        metavar="PATH",
        help="object model schema file, or 'default' for the bundled one "
             "(env: SCENEMON_OM)")

    props_parent = argparse.ArgumentParser(add_help=False)
    props_parent.add_argument(
        "--props", action="append", default=[], metavar="PATH",
        help="property file (.asg) or a directory of them; repeatable")
    props_parent.add_argument(
        "--builtin", action="append", default=[], metavar="NAME",
        help="bundled property by name, e.g. obstacle-ahead or P1-2; "
             "repeatable")

    eval_parent = argparse.ArgumentParser(add_help=False)
    eval_parent.add_argument(
        "--epsilon", type=float, default=0.0, metavar="E",
        help="comparison tolerance applied to every numeric predicate "
             "(default 0: exact)")
    eval_parent.add_argument(
        "--induced", action="store_true",
        help="require matched objects to carry no extra edges between them")
    eval_parent.add_argument(
        "--oracle", action="store_true",
        help="cross-check every verdict against the exhaustive reference "
             "matcher (small scenes only)")

    out_parent = argparse.ArgumentParser(add_help=False)
    out_parent.add_argument(
        "--out", default=None, metavar="FILE",
        help="write output here instead of stdout")

    parser = argparse.ArgumentParser(
        prog="scenemon",
        description="Check traffic scenes against scene-graph properties.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser(
        "check", parents=[om_parent, props_parent, eval_parent, out_parent],
        help="evaluate one scene record against properties")
    p_check.add_argument("scene", help="JSON file holding a single scene record")
    p_check.set_defaults(func=_cmd_check)

    p_monitor = sub.add_parser(
        "monitor", parents=[om_parent, props_parent, eval_parent, out_parent],
        help="evaluate a scene stream (JSON lines)")
    p_monitor.add_argument(
        "stream", nargs="?", default=None,
        help="scene stream file with one record per line, or '-' for stdin")
    p_monitor.add_argument(
        "--in", dest="in_stream", default=None, metavar="FILE",
        help="alternative way to name the scene stream file")
    p_monitor.add_argument(
        "--phases", choices=scenario_names(), default=None,
        help="also track this scenario's phase sequence; its phase "
             "properties are added to the property set")
    p_monitor.set_defaults(func=_cmd_monitor)

    p_gen = sub.add_parser(
        "gen", parents=[om_parent, out_parent],
        help="generate a scene stream from a built-in scenario")
    p_gen.add_argument(
        "--scenario", required=True, choices=scenario_names())
    p_gen.add_argument(
        "--perturb", action="append", default=[], type=_kv_offset,
        metavar="KEY=OFFSET",
        help="shift one scripted safety distance by OFFSET meters during "
             "its phase; repeatable")
    p_gen.add_argument(
        "--dt", type=float, default=None, metavar="SECONDS",
        help="override the script's sampling step")
    p_gen.set_defaults(func=_cmd_gen)

    p_bench = sub.add_parser(
        "bench", parents=[om_parent, out_parent],
        help="time property checking on a synthetic dense scene")
    p_bench.add_argument("--nodes", type=int, default=100,
                         help="scene size in objects (default 100)")
    p_bench.add_argument("--repeat", type=int, default=50,
                         help="timed repetitions (default 50)")
    p_bench.add_argument("--seed", type=int, default=0,
                         help="layout seed (default 0)")
    p_bench.set_defaults(func=_cmd_bench)

    p_export = sub.add_parser(
        "export", parents=[om_parent, out_parent],
        help="render a scene or property as Graphviz DOT")
    source = p_export.add_mutually_exclusive_group(required=True)
    source.add_argument("--scene", default=None, metavar="FILE",
                        help="JSON file holding a single scene record")
    source.add_argument("--asg", default=None, metavar="FILE",
                        help="property file to render")
    source.add_argument("--builtin", default=None, metavar="NAME",
                        help="bundled property to render")
    p_export.set_defaults(func=_cmd_export)

    return parser


@contextmanager
def _open_out(path: str | None) -> Iterator[TextIO]:
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as fh:
            yield fh


@contextmanager
def _open_in(path: str) -> Iterator[TextIO]:
    if path == "-":
        yield sys.stdin
    else:
        with open(path, "r", encoding="utf-8") as fh:
            yield fh


def _resolve_props(
    paths: Sequence[str], builtins: Sequence[str], om: ObjectModel
) -> list[AbstractSceneGraph]:
    asgs: list[AbstractSceneGraph] = []
    for path in paths:
        if os.path.isdir(path):
            names = sorted(n for n in os.listdir(path) if n.endswith(".asg"))
            if not names:
                raise ValueError(f"no .asg files in directory {path!r}")
            for name in names:
                asgs.append(load_asg(os.path.join(path, name), om))
        else:
            asgs.append(load_asg(path, om))
    for name in builtins:
        asgs.append(load_bundled_asg(name, om))
    return asgs


def _require_unique_names(asgs: Sequence[AbstractSceneGraph]) -> None:
    seen: set[str] = set()
    for asg in asgs:
        if asg.name in seen:
            raise ValueError(f"duplicate property name {asg.name!r}")
        seen.add(asg.name)


def _load_scene_file(path: str, om: ObjectModel) -> ConcreteSceneGraph:
    with open(path, "r", encoding="utf-8") as fh:
        record = json.load(fh)
    return parse_csg(record, om)


def _oracle_problems(
    asg: AbstractSceneGraph,
    csg: ConcreteSceneGraph,
    verdict: Verdict,
    induced: bool,
) -> list[str]:
    """Disagreements between the search matcher and the exhaustive one."""
    native = set(find_embeddings(asg, csg, induced=induced))
    reference = set(brute_force_embeddings(asg, csg, induced=induced))
    problems: list[str] = []
    if native != reference:
        missing = len(reference - native)
        extra = len(native - reference)
        problems.append(
            f"embedding sets differ ({missing} missing, {extra} spurious)")
    if verdict.result is Result.SATISFIED:
        if verdict.witness is None or verdict.witness not in reference:
            problems.append("witness is not a reference embedding")
        elif defects := check_embedding(asg, csg, verdict.witness,
                                        induced=induced):
            problems.append("witness defects: " + "; ".join(defects))
    no_embedding = (
        verdict.cause is not None
        and verdict.cause.kind is CauseKind.NO_EMBEDDING
    )
    if no_embedding != (not reference):
        problems.append("embedding existence disagrees with verdict cause")
    return problems


def _run_oracle(
    asgs: Sequence[AbstractSceneGraph],
    csg: ConcreteSceneGraph,
    verdicts: Sequence[Verdict],
    induced: bool,
) -> bool:
    diverged = False
    for asg, verdict in zip(asgs, verdicts):
        for problem in _oracle_problems(asg, csg, verdict, induced):
            diverged = True
            print(
                f"scenemon: oracle divergence: t={csg.timestamp} "
                f"property={asg.name}: {problem}",
                file=sys.stderr)
    return diverged


def _exit_code(any_violated: bool, any_error: bool, diverged: bool) -> int:
    if any_error or diverged:
        return 3
    if any_violated:
        return 1
    return 0


def _cmd_check(args: argparse.Namespace) -> int:
    om = load_object_model(args.om)
    asgs = _resolve_props(args.props, args.builtin, om)
    if not asgs:
        raise ValueError("no properties given; use --props or --builtin")
    _require_unique_names(asgs)
    csg = _load_scene_file(args.scene, om)
    verdicts = [
        sg_comparison(asg, csg, epsilon=args.epsilon, induced=args.induced)
        for asg in asgs
    ]
    diverged = args.oracle and _run_oracle(asgs, csg, verdicts, args.induced)
    with _open_out(args.out) as out:
        for verdict in verdicts:
            print(serialize_verdict(verdict), file=out)
    return _exit_code(
        any(v.result is Result.VIOLATED for v in verdicts),
        any(v.result is Result.ERROR for v in verdicts),
        diverged)


def _cmd_monitor(args: argparse.Namespace) -> int:
    if (args.stream is None) == (args.in_stream is None):
        raise ValueError(
            "name the scene stream exactly once, positionally or via --in")
    stream_path = args.stream if args.stream is not None else args.in_stream
    om = load_object_model(args.om)
    asgs = _resolve_props(args.props, args.builtin, om)
    automaton: PhaseAutomaton | None = None
    phase_names: frozenset[str] = frozenset()
    if args.phases is not None:
        phase_asgs = builtin_asgs(args.phases, om)
        automaton = PhaseAutomaton(tuple(a.name for a in phase_asgs))
        phase_names = frozenset(a.name for a in phase_asgs)
        asgs += list(phase_asgs)
    if not asgs:
        raise ValueError(
            "no properties given; use --props, --builtin or --phases")
    _require_unique_names(asgs)

    any_violated = any_error = diverged = False
    last_t: float | None = None
    with _open_in(stream_path) as stream, _open_out(args.out) as out:
        for csg in read_scene_stream(stream, om):
            if last_t is not None and csg.timestamp < last_t:
                raise StreamOrderError(
                    f"scene timestamp {csg.timestamp} after {last_t} "
                    f"is out of order")
            last_t = csg.timestamp
            verdicts = [
                sg_comparison(asg, csg, epsilon=args.epsilon,
                              induced=args.induced)
                for asg in asgs
            ]
            if automaton is not None:
                automaton = automaton.step(
                    {v.property_name: v for v in verdicts})
                verdicts = [
                    replace(v, phase_index=automaton.index) for v in verdicts
                ]
            if args.oracle:
                diverged |= _run_oracle(asgs, csg, verdicts, args.induced)
            for verdict in verdicts:
                print(serialize_verdict(verdict), file=out)
                # a phase property being unsatisfied off-phase is expected;
                # the automaton decides whether the sequence was violated
                if verdict.property_name not in phase_names:
                    any_violated |= verdict.result is Result.VIOLATED
                any_error |= verdict.result is Result.ERROR
    if automaton is not None:
        any_violated |= automaton.violations > 0
        print(
            f"scenemon: phases {args.phases}: completed={automaton.completed} "
            f"final={automaton.current_phase} "
            f"violations={automaton.violations} "
            f"dwell={list(automaton.dwell)}",
            file=sys.stderr)
    return _exit_code(any_violated, any_error, diverged)


def _cmd_gen(args: argparse.Namespace) -> int:
    om = load_object_model(args.om)
    script = builtin_script(args.scenario, offsets=dict(args.perturb))
    if args.dt is not None:
        script = replace(script, dt=args.dt)
    with _open_out(args.out) as out:
        for csg in generate_trace(script, om):
            print(serialize_scene(csg), file=out)
    return 0


def build_bench_scene(
    n_nodes: int = 100, seed: int = 0, om: ObjectModel | None = None
) -> ConcreteSceneGraph:
    """A dense synthetic snapshot: two lanes of traffic around the ego.

    Deterministic for a given seed. The ego straddles the lane boundary so
    that multi-lane patterns have embeddings to find.
    """
    if om is None:
        om = load_object_model("default")
    if n_nodes < 5:
        raise ValueError("bench scene needs at least 5 nodes")
    rng = random.Random(seed)
    layout = _two_lane_layout()
    nodes = environment_nodes(layout)
    participants = [ParticipantState("ego", (0.0, LANE_WIDTH / 2.0))]
    nodes.append(SceneObject(
        "ego", "Vehicle",
        {"velocity": 8.33, "position": (0.0, LANE_WIDTH / 2.0)}))
    for i in range(n_nodes - 4):
        x = rng.uniform(-250.0, 250.0)
        lane_y = rng.choice((0.0, LANE_WIDTH))
        y = lane_y + rng.uniform(-0.5, 0.5)
        if i % 6 == 0:
            oid, cls, speed = f"s{i:02d}", "Static", 0.0
            heading = (1.0, 0.0)
        else:
            oid, cls = f"v{i:02d}", "Vehicle"
            speed = rng.uniform(3.0, 14.0)
            heading = (1.0, 0.0) if lane_y == 0.0 else (-1.0, 0.0)
        nodes.append(SceneObject(
            oid, cls, {"velocity": speed, "position": (x, y)}))
        participants.append(ParticipantState(oid, (x, y), heading))
    edges = derive_edges(layout, participants)
    return make_csg(om, 0.0, "ego", nodes, edges)


def run_bench(
    n_nodes: int = 100, repeat: int = 50, seed: int = 0,
    om: ObjectModel | None = None,
) -> dict:
    """Time `sg_comparison` on the synthetic scene; durations in ms."""
    if repeat < 1:
        raise ValueError("repeat must be >= 1")
    if om is None:
        om = load_object_model("default")
    csg = build_bench_scene(n_nodes, seed, om)
    asg = load_bundled_asg("P2-2", om)
    timings = []
    for _ in range(repeat):
        start = time.perf_counter()
        verdict = sg_comparison(asg, csg)
        timings.append((time.perf_counter() - start) * 1000.0)
    timings.sort()
    p99 = timings[min(len(timings) - 1, max(0, round(0.99 * len(timings)) - 1))]
    return {
        "scene_nodes": len(csg.nodes),
        "pattern_nodes": len(asg.pattern_nodes),
        "property": asg.name,
        "repeat": repeat,
        "result": verdict.result.value,
        "p50_ms": round(statistics.median(timings), 4),
        "p99_ms": round(p99, 4),
    }


def _cmd_bench(args: argparse.Namespace) -> int:
    om = load_object_model(args.om)
    report = run_bench(args.nodes, args.repeat, args.seed, om)
    with _open_out(args.out) as out:
        print(json.dumps(report, separators=(", ", ": ")), file=out)
    return 0


def _cmd_export(args: argparse.Namespace) -> int:
    om = load_object_model(args.om)
    if args.scene is not None:
        graph: ConcreteSceneGraph | AbstractSceneGraph = _load_scene_file(
            args.scene, om)
    elif args.asg is not None:
        graph = load_asg(args.asg, om)
    else:
        graph = load_bundled_asg(args.builtin, om)
    with _open_out(args.out) as out:
        out.write(export_dot(graph))
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except (SceneMonError, ValueError, OSError) as exc:
        print(f"scenemon: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
