"""Command-line entry point: ``kmst {solve,verify,oracle,gen}``.

Exit codes: 0 ok, 1 usage or I/O error, 2 infeasible instance or oracle cap
exceeded, 3 verification failure.  Every JSON output ends with a newline and
writes rationals as ``"p/q"`` strings.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional, Sequence

from .engine import EngineError, events_jsonl, to_dot
from .graph import MODELS, Graph, InstanceError, dump_instance, generate, load_instance
from .numeric import as_rational, format_rational
from .solver import certificate_for, solve
from .threshold import InfeasibleError, check_feasible
from .verify import DEFAULT_ORACLE_CAP, OracleCapError, OracleResult, brute_force_opt, check_solution

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    input: Optional[Path] = None
    k: Optional[int] = None
    output: Optional[Path] = None
    trace: Optional[Path] = None
    events: Optional[Path] = None
    dot: Optional[Path] = None
    solution: Optional[Path] = None
    seed: int = 0
    model: Optional[str] = None
    n: Optional[int] = None
    params: dict[str, Any] = field(default_factory=dict)
    oracle_cap: int = DEFAULT_ORACLE_CAP


def _dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _write(path: Optional[Path], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        path.write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from exc


def _read(path: Optional[Path], what: str) -> str:
    if path is None:
        raise UsageError(f"missing {what} path")
    try:
        return path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _load(cfg: RunConfig) -> Graph:
    return load_instance(_read(cfg.input, "input"))


def _need_k(cfg: RunConfig) -> int:
    if cfg.k is None:
        raise UsageError("-k is required")
    if cfg.k < 1:
        raise UsageError(f"k must be at least 1, got {cfg.k}")
    return cfg.k


def cmd_solve(cfg: RunConfig) -> int:
    g = _load(cfg)
    k = _need_k(cfg)
    report = solve(g, k)
    _write(cfg.output, _dumps(report.solution.to_json(g)))
    if cfg.trace is not None:
        trace: dict[str, Any] = {"k": k, "lambda1": format_rational(report.solution.lambda1)}
        if report.threshold is not None:
            trace["search"] = [s.to_json() for s in report.threshold.trace]
        if report.tie is not None:
            t = report.tie
            trace["critical_tie"] = {"index": t.index, "case": t.case, "e": t.e, "x": t.x, "f": t.f}
        trace["ties"] = [
            {
                "value": format_rational(r.value),
                "candidates": [list(c) for c in r.candidates],
                "chosen": list(r.chosen),
                "decision": r.decision,
            }
            for r in report.run.ties
        ]
        _write(cfg.trace, _dumps(trace))
    if cfg.events is not None:
        _write(cfg.events, events_jsonl(report.run))
    if cfg.dot is not None:
        _write(cfg.dot, to_dot(report.run))
    return EXIT_OK


def _parse_solution(g: Graph, text: str) -> tuple[int, list[int], int, Fraction, Fraction]:
    try:
        obj = json.loads(text)
        k = int(obj["k"])
        index = g.edge_index()
        edges = []
        for u, v in obj["edges"]:
            key = (min(u, v), max(u, v))
            if key not in index:
                raise UsageError(f"solution edge {list(key)} is not a graph edge")
            edges.append(index[key])
        return k, edges, int(obj["final_vertex"]), as_rational(obj["cost"]), as_rational(obj["lambda1"])
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed solution: {exc}") from exc


def cmd_verify(cfg: RunConfig) -> int:
    g = _load(cfg)
    k, edges, final_vertex, cost, lambda1 = _parse_solution(g, _read(cfg.solution, "solution"))
    if cfg.k is not None and cfg.k != k:
        raise UsageError(f"-k {cfg.k} disagrees with the solution's k={k}")
    check_feasible(g, k)
    try:
        cert, _ = certificate_for(g, k, lambda1)
    except EngineError as exc:
        print(f"verify: lambda1 {format_rational(lambda1)} is not a threshold: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    oracle = None
    if cfg.oracle_cap > 0:
        try:
            oracle = brute_force_opt(g, k, cfg.oracle_cap)
        except OracleCapError as exc:
            print(f"verify: oracle skipped: {exc}", file=sys.stderr)
    report = check_solution(g, k, edges, final_vertex, cost, cert, oracle)
    _write(cfg.output, _dumps(report.to_json()))
    for c in report.failures():
        print(f"verify: {c.name} failed: {c.detail}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_VERIFY


def oracle_json(g: Graph, res: OracleResult) -> dict:
    return {
        "cost": format_rational(res.opt_cost),
        "edges": [[g.edges[e][0], g.edges[e][1]] for e in res.opt_edges],
        "vertices": sorted(res.vertices),
    }


def cmd_oracle(cfg: RunConfig) -> int:
    g = _load(cfg)
    k = _need_k(cfg)
    check_feasible(g, k)
    res = brute_force_opt(g, k, cfg.oracle_cap)
    _write(cfg.output, _dumps({"k": k, **oracle_json(g, res)}))
    return EXIT_OK


def cmd_gen(cfg: RunConfig) -> int:
    if cfg.model is None or cfg.n is None:
        raise UsageError("gen needs --model and -n")
    g = generate(cfg.model, cfg.n, cfg.params, cfg.seed)
    _write(cfg.output, dump_instance(g))
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "verify": cmd_verify, "oracle": cmd_oracle, "gen": cmd_gen}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kmst", description="k-MST 2-approximation with exact arithmetic.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, k: bool = True) -> None:
        p.add_argument("-i", "--input", type=Path, required=True, help="instance JSON")
        if k:
            p.add_argument("-k", type=int, help="number of tree vertices")
        p.add_argument("-o", "--output", type=Path, help="output path (default: stdout)")

    p = sub.add_parser("solve", help="approximate k-MST")
    common(p)
    p.add_argument("--trace", type=Path, help="threshold search and tie log as JSON")
    p.add_argument("--events", type=Path, help="event log of the certificate run as JSON lines")
    p.add_argument("--dot", type=Path, help="Graphviz rendering of the laminar family")

    p = sub.add_parser("verify", help="check a solution against its certificate and the oracle")
    common(p)
    p.add_argument("solution", type=Path, help="solution JSON written by solve")
    p.add_argument("--oracle-cap", type=int, default=DEFAULT_ORACLE_CAP, help="0 skips the oracle")

    p = sub.add_parser("oracle", help="exact optimum by enumeration")
    common(p)
    p.add_argument("--oracle-cap", type=int, default=DEFAULT_ORACLE_CAP)

    p = sub.add_parser("gen", help="generate an instance")
    p.add_argument("--model", choices=sorted(MODELS), required=True)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p", dest="p", help="edge probability for gnp, e.g. 1/2")
    p.add_argument("--cost", help="uniform edge cost for path and star")
    p.add_argument("--min-cost", type=int)
    p.add_argument("--max-cost", type=int)
    p.add_argument("--side", type=int, help="grid side for euclidean-grid")
    p.add_argument("-o", "--output", type=Path)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    for name in ("input", "k", "output", "trace", "events", "dot", "solution", "seed", "model", "n", "oracle_cap"):
        if getattr(args, name, None) is not None:
            setattr(cfg, name, getattr(args, name))
    for name in ("p", "cost", "min_cost", "max_cost", "side"):
        if getattr(args, name, None) is not None:
            cfg.params[name] = getattr(args, name)
    return cfg


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    cfg = config_from_args(args)
    try:
        return COMMANDS[cfg.command](cfg)
    except InfeasibleError as exc:
        print(f"{cfg.command}: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OracleCapError as exc:
        print(f"{cfg.command}: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (UsageError, InstanceError, ValueError) as exc:
        print(f"{cfg.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
