"""Command-line frontend.

    hlpg solve game.hlpg [--approach A ...] [--stats FILE] [--strategy-out FILE] [--arena-out FILE]
    hlpg bench cs --n 3 [--approach A ...] [--emit FILE] [--stats FILE]
"""
from __future__ import annotations

import argparse
import json
import random
import sys
import time
from dataclasses import dataclass

from . import game as arena
from . import strategy as strat
from .bench import BenchSpec
from .model import CapExceeded, ModelError, SymmetricGame, expand, parse_game, print_game
from .symmetry import enumerate_symmetries

EXIT_OK, EXIT_USAGE, EXIT_MODEL, EXIT_CAP = 0, 2, 3, 4

STATS_FIELDS = ("instance", "params", "approach", "realizable", "nodes", "edges", "accepting",
                "symmetries", "build_ms", "solve_ms", "translate_ms", "total_ms")


class UsageError(Exception):
    pass


def _ms(t0: float) -> float:
    return round((time.perf_counter() - t0) * 1000, 3)


@dataclass
class Analysis:
    pt: object
    arena: arena.BuchiGame
    solution: arena.Solution
    strategy: strat.PGStrategy | None
    report: strat.ValidationReport | None
    timings: dict


def run_analysis(game: SymmetricGame, approach: str, node_cap: int = arena.DEFAULT_NODE_CAP,
                 parallel: int = 1, strategy: bool = False) -> Analysis:
    """Build, solve and, for a realizable game when asked, translate and validate."""
    t0 = time.perf_counter()
    pt = expand(game)
    bg = arena.build(approach, pt, cap=node_cap, parallel=parallel)
    build_ms = _ms(t0)
    t1 = time.perf_counter()
    sol = arena.solve_buchi(bg)
    solve_ms = _ms(t1)
    s = report = None
    translate_ms = 0.0
    if strategy and sol.realizable:
        t2 = time.perf_counter()
        s = strat.synthesize(bg, sol)
        translate_ms = _ms(t2)
        report = strat.validate_strategy(s, pt)
    timings = {"build_ms": build_ms, "solve_ms": solve_ms, "translate_ms": translate_ms, "total_ms": _ms(t0)}
    return Analysis(pt, bg, sol, s, report, timings)


def stats_record(game: SymmetricGame, params: dict, a: Analysis) -> dict:
    bg = a.arena
    record = {
        "instance": game.name, "params": params, "approach": bg.mode,
        "realizable": a.solution.realizable, "nodes": bg.n_nodes, "edges": bg.n_edges,
        "accepting": bg.n_accepting, "symmetries": bg.symmetries, **a.timings,
    }
    return {k: record[k] for k in STATS_FIELDS}


def strategy_text(s: strat.PGStrategy, path: str) -> str:
    return strat.to_dot(s) if path.endswith(".dot") else strat.to_text(s)


def analyze(game: SymmetricGame, approach: str, params: dict, args, out) -> dict:
    """Run one approach with the CLI's outputs; returns the stats record."""
    a = run_analysis(game, approach, args.node_cap, args.parallel, strategy=bool(args.strategy_out))
    bg = a.arena
    print(f"{'REALIZABLE' if a.solution.realizable else 'UNREALIZABLE'} approach={approach} nodes={bg.n_nodes}",
          file=out)
    if args.dump_reps:
        for v in range(bg.n_nodes):
            print(f"[{v}] {arena.describe_node(bg, v)}", file=out)
    if args.arena_out:
        _write(args.arena_out, approach, args.approach,
               arena.to_dot(bg, lambda v: arena.describe_node(bg, v)))
    if a.strategy is not None:
        s = a.strategy
        _write(args.strategy_out, approach, args.approach, strategy_text(s, args.strategy_out))
        checks = " ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in a.report.summary().items())
        print(f"strategy places={len(s.places)} transitions={len(s.transitions)} {checks}", file=out)
    return stats_record(game, params, a)


def _write(path: str, approach: str, approaches: list[str], text: str) -> None:
    # several approaches in one run get one file each
    if len(approaches) > 1:
        stem, dot, ext = path.rpartition(".")
        path = f"{stem}.{approach}.{ext}" if dot else f"{path}.{approach}"
    with open(path, "w") as fh:
        fh.write(text)


def _emit_stats(records: list[dict], path: str | None, out) -> None:
    lines = [json.dumps(r, sort_keys=False) for r in records]
    if path is None:
        for line in lines:
            print(line, file=out)
        return
    with open(path, "a") as fh:
        for line in lines:
            fh.write(line + "\n")


def _dump_symmetries(game: SymmetricGame, out) -> None:
    syms = enumerate_symmetries(game)
    print(f"symmetries {len(syms)}", file=out)
    for s in syms:
        print("  " + s.cycles(game), file=out)


def run_solve(args, out) -> int:
    try:
        with open(args.file) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {args.file}: {exc.strerror}") from exc
    game = parse_game(text)
    if args.dump_symmetries:
        _dump_symmetries(game, out)
    records = [analyze(game, a, {}, args, out) for a in args.approach]
    if args.stats:
        _emit_stats(records, args.stats, out)
    return EXIT_OK


def run_bench(args, out) -> int:
    family = args.family.lower()
    if family == "cm":
        values = (args.m, args.o)
        names = ("m", "o")
    else:
        values = (args.n,)
        names = ("n",)
    if any(v is None for v in values):
        raise UsageError(f"{family} needs " + " ".join(f"--{n}" for n in names))
    try:
        spec = BenchSpec(family, values)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    game = spec.game()
    if args.emit:
        with open(args.emit, "w") as fh:
            fh.write(print_game(game))
    if args.dump_symmetries:
        _dump_symmetries(game, out)
    params = dict(zip(names, values))
    records = [analyze(game, a, params, args, out) for a in args.approach]
    if records:
        _emit_stats(records, args.stats, out)
    return EXIT_OK


def _common(p: argparse.ArgumentParser, default_approach: list[str] | None) -> None:
    p.add_argument("--approach", action="extend", nargs="+", choices=arena.APPROACHES, default=None,
                   help="arena construction; repeatable")
    p.add_argument("--stats", help="append one JSON record per line")
    p.add_argument("--strategy-out", help="strategy file (.dot for DOT, anything else for text)")
    p.add_argument("--arena-out", help="arena as DOT")
    p.add_argument("--node-cap", type=int, default=arena.DEFAULT_NODE_CAP)
    p.add_argument("--parallel", type=int, default=1, metavar="K")
    p.add_argument("--dump-symmetries", action="store_true")
    p.add_argument("--dump-reps", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(default_approach=default_approach)


def parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hlpg", description="Realizability of high-level Petri games.")
    sub = ap.add_subparsers(dest="command", required=True)
    solve = sub.add_parser("solve", help="solve a game file")
    solve.add_argument("file")
    _common(solve, ["canonical"])
    bench = sub.add_parser("bench", help="generate and optionally solve a benchmark instance")
    bench.add_argument("family", choices=["cs", "dw", "cm", "CS", "DW", "CM"])
    bench.add_argument("--n", type=int)
    bench.add_argument("--m", type=int)
    bench.add_argument("--o", type=int)
    bench.add_argument("--emit", help="write the generated game")
    _common(bench, [])
    return ap


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    ap = parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.approach is None:
        args.approach = list(args.default_approach)
    if args.node_cap < 1 or args.parallel < 1:
        print("hlpg: --node-cap and --parallel must be positive", file=sys.stderr)
        return EXIT_USAGE
    random.seed(args.seed)
    try:
        if args.command == "solve":
            return run_solve(args, out)
        return run_bench(args, out)
    except UsageError as exc:
        print(f"hlpg: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapExceeded as exc:
        print(f"hlpg: cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except ModelError as exc:
        print(f"hlpg: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
