"""Command-line entry point: ``gasearch bench run|curves|list`` and ``gasearch solve``."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import harness, testbed
from .core import GasearchError

CONFIG_ERROR = 2


def _int_reads(text: str) -> int:
    """Accept ``200000`` as well as ``2e5``."""
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not value.is_integer() or value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive whole number of reads, got {text}")
    return int(value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gasearch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="benchmark runs and success curves")
    bench_sub = bench.add_subparsers(dest="bench_command", required=True)

    run = bench_sub.add_parser("run", help="run a benchmark plan and export results")
    run.add_argument("--algos", default="gas,bh,cs,de")
    run.add_argument("--functions", default="all", help="all, 2d, lj, rastrigin or a comma list")
    run.add_argument("--budget", type=_int_reads, default=10**6, help="reads per run")
    run.add_argument("--runs", type=int, default=1, help="runs per function (T)")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--out", required=True)

    curves = bench_sub.add_parser("curves", help="recompute curves from traces.csv")
    curves.add_argument("--in", dest="in_dir", required=True)
    curves.add_argument("--out", required=True)

    bench_sub.add_parser("list", help="print the function registry")

    solve = sub.add_parser("solve", help="a single run on one function")
    solve.add_argument("--algo", default="gas")
    solve.add_argument("--function", required=True)
    solve.add_argument("--budget", type=_int_reads, default=10**6)
    solve.add_argument("--seed", type=int, default=0)
    return parser


def _bench_run(args) -> int:
    if args.runs < 1 or args.workers < 1:
        raise ValueError("--runs and --workers must be at least 1")
    plan = harness.BenchmarkPlan(
        algorithms=tuple(harness.resolve_algorithms(args.algos)),
        functions=tuple(testbed.resolve_functions(args.functions)),
        budget=args.budget, runs=args.runs, base_seed=args.seed)
    traces = harness.run_plan(plan, workers=args.workers)
    curves = harness.compute_curves(traces, plan.sample_grid, plan.runs)
    paths = harness.export_results(traces, curves, args.out, plan)
    for c in curves:
        print(f"{c.algorithm:4s} T={c.runs_T:<3d} solved {100 * c.points[-1][1]:5.1f}% "
              f"at {c.points[-1][0]} reads")
    print(f"wrote {paths['traces']}, {paths['summary']}, {paths['curves']}")
    return 0


def _solve(args) -> int:
    trace = harness.run_single(args.algo, args.function, args.budget, args.seed)
    with np.printoptions(precision=10):
        print(f"function   {trace.objective}")
        print(f"algorithm  {trace.algorithm}")
        print(f"status     {trace.status}")
        print(f"best value {trace.best_value!r}")
        print(f"best point {trace.best_position}")
        print(f"reads      {trace.reads_used}")
        if trace.solved:
            print(f"solved at  {trace.solved_at_reads}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            return _solve(args)
        if args.bench_command == "list":
            print(testbed.manifest_json())
            return 0
        if args.bench_command == "curves":
            paths = harness.recompute(args.in_dir, args.out)
            print(f"wrote {paths['summary']}, {paths['curves']}")
            return 0
        return _bench_run(args)
    except (GasearchError, ValueError, KeyError, FileNotFoundError) as exc:
        print(f"gasearch: error: {exc}", file=sys.stderr)
        return CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
