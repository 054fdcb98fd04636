"""Benchmark orchestration: single and concurrent runs, success curves,
and persistence of results.

A concurrent run is ``T`` independently seeded runs of one algorithm, each
with the full read budget; a function counts as solved at ``b`` reads as
soon as any of the runs has hit its target by then. Seeds for run ``i`` are
derived from ``(base_seed, i)`` alone, so the runs for a small ``T`` are a
prefix of those for a larger one.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import testbed
from .baselines import bh_run, cs_run, de_run
from .core import EvalBudget, IncompleteData, RngStream, RunTrace, UnknownAlgorithm
from .gas import gas_run

ALGORITHMS = {"gas": gas_run, "bh": bh_run, "cs": cs_run, "de": de_run}
CSV_HEADER = ["algo", "function", "run_id", "seed", "reads", "best_value", "error"]
PANEL_RUNS = (1, 10, 20, 50)

LINE_STYLES = {
    "gas": dict(linestyle="-", linewidth=2.5),
    "bh": dict(linestyle="-.", linewidth=1.5),
    "cs": dict(linestyle="-", linewidth=0.8, marker="|", markersize=6),
    "de": dict(linestyle="--", linewidth=1.5),
}


def resolve_algorithms(selector: str) -> list[str]:
    names = [s.strip() for s in selector.split(",") if s.strip()]
    if not names:
        raise UnknownAlgorithm("empty algorithm list")
    for name in names:
        if name not in ALGORITHMS:
            raise UnknownAlgorithm(name)
    return list(dict.fromkeys(names))


def derive_seed(base_seed: int, index: int) -> int:
    digest = hashlib.blake2b(f"{base_seed}:{index}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little") >> 1


def log_grid(budget: int, points: int = 30, start: int = 100) -> list[int]:
    """Integer checkpoints spaced logarithmically from ``start`` to ``budget``."""
    if budget < 1:
        raise ValueError("budget must be positive")
    start = min(start, budget)
    grid = np.unique(np.rint(np.geomspace(start, budget, points)).astype(np.int64))
    grid[-1] = budget
    return [int(b) for b in grid]


@dataclass(frozen=True)
class BenchmarkPlan:
    algorithms: tuple
    functions: tuple
    budget: int
    runs: int = 1
    base_seed: int = 0
    sample_grid: Optional[tuple] = None

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be a positive number of reads")
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise UnknownAlgorithm(a)
        for f in self.functions:
            testbed.get(f)
        if self.sample_grid is None:
            object.__setattr__(self, "sample_grid", tuple(log_grid(self.budget)))
        elif max(self.sample_grid) > self.budget:
            raise ValueError("sample grid extends beyond the budget")

    def to_dict(self) -> dict:
        return {
            "algorithms": list(self.algorithms),
            "functions": list(self.functions),
            "budget": self.budget,
            "runs": self.runs,
            "base_seed": self.base_seed,
            "sample_grid": list(self.sample_grid),
        }


@dataclass
class SuccessCurve:
    algorithm: str
    runs_T: int
    points: list = field(default_factory=list)

    def fraction_at(self, reads: int) -> float:
        frac = 0.0
        for b, f in self.points:
            if b <= reads:
                frac = f
        return frac


def run_single(algorithm: str, function: str, budget: int, seed: int, run_id: int = 0,
               config=None) -> RunTrace:
    """One benchmark run: solver defaults, the function's known minimum as
    target (which also turns off the stability halt)."""
    if algorithm not in ALGORITHMS:
        raise UnknownAlgorithm(algorithm)
    spec = testbed.get(function)
    trace = ALGORITHMS[algorithm](spec, config, EvalBudget(limit=int(budget)), RngStream(seed),
                                  spec.known_min_value)
    trace.run_id = run_id
    return trace


def _run_task(task):
    return run_single(*task)


def _execute(tasks: list, workers: int) -> list[RunTrace]:
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_task, tasks, chunksize=1))
    return [_run_task(t) for t in tasks]


def run_concurrent(algorithm: str, function: str, budget: int, runs: int, base_seed: int = 0,
                   workers: int = 1) -> list[RunTrace]:
    if runs < 1:
        raise ValueError("runs must be at least 1")
    tasks = [(algorithm, function, budget, derive_seed(base_seed, i), i) for i in range(runs)]
    return _execute(tasks, workers)


def run_plan(plan: BenchmarkPlan, workers: int = 1) -> list[RunTrace]:
    tasks = [(a, f, plan.budget, derive_seed(plan.base_seed, i), i)
             for a in plan.algorithms for f in plan.functions for i in range(plan.runs)]
    return _execute(tasks, workers)


def concurrent_solved_at(traces: Sequence[RunTrace]) -> Optional[int]:
    """Reads at which the first of several simultaneous runs hits its target."""
    hits = [t.solved_at_reads for t in traces if t.solved_at_reads is not None]
    return min(hits) if hits else None


def success_curve(groups: dict, sample_grid: Iterable[int], runs: int,
                  algorithm: str = "") -> SuccessCurve:
    """Fraction of functions solved by any of the first ``runs`` traces, per checkpoint.

    ``groups`` maps function name to its traces ordered by run index.
    """
    firsts = []
    for name, traces in groups.items():
        if len(traces) < runs:
            raise IncompleteData(f"{name}: {len(traces)} runs, {runs} needed")
        firsts.append(concurrent_solved_at(list(traces)[:runs]))
    n = len(firsts)
    points = []
    for b in sample_grid:
        solved = sum(1 for s in firsts if s is not None and s <= b)
        points.append((int(b), solved / n if n else 0.0))
    return SuccessCurve(algorithm=algorithm, runs_T=runs, points=points)


def group_traces(traces: Iterable[RunTrace]) -> dict:
    """``{algorithm: {function: [traces by run_id]}}``"""
    out: dict = defaultdict(lambda: defaultdict(list))
    for t in traces:
        out[t.algorithm][t.objective].append(t)
    for per_fn in out.values():
        for lst in per_fn.values():
            lst.sort(key=lambda t: t.run_id)
    return {a: dict(fns) for a, fns in out.items()}


def panel_runs(runs: int) -> list[int]:
    return sorted({t for t in PANEL_RUNS if t <= runs} | {runs})


def compute_curves(traces: Iterable[RunTrace], sample_grid, runs: int) -> list[SuccessCurve]:
    grouped = group_traces(traces)
    return [success_curve(grouped[a], sample_grid, t, algorithm=a)
            for a in sorted(grouped) for t in panel_runs(runs)]


# --------------------------------------------------------------------------
# persistence
# --------------------------------------------------------------------------

def _objective_value(trace: RunTrace, internal: float) -> float:
    return -internal if trace.sense == "maximize" else internal


def traces_csv(traces: Iterable[RunTrace]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for t in sorted(traces, key=lambda t: (t.algorithm, t.objective, t.run_id)):
        target = testbed.get(t.objective).known_min_value
        for reads, internal in t.samples:
            value = _objective_value(t, internal)
            writer.writerow([t.algorithm, t.objective, t.run_id, t.seed, reads,
                             repr(float(value)), repr(float(abs(value - target)))])
    return buf.getvalue()


def read_traces_csv(path) -> list[RunTrace]:
    """Rebuild run histories from ``traces.csv``; ``solved_at_reads`` is the
    first recorded sample within the function's tolerance."""
    runs: dict = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        for algo, fn, run_id, seed, reads, value, error in reader:
            key = (algo, fn, int(run_id))
            if key not in runs:
                spec = testbed.get(fn)
                runs[key] = RunTrace(algorithm=algo, objective=fn, seed=int(seed),
                                     run_id=int(run_id), sense=spec.sense,
                                     target=spec.known_min_value)
            t = runs[key]
            value = float(value)
            internal = -value if t.sense == "maximize" else value
            t.samples.append((int(reads), internal))
            t.reads_used = int(reads)
            tol = testbed.get(fn).success_tolerance
            if t.solved_at_reads is None and float(error) <= tol:
                t.solved_at_reads = int(reads)
    return list(runs.values())


def summary_dict(traces: Sequence[RunTrace], curves: Sequence[SuccessCurve],
                 plan: Optional[BenchmarkPlan] = None) -> dict:
    solved: dict = {}
    for algo, per_fn in group_traces(traces).items():
        solved[algo] = {fn: [t.solved_at_reads for t in ts] for fn, ts in per_fn.items()}
    return {
        "plan": plan.to_dict() if plan is not None else None,
        "solved_at_reads": solved,
        "curves": [{"algorithm": c.algorithm, "runs_T": c.runs_T,
                    "points": [[b, f] for b, f in c.points]} for c in curves],
    }


def render_curves(curves: Sequence[SuccessCurve], path) -> None:
    """One panel per ``T``; each algorithm in its own line style."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    panels = sorted({c.runs_T for c in curves}) or [1]
    with matplotlib.rc_context({"svg.hashsalt": "gasearch", "svg.fonttype": "none"}):
        fig, axes = plt.subplots(1, len(panels), figsize=(4.5 * len(panels), 4), squeeze=False)
        for ax, t in zip(axes[0], panels):
            for c in curves:
                if c.runs_T != t or not c.points:
                    continue
                xs = [b for b, _ in c.points]
                ys = [100 * f for _, f in c.points]
                ax.plot(xs, ys, color="black", label=c.algorithm.upper(),
                        **LINE_STYLES.get(c.algorithm, {}))
            ax.set_xscale("log")
            ax.set_ylim(0, 100)
            ax.set_xlabel("function reads")
            ax.set_title(f"T = {t}")
            if ax.lines:
                ax.legend(loc="lower right")
        axes[0][0].set_ylabel("functions solved (%)")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def export_results(traces: Sequence[RunTrace], curves: Sequence[SuccessCurve], out_dir,
                   plan: Optional[BenchmarkPlan] = None) -> dict:
    """Write ``traces.csv``, ``summary.json`` and ``curves.svg`` into ``out_dir``."""
    out = Path(out_dir)
    os.makedirs(out, exist_ok=True)
    paths = {"traces": out / "traces.csv", "summary": out / "summary.json",
             "curves": out / "curves.svg"}
    paths["traces"].write_text(traces_csv(traces))
    paths["summary"].write_text(
        json.dumps(summary_dict(traces, curves, plan), indent=2, sort_keys=True) + "\n")
    render_curves(curves, paths["curves"])
    return paths


def recompute(in_dir, out_dir) -> dict:
    """Rebuild curves and plots from a previous run's ``traces.csv``."""
    in_dir = Path(in_dir)
    traces = read_traces_csv(in_dir / "traces.csv")
    plan = None
    summary_path = in_dir / "summary.json"
    if summary_path.exists():
        stored = json.loads(summary_path.read_text()).get("plan")
        if stored:
            plan = BenchmarkPlan(algorithms=tuple(stored["algorithms"]),
                                 functions=tuple(stored["functions"]),
                                 budget=stored["budget"], runs=stored["runs"],
                                 base_seed=stored["base_seed"],
                                 sample_grid=tuple(stored["sample_grid"]))
    if plan is not None:
        grid, runs = plan.sample_grid, plan.runs
        # functions with no recorded samples still count in the denominator
        for a in plan.algorithms:
            for f in plan.functions:
                have = {t.run_id for t in traces if t.algorithm == a and t.objective == f}
                for i in range(plan.runs):
                    if i not in have:
                        traces.append(RunTrace(algorithm=a, objective=f,
                                               seed=derive_seed(plan.base_seed, i), run_id=i))
    else:
        budget = max((t.reads_used for t in traces), default=1)
        grid = log_grid(max(budget, 1))
        runs = min((len(ts) for per_fn in group_traces(traces).values()
                    for ts in per_fn.values()), default=1)
    curves = compute_curves(traces, grid, runs)
    return export_results(traces, curves, out_dir, plan)
