"""Benchmark runner: solves, verifies against references, reports costs.

Each benchmark has a tuned default configuration; run_benchmark applies
overrides on top, integrates, estimates the classical baseline cost from
the dominant Jacobian eigenvalue along the reference trajectory, and
measures the final-time error.  CSV and SVG emitters keep every output
deterministic so repeated runs are byte-identical.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .controller import CostReport, SolverConfig, adaptive_solve
from .oracle import dominant_eigenvalue_over_trajectory, reference_solve
from .problems import PROBLEM_NAMES, BenchmarkProblem, get_problem
from .solver import Trajectory
from . import svgplot

__all__ = [
    "RunRecord",
    "default_config",
    "run_benchmark",
    "bench_all",
    "emit_trajectory_csv",
    "parse_trajectory_csv",
    "compare_table",
    "emit_plots",
    "emit_region_svg",
    "PAPER_RATIOS",
]

PAPER_RATIOS = {
    "test-eq": 1.0 / 310.0,
    "test-sys": 1.0 / 104.0,
    "nonnormal": 1.0 / 180.0,
    "hires": 1.0 / 33.0,
    "akzo": 1.0 / 9.0,
    "vdp": 1.0 / 75.0,
    "heat": 1.0 / 31.0,
    "nonstiff": 1.0,
}

# Tuned per-problem defaults.  TOL targets the final-time error scale of
# each problem; tol follows the discrete-residual bound TOL/S0 where the
# damping of stiff modes permits (most extreme for the heat equation, where
# S0 ~ 1/lambda_N makes a loose discrete stop harmless).  k_init = k_max on
# the linear problems hands the initial transient to the first stabilizing
# burst instead of resolving it with micro-steps.  trust_factor shrinks for
# strongly nonlinear right-hand sides.
_DEFAULT_CONFIGS = {
    "test-eq": SolverConfig(TOL=1e-3, tol=1e-4, k_max=5.0, k_init=5.0),
    "test-sys": SolverConfig(TOL=1e-1, tol=1e-2, k_max=5.0, k_init=5.0),
    "nonnormal": SolverConfig(TOL=1.0, tol=1e-1, k_max=5.0, k_init=5.0, c=0.99),
    "hires": SolverConfig(
        TOL=1e-2, tol=1e-2, k_max=5.0, k_init=1e-2, c=0.99, trust_factor=0.1
    ),
    "akzo": SolverConfig(
        TOL=5e-2, tol=5e-2, k_max=1.0, k_init=1.0, c=0.99,
        trust_factor=0.2, max_fp_iterations=4,
    ),
    "vdp": SolverConfig(TOL=1e-2, tol=1e-3, k_max=1.0, k_init=1e-3, trust_factor=0.2),
    "heat": SolverConfig(
        TOL=1e-2, tol=200.0, k_max=0.04, k_init=0.04,
        mode="parabolic", stability_factor=0.1,
    ),
    "nonstiff": SolverConfig(TOL=1e-3, k_max=0.5),
}


@dataclass(frozen=True)
class RunRecord:
    """One benchmark execution: config, trajectory, costs and error."""

    name: str
    config: SolverConfig
    trajectory: Trajectory
    cost: CostReport
    final_error: float  # max-norm error vs reference at final time
    wall_time: float
    paper_ratio: Optional[float] = None

    @property
    def node_counts(self) -> dict:
        return {
            "regular": self.trajectory.count("regular"),
            "stabilizing": self.trajectory.count("stabilizing"),
        }


def default_config(name: str) -> SolverConfig:
    """The tuned configuration a benchmark runs with when no overrides are given."""
    if name not in _DEFAULT_CONFIGS:
        raise KeyError(f"unknown problem {name!r}; choose from {', '.join(PROBLEM_NAMES)}")
    return _DEFAULT_CONFIGS[name]


# Reference solutions and spectral estimates are deterministic per problem;
# cache them so repeated runs (bench-all + acceptance suite) pay once.
_reference_cache: dict = {}


def _reference_state(bench: BenchmarkProblem, t: float) -> np.ndarray:
    key = (bench.name, round(t, 12))
    if key not in _reference_cache:
        lam = _lambda_max(bench)
        ref = reference_solve(
            bench.problem, [t], analytic=bench.analytic_solution, lambda_max=lam
        )
        _reference_cache[key] = ref.states[0]
    return _reference_cache[key]


def _lambda_max(bench: BenchmarkProblem) -> float:
    key = ("lambda", bench.name)
    if key not in _reference_cache:
        _reference_cache[key] = dominant_eigenvalue_over_trajectory(
            bench.problem, analytic=bench.analytic_solution
        )
    return _reference_cache[key]


def run_benchmark(name: str, **overrides) -> RunRecord:
    """Solve one benchmark and assemble its cost/error record.

    Keyword overrides replace fields of the problem's default config
    (e.g. k_max=1.0, TOL=1e-3).  The cost ratio is recomputed against the
    classical baseline lambda_max/2 with lambda_max estimated along the
    reference trajectory; a run with no stabilizing steps is the standard
    method itself and reports ratio 1.
    """
    bench = get_problem(name)
    config = replace(default_config(name), **overrides) if overrides else default_config(name)

    start = time.perf_counter()
    trajectory, cost = adaptive_solve(bench.problem, config)
    wall = time.perf_counter() - start

    lam = _lambda_max(bench)
    cost = CostReport.from_run(
        f_evals=cost.total_f_evals,
        t_end=bench.problem.t_end,
        regular_steps=cost.regular_steps,
        stabilizing_steps=cost.stabilizing_steps,
        total_fp_iterations=cost.total_fp_iterations,
        lambda_max=lam,
    )
    u_ref = _reference_state(bench, trajectory.final_time)
    final_error = float(np.max(np.abs(trajectory.final_state - u_ref)))
    return RunRecord(
        name=name,
        config=config,
        trajectory=trajectory,
        cost=cost,
        final_error=final_error,
        wall_time=wall,
        paper_ratio=bench.paper_cost_ratio,
    )


def bench_all(out_dir: Optional[str] = None, names=PROBLEM_NAMES) -> list:
    """Run every benchmark with its defaults; optionally write artifacts."""
    records = [run_benchmark(name) for name in names]
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for rec in records:
            emit_trajectory_csv(rec, out / f"{rec.name}.csv")
            emit_plots(rec, out / f"{rec.name}.svg")
        compare_table(records, out / "comparison.csv")
    return records


def _fmt(x: float) -> str:
    """Shortest round-trip decimal for CSV cells."""
    return repr(float(x))


def emit_trajectory_csv(record_or_trajectory, path) -> Path:
    """Write `t,k,kind,iterations,residual`, one row per trajectory node."""
    trajectory = (
        record_or_trajectory.trajectory
        if isinstance(record_or_trajectory, RunRecord)
        else record_or_trajectory
    )
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "k", "kind", "iterations", "residual"])
        for node in trajectory:
            writer.writerow(
                [_fmt(node.t), _fmt(node.k), node.kind, node.iterations, _fmt(node.residual_norm)]
            )
    return path


def parse_trajectory_csv(path) -> list:
    """Rows of (t, k, kind, iterations, residual) parsed back from emit_trajectory_csv."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["t", "k", "kind", "iterations", "residual"]:
            raise ValueError(f"unexpected trajectory CSV header: {header}")
        for t, k, kind, iterations, residual in reader:
            rows.append((float(t), float(k), kind, int(iterations), float(residual)))
    return rows


def compare_table(records, path) -> Path:
    """Cost summary CSV: problem,alpha,alpha0,ratio,paper_ratio,within_factor."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["problem", "alpha", "alpha0", "ratio", "paper_ratio", "within_factor"])
        for rec in records:
            paper = rec.paper_ratio if rec.paper_ratio is not None else math.nan
            ratio = rec.cost.ratio
            within = max(ratio / paper, paper / ratio) if paper > 0 else math.nan
            writer.writerow(
                [rec.name, _fmt(rec.cost.alpha), _fmt(rec.cost.alpha0), _fmt(ratio), _fmt(paper), _fmt(within)]
            )
    return path


def emit_plots(record: RunRecord, path) -> Path:
    """Two stacked SVG panels: solution components and step sizes over time."""
    return svgplot.trajectory_figure(record.trajectory, Path(path), title=record.name)


def emit_region_svg(method: str, params, path) -> Path:
    """Stability-region contour |P(z)| = 1 for a damping polynomial."""
    return svgplot.region_figure(method, params, Path(path))
