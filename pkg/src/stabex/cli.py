"""Command-line entry point.

Subcommands:
  run        solve one benchmark, optionally writing CSV/SVG artifacts
  bench-all  run the full benchmark set and the cost comparison table
  region     plot the stability region of a damping polynomial
  table      print the brute-force (p, q) level table

Exit codes: 0 on success, 2 on integration failure, 3 when a run misses
its cost or accuracy threshold (for CI gating).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .controller import IntegrationFailure
from .damping import min_q_for_p
from .harness import (
    PAPER_RATIOS,
    bench_all,
    compare_table,
    emit_plots,
    emit_region_svg,
    emit_trajectory_csv,
    run_benchmark,
)
from .problems import PROBLEM_NAMES

# Acceptance thresholds mirrored by the test suite: published-cost ratio
# within this factor, final-time error within 10*TOL.
_RATIO_FACTOR = 3.0
_ERROR_FACTOR = 10.0


def _record_ok(rec) -> bool:
    if rec.final_error > _ERROR_FACTOR * rec.config.TOL:
        return False
    paper = PAPER_RATIOS.get(rec.name)
    if paper is None:
        return True
    if rec.name == "nonstiff":
        return rec.cost.ratio == 1.0 and rec.node_counts["stabilizing"] == 0
    ratio = rec.cost.ratio
    within = max(ratio / paper, paper / ratio)
    return within <= _RATIO_FACTOR and ratio <= 0.2


def _print_record(rec):
    counts = rec.node_counts
    print(
        f"{rec.name:10s} alpha={rec.cost.alpha:10.3f}  alpha0={rec.cost.alpha0:10.3f}  "
        f"ratio=1/{1.0 / rec.cost.ratio:7.1f}  steps={counts['regular']}+{counts['stabilizing']}s  "
        f"err={rec.final_error:9.2e}  wall={rec.wall_time:6.2f}s"
    )


def _cmd_run(args) -> int:
    overrides = {}
    if args.tol is not None:
        overrides["TOL"] = args.tol
    if args.kmax is not None:
        overrides["k_max"] = args.kmax
        overrides["k_init"] = min(args.kmax, default_k_init(args.problem, args.kmax))
    if args.c is not None:
        overrides["c"] = args.c
    if args.mode is not None:
        overrides["mode"] = args.mode
    try:
        rec = run_benchmark(args.problem, **overrides)
    except IntegrationFailure as exc:
        print(f"integration failure: {exc}", file=sys.stderr)
        return 2
    _print_record(rec)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.csv:
            print(f"wrote {emit_trajectory_csv(rec, out / f'{rec.name}.csv')}")
        if args.plot:
            print(f"wrote {emit_plots(rec, out / f'{rec.name}.svg')}")
    return 0 if _record_ok(rec) else 3


def default_k_init(problem: str, k_max: float) -> float:
    from .harness import default_config

    base = default_config(problem)
    k_init = base.k_init if base.k_init is not None else k_max
    return min(k_init, k_max)


def _cmd_bench_all(args) -> int:
    try:
        records = bench_all(args.out)
    except IntegrationFailure as exc:
        print(f"integration failure: {exc}", file=sys.stderr)
        return 2
    for rec in records:
        _print_record(rec)
    if args.out is None:
        # Still assemble the comparison for the console.
        import tempfile

        with tempfile.NamedTemporaryFile("r", suffix=".csv") as tmp:
            compare_table(records, tmp.name)
            print(Path(tmp.name).read_text(), end="")
    return 0 if all(_record_ok(r) for r in records) else 3


def _cmd_region(args) -> int:
    if args.method == "chebyshev":
        params = int(args.params)
    else:
        parts = args.params.split(",")
        if len(parts) != 2:
            print("dyadic region needs --params p,q", file=sys.stderr)
            return 1
        params = (int(parts[0]), int(parts[1]))
    out = emit_region_svg(args.method, params, Path(args.out))
    print(f"wrote {out}")
    return 0


def _cmd_table(args) -> int:
    lo, hi = (int(s) for s in args.p_range.split(".."))
    print("p  q")
    for p in range(lo, hi + 1):
        print(f"{p:<2d} {min_q_for_p(p)}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="stabex",
        description="Stabilized explicit time-stepping for stiff ODEs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one benchmark problem")
    p_run.add_argument("--problem", required=True, choices=PROBLEM_NAMES)
    p_run.add_argument("--tol", type=float, help="target final-time error scale TOL")
    p_run.add_argument("--kmax", type=float, help="maximum step size")
    p_run.add_argument("--c", type=float, help="damping constant in (0, 1]")
    p_run.add_argument("--mode", choices=("gap", "parabolic"))
    p_run.add_argument("--out", help="output directory for artifacts")
    p_run.add_argument("--plot", action="store_true", help="write solution/step SVG")
    p_run.add_argument("--csv", action="store_true", help="write trajectory CSV")
    p_run.set_defaults(func=_cmd_run)

    p_all = sub.add_parser("bench-all", help="run the whole benchmark set")
    p_all.add_argument("--out", help="output directory for artifacts")
    p_all.set_defaults(func=_cmd_bench_all)

    p_region = sub.add_parser("region", help="stability-region SVG for a damping polynomial")
    p_region.add_argument("--method", required=True, choices=("chebyshev", "dyadic"))
    p_region.add_argument("--params", required=True, help="degree m, or p,q")
    p_region.add_argument("--out", required=True)
    p_region.set_defaults(func=_cmd_region)

    p_table = sub.add_parser("table", help="print the dyadic (p, q) level table")
    p_table.add_argument("--p-range", default="0..16")
    p_table.set_defaults(func=_cmd_table)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
