"""Acceptance suite: one check per release criterion, stated tolerances.

Each criterion prints a PASS/FAIL line (run with `pytest -s` or `-rA` to
see them) and then asserts.  The benchmark records are computed once per
module and shared.
"""

import filecmp
import math
import time
from pathlib import Path

import numpy as np
import pytest

from stabex.controller import SolverConfig, stabilization_plan
from stabex.damping import (
    ChebyshevParams,
    chebyshev_degree,
    chebyshev_sequence,
    dyadic_sequence,
    eval_chebyshev_poly,
    eval_dyadic_poly,
    eval_simple_poly,
    min_damping_steps,
    min_q_for_p,
    sequence_cost,
    SimpleDampingParams,
)
from stabex.harness import PAPER_RATIOS, bench_all, run_benchmark
from stabex.problems import PROBLEM_NAMES, get_problem
from stabex.solver import cg1_fixed_point_step, divergence_rate

QP_TABLE = (0, 0, 0, 1, 2, 3, 3, 4, 4, 5, 6, 7, 8, 8, 9, 10, 10)
STIFF = ("test-eq", "test-sys", "nonnormal", "hires", "akzo", "vdp", "heat")


def report(criterion: str, ok: bool, detail: str = ""):
    print(f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'}  {detail}")
    return ok


@pytest.fixture(scope="module")
def records():
    return {name: run_benchmark(name) for name in PROBLEM_NAMES}


def test_criterion_1_level_table_exact():
    start = time.perf_counter()
    table = tuple(min_q_for_p(p) for p in range(17))
    elapsed = time.perf_counter() - start
    ok = table == QP_TABLE and elapsed < 5.0
    assert report("1 level-table", ok, f"table={table} in {elapsed:.2f}s")


def test_criterion_2_reference_costs():
    cheb = chebyshev_sequence(64.0, 6)
    dyad = dyadic_sequence(64.0, 1.0)
    cheb_cost = sequence_cost(cheb)
    dyad_cost = sequence_cost(dyad)
    ok = abs(cheb_cost - 6.0 / 1.125) <= 0.01 and dyad_cost == 8.0 and len(dyad) == 18
    assert report(
        "2 damping-costs", ok, f"chebyshev={cheb_cost:.4f} dyadic={dyad_cost} steps={len(dyad)}"
    )


def test_criterion_3_damping_stability_sweep():
    start = time.perf_counter()
    ok = True
    for K_lambda in np.geomspace(2.1, 1e6, 50):
        m = min_damping_steps(K_lambda, 0.5)
        params = SimpleDampingParams(1.0, 0.5 / K_lambda, m, 0.5)
        ok &= abs(eval_simple_poly(K_lambda, params)) <= 1.0 + 1e-12

        x = np.linspace(0.0, K_lambda, 10_000)
        deg = chebyshev_degree(K_lambda)
        cheb = ChebyshevParams(degree=deg, spectral_bound=K_lambda, max_step=1.0)
        ok &= np.max(np.abs(eval_chebyshev_poly(x, cheb))) <= 1.0 + 1e-9

        seq = dyadic_sequence(K_lambda, 1.0)
        xd = np.linspace(0.0, 2.0 ** seq.params.levels, 10_000)
        ok &= np.max(np.abs(eval_dyadic_poly(xd, seq.params))) <= 1.0 + 1e-9
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 10.0
    assert report("3 stability-sweep", bool(ok), f"50 points in {elapsed:.2f}s")


def test_criterion_4_contraction_identity():
    A = np.diag([100.0, 1000.0])
    from stabex.solver import OdeProblem

    problem = OdeProblem(2, lambda u, t: -A @ u, np.array([1.0, 1.0]), 10.0)
    k = 0.01
    # wide trust region: the identity check wants the untruncated sweep
    out = cg1_fixed_point_step(
        np.array([1.0, 1.0]), 0.0, k, problem, tol=1e-300, max_iter=8, trust_factor=1e12
    )
    norms = out.residual_norms
    # ratios formed from the third iteration on, once mode 2 dominates
    ratios = [norms[i + 1] / norms[i] for i in range(1, len(norms) - 1)]
    expected = k * 1000.0 / 2.0
    ratio_ok = all(abs(r - expected) <= 1e-8 * expected for r in ratios)
    L = divergence_rate(norms, k)
    rate_ok = abs(L - 1000.0) <= 0.01 * 1000.0
    ok = ratio_ok and rate_ok and len(norms) >= 3
    assert report("4 contraction-identity", ok, f"ratios={ratios} L={L:.3f}")


@pytest.mark.parametrize("name", PROBLEM_NAMES)
def test_criterion_5_cost_reduction(records, name):
    rec = records[name]
    ratio = rec.cost.ratio
    if name == "nonstiff":
        ok = ratio == 1.0 and rec.node_counts["stabilizing"] == 0
        assert report(
            "5 cost-regression[nonstiff]", ok,
            f"ratio={ratio} stabilizing={rec.node_counts['stabilizing']}",
        )
        return
    paper = PAPER_RATIOS[name]
    within = max(ratio / paper, paper / ratio)
    ok = within <= 3.0 and ratio <= 0.2
    assert report(
        f"5 cost-regression[{name}]", ok,
        f"alpha={rec.cost.alpha:.3f} ratio=1/{1 / ratio:.1f} paper=1/{1 / paper:.0f} "
        f"within_factor={within:.2f}",
    )


def test_criterion_5_suite_runtime(records):
    total_wall = sum(rec.wall_time for rec in records.values())
    ok = total_wall < 120.0
    assert report("5 suite-runtime", ok, f"solver wall time {total_wall:.1f}s")


@pytest.mark.parametrize("name", PROBLEM_NAMES)
def test_criterion_6_final_time_accuracy(records, name):
    rec = records[name]
    bound = 10.0 * rec.config.TOL
    ok = rec.final_error <= bound
    assert report(
        f"6 accuracy[{name}]", ok, f"error={rec.final_error:.3e} <= {bound:.1e}"
    )


def test_criterion_6_heat_steady_state(records):
    rec = records["heat"]
    bench = get_problem("heat")
    A = -bench.problem.jacobian(bench.problem.u0, 0.0)
    forcing = bench.problem.f(np.zeros(bench.problem.dimension))
    steady = np.linalg.solve(A, forcing)
    err = float(np.max(np.abs(rec.trajectory.final_state - steady)))
    bound = 10.0 * rec.config.TOL
    ok = err <= bound
    assert report("6 heat-steady-state", ok, f"|U(T) - A^-1 f| = {err:.3e} <= {bound:.1e}")


def test_criterion_7_regulator_growth_bound(records):
    worst = 0.0
    ok = True
    for rec in records.values():
        prev = None
        for node in rec.trajectory.nodes[1:]:
            if node.kind == "regular":
                if prev is not None:
                    worst = max(worst, node.k / prev)
                    ok &= node.k <= 2.0 * prev + 1e-12
                prev = node.k
            else:
                prev = None  # a burst separates regular pairs
    assert report("7 regulator-bound", bool(ok), f"worst growth factor {worst:.4f}")


def test_criterion_8_convergence_threshold():
    from stabex.solver import OdeProblem

    lam = 1000.0
    problem = OdeProblem(1, lambda u, t: -lam * u, np.array([1.0]), 10.0)
    conv = cg1_fixed_point_step(np.array([1.0]), 0.0, 1.8 / lam, problem, tol=1e-6, max_iter=300)
    div = cg1_fixed_point_step(np.array([1.0]), 0.0, 2.2 / lam, problem, tol=1e-6, max_iter=300)
    ok = conv.converged and not div.converged
    assert report(
        "8 convergence-threshold", ok,
        f"k*lambda=1.8 converged={conv.converged}; k*lambda=2.2 converged={div.converged}",
    )


def test_criterion_9_determinism(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    bench_all(out1)
    bench_all(out2)
    files1 = sorted(p.name for p in out1.iterdir())
    files2 = sorted(p.name for p in out2.iterdir())
    ok = files1 == files2
    mismatched = []
    for name in files1:
        if not filecmp.cmp(out1 / name, out2 / name, shallow=False):
            mismatched.append(name)
            ok = False
    assert report("9 determinism", ok, f"{len(files1)} files, mismatched={mismatched}")
