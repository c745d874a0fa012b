import math

import numpy as np
import pytest

from stabex.damping import (
    ChebyshevParams,
    DyadicParams,
    SimpleDampingParams,
    certified_min_q,
    chebyshev_degree,
    chebyshev_sequence,
    dyadic_sequence,
    eval_chebyshev_poly,
    eval_dyadic_poly,
    eval_region_poly,
    eval_simple_poly,
    min_damping_steps,
    min_q_for_p,
    sequence_cost,
)

# Published level table, p = 0..16.
QP_TABLE = (0, 0, 0, 1, 2, 3, 3, 4, 4, 5, 6, 7, 8, 8, 9, 10, 10)


def simple_params(K_lambda, c, m):
    # K = 1, lambda = K_lambda, k chosen so k*lambda = c.
    return SimpleDampingParams(big_step=1.0, small_step=c / K_lambda, num_small=m, damping_constant=c)


class TestMinDampingSteps:
    def test_already_stable(self):
        assert min_damping_steps(2.0, 0.5) == 0
        assert min_damping_steps(1.0, 0.5) == 0

    def test_scan_oracle_at_100(self):
        # brute force: smallest m with 0.5^m * 99 <= 1
        m = 0
        while 0.5**m * 99.0 > 1.0:
            m += 1
        assert m == 7
        assert min_damping_steps(100.0, 0.5) == 7

    @pytest.mark.parametrize("K_lambda", [2.1, 5.0, 64.0, 1e3, 1e6])
    @pytest.mark.parametrize("c", [0.2, 0.5, 1.0, 1.5])
    def test_minimality_against_scan(self, K_lambda, c):
        m = min_damping_steps(K_lambda, c)
        r = abs(1.0 - c)
        assert r**m * (K_lambda - 1.0) <= 1.0
        if m > 0 and r > 0:
            assert r ** (m - 1) * (K_lambda - 1.0) > 1.0

    def test_cross_check_with_polynomial(self):
        m = min_damping_steps(64.0, 0.5)
        assert abs(eval_simple_poly(64.0, simple_params(64.0, 0.5, m))) <= 1.0

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            min_damping_steps(10.0, 0.0)
        with pytest.raises(ValueError):
            min_damping_steps(10.0, 2.0)


class TestSimplePoly:
    def test_at_zero_and_one(self):
        params = simple_params(100.0, 0.5, 7)
        assert eval_simple_poly(0.0, params) == 1.0
        assert eval_simple_poly(1.0, params) == 0.0

    def test_value_at_K_lambda(self):
        params = simple_params(100.0, 0.5, 7)
        assert eval_simple_poly(100.0, params) == pytest.approx(0.5**7 * (-99.0), rel=1e-14)

    def test_param_validation(self):
        with pytest.raises(ValueError):
            SimpleDampingParams(1.0, 2.0, 3, 0.5)  # k > K
        with pytest.raises(ValueError):
            SimpleDampingParams(1.0, 0.1, -1, 0.5)


class TestChebyshev:
    def test_degree_from_interval(self):
        assert chebyshev_degree(64.0) == 6
        assert chebyshev_degree(1.0) == 1
        assert chebyshev_degree(1024.0) == 25

    def test_single_step_sequence(self):
        seq = chebyshev_sequence(2.0, 1)
        assert len(seq) == 1
        assert seq.steps[0] == pytest.approx(1.0, rel=1e-15)

    def test_zero_sum_identity(self):
        # sum k_i = 2 m^2 / lambda_N
        for lam, m in [(64.0, 6), (1e3, 11), (2.0, 1), (5e4, 40)]:
            seq = chebyshev_sequence(lam, m)
            assert seq.total_time == pytest.approx(2.0 * m * m / lam, rel=1e-12)

    def test_figure_cost_value(self):
        seq = chebyshev_sequence(64.0, 6)
        assert seq.total_time == pytest.approx(1.125, rel=1e-12)
        assert sequence_cost(seq) == pytest.approx(16.0 / 3.0, rel=1e-12)

    def test_steps_ascend_and_fit_under_max(self):
        seq = chebyshev_sequence(64.0, 6)
        steps = np.array(seq.steps)
        assert np.all(np.diff(steps) > 0)
        assert steps[-1] == seq.params.max_step

    def test_poly_endpoints(self):
        params = ChebyshevParams(degree=6, spectral_bound=64.0, max_step=1.0)
        assert eval_chebyshev_poly(0.0, params) == pytest.approx(1.0, abs=1e-14)
        assert eval_chebyshev_poly(64.0, params) == pytest.approx(1.0, abs=1e-12)
        params5 = ChebyshevParams(degree=5, spectral_bound=64.0, max_step=1.0)
        assert eval_chebyshev_poly(64.0, params5) == pytest.approx(-1.0, abs=1e-12)

    def test_poly_midpoint_recurrence(self):
        params = ChebyshevParams(degree=2, spectral_bound=2.0, max_step=1.0)
        assert eval_chebyshev_poly(1.0, params) == pytest.approx(-1.0, abs=1e-14)

    def test_bounded_on_interval_grid_oracle(self):
        params = ChebyshevParams(degree=6, spectral_bound=64.0, max_step=1.0)
        x = np.linspace(0.0, 64.0, 10_000)
        assert np.max(np.abs(eval_chebyshev_poly(x, params))) <= 1.0 + 1e-12

    def test_product_form_matches_recurrence(self):
        # dense-grid oracle: product over (1 - x / roots)
        m, lam = 6, 64.0
        params = ChebyshevParams(degree=m, spectral_bound=lam, max_step=1.0)
        i = np.arange(1, m + 1)
        s = np.cos((2 * i - 1) * np.pi / (2 * m))
        roots = lam * (1.0 - s) / 2.0
        x = np.linspace(0.0, 64.0, 500)
        product = np.ones_like(x)
        for r in roots:
            product *= 1.0 - x / r
        assert np.allclose(eval_chebyshev_poly(x, params), product, atol=1e-9)


class TestDyadicTable:
    def test_published_table_reproduced(self):
        assert tuple(min_q_for_p(p) for p in range(17)) == QP_TABLE

    def test_asymptotic_bound(self):
        for p in range(17):
            assert min_q_for_p(p) <= math.ceil(2 * (p - 1) / 3) + 1

    def test_certified_matches_table_until_roundoff_regime(self):
        for p in range(16):
            assert certified_min_q(p) == QP_TABLE[p]
        # At p = 16 the published value misses narrow |P| > 1 windows
        # between adjacent roots; the fine scan needs one more level.
        assert certified_min_q(16) == 11


class TestDyadicPoly:
    def test_at_zero(self):
        assert eval_dyadic_poly(0.0, DyadicParams(6, 3, 64.0)) == 1.0

    def test_single_factor_root(self):
        assert eval_dyadic_poly(1.0, DyadicParams(0, 0, 1.0)) == 0.0

    def test_grid_bound_for_table_pair(self):
        params = DyadicParams(6, 3, 64.0)
        x = np.linspace(0.0, 64.0, 10_000)
        assert np.max(np.abs(eval_dyadic_poly(x, params))) <= 1.0 + 1e-9

    def test_large_p_no_overflow(self):
        params = DyadicParams(20, 14, 2.0**20)
        x = np.linspace(0.0, 2.0**20, 2_001)
        vals = eval_dyadic_poly(x, params)
        assert np.all(np.isfinite(vals))
        assert np.max(np.abs(vals)) <= 1.0 + 1e-9


class TestDyadicSequence:
    def test_figure_pair(self):
        seq = dyadic_sequence(64.0, 1.0)
        assert len(seq) == 18
        assert seq.total_time == pytest.approx(2.25, rel=1e-15)
        assert sequence_cost(seq) == pytest.approx(8.0, rel=1e-15)

    def test_trivial_single_step(self):
        seq = dyadic_sequence(1.0, 1.0)
        assert seq.steps == (1.0,)

    def test_rounded_level_count(self):
        seq = dyadic_sequence(1000.0, 1.024)
        p, q = seq.params.levels, seq.params.multiple_levels
        assert (p, q) == (10, 6)
        assert len(seq) == (2 ** (q + 1) - 1) + (p - q)
        x = np.linspace(0.0, 2.0**p, 10_000)
        assert np.max(np.abs(eval_dyadic_poly(x, seq.params))) <= 1.0 + 1e-9

    def test_nondecreasing_and_dyadic_multiples(self):
        seq = dyadic_sequence(64.0, 1.0)
        steps = np.array(seq.steps)
        assert np.all(np.diff(steps) >= 0)
        ratios = steps / steps[0]
        assert np.allclose(ratios, 2.0 ** np.round(np.log2(ratios)), rtol=1e-12)

    def test_multiplicity_structure(self):
        seq = dyadic_sequence(64.0, 1.0)
        p, q = seq.params.levels, seq.params.multiple_levels
        expected = []
        for i in range(q + 1):
            expected += [2.0**i / 64.0] * (2 ** (q - i))
        expected += [2.0**j / 64.0 for j in range(q + 1, p + 1)]
        assert np.allclose(seq.steps, expected, rtol=1e-15)


class TestRegionPoly:
    def test_unity_at_origin(self):
        assert eval_region_poly(0j, "chebyshev", 5) == pytest.approx(1.0)
        assert eval_region_poly(0j, "dyadic", (3, 1)) == pytest.approx(1.0)

    def test_chebyshev_real_axis_stability(self):
        m = 5
        z = np.linspace(-2.0 * m * m, 0.0, 4_000) + 0j
        assert np.max(np.abs(eval_region_poly(z, "chebyshev", m))) <= 1.0 + 1e-9
        assert abs(eval_region_poly(-2.0 * m * m * 1.02 + 0j, "chebyshev", m)) > 1.0

    def test_matched_step_counts(self):
        assert len(chebyshev_sequence(64.0, 5)) == 5
        seq = dyadic_sequence(8.0, 1.0)  # p = 3 -> q = 1
        assert (seq.params.levels, seq.params.multiple_levels) == (3, 1)
        assert len(seq) == 5

    def test_real_axis_consistency_chebyshev(self):
        # z = -x * (sum k_i) / K reproduces the real-axis polynomial
        m, lam, K = 6, 64.0, 1.0
        params = ChebyshevParams(degree=m, spectral_bound=lam, max_step=K)
        kbar = chebyshev_sequence(lam, m).total_time
        x = np.linspace(0.0, 64.0, 997)
        lhs = eval_region_poly(-x * kbar / K + 0j, "chebyshev", m).real
        rhs = eval_chebyshev_poly(x, params)
        assert np.all(np.abs(lhs - rhs) <= 1e-10 * np.maximum(1.0, np.abs(rhs)))

    def test_real_axis_consistency_dyadic(self):
        lam, K = 64.0, 1.0
        seq = dyadic_sequence(lam, K)
        kbar = seq.total_time
        x = np.linspace(0.0, 64.0, 997)
        lhs = eval_region_poly(-x * kbar / K + 0j, "dyadic", seq.params).real
        rhs = eval_dyadic_poly(x, seq.params)
        assert np.all(np.abs(lhs - rhs) <= 1e-10 * np.maximum(1.0, np.abs(rhs)))

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            eval_region_poly(0j, "legendre", 3)


class TestStabilitySweepProperty:
    """|P| <= 1 across the generated parameters on a log sweep of K*lambda."""

    K_LAMBDAS = np.geomspace(2.1, 1e6, 25)

    @pytest.mark.parametrize("K_lambda", K_LAMBDAS)
    def test_simple_damping_stable(self, K_lambda):
        m = min_damping_steps(K_lambda, 0.5)
        val = eval_simple_poly(K_lambda, simple_params(K_lambda, 0.5, m))
        assert abs(val) <= 1.0 + 1e-12

    @pytest.mark.parametrize("K_lambda_N", [2.1, 30.0, 1e3, 4.7e4, 1e6])
    def test_generated_polynomials_stable(self, K_lambda_N):
        x = np.linspace(0.0, K_lambda_N, 10_000)
        m = chebyshev_degree(K_lambda_N)
        cheb = ChebyshevParams(degree=m, spectral_bound=K_lambda_N, max_step=1.0)
        assert np.max(np.abs(eval_chebyshev_poly(x, cheb))) <= 1.0 + 1e-9
        seq = dyadic_sequence(K_lambda_N, 1.0)
        xd = np.linspace(0.0, 2.0 ** seq.params.levels, 10_000)
        assert np.max(np.abs(eval_dyadic_poly(xd, seq.params))) <= 1.0 + 1e-9
