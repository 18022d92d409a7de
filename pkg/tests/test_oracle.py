"""Closed-form moments and bounds against enumeration and Monte Carlo."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import (
    cycling_gradient_matrix,
    cycling_matrix,
    exact_cycling_product_moment,
    exact_gradient_product_moment,
    within,
)
from debias import DomainError, Expansion, GaussianSource, TruncationLaw, sum_estimate
from debias.oracle import (
    GradientMoments,
    MomentParams,
    conditional_expectation_curve,
    conditional_expectation_given_r,
    cycling_cov_bound,
    cycling_cross_moment,
    gradient_cycling_cov_bound,
    gradient_cycling_cross_moment,
    prop1_bounds,
    prop2_bound,
    prop3_bound,
    reciprocal_tail_expectation,
    simple_cross_moment,
    simple_variance_limit,
    truncation_moments,
)
from debias.streams import replicate_rng

PARAM_SETS = [
    MomentParams(1.0, 1.0, 2.0),
    MomentParams.from_rho(0.5, 2.0),
    MomentParams.from_rho(-0.3, 5.0),
    MomentParams.from_rho(0.4, 1.0),
    MomentParams(1.0, 0.5, 1.0),  # m = x0: rho is infinite
]


def gaussian_pairs(params, grad_m, a, b, n, gen):
    """Jointly Gaussian (Y, G): Y = m~ + sd Z1, G = grad_m + a Z1 + b Z2."""
    sd = math.sqrt(params.var) / abs(params.x0)
    z1, z2 = gen.standard_normal((2,) + n)
    y = params.m_tilde + sd * z1
    g = grad_m + a * z1 + b * z2
    moments = GradientMoments(s2=grad_m**2 + a * a + b * b, t=params.m_tilde * grad_m + sd * a, grad_m=grad_m)
    return y, g, moments


class TestMomentParams:
    @given(st.floats(-5, 5), st.floats(0, 5), st.floats(0.1, 5))
    def test_invariants(self, m, var, x0):
        p = MomentParams(m, var, x0)
        assert p.rho >= 1
        assert p.beta2 >= p.beta0**2
        if m != x0 and math.isfinite(p.rho):
            assert p.beta2 == pytest.approx(p.beta0**2 * p.rho, rel=1e-9, abs=1e-300)

    def test_rho_singular_point(self):
        assert MomentParams(1.0, 0.3, 1.0).rho == math.inf
        assert MomentParams(1.0, 0.0, 1.0).rho == 1.0


class TestSimpleCrossMoment:
    def test_examples(self):
        p = MomentParams(1.0, 1.0, 2.0)
        assert all(simple_cross_moment(p, 0, l) == 0 for l in range(5))
        assert simple_cross_moment(p, 1, 1) == pytest.approx(0.25)
        q = MomentParams(1.3, 0.0, 2.0)
        assert all(simple_cross_moment(q, k, l) == pytest.approx(0, abs=1e-15) for k in range(4) for l in range(k, 5))

    def test_monte_carlo(self):
        p = MomentParams.from_rho(0.5, 2.0)
        gen = np.random.default_rng(1)
        y = p.m_tilde + math.sqrt(p.var) * gen.standard_normal((400_000, 4))
        u = np.cumprod(y, axis=1)
        for k, l in [(1, 2), (2, 3), (2, 4)]:
            prod = (u[:, k - 1] - p.m_tilde**k) * (u[:, l - 1] - p.m_tilde**l)
            assert within(prod.mean(), simple_cross_moment(p, k, l), prod.std() / math.sqrt(prod.size))


class TestCyclingCrossMoment:
    def test_example_mean_of_y(self):
        p = MomentParams.from_rho(0.5, 2.0)
        assert cycling_cross_moment(p, 4, 1, 1) == pytest.approx(0.3125)

    def test_full_window_case(self):
        p = MomentParams.from_rho(0.5, 2.0)
        assert cycling_cross_moment(p, 2, 1, 2) == pytest.approx(0.5**3 * 2.0)
        gen = np.random.default_rng(2)
        y = p.m_tilde + math.sqrt(p.var) * gen.standard_normal((1_000_000, 2))
        u = cycling_matrix(y)
        prod = u[:, 1] * u[:, 2]
        assert within(prod.mean(), 0.5**3 * 2.0, prod.std() / 1000)

    def test_deterministic_inputs(self):
        p = MomentParams.from_rho(0.7, 1.0)
        for r in range(1, 9):
            for k in range(1, r + 1):
                for l in range(k, r + 1):
                    assert cycling_cross_moment(p, r, k, l) == pytest.approx(0.7 ** (k + l), rel=1e-12)

    def test_k_zero_rejected(self):
        with pytest.raises(DomainError):
            cycling_cross_moment(PARAM_SETS[0], 3, 0, 1)

    @pytest.mark.parametrize("params", PARAM_SETS, ids=range(len(PARAM_SETS)))
    def test_matches_window_enumeration(self, params):
        for r in range(1, 10):
            for k in range(1, r + 1):
                for l in range(k, r + 1):
                    exact = exact_cycling_product_moment(params.m_tilde, params.beta2, r, k, l)
                    assert cycling_cross_moment(params, r, k, l) == pytest.approx(exact, rel=1e-12, abs=1e-15)

    @pytest.mark.parametrize("params", PARAM_SETS[:4], ids=range(4))
    def test_cov_bound_dominates(self, params):
        for r in range(1, 13):
            for k in range(1, r + 1):
                for l in range(k, r + 1):
                    cov = cycling_cross_moment(params, r, k, l) - params.m_tilde ** (k + l)
                    bound = cycling_cov_bound(params, r, k, l)
                    assert cov <= bound * (1 + 1e-12) + 1e-15, (r, k, l)

    def test_cov_bound_examples(self):
        p = MomentParams.from_rho(0.6, 1.0)
        assert cycling_cov_bound(p, 2, 1, 1) == pytest.approx(0.36)
        q = MomentParams.from_rho(0.6, 3.0)
        assert cycling_cov_bound(q, 10**6, 2, 3) < 1e-5

    @pytest.mark.parametrize("params", PARAM_SETS[:3], ids=range(3))
    def test_cycling_variance_below_simple(self, params):
        for k in range(1, 6):
            for r in range(2 * k, 16):
                var_c = cycling_cross_moment(params, r, k, k) - params.m_tilde ** (2 * k)
                var_s = simple_cross_moment(params, k, k)
                if params.rho > 1 and r > k:
                    assert var_c < var_s
                else:
                    assert var_c <= var_s * (1 + 1e-12)


class TestVarianceLimit:
    def test_zero_variance(self):
        assert simple_variance_limit(MomentParams(1.0, 0.0, 2.0)) == 0.0

    def test_value_at_reference_point(self):
        assert simple_variance_limit(MomentParams(1.0, 1.0, 2.0)) == pytest.approx(0.5)

    def test_direct_series_limit(self):
        # f_hat^S with weights -> 1 is sum_k (-1)^k prod_{i<=k} Y_i / x0 = Z / x0 where
        # Z = 1 - Y_1 Z', so E[Z] = 1/(1 + m~) and E[Z^2] = (1 - 2 m~ E[Z]) / (1 - beta^2)
        for m, var, x0 in [(1.0, 1.0, 2.0), (1.0, 0.1, 1.1), (2.0, 0.5, 1.8)]:
            p = MomentParams(m, var, x0)
            mean_z = 1 / (1 + p.m_tilde)
            second = (1 - 2 * p.m_tilde * mean_z) / (1 - p.beta2)
            assert simple_variance_limit(p) == pytest.approx((second - mean_z**2) / x0**2, rel=1e-12)

    def test_infeasible(self):
        with pytest.raises(DomainError):
            simple_variance_limit(MomentParams(1.0, 4.0, 1.0))

    def test_monte_carlo_small_p(self):
        m, var, x0, p = 1.0, 0.1, 1.1, 1e-3
        exp, law, src = Expansion.reciprocal(x0), TruncationLaw(p), GaussianSource(m, var)
        ests = [sum_estimate(exp, law, "simple", src, replicate_rng(21, i)[0]) for i in range(100_000)]
        values = np.array([e.value for e in ests])
        rs = np.array([e.r for e in ests])
        dev2 = (values - conditional_expectation_curve(exp, law, m, rs.max())[rs]) ** 2
        target = simple_variance_limit(MomentParams(m, var, x0))
        assert within(dev2.mean(), target, dev2.std() / math.sqrt(dev2.size))


class TestPropositionBounds:
    def test_prop1_examples(self):
        lower, upper = prop1_bounds(0.1, 0.0, 1.0, 0.0, 0.0)
        assert lower == 0 and upper == 0
        lower, upper = prop1_bounds(0.1, 0.5, 1.0, 0.0, math.log(2))
        assert upper == pytest.approx(2 / 13)
        assert lower == pytest.approx(math.log(2) ** 2 * 0.1 / 0.9)
        small = prop1_bounds(1e-6, 0.5, 1.0, 0.0, math.log(2))
        assert small[1] / 1e-6 == pytest.approx(1 / 0.75, rel=1e-5)

    def test_prop1_outside(self):
        with pytest.raises(DomainError):
            prop1_bounds(0.8, 0.5, 1.0, 0.0, 0.0)

    @pytest.mark.parametrize("p", [0.05, 0.1, 0.3])
    @pytest.mark.parametrize("make", [Expansion.log, Expansion.reciprocal])
    def test_prop1_domination(self, p, make):
        m, x0 = 1.0, 2.0
        exp, law = make(x0), TruncationLaw(p)
        _, var_cond = truncation_moments(exp, law, m)
        lower, upper = prop1_bounds(p, abs(m / x0 - 1), exp.c, exp.function_value(m), exp.coefficient(0))
        # for 1/x both bounds are attained (partial sums of a geometric series)
        assert lower * (1 - 1e-12) <= var_cond <= upper * (1 + 1e-12)

    def test_truncation_mean_is_unbiased(self):
        exp, law = Expansion.log(2.0), TruncationLaw(0.1)
        mean, _ = truncation_moments(exp, law, 1.0)
        assert mean == pytest.approx(0.0, abs=1e-12)

    def test_prop2_prop3_examples(self):
        b = math.sqrt(0.5)
        assert prop2_bound(0.1, b, 1.0) == pytest.approx((1 + b) / (1 - b) * 0.9 / 0.4)
        assert prop3_bound(0.1, 0.5, b, 1.0) == pytest.approx(4 * 0.1 * math.log(10) / 0.16 * (0.5 + 2 * 0.5 * 0.9 / 0.25))

    def test_limits(self):
        b = 0.6
        assert prop2_bound(1e-12, b, 1.0) == pytest.approx((1 + b) / (1 - b) / (1 - b * b), rel=1e-9)
        values = [prop3_bound(p, 0.3, b, 1.0) for p in (1e-2, 1e-4, 1e-6)]
        assert values[0] > values[1] > values[2]
        assert values[2] / (1e-6 * math.log(1e6)) == pytest.approx(4 * (b * b + 2 * 0.3 / 0.49) / (1 - b * b) ** 2, rel=1e-4)

    @pytest.mark.parametrize("kind, bound", [("simple", "prop2"), ("cycling", "prop3")])
    def test_sampling_bound_domination(self, kind, bound):
        m, var, x0, p = 1.0, 1.0, 2.0, 0.1
        exp, law, src = Expansion.reciprocal(x0), TruncationLaw(p), GaussianSource(m, var)
        ests = [sum_estimate(exp, law, kind, src, replicate_rng(33, i)[0]) for i in range(100_000)]
        values = np.array([e.value for e in ests])
        rs = np.array([e.r for e in ests])
        dev2 = (values - conditional_expectation_curve(exp, law, m, rs.max())[rs]) ** 2
        params = MomentParams(m, var, x0)
        b = math.sqrt(params.beta2)
        limit = prop2_bound(p, b, exp.c) if bound == "prop2" else prop3_bound(p, params.beta0, b, exp.c)
        assert dev2.mean() <= limit + 4 * dev2.std() / math.sqrt(dev2.size)


class TestConditionalExpectation:
    def test_examples(self):
        exp, law = Expansion.log(2.0), TruncationLaw(0.1)
        assert conditional_expectation_given_r(exp, law, 1.0, 0) == math.log(2)
        assert conditional_expectation_given_r(exp, law, 2.0, 7) == math.log(2)
        expected = sum(exp.coefficient(k) * (-0.5) ** k / 0.9**k for k in range(4))
        assert conditional_expectation_given_r(exp, law, 1.0, 3) == pytest.approx(expected, rel=1e-14)


class TestReciprocalTail:
    def test_equality_at_one(self):
        exact, bound = reciprocal_tail_expectation(0.5, 1)
        assert exact == pytest.approx(math.log(2), rel=1e-12)
        assert bound == pytest.approx(math.log(2), rel=1e-12)

    def test_monotone_in_k(self):
        values = [reciprocal_tail_expectation(0.3, k)[0] for k in range(1, 21)]
        assert all(a >= b for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("p", [0.01, 0.05, 0.1, 0.3, 0.5, 0.9])
    def test_below_bound(self, p):
        for k in range(1, 21):
            exact, bound = reciprocal_tail_expectation(p, k)
            assert exact <= bound * (1 + 1e-12)

    def test_monte_carlo(self):
        p, k = 0.2, 3
        gen = np.random.default_rng(4)
        r = gen.geometric(p, 1_000_000) - 1
        inv = 1.0 / r[r >= k]
        exact, _ = reciprocal_tail_expectation(p, k)
        assert within(inv.mean(), exact, inv.std() / math.sqrt(inv.size))


class TestGradientMoments:
    def test_mean_of_g_identity(self):
        p = MomentParams(1.0, 1.0, 2.0)
        g = GradientMoments(s2=2.0, t=0.1, grad_m=0.8)
        for r in range(1, 12):
            assert gradient_cycling_cross_moment(p, g, r, 1, 1) == pytest.approx(0.64 + (2.0 - 0.64) / r)

    def test_deterministic_inputs(self):
        p = MomentParams.from_rho(0.4, 1.0)
        g = GradientMoments(s2=0.81, t=0.4 * 0.9, grad_m=0.9)
        for r in range(1, 9):
            for k in range(1, r + 1):
                for l in range(k, r + 1):
                    expected = 0.81 * 0.4 ** (k + l - 2)
                    assert gradient_cycling_cross_moment(p, g, r, k, l) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("params", PARAM_SETS, ids=range(len(PARAM_SETS)))
    def test_matches_window_enumeration(self, params):
        g = GradientMoments(s2=1.5, t=0.2 * math.sqrt(params.beta2), grad_m=-0.7)
        for r in range(1, 10):
            for k in range(1, r + 1):
                for l in range(k, r + 1):
                    exact = exact_gradient_product_moment(params.m_tilde, params.beta2, g.s2, g.t, g.grad_m, r, k, l)
                    got = gradient_cycling_cross_moment(params, g, r, k, l)
                    assert got == pytest.approx(exact, rel=1e-12, abs=1e-15), (r, k, l)

    def test_monte_carlo(self):
        params = MomentParams(1.0, 0.36, 1.5)
        gen = np.random.default_rng(6)
        y, g, moments = gaussian_pairs(params, 0.5, 0.4, 0.3, (1_000_000, 4), gen)
        w = cycling_gradient_matrix(y, g)
        prod = w[:, 1] * w[:, 2]
        expected = gradient_cycling_cross_moment(params, moments, 4, 1, 2)
        assert within(prod.mean(), expected, prod.std() / 1000)

    def test_moment_inequalities(self):
        p = MomentParams(1.0, 1.0, 2.0)
        with pytest.raises(DomainError):
            gradient_cycling_cross_moment(p, GradientMoments(0.1, 0.0, 1.0), 3, 1, 2)
        with pytest.raises(DomainError):
            gradient_cycling_cross_moment(p, GradientMoments(1.0, 5.0, 0.5), 3, 1, 2)

    def test_printed_bound_vanishes_at_first_term(self):
        # the published covariance bound carries a factor (2l - 2): zero at k = l = 1
        p = MomentParams(1.0, 1.0, 2.0)
        g = GradientMoments(2.0, 0.1, 0.8)
        assert gradient_cycling_cov_bound(p, g, 5, 1, 1) == 0.0
        cov = gradient_cycling_cross_moment(p, g, 5, 1, 1) - 0.64
        assert cov > 0

    def test_printed_bound_shrinks_with_r(self):
        p = MomentParams(1.0, 1.0, 2.0)
        g = GradientMoments(2.0, 0.1, 0.8)
        assert gradient_cycling_cov_bound(p, g, 1000, 2, 3) < gradient_cycling_cov_bound(p, g, 10, 2, 3)
