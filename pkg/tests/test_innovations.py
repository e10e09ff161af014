"""Samplers, moments, and taper classification.

Expected values marked as oracle-derived were computed from independent
routes (closed forms, direct quadrature of the defining integrals, or Monte
Carlo with explicit standard errors) before being frozen here.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from taplin.errors import DomainError, UsageError
from taplin.innovations import (
    InnovationKind,
    InnovationSpec,
    TailIndex,
    TaperLevel,
    TaperRegime,
    classify_innovation_taper,
    gaussian_abs_moment,
    moment_ratio,
    moment_ratio_bound_check,
    pareto_from_uniform,
    sample_pareto,
    sample_tapered_pareto,
    tapered_abs_central_moment,
    tapered_mean,
    tapered_moment,
    tapered_pareto_from_uniforms,
    tapered_variance,
)
from taplin.streams import make_stream

A15 = TailIndex(1.5)


class TestDomainTypes:
    def test_alpha_one_rejected(self):
        with pytest.raises(DomainError):
            TailIndex(1.0)

    @pytest.mark.parametrize("bad", [0.0, -0.3, 2.0, 2.5])
    def test_alpha_out_of_range(self, bad):
        with pytest.raises(DomainError):
            TailIndex(bad)

    def test_taper_level_bounds(self):
        with pytest.raises(DomainError):
            TaperLevel(b=0.5)
        with pytest.raises(DomainError):
            TaperLevel(b=2.0, gamma=-1.0)
        assert TaperLevel(b=math.inf).is_infinite

    def test_taper_level_growth(self):
        lvl = TaperLevel.from_exponent(10000, 0.4)
        assert lvl.b == pytest.approx(10000 ** 0.4)
        assert lvl.at(256).b == pytest.approx(256 ** 0.4)

    def test_centered_raw_pareto_needs_mean(self):
        with pytest.raises(UsageError):
            InnovationSpec(InnovationKind.CENTERED_PARETO, alpha=TailIndex(0.7))

    def test_centered_tapered_allowed_below_one(self):
        # the tapered variable has every moment, so centering is fine
        spec = InnovationSpec(
            InnovationKind.CENTERED_TAPERED_PARETO,
            alpha=TailIndex(0.7),
            taper=TaperLevel(b=10.0),
        )
        assert spec.is_centered

    def test_pareto_constructor_centers_by_mean(self):
        assert InnovationSpec.pareto(TailIndex(0.7)).kind is InnovationKind.PARETO
        assert InnovationSpec.pareto(A15).kind is InnovationKind.CENTERED_PARETO

    def test_tapered_constructor_follows_regime(self):
        hard = TaperLevel.from_exponent(1000, 0.4)
        soft = TaperLevel.from_exponent(1000, 3.0)
        low = TailIndex(0.7)
        assert (InnovationSpec.tapered_pareto(low, hard).kind
                is InnovationKind.CENTERED_TAPERED_PARETO)
        assert (InnovationSpec.tapered_pareto(low, soft).kind
                is InnovationKind.TAPERED_PARETO)
        assert (InnovationSpec.tapered_pareto(A15, soft).kind
                is InnovationKind.CENTERED_TAPERED_PARETO)


class TestSamplers:
    def test_inverse_cdf_values(self):
        assert sample_pareto(TailIndex(1.0001), 0.5) == pytest.approx(2.0, rel=2e-4)
        assert sample_pareto(TailIndex(1.9999), 0.25) == pytest.approx(2.0, rel=3e-4)
        # boundary of support as u -> 1
        assert sample_pareto(A15, 1 - 1e-12) == pytest.approx(1.0, rel=1e-9)

    def test_uniform_domain(self):
        with pytest.raises(DomainError):
            sample_pareto(A15, 0.0)
        with pytest.raises(DomainError):
            sample_pareto(A15, 1.0)
        with pytest.raises(DomainError):
            sample_tapered_pareto(A15, TaperLevel(b=2.0), 0.5, 0.0)

    def test_tapered_at_b_one_is_shifted_exponential(self):
        # b = 1 forces zeta = 1 + R; u2 = e^-1 gives R = 1
        val = sample_tapered_pareto(A15, TaperLevel(b=1.0), 0.3, math.exp(-1.0))
        assert val == pytest.approx(2.0, rel=1e-12)

    def test_tapered_below_threshold_is_pareto(self):
        a1 = TailIndex(1.0 + 1e-12)
        assert sample_tapered_pareto(a1, TaperLevel(b=10.0), 0.5, 0.7) == pytest.approx(2.0)

    def test_pareto_ks_distance(self):
        # KS over 1e5 draws below the 1% critical value 1.63/sqrt(n)
        rng = make_stream(2026, 0)
        u = 1.0 - rng.random(100000)
        x = np.sort(pareto_from_uniform(A15, u))
        cdf = 1.0 - x ** -1.5
        grid = (np.arange(len(x)) + 1) / len(x)
        ks = max(np.max(np.abs(grid - cdf)), np.max(np.abs(grid - 1 / len(x) - cdf)))
        assert ks < 1.63 / math.sqrt(len(x))

    def test_infinite_taper_couples_exactly(self):
        rng = make_stream(7, 1)
        u1 = 1.0 - rng.random(1000)
        u2 = 1.0 - rng.random(1000)
        raw = pareto_from_uniform(A15, u1)
        tapered = tapered_pareto_from_uniforms(A15, TaperLevel(b=math.inf), u1, u2)
        assert np.array_equal(raw, tapered)

    def test_tail_mass_frequency(self):
        # P(zeta >= b) = b^-alpha: 0.125 at alpha=1.5, b=4
        rng = make_stream(11, 0)
        n = 200000
        u1 = 1.0 - rng.random(n)
        u2 = 1.0 - rng.random(n)
        z = tapered_pareto_from_uniforms(A15, TaperLevel(b=4.0), u1, u2)
        freq = float(np.mean(z >= 4.0))
        se = math.sqrt(0.125 * 0.875 / n)
        assert abs(freq - 0.125) < 3 * se


class TestMoments:
    def test_degenerate_taper_closed_forms(self):
        # zeta(.,1) = 1 + R: mean 2, second moment E(1+R)^2 = 5
        lvl = TaperLevel(b=1.0)
        assert tapered_moment(A15, lvl, 1.0) == pytest.approx(2.0, rel=1e-12)
        assert tapered_moment(A15, lvl, 2.0) == pytest.approx(5.0, rel=1e-12)

    def test_large_b_approaches_pareto_mean(self):
        # alpha/(alpha-1) = 3 at alpha = 1.5
        val = tapered_moment(A15, TaperLevel(b=1e6), 1.0)
        assert val == pytest.approx(3.0, rel=1e-3)

    def test_noninteger_order_against_quadrature(self):
        a, b, p = 1.5, 5.0, 2.7
        body = quad(lambda x: a * x ** (p - a - 1.0), 1, b, epsrel=1e-12)[0]
        tail = quad(lambda y: math.exp(-y) * (b + y) ** p, 0, np.inf, epsrel=1e-12)[0]
        oracle = body + b ** -a * tail
        assert tapered_moment(A15, TaperLevel(b=b), p) == pytest.approx(oracle, rel=1e-9)

    def test_second_moment_against_monte_carlo(self):
        rng = make_stream(5, 0)
        n = 10 ** 6
        lvl = TaperLevel(b=3.0)
        u1 = 1.0 - rng.random(n)
        u2 = 1.0 - rng.random(n)
        z = tapered_pareto_from_uniforms(A15, lvl, u1, u2)
        m2_hat = float(np.mean(z ** 2))
        se = float(np.std(z ** 2, ddof=1)) / math.sqrt(n)
        assert abs(tapered_moment(A15, lvl, 2.0) - m2_hat) < 3 * se

    def test_centered_mean_is_zero(self):
        lvl = TaperLevel(b=7.0)
        spec = InnovationSpec.tapered_pareto(A15, lvl, centered=True)
        assert spec.mean() == 0.0
        rng = make_stream(3, 0)
        draws = spec.sample_block(rng, 400000)
        assert abs(float(np.mean(draws))) < 4 * float(np.std(draws)) / math.sqrt(len(draws))

    def test_abs_central_moment_b_one(self):
        # E|R - 1|^3 by quadrature over the exponential density; the closed
        # form is 12/e - 2
        oracle = quad(lambda x: abs(x - 1) ** 3 * math.exp(-x), 0, np.inf,
                      epsrel=1e-12)[0]
        assert oracle == pytest.approx(12.0 / math.e - 2.0, rel=1e-12)
        val = tapered_abs_central_moment(A15, TaperLevel(b=1.0), 3.0)
        assert val == pytest.approx(oracle, rel=1e-9)

    def test_gaussian_abs_moment(self):
        assert gaussian_abs_moment(2.0) == pytest.approx(1.0, rel=1e-12)
        # E|N|^3 = 2 sqrt(2/pi)
        assert gaussian_abs_moment(3.0) == pytest.approx(2.0 * math.sqrt(2.0 / math.pi), rel=1e-12)


class TestMomentRatio:
    def test_degenerate_ratio_matches_oracle(self):
        # denominator Var(1+R) = 1, numerator E|R-1|^3 = 12/e - 2
        val = moment_ratio(A15, TaperLevel(b=1.0), 1.0)
        assert val == pytest.approx(12.0 / math.e - 2.0, rel=1e-9)

    def test_growth_envelope_trend(self):
        # ratio / n^(gamma*alpha*delta/2) non-increasing along the ladder
        r1, b1 = moment_ratio_bound_check(A15, 0.4, 1.0, 10 ** 2)
        r2, b2 = moment_ratio_bound_check(A15, 0.4, 1.0, 10 ** 4)
        assert b2 / b1 == pytest.approx((10 ** 4 / 10 ** 2) ** 0.3, rel=1e-12)
        assert r2 / b2 <= r1 / b1

    def test_small_delta_limit(self):
        val = moment_ratio(A15, TaperLevel(b=50.0), 1e-6)
        assert val == pytest.approx(1.0, rel=1e-3)

    def test_coupling_moment_bound_shape(self):
        # E|eta(b) - eta|^r <= C b^-(alpha-r) for 1 < r < alpha; the scaled
        # Monte Carlo moment must stay bounded as b grows
        a, r = A15, 1.2
        mean_raw = 3.0
        scaled = []
        for b in (10.0, 100.0, 1000.0):
            rng = make_stream(17, int(b))
            n = 400000
            u1 = 1.0 - rng.random(n)
            u2 = 1.0 - rng.random(n)
            theta = pareto_from_uniform(a, u1)
            zeta = tapered_pareto_from_uniforms(a, TaperLevel(b=b), u1, u2)
            diff = (zeta - tapered_mean(a, TaperLevel(b=b))) - (theta - mean_raw)
            scaled.append(float(np.mean(np.abs(diff) ** r)) / b ** -(1.5 - r))
        assert max(scaled) <= 3.0 * scaled[0]


class TestClassification:
    def test_hard(self):
        assert classify_innovation_taper(A15, 0.5) is TaperRegime.HARD

    def test_soft(self):
        assert classify_innovation_taper(TailIndex(0.5), 3.0) is TaperRegime.SOFT

    def test_boundary(self):
        a = TailIndex(2.0 - 1e-9)
        assert classify_innovation_taper(a, 1.0 / a.alpha) is TaperRegime.INTERMEDIATE

    @given(st.floats(0.05, 1.95), st.floats(0.01, 5.0))
    @settings(max_examples=60, deadline=None)
    def test_classification_consistency(self, alpha, gamma):
        if abs(alpha - 1.0) < 1e-6:
            return
        a = TailIndex(alpha)
        regime = classify_innovation_taper(a, gamma)
        # n * P(theta > n^gamma) = n^(1 - gamma*alpha)
        expo = 1.0 - gamma * alpha
        if expo > 1e-12:
            assert regime is TaperRegime.HARD
        elif expo < -1e-12:
            assert regime is TaperRegime.SOFT


class TestVariance:
    def test_tapered_variance_identity(self):
        lvl = TaperLevel(b=4.0)
        var = tapered_variance(A15, lvl)
        m1 = tapered_moment(A15, lvl, 1.0)
        m2 = tapered_moment(A15, lvl, 2.0)
        assert var == pytest.approx(m2 - m1 * m1, rel=1e-12)

    def test_raw_pareto_variance_refused(self):
        with pytest.raises(UsageError):
            InnovationSpec.pareto(A15).variance()
