"""Filter families, the zero-sum constant, and the truncation taper."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import zeta as scipy_zeta

from taplin.errors import DomainError
from taplin.filters import (
    Dependence,
    FilterSpec,
    FilterTaper,
    TaperedFilter,
    filter_coefficient,
    nd_zero_sum_constant,
    tapered_coefficient,
    zeta_series,
)


class TestCoefficients:
    def test_power_decay(self):
        spec = FilterSpec.lrd(0.7)
        assert filter_coefficient(spec, 2) == pytest.approx(2 ** -0.7, rel=1e-15)
        assert filter_coefficient(spec, 0) == 1.0

    def test_nd_zeroth_coefficient(self):
        spec = FilterSpec.nd(1.25)
        # -zeta(1.25), oracle: scipy's zeta
        assert spec.a0 == pytest.approx(-float(scipy_zeta(1.25, 1)), abs=1e-12)
        assert spec.a0 == pytest.approx(-4.59511, abs=5e-6)

    def test_coefficient_array_matches_scalar(self):
        spec = FilterSpec.srd(1.2, a0=3.0)
        arr = spec.coefficients(50)
        for i in (0, 1, 7, 50):
            assert arr[i] == filter_coefficient(spec, i)

    def test_negative_index_rejected(self):
        with pytest.raises(DomainError):
            FilterSpec.lrd(0.7).coefficient(-1)

    @given(st.floats(0.55, 0.95), st.integers(1, 500))
    @settings(max_examples=50, deadline=None)
    def test_monotone_decay(self, beta, i):
        spec = FilterSpec.lrd(beta)
        assert abs(spec.coefficient(i + 1)) < abs(spec.coefficient(i))


class TestZeroSumConstant:
    def test_known_series_value(self):
        # zeta(2) = pi^2/6
        assert nd_zero_sum_constant(2.0) == pytest.approx(-math.pi ** 2 / 6.0, abs=1e-12)

    def test_against_direct_summation(self):
        # direct summation to 1e7 plus integral tail correction
        beta = 1.25
        i = np.arange(1, 10 ** 7 + 1, dtype=np.float64)
        head = float(np.sum(i ** -beta))
        m = 10 ** 7 + 0.5
        tail = m ** (1 - beta) / (beta - 1)
        assert nd_zero_sum_constant(beta) == pytest.approx(-(head + tail), abs=1e-7)

    def test_against_scipy_band(self):
        for beta in (1.05, 1.3, 1.7, 2.4, 2.9):
            assert zeta_series(beta) == pytest.approx(float(scipy_zeta(beta, 1)), abs=1e-12)

    def test_large_beta_limit(self):
        assert nd_zero_sum_constant(60.0) == pytest.approx(-1.0, abs=1e-12)

    def test_divergent_rejected(self):
        with pytest.raises(DomainError):
            nd_zero_sum_constant(1.0)
        with pytest.raises(DomainError):
            nd_zero_sum_constant(0.8)


class TestAdmissibility:
    def test_envelopes(self):
        with pytest.raises(DomainError):
            FilterSpec.lrd(0.4)
        with pytest.raises(DomainError):
            FilterSpec.lrd(1.0)
        with pytest.raises(DomainError):
            FilterSpec.srd(0.9)
        with pytest.raises(DomainError):
            FilterSpec(1.25, Dependence.ND, a0=1.0)  # not zero-sum

    def test_nd_partial_sum_identity(self):
        # sum_{i<=k} a_i = -sum_{i>k} a_i, checked through the zeta tail
        spec = FilterSpec.nd(1.25)
        arr = spec.coefficients(10 ** 6)
        csum = np.cumsum(arr)
        for k in (1, 10, 100):
            tail = float(np.sum(arr[k + 1:])) + (10 ** 6 + 0.5) ** -0.25 / 0.25
            assert csum[k] == pytest.approx(-tail, abs=1e-8)

    def test_flat(self):
        spec = FilterSpec.flat()
        assert spec.coefficient(0) == spec.coefficient(17) == 1.0

    def test_infinite_sum(self):
        assert FilterSpec.srd(1.2).infinite_sum() == pytest.approx(
            1.0 + float(scipy_zeta(1.2, 1)), abs=1e-10
        )
        assert FilterSpec.nd(1.25).infinite_sum() == 0.0
        with pytest.raises(DomainError):
            FilterSpec.lrd(0.7).infinite_sum()


class TestTaperedFilter:
    def test_truncation_lag(self):
        tf = TaperedFilter(FilterSpec.lrd(0.7), gamma1=0.5, c=1.0, n=100)
        assert tf.lam == 10
        assert tapered_coefficient(tf, 10) == 10 ** -0.7  # inclusive boundary
        assert tapered_coefficient(tf, 11) == 0.0

    def test_moderate_floor(self):
        tf = TaperedFilter(FilterSpec.srd(1.2), gamma1=1.0, c=0.5, n=10)
        assert tf.lam == 5
        assert tapered_coefficient(tf, 3) == pytest.approx(3 ** -1.2, rel=1e-15)

    def test_lag_clamped_to_one(self):
        tf = TaperedFilter(FilterSpec.srd(1.2), gamma1=1.0, c=0.4, n=1)
        assert tf.lam == 1

    def test_c_forced_to_one_off_moderate(self):
        tf = TaperedFilter(FilterSpec.lrd(0.7), gamma1=0.5, c=3.0, n=100)
        assert tf.c == 1.0
        tf2 = TaperedFilter(FilterSpec.lrd(0.7), gamma1=1.0, c=3.0, n=100)
        assert tf2.c == 3.0

    def test_taper_regimes(self):
        mk = lambda g: TaperedFilter(FilterSpec.lrd(0.7), gamma1=g, c=1.0, n=64)
        assert mk(0.5).taper_regime is FilterTaper.STRONG
        assert mk(1.5).taper_regime is FilterTaper.WEAK
        assert mk(1.0).taper_regime is FilterTaper.MODERATE

    def test_finite_support_sum(self):
        # sum over the tapered filter equals the truncated partial sum exactly
        tf = TaperedFilter(FilterSpec.srd(1.2), gamma1=0.5, c=1.0, n=400)
        arr = tf.coefficient_array()
        assert len(arr) == tf.lam + 1
        assert tf.truncated_sum() == pytest.approx(float(np.sum(arr)), rel=1e-15)

    def test_prefix_sums(self):
        tf = TaperedFilter(FilterSpec.lrd(0.7), gamma1=0.5, c=1.0, n=256)
        p = tf.prefix_sums()
        arr = tf.coefficient_array()
        assert p[0] == 0.0
        assert p[-1] == pytest.approx(float(np.sum(arr)), rel=1e-15)
