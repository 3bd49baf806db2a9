import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epsmyers.comparison import (
    SnProfile,
    adaptive_simpson_sn_power,
    log_sn_ratio,
    log_v_quadrature,
    segment_constant_bound,
    sinh_ratio,
    sn,
    sn_array,
    sn_ratio,
    v_integral,
    v_quadrature,
)
from epsmyers.errors import DomainError, NumericError

from oracles import v_oracle


class TestSn:
    def test_examples(self):
        assert sn(0, 2.0) == 2.0
        assert sn(1, math.pi / 2) == pytest.approx(1.0, rel=1e-15)
        assert sn(-1, 1.0) == pytest.approx(1.1752011936438014, rel=1e-15)

    def test_domain(self):
        with pytest.raises(DomainError):
            sn(1.0, -0.1)
        with pytest.raises(DomainError):
            sn(4.0, math.pi / 2 + 1e-9)

    def test_profile(self):
        prof = SnProfile(4.0)
        assert prof.domain_end == pytest.approx(math.pi / 2)
        assert SnProfile(-1.0).domain_end == math.inf
        assert prof(0.0) == 0.0

    @pytest.mark.parametrize("k", [1e-12, 1e-10, 1e-8, 1e-6, 1e-4, -1e-12, -1e-8, -1e-4])
    def test_small_kappa_limit(self, k):
        for t in np.linspace(0.01, 3, 25):
            assert abs(sn(k, t) - t) / t <= abs(k) * t * t * 0.2

    def test_series_branch_continuous(self):
        for k in (1.0, -1.0):
            below = sn(k, 1e-4 * (1 - 1e-12))
            above = sn(k, 1e-4 * (1 + 1e-12))
            assert below == pytest.approx(above, rel=1e-11)

    def test_array_matches_scalar(self):
        t = np.array([0.0, 1e-6, 1e-3, 0.5, 1.5])
        for k in (2.0, 0.0, -3.0):
            assert np.allclose(sn_array(k, t), [sn(k, x) for x in t], rtol=1e-15, atol=0)

    def test_derivative_at_zero(self):
        for k in (5.0, -5.0):
            h = 1e-7
            assert sn(k, h) / h == pytest.approx(1.0, rel=1e-12)

    @pytest.mark.parametrize("k", [0.5, 2.0, -0.5, -2.0])
    def test_concavity_sign(self, k):
        end = math.pi / math.sqrt(k) if k > 0 else 3.0
        t = np.linspace(0.05, end - 0.05, 200)
        h = 1e-3
        d2 = (sn_array(k, t + h) - 2 * sn_array(k, t) + sn_array(k, t - h)) / h**2
        assert np.all(d2 < 0) if k > 0 else np.all(d2 > 0)
        assert np.all(sn_array(k, t) > 0)


class TestVQuadrature:
    def test_examples(self):
        assert v_quadrature(1, 0, 1, 2) == pytest.approx(2.0, rel=1e-15)
        assert v_quadrature(1, -1, 1, 1) == pytest.approx(math.cosh(1) - 1, rel=1e-10)
        assert v_quadrature(2, 0, 2, 2) == pytest.approx(2 / 3, rel=1e-15)

    def test_domain(self):
        with pytest.raises(DomainError):
            v_quadrature(0, 0, 1, 1)
        with pytest.raises(DomainError):
            v_quadrature(1, 0, 0, 1)
        with pytest.raises(DomainError):
            v_quadrature(1, 0, 1, -1)
        with pytest.raises(DomainError) as info:
            v_quadrature(1, 1, 1, 4.0)
        assert info.value.clause == "R/a<=pi/sqrt(cK)"

    def test_unconverged_raises_with_diagnostics(self):
        with pytest.raises(NumericError) as info:
            adaptive_simpson_sn_power(-1.0, 0.3, 5.0, rtol=1e-16, max_depth=2)
        assert info.value.diagnostics["unconverged_panels"] > 0

    def test_power_law_head(self):
        # Upper limit below the cutoff uses only the closed-form head.
        value, diag = adaptive_simpson_sn_power(-1.0, 2.0, 5e-7)
        assert diag["evals"] == 0
        assert value == pytest.approx((5e-7) ** 3 / 3, rel=1e-12)

    @given(st.floats(0.05, 3.0), st.floats(0.1, 4.0), st.floats(0.05, 8.0))
    def test_k0_closed_form(self, c, a, R):
        assert v_quadrature(c, 0.0, a, R) == pytest.approx(c / (c + 1) * (R / a) ** (1 / c + 1), rel=1e-10)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.1, 3.0), st.floats(-3.0, -0.01), st.floats(0.2, 3.0), st.floats(0.01, 6.0))
    def test_negative_K_matches_hypergeometric(self, c, K, a, R):
        assert v_quadrature(c, K, a, R) == pytest.approx(v_oracle(c, K, a, R), rel=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.1, 3.0), st.floats(0.05, 2.0), st.floats(0.01, 0.999))
    def test_positive_K_matches_beta(self, c, K, u):
        end = math.pi / math.sqrt(c * K)
        x = u * end
        assert v_integral(c, K, x) == pytest.approx(v_oracle(c, K, 1.0, x), rel=1e-9)


class TestLogV:
    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.1, 3.0), st.floats(-3.0, -1e-3) | st.just(0.0) | st.floats(1e-3, 1.0), st.floats(0.2, 3.0), st.floats(0.01, 0.99))
    def test_matches_log_of_plain(self, c, K, a, u):
        end = math.pi / math.sqrt(c * K) * a if K > 0 else 6.0
        R = u * end
        assert log_v_quadrature(c, K, a, R) == pytest.approx(math.log(v_quadrature(c, K, a, R)), abs=1e-9)

    def test_beyond_double_range(self):
        # The plain integral overflows; its log follows the K = 0 closed form shape.
        assert log_v_quadrature(0.5, 0.0, 1.0, 1e120) == pytest.approx(math.log(1 / 3) + 3 * math.log(1e120), rel=1e-14)
        lv = log_v_quadrature(0.05, -1.0, 1.0, 200.0)
        # int_0^x sinh(s t)^p/s^p ~ e^{p s x}/(2^p s^(p+1) p) for large x
        s, p = math.sqrt(0.05), 20.0
        assert lv == pytest.approx(p * s * 200 - p * math.log(2) - (p + 1) * math.log(s) - math.log(p), rel=1e-9)
        with pytest.raises(NumericError):
            v_quadrature(0.05, -1.0, 1.0, 200.0)

    def test_log_sn_ratio(self):
        assert log_sn_ratio(-1.0, 2.0, 1.0) == pytest.approx(math.log(math.sinh(2) / math.sinh(1)), rel=1e-14)
        assert log_sn_ratio(0.0, 3.0, 1.5) == pytest.approx(math.log(2.0))
        assert log_sn_ratio(-1.0, 2000.0, 1000.0) == pytest.approx(1000.0, rel=1e-14)


class TestSegmentConstant:
    def test_examples(self):
        assert segment_constant_bound(1, 0, 1, 1, 3.7) == pytest.approx(2.0)
        assert segment_constant_bound(1, -1, 1, 1, 2) == pytest.approx(math.sinh(2) / math.sinh(1), rel=1e-12)
        assert segment_constant_bound(0.5, 0, 1, 2, 5) == pytest.approx(16.0)

    def test_errors(self):
        with pytest.raises(DomainError):
            segment_constant_bound(1, 0.5, 1, 1, 1)
        with pytest.raises(DomainError):
            segment_constant_bound(1, -1, 2, 1, 1)

    @given(st.floats(0.1, 2.0), st.floats(-4.0, -0.01), st.floats(0.3, 2.0), st.floats(1.0, 5.0))
    def test_nondecreasing_in_S(self, c, K, a, ratio):
        grid = np.geomspace(1e-3, 20, 40)
        vals = [segment_constant_bound(c, K, a, a * ratio, S) for S in grid]
        assert all(x <= y * (1 + 1e-12) for x, y in zip(vals, vals[1:]))

    def test_sn_ratio_no_overflow(self):
        assert sn_ratio(-1.0, 800.0, 799.0) == pytest.approx(math.e, rel=1e-12)


class TestSinhRatio:
    def test_examples(self):
        assert sinh_ratio(2, 1, 1e-9) == pytest.approx(2.0, rel=1e-12)
        assert sinh_ratio(2, 1, 1.0) == pytest.approx(math.sinh(2) / math.sinh(1), rel=1e-14)
        assert sinh_ratio(3, 2, 0.5) < sinh_ratio(3, 2, 1.0)

    def test_errors(self):
        with pytest.raises(DomainError):
            sinh_ratio(1, 1, 1)
        with pytest.raises(DomainError):
            sinh_ratio(2, 0, 1)
        with pytest.raises(DomainError):
            sinh_ratio(2, 1, 0)

    def test_large_arguments(self):
        assert sinh_ratio(3, 1, 150) == pytest.approx(math.exp(300), rel=1e-10)

    @given(st.floats(0.1, 3.0), st.floats(0.1, 3.0), st.floats(-6, math.log10(50)), st.floats(-6, math.log10(50)))
    def test_strictly_increasing(self, B, dA, e1, e2):
        A = B + dA
        s1, s2 = sorted((10.0**e1, 10.0**e2))
        if s1 == s2:
            return
        assert sinh_ratio(A, B, s1) < sinh_ratio(A, B, s2)
