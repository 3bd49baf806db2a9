import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epsmyers.epsrange import (
    EpsParams,
    c_constant,
    d_tilde,
    d_tilde_lambda,
    lambda0,
    lambda_window,
    phi_psi,
    validate_eps_range,
)
from epsmyers.errors import DomainError

from oracles import c_of, d_tilde_of, lambda0_of
from strategies import ab_pair, eps_params


class TestValidate:
    def test_n1_requires_zero(self):
        assert validate_eps_range(2, 1, 0.0) is None
        v = validate_eps_range(2, 1, 0.1)
        assert v.clause == "N=1"
        assert "ε must be 0 when N = 1" in v.message

    def test_n_equals_dimension_admits_everything(self):
        assert validate_eps_range(3, 3, 100.0) is None

    def test_hand_bound(self):
        # sqrt((0.5-1)/(0.5-3)) = sqrt(0.2) < 0.9
        v = validate_eps_range(3, 0.5, 0.9)
        assert v is not None and v.clause == "N!=1,n"
        assert validate_eps_range(3, 0.5, 0.44) is None

    def test_infinite_N(self):
        assert validate_eps_range(4, math.inf, 0.999) is None
        assert validate_eps_range(4, math.inf, 1.0).clause == "N=inf"
        assert validate_eps_range(4, math.inf, -1.0).clause == "N=inf"

    def test_exact_boundary(self):
        # n=4, N=0: (N-1)/(N-n) = 1/4 so the bound is exactly 1/2.
        assert validate_eps_range(4, 0.0, 0.5) is not None
        assert validate_eps_range(4, 0.0, -0.5) is not None
        assert validate_eps_range(4, 0.0, math.nextafter(0.5, 0.0)) is None

    def test_nonfinite_eps(self):
        assert validate_eps_range(3, 3, math.inf).clause == "eps-finite"
        assert validate_eps_range(3, 3, math.nan).clause == "eps-finite"

    @pytest.mark.parametrize("n", [1, 0, 2.5])
    def test_bad_dimension(self, n):
        with pytest.raises(DomainError):
            validate_eps_range(n, 5, 0.0)

    def test_forbidden_interval(self):
        with pytest.raises(DomainError) as info:
            validate_eps_range(3, 2.0, 0.0)
        assert info.value.clause == "N-forbidden-interval"

    def test_params_raise_with_clause(self):
        with pytest.raises(DomainError) as info:
            EpsParams(2, 1, 0.1)
        assert info.value.clause == "N=1"


class TestConstants:
    def test_c_examples(self):
        assert c_constant(EpsParams(2, 1, 0)) == 1.0
        assert c_constant(EpsParams(3, 3, 7)) == 0.5
        assert c_constant(EpsParams(4, math.inf, 0.5)) == pytest.approx(0.25, rel=1e-15)

    def test_lambda0_examples(self):
        assert lambda0(EpsParams(5, math.inf, 0.3)) == 0.0
        assert lambda0(EpsParams(2, 1, 0)) == 1.0
        assert lambda0(EpsParams(2, 0, 0)) == pytest.approx(1 - math.sqrt(0.5), rel=1e-15)

    def test_phi_psi_examples(self):
        assert phi_psi(0, 0.5, 2) == (1.0, 1.0)
        assert phi_psi(2, 0.5, 2) == (4.0, 0.25)
        assert phi_psi(-1, 0.5, 2) == (2.0, 0.5)
        with pytest.raises(DomainError):
            phi_psi(1, 2, 1)
        with pytest.raises(DomainError):
            phi_psi(1, 0, 1)

    def test_window_examples(self):
        assert lambda_window(EpsParams(3, 3, 0.2)).is_everything
        w = lambda_window(EpsParams(2, 0, 0))
        assert w.lower == pytest.approx(1 - math.sqrt(0.5))
        assert w.upper == pytest.approx(1 + math.sqrt(0.5))
        w = lambda_window(EpsParams(2, math.inf, 0))
        assert (w.lower, w.upper) == (0.0, 2.0)

    def test_window_negative_slope(self):
        # 1 - eps < 0 swaps the endpoints.
        w = lambda_window(EpsParams(3, 4, 1.5))
        s = math.sqrt(3 / 1)
        assert w.lower == pytest.approx((1 + s) / (1 - 1.5))
        assert w.upper == pytest.approx((1 - s) / (1 - 1.5))

    def test_d_tilde_lambda_examples(self):
        # eps = 1, N = n: the Phi/Psi factor only drops out at a = b or lambda = 0.
        assert d_tilde_lambda(EpsParams(4, 4, 1), 3.7, 0.8, 0.8) == 1.0
        assert d_tilde_lambda(EpsParams(4, 4, 1), 0.0, 0.3, 2.0) == 1.0
        assert d_tilde_lambda(EpsParams(4, 4, 1), 1.0, 1.0, 2.0) == pytest.approx(math.sqrt(2.0))
        assert d_tilde_lambda(EpsParams(3, 10, 0.2), 1.0, 1.5, 1.5) == 1.0
        assert d_tilde_lambda(EpsParams(2, 1, 0), 1.0, 1, 2) == pytest.approx(math.sqrt(2 + 2 / math.pi), rel=1e-12)

    def test_d_tilde_lambda_errors(self):
        p = EpsParams(2, math.inf, 0)
        with pytest.raises(DomainError) as info:
            d_tilde_lambda(p, 2.5, 1, 2)
        assert info.value.clause == "lambda-window"
        with pytest.raises(DomainError) as info:
            d_tilde_lambda(p, 0.0, 1, 2)
        assert info.value.clause == "lambda!=0"

    def test_d_tilde_examples(self):
        for n in (2, 3, 7):
            assert d_tilde(EpsParams(n, n, 1), 1, 1) == 1.0
        assert d_tilde(EpsParams(2, math.inf, 0), 1, math.exp(math.pi)) == pytest.approx(math.sqrt(3), rel=1e-14)

    def test_d_tilde_eps_one_large_N_exceeds_one_at_a_equals_b(self):
        # The eps = 1 branch does not depend on a, b: sqrt((N-1)/(n-1)) > 1 when N > n.
        assert d_tilde(EpsParams(2, 5, 1), 1, 1) == pytest.approx(2.0)


@given(eps_params())
def test_c_positive_finite(p):
    c = c_constant(p)
    assert c > 0 and math.isfinite(c)
    assert c <= 1.0 / (p.n - 1) * (1 + 1e-15) or p.N < 1


@given(eps_params())
def test_c_matches_oracle(p):
    assert c_constant(p) == pytest.approx(c_of(p.n, p.N, p.eps), rel=1e-12)


@given(eps_params())
def test_lambda0_in_window(p):
    lam0 = lambda0(p)
    w = lambda_window(p)
    assert lam0 in w or math.isclose(lam0, w.lower, rel_tol=1e-12, abs_tol=1e-15)
    assert lam0 == pytest.approx(lambda0_of(p.n, p.N, p.eps), rel=1e-12, abs=1e-15)
    if p.N <= 1:
        assert lam0 > 0


@given(eps_params(), ab_pair())
def test_d_tilde_at_least_one_and_oracle(p, ab):
    a, b = ab
    D = d_tilde(p, a, b)
    assert D >= 1.0
    assert D == pytest.approx(d_tilde_of(p.n, p.N, p.eps, a, b), rel=1e-9)


@given(eps_params(allow_eps_one=False), st.floats(0.2, 5.0))
def test_d_tilde_one_at_a_equals_b(p, a):
    assert d_tilde(p, a, a) == pytest.approx(1.0, abs=1e-15)


@given(eps_params(), st.floats(0.3, 3.0))
def test_d_tilde_monotone_in_ratio(p, a):
    values = [d_tilde(p, a, a * r) for r in (1, 1.5, 2, 3, 5, 8, 13)]
    assert all(x <= y for x, y in zip(values, values[1:]))


@given(st.floats(-6, 6), ab_pair())
def test_phi_psi_relations(lam, ab):
    a, b = ab
    Phi, Psi = phi_psi(lam, a, b)
    assert Phi >= Psi > 0
    if lam != 0:
        Phi_neg, _ = phi_psi(-lam, a, b)
        assert Phi_neg == pytest.approx(1.0 / Psi, rel=1e-12)


@given(eps_params(), ab_pair())
def test_d_tilde_lambda_converges_to_d_tilde(p, ab):
    a, b = ab
    if not p.N < 1:
        return
    lam0 = lambda0(p)
    target = d_tilde(p, a, b)
    window = lambda_window(p)
    lams = [lam0 + 10.0**-k for k in range(1, 9) if lam0 + 10.0**-k in window]
    diffs = [abs(d_tilde_lambda(p, lam, a, b) - target) for lam in lams]
    assert diffs[-1] <= 1e-6
    assert d_tilde_lambda(p, lam0, a, b) == pytest.approx(target, rel=1e-12)


@given(eps_params(), ab_pair(), st.floats(0.001, 0.999))
def test_d_tilde_lambda_at_least_one(p, ab, u):
    a, b = ab
    w = lambda_window(p)
    if w.is_everything:
        lam = (u - 0.5) * 10 or 1.0
    else:
        lam = w.lower + u * (w.upper - w.lower)
    if lam == 0 and p.eps != 1:
        return
    assert d_tilde_lambda(p, lam, a, b) >= 1.0
