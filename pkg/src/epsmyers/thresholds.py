"""Smallness thresholds for the integral curvature excess and the diameter bound.

Every ``delta*`` function returns a :class:`ThresholdReport` that echoes its
inputs and all intermediate quantities, so a CSV row is self-contained.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .comparison import log_sn_ratio, log_v_quadrature, v_quadrature
from .epsrange import EpsParams, c_constant, d_tilde, lambda0
from .errors import DomainError, NumericError, PreconditionError

__all__ = [
    "GeometryBounds",
    "ThresholdReport",
    "t_of_eta",
    "delta1",
    "eta_star",
    "c_tilde",
    "log_c_tilde",
    "delta2",
    "delta2_formula",
    "g_eta",
    "r_prime",
    "delta2_prime",
    "t2_bound",
    "delta_fundamental",
    "delta_complete",
    "diameter_bound",
    "BRANCHES",
]

BRANCHES = ("delta1", "delta2", "delta2_prime", "delta_tilde_large_R", "delta_tilde_small_R")

R_PRIME_SLACK = 1.01


@dataclass(frozen=True)
class GeometryBounds:
    """Hypothesis package (K, a, b, H, R, eta) of the weighted curvature condition."""

    K: float
    a: float
    b: float
    H: float
    R: float
    eta: float

    def __post_init__(self):
        if not self.K <= 0:
            raise DomainError(f"K must be <= 0, got {self.K!r}", clause="K<=0")
        if not (self.a > 0 and self.a <= self.b):
            raise DomainError(f"need 0 < a <= b, got a={self.a!r}, b={self.b!r}", clause="0<a<=b")
        for name in ("H", "R", "eta"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be positive and finite, got {value!r}", clause=f"{name}>0")

    def replace(self, **changes):
        values = {k: getattr(self, k) for k in ("K", "a", "b", "H", "R", "eta")}
        values.update(changes)
        return GeometryBounds(**values)


@dataclass(frozen=True)
class ThresholdReport:
    value: float
    branch: str
    inputs: dict
    intermediates: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.branch not in BRANCHES:
            raise ValueError(f"unknown branch {self.branch!r}")
        if self.value == 0.0 or self.value == math.inf:
            # The exact value is positive; its factors left double precision range.
            raise NumericError(
                f"{self.branch} is outside double precision range (got {self.value!r})",
                diagnostics={"clause": "float-range", "branch": self.branch},
            )
        if not (self.value > 0 and math.isfinite(self.value)):
            raise PreconditionError(
                f"{self.branch} evaluated to {self.value!r}, which is not a positive finite number",
                clause="value>0",
            )
        for key, val in self.intermediates.items():
            if isinstance(val, float) and not math.isfinite(val):
                raise PreconditionError(f"intermediate {key} of {self.branch} is {val!r}")

    def as_row(self):
        row = {"quantity": self.branch, "value": self.value}
        row.update(self.inputs)
        row.update(self.intermediates)
        return row


def _positive(name, value):
    if not (value > 0 and math.isfinite(value)):
        raise DomainError(f"{name} must be positive and finite, got {value!r}", clause=f"{name}>0")


def _check_ab(a, b):
    if not (a > 0 and a <= b):
        raise DomainError(f"need 0 < a <= b, got a={a!r}, b={b!r}", clause="0<a<=b")


def _log_v(store, name, c, K, a, R):
    """log v_{cK,a}(R), recorded in ``store`` (the plain value only when it is representable)."""
    lv = log_v_quadrature(c, K, a, R)
    store["log_" + name] = lv
    if lv < 700.0:
        store[name] = math.exp(lv)
    return lv


def _exp_value(log_value, branch):
    """exp of a threshold computed in log space; the log value travels with a range failure."""
    if log_value > 709.0:
        raise NumericError(f"{branch} overflows double precision (log value {log_value!r})",
                           diagnostics={"clause": "float-range", "branch": branch, "log_value": log_value})
    value = math.exp(log_value)
    if value == 0.0:
        raise NumericError(f"{branch} underflows double precision (log value {log_value!r})",
                           diagnostics={"clause": "float-range", "branch": branch, "log_value": log_value})
    return value


def _inputs(p, **extra):
    row = {"n": p.n, "N": p.N, "eps": p.eps}
    row.update(extra)
    return row


def t_of_eta(eta):
    """Smallest T > 2 with 1/(1 - 2/T) <= (pi + eta)/(pi + eta/2), namely 4(pi + eta)/eta."""
    _positive("eta", eta)
    return 4.0 * (math.pi + eta) / eta


def _angle_factor(eta):
    # 1 - pi^2/(pi + eta/2)^2, written to stay accurate for small eta.
    q = eta / 2.0
    return q * (2.0 * math.pi + q) / (math.pi + q) ** 2


def delta1(p, a, b, H, eta):
    """Threshold for the compact-manifold diameter estimate."""
    if not isinstance(p, EpsParams):
        raise DomainError("p must be EpsParams")
    _check_ab(a, b)
    _positive("H", H)
    _positive("eta", eta)
    c = c_constant(p)
    lam0 = lambda0(p)
    T = t_of_eta(eta)
    inv_c = 1.0 / c
    angle = _angle_factor(eta)
    log_value = (
        math.log(H * (p.n - 1) * (1.0 - 2.0 / T))
        - (inv_c + 3.0) * math.log(2.0)
        - inv_c * math.log(T)
        + math.log(angle)
        + (2.0 * inv_c + 2.0 + lam0) * math.log(a / b)
    )
    return ThresholdReport(
        value=_exp_value(log_value, "delta1"),
        branch="delta1",
        inputs=_inputs(p, a=a, b=b, H=H, eta=eta),
        intermediates={"c": c, "lambda0": lam0, "T": T, "D_tilde": d_tilde(p, a, b), "angle_factor": angle},
    )


def eta_star(H, R, Dt):
    """Largest admissible eta for ball radius R: (4/7)(R sqrt(H)/Dt - pi)."""
    _positive("H", H)
    _positive("R", R)
    if not Dt >= 1:
        raise DomainError(f"D~ must be >= 1, got {Dt!r}", clause="Dt>=1")
    return 4.0 / 7.0 * (R * math.sqrt(H) / Dt - math.pi)


def log_c_tilde(c, K, a, b, R, r):
    """log of sn_{cK}((R-r)/a)^{1/c} / sn_{cK}((R-r)/b)^{1/c}."""
    if not 0 < r < R:
        raise DomainError(f"need 0 < r < R, got r={r!r}, R={R!r}", clause="0<r<R")
    if K > 0:
        raise DomainError("C~ is only defined here for K <= 0", clause="K<=0")
    _positive("c", c)
    _check_ab(a, b)
    if a == b:
        return 0.0
    if K == 0:
        return math.log(b / a) / c
    x = R - r
    return log_sn_ratio(c * K, x / a, x / b) / c


def c_tilde(c, K, a, b, R, r):
    """sn_{cK}((R-r)/a)^{1/c} / sn_{cK}((R-r)/b)^{1/c}."""
    return math.exp(log_c_tilde(c, K, a, b, R, r))


def g_eta(c, K, b, H, Dt, eta):
    """(1/2 + pi/eta) * int_0^{eta Dt/(4 b sqrt H)} sn_{cK}(t)^{1/c} dt."""
    for name, value in (("c", c), ("b", b), ("H", H), ("Dt", Dt), ("eta", eta)):
        _positive(name, value)
    if K > 0:
        raise DomainError("G(eta) is only used for K <= 0", clause="K<=0")
    r = eta * Dt / (4.0 * math.sqrt(H))
    return (0.5 + math.pi / eta) * v_quadrature(c, K, b, r)


def delta2_formula(p, g, Dt=None):
    """Evaluate the ball-average threshold verbatim, without the eta < eta* check.

    Used directly for the eta -> eta* limit; :func:`delta2` adds the strict
    hypothesis check.
    """
    if g.K > 0:
        raise DomainError("K > 0 is not supported by the delta thresholds", clause="K<=0")
    c = c_constant(p)
    lam0 = lambda0(p)
    if Dt is None:
        Dt = d_tilde(p, g.a, g.b)
    sqrtH = math.sqrt(g.H)
    r = g.eta * Dt / (4.0 * sqrtH)
    if not r < g.R:
        raise PreconditionError(f"need r = eta D~/(4 sqrt H) = {r!r} < R = {g.R!r}", clause="r<R")
    log_Ct = log_c_tilde(c, g.K, g.a, g.b, g.R, r)
    angle = _angle_factor(g.eta)
    intermediates = {"c": c, "lambda0": lam0, "D_tilde": Dt, "r": r, "log_C_tilde": log_Ct}
    if log_Ct < 700.0:
        intermediates["C_tilde"] = math.exp(log_Ct)
    log_v_b_r = _log_v(intermediates, "v_b_r", c, g.K, g.b, r)
    log_v_a_R = _log_v(intermediates, "v_a_R", c, g.K, g.a, g.R)
    log_v_a_2R = _log_v(intermediates, "v_a_2R", c, g.K, g.a, 2.0 * g.R)
    intermediates["angle_factor"] = angle
    # v_a(R) + v_a(2R) in logs; v_a(2R) >= v_a(R).
    log_den = log_v_a_2R + math.log1p(math.exp(log_v_a_R - log_v_a_2R))
    log_value = (
        math.log(g.H * (p.n - 1) * (math.pi + g.eta / 2.0) / g.eta)
        - log_Ct
        + log_v_b_r
        - log_den
        + math.log(angle)
        + (lam0 + 1.0) * math.log(g.a / g.b)
    )
    intermediates["log_delta2"] = log_value
    return log_value, intermediates


def _geometry_inputs(p, g):
    return _inputs(p, K=g.K, a=g.a, b=g.b, H=g.H, R=g.R, eta=g.eta)


def delta2(p, g):
    """Ball-average threshold when R > pi D~/sqrt(H) and 0 < eta < eta*(H, R, D~)."""
    Dt = d_tilde(p, g.a, g.b)
    limit = math.pi * Dt / math.sqrt(g.H)
    if not g.R > limit:
        raise PreconditionError(
            f"R-eta condition: need R > pi D~/sqrt(H) = {limit!r}, got R = {g.R!r}",
            clause="R-eta-cond:R",
        )
    es = eta_star(g.H, g.R, Dt)
    if not g.eta < es:
        raise PreconditionError(
            f"R-eta condition: need eta < eta*(H, R, D~) = {es!r}, got eta = {g.eta!r}",
            clause="R-eta-cond:eta",
        )
    log_value, inter = delta2_formula(p, g, Dt)
    inter["eta_star"] = es
    return ThresholdReport(value=_exp_value(log_value, "delta2"), branch="delta2", inputs=_geometry_inputs(p, g), intermediates=inter)


def r_prime(p, a, b, H, eta):
    """Deterministic enlarged radius 1.01 (D~/sqrt H)(pi + 7 eta/4)."""
    _check_ab(a, b)
    _positive("H", H)
    _positive("eta", eta)
    Dt = d_tilde(p, a, b)
    return R_PRIME_SLACK * Dt / math.sqrt(H) * (math.pi + 7.0 * eta / 4.0)


def t2_bound(c, K, a, b, R, Rp):
    """Bound (b/a) v_{cK,a}(2R'+R)/v_{cK,b}(R/2) on the size of a maximal R-net of B(p, R')."""
    _check_ab(a, b)
    _positive("R", R)
    if not Rp >= R:
        raise DomainError(f"need R' >= R, got R'={Rp!r}, R={R!r}", clause="Rp>=R")
    log_value = math.log(b / a) + log_v_quadrature(c, K, a, 2.0 * Rp + R) - log_v_quadrature(c, K, b, R / 2.0)
    return _exp_value(log_value, "T2 bound")


def _log_net_factor(c, K, a, b, R, Rp, store):
    """log of (a/b)^2 v_{cK,b}(R/2)/v_{cK,a}(2R'+R) * v_{cK,a}(R')/v_{cK,b}(R'+R)."""
    return (
        2.0 * math.log(a / b)
        + _log_v(store, "v_b_R_half", c, K, b, R / 2.0)
        - _log_v(store, "v_a_2Rp_plus_R", c, K, a, 2.0 * Rp + R)
        + _log_v(store, "v_a_Rp", c, K, a, Rp)
        - _log_v(store, "v_b_Rp_plus_R", c, K, b, Rp + R)
    )


def _finite_exp(store, name, log_value):
    store["log_" + name] = log_value
    if -700.0 < log_value < 700.0:
        store[name] = math.exp(log_value)


def delta2_prime(p, g):
    """Ball-average threshold valid for every R > 0, through the enlarged radius R'(eta)."""
    if g.K > 0:
        raise DomainError("K > 0 is not supported by the delta thresholds", clause="K<=0")
    c = c_constant(p)
    Rp = r_prime(p, g.a, g.b, g.H, g.eta)
    Dt = d_tilde(p, g.a, g.b)
    es = eta_star(g.H, Rp, Dt)
    if not g.eta < es:
        raise NumericError(f"R' = {Rp!r} does not satisfy eta < eta* = {es!r}", diagnostics={"clause": "R-prime"})
    log_inner, inner = delta2_formula(p, g.replace(R=Rp), Dt)
    intermediates = {"R_prime": Rp}
    log_factor = _log_net_factor(c, g.K, g.a, g.b, g.R, Rp, intermediates)
    _finite_exp(intermediates, "net_factor", log_factor)
    _finite_exp(intermediates, "delta2_at_R_prime", log_inner)
    intermediates.update({k: v for k, v in inner.items() if k not in intermediates and not k.startswith("v_")})
    intermediates["eta_star_at_R_prime"] = es
    if Rp >= g.R:
        intermediates["T2_bound"] = t2_bound(c, g.K, g.a, g.b, g.R, Rp)
    value = _exp_value(log_factor + log_inner, "delta2_prime")
    return ThresholdReport(value=value, branch="delta2_prime", inputs=_geometry_inputs(p, g), intermediates=intermediates)


def delta_complete(p, g):
    """Threshold of the complete-manifold theorem: delta2 in the lemma's regime, else delta2'."""
    Dt = d_tilde(p, g.a, g.b)
    if g.R > math.pi * Dt / math.sqrt(g.H) and g.eta < eta_star(g.H, g.R, Dt):
        return delta2(p, g)
    return delta2_prime(p, g)


def _log_delta2_at_eta_star(p, g, R):
    Dt = d_tilde(p, g.a, g.b)
    es = eta_star(g.H, R, Dt)
    log_value, inter = delta2_formula(p, g.replace(R=R, eta=es), Dt)
    inter["eta_star"] = es
    return log_value, inter


def delta_fundamental(p, g):
    """Threshold for finiteness of the fundamental group.

    Large-R case (R > pi D~/sqrt H): (a/b) v_{cK,b}(R)/v_{cK,a}(3R) delta2(R, eta*).
    Small-R case: the a^3/b^3 product of volume ratios through R' = R'(eta).
    """
    if g.K > 0:
        raise DomainError("K > 0 is not supported by the delta thresholds", clause="K<=0")
    c = c_constant(p)
    Dt = d_tilde(p, g.a, g.b)
    limit = math.pi * Dt / math.sqrt(g.H)
    if g.R > limit:
        log_d2, inter = _log_delta2_at_eta_star(p, g, g.R)
        log_large = (
            math.log(g.a / g.b)
            + _log_v(inter, "v_b_R", c, g.K, g.b, g.R)
            - _log_v(inter, "v_a_3R", c, g.K, g.a, 3.0 * g.R)
        )
        _finite_exp(inter, "delta2_at_eta_star", log_d2)
        _finite_exp(inter, "large_R_factor", log_large)
        value = _exp_value(log_large + log_d2, "delta_tilde_large_R")
        return ThresholdReport(value=value, branch="delta_tilde_large_R", inputs=_geometry_inputs(p, g), intermediates=inter)
    Rp = r_prime(p, g.a, g.b, g.H, g.eta)
    log_d2, inter = _log_delta2_at_eta_star(p, g, Rp)
    inter["R_prime"] = Rp
    log_net = _log_net_factor(c, g.K, g.a, g.b, g.R, Rp, inter)
    log_large = (
        math.log(g.a / g.b)
        + _log_v(inter, "v_b_Rp", c, g.K, g.b, Rp)
        - _log_v(inter, "v_a_3Rp", c, g.K, g.a, 3.0 * Rp)
    )
    _finite_exp(inter, "delta2_at_eta_star", log_d2)
    _finite_exp(inter, "net_factor", log_net)
    _finite_exp(inter, "large_R_factor", log_large)
    value = _exp_value(log_net + log_large + log_d2, "delta_tilde_small_R")
    return ThresholdReport(value=value, branch="delta_tilde_small_R", inputs=_geometry_inputs(p, g), intermediates=inter)


def diameter_bound(p, a, b, H, eta):
    """(pi + eta) D~ / sqrt(H); eta = 0 gives the limiting Myers-type bound."""
    _check_ab(a, b)
    _positive("H", H)
    if not (eta >= 0 and math.isfinite(eta)):
        raise DomainError(f"eta must be >= 0, got {eta!r}", clause="eta>=0")
    return (math.pi + eta) * d_tilde(p, a, b) / math.sqrt(H)
