"""Comparison function sn_kappa, the volume quadrature v_{cK,a}, and sn ratios."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit

from .errors import DomainError, NumericError

__all__ = [
    "SnProfile",
    "SERIES_CUTOFF",
    "sn",
    "sn_array",
    "sinhc",
    "sinc_small",
    "v_quadrature",
    "v_integral",
    "log_v_quadrature",
    "log_v_integral",
    "adaptive_simpson_sn_power",
    "segment_constant_bound",
    "sinh_ratio",
    "sn_ratio",
    "log_sn_ratio",
]

# Below this argument the sin/sinh expressions switch to truncated Taylor series.
SERIES_CUTOFF = 1e-4
# Leading piece [0, POWER_LAW_CUTOFF] of the volume integral is done in closed form.
POWER_LAW_CUTOFF = 1e-6
QUAD_RTOL = 1e-10
QUAD_ATOL = 1e-30


def sinhc(x):
    """sinh(x)/x with a 5-term series for |x| < SERIES_CUTOFF."""
    if abs(x) < SERIES_CUTOFF:
        x2 = x * x
        return 1.0 + x2 / 6.0 * (1.0 + x2 / 20.0 * (1.0 + x2 / 42.0 * (1.0 + x2 / 72.0)))
    return math.sinh(x) / x


def sinc_small(x):
    """sin(x)/x with a 5-term series for |x| < SERIES_CUTOFF."""
    if abs(x) < SERIES_CUTOFF:
        x2 = x * x
        return 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
    return math.sin(x) / x


@dataclass(frozen=True)
class SnProfile:
    """sn_kappa together with the end of its positive domain."""

    kappa: float

    @property
    def domain_end(self):
        return math.pi / math.sqrt(self.kappa) if self.kappa > 0 else math.inf

    def __call__(self, t):
        return sn(self.kappa, t)


def sn(kappa, t):
    """sin(sqrt(k) t)/sqrt(k), t, or sinh(sqrt(-k) t)/sqrt(-k) depending on the sign of kappa."""
    if not t >= 0:
        raise DomainError(f"sn requires t >= 0, got {t!r}", clause="t>=0")
    if kappa > 0:
        s = math.sqrt(kappa)
        if t > math.pi / s:
            raise DomainError(
                f"sn_kappa with kappa={kappa!r} is only defined up to pi/sqrt(kappa) = {math.pi / s!r}; got t={t!r}",
                clause="t<=pi/sqrt(kappa)",
            )
        return t * sinc_small(s * t)
    if kappa < 0:
        return t * sinhc(math.sqrt(-kappa) * t)
    return float(t)


def sn_array(kappa, t):
    """Vectorized sn_kappa without domain checks (callers own the domain)."""
    t = np.asarray(t, dtype=float)
    if kappa == 0:
        return t.copy()
    s = math.sqrt(abs(kappa))
    x = s * t
    small = np.abs(x) < SERIES_CUTOFF
    x2 = x * x
    if kappa > 0:
        series = 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(small, series, np.sin(x) / np.where(small, 1.0, x))
    else:
        series = 1.0 + x2 / 6.0 * (1.0 + x2 / 20.0 * (1.0 + x2 / 42.0 * (1.0 + x2 / 72.0)))
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            ratio = np.where(small, series, np.sinh(x) / np.where(small, 1.0, x))
    return t * ratio


# -- adaptive Simpson for int_0^X sn_kappa(tau)^p dtau ---------------------------------


@njit(cache=True)
def _log_sn(kappa, t):
    if t <= 0.0:
        return -np.inf
    if kappa > 0.0:
        s = math.sqrt(kappa)
        x = s * t
        if x < 1e-4:
            x2 = x * x
            r = 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
        else:
            r = math.sin(x) / x
        if r <= 0.0:
            return -np.inf
        return math.log(t * r)
    if kappa < 0.0:
        s = math.sqrt(-kappa)
        x = s * t
        if x < 1e-4:
            x2 = x * x
            r = 1.0 + x2 / 6.0 * (1.0 + x2 / 20.0 * (1.0 + x2 / 42.0 * (1.0 + x2 / 72.0)))
            return math.log(t * r)
        if x > 20.0:
            return x - math.log(2.0) + math.log1p(-math.exp(-2.0 * x)) - math.log(s)
        return math.log(math.sinh(x) / s)
    return math.log(t)


@njit(cache=True)
def _sn_pow(kappa, p, t, shift):
    # sn_kappa(t)^p * exp(-shift), evaluated through logs so large arguments stay finite.
    return math.exp(p * _log_sn(kappa, t) - shift)


@njit(cache=True)
def _adaptive_simpson(kappa, p, lo, hi, rtol, atol, max_depth, shift):
    # Coarse composite estimate sets the absolute target for the recursion.
    m = 64
    h = (hi - lo) / m
    coarse = _sn_pow(kappa, p, lo, shift) + _sn_pow(kappa, p, hi, shift)
    for i in range(1, m):
        coarse += (4.0 if i % 2 == 1 else 2.0) * _sn_pow(kappa, p, lo + i * h, shift)
    coarse *= h / 3.0
    if not math.isfinite(coarse):
        return coarse, m + 1, 0, 1
    target = max(rtol * abs(coarse), atol)

    # Explicit stack: (a, b, fa, fm, fb, whole, tol, depth)
    cap = 4 * max_depth + 16
    sa = np.empty(cap)
    sb = np.empty(cap)
    sfa = np.empty(cap)
    sfm = np.empty(cap)
    sfb = np.empty(cap)
    sw = np.empty(cap)
    st = np.empty(cap)
    sd = np.empty(cap, dtype=np.int64)
    fa = _sn_pow(kappa, p, lo, shift)
    fb = _sn_pow(kappa, p, hi, shift)
    fm = _sn_pow(kappa, p, 0.5 * (lo + hi), shift)
    top = 0
    sa[0] = lo
    sb[0] = hi
    sfa[0] = fa
    sfm[0] = fm
    sfb[0] = fb
    sw[0] = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb)
    st[0] = target
    sd[0] = 0
    top = 1
    total = 0.0
    evals = 3
    deepest = 0
    failed = 0
    while top > 0:
        top -= 1
        a = sa[top]
        b = sb[top]
        fa = sfa[top]
        fm = sfm[top]
        fb = sfb[top]
        whole = sw[top]
        tol = st[top]
        depth = sd[top]
        c = 0.5 * (a + b)
        fl = _sn_pow(kappa, p, 0.5 * (a + c), shift)
        fr = _sn_pow(kappa, p, 0.5 * (c + b), shift)
        evals += 2
        left = (c - a) / 6.0 * (fa + 4.0 * fl + fm)
        right = (b - c) / 6.0 * (fm + 4.0 * fr + fb)
        delta = left + right - whole
        if depth > deepest:
            deepest = depth
        if abs(delta) <= 15.0 * tol or depth >= max_depth:
            if abs(delta) > 15.0 * tol:
                failed += 1
            total += left + right + delta / 15.0
        else:
            sa[top] = a
            sb[top] = c
            sfa[top] = fa
            sfm[top] = fl
            sfb[top] = fm
            sw[top] = left
            st[top] = 0.5 * tol
            sd[top] = depth + 1
            top += 1
            sa[top] = c
            sb[top] = b
            sfa[top] = fm
            sfm[top] = fr
            sfb[top] = fb
            sw[top] = right
            st[top] = 0.5 * tol
            sd[top] = depth + 1
            top += 1
    return total, evals, deepest, failed


def adaptive_simpson_sn_power(kappa, power, upper, rtol=QUAD_RTOL, atol=QUAD_ATOL, max_depth=50, shift=0.0):
    """exp(-shift) * int_0^upper sn_kappa(tau)^power dtau by adaptive Simpson bisection.

    The piece [0, min(upper, 1e-6)] uses the power-law expansion
    tau^p (1 - p kappa tau^2 / 6), whose neglected terms are O(tau^(p+5)).
    Returns ``(value, diagnostics)``.
    """
    if upper <= 0:
        return 0.0, {"evals": 0, "depth": 0}
    t0 = min(upper, POWER_LAW_CUTOFF)
    head = math.exp((power + 1) * math.log(t0) - math.log(power + 1) - shift) * (
        1.0 - power * kappa * t0 * t0 * (power + 1) / (6.0 * (power + 3))
    )
    if upper <= t0:
        return head, {"evals": 0, "depth": 0}
    body, evals, depth, failed = _adaptive_simpson(kappa, power, t0, upper, rtol, atol, max_depth, shift)
    diag = {"evals": int(evals), "depth": int(depth), "unconverged_panels": int(failed)}
    value = head + body
    if failed or not math.isfinite(value):
        raise NumericError(
            f"adaptive Simpson did not converge for kappa={kappa!r}, power={power!r}, upper={upper!r}",
            diagnostics=diag,
        )
    return value, diag


def v_integral(c, K, x):
    """int_0^x sn_{cK}(tau)^{1/c} dtau for an already-scaled upper limit x."""
    if not c > 0:
        raise DomainError(f"c must be positive, got {c!r}", clause="c>0")
    if not x >= 0:
        raise DomainError(f"upper limit must be >= 0, got {x!r}")
    kappa = c * K
    if kappa > 0 and x > math.pi / math.sqrt(kappa) * (1 + 1e-15):
        raise DomainError(
            f"upper limit {x!r} exceeds pi/sqrt(cK) = {math.pi / math.sqrt(kappa)!r}",
            clause="R/a<=pi/sqrt(cK)",
        )
    if x == 0:
        return 0.0
    # The scaled log-space quadrature never overflows internally.
    log_value = log_v_integral(c, K, x)
    if log_value > 709.0:
        raise NumericError(
            f"v integral overflows double precision for c={c!r}, K={K!r}, x={x!r} (log value {log_value!r})",
            diagnostics={"log_value": log_value},
        )
    if kappa == 0:
        return c / (c + 1.0) * x ** (1.0 / c + 1.0)
    return math.exp(log_value)


def v_quadrature(c, K, a, R):
    """v_{cK,a}(R) = int_0^{R/a} sn_{cK}(tau)^{1/c} dtau."""
    if not a > 0:
        raise DomainError(f"a must be positive, got {a!r}", clause="a>0")
    if not R > 0:
        raise DomainError(f"R must be positive, got {R!r}", clause="R>0")
    return v_integral(c, K, R / a)


def log_v_integral(c, K, x):
    """log of int_0^x sn_{cK}(tau)^{1/c} dtau, finite even when the integral overflows."""
    if not c > 0:
        raise DomainError(f"c must be positive, got {c!r}", clause="c>0")
    if not x > 0:
        raise DomainError(f"upper limit must be > 0, got {x!r}")
    kappa = c * K
    if kappa > 0 and x > math.pi / math.sqrt(kappa) * (1 + 1e-15):
        raise DomainError(
            f"upper limit {x!r} exceeds pi/sqrt(cK) = {math.pi / math.sqrt(kappa)!r}",
            clause="R/a<=pi/sqrt(cK)",
        )
    p = 1.0 / c
    if kappa == 0:
        return math.log(c / (c + 1.0)) + (p + 1.0) * math.log(x)
    return _log_sn_power_integral(kappa, p, x)


@lru_cache(maxsize=4096)
def _log_sn_power_integral(kappa, p, x):
    # Threshold formulas reuse the same few integrals, hence the cache.
    # Scale by the integrand's maximum on [0, x].
    peak = min(x, 0.5 * math.pi / math.sqrt(kappa)) if kappa > 0 else x
    shift = p * _log_sn(kappa, peak)
    scaled, _ = adaptive_simpson_sn_power(kappa, p, x, shift=shift)
    return math.log(scaled) + shift


def log_v_quadrature(c, K, a, R):
    """log v_{cK,a}(R)."""
    if not a > 0:
        raise DomainError(f"a must be positive, got {a!r}", clause="a>0")
    if not R > 0:
        raise DomainError(f"R must be positive, got {R!r}", clause="R>0")
    return log_v_integral(c, K, R / a)


def sn_ratio(kappa, x, y):
    """sn_kappa(x)/sn_kappa(y) for kappa <= 0, evaluated without overflow."""
    if kappa == 0:
        return x / y
    s = math.sqrt(-kappa)
    return math.exp(_log_sinh(s * x) - _log_sinh(s * y))


def log_sn_ratio(kappa, x, y):
    """log(sn_kappa(x)/sn_kappa(y)) for kappa <= 0."""
    if kappa == 0:
        return math.log(x / y)
    s = math.sqrt(-kappa)
    return _log_sinh(s * x) - _log_sinh(s * y)


def _log_sinh(x):
    if x < SERIES_CUTOFF:
        return math.log(x) + math.log(sinhc(x))
    if x > 20:
        return x - math.log(2.0) + math.log1p(-math.exp(-2.0 * x))
    return math.log(math.sinh(x))


def segment_constant_bound(c, K, a, b, S):
    """Upper bound sn_{cK}(S/a)^{1/c} / sn_{cK}(S/(2b))^{1/c} on the segment constant (K <= 0)."""
    if K > 0:
        raise DomainError("segment constant bound is only available for K <= 0", clause="K<=0")
    if not c > 0:
        raise DomainError(f"c must be positive, got {c!r}", clause="c>0")
    if not (a > 0 and a <= b):
        raise DomainError(f"need 0 < a <= b, got a={a!r}, b={b!r}", clause="0<a<=b")
    if not S > 0:
        raise DomainError(f"S must be positive, got {S!r}", clause="S>0")
    ratio = sn_ratio(c * K, S / a, S / (2.0 * b))
    return ratio ** (1.0 / c)


def sinh_ratio(A, B, s):
    """F(s) = sinh(A s)/sinh(B s) for A > B > 0, s > 0 (strictly increasing in s)."""
    if not (B > 0 and A > B):
        raise DomainError(f"need A > B > 0, got A={A!r}, B={B!r}", clause="A>B>0")
    if not s > 0:
        raise DomainError(f"need s > 0, got {s!r}", clause="s>0")
    if A * s > 20:
        return math.exp(_log_sinh(A * s) - _log_sinh(B * s))
    return A / B * (sinhc(A * s) / sinhc(B * s))
