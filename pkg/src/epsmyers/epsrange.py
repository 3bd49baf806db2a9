"""Parameter domain (n, N, eps) and the closed-form constants built on it.

N is an extended real: finite values in (-inf, 1] or [n, inf), or ``math.inf``.
All formulas use the analytic limits (N - n)/(N - 1) -> 1 and 1/(N - n) -> 0
when N is infinite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError

__all__ = [
    "EpsParams",
    "LambdaWindow",
    "RangeViolation",
    "validate_eps_range",
    "range_bound",
    "c_constant",
    "lambda0",
    "phi_psi",
    "lambda_window",
    "d_tilde_lambda",
    "d_tilde",
    "inv_n_minus_dim",
]


@dataclass(frozen=True)
class RangeViolation:
    """Which clause of the eps(n, N)-range failed, with a readable message."""

    clause: str
    message: str

    def __str__(self):
        return self.message


def _check_dimension_pair(n, N):
    if isinstance(n, bool) or int(n) != n:
        raise DomainError(f"dimension n must be an integer, got {n!r}", clause="n>=2")
    if n < 2:
        raise DomainError(f"dimension n must be >= 2, got {n}", clause="n>=2")
    if math.isnan(N) or N == -math.inf:
        raise DomainError(f"N must be a real number or +inf, got {N!r}", clause="N-domain")
    if 1 < N < n:
        raise DomainError(
            f"N = {N} lies in the forbidden interval (1, n) = (1, {n})",
            clause="N-forbidden-interval",
        )


def validate_eps_range(n, N, eps):
    """Return ``None`` when eps is in the eps(n, N)-range, else a :class:`RangeViolation`.

    The comparison is exact on the binary values of the inputs: the strict
    bound |eps| < sqrt((N-1)/(N-n)) is tested as eps^2 (N-n) < N-1 in
    rational arithmetic, so near-boundary inputs are never rounded in.
    """
    _check_dimension_pair(n, N)
    if math.isnan(eps) or math.isinf(eps):
        return RangeViolation("eps-finite", f"ε must be finite, got {eps!r}")
    if N == 1:
        if eps != 0:
            return RangeViolation("N=1", f"ε must be 0 when N = 1 (got ε = {eps!r})")
        return None
    if N == n:
        return None
    if math.isinf(N):
        if abs(eps) < 1:
            return None
        return RangeViolation("N=inf", f"|ε| must be < 1 when N = inf (got ε = {eps!r})")
    e2 = Fraction(eps) ** 2
    num, den = Fraction(N) - 1, Fraction(N) - n
    # den and num share a sign on both branches, so compare eps^2 |den| < |num|.
    if e2 * abs(den) < abs(num):
        return None
    bound = math.sqrt((N - 1) / (N - n))
    return RangeViolation(
        "N!=1,n",
        f"|ε| must be < sqrt((N-1)/(N-n)) = {bound:.17g} for N = {N!r}, n = {n} (got ε = {eps!r})",
    )


def range_bound(n, N):
    """sqrt((N-1)/(N-n)) with the N = inf limit 1; ``inf`` for N = n."""
    if N == n:
        return math.inf
    if math.isinf(N):
        return 1.0
    return math.sqrt((N - 1) / (N - n))


def inv_n_minus_dim(n, N):
    """1/(N - n), with 0 for N = inf and for N = n (the paper's convention)."""
    if math.isinf(N) or N == n:
        return 0.0
    return 1.0 / (N - n)


@dataclass(frozen=True)
class EpsParams:
    """The triple (n, N, eps); construction validates the eps(n, N)-range."""

    n: int
    N: float
    eps: float

    def __post_init__(self):
        violation = validate_eps_range(self.n, float(self.N), float(self.eps))
        if violation is not None:
            raise DomainError(violation.message, clause=violation.clause)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "N", float(self.N))
        object.__setattr__(self, "eps", float(self.eps))

    @property
    def c(self):
        return c_constant(self)

    @property
    def lambda0(self):
        return lambda0(self)

    @property
    def finite_N(self):
        return not math.isinf(self.N)

    def describe(self):
        return {"n": self.n, "N": self.N, "eps": self.eps}


def _as_params(p):
    if not isinstance(p, EpsParams):
        raise DomainError(f"expected EpsParams, got {type(p).__name__}")
    return p


def c_constant(p):
    """c(n, N, eps) = (1 - eps^2 (N-n)/(N-1)) / (n-1), with c = 1/(n-1) at N = 1."""
    p = _as_params(p)
    n, N, eps = p.n, p.N, p.eps
    if N == 1 or N == n:
        ratio = 0.0
    elif math.isinf(N):
        ratio = 1.0
    else:
        ratio = (N - n) / (N - 1)
    c = (1.0 - eps * eps * ratio) / (n - 1)
    if not c > 0:
        raise DomainError(f"c(n, N, eps) = {c!r} is not positive for {p}", clause="c>0")
    return c


def lambda0(p):
    """Limit parameter: 0 for N in [n, inf], (1 - sqrt((N-1)/(N-n)))/(1 - eps) for N <= 1."""
    p = _as_params(p)
    if p.N >= p.n:
        return 0.0
    return (1.0 - range_bound(p.n, p.N)) / (1.0 - p.eps)


def phi_psi(lam, a, b):
    """(Phi, Psi): the larger and smaller of a^lam, b^lam (both 1 at lam = 0)."""
    if not (a > 0 and a <= b):
        raise DomainError(f"need 0 < a <= b, got a={a!r}, b={b!r}", clause="0<a<=b")
    if lam > 0:
        return b**lam, a**lam
    if lam < 0:
        return a**lam, b**lam
    return 1.0, 1.0


@dataclass(frozen=True)
class LambdaWindow:
    """Closed interval of admissible lambda; infinite endpoints mean unbounded."""

    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise DomainError(f"empty lambda window [{self.lower}, {self.upper}]")

    def __contains__(self, lam):
        return self.lower <= lam <= self.upper

    @property
    def is_everything(self):
        return self.lower == -math.inf and self.upper == math.inf


def lambda_window(p):
    """All lambda with |(1-eps) lam - 1| <= sqrt((N-1)/(N-n)); all reals if N = n or eps = 1."""
    p = _as_params(p)
    if p.N == p.n or p.eps == 1:
        return LambdaWindow(-math.inf, math.inf)
    s = range_bound(p.n, p.N)
    k = 1.0 - p.eps
    lo, hi = (1.0 - s) / k, (1.0 + s) / k
    if k < 0:
        lo, hi = hi, lo
    return LambdaWindow(lo, hi)


def d_tilde_lambda(p, lam, a, b):
    """Diameter inflation factor at a finite lambda.

    For eps != 1 the second summand uses |(1-eps) lam| in the denominator;
    for lam > 0 this coincides with the |1-eps| lam form, and for lam < 0 it
    keeps the value >= 1 so that it remains a valid bound.
    """
    p = _as_params(p)
    window = lambda_window(p)
    if lam not in window:
        raise DomainError(
            f"lambda = {lam!r} outside the admissible window [{window.lower}, {window.upper}]",
            clause="lambda-window",
        )
    Phi, Psi = phi_psi(lam, a, b)
    ratio = Phi / Psi
    if p.eps == 1:
        return math.sqrt((p.N - 1) / (p.n - 1) * ratio)
    if lam == 0:
        raise DomainError("lambda = 0 is not allowed when eps != 1", clause="lambda!=0")
    k = abs((1.0 - p.eps) * lam)
    # (ratio - 1)/k loses digits for tiny k; expm1 keeps it accurate.
    excess = math.expm1(abs(lam) * math.log(b / a)) / k
    return math.sqrt(ratio + 2.0 / math.pi * excess)


def d_tilde(p, a, b):
    """Diameter inflation factor D~(n, N, eps, a, b)."""
    p = _as_params(p)
    if not (a > 0 and a <= b):
        raise DomainError(f"need 0 < a <= b, got a={a!r}, b={b!r}", clause="0<a<=b")
    if p.eps == 1:
        return math.sqrt((p.N - 1) / (p.n - 1))
    log_ratio = math.log(b / a)
    if p.N >= p.n:
        return math.sqrt(1.0 + 2.0 / (abs(1.0 - p.eps) * math.pi) * log_ratio)
    lam0 = lambda0(p)
    ratio = math.exp(lam0 * log_ratio)
    return math.sqrt(ratio + 2.0 / ((1.0 - p.eps) * math.pi * lam0) * math.expm1(lam0 * log_ratio))
