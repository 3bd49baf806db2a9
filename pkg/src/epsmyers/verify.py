"""Numerical checks of the comparison inequalities and the diameter theorems.

Every check returns a :class:`VerificationReport`. A report passes iff
margin >= -tolerance, where stochastic reports also subtract 3 standard errors.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson
from scipy.special import roots_legendre

from .comparison import segment_constant_bound, v_quadrature
from .epsrange import EpsParams, inv_n_minus_dim, lambda_window, phi_psi
from .errors import DomainError, PreconditionError, UnsupportedError
from .manifold import (
    RIC_N_MINUS_LABEL,
    BallSpec,
    FlatTorus,
    RoundSphere,
    WarpedProduct,
    ball_integral,
    ball_measure,
    bishop_profile,
    check_condition,
    curvature_excess,
    global_excess,
    ric_n_minus_many,
    sample_ball,
    weight_floor,
)
from .thresholds import GeometryBounds, delta1, delta_complete, diameter_bound

__all__ = [
    "VerificationReport",
    "SegmentSample",
    "SecondVariationTerms",
    "ConstantFunction",
    "verify_bishop",
    "verify_volume_comparison",
    "verify_segment_inequality",
    "oracle_segment_lhs",
    "segment_samples",
    "second_variation_terms",
    "verify_diameter_theorem",
    "VERDICTS",
]

VERDICTS = ("pass", "fail", "hypothesis_not_met")
SIMPSON_INTERVALS = 256
CHUNK = 4096


@dataclass(frozen=True)
class VerificationReport:
    check: str
    lhs: float
    rhs: float
    margin: float
    tolerance: float
    verdict: str
    metadata: dict = field(default_factory=dict)
    seed: int | None = None
    stderr: float | None = None

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")

    @property
    def passed(self):
        return self.verdict == "pass"

    def as_dict(self):
        out = {
            "check": self.check,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "pass": self.passed,
        }
        if self.seed is not None:
            out["seed"] = self.seed
        if self.stderr is not None:
            out["stderr"] = self.stderr
        out["metadata"] = self.metadata
        return out


def _decide(margin, tolerance, stderr=None):
    slack = tolerance + (3.0 * stderr if stderr is not None else 0.0)
    return "pass" if margin >= -slack else "fail"


def _report(check, lhs, rhs, tolerance, metadata=None, margin=None, seed=None, stderr=None):
    if margin is None:
        margin = rhs - lhs
    return VerificationReport(
        check=check,
        lhs=float(lhs),
        rhs=float(rhs),
        margin=float(margin),
        tolerance=float(tolerance),
        verdict=_decide(margin, tolerance, stderr),
        metadata=metadata or {},
        seed=seed,
        stderr=None if stderr is None else float(stderr),
    )


# -- Bishop-type inequality ---------------------------------------------------------


def _second_differences(h1, step, stride):
    m = len(h1) - 1
    j = np.arange(stride, m - stride + 1)
    return j, (h1[j + stride] - 2.0 * h1[j] + h1[j - stride]) / (stride * step) ** 2


def verify_bishop(model, rec, p, tol=1e-9):
    """h1'' <= -c h1 Ric_N((gamma o phi^{-1})') at every interior tau grid point.

    The pointwise discretization budget is |D_h - D_2h|, the Richardson estimate of
    the error of the fine second difference (three times the leading-order error).
    """
    prof = bishop_profile(model, rec, p)
    h1, step = prof.h1, prof.step
    m = len(h1) - 1
    meta = {
        "step_tau": step,
        "grid_points": m + 1,
        "c": prof.c,
        "truncated": prof.truncated,
        "truncated_at": prof.truncated_at,
        "ric_label": "Ric_N along the reparametrized geodesic",
    }
    if model.ric_n_infinite(p):
        meta["note"] = "Ric_N = -inf (N = n with non-constant f); the inequality holds trivially"
        return _report("bishop", 0.0, math.inf, tol, meta, margin=math.inf)
    j1, d1 = _second_differences(h1, step, 1)
    rhs = -prof.c * h1[j1] * prof.ric_n[j1]
    raw = rhs - d1
    budget = np.zeros_like(raw)
    j2, d2 = _second_differences(h1, step, 2)
    if len(j2):
        est = np.abs(d1[j2 - 1] - d2)
        budget[j2 - 1] = est
        budget[: j2[0] - 1] = est[0]
        budget[j2[-1] :] = est[-1]
    j4, d4 = _second_differences(h1, step, 4)
    if len(j4):
        e1 = np.abs(d1[j4 - 1] - d2[j4 - 2])
        e2 = np.abs(d2[j4 - 2] - d4)
        sel = e1 > 1e-300
        ratio = np.median(e2[sel] / e1[sel]) if np.any(sel) else float("nan")
        meta["observed_order"] = float(np.log2(ratio)) if ratio > 0 else float("nan")
    worst = int(np.argmin(raw + budget))
    meta.update(
        {
            "raw_min_margin": float(raw.min()),
            "max_abs_raw_margin": float(np.abs(raw).max()),
            "budget_max": float(budget.max()),
            "budget_C": float(budget.max() / step**2),
            "worst_tau": float(prof.tau[j1[worst]]),
        }
    )
    return _report(
        "bishop", float(d1[worst]), float(rhs[worst]), tol, meta, margin=float(raw[worst] + budget[worst])
    )


# -- volume comparison ----------------------------------------------------------------


def verify_volume_comparison(model, center, r, R, p, K, tol=1e-6, directions=None):
    """mu_f(B(R))/mu_f(B(r)) <= (b/a) v_{cK,a}(R)/v_{cK,b}(r) with (a, b) from the condition check."""
    if not (0 < r <= R):
        raise DomainError(f"need 0 < r <= R, got r={r!r}, R={R!r}", clause="0<r<=R")
    center = np.asarray(center, dtype=float)
    cond = check_condition(model, BallSpec(center, R), p, K, directions)
    if not cond.satisfied:
        raise PreconditionError(
            f"(N, K, eps, a, b)-condition fails on B(center, {R}) for K = {K}", clause="condition", witness=cond.witness
        )
    a, b = cond.a, cond.b
    c = p.c
    big = ball_measure(model, center, R, rtol=tol)
    small = ball_measure(model, center, r, rtol=tol)
    lhs = big / small
    rhs = b / a * v_quadrature(c, K, a, R) / v_quadrature(c, K, b, r)
    meta = {"a": a, "b": b, "c": c, "K": K, "r": r, "R": R, "mu_R": big, "mu_r": small, "ric_label": RIC_N_MINUS_LABEL}
    return _report("volume_comparison", lhs, rhs, tol * rhs, meta)


# -- segment inequality ------------------------------------------------------------------


class ConstantFunction:
    """F identically equal to ``value``; line integrals reduce to value * length."""

    def __init__(self, value=1.0):
        if value < 0:
            raise DomainError("F must be non-negative")
        self.value = float(value)

    def __call__(self, pts):
        return np.full(np.shape(pts)[:-1], self.value)


@dataclass(frozen=True)
class SegmentSample:
    y1: np.ndarray
    y2: np.ndarray
    distance: np.ndarray
    E: np.ndarray
    E1: np.ndarray  # second half of the segment
    E2: np.ndarray  # first half


def _line_integrals(model, y1, y2, F, intervals=SIMPSON_INTERVALS):
    """(d, E, E1, E2) by composite Simpson on each half of every segment."""
    base = model.base
    v, d = base.log_direction(y1, y2)
    if isinstance(F, ConstantFunction):
        half = 0.5 * F.value * d
        return d, 2.0 * half, half, half
    m = intervals // 2
    u = np.linspace(0.0, 1.0, intervals + 1)
    w = np.ones(m + 1)
    w[1:-1:2], w[2:-1:2] = 4.0, 2.0
    w /= 3.0 * m
    s = d[:, None] * u[None, :]
    pos, _, _ = base.geodesic(y1[:, None, :], v[:, None, :], s)
    vals = F(pos)
    E2 = 0.5 * d * (vals[:, : m + 1] @ w)
    E1 = 0.5 * d * (vals[:, m:] @ w)
    return d, E1 + E2, E1, E2


def segment_samples(model, y1, y2, F, intervals=SIMPSON_INTERVALS):
    d, E, E1, E2 = _line_integrals(model, np.asarray(y1, float), np.asarray(y2, float), F, intervals)
    return SegmentSample(np.asarray(y1), np.asarray(y2), d, E, E1, E2)


def _check_segment_geometry(model, A1, A2, W):
    base = model.base
    if isinstance(base, WarpedProduct):
        raise UnsupportedError("segment checks need a base with closed-form geodesics between arbitrary points")
    cW = W.point
    for name, A in (("A1", A1), ("A2", A2)):
        reach = float(base.distance(cW, A.point)) + A.radius
        if reach > W.radius:
            raise PreconditionError(
                f"{name} is not contained in W (reaches {reach:.6g} > {W.radius:.6g})", clause="W-contains-A"
            )
    conv = base.convexity_radius()
    if not W.radius < conv:
        raise PreconditionError(
            f"W radius {W.radius} is not below the convexity radius {conv}; minimal geodesics may leave W",
            clause="W-convex",
        )


def _chunk_stats(model, A1, A2, F, count, seq, floors):
    rng = np.random.default_rng(seq)
    y1 = sample_ball(model, A1.point, A1.radius, count, rng, floors[0])
    y2 = sample_ball(model, A2.point, A2.radius, count, rng, floors[1])
    _, E, _, _ = _line_integrals(model, y1, y2, F)
    return float(E.sum()), float(np.dot(E, E))


def verify_segment_inequality(model, A1, A2, W, F, p, K, samples=100_000, seed=0, tol=1e-9, workers=1, directions=None):
    """Monte Carlo LHS of the segment inequality against its Lemma-bounded RHS.

    Samples are drawn in fixed chunks of 4096 pairs, each chunk with its own child of
    SeedSequence(seed), and reduced in chunk order: results do not depend on ``workers``.
    """
    if K > 0:
        raise DomainError("the segment constant bound needs K <= 0", clause="K<=0")
    if samples < 2:
        raise DomainError("need at least 2 samples")
    _check_segment_geometry(model, A1, A2, W)
    cond = check_condition(model, W, p, K, directions)
    if not cond.satisfied:
        raise PreconditionError(f"(N, K, eps, a, b)-condition fails on W for K = {K}", clause="condition", witness=cond.witness)
    a, b = cond.a, cond.b
    base = model.base
    mu1 = ball_measure(model, A1.point, A1.radius)
    mu2 = ball_measure(model, A2.point, A2.radius)
    S = float(base.distance(A1.point, A2.point)) + A1.radius + A2.radius
    C = segment_constant_bound(p.c, K, a, b, S)
    F_W = ball_integral(model, W.point, W.radius, F, rtol=1e-5)
    rhs = C * (mu2 * 2.0 * A1.radius + mu1 * 2.0 * A2.radius) * F_W

    floors = (weight_floor(model, A1.point, A1.radius), weight_floor(model, A2.point, A2.radius))
    n_chunks = -(-samples // CHUNK)
    sizes = [CHUNK] * (n_chunks - 1) + [samples - CHUNK * (n_chunks - 1)]
    seqs = np.random.SeedSequence(seed).spawn(n_chunks)
    jobs = list(zip(sizes, seqs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            stats = list(pool.map(lambda job: _chunk_stats(model, A1, A2, F, job[0], job[1], floors), jobs))
    else:
        stats = [_chunk_stats(model, A1, A2, F, size, seq, floors) for size, seq in jobs]
    total = 0.0
    total_sq = 0.0
    for s1, s2 in stats:
        total += s1
        total_sq += s2
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0) * samples / (samples - 1)
    lhs = mu1 * mu2 * mean
    stderr = mu1 * mu2 * math.sqrt(var / samples)
    meta = {
        "samples": samples,
        "chunk": CHUNK,
        "simpson_intervals": SIMPSON_INTERVALS,
        "a": a,
        "b": b,
        "S": S,
        "C_bound": C,
        "mu_A1": mu1,
        "mu_A2": mu2,
        "diam_A1_bound": 2.0 * A1.radius,
        "diam_A2_bound": 2.0 * A2.radius,
        "int_W_F": F_W,
        "workers": workers,
    }
    return _report("segment", lhs, rhs, tol, meta, seed=seed, stderr=stderr)


def _ball_grid_2d(model, A, grid):
    z, wz = roots_legendre(grid)
    t = 0.5 * A.radius * (z + 1.0)
    wt = 0.5 * A.radius * wz
    ang = 2.0 * math.pi * (np.arange(grid) + 0.5) / grid
    u = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
    frame = model.base.frame(A.point)
    dirs = u @ frame.T
    pos, _, _ = model.base.geodesic(A.point, dirs[None, :, :], t[:, None])
    w = (wt * model.base.jacobian(t))[:, None] * np.full(grid, 2.0 * math.pi / grid)[None, :]
    pos = pos.reshape(-1, pos.shape[-1])
    return pos, w.reshape(-1) * np.exp(-model.f(pos))


def oracle_segment_lhs(model, A1, A2, F, grid=60, line_nodes=32):
    """Tensor-grid value of int_{A1 x A2} E(y1, y2) d(mu_f x mu_f) for n = 2.

    Each ball uses Gauss-Legendre radii x uniform angles; each segment integral uses
    ``line_nodes``-point Gauss-Legendre (exact for constant F).
    """
    if model.n != 2:
        raise UnsupportedError("the grid oracle is only available for n = 2")
    if not (1 <= grid <= 100):
        raise DomainError("grid must lie in [1, 100]", clause="grid<=100")
    if isinstance(model.base, WarpedProduct):
        raise UnsupportedError("the grid oracle needs closed-form geodesics between arbitrary points")
    p1, w1 = _ball_grid_2d(model, A1, grid)
    p2, w2 = _ball_grid_2d(model, A2, grid)
    base = model.base
    if isinstance(F, ConstantFunction):
        total = 0.0
        for i in range(len(p1)):
            d = base.distance(p1[i], p2)
            total += w1[i] * float(np.dot(w2, d))
        return F.value * total
    z, wz = roots_legendre(line_nodes)
    u = 0.5 * (z + 1.0)
    wu = 0.5 * wz
    total = 0.0
    for i in range(len(p1)):
        y1 = np.broadcast_to(p1[i], p2.shape)
        v, d = base.log_direction(y1, p2)
        pos, _, _ = base.geodesic(y1[:, None, :], v[:, None, :], d[:, None] * u[None, :])
        E = d * (F(pos) @ wu)
        total += w1[i] * float(np.dot(w2, E))
    return total


# -- second variation --------------------------------------------------------------------


@dataclass(frozen=True)
class SecondVariationTerms:
    direct: float
    first_term: float  # -(n-1) H int alpha^2
    second_term: float  # (n-1) int alpha'^2
    third_term: float  # int alpha^2 f''
    fourth_term: float  # -(1/(N-n)) int alpha^2 f'^2
    last_term: float  # int alpha^2 ((n-1) H - Ric_N)
    identity_residual: float
    first_bound: float  # -(n-1) H L Psi / 2
    second_bound: float  # (n-1) pi^2 Phi / (2L)
    d1_raw: float
    d1_bound: float
    excess_term: float  # Phi int ((n-1)H - Ric_{N-})_+
    f4_bound: float
    d_tilde_lambda: float
    Phi: float
    Psi: float
    L: float


def _simpson(y, t):
    return float(simpson(y, x=t))


def second_variation_terms(model, rec, p, lam, H, a=None, b=None, tol=1e-8):
    """Index-form value of the variation field alpha E_i and its bound chain.

    alpha(t) = exp((1-eps) lam f/(n-1)) sin(pi t/L). Ric_{N-} along the geodesic is the
    exact smallest eigenvalue of the tangent Ric_N form, so the excess term is rigorous.
    """
    if not H > 0:
        raise DomainError(f"H must be positive, got {H!r}", clause="H>0")
    window = lambda_window(p)
    if lam not in window:
        raise DomainError(
            f"lambda = {lam!r} outside the admissible window [{window.lower}, {window.upper}]", clause="lambda-window"
        )
    if p.eps != 1 and lam == 0:
        raise DomainError("lambda = 0 is not allowed when eps != 1", clause="lambda!=0")
    if model.ric_n_infinite(p):
        raise DomainError(
            "Ric_n is -inf for a non-constant weight; the excess term is not defined", clause="N=n-nonconstant-f"
        )
    n = model.n
    t = rec.t
    L = rec.length
    f, f1, f2 = rec.f, rec.f1, rec.f2
    inv = inv_n_minus_dim(n, p.N)
    s_vals = np.exp(2.0 * (1.0 - p.eps) * f / (n - 1))
    a = float(s_vals.min()) if a is None else a
    b = float(s_vals.max()) if b is None else b
    Phi, Psi = phi_psi(lam, a, b)
    beta = (1.0 - p.eps) * lam / (n - 1)
    E = np.exp(beta * f)
    sn_, cs_ = np.sin(math.pi * t / L), np.cos(math.pi * t / L)
    alpha = E * sn_
    dalpha = beta * f1 * alpha + (math.pi / L) * E * cs_
    ric_n = rec.ric_g + f2 - inv * f1**2
    ric_minus = ric_n_minus_many(model, rec.positions, p, exact=True)

    direct = _simpson((n - 1) * dalpha**2 - alpha**2 * rec.ric_g, t)
    T1 = -(n - 1) * H * _simpson(alpha**2, t)
    T2 = (n - 1) * _simpson(dalpha**2, t)
    T3 = _simpson(alpha**2 * f2, t)
    T4 = -inv * _simpson(alpha**2 * f1**2, t)
    T5 = _simpson(alpha**2 * ((n - 1) * H - ric_n), t)

    B1 = -(n - 1) * H * L * Psi / 2.0
    B2 = (n - 1) * math.pi**2 * Phi / (2.0 * L)
    Q = (n - 1) * beta**2 - 2.0 * beta - inv
    d1_raw = -(math.pi / L) * _simpson(f1 * E**2 * np.sin(2.0 * math.pi * t / L), t) + Q * _simpson(alpha**2 * f1**2, t)
    if p.eps == 1:
        d1_bound = (p.N - n) * math.pi**2 * Phi / (2.0 * L)
        dtl2 = (p.N - 1) / (n - 1) * Phi / Psi
    else:
        d1_bound = (n - 1) * math.pi * (Phi - Psi) / (abs((1.0 - p.eps) * lam) * L)
        dtl2 = Phi / Psi + 2.0 / (abs((1.0 - p.eps) * lam) * math.pi) * (Phi / Psi - 1.0)
    excess = Phi * _simpson(np.maximum((n - 1) * H - ric_minus, 0.0), t)
    f4 = -(n - 1) * H * L * Psi / 2.0 * (1.0 - math.pi**2 / (H * L * L) * dtl2) + excess
    terms = SecondVariationTerms(
        direct=direct,
        first_term=T1,
        second_term=T2,
        third_term=T3,
        fourth_term=T4,
        last_term=T5,
        identity_residual=direct - (T1 + T2 + T3 + T4 + T5),
        first_bound=B1,
        second_bound=B2,
        d1_raw=d1_raw,
        d1_bound=d1_bound,
        excess_term=excess,
        f4_bound=f4,
        d_tilde_lambda=math.sqrt(dtl2),
        Phi=Phi,
        Psi=Psi,
        L=L,
    )
    meta = {k: getattr(terms, k) for k in terms.__dataclass_fields__}
    meta.update({"lambda": lam, "H": H, "a": a, "b": b, "samples": len(t), "ric_label": "exact Ric_{N-} (eigenvalue minimum)"})
    return terms, _report("second_variation", direct, f4, tol, meta)


# -- diameter theorems ------------------------------------------------------------------


def _center_grid(model, R):
    """Deterministic centers with spacing at most R/4 on a compact model."""
    base = model.base
    h = R / 4.0
    if isinstance(base, FlatTorus):
        axes = [np.arange(int(math.ceil(P / h))) * (P / math.ceil(P / h)) for P in base.periods]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, model.n)
    if isinstance(base, RoundSphere) and model.n == 2:
        rho = base.radius
        n_lat = int(math.ceil(math.pi * rho / h))
        pts = []
        for i in range(n_lat + 1):
            th = math.pi * i / n_lat
            ring = 2.0 * math.pi * rho * math.sin(th)
            k = max(1, int(math.ceil(ring / h)))
            for j in range(k):
                ph = 2.0 * math.pi * j / k
                pts.append(rho * np.array([math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)]))
        return np.array(pts)
    raise UnsupportedError("complete-mode center grids are available for flat tori and 2-spheres")


def verify_diameter_theorem(model, p, K, H, eta, mode="compact", R=None, directions=None, tol=1e-9):
    """Run the excess-smallness theorem on a compact model and compare its diameter bound.

    compact: global normalized excess vs delta_1 (K = 0 condition).
    complete: sup over a center grid of the normalized excess on B(x, R) vs the
    complete-manifold threshold (delta_2 or delta_2').
    """
    base = model.base
    if not base.compact:
        raise UnsupportedError(f"diameter verification needs a compact base, got {base.name}")
    cond = check_condition(model, None, p, K, directions)
    meta = {"mode": mode, "K": K, "H": H, "eta": eta, "a": cond.a, "b": cond.b, "ric_label": RIC_N_MINUS_LABEL}
    true_diam = base.diameter()
    if mode == "compact":
        if K != 0:
            raise DomainError("compact mode uses the K = 0 condition", clause="K=0")
    elif mode == "complete":
        if R is None:
            raise DomainError("complete mode needs a radius R", clause="R")
        if K > 0:
            raise DomainError("complete mode needs K <= 0", clause="K<=0")
    else:
        raise DomainError(f"unknown mode {mode!r}")
    if not cond.satisfied:
        meta["witness"] = cond.witness
        meta["reason"] = "(N, K, eps, a, b)-condition not satisfied"
        return VerificationReport("diameter", true_diam, math.nan, math.nan, tol, "hypothesis_not_met", meta)
    bound = diameter_bound(p, cond.a, cond.b, H, eta)
    if mode == "compact":
        threshold = delta1(p, cond.a, cond.b, H, eta)
        _, excess = global_excess(model, p, H, directions=directions)
        meta["excess_domain"] = "M"
    else:
        threshold = delta_complete(p, GeometryBounds(K, cond.a, cond.b, H, R, eta))
        centers = _center_grid(model, R)
        excess = 0.0
        for x in centers:
            _, e = curvature_excess(model, x, R, p, H, directions=directions)
            excess = max(excess, e)
        meta["centers"] = len(centers)
        meta["R"] = R
    meta.update(
        {
            "normalized_excess": excess,
            "delta": threshold.value,
            "delta_branch": threshold.branch,
            "diameter_bound": bound,
            "true_diameter": true_diam,
        }
    )
    if not excess <= threshold.value:
        meta["reason"] = "normalized curvature excess exceeds the threshold"
        return VerificationReport("diameter", true_diam, bound, bound - true_diam, tol, "hypothesis_not_met", meta)
    return _report("diameter", true_diam, bound, tol, meta)
