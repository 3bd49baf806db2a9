"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from epsmyers import thresholds as th
from epsmyers.comparison import sinh_ratio, v_quadrature
from epsmyers.epsrange import EpsParams, d_tilde, lambda0, lambda_window, range_bound
from epsmyers.errors import DomainError, EpsMyersError, NumericError, PreconditionError
from epsmyers.manifold import (
    BallSpec,
    Euclidean,
    ExpressionWeight,
    FlatTorus,
    Hyperbolic,
    QuadraticWeight,
    RoundSphere,
    WeightedModel,
    check_condition,
    geodesic,
    ric_n_minus_many,
    sample_ball,
)
from epsmyers.verify import (
    oracle_segment_lhs,
    second_variation_terms,
    verify_bishop,
    verify_diameter_theorem,
    verify_segment_inequality,
    verify_volume_comparison,
)

from oracles import delta1_of

S2 = WeightedModel(RoundSphere(2))
NORTH = S2.base.default_point()


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail, elapsed=None, budget=None):
        timing = "" if elapsed is None else f" [{elapsed:.3g} s of {budget} s]"
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} {detail}{timing}")
        assert ok, detail

    return emit


@pytest.fixture(scope="module", autouse=True)
def warm_up():
    # Compile the jitted kernels once so the timed sections measure steady-state cost.
    v_quadrature(0.5, -1.0, 1.0, 1.0)
    th.delta2(EpsParams(2, math.inf, 0.0), th.GeometryBounds(-1.0, 1.0, 1.0, 1.0, 4.0, 0.1))
    rec = geodesic(S2, NORTH, np.array([1.0, 0.0, 0.0]), 1.0)
    verify_bishop(S2, rec, EpsParams(2, 2, 0.0))


# -- random configurations --------------------------------------------------------------


def random_params(rng, n, allow_n=False):
    kind = rng.choice(["N>n", "inf", "N<1"] + (["N=n"] if allow_n else []))
    if kind == "N=n":
        return EpsParams(n, float(n), float(rng.uniform(-1, 1)))
    N = {"N>n": n + rng.uniform(0.5, 20.0), "inf": math.inf, "N<1": rng.uniform(-20.0, 0.5)}[kind]
    return EpsParams(n, float(N), float(rng.uniform(-0.9, 0.9) * range_bound(n, N)))


def random_quadratic(rng, dim, scale=0.3):
    Q = rng.normal(0.0, scale, (dim, dim))
    return QuadraticWeight(0.5 * (Q + Q.T), rng.normal(0.0, scale, dim))


def random_model(rng):
    """A weighted model with a smooth non-constant weight and a start point on it."""
    kind = rng.choice(["euclid", "sphere", "hyper", "torus"])
    n = int(rng.choice([2, 3]))
    if kind == "euclid":
        model = WeightedModel(Euclidean(n), random_quadratic(rng, n))
        start = rng.normal(0.0, 0.5, n)
    elif kind == "sphere":
        model = WeightedModel(RoundSphere(n, float(rng.uniform(0.7, 2.0))), random_quadratic(rng, n + 1))
        start = model.base.default_point()
    elif kind == "hyper":
        c1, c2 = rng.uniform(-0.3, 0.3, 2)
        model = WeightedModel(Hyperbolic(n), ExpressionWeight(f"{c1} * x[1] + {c2} * x[2] ** 2"))
        start = model.base.default_point()
    else:
        c1, c2 = rng.uniform(-0.3, 0.3, 2)
        n = 2
        model = WeightedModel(FlatTorus(2, 2 * math.pi), ExpressionWeight(f"{c1} * np.sin(x[0]) + {c2} * np.cos(x[1])"))
        start = rng.uniform(0.0, 2 * math.pi, 2)
    return model, start


def random_direction(rng, model, start):
    frame = model.base.frame(start)
    u = rng.normal(size=model.n)
    return frame @ (u / np.linalg.norm(u))


# -- criteria -------------------------------------------------------------------------------


def test_criterion_1_myers_recovery(report):
    t0 = time.perf_counter()
    lines = []
    ok = all(d_tilde(EpsParams(n, n, 1.0), 1.0, 1.0) == 1.0 for n in range(2, 8))
    p = EpsParams(2, 2, 1.0)
    for eta in (0.5, 0.1, 0.01):
        rep = verify_diameter_theorem(S2, p, 0.0, 1.0, eta)
        excess, delta = rep.metadata["normalized_excess"], rep.metadata["delta"]
        ok &= rep.passed and 0.0 <= excess <= delta
        ok &= abs(rep.lhs - math.pi) <= 1e-9 and rep.rhs == pytest.approx(math.pi + eta, rel=1e-14)
        lines.append(f"eta={eta}: excess {excess} <= delta1 {delta:.3g}, diam {rep.lhs:.12f} <= {rep.rhs:.6f}")
    elapsed = time.perf_counter() - t0
    report(1, ok and elapsed < 5, "D~(n,n,1,1,1) = 1 for n = 2..7; " + "; ".join(lines), elapsed, 5)


def test_criterion_2_delta1_instance(report):
    p = EpsParams(2, math.inf, 0.0)
    value = th.delta1(p, 1.0, 1.0, 1.0, math.pi).value
    t0 = time.perf_counter()
    for _ in range(100):
        th.delta1(p, 1.0, 1.0, 1.0, math.pi)
    per_call = (time.perf_counter() - t0) / 100
    # With eta = pi the instance reduces to T = 8, c = 1, angle factor 5/9: exactly 5/1536.
    exact = 5.0 / 1536.0
    oracle = delta1_of(2, math.inf, 0.0, 1.0, 1.0, 1.0, math.pi)
    ok = abs(value / exact - 1) <= 1e-7 and abs(value / oracle - 1) <= 1e-7 and round(value, 7) == 3.2552e-3
    report(2, ok and per_call < 1e-3, f"delta1 = {value!r}, 5/1536 = {exact!r}, rounded {round(value, 7)}", per_call, 0.001)


def test_criterion_3_bishop(report):
    t0 = time.perf_counter()
    rec = geodesic(S2, NORTH, np.array([1.0, 0.0, 0.0]), math.pi, step=math.pi / 2048)
    rep = verify_bishop(S2, rec, EpsParams(2, 2, 0.0))
    equality = rep.metadata["max_abs_raw_margin"]
    ok = rep.passed and equality <= 1e-5
    rng = np.random.default_rng(3)
    failures, worst = 0, -math.inf
    for _ in range(50):
        model, start = random_model(rng)
        p = random_params(rng, model.n)
        length = float(rng.uniform(1.0, 3.0))
        rec = geodesic(model, start, random_direction(rng, model, start), length, eps=p.eps)
        rep = verify_bishop(model, rec, p)
        failures += not rep.passed
        worst = max(worst, -rep.margin)
    elapsed = time.perf_counter() - t0
    detail = f"S2 max |margin| = {equality:.3g} <= 1e-5; weighted failures {failures}/50 (largest deficit {worst:.3g})"
    report(3, ok and failures == 0 and elapsed < 10, detail, elapsed, 10)


def _tight_K(model, center, R, p, rng):
    pts = np.concatenate([center[None, :], sample_ball(model, center, R, 2000, rng)])
    ric = ric_n_minus_many(model, pts, p)
    scale = np.exp(4.0 * (p.eps - 1.0) * model.f(pts) / (model.n - 1))
    return min(float(np.min(ric / scale)), 0.0)


def test_criterion_4_volume(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    worst_equality = 0.0
    for n in (2, 3):
        model = WeightedModel(Euclidean(n))
        for _ in range(5):
            R = float(rng.uniform(0.1, 10.0))
            r = float(rng.uniform(0.01, 1.0)) * R
            rep = verify_volume_comparison(model, rng.normal(size=n), r, R, EpsParams(n, n, 0.0), 0.0)
            worst_equality = max(worst_equality, abs(rep.lhs / rep.rhs - 1))
    failures, rejected = 0, 0
    for _ in range(100):
        model, start = random_model(rng)
        p = random_params(rng, model.n)
        R = float(rng.uniform(0.3, 1.5))
        r = float(rng.uniform(0.05, 0.9)) * R
        K = _tight_K(model, start, R, p, rng)
        for shrink in (0.02, 0.1, 0.5, 2.0):
            trial = K - shrink * (1.0 + abs(K))
            if check_condition(model, BallSpec(start, R), p, trial).satisfied:
                break
        else:
            rejected += 1
            continue
        rep = verify_volume_comparison(model, start, r, R, p, trial, tol=1e-6)
        failures += not rep.passed
    elapsed = time.perf_counter() - t0
    ok = worst_equality <= 1e-6 and failures == 0 and rejected == 0
    detail = f"Euclidean max rel. gap {worst_equality:.3g}; weighted failures {failures}/100, unsettled K {rejected}"
    report(4, ok and elapsed < 60, detail, elapsed, 60)


def test_criterion_5_segment(report):
    t0 = time.perf_counter()
    p = EpsParams(2, 2, 0.0)
    torus = WeightedModel(FlatTorus(2, 2 * math.pi))
    q = np.array([math.sin(1.0), 0.0, math.cos(1.0)])
    mid = np.array([math.sin(0.5), 0.0, math.cos(0.5)])
    cases = {
        "torus": (
            torus,
            BallSpec((1.0, 1.0), 0.3),
            BallSpec((2.0, 1.5), 0.3),
            BallSpec((1.5, 1.25), 0.9),
            lambda x: 1.0 + 0.5 * np.sin(x[..., 0]) ** 2,
        ),
        "sphere caps": (
            S2,
            BallSpec(NORTH, 0.2),
            BallSpec(q, 0.2),
            BallSpec(mid, 0.75),
            lambda x: S2.base.distance(NORTH, x),
        ),
    }
    ok, lines = True, []
    for name, (model, A1, A2, W, F) in cases.items():
        rep = verify_segment_inequality(model, A1, A2, W, F, p, 0.0, samples=1_000_000, seed=42)
        oracle = oracle_segment_lhs(model, A1, A2, F, grid=24)
        rel = abs(rep.lhs / oracle - 1)
        sigmas = rep.margin / rep.stderr
        ok &= rep.passed and sigmas >= 3 and rel <= 0.01
        lines.append(f"{name}: LHS {rep.lhs:.6g} <= RHS {rep.rhs:.6g} ({sigmas:.3g} sigma), oracle gap {rel:.2g}")
    elapsed = time.perf_counter() - t0
    report(5, ok and elapsed < 120, "; ".join(lines), elapsed, 120)


def random_threshold_inputs(rng):
    """A valid parameter set for the ball-average thresholds, R beyond pi D~/sqrt(H)."""
    n = int(rng.integers(2, 7))
    p = random_params(rng, n, allow_n=True)
    a = float(rng.uniform(0.5, 2.0))
    b = a * float(rng.uniform(1.0, 4.0))
    K = 0.0 if rng.random() < 0.2 else -float(rng.uniform(1e-3, 1.0))
    H = float(rng.uniform(0.25, 4.0))
    R = math.pi * d_tilde(p, a, b) / math.sqrt(H) * float(rng.uniform(1.01, 3.0))
    return p, K, a, b, H, R


def test_criterion_6_delta2_monotone(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    violations = 0
    for _ in range(100):
        p, K, a, b, H, R = random_threshold_inputs(rng)
        es = th.eta_star(H, R, d_tilde(p, a, b))
        etas = es * np.arange(1, 51) / 51
        values = [th.delta2(p, th.GeometryBounds(K, a, b, H, R, float(e))).value for e in etas]
        violations += int(np.sum(np.diff(values) <= 0))
    elapsed = time.perf_counter() - t0
    report(6, violations == 0 and elapsed < 10, f"{violations} violations over 100 sets x 50 eta values", elapsed, 10)


def test_criterion_7_sinh_ratio(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    violations, smallest = 0, math.inf
    for _ in range(1000):
        B = float(rng.uniform(0.1, 3.0))
        A = B + float(rng.uniform(0.05, 3.0))
        s1, s2 = sorted(10.0 ** rng.uniform(-6, 1.5, 2))
        smallest = min(smallest, s1)
        violations += not sinh_ratio(A, B, s1) < sinh_ratio(A, B, s2)
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and smallest < 1e-5 and elapsed < 1
    report(7, ok, f"{violations} violations over 1000 instances, smallest s = {smallest:.3g}", elapsed, 1)


def test_criterion_8_second_variation(report):
    t0 = time.perf_counter()
    rec = geodesic(S2, NORTH, np.array([1.0, 0.0, 0.0]), math.pi)
    circle, _ = second_variation_terms(S2, rec, EpsParams(2, 2, 1.0), 0.0, 1.0)
    ok = abs(circle.direct) <= 1e-6 and abs(circle.f4_bound) <= 1e-6
    rng = np.random.default_rng(8)
    failures = 0
    for _ in range(50):
        model, start = random_model(rng)
        p = random_params(rng, model.n)
        window = lambda_window(p)
        lam = lambda0(p) if rng.random() < 0.3 else float(rng.uniform(window.lower, window.upper))
        if p.eps != 1 and lam == 0:
            lam = window.upper
        rec = geodesic(model, start, random_direction(rng, model, start), float(rng.uniform(0.5, 3.0)), eps=p.eps)
        terms, rep = second_variation_terms(model, rec, p, lam, float(rng.uniform(0.2, 2.0)))
        failures += not (rep.passed and terms.direct <= terms.f4_bound + rep.tolerance)
    elapsed = time.perf_counter() - t0
    detail = f"half great circle: direct {circle.direct:.2g}, bound {circle.f4_bound:.2g}; sampled failures {failures}/50"
    report(8, ok and failures == 0 and elapsed < 30, detail, elapsed, 30)


def _rejection_named(exc):
    if isinstance(exc, DomainError):
        return bool(exc.clause)
    if isinstance(exc, NumericError):
        return bool((exc.diagnostics or {}).get("clause"))
    return False


def _below_double_range(exc):
    # A value below the smallest double is still positive: its log travels with the error.
    if not isinstance(exc, NumericError) or exc.diagnostics.get("clause") != "float-range":
        return False
    return math.isfinite(exc.diagnostics.get("log_value", math.nan))


def test_criterion_9_threshold_positivity(report):
    rng = np.random.default_rng(9)
    inputs = []
    for _ in range(10_000):
        p, K, a, b, H, R = random_threshold_inputs(rng)
        es = th.eta_star(H, R, d_tilde(p, a, b))
        eta = float(min(es * rng.uniform(0.01, 0.99), rng.uniform(1e-3, 3.0)))
        small_R = float(rng.uniform(0.1, 1.0)) * R
        inputs.append((p, th.GeometryBounds(K, a, b, H, R, eta), th.GeometryBounds(K, a, b, H, small_R, eta)))
    families = {
        "delta1": lambda p, g, gs: th.delta1(p, g.a, g.b, g.H, g.eta),
        "delta2": lambda p, g, gs: th.delta2(p, g),
        "delta2_prime": lambda p, g, gs: th.delta2_prime(p, gs),
        "delta_tilde": lambda p, g, gs: th.delta_fundamental(p, g if rng.random() < 0.5 else gs),
    }
    t0 = time.perf_counter()
    counts = {}
    bad = 0
    for name, fn in families.items():
        positive, tiny, rejected = 0, 0, 0
        for p, g, gs in inputs:
            try:
                value = fn(p, g, gs).value
            except EpsMyersError as exc:
                if _below_double_range(exc):
                    tiny += 1
                else:
                    rejected += 1
                bad += not _rejection_named(exc)
                continue
            positive += value > 0 and math.isfinite(value)
            bad += not (value > 0 and math.isfinite(value))
        counts[name] = (positive, tiny, rejected)
    elapsed = time.perf_counter() - t0
    # Rejections of out-of-hypothesis inputs must also name their clause.
    probes = [
        lambda: th.delta2(EpsParams(2, math.inf, 0.0), th.GeometryBounds(0.0, 1.0, 1.0, 1.0, 1.0, 0.1)),
        lambda: th.delta2(EpsParams(2, math.inf, 0.0), th.GeometryBounds(0.0, 1.0, 1.0, 1.0, 4.0, 3.0)),
        lambda: th.GeometryBounds(0.5, 1.0, 1.0, 1.0, 4.0, 0.1),
        lambda: th.delta1(EpsParams(2, math.inf, 0.0), 2.0, 1.0, 1.0, 0.1),
        lambda: th.delta1(EpsParams(2, 1.0, 0.1), 1.0, 1.0, 1.0, 0.1),
    ]
    unnamed = 0
    for probe in probes:
        try:
            probe()
            unnamed += 1
        except (DomainError, PreconditionError) as exc:
            unnamed += not _rejection_named(exc)
    ok = bad == 0 and unnamed == 0 and all(pos + tiny == len(inputs) for pos, tiny, _ in counts.values())
    detail = ", ".join(
        f"{k}: {pos} positive + {tiny} positive below double range, {rej} rejected"
        for k, (pos, tiny, rej) in counts.items()
    )
    report(9, ok and elapsed < 10, f"{detail}; unnamed rejections {bad + unnamed}", elapsed, 10)
