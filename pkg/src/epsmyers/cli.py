"""Command-line entry point: ``bounds``, ``verify`` and ``sweep``.

Exit codes: 0 success (including "hypothesis not met"), 1 a verification check
failed, 2 domain error, 3 unsupported model feature, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation

import numpy as np

from . import thresholds as th
from .epsrange import EpsParams, c_constant, d_tilde, lambda0
from .errors import DomainError, NumericError, UnsupportedError
from .manifold import BallSpec, FlatTorus, RoundSphere, geodesic, load_model_file
from .verify import (
    ConstantFunction,
    second_variation_terms,
    verify_bishop,
    verify_diameter_theorem,
    verify_segment_inequality,
    verify_volume_comparison,
)

SCHEMA = 1
EXIT_OK, EXIT_FAIL, EXIT_DOMAIN, EXIT_UNSUPPORTED, EXIT_NUMERIC = 0, 1, 2, 3, 4
CSV_COLUMNS = ["quantity", "n", "N", "eps", "K", "a", "b", "H", "R", "eta", "value", "status", "intermediates"]
BOUND_QUANTITIES = ("d_tilde", "diameter_bound", "delta1", "delta2", "delta2_prime", "delta_fundamental")
SUITES = ("bishop", "volume", "segment", "second_variation", "diameter")


# -- parsing and serialization -----------------------------------------------------------


def decimal_number(text):
    """Parse a decimal literal (``inf`` allowed) without locale-dependent float parsing."""
    s = text.strip().lower()
    if s in ("inf", "+inf", "infinity", "+infinity", "∞"):
        return math.inf
    if s in ("-inf", "-infinity"):
        return -math.inf
    try:
        value = Decimal(s)
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not a decimal number: {text!r}") from None
    if value.is_nan():
        raise argparse.ArgumentTypeError("NaN is not accepted")
    return float(value)


def fmt(x):
    """17 significant digits; the text parses back to the same double."""
    if isinstance(x, bool) or x is None:
        return "" if x is None else str(x).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def to_json(obj):
    """JSON text with every float written to 17 significant digits."""
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return format(x, ".17g")
    return json.dumps(str(obj))


@dataclass
class RunConfig:
    subcommand: str
    params: dict
    model: str | None = None
    fmt: str = "csv"
    seed: int | None = None
    samples: int | None = None
    tolerances: dict = field(default_factory=dict)
    defaults: dict = field(default_factory=dict)


def _header_lines(cfg):
    info = {"schema": SCHEMA, "subcommand": cfg.subcommand, "params": cfg.params, "defaults": cfg.defaults}
    if cfg.model:
        info["model"] = cfg.model
    if cfg.seed is not None:
        info["seed"] = cfg.seed
    if cfg.samples is not None:
        info["samples"] = cfg.samples
    if cfg.tolerances:
        info["tolerances"] = cfg.tolerances
    return info


def _write_rows(rows, cfg, out):
    header = _header_lines(cfg)
    if cfg.fmt == "json":
        out.write(to_json(dict({"type": "header"}, **header)) + "\n")
        for row in rows:
            out.write(to_json(dict({"schema": SCHEMA, "type": "row"}, **row)) + "\n")
        return
    for key, value in header.items():
        out.write(f"# {key}: {to_json(value)}\n")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(
            [fmt(row.get(c)) if c not in ("quantity", "status", "intermediates") else row.get(c, "") for c in CSV_COLUMNS[:-1]]
            + [to_json(row.get("intermediates", {}))]
        )
    out.write(buf.getvalue())


# -- bounds and sweep ----------------------------------------------------------------------


def _bound_row(quantity, p, K, a, b, H, R, eta):
    row = {"quantity": quantity, "n": p.n, "N": p.N, "eps": p.eps, "K": K, "a": a, "b": b, "H": H, "R": R, "eta": eta}
    try:
        if quantity == "d_tilde":
            value = d_tilde(p, a, b)
            inter = {"c": c_constant(p), "lambda0": lambda0(p)}
        elif quantity == "diameter_bound":
            value = th.diameter_bound(p, a, b, H, eta)
            inter = {"d_tilde": d_tilde(p, a, b), "c": c_constant(p)}
        else:
            if eta == 0:
                row.update(value=None, status="not_applicable", intermediates={"reason": "eta = 0"})
                return row
            if quantity == "delta1":
                rep = th.delta1(p, a, b, H, eta)
            else:
                if R is None:
                    row.update(value=None, status="not_applicable", intermediates={"reason": "needs --R"})
                    return row
                g = th.GeometryBounds(K, a, b, H, R, eta)
                rep = {"delta2": th.delta2, "delta2_prime": th.delta2_prime, "delta_fundamental": th.delta_fundamental}[
                    quantity
                ](p, g)
            value = rep.value
            inter = dict(rep.intermediates, branch=rep.branch)
    except DomainError as exc:
        if quantity.startswith("delta"):
            row.update(value=None, status="precondition_failed", intermediates={"clause": exc.clause, "message": str(exc)})
            return row
        raise
    row.update(value=value, status="ok", intermediates=inter)
    return row


def cmd_bounds(args, out):
    p = EpsParams(args.n, args.N, args.eps)
    cfg = RunConfig(
        "bounds",
        {"n": p.n, "N": p.N, "eps": p.eps, "K": args.K, "a": args.a, "b": args.b, "H": args.H, "R": args.R, "eta": args.eta},
        fmt=args.format,
        defaults={"T": "4(pi+eta)/eta", "R_prime_slack": th.R_PRIME_SLACK, "quad_rtol": 1e-10},
    )
    _check_common(args)
    quantities = args.quantities or list(BOUND_QUANTITIES)
    rows = [_bound_row(q, p, args.K, args.a, args.b, args.H, args.R, args.eta) for q in quantities]
    _write_rows(rows, cfg, out)
    # A precondition failure is fatal only for explicitly requested quantities.
    if args.quantities and any(r["status"] == "precondition_failed" for r in rows):
        return EXIT_DOMAIN
    return EXIT_OK


def _check_common(args):
    if not (args.a > 0 and args.a <= args.b):
        raise DomainError(f"need 0 < a <= b, got a={args.a}, b={args.b}", clause="0<a<=b")
    if not args.H > 0:
        raise DomainError(f"H must be positive, got {args.H}", clause="H>0")
    if not args.eta >= 0:
        raise DomainError(f"eta must be >= 0, got {args.eta}", clause="eta>=0")
    if args.K > 0:
        raise DomainError(f"K must be <= 0, got {args.K}", clause="K<=0")


def _sweep_values(args, p):
    if args.values:
        return [decimal_number(v) for v in args.values.split(",") if v.strip()]
    if args.linspace:
        lo, hi, count = args.linspace
        return list(np.linspace(decimal_number(lo), decimal_number(hi), int(count)))
    if args.vary == "eta" and args.count:
        if args.R is None:
            raise DomainError("an automatic eta grid needs --R", clause="R")
        es = th.eta_star(args.H, args.R, d_tilde(p, args.a, args.b))
        if not es > 0:
            raise DomainError(f"eta* = {es} is not positive; no admissible eta", clause="R-eta-cond:R")
        return [es * k / (args.count + 1) for k in range(1, args.count + 1)]
    return []


def cmd_sweep(args, out):
    p0 = EpsParams(args.n, args.N, args.eps)
    _check_common(args)
    values = _sweep_values(args, p0)
    if not values:
        raise DomainError("empty sweep grid", clause="grid")
    cfg = RunConfig(
        "sweep",
        {"quantity": args.quantity, "vary": args.vary, "n": p0.n, "N": p0.N, "eps": p0.eps, "K": args.K,
         "a": args.a, "b": args.b, "H": args.H, "R": args.R, "eta": args.eta, "points": len(values)},
        fmt=args.format,
        defaults={"T": "4(pi+eta)/eta", "R_prime_slack": th.R_PRIME_SLACK, "auto_eta_grid": "eta* k/(count+1)"},
    )
    rows = []
    for v in values:
        n, N, eps, a, b, eta = p0.n, p0.N, p0.eps, args.a, args.b, args.eta
        if args.vary == "eta":
            eta = v
        elif args.vary == "ba":
            b = a * v
        elif args.vary == "N":
            N = v
        elif args.vary == "eps":
            eps = v
        rows.append(_bound_row(args.quantity, EpsParams(n, N, eps), args.K, a, b, args.H, args.R, eta))
    _write_rows(rows, cfg, out)
    return EXIT_OK


# -- verify ------------------------------------------------------------------------------


def _default_length(base):
    if isinstance(base, RoundSphere):
        return math.pi * base.radius
    if isinstance(base, FlatTorus):
        return float(base.periods.min()) / 2.0
    return 2.0


def _default_lambda(p):
    if p.eps == 1:
        return 0.0
    return 1.0 / (1.0 - p.eps)


def _run_suite(suite, model, p, args):
    base = model.base
    start = base.default_point()
    direction = base.frame(start)[:, 0]
    length = args.length or _default_length(base)
    if suite == "bishop":
        rec = geodesic(model, start, direction, length, args.step, eps=p.eps)
        return verify_bishop(model, rec, p, args.tol)
    if suite == "volume":
        return verify_volume_comparison(model, start, args.r, args.R_ball, p, args.K, max(args.tol, 1e-6))
    if suite == "second_variation":
        rec = geodesic(model, start, direction, length, args.step, eps=p.eps)
        lam = _default_lambda(p) if args.lam is None else args.lam
        return second_variation_terms(model, rec, p, lam, args.H)[1]
    if suite == "segment":
        sep = args.separation
        far = base.geodesic(start, direction, np.array(sep))[0]
        mid = base.geodesic(start, direction, np.array(0.5 * sep))[0]
        rad = args.radius
        A1, A2 = BallSpec(start, rad), BallSpec(far, rad)
        W = BallSpec(mid, 0.5 * sep + 1.05 * rad)
        if args.F == "one":
            F = ConstantFunction(1.0)
        else:
            F = lambda pts: base.distance(start, pts)
        return verify_segment_inequality(model, A1, A2, W, F, p, args.K, args.samples, args.seed, workers=args.workers)
    if suite == "diameter":
        return verify_diameter_theorem(model, p, args.K, args.H, args.eta, mode=args.mode, R=args.R)
    raise DomainError(f"unknown suite {suite!r}")


def cmd_verify(args, out):
    model = load_model_file(args.model)
    N = model.n if args.N is None else args.N
    p = EpsParams(model.n, N, args.eps)
    suites = SUITES if args.suite == "all" else (args.suite,)
    cfg = RunConfig(
        "verify",
        {"suite": args.suite, "n": p.n, "N": p.N, "eps": p.eps, "K": args.K, "H": args.H, "eta": args.eta},
        model=args.model,
        fmt="json",
        seed=args.seed,
        samples=args.samples,
        tolerances={"tol": args.tol},
        defaults={
            "geodesic_step": "L/2048" if args.step is None else args.step,
            "length": args.length or _default_length(model.base),
            "r": args.r,
            "R_ball": args.R_ball,
            "radius": args.radius,
            "separation": args.separation,
            "simpson_intervals": 256,
            "ball_rtol": 1e-6,
            "workers": args.workers,
        },
    )
    out.write(to_json(dict({"type": "header"}, **_header_lines(cfg))) + "\n")
    code = EXIT_OK
    for suite in suites:
        report = _run_suite(suite, model, p, args)
        record = dict({"schema": SCHEMA, "type": "report", "suite": suite}, **report.as_dict())
        out.write(to_json(record) + "\n")
        if report.verdict == "fail":
            code = EXIT_FAIL
    return code


# -- argument parser ---------------------------------------------------------------------------


def _add_params(sp, need_n=True):
    if need_n:
        sp.add_argument("--n", type=int, required=True)
        sp.add_argument("--N", type=decimal_number, required=True, help="effective dimension; 'inf' allowed")
    sp.add_argument("--eps", type=decimal_number, default=0.0)
    sp.add_argument("--K", type=decimal_number, default=0.0)
    sp.add_argument("--a", type=decimal_number, default=1.0)
    sp.add_argument("--b", type=decimal_number, default=1.0)
    sp.add_argument("--H", type=decimal_number, default=1.0)
    sp.add_argument("--eta", type=decimal_number, default=0.5)
    sp.add_argument("--R", type=decimal_number, default=None, help="ball radius of the local hypotheses")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser():
    parser = argparse.ArgumentParser(prog="epsmyers", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", help="constants and thresholds for one parameter set")
    _add_params(b)
    b.add_argument("--quantities", nargs="+", choices=BOUND_QUANTITIES)

    s = sub.add_parser("sweep", help="one quantity over a parameter grid")
    _add_params(s)
    s.add_argument("--quantity", choices=BOUND_QUANTITIES, required=True)
    s.add_argument("--vary", choices=("eta", "ba", "N", "eps"), required=True)
    s.add_argument("--values", help="comma-separated decimal values")
    s.add_argument("--linspace", nargs=3, metavar=("LO", "HI", "COUNT"))
    s.add_argument("--count", type=int, help="automatic eta grid eta* k/(count+1), k = 1..count")

    v = sub.add_parser("verify", help="run verification suites on a model file")
    v.add_argument("--suite", choices=SUITES + ("all",), required=True)
    v.add_argument("--model", required=True)
    v.add_argument("--N", type=decimal_number, default=None, help="defaults to the model dimension")
    v.add_argument("--eps", type=decimal_number, default=0.0)
    v.add_argument("--K", type=decimal_number, default=0.0)
    v.add_argument("--H", type=decimal_number, default=1.0)
    v.add_argument("--eta", type=decimal_number, default=0.5)
    v.add_argument("--mode", choices=("compact", "complete"), default="compact")
    v.add_argument("--R", type=decimal_number, default=None, help="ball radius for complete mode")
    v.add_argument("--r", type=decimal_number, default=0.5, help="inner radius for the volume check")
    v.add_argument("--R-ball", dest="R_ball", type=decimal_number, default=1.0, help="outer radius for the volume check")
    v.add_argument("--length", type=decimal_number, default=None)
    v.add_argument("--step", type=decimal_number, default=None)
    v.add_argument("--lam", type=decimal_number, default=None)
    v.add_argument("--radius", type=decimal_number, default=0.3, help="segment ball radius")
    v.add_argument("--separation", type=decimal_number, default=0.0, help="distance between segment ball centers")
    v.add_argument("--F", choices=("one", "distance"), default="one")
    v.add_argument("--samples", type=int, default=100_000)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--workers", type=int, default=1)
    v.add_argument("--tol", type=decimal_number, default=1e-9)
    return parser


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    handler = {"bounds": cmd_bounds, "sweep": cmd_sweep, "verify": cmd_verify}[args.command]
    try:
        return handler(args, out)
    except DomainError as exc:
        clause = f" [clause: {exc.clause}]" if getattr(exc, "clause", None) else ""
        err.write(f"error: {exc}{clause}\n")
        return EXIT_DOMAIN
    except UnsupportedError as exc:
        err.write(f"unsupported: {exc}\n")
        return EXIT_UNSUPPORTED
    except NumericError as exc:
        err.write(f"numeric failure: {exc}\n")
        return EXIT_NUMERIC
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        err.write(f"error: cannot load model: {exc}\n")
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
