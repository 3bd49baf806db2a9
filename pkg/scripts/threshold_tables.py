"""Tabulate the diameter factor and the four delta thresholds over a parameter grid.

    python scripts/threshold_tables.py --out thresholds.csv
"""

import argparse
import csv
import itertools
import math
import sys
from dataclasses import dataclass

from epsmyers import thresholds as th
from epsmyers.epsrange import EpsParams, d_tilde, range_bound
from epsmyers.errors import EpsMyersError


@dataclass
class TableConfig:
    n: int = 3
    Ns: tuple = (3.0, 5.0, 10.0, math.inf)
    eps_fractions: tuple = (0.0, 0.5, 0.9)
    ratios: tuple = (1.0, 1.5, 2.0, 4.0)
    K: float = -0.5
    H: float = 1.0
    eta_fractions: tuple = (0.1, 0.5, 0.9)
    R_factor: float = 1.5


def rows(cfg):
    for N, u, ratio, v in itertools.product(cfg.Ns, cfg.eps_fractions, cfg.ratios, cfg.eta_fractions):
        bound = range_bound(cfg.n, N)
        eps = u * (1.0 if math.isinf(bound) else bound)
        p = EpsParams(cfg.n, N, eps)
        a, b = 1.0, ratio
        Dt = d_tilde(p, a, b)
        R = cfg.R_factor * math.pi * Dt / math.sqrt(cfg.H)
        eta = v * th.eta_star(cfg.H, R, Dt)
        g = th.GeometryBounds(cfg.K, a, b, cfg.H, R, eta)
        row = {"n": cfg.n, "N": N, "eps": eps, "b_over_a": ratio, "R": R, "eta": eta, "d_tilde": Dt}
        for name, fn in (
            ("delta1", lambda: th.delta1(p, a, b, cfg.H, eta)),
            ("delta2", lambda: th.delta2(p, g)),
            ("delta2_prime", lambda: th.delta2_prime(p, g)),
            ("delta_tilde", lambda: th.delta_fundamental(p, g)),
        ):
            try:
                row[name] = fn().value
            except EpsMyersError as exc:
                row[name] = f"rejected: {getattr(exc, 'clause', None) or exc}"
        yield row


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=3)
    parser.add_argument("--K", type=float, default=-0.5)
    parser.add_argument("--out", default="-")
    args = parser.parse_args(argv)
    cfg = TableConfig(n=args.n, K=args.K)
    cfg.Ns = tuple(N for N in (float(args.n),) + cfg.Ns[1:] if N >= args.n or math.isinf(N))
    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    table = list(rows(cfg))
    writer = csv.DictWriter(out, fieldnames=list(table[0]))
    writer.writeheader()
    for row in table:
        writer.writerow({k: format(v, ".17g") if isinstance(v, float) else v for k, v in row.items()})
    if out is not sys.stdout:
        out.close()


if __name__ == "__main__":
    main()
