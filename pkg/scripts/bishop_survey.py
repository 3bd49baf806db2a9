"""Survey the Bishop-type margin over random weighted models and geodesics.

    python scripts/bishop_survey.py --count 200 --seed 0
"""

import argparse
import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from epsmyers.epsrange import EpsParams, range_bound
from epsmyers.manifold import (
    Euclidean,
    ExpressionWeight,
    FlatTorus,
    Hyperbolic,
    QuadraticWeight,
    RoundSphere,
    WeightedModel,
    geodesic,
)
from epsmyers.verify import verify_bishop


@dataclass
class SurveyConfig:
    count: int = 200
    seed: int = 0
    weight_scale: float = 0.3
    steps: int = 2048


def random_case(rng, cfg):
    kind = str(rng.choice(["euclidean", "sphere", "hyperbolic", "torus"]))
    n = int(rng.choice([2, 3]))
    s = cfg.weight_scale
    if kind == "euclidean":
        Q = rng.normal(0.0, s, (n, n))
        model = WeightedModel(Euclidean(n), QuadraticWeight(0.5 * (Q + Q.T), rng.normal(0.0, s, n)))
        start = rng.normal(0.0, 0.5, n)
    elif kind == "sphere":
        Q = rng.normal(0.0, s, (n + 1, n + 1))
        model = WeightedModel(RoundSphere(n), QuadraticWeight(0.5 * (Q + Q.T), rng.normal(0.0, s, n + 1)))
        start = model.base.default_point()
    elif kind == "hyperbolic":
        c1, c2 = rng.uniform(-s, s, 2)
        model = WeightedModel(Hyperbolic(n), ExpressionWeight(f"{c1} * x[1] + {c2} * x[2] ** 2"))
        start = model.base.default_point()
    else:
        c1, c2 = rng.uniform(-s, s, 2)
        model = WeightedModel(FlatTorus(2, 2 * math.pi), ExpressionWeight(f"{c1} * np.sin(x[0]) + {c2} * np.cos(x[1])"))
        start = rng.uniform(0.0, 2 * math.pi, 2)
    n = model.n
    N = float(rng.choice([n + rng.uniform(0.5, 20.0), math.inf, rng.uniform(-20.0, 0.5)]))
    p = EpsParams(n, N, float(rng.uniform(-0.9, 0.9) * range_bound(n, N)))
    u = rng.normal(size=n)
    direction = model.base.frame(start) @ (u / np.linalg.norm(u))
    return kind, model, start, direction, p


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--count", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    cfg = SurveyConfig(count=args.count, seed=args.seed)
    rng = np.random.default_rng(cfg.seed)
    stats = defaultdict(list)
    for _ in range(cfg.count):
        kind, model, start, direction, p = random_case(rng, cfg)
        length = float(rng.uniform(1.0, 3.0))
        rec = geodesic(model, start, direction, length, step=length / cfg.steps, eps=p.eps)
        rep = verify_bishop(model, rec, p)
        stats[kind].append((rep.passed, rep.metadata.get("raw_min_margin", math.inf), rep.metadata.get("budget_max", 0.0)))
    print("model,cases,passed,min_raw_margin,max_budget")
    for kind, vals in sorted(stats.items()):
        passed = sum(v[0] for v in vals)
        print(f"{kind},{len(vals)},{passed},{min(v[1] for v in vals):.3g},{max(v[2] for v in vals):.3g}")


if __name__ == "__main__":
    main()
