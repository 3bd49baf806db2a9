"""Monte Carlo convergence of the segment-inequality left side against the grid oracle.

    python scripts/mc_convergence.py --model torus --max-exp 6
"""

import argparse
import math
from dataclasses import dataclass

import numpy as np

from epsmyers.epsrange import EpsParams
from epsmyers.manifold import BallSpec, FlatTorus, RoundSphere, WeightedModel
from epsmyers.verify import oracle_segment_lhs, verify_segment_inequality


@dataclass
class ConvergenceConfig:
    model: str = "torus"
    min_exp: int = 3
    max_exp: int = 6
    seed: int = 42
    oracle_grid: int = 32


def configuration(name):
    if name == "torus":
        model = WeightedModel(FlatTorus(2, 2 * math.pi))
        A1, A2, W = BallSpec((1.0, 1.0), 0.3), BallSpec((2.0, 1.5), 0.3), BallSpec((1.5, 1.25), 0.9)
        return model, A1, A2, W, lambda x: 1.0 + 0.5 * np.sin(x[..., 0]) ** 2
    model = WeightedModel(RoundSphere(2))
    north = model.base.default_point()
    q = np.array([math.sin(1.0), 0.0, math.cos(1.0)])
    mid = np.array([math.sin(0.5), 0.0, math.cos(0.5)])
    return model, BallSpec(north, 0.2), BallSpec(q, 0.2), BallSpec(mid, 0.75), lambda x: model.base.distance(north, x)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--model", choices=("torus", "sphere"), default="torus")
    parser.add_argument("--max-exp", type=int, default=6)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args(argv)
    cfg = ConvergenceConfig(model=args.model, max_exp=args.max_exp, seed=args.seed)
    model, A1, A2, W, F = configuration(cfg.model)
    p = EpsParams(2, 2, 0.0)
    reference = oracle_segment_lhs(model, A1, A2, F, grid=cfg.oracle_grid)
    print(f"# model={cfg.model} seed={cfg.seed} oracle_grid={cfg.oracle_grid} oracle={reference:.17g}")
    print("samples,lhs,stderr,abs_error,error_over_stderr,rhs")
    for e in range(cfg.min_exp, cfg.max_exp + 1):
        rep = verify_segment_inequality(model, A1, A2, W, F, p, 0.0, samples=10**e, seed=cfg.seed)
        err = abs(rep.lhs - reference)
        print(f"{10**e},{rep.lhs:.17g},{rep.stderr:.6g},{err:.6g},{err / rep.stderr:.3f},{rep.rhs:.17g}")


if __name__ == "__main__":
    main()
