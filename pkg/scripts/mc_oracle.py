"""Monte-Carlo subgradient sampling against exact Monge-Ampere atoms.

Random PL functions are tangent-plane minorants of random convex
quadratics on [-1, 1]^2.
"""
import argparse
import sys
from pathlib import Path

import numpy as np

from lpmink.monge_ampere import PLConvexFunction

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
from oracles import monte_carlo_subgradient_mass  # noqa: E402

SQUARE = [[-1, -1], [1, -1], [1, 1], [-1, 1]]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--functions", type=int, default=20)
    ap.add_argument("--draws", type=int, default=10 ** 6)
    ap.add_argument("--seed", type=int, default=6)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    done = 0
    while done < args.functions:
        k = int(rng.integers(4, 13))
        X = rng.uniform(-0.9, 0.9, (k, 2))
        L = rng.normal(size=(2, 2))
        Q = L @ L.T + 0.5 * np.eye(2)
        v = PLConvexFunction(SQUARE, X @ Q, -0.5 * np.einsum("ij,jk,ik->i", X, Q, X))
        pts, masses = v.atoms
        if not len(pts):
            continue
        mc = monte_carlo_subgradient_mass(v.gradients, v.offsets, pts, draws=args.draws, seed=done)
        err = np.abs(mc - masses).max() / masses.sum()
        print(f"pieces={k:2d} atoms={len(pts):2d} mass={masses.sum():.4f} "
              f"worst atom error / total = {err:.2e}")
        done += 1


if __name__ == "__main__":
    main()
