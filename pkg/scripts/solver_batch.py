"""Convergence statistics of the solver on random instances.

    python3 scripts/solver_batch.py --dim 3 --p -1 --count 15 --seed 7
"""
import argparse
import time

import numpy as np

from lpmink.invariants import random_problem
from lpmink.solver import solve


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dim", type=int, default=3)
    ap.add_argument("--p", type=float, default=-1.0)
    ap.add_argument("--count", type=int, default=15)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    print("k  facets  converged  iterations  newton  variational  margin/diam  seconds")
    ok = 0
    for k in range(args.count):
        problem = random_problem(rng, args.dim, args.p)
        t0 = time.perf_counter()
        res = solve(problem)
        dt = time.perf_counter() - t0
        margin = res.h.min() / res.polytope.diameter
        ok += res.converged
        print(f"{k:<3}{len(problem.targets):^8}{str(res.converged):^11}{res.iterations:^12}"
              f"{res.newton_steps:^8}{str(res.variational):^13}{margin:^13.2e}{dt:.2f}")
    print(f"converged {ok}/{args.count}")


if __name__ == "__main__":
    main()
