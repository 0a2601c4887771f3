"""Approach of v^(1-p) det D^2 v to its limit at the origin for the radial profile."""
import argparse

import numpy as np

from lpmink.closed_forms import Example42Params, ex42_eval, ex42_limit


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--p", type=float, nargs="+", default=[0.5, 0.0, -0.5])
    args = ap.parse_args()
    zs = 10.0 ** -np.arange(1, 9)
    for p in args.p:
        params = Example42Params(args.n, p)
        m = params.exponent
        exact = params.coefficient * m * (m - 1)
        _, c = ex42_limit(params)
        print(f"p={p}: limit C m (m-1) = {exact:.10f}, extrapolated {c:.10f}, "
              f"correction order z^{args.n - 2 + p:g}")
        prev = None
        for z in zs:
            r = ex42_eval(params, z).residual
            step = "" if prev is None else f"  rel.step {abs(r - prev) / abs(r):.2e}"
            print(f"   z={z:.0e}  residual={r:.10f}  rel.err {abs(r - exact) / exact:.2e}{step}")
            prev = r


if __name__ == "__main__":
    main()
