"""Residual bounds of the segment-vanishing example across beta and n.

Prints inf, sup, their ratio and the smallest Hessian eigenvalue; beta past
the convexity threshold shows up as convex=False.
"""
import argparse

from lpmink.closed_forms import Example32Params, ex32_verify


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=float, default=0.5)
    ap.add_argument("--grid", type=int, default=200)
    args = ap.parse_args()
    print(" n   beta    thresh    inf        sup        ratio     convex  min_eig")
    for n in (3, 4, 5):
        if not args.p > 3 - n:
            continue
        for beta in (0.01, 0.05, 0.1, 0.2, 0.5):
            params = Example32Params(n, args.p, beta)
            ver = ex32_verify(params, grid=(args.grid, args.grid))
            print(f"{n:>2}  {beta:5.2f}  {params.beta_threshold:8.4f}  {ver.c1:9.3e}  "
                  f"{ver.c2:9.3e}  {ver.c2 / ver.c1:8.3f}  {str(ver.convex):6}  "
                  f"{ver.min_eigenvalue:9.3e}")


if __name__ == "__main__":
    main()
