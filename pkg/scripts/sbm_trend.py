"""Degree-D SBM low-degree bound (k = 2, exact overlap law) across n and D.

Shows where the bound saturates in D (below the threshold) and where it keeps
growing (above it), next to the n -> infinity truncated value.

    python scripts/sbm_trend.py [--d 5]
"""
import argparse

import numpy as np

from thresholds import lowdeg


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--d", type=float, default=5.0)
    ap.add_argument("--a", type=float, nargs="*", default=[0.5, 0.8, 0.9, 1.1, 1.3, 2.0])
    ap.add_argument("--n", type=int, nargs="*", default=[200, 400, 800, 1600])
    ap.add_argument("--D", type=int, nargs="*", default=[4, 8, 16, 32])
    args = ap.parse_args()
    print("d_eta2,D,limit," + ",".join(f"n={n}" for n in args.n))
    for a in args.a:
        eta = np.sqrt(a / args.d)
        for D in args.D:
            vals = [lowdeg.sbm_ldlr_bound(n, 2, args.d, eta, D).value for n in args.n]
            lim = lowdeg.sbm_gaussian_limit(a, 2, D)
            print(f"{a},{D},{lim:.4g}," + ",".join(f"{v:.4g}" for v in vals))


if __name__ == "__main__":
    main()
