"""Brute-force SK(W) means at small n, used to freeze the finite-n window at n = 18.

    python scripts/sk_finite_size.py [--draws 2000] [--seed 999]
"""
import argparse

import numpy as np

from thresholds import models, skcert
from thresholds.rng import split


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--draws", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=999)
    ap.add_argument("--n", type=int, nargs="*", default=[10, 12, 14, 16, 18, 20])
    args = ap.parse_args()
    print("n,mean,sd,stderr_30,parisi_gap")
    for n in args.n:
        v = np.array([skcert.sk_bruteforce(models.sample_goe(n, "normalized", g)).value
                      for g in split(args.seed, args.draws)])
        sd = v.std(ddof=1)
        print(f"{n},{v.mean():.4f},{sd:.4f},{sd / np.sqrt(30):.4f},{skcert.PARISI_CONSTANT - v.mean():.4f}")


if __name__ == "__main__":
    main()
