#!/usr/bin/env python3
"""Smallest |q - 1| in the Q spectrum of the symmetric bisection, two ways.

Compares the double-precision library result with a 60-digit mpmath
evaluation of Q = V^{-1/2} P V^{1/2} P for a nearest-neighbour ring.

    python3 scripts/q_gap_high_precision.py [--n 20] [--alpha 0.5 5 20]
"""

import argparse

import mpmath as mp
import numpy as np

from harmchain import ChainSpec, build_potential, q_spectrum


def q_spectrum_mp(n, alpha, dps=60):
    mp.mp.dps = dps
    a = mp.mpf(alpha)
    row = [mp.mpf(0)] * n
    row[0], row[1], row[-1] = 1 + 2 * a, -a, -a
    v = mp.matrix([[row[(j - i) % n] for j in range(n)] for i in range(n)])
    w, u = mp.eigsy(v)
    root = u * mp.diag([mp.sqrt(x) for x in w]) * u.T
    inv_root = u * mp.diag([1 / mp.sqrt(x) for x in w]) * u.T
    p = mp.diag([1 if i < n // 2 else -1 for i in range(n)])
    return sorted((mp.re(x) for x in mp.eig(inv_root * p * root * p)[0]))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=20)
    ap.add_argument("--alpha", type=float, nargs="+", default=[0.5, 5.0, 20.0])
    args = ap.parse_args()
    print("alpha,min_gap_mp,min_gap_double,above_one_mp,above_one_double")
    for a in args.alpha:
        ref = q_spectrum_mp(args.n, a)
        gap_mp = min(abs(x - 1) for x in ref)
        q = q_spectrum(build_potential(ChainSpec(args.n, (a,))))
        print(f"{a:g},{mp.nstr(gap_mp, 6)},{np.min(np.abs(q - 1)):.6g},"
              f"{sum(1 for x in ref if x > 1)},{int(np.sum(q > 1))}")


if __name__ == "__main__":
    main()
