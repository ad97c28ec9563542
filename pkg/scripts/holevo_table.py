#!/usr/bin/env python3
"""Exact Holevo quantity against the binomial and asymptotic forms."""
import argparse

from qwcrypt.security import binomial_entropy, holevo_asymptotic, holevo_exact


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--m-max", type=int, default=8)
    parser.add_argument("--d", type=int, nargs="+", default=[1, 2, 4, 16, 1024])
    args = parser.parse_args()

    print(f"{'m':>3} {'d':>5} {'chi_exact':>12} {'m - H_bin':>12} {'asymptotic':>12} {'hidden bits':>12}")
    for m in range(1, args.m_max + 1):
        for d in args.d:
            chi = holevo_exact(m, d, check=m <= 5)
            print(f"{m:3d} {d:5d} {chi:12.6f} {m - binomial_entropy(m):12.6f} "
                  f"{holevo_asymptotic(m):12.6f} {m - chi:12.6f}")


if __name__ == "__main__":
    main()
