#!/usr/bin/env python3
"""Random-basis guessing attack: Monte Carlo rate against p_av and the bound."""
import argparse

from qwcrypt.security import guess_probability_bound, p_av, random_attack_mc


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--m", type=int, nargs="+", default=[1, 2, 4, 8, 16])
    parser.add_argument("--d", type=int, nargs="+", default=[2, 4, 16, 64])
    parser.add_argument("--trials", type=int, default=200_000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1)
    args = parser.parse_args()

    print(f"{'m':>3} {'d':>4} {'mc_rate':>10} {'se':>9} {'p_av':>10} {'bound':>8}")
    for m in args.m:
        bits = [j % 2 for j in range(m)]
        for d in args.d:
            res = random_attack_mc(m, d, bits, args.trials, seed=args.seed, threads=args.threads)
            print(f"{m:3d} {d:4d} {res.exact_rate:10.5f} {res.exact_se:9.2e} "
                  f"{p_av(m, d):10.5f} {min(1.0, guess_probability_bound(m)):8.4f}")


if __name__ == "__main__":
    main()
