#!/usr/bin/env python3
"""Write the log average-overlap surface over (photon number, Hamming distance)."""
import argparse
import csv
import sys

import numpy as np

from qwcrypt.security import overlap_grid


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--d", type=int, default=1024)
    parser.add_argument("--m-max", type=int, default=30)
    parser.add_argument("--log2", action="store_true")
    args = parser.parse_args()

    rows = overlap_grid(args.m_max, args.d, log2=args.log2)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["m", "h", "log_overlap"])
    for m, h, v in rows:
        writer.writerow([m, h, format(v, ".12g")])

    for m in range(1, args.m_max + 1):
        vals = [v for mm, _, v in rows if mm == m]
        print(f"# m={m:2d} minimum at h={int(np.argmin(vals))}", file=sys.stderr)


if __name__ == "__main__":
    main()
