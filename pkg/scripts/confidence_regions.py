#!/usr/bin/env python3
"""Print a text map of which p_av < eps class each (d, m) cell falls in."""
import argparse

from qwcrypt.security import confidence_regions

SYMBOLS = {None: ".", 0.5: "o", 0.1: "O", 0.01: "#"}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--d-max", type=int, default=64)
    parser.add_argument("--m-max", type=int, default=100)
    parser.add_argument("--m-stride", type=int, default=2)
    args = parser.parse_args()

    eps = [0.5, 0.1, 0.01]
    ms = range(1, args.m_max + 1, args.m_stride)
    cells = confidence_regions(range(1, args.d_max + 1), ms, eps)
    table = {(c.d, c.m): c.epsilon for c in cells}
    print("rows: d, columns: m (stride %d);  . none  o <0.5  O <0.1  # <0.01" % args.m_stride)
    for d in range(1, args.d_max + 1):
        print(f"{d:3d} " + "".join(SYMBOLS[table[d, m]] for m in ms))


if __name__ == "__main__":
    main()
