"""Table of the maximum transition count C(2n, n+1) against 4^n.

    python scripts/transition_count.py --max-spins 19
"""

import argparse
import math

from spinmem.spin import count_transitions


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-spins", type=int, default=19)
    args = ap.parse_args()
    print(f"{'n':>3} {'C(2n,n+1)':>14} {'C/4^n':>8} {'log2(C)/2n':>10} {'C(n)/C(n-1)':>11}")
    prev = None
    for n in range(1, args.max_spins + 1):
        c = count_transitions(n)
        ratio = f"{c / prev:11.4f}" if prev else " " * 11
        print(f"{n:3d} {c:14d} {c / 4**n:8.4f} {math.log2(c) / (2 * n):10.4f} {ratio}")
        prev = c


if __name__ == "__main__":
    main()
