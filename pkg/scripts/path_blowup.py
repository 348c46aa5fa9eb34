"""Unbounded e(M, S) on paths with S = endpoints, while e^1 stays at 2."""
import argparse

from lipext.metric import equilateral, path_metric
from lipext.moduli import e_up_n, modulus_for_subset


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-m", type=int, default=8)
    args = ap.parse_args()
    two = equilateral(2)
    print("m  e(ends)  e^1")
    for m in range(2, args.max_m + 1):
        M = path_metric(m)
        print(f"{m:<2} {modulus_for_subset(M, [0, m], two).value:<8g} {e_up_n(M, 1, two).value:g}")


if __name__ == "__main__":
    main()
