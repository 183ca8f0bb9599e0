"""BLP measure just below the critical field versus bath size."""
import argparse
import math

from xxdarwin.nonmarkov import blp_at_critical


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--N", type=int, nargs="+", default=[4, 6, 8, 10, 12, 14, 16, 20, 30, 40, 60, 100, 200])
    args = p.parse_args()
    for N, value in blp_at_critical(args.N):
        print(f"{N:4d} {value:.6f}")
    print(f"large-N limit 2 exp(-3/2) = {2 * math.exp(-1.5):.6f}")


if __name__ == "__main__":
    main()
