"""BLP non-Markovianity versus transverse field."""
import argparse

import numpy as np

from xxdarwin.nonmarkov import blp_vs_field


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--N", type=int, default=12)
    p.add_argument("--points", type=int, default=31)
    args = p.parse_args()
    for h, n, value in blp_vs_field(args.N, np.linspace(0, 1.5, args.points)):
        print(f"{h:.3f} {n:2d} {value:.6f}")


if __name__ == "__main__":
    main()
