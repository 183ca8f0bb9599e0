"""Plateau delta at d*t = pi/4 for H = H_SE + lambda H_B (d = h = 1)."""
import argparse

import numpy as np

from xxdarwin.darwinism import mi_surface, plateau_report
from xxdarwin.dynamics import EvolutionSpec


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--N", type=int, default=12)
    p.add_argument("--lambdas", type=float, nargs="+", default=[0.0, 0.25, 0.5, 1.0])
    p.add_argument("--steps", type=int, default=8, help="time points up to pi/4")
    args = p.parse_args()
    grid = tuple(np.linspace(0, np.pi / 4, args.steps + 1))
    for lam in args.lambdas:
        surface = mi_surface(EvolutionSpec(args.N, 1.0, lam, 1.0, grid), 0)
        deltas = [plateau_report(prof).delta for prof in surface[1:]]
        print(f"lambda={lam:g} delta(t): " + " ".join(f"{d:.4f}" for d in deltas))


if __name__ == "__main__":
    main()
