"""Mutual-information profiles at d*t = pi/4, one per ground sector of the bath."""
import argparse

import numpy as np

from xxdarwin.darwinism import mi_profile, plateau_report
from xxdarwin.dynamics import EvolutionSpec, evolve_branches, global_state
from xxdarwin.xxmodel import representative_fields, sector_ground


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--N", type=int, default=14)
    args = p.parse_args()
    t = np.pi / 4
    for h, n in representative_fields(args.N):
        G = sector_ground(args.N, h, n).vector
        prof = mi_profile(global_state(evolve_branches(G, EvolutionSpec(args.N, 1.0, 0.0, h), t)), time=t)
        rep = plateau_report(prof)
        delta = f"{rep.delta:.4f}" if rep.defined else "undefined"
        print(f"h={h:.4f} n={n} H_S={prof.H_S:.4f} delta={delta}")
        print("  I/H_S:", " ".join(f"{r:.3f}" for r in prof.ratio))


if __name__ == "__main__":
    main()
