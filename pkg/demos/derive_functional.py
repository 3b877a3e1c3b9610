"""Derive a near-best coefficient functional for one boundary class.

Builds the exact rational constraint system for the given canonical data
index (cubic reproduction over the octahedral neighborhood of the given
radius), minimizes the l1 norm of the weights with the exact simplex
solver, and prints the resulting stencil: one line per symmetry orbit,
weights as exact fractions.

With ``--sweep`` the script instead reports the optimal norm for every
radius from 1 to the given radius, showing how the norm decays (and which
radii are infeasible).
"""

import argparse
from collections import OrderedDict

from boxqi import geometry, nearbest, stencils


def parse_class(text):
    parts = tuple(int(p) for p in text.split(","))
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("class must be i,j,k")
    return parts


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--class", dest="klass", type=parse_class,
                    default=(0, 0, -1),
                    help="canonical data index i,j,k (default: 0,0,-1)")
    ap.add_argument("--n", type=int, default=4,
                    help="octahedral neighborhood radius (default: 4)")
    ap.add_argument("--sweep", action="store_true",
                    help="print optimal norms for radii 1..n instead")
    args = ap.parse_args(argv)

    grid = geometry.DomainGrid(11, 11, 11, 1.0)

    if args.sweep:
        print(f"class {args.klass}: l1-optimal norm by radius")
        for n in range(1, args.n + 1):
            sol = nearbest.minimize_l1(
                nearbest.constraint_system(args.klass, n, grid))
            if sol.status != "optimal":
                print(f"  n = {n}: {sol.status}")
            else:
                print(f"  n = {n}: {float(sol.norm):10.4f}  "
                      f"(= {sol.norm}, rounds up to "
                      f"{float(stencils.rounded_up(sol.norm)):.4g})")
        return

    system = nearbest.constraint_system(args.klass, args.n, grid)
    sol = nearbest.minimize_l1(system)
    print(f"class {args.klass}, radius n = {args.n}: {sol.status}")
    if sol.status != "optimal":
        return
    print(f"l1 norm = {sol.norm} ~ {float(sol.norm):.6f} "
          f"(rounds up to {float(stencils.rounded_up(sol.norm)):.4g})")
    print(f"{len(system.points)} candidate points in "
          f"{len(system.orbits)} symmetry orbits; nonzero orbits:")
    by_orbit = OrderedDict()
    for orbit in system.orbits:
        rep = min(tuple(int(v) for v in system.points[i]) for i in orbit)
        by_orbit[rep] = (sol.weights[orbit[0]], len(orbit))
    for rep, (w, size) in sorted(by_orbit.items()):
        if w != 0:
            print(f"  {rep!s:>12} x{size:<3} weight {w}")


if __name__ == "__main__":
    main()
