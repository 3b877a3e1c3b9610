"""Near-best derivation of boundary coefficient functionals.

For a translate index alpha the coefficient functional is a weighted sum of
samples over the projected octahedron Lambda^n_alpha.  Global exactness of
the quasi-interpolant on P_3 forces, for every cubic p,

    lambda_alpha(p) = (p - 5/24 h^2 Lap p + 3/128 h^4 Lap^2 p)(C_alpha),

the coefficient of the differential quasi-interpolant (the Laplacian-square
term vanishes on P_3).  Writing p in monomials centered at C_alpha and
scaled by h makes the resulting linear system  V sigma = b  independent of
h: V holds centered monomial values at the data points, and b is 1 for the
constant, -5/12 for each squared coordinate, 0 otherwise.

Among all solutions the near-best functional minimizes ||sigma||_1, solved
exactly by the rational simplex.  Stabilizer symmetries of the point set tie
weights into orbits, shrinking the LP without changing its optimum (any
optimum averages over the group into a symmetric one of equal norm).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations, product

import numpy as np

from . import domain
from .simplex import minimize_l1_exact

__all__ = [
    "MONOMIALS", "constraint_rhs", "ConstraintSystem", "constraint_system",
    "L1Solution", "minimize_l1", "norm_table", "canonical_grid",
]


def _monomials():
    out = []
    for total in range(4):
        for a in range(total, -1, -1):
            for b in range(total - a, -1, -1):
                out.append((a, b, total - a - b))
    return tuple(out)


#: The 20 exponent triples of the monomial basis of P_3, by degree then lex.
MONOMIALS = _monomials()


def constraint_rhs(nu):
    """Exact right-hand side for the centered monomial with exponents nu."""
    if nu == (0, 0, 0):
        return Fraction(1)
    if sorted(nu) == [0, 0, 2]:
        return Fraction(-5, 12)
    return Fraction(0)


#: The 48 signed axis permutations (perm, signs).
_SIGNED_PERMS = tuple((perm, signs)
                      for perm in permutations(range(3))
                      for signs in product((1, -1), repeat=3))


def _apply_signed_perm(g, point):
    perm, signs = g
    return tuple(signs[a] * point[perm[a]] for a in range(3))


@dataclass
class ConstraintSystem:
    """The P_3 exactness system for one (alpha, n) pair.

    Attributes
    ----------
    alpha, n : the octahedron parameters.
    points : (k, 3) int64 array of data indices (deduplicated, sorted).
    rows : list of exponent triples actually kept (after symmetry dedup).
    V : list of rows, each a list of Fractions, one column per orbit.
    b : list of Fractions.
    orbits : list of list of point indices (into `points`).
    group : the stabilizer elements used for tying.
    """
    alpha: tuple
    n: int
    grid: object
    points: np.ndarray
    rows: list
    V: list
    b: list
    orbits: list
    group: tuple


def _centered_points_exact(points, alpha, grid):
    """Data points minus C_alpha, exact rationals at h = 1."""
    c = domain.center_exact(alpha)
    out = []
    for beta in points:
        coords = tuple(domain.data_coordinate_exact(int(beta[a]), grid.m[a])
                       - c[a] for a in range(3))
        out.append(coords)
    return out


def _stabilizer(centered):
    """Signed permutations mapping the centered point set onto itself."""
    pset = set(centered)
    kept = []
    for g in _SIGNED_PERMS:
        if all(_apply_signed_perm(g, p) in pset for p in pset):
            kept.append(g)
    return tuple(kept)


def _point_orbits(centered, group):
    index_of = {p: i for i, p in enumerate(centered)}
    seen = [False] * len(centered)
    orbits = []
    for i, p in enumerate(centered):
        if seen[i]:
            continue
        orbit = set()
        for g in group:
            orbit.add(index_of[_apply_signed_perm(g, p)])
        orbit = sorted(orbit)
        for j in orbit:
            seen[j] = True
        orbits.append(orbit)
    return orbits


def constraint_system(alpha, n, grid, tie_symmetry=True):
    """Build the exactness system for alpha with octahedron radius n.

    With ``tie_symmetry`` the stabilizer of the projected point set ties
    symmetric points to a common weight (columns become orbit sums) and
    redundant monomial rows collapse; for alpha = (0,0,-1) exactly 13 of
    the 20 conditions survive.
    """
    octa = domain.octahedron(alpha, n, grid)
    centered = _centered_points_exact(octa.points, alpha, grid)
    group = _stabilizer(centered) if tie_symmetry else (_SIGNED_PERMS[0],)
    orbits = _point_orbits(centered, group)

    rows = []
    V = []
    b = []
    seen = set()
    for nu in MONOMIALS:
        row = []
        for orbit in orbits:
            total = Fraction(0)
            for i in orbit:
                x, y, z = centered[i]
                total += x ** nu[0] * y ** nu[1] * z ** nu[2]
            row.append(total)
        rhs = constraint_rhs(nu)
        lead = next((v for v in row if v != 0), None)
        if lead is None:
            if rhs != 0:
                # degenerate geometry cannot match a nonzero target; keep the
                # row so the LP reports infeasibility honestly
                rows.append(nu)
                V.append(row)
                b.append(rhs)
            continue
        if lead < 0:
            row = [-v for v in row]
            rhs = -rhs
        key = (tuple(row), rhs)
        if key in seen:
            continue
        seen.add(key)
        rows.append(nu)
        V.append(row)
        b.append(rhs)
    return ConstraintSystem(alpha=tuple(int(a) for a in alpha), n=n,
                            grid=grid, points=octa.points, rows=rows, V=V,
                            b=b, orbits=orbits, group=group)


@dataclass
class L1Solution:
    """Result of the near-best minimization for one system."""
    status: str
    system: ConstraintSystem
    weights: list      # per-point Fractions (aligned with system.points)
    norm: Fraction

    @property
    def norm_float(self):
        return float(self.norm) if self.norm is not None else None


def minimize_l1(system):
    """Exact l1-minimal weights for a constraint system.

    The LP objective counts every tied point: orbit variable w_O contributes
    |O| * |w_O|.
    """
    sizes = [Fraction(len(o)) for o in system.orbits]
    status, s, norm = minimize_l1_exact(system.V, system.b, weights=sizes)
    if status != "optimal":
        return L1Solution(status=status, system=system, weights=None,
                          norm=None)
    weights = [Fraction(0)] * len(system.points)
    for orbit, w in zip(system.orbits, s):
        for i in orbit:
            weights[i] = w
    return L1Solution(status="optimal", system=system, weights=weights,
                      norm=norm)


def verify_weights(system, weights):
    """Exact check V.sigma = b for per-point weights; returns the l1 norm.

    Raises AssertionError on any violated condition.  `weights` is a mapping
    from data-index triples to Fractions or a sequence aligned with
    system.points.
    """
    if isinstance(weights, dict):
        aligned = [Fraction(weights.get(tuple(int(v) for v in beta), 0))
                   for beta in system.points]
    else:
        aligned = [Fraction(w) for w in weights]
    # evaluate on the untied per-point system (orbit structure irrelevant)
    centered = _centered_points_exact(system.points, system.alpha,
                                      system.grid)
    for nu in MONOMIALS:
        total = Fraction(0)
        for (x, y, z), w in zip(centered, aligned):
            total += w * x ** nu[0] * y ** nu[1] * z ** nu[2]
        if total != constraint_rhs(nu):
            raise AssertionError(f"condition violated for monomial {nu}")
    return sum(map(abs, aligned), Fraction(0))


def canonical_grid():
    """The m = (11, 11, 11), h = 1 grid used for canonical derivations."""
    from .geometry import DomainGrid
    return DomainGrid(11, 11, 11, 1.0)


def norm_table(classes, n_values, grid=None, tie_symmetry=True):
    """Optimal norms over a grid of (class, n) cells.

    Returns a list of dicts {"key", "n", "status", "norm"} in input order;
    `norm` is a float (None when infeasible).
    """
    grid = grid or canonical_grid()
    out = []
    for key in classes:
        for n in n_values:
            sol = minimize_l1(constraint_system(tuple(key), n, grid,
                                                tie_symmetry=tie_symmetry))
            out.append({"key": tuple(key), "n": n, "status": sol.status,
                        "norm": sol.norm_float})
    return out
