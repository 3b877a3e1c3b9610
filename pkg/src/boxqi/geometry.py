"""Uniform type-6 tetrahedral partitions of a box.

The domain Omega = [0, m1*h] x [0, m2*h] x [0, m3*h] is split into
m1*m2*m3 cubes of side h, and every cube is cut by the six diagonal planes
x = +-y, y = +-z, x = +-z (through the cube center) into 24 congruent
tetrahedra.

Canonical tetrahedron enumeration
---------------------------------
Tetrahedron ``t = 4*f + e`` where ``f`` enumerates cube faces in the order
(-x, +x, -y, +y, -z, +z) and ``e`` the four edges of that face in cyclic
order (0,0) -> (1,0) -> (1,1) -> (0,1) over the two remaining axes in
increasing axis order.  Each tetrahedron lists its vertices as

    (cube center, face center, edge corner A, edge corner B),

so BB multi-index position 0 always sits at the cube center.  All BB tables
in this package index against this order.

Internally coordinates are kept in grid units u = x/h; cube vertices then
have half-integer coordinates, which this module doubles to integers where
exactness matters.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bernstein import domain_points as _bb_domain_points

__all__ = [
    "DomainGrid", "TET_VERTICES_UNIT", "tetrahedra_of_cube", "locate",
    "domain_points", "barycentric_direction",
]


@dataclass(frozen=True)
class DomainGrid:
    """A box domain with its uniform cube partition.

    Parameters
    ----------
    m1, m2, m3 : int
        Number of cubes per axis (positive).
    h : float
        Cube side length (positive).
    """
    m1: int
    m2: int
    m3: int
    h: float = 1.0

    def __post_init__(self):
        if min(self.m1, self.m2, self.m3) < 1:
            raise ValueError("m1, m2, m3 must be positive")
        if not self.h > 0:
            raise ValueError("h must be positive")

    @property
    def m(self):
        return (self.m1, self.m2, self.m3)

    @property
    def extent(self):
        """Upper corner of Omega = [0, m1*h] x [0, m2*h] x [0, m3*h]."""
        return (self.m1 * self.h, self.m2 * self.h, self.m3 * self.h)

    def require_quasi_interpolation(self):
        """Validate the construction rule m_a >= 11 for quasi-interpolation."""
        if min(self.m) < 11:
            raise ValueError(
                f"quasi-interpolation requires m1, m2, m3 >= 11, got {self.m}")


def _build_unit_tets():
    """Vertices of the 24 canonical tetrahedra of [0,1]^3, doubled to ints."""
    center = (1, 1, 1)
    tets = []
    for axis in range(3):
        for side in (0, 1):
            face_center = [1, 1, 1]
            face_center[axis] = 2 * side
            b, c = [a for a in range(3) if a != axis]
            corners = []
            for pb, pc in ((0, 0), (1, 0), (1, 1), (0, 1)):
                corner = [0, 0, 0]
                corner[axis] = 2 * side
                corner[b] = 2 * pb
                corner[c] = 2 * pc
                corners.append(tuple(corner))
            for e in range(4):
                tets.append((center, tuple(face_center),
                             corners[e], corners[(e + 1) % 4]))
    return np.array(tets, dtype=np.int64)


#: (24, 4, 3) integer array: doubled vertices of the canonical tetrahedra
#: of the unit cube (divide by 2 for actual coordinates).
TET_VERTICES_UNIT_2X = _build_unit_tets()

#: (24, 4, 3) float array: vertices of the canonical tetrahedra of [0,1]^3.
TET_VERTICES_UNIT = TET_VERTICES_UNIT_2X / 2.0


def _exact_inverse_4x4(mat):
    """Inverse of a 4x4 Fraction matrix by Gauss-Jordan elimination."""
    n = 4
    aug = [[Fraction(mat[i][j]) for j in range(n)]
           + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        inv_p = 1 / aug[col][col]
        aug[col] = [v * inv_p for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def _build_barycentric_matrices():
    """Per-tet matrices mapping homogeneous doubled coords to barycentrics.

    For tetrahedron t with doubled vertices w0..w3 the barycentric
    coordinates of a point u (grid units) solve  sum lam_i * w_i = 2u,
    sum lam_i = 1, i.e.  lam = Minv @ (2u_x, 2u_y, 2u_z, 1).
    """
    mats = np.empty((24, 4, 4), dtype=np.float64)
    exact = []
    for t in range(24):
        w = TET_VERTICES_UNIT_2X[t]
        m = [[int(w[j][i]) for j in range(4)] for i in range(3)]
        m.append([1, 1, 1, 1])
        inv = _exact_inverse_4x4(m)
        exact.append(inv)
        mats[t] = [[float(v) for v in row] for row in inv]
    return mats, exact


#: (24, 4, 4) float matrices: barycentric = mat @ (2*ux, 2*uy, 2*uz, 1).
BARYCENTRIC_MATRICES, BARYCENTRIC_MATRICES_EXACT = _build_barycentric_matrices()

#: (24, 3, 4) float: row a = barycentric direction of unit vector e_a
#: (grid units) within tetrahedron t, i.e. 2 * column a of the exact matrix.
AXIS_DIRECTIONS = 2.0 * BARYCENTRIC_MATRICES[:, :, :3].transpose(0, 2, 1)

_LOCATE_TOL = 1e-12


def tetrahedra_of_cube(cube, grid):
    """Vertex coordinates of the 24 tetrahedra of one cube.

    Parameters
    ----------
    cube : length-3 sequence of int
        0-based cube index per axis.
    grid : DomainGrid

    Returns
    -------
    (24, 4, 3) ndarray of physical coordinates.
    """
    cube = np.asarray(cube, dtype=np.int64)
    if cube.shape != (3,):
        raise ValueError("cube must be a 3-index")
    if np.any(cube < 0) or np.any(cube >= grid.m):
        raise IndexError(f"cube index {tuple(cube)} outside grid {grid.m}")
    return (TET_VERTICES_UNIT + cube) * grid.h


def domain_points(tet_vertices):
    """The 35 quartic domain points of a tetrahedron (canonical BB order)."""
    return _bb_domain_points(tet_vertices, degree=4)


def locate_unit(local):
    """Locate points of the closed unit cube in the 24-tetrahedron split.

    Parameters
    ----------
    local : (n, 3) array
        Coordinates in [0, 1]^3 (slight excursions tolerated).

    Returns
    -------
    tet : (n,) intp
        First tetrahedron in canonical order containing each point.
    bary : (n, 4) float64
        Barycentric coordinates with respect to that tetrahedron.
    """
    local = np.asarray(local, dtype=np.float64)
    hom = np.empty((local.shape[0], 4))
    hom[:, :3] = 2.0 * local
    hom[:, 3] = 1.0
    # all 24 candidate barycentric quadruples per point: (n, 24, 4)
    bary_all = np.einsum('tij,nj->nti', BARYCENTRIC_MATRICES, hom)
    minc = bary_all.min(axis=2)
    inside = minc >= -_LOCATE_TOL
    # first containing tetrahedron; fall back to the best fit if roundoff
    # pushed every candidate slightly negative
    tet = np.where(inside.any(axis=1), inside.argmax(axis=1),
                   minc.argmax(axis=1))
    bary = bary_all[np.arange(local.shape[0]), tet]
    return tet, bary


def locate(points, grid):
    """Point location in the type-6 partition of the grid.

    Ties on shared faces/knot planes resolve to the lexicographically
    smallest (cube, tet) pair: cube index by clamp(ceil(u)-1) per axis, then
    the first containing tetrahedron in canonical order.

    Parameters
    ----------
    points : (n, 3) or (3,) array_like
        Physical points inside Omega.
    grid : DomainGrid

    Returns
    -------
    cube : (n, 3) int64 array
    tet : (n,) intp array
    bary : (n, 4) float64 array

    Raises
    ------
    ValueError
        If any point lies outside Omega (beyond roundoff tolerance).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError("points must have shape (n, 3)")
    u = pts / grid.h
    m = np.array(grid.m, dtype=np.float64)
    tol = _LOCATE_TOL * max(1.0, float(m.max()))
    if np.any(u < -tol) or np.any(u > m + tol):
        bad = pts[np.any((u < -tol) | (u > m + tol), axis=1)][0]
        raise ValueError(f"point {tuple(bad)} outside the domain")
    cube = np.ceil(u).astype(np.int64) - 1
    np.clip(cube, 0, np.array(grid.m, dtype=np.int64) - 1, out=cube)
    tet, bary = locate_unit(u - cube)
    return cube, tet, bary


def barycentric_direction(tet, axis):
    """Barycentric direction of the Cartesian unit vector e_axis (grid units).

    The returned 4-vector a satisfies sum(a) = 0 and feeds
    `bernstein.derivative_reduce`; physical-space derivatives carry an extra
    1/h per differentiation order.
    """
    return AXIS_DIRECTIONS[tet, axis]
