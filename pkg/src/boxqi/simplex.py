"""Exact two-phase simplex over the rationals.

Solves  min c.x  subject to  A x = b, x >= 0  with every entry a
`fractions.Fraction`.  Bland's smallest-index rule guarantees termination
without perturbation; infeasibility detection is exact (positive phase-one
optimum).  Dense tableau - intended for the small systems of the near-best
derivation (tens of rows, up to a few thousand columns).
"""

from __future__ import annotations

from fractions import Fraction

__all__ = ["LPResult", "solve_lp", "minimize_l1_exact"]

_ZERO = Fraction(0)
_ONE = Fraction(1)


class LPResult:
    """Outcome of an exact LP solve.

    Attributes
    ----------
    status : str
        "optimal", "infeasible", or "unbounded".
    x : list of Fraction or None
        Optimal point (length n) when status == "optimal".
    objective : Fraction or None
        Optimal objective value.
    """

    def __init__(self, status, x=None, objective=None):
        self.status = status
        self.x = x
        self.objective = objective

    def __repr__(self):
        return f"LPResult(status={self.status!r}, objective={self.objective!r})"


def _pivot(T, basis, row, col):
    piv = T[row][col]
    if piv != _ONE:
        inv = 1 / piv
        T[row] = [v * inv for v in T[row]]
    prow = T[row]
    for r, tr in enumerate(T):
        if r != row and tr[col] != 0:
            f = tr[col]
            T[r] = [a - f * b for a, b in zip(tr, prow)]
    basis[row] = col


def _bland(T, basis, cost_row, ncols):
    """Run simplex with Bland's rule; cost_row is the index of the z-row."""
    m = len(basis)
    while True:
        z = T[cost_row]
        col = next((j for j in range(ncols) if z[j] < 0), None)
        if col is None:
            return "optimal"
        best = None
        for r in range(m):
            a = T[r][col]
            if a > 0:
                ratio = T[r][-1] / a
                cand = (ratio, basis[r])
                if best is None or cand < best[0:2]:
                    best = (ratio, basis[r], r)
        if best is None:
            return "unbounded"
        _pivot(T, basis, best[2], col)


def solve_lp(A, b, c):
    """Exact solution of  min c.x : A x = b, x >= 0.

    Parameters
    ----------
    A : list of list of Fraction, shape (m, n)
    b : list of Fraction, length m
    c : list of Fraction, length n

    Returns
    -------
    LPResult
    """
    m = len(A)
    n = len(c)
    A = [[Fraction(v) for v in row] for row in A]
    b = [Fraction(v) for v in b]
    c = [Fraction(v) for v in c]
    for i in range(m):
        if b[i] < 0:
            A[i] = [-v for v in A[i]]
            b[i] = -b[i]

    # tableau columns: n structural + m artificial + rhs;
    # rows: m constraints + phase-two z-row + phase-one z-row
    width = n + m + 1
    T = []
    for i in range(m):
        row = A[i] + [_ZERO] * m + [b[i]]
        row[n + i] = _ONE
        T.append(row)
    zrow = [ci for ci in c] + [_ZERO] * (m + 1)
    art = [_ZERO] * width
    for i in range(m):
        art = [a - v for a, v in zip(art, T[i])]
    art = [(_ZERO if j >= n and j < n + m else v) for j, v in enumerate(art)]
    T.append(zrow)
    T.append(art)
    basis = list(range(n, n + m))

    status = _bland(T, basis, cost_row=m + 1, ncols=n + m)
    if status != "optimal":  # pragma: no cover - phase one cannot be unbounded
        return LPResult(status)
    if -T[m + 1][-1] != 0:  # phase-one optimum is -z entry
        return LPResult("infeasible")

    # drive leftover artificial variables out of the basis
    for r in range(m):
        if basis[r] >= n:
            col = next((j for j in range(n) if T[r][j] != 0), None)
            if col is not None:
                _pivot(T, basis, r, col)
    # drop redundant all-zero rows still pinned to artificials
    keep = [r for r in range(m) if basis[r] < n]
    T = [T[r] for r in keep] + [T[m]]
    basis = [basis[r] for r in keep]
    # forbid artificial columns in phase two by truncating them
    T = [row[:n] + [row[-1]] for row in T]

    status = _bland(T, basis, cost_row=len(basis), ncols=n)
    if status != "optimal":
        return LPResult(status)
    x = [_ZERO] * n
    for r, j in enumerate(basis):
        x[j] = T[r][-1]
    objective = sum((ci * xi for ci, xi in zip(c, x)), _ZERO)
    return LPResult("optimal", x=x, objective=objective)


def minimize_l1_exact(V, b, weights=None):
    """min sum_i w_i |s_i|  subject to  V s = b, exactly.

    Split s = u - v with u, v >= 0 and solve the equivalent LP.

    Parameters
    ----------
    V : list of list of Fraction, shape (m, k)
    b : list of Fraction
    weights : list of Fraction, optional
        Positive objective weights (default all 1).

    Returns
    -------
    (status, s, norm) : (str, list of Fraction or None, Fraction or None)
    """
    m = len(V)
    k = len(V[0]) if m else 0
    if weights is None:
        weights = [_ONE] * k
    A = [list(row) + [-v for v in row] for row in V]
    c = [Fraction(w) for w in weights] * 2
    res = solve_lp(A, b, c)
    if res.status != "optimal":
        return res.status, None, None
    s = [res.x[i] - res.x[k + i] for i in range(k)]
    norm = sum((w * abs(si) for w, si in zip(weights, s)), _ZERO)
    return "optimal", s, norm
