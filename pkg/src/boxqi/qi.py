"""Assembly and evaluation of the quasi-interpolating spline Qf.

``approximate`` turns a complete grid of samples into spline coefficients by
applying the class stencil of every basis index (vectorized over rectangular
index regions that share one stencil layout).  ``QISpline`` evaluates the
spline either directly (summing basis translates) or through per-tetrahedron
Bernstein patches, which is the fast path for grid-scale workloads.

Spline file layout (little-endian, version 1):

    bytes 0..3   magic ``b"BQIS"``
    u32          format version (1)
    u32 x 3      m1, m2, m3
    f64          h
    f64 x N      coefficients, C order, shape (m1+4, m2+4, m3+4)

The coefficient array is indexed ``[i+1, j+1, k+1]`` for basis index
(i, j, k) in [-1, m+2]^3; slots outside the active set A hold zeros (those
translates vanish on the domain).
"""

from __future__ import annotations

import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from math import prod

import numpy as np

from . import stencils
from .bernstein import DIMENSION, bernstein_basis, derivative_reduce

_NC = DIMENSION[4]  # 35 quartic Bernstein coefficients per tetrahedron
from .boxspline import TRANSLATE_OFFSET, get_table
from .domain import index_set
from .geometry import AXIS_DIRECTIONS, DomainGrid, locate

__all__ = [
    "QISpline",
    "SizeError",
    "approximate",
    "DIRECT_POINT_LIMIT",
    "DEFAULT_COMPILE_BUDGET",
]

# direct (translate-summing) evaluation is the default up to this many
# points; beyond it the per-tetrahedron patch path wins by a wide margin.
DIRECT_POINT_LIMIT = 10_000

# default ceiling for materialized per-tetrahedron patches: 1 GiB.  Larger
# grids compile to a streamed plan that builds patches slab by slab.
DEFAULT_COMPILE_BUDGET = 1 << 30

_PATCH_BYTES_PER_CUBE = 24 * _NC * 8  # 6720
_GATHER_CHUNK = 4 << 20  # float64 elements per temporary in bulk gathers

_ENV_THREADS = "BOXQI_THREADS"


class SizeError(MemoryError):
    """Raised when a dense compile would exceed its memory budget."""

    def __init__(self, required: int, budget: int):
        self.required = required
        self.budget = budget
        super().__init__(
            f"dense patch table needs {required} bytes "
            f"(budget {budget}); compile with mode='streamed' or raise "
            f"the budget")


def thread_count(requested: int | None = None) -> int:
    """Worker count: explicit argument, else BOXQI_THREADS, else 1."""
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get(_ENV_THREADS, "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def _run_tasks(tasks, threads: int) -> None:
    if threads <= 1 or len(tasks) <= 1:
        for task in tasks:
            task()
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for future in [pool.submit(t) for t in tasks]:
            future.result()


# ---------------------------------------------------------------------------
# coefficient assembly
# ---------------------------------------------------------------------------

def _axis_labels(m: int) -> list[tuple[int, int, bool]]:
    """Index ranges [lo, hi] sharing one stencil layout along one axis.

    Returns (lo, hi, extreme) with extreme=True for the two outermost
    singleton labels (basis index -1 and m+2); those combine into the
    inactive corner set when two or three axes are extreme at once.
    """
    half = (m + 2) // 2  # ceil((m+1)/2): last unreflected index
    labels: list[tuple[int, int, bool]] = []
    for a in range(-1, 5):
        labels.append((a, a, a == -1))
    if 5 <= half:
        labels.append((5, half, False))
    if half + 1 <= m - 4:
        labels.append((half + 1, m - 4, False))
    for a in range(m - 3, m + 3):
        labels.append((a, a, a == m + 2))
    return labels


def approximate(samples: np.ndarray, grid: DomainGrid | None = None, *,
                h: float = 1.0, threads: int | None = None) -> "QISpline":
    """Build the quasi-interpolant from a complete sample grid.

    ``samples`` has shape (m1+2, m2+2, m3+2): one value per data point,
    boundary points included.  Each spline coefficient is that index's class
    stencil applied to the samples; the result reproduces cubics and
    satisfies ``|Qf| <= 9.945 max|f|``.
    """
    samples = np.ascontiguousarray(samples, dtype=np.float64)
    if samples.ndim != 3:
        raise ValueError("samples must be a 3D array over the data points")
    if grid is None:
        grid = DomainGrid(*(n - 2 for n in samples.shape), h=h)
    grid.require_quasi_interpolation()
    expected = tuple(m + 2 for m in grid.m)
    if samples.shape != expected:
        raise ValueError(
            f"samples shape {samples.shape} does not cover the data point "
            f"set; expected {expected}")
    if not np.isfinite(samples).all():
        raise ValueError("samples contain non-finite values")

    coeffs = np.zeros(tuple(m + 4 for m in grid.m))
    lib = stencils.library()
    axis_labels = [_axis_labels(m) for m in grid.m]

    tasks = []
    for lo1, hi1, ex1 in axis_labels[0]:
        for lo2, hi2, ex2 in axis_labels[1]:
            for lo3, hi3, ex3 in axis_labels[2]:
                if ex1 + ex2 + ex3 >= 2:
                    continue  # inactive corner region: coefficients stay 0
                rep = (lo1, lo2, lo3)
                mapped, w = stencils.functional(rep, grid, lib)
                delta = mapped - np.array(rep)
                tasks.append(_region_task(
                    samples, coeffs, ((lo1, hi1), (lo2, hi2), (lo3, hi3)),
                    delta, w))
    _run_tasks(tasks, thread_count(threads))
    coeffs.setflags(write=False)
    return QISpline(grid=grid, coefficients=coeffs)


def _region_task(samples, coeffs, ranges, delta, weights):
    (lo1, hi1), (lo2, hi2), (lo3, hi3) = ranges
    a2 = np.arange(lo2, hi2 + 1)
    a3 = np.arange(lo3, hi3 + 1)
    n2, n3, k = len(a2), len(a3), len(weights)
    idx2 = (a2[:, None] + delta[:, 1])[None, :, None, :]
    idx3 = (a3[:, None] + delta[:, 2])[None, None, :, :]
    rows = max(1, _GATHER_CHUNK // max(1, n2 * n3 * k))

    def run():
        for start in range(lo1, hi1 + 1, rows):
            stop = min(start + rows, hi1 + 1)
            a1 = np.arange(start, stop)
            idx1 = (a1[:, None] + delta[:, 0])[:, None, None, :]
            gathered = samples[idx1, idx2, idx3]
            block = gathered @ weights
            coeffs[start + 1:stop + 1,
                   lo2 + 1:hi2 + 2, lo3 + 1:hi3 + 2] = block

    return run


# ---------------------------------------------------------------------------
# patch machinery
# ---------------------------------------------------------------------------

@lru_cache(maxsize=1)
def _patch_matrix() -> np.ndarray:
    """(125, 24*35) map from a 5x5x5 coefficient window to patch coefficients.

    Window slot w in [0,5)^3 holds the coefficient of translate
    alpha = cube + w - 1; its contribution to the cube's patches is the
    basis table entry for local support cube (2, 2, 4) - w.
    """
    from .boxspline import _CUBE_INDEX
    table = get_table()
    matrix = np.empty((125, 24 * _NC))
    slot = 0
    for wx in range(5):
        for wy in range(5):
            for wz in range(5):
                row = _CUBE_INDEX[(2 - wx, 2 - wy, 4 - wz)]
                matrix[slot] = table.coeffs[row].reshape(-1)
                slot += 1
    return matrix


_WINDOW_OFFSETS = (
    np.repeat(np.arange(5), 25),
    np.tile(np.repeat(np.arange(5), 5), 5),
    np.tile(np.arange(5), 25),
)


def _windows(coeffs: np.ndarray, cube: np.ndarray) -> np.ndarray:
    """Gather the (n, 125) coefficient windows feeding each cube's patches."""
    return coeffs[cube[:, 0, None] + _WINDOW_OFFSETS[0],
                  cube[:, 1, None] + _WINDOW_OFFSETS[1],
                  cube[:, 2, None] + _WINDOW_OFFSETS[2]]


@dataclass(frozen=True)
class CompiledPatches:
    """Per-tetrahedron Bernstein coefficients, dense or built per slab."""

    mode: str                      # "dense" | "streamed"
    budget: int
    patches: np.ndarray | None     # dense: (m1, m2, m3, 24, 35)
    slab_rows: int                 # streamed: cube rows of axis 0 per slab

    @property
    def nbytes(self) -> int:
        return 0 if self.patches is None else self.patches.nbytes


# ---------------------------------------------------------------------------
# the spline
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QISpline:
    """C^2 quartic spline on the type-6 partition of [0, m1 h] x ... x [0, m3 h]."""

    grid: DomainGrid
    coefficients: np.ndarray
    compiled: CompiledPatches | None = None

    def __post_init__(self):
        expected = tuple(m + 4 for m in self.grid.m)
        if self.coefficients.shape != expected:
            raise ValueError(
                f"coefficient array shape {self.coefficients.shape} does "
                f"not match grid (expected {expected})")

    # -- compilation -------------------------------------------------------

    def compile(self, mode: str = "auto",
                budget: int | None = None,
                threads: int | None = None) -> "QISpline":
        """Attach per-tetrahedron patches (dense) or a slab plan (streamed).

        ``mode="dense"`` materializes 24*35 coefficients per cube
        (raises :class:`SizeError` above the budget), ``"streamed"`` stores
        only a slab schedule whose working set stays within the budget, and
        ``"auto"`` picks dense when it fits.
        """
        budget = DEFAULT_COMPILE_BUDGET if budget is None else int(budget)
        m1, m2, m3 = self.grid.m
        required = m1 * m2 * m3 * _PATCH_BYTES_PER_CUBE
        if mode == "auto":
            mode = "dense" if required <= budget else "streamed"
        if mode == "dense":
            if required > budget:
                raise SizeError(required, budget)
            patches = np.empty((m1, m2, m3, 24, _NC))
            flat = patches.reshape(m1 * m2 * m3, 24 * _NC)
            cubes = _all_cubes(self.grid.m)
            matrix = _patch_matrix()
            rows = max(1, _GATHER_CHUNK // (24 * _NC))
            tasks = []
            for start in range(0, len(cubes), rows):
                stop = min(start + rows, len(cubes))
                tasks.append(self._dense_slab_task(
                    flat, cubes, matrix, start, stop))
            _run_tasks(tasks, thread_count(threads))
            patches.setflags(write=False)
            compiled = CompiledPatches("dense", budget, patches, m1)
        elif mode == "streamed":
            per_row = m2 * m3 * _PATCH_BYTES_PER_CUBE
            slab_rows = max(1, min(m1, budget // max(1, per_row)))
            compiled = CompiledPatches("streamed", budget, None, slab_rows)
        else:
            raise ValueError(f"unknown compile mode {mode!r}")
        return replace(self, compiled=compiled)

    def _dense_slab_task(self, flat, cubes, matrix, start, stop):
        def run():
            flat[start:stop] = _windows(
                self.coefficients, cubes[start:stop]) @ matrix
        return run

    # -- evaluation --------------------------------------------------------

    def eval(self, points, mode: str = "auto",
             threads: int | None = None) -> np.ndarray:
        """Spline values at points inside the closed domain.

        ``mode``: "direct" sums the <=125 basis translates covering each
        point; "compiled" evaluates one Bernstein patch per point (building
        patches on the fly when no dense compile is attached); "auto" uses
        direct up to ``DIRECT_POINT_LIMIT`` points on uncompiled splines.
        """
        points, scalar = _as_points(points)
        if mode == "auto":
            mode = ("compiled" if self.compiled is not None
                    or len(points) > DIRECT_POINT_LIMIT else "direct")
        if mode == "direct":
            values = self._eval_direct(points)
        elif mode == "compiled":
            values = self._eval_patches(points, None, threads)
        else:
            raise ValueError(f"unknown eval mode {mode!r}")
        return values[0] if scalar else values

    def eval_derivative(self, points, gamma,
                        threads: int | None = None) -> np.ndarray:
        """Partial derivative D^gamma(Qf), |gamma| <= 3 (exact per patch)."""
        gamma = tuple(int(g) for g in gamma)
        if len(gamma) != 3 or min(gamma) < 0 or sum(gamma) > 3:
            raise ValueError("gamma must be 3 nonnegative ints, |gamma|<=3")
        points, scalar = _as_points(points)
        values = self._eval_patches(points, gamma, threads)
        return values[0] if scalar else values

    def gradient(self, points, threads: int | None = None) -> np.ndarray:
        points, scalar = _as_points(points)
        out = np.stack([self._eval_patches(points, g, threads)
                        for g in ((1, 0, 0), (0, 1, 0), (0, 0, 1))], axis=-1)
        return out[0] if scalar else out

    # direct translate summation
    def _eval_direct(self, points: np.ndarray) -> np.ndarray:
        table = get_table()
        grid = self.grid
        u = points / grid.h
        cube, _, _ = locate(points, grid)
        values = np.zeros(len(points))
        shift = np.array(TRANSLATE_OFFSET, dtype=np.float64)
        for ox in range(-1, 4):
            for oy in range(-1, 4):
                for oz in range(-1, 4):
                    alpha = cube + (ox, oy, oz)
                    local = u - alpha + shift
                    coeff = self.coefficients[alpha[:, 0] + 1,
                                              alpha[:, 1] + 1,
                                              alpha[:, 2] + 1]
                    values += coeff * table.eval(local)
        return values

    # patch-based evaluation (dense, streamed, or on-the-fly)
    def _eval_patches(self, points: np.ndarray, gamma, threads) -> np.ndarray:
        grid = self.grid
        cube, tet, bary = locate(points, grid)
        values = np.empty(len(points))
        compiled = self.compiled
        if compiled is not None and compiled.mode == "dense":
            m1, m2, m3 = grid.m
            flat = compiled.patches.reshape(m1 * m2 * m3, 24, _NC)
            lin = (cube[:, 0] * m2 + cube[:, 1]) * m3 + cube[:, 2]
            tasks = [self._tet_eval_task(values, flat[lin[sel], t], bary[sel],
                                         t, gamma, sel)
                     for t, sel in _tet_groups(tet)]
            _run_tasks(tasks, thread_count(threads))
            return values
        # streamed/on-the-fly: build patches per slab of first-axis cube
        # rows, one patch per *distinct* cube, within the memory budget
        if compiled is not None:
            slab_rows = compiled.slab_rows
        else:
            per_row = grid.m[1] * grid.m[2] * _PATCH_BYTES_PER_CUBE
            slab_rows = max(1, min(grid.m[0],
                                   DEFAULT_COMPILE_BUDGET // max(1, per_row)))
        m2, m3 = grid.m[1], grid.m[2]
        lin = (cube[:, 0] * m2 + cube[:, 1]) * m3 + cube[:, 2]
        slab = cube[:, 0] // slab_rows
        order = np.argsort(slab, kind="stable")
        matrix = _patch_matrix()
        tasks = []
        for lo, hi in _group_starts(slab[order]):
            sel = order[lo:hi]
            uniq, inverse = np.unique(lin[sel], return_inverse=True)
            cubes_uniq = np.stack(
                np.unravel_index(uniq, grid.m), axis=1).astype(np.int64)
            windows = _windows(self.coefficients, cubes_uniq)
            patches = (windows @ matrix).reshape(len(uniq), 24, _NC)
            tet_sel = tet[sel]
            patch_per_point = patches[inverse, tet_sel]
            bary_sel = bary[sel]
            for t, tsel in _tet_groups(tet_sel):
                tasks.append(self._tet_eval_task(
                    values, patch_per_point[tsel], bary_sel[tsel],
                    t, gamma, sel[tsel]))
        _run_tasks(tasks, thread_count(threads))
        return values

    def _tet_eval_task(self, values, patch, bary, tet_id, gamma, sel):
        h = self.grid.h

        def run():
            coeffs = patch
            degree = 4
            if gamma:
                for axis in range(3):
                    direction = AXIS_DIRECTIONS[tet_id, axis]
                    for _ in range(gamma[axis]):
                        coeffs = derivative_reduce(coeffs, direction, degree)
                        degree -= 1
            basis = bernstein_basis(bary, degree)
            out = np.einsum("ij,ij->i", coeffs, basis)
            if gamma and sum(gamma):
                out = out / h ** sum(gamma)
            values[sel] = out
        return run

    # -- persistence --------------------------------------------------------

    MAGIC = b"BQIS"
    VERSION = 1

    def save(self, path) -> None:
        """Write the versioned little-endian layout documented above."""
        header = self.MAGIC + struct.pack(
            "<IIIId", self.VERSION, *self.grid.m, self.grid.h)
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(np.ascontiguousarray(
                self.coefficients, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path) -> "QISpline":
        with open(path, "rb") as fh:
            blob = fh.read()
        head = len(cls.MAGIC) + struct.calcsize("<IIIId")
        if blob[:len(cls.MAGIC)] != cls.MAGIC:
            raise ValueError("not a spline file (bad magic)")
        version, m1, m2, m3, h = struct.unpack(
            "<IIIId", blob[len(cls.MAGIC):head])
        if version != cls.VERSION:
            raise ValueError(f"unsupported spline file version {version}")
        grid = DomainGrid(m1, m2, m3, h=h)
        shape = tuple(m + 4 for m in grid.m)
        expected = head + prod(shape) * 8
        if len(blob) != expected:
            raise ValueError(
                f"spline file truncated: {len(blob)} bytes, "
                f"expected {expected}")
        coeffs = np.frombuffer(blob[head:], dtype="<f8").reshape(shape)
        coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
        coeffs.setflags(write=False)
        return cls(grid=grid, coefficients=coeffs)


# ---------------------------------------------------------------------------
# small helpers
# ---------------------------------------------------------------------------

def _as_points(points) -> tuple[np.ndarray, bool]:
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1:
        return arr.reshape(1, 3), True
    return np.ascontiguousarray(arr), False


def _all_cubes(m: tuple[int, int, int]) -> np.ndarray:
    grids = np.meshgrid(*(np.arange(x) for x in m), indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=1)


def _tet_groups(tet: np.ndarray):
    for t in range(24):
        sel = np.nonzero(tet == t)[0]
        if len(sel):
            yield t, sel


def _group_starts(sorted_keys: np.ndarray):
    if len(sorted_keys) == 0:
        return
    boundaries = np.nonzero(np.diff(sorted_keys))[0] + 1
    edges = np.concatenate(([0], boundaries, [len(sorted_keys)]))
    for a, b in zip(edges[:-1], edges[1:]):
        yield int(a), int(b)


def active_mask(grid: DomainGrid) -> np.ndarray:
    """Boolean (m1+4, m2+4, m3+4) mask of the active coefficient slots."""
    return index_set(grid).mask()
