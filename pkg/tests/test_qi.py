"""Quasi-interpolant construction, evaluation paths, derivatives, and
spline persistence."""

import numpy as np
import pytest

from boxqi import bernstein, domain, geometry, qi, stencils


def _samples_of(fn, grid):
    pts = domain.data_points(grid)
    return fn(pts[..., 0], pts[..., 1], pts[..., 2])


def _probe_points(rng, grid, n):
    return rng.uniform(0.0, 1.0, size=(n, 3)) * np.array(grid.extent)


def test_constant_field_reproduced(rng):
    spline = qi.approximate(np.full((13, 13, 13), 2.5), h=1.0)
    pts = _probe_points(rng, spline.grid, 300)
    np.testing.assert_allclose(spline.eval(pts), 2.5, rtol=0, atol=1e-12)


def test_linearity(rng):
    f = rng.normal(size=(13, 13, 13))
    g = rng.normal(size=(13, 13, 13))
    sf = qi.approximate(f, h=1.0)
    sg = qi.approximate(g, h=1.0)
    s_mix = qi.approximate(2.0 * f - 0.5 * g, h=1.0)
    np.testing.assert_allclose(
        s_mix.coefficients, 2.0 * sf.coefficients - 0.5 * sg.coefficients,
        rtol=0, atol=1e-12)


def test_coefficients_match_per_class_stencils(rng):
    grid = geometry.DomainGrid(11, 11, 11, 1.0)
    data = rng.normal(size=(13, 13, 13))
    spline = qi.approximate(data, grid)
    for alpha in [(0, 0, -1), (6, 6, 6), (11, 0, 5), (-1, 3, 8),
                  (13, 5, 11), (2, 2, 2)]:
        slot = tuple(a + 1 for a in alpha)
        np.testing.assert_allclose(
            spline.coefficients[slot],
            stencils.coefficient(alpha, grid, data), rtol=1e-12)


def test_cubic_reproduction(rng):
    grid = geometry.DomainGrid(12, 12, 12, 1 / 12)

    def p(x, y, z):
        return ((x - 0.3) * (y + 0.1) * (z - 0.7)
                + 2.0 * x * x * z - y * y * y + 0.25)

    spline = qi.approximate(_samples_of(p, grid), grid)
    pts = _probe_points(rng, grid, 4000)
    exact = p(pts[:, 0], pts[:, 1], pts[:, 2])
    scale = np.abs(exact).max()
    assert np.abs(spline.eval(pts) - exact).max() <= 1e-9 * scale


def test_patch_coefficients_equal_bb_form_of_cubic():
    grid = geometry.DomainGrid(12, 12, 12, 1 / 12)

    def p(x, y, z):
        return x * y * z - 0.5 * z * z + 3.0 * x - 0.2

    spline = qi.approximate(_samples_of(p, grid), grid).compile("dense")
    colloc = bernstein.collocation_matrix(
        np.asarray(bernstein.domain_point_barycentrics(), float))
    for cube, tet in [((5, 6, 7), 3), ((0, 0, 0), 17), ((11, 4, 2), 21)]:
        verts = geometry.tetrahedra_of_cube(cube, grid)[tet]
        dp = geometry.domain_points(verts)
        bb_of_p = np.linalg.solve(colloc, p(dp[:, 0], dp[:, 1], dp[:, 2]))
        patch = spline.compiled.patches[cube][tet]
        np.testing.assert_allclose(patch, bb_of_p, rtol=0, atol=1e-9)


def test_eval_modes_agree(rng):
    spline = qi.approximate(rng.normal(size=(13, 14, 15)), h=0.5)
    pts = _probe_points(rng, spline.grid, 2000)
    direct = spline.eval(pts, mode="direct")
    dense = spline.compile("dense").eval(pts, mode="compiled")
    streamed = spline.compile("streamed").eval(pts, mode="compiled")
    auto = spline.eval(pts)
    np.testing.assert_allclose(dense, direct, rtol=0, atol=1e-11)
    np.testing.assert_allclose(streamed, direct, rtol=0, atol=1e-11)
    np.testing.assert_allclose(auto, direct, rtol=0, atol=1e-11)
    with pytest.raises(ValueError):
        spline.eval(pts, mode="bogus")
    with pytest.raises(ValueError):
        spline.compile("bogus")


def test_eval_rejects_outside_domain(rng):
    spline = qi.approximate(rng.normal(size=(13, 13, 13)), h=1.0)
    with pytest.raises(ValueError):
        spline.eval(np.array([[11.5, 3.0, 3.0]]))


def test_derivatives_match_finite_differences(rng):
    spline = qi.approximate(rng.normal(size=(13, 13, 13)), h=1.0)
    pts = _probe_points(rng, spline.grid, 50) * 0.8 + 1.0  # keep interior
    step = 1e-5
    for axis in range(3):
        gamma = [0, 0, 0]
        gamma[axis] = 1
        e = np.zeros(3)
        e[axis] = step
        fd = (spline.eval(pts + e) - spline.eval(pts - e)) / (2 * step)
        np.testing.assert_allclose(spline.eval_derivative(pts, gamma), fd,
                                   rtol=0, atol=1e-6)
    # mixed second derivative d^2/dxdy via nested differences
    exy = np.array([step, 0.0, 0.0]), np.array([0.0, step, 0.0])
    fd2 = (spline.eval(pts + exy[0] + exy[1])
           - spline.eval(pts + exy[0] - exy[1])
           - spline.eval(pts - exy[0] + exy[1])
           + spline.eval(pts - exy[0] - exy[1])) / (4 * step * step)
    np.testing.assert_allclose(spline.eval_derivative(pts, (1, 1, 0)), fd2,
                               rtol=0, atol=1e-4)


def test_gradient_stacks_first_derivatives(rng):
    spline = qi.approximate(rng.normal(size=(13, 13, 13)), h=1.0)
    pts = _probe_points(rng, spline.grid, 200)
    grad = spline.gradient(pts)
    assert grad.shape == (200, 3)
    for axis, gamma in enumerate([(1, 0, 0), (0, 1, 0), (0, 0, 1)]):
        np.testing.assert_allclose(grad[:, axis],
                                   spline.eval_derivative(pts, gamma),
                                   rtol=0, atol=1e-12)


def test_derivative_order_validation(rng):
    spline = qi.approximate(rng.normal(size=(13, 13, 13)), h=1.0)
    pts = _probe_points(rng, spline.grid, 5)
    spline.eval_derivative(pts, (1, 1, 1))  # |gamma| = 3 is fine
    with pytest.raises(ValueError):
        spline.eval_derivative(pts, (2, 1, 1))
    with pytest.raises(ValueError):
        spline.eval_derivative(pts, (-1, 0, 0))


def test_save_load_round_trip(rng, tmp_path):
    spline = qi.approximate(rng.normal(size=(13, 14, 15)), h=0.25)
    path = tmp_path / "model.qis"
    spline.save(path)
    loaded = qi.QISpline.load(path)
    assert loaded.grid == spline.grid
    np.testing.assert_array_equal(loaded.coefficients, spline.coefficients)
    # deterministic byte stream
    path2 = tmp_path / "model2.qis"
    loaded.save(path2)
    assert path.read_bytes() == path2.read_bytes()


def test_load_rejects_corrupt_files(rng, tmp_path):
    spline = qi.approximate(rng.normal(size=(13, 13, 13)), h=1.0)
    path = tmp_path / "model.qis"
    spline.save(path)
    blob = path.read_bytes()
    (tmp_path / "truncated.qis").write_bytes(blob[:-100])
    with pytest.raises(ValueError):
        qi.QISpline.load(tmp_path / "truncated.qis")
    (tmp_path / "magic.qis").write_bytes(b"XXXX" + blob[4:])
    with pytest.raises(ValueError):
        qi.QISpline.load(tmp_path / "magic.qis")


def test_compile_budget_and_size_error(rng):
    spline = qi.approximate(rng.normal(size=(13, 13, 13)), h=1.0)
    with pytest.raises(qi.SizeError) as info:
        spline.compile("dense", budget=1000)
    err = info.value
    assert err.required > err.budget == 1000
    assert "byte" in str(err)
    # auto falls back to a streamed plan under the same budget
    streamed = spline.compile("auto", budget=1000)
    assert streamed.compiled.mode == "streamed"
    assert streamed.compiled.slab_rows >= 1
    # and a dense plan within a generous budget
    dense = spline.compile("auto")
    assert dense.compiled.mode == "dense"
    assert dense.compiled.nbytes == 11 * 11 * 11 * 24 * 35 * 8


def test_active_mask_matches_index_set(grid11):
    mask = qi.active_mask(grid11)
    assert mask.shape == (15, 15, 15)
    assert int(mask.sum()) == 3211
    np.testing.assert_array_equal(mask, domain.index_set(grid11).mask())
    rng = np.random.default_rng(2)
    spline = qi.approximate(rng.normal(size=(13, 13, 13)), grid11)
    assert (spline.coefficients[~mask] == 0).all()


def test_approximate_input_validation():
    with pytest.raises(ValueError):
        qi.approximate(np.zeros((12, 13, 13)), h=1.0)  # m1 = 10 < 11
    with pytest.raises(ValueError):
        qi.approximate(np.zeros((13, 13)), h=1.0)
    with pytest.raises(ValueError):
        grid = geometry.DomainGrid(11, 11, 11, 1.0)
        qi.approximate(np.zeros((14, 13, 13)), grid)  # shape/grid mismatch


def test_thread_count_env(monkeypatch):
    assert qi.thread_count() >= 1
    assert qi.thread_count(3) == 3
    monkeypatch.setenv("BOXQI_THREADS", "2")
    assert qi.thread_count() == 2
    monkeypatch.setenv("BOXQI_THREADS", "not-a-number")
    assert qi.thread_count() == 1  # malformed env falls back to single thread
