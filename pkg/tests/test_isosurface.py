"""Tetrahedral isosurface extraction and OBJ/PLY serialization."""

import numpy as np
import pytest

from boxqi import domain, geometry, isosurface as iso, qi, volume


@pytest.fixture(scope="module")
def plane_spline():
    """Spline reproducing s(x, y, z) = z on [0, 1]^3 (cubic reproduction
    makes this exact)."""
    grid = geometry.DomainGrid(12, 12, 12, 1 / 12)
    pts = domain.data_points(grid)
    return qi.approximate(pts[..., 2], grid).compile()


@pytest.fixture(scope="module")
def bump_setup():
    samples, grid, fn = volume.sample_test_function("f2", 16)
    return qi.approximate(samples, grid).compile(), fn


def test_request_validation():
    with pytest.raises(ValueError):
        iso.IsoRequest(0.5, resolution=1)
    req = iso.IsoRequest(0.5)
    assert req.resolution == 64 and not req.refine


def test_plane_isosurface_is_flat(plane_spline):
    # 17/32 sits mid-cell at resolution 16: no degenerate crossings
    rho = 17 / 32
    mesh = iso.extract(plane_spline, iso.IsoRequest(rho, resolution=16))
    assert len(mesh.triangles) > 0
    np.testing.assert_allclose(mesh.vertices[:, 2], rho, rtol=0, atol=1e-12)
    # winding: triangle normals face the above-isovalue side (+z here)
    v = mesh.vertices
    t = mesh.triangles
    normals = np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]])
    assert (normals[:, 2] > 0).all()
    # the flat mesh tiles the unit square: areas sum to 1
    np.testing.assert_allclose(
        0.5 * np.linalg.norm(normals, axis=1).sum(), 1.0, rtol=1e-10)


def test_plane_isovalue_on_lattice_stays_flat(plane_spline):
    """rho = 0.5 coincides with sampling planes at this resolution; the
    crossings degenerate onto lattice corners but the mesh must stay flat
    and keep its edge-use invariant."""
    mesh = iso.extract(plane_spline, iso.IsoRequest(0.5, resolution=16))
    assert len(mesh.triangles) > 0
    np.testing.assert_allclose(mesh.vertices[:, 2], 0.5, rtol=0, atol=1e-12)
    assert iso.edge_use_counts(mesh).max() <= 2


def test_mesh_invariants(bump_setup):
    spline, _ = bump_setup
    mesh = iso.extract(spline, iso.IsoRequest(0.3, resolution=12))
    v, t = mesh.vertices, mesh.triangles
    assert len(v) > 0
    assert t.min() >= 0 and t.max() < len(v)
    # every vertex referenced, no degenerate triangles
    assert len(np.unique(t)) == len(v)
    areas = 0.5 * np.linalg.norm(
        np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]]), axis=1)
    assert areas.min() > 0
    # manifold-ish: each undirected edge used by at most two triangles
    assert iso.edge_use_counts(mesh).max() <= 2
    # consistent orientation: no directed edge repeats
    directed = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    keys = directed[:, 0].astype(np.int64) * len(v) + directed[:, 1]
    assert len(np.unique(keys)) == len(keys)


def test_vertices_interpolate_isovalue(bump_setup):
    spline, _ = bump_setup
    rho = 0.3
    mesh = iso.extract(spline, iso.IsoRequest(rho, resolution=12))
    assert mesh.residual == pytest.approx(
        np.abs(spline.eval(mesh.vertices) - rho).max())
    # halving the cell size cuts the residual roughly in half
    finer = iso.extract(spline, iso.IsoRequest(rho, resolution=24))
    assert finer.residual < 0.62 * mesh.residual


def test_refinement_pins_vertices_to_the_level_set(bump_setup):
    spline, _ = bump_setup
    mesh = iso.extract(spline, iso.IsoRequest(0.3, resolution=8,
                                              refine=True))
    assert mesh.residual <= 1e-7


def test_reference_scalars_channel(bump_setup):
    spline, fn = bump_setup
    req = iso.IsoRequest(0.3, resolution=10, reference=fn.on_omega)
    mesh = iso.extract(spline, req)
    assert mesh.scalars is not None and mesh.scalars.shape == (
        len(mesh.vertices),)
    expected = np.abs(fn.on_omega(mesh.vertices)
                      - spline.eval(mesh.vertices))
    np.testing.assert_allclose(mesh.scalars, expected, rtol=0, atol=1e-15)


def test_empty_level_set(bump_setup):
    spline, _ = bump_setup
    mesh = iso.extract(spline, iso.IsoRequest(9.0, resolution=8))
    assert mesh.vertices.shape == (0, 3)
    assert mesh.triangles.shape == (0, 3)


def test_extraction_is_deterministic(bump_setup):
    spline, _ = bump_setup
    a = iso.extract(spline, iso.IsoRequest(0.3, resolution=10))
    b = iso.extract(spline, iso.IsoRequest(0.3, resolution=10), threads=4)
    np.testing.assert_array_equal(a.vertices, b.vertices)
    np.testing.assert_array_equal(a.triangles, b.triangles)


def test_obj_round_trip(bump_setup):
    spline, _ = bump_setup
    mesh = iso.extract(spline, iso.IsoRequest(0.3, resolution=10))
    back = iso.read_obj(iso.write_obj(mesh))
    np.testing.assert_array_equal(back.vertices, mesh.vertices)
    np.testing.assert_array_equal(back.triangles, mesh.triangles)
    # tolerate the face-with-slashes OBJ flavor
    assert iso.read_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1/1 2/2 3/3\n"
                        ).triangles.tolist() == [[0, 1, 2]]
    empty = iso.read_obj(iso.write_obj(
        iso.TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), np.int64))))
    assert len(empty.vertices) == 0


def test_ply_round_trip(bump_setup):
    spline, fn = bump_setup
    mesh = iso.extract(spline, iso.IsoRequest(0.3, resolution=10,
                                              reference=fn.on_omega))
    blob = iso.write_ply(mesh)
    assert blob.startswith(b"ply\n")
    back = iso.read_ply(blob)
    np.testing.assert_array_equal(back.vertices, mesh.vertices)
    np.testing.assert_array_equal(back.triangles, mesh.triangles)
    np.testing.assert_array_equal(back.scalars, mesh.scalars)
    # without a scalar channel
    plain = iso.TriangleMesh(mesh.vertices, mesh.triangles)
    again = iso.read_ply(iso.write_ply(plain))
    assert again.scalars is None
    with pytest.raises(ValueError):
        iso.read_ply(b"not a ply stream")


def test_write_mesh_dispatch(bump_setup, tmp_path):
    spline, _ = bump_setup
    mesh = iso.extract(spline, iso.IsoRequest(0.3, resolution=8))
    obj_path = tmp_path / "m.obj"
    ply_path = tmp_path / "m.ply"
    iso.write_mesh(mesh, obj_path)
    iso.write_mesh(mesh, ply_path)
    assert obj_path.read_text().startswith("v ")
    assert ply_path.read_bytes().startswith(b"ply\n")
    forced = tmp_path / "m.dat"
    iso.write_mesh(mesh, forced, format="obj")
    assert forced.read_text() == obj_path.read_text()
    with pytest.raises(ValueError):
        iso.write_mesh(mesh, tmp_path / "m.stl")
