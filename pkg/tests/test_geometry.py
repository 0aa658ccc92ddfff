"""Scene configuration, mesh generation and quadrature tests."""

import numpy as np
import pytest

from steklov.geometry import (
    PML,
    SCATTERER,
    ScattererShape,
    boundary_quadrature,
    exterior_submesh,
    generate_mesh,
    interior_submesh,
    make_scene,
    read_mesh,
    receiver_setup,
    validate_mesh,
    write_mesh,
)


def test_shape_areas():
    assert ScattererShape.disc().area() == pytest.approx(np.pi)
    assert ScattererShape.square().area() == pytest.approx(2.0)
    assert ScattererShape.lshape().area() == pytest.approx(3.0)


def test_shape_from_name():
    for name in ("disc", "square", "lshape"):
        assert ScattererShape.from_name(name).kind == name
    with pytest.raises(ValueError):
        ScattererShape.from_name("pentagon")


def test_shape_contains():
    # the square is the diamond |x1| + |x2| <= 1 (area 2)
    sq = ScattererShape.square()
    inside = np.array([[0.0, 0.0], [0.4, 0.4], [0.9, 0.0]])
    outside = np.array([[0.6, 0.6], [0.0, -1.1], [1.5, 1.5]])
    assert np.all(sq.contains(inside))
    assert not np.any(sq.contains(outside))
    ell = ScattererShape.lshape()
    # the notch quadrant is outside the L
    assert not ell.contains(np.array([[0.5, -0.5]]))[0]
    assert ell.contains(np.array([[0.5, 0.5], [-0.5, -0.5], [-0.5, 0.5]])).all()


def test_make_scene_defaults(disc_shape):
    cfg = make_scene(disc_shape)
    assert cfg.wavenumber == 1.0
    assert cfg.gamma_radius == 2.0
    assert cfg.source_radius == 3.0
    assert cfg.n_sources == cfg.n_receivers == 100
    pts = cfg.source_points()
    assert pts.shape == (100, 2)
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 3.0)


def test_make_scene_rejects_bad_ordering(disc_shape):
    with pytest.raises(ValueError):
        make_scene(disc_shape, source_radius=1.5)  # C inside Gamma
    with pytest.raises(ValueError):
        make_scene(disc_shape, pml_inner=5.0)  # PML starts outside its own end
    with pytest.raises(ValueError):
        make_scene(disc_shape, n_sources=0)


@pytest.mark.parametrize("name", ["disc", "square", "lshape"])
def test_generated_mesh_is_valid(name):
    shape = ScattererShape.from_name(name)
    cfg = make_scene(shape)
    mesh = generate_mesh(shape, cfg, 0.2)
    validate_mesh(mesh)
    assert set(np.unique(mesh.region)) <= {SCATTERER, 1, PML}
    # Gamma ring sits on the measurement circle
    np.testing.assert_allclose(
        np.linalg.norm(mesh.vertices[mesh.gamma_ring], axis=1), cfg.gamma_radius
    )


@pytest.mark.parametrize("name", ["disc", "square", "lshape"])
def test_scatterer_area_second_order(name):
    shape = ScattererShape.from_name(name)
    cfg = make_scene(shape)
    errs = {}
    for h in (0.2, 0.1):
        mesh = generate_mesh(shape, cfg, h)
        errs[h] = abs(mesh.scatterer_area() - shape.area())
        assert errs[h] < 0.05 * shape.area()
    # straight-sided shapes are represented exactly; the disc converges O(h^2)
    if name == "disc":
        assert errs[0.1] < 0.5 * errs[0.2]
    else:
        assert errs[0.1] < 1e-9


def test_boundary_quadrature_integrates_exactly(disc_mesh):
    pts, w, normals = boundary_quadrature(disc_mesh)
    R = 2.0
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), R)
    # arc-length weights sum to the circumference exactly
    assert w.sum() == pytest.approx(2 * np.pi * R, rel=1e-12)
    # outward unit normals
    np.testing.assert_allclose(np.linalg.norm(normals, axis=1), 1.0, atol=1e-12)
    assert np.all(np.sum(normals * pts, axis=1) > 0)
    # int_Gamma x1^2 ds = pi R^3
    assert np.sum(w * pts[:, 0] ** 2) == pytest.approx(np.pi * R**3, rel=1e-3)


def test_interior_exterior_partition(disc_mesh, disc_scene):
    interior, _ = interior_submesh(disc_mesh, disc_scene.gamma_radius)
    exterior, _ = exterior_submesh(disc_mesh, disc_scene.gamma_radius)
    assert len(interior.triangles) + len(exterior.triangles) == len(disc_mesh.triangles)
    validate_mesh(interior)
    validate_mesh(exterior)
    assert np.all(np.linalg.norm(interior.vertices, axis=1) <= disc_scene.gamma_radius + 1e-9)
    # the Gamma ring survives the restriction
    assert len(interior.gamma_ring) == len(disc_mesh.gamma_ring)


def test_mesh_round_trip(tmp_path, disc_interior_mesh):
    path = tmp_path / "mesh.txt"
    write_mesh(disc_interior_mesh, path)
    back = read_mesh(path)
    np.testing.assert_array_equal(back.vertices, disc_interior_mesh.vertices)
    np.testing.assert_array_equal(back.triangles, disc_interior_mesh.triangles)
    np.testing.assert_array_equal(back.region, disc_interior_mesh.region)
    np.testing.assert_array_equal(back.gamma_ring, disc_interior_mesh.gamma_ring)
    assert back.h == disc_interior_mesh.h


def test_read_mesh_rejects_truncated(tmp_path, disc_interior_mesh):
    path = tmp_path / "mesh.txt"
    write_mesh(disc_interior_mesh, path)
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:-3]) + "\n")
    with pytest.raises(ValueError):
        read_mesh(path)


def test_receiver_setup(disc_interior_mesh):
    idx, angles, weights = receiver_setup(disc_interior_mesh, 40)
    assert len(idx) == len(angles) == len(weights) == 40
    pts = disc_interior_mesh.vertices[idx]
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 2.0)
    assert np.all(np.diff(angles) > 0)  # sorted, distinct receivers
    assert weights.sum() == pytest.approx(2 * np.pi * 2.0, rel=1e-2)
