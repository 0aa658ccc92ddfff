"""Shared fixtures: scenes, meshes and datasets reused across test modules.

Everything expensive is session-scoped; the disc at h = 0.1 is the
workhorse scene for unit tests, with coarser or smaller variants where a
test only needs the plumbing.
"""

import numpy as np
import pytest

from steklov.eigensolver import SteklovPencil
from steklov.fem import CoefficientField, assemble
from steklov.forward import simulate_cauchy_data
from steklov.geometry import ScattererShape, generate_mesh, interior_submesh, make_scene


@pytest.fixture(scope="session")
def disc_shape():
    return ScattererShape.disc()


@pytest.fixture(scope="session")
def disc_scene(disc_shape):
    return make_scene(disc_shape)


@pytest.fixture(scope="session")
def disc_mesh(disc_shape, disc_scene):
    """Full (PML-truncated) disc mesh at h = 0.1."""
    return generate_mesh(disc_shape, disc_scene, 0.1)


@pytest.fixture(scope="session")
def disc_interior_mesh(disc_mesh, disc_scene):
    """Interior (inside Gamma) part of the h = 0.1 disc mesh."""
    return interior_submesh(disc_mesh, disc_scene.gamma_radius)[0]


@pytest.fixture(scope="session")
def disc_interior_system(disc_interior_mesh, disc_shape):
    """K, M_n, B_Gamma on the interior disc mesh with n = 5."""
    return assemble(disc_interior_mesh, CoefficientField.constant(disc_shape, 5.0), 1.0)


@pytest.fixture(scope="session")
def disc_pencil(disc_interior_system):
    return SteklovPencil(disc_interior_system, 1.0)


@pytest.fixture(scope="session")
def small_scene(disc_shape):
    """Reduced source/receiver counts for cheap data-handling tests."""
    return make_scene(disc_shape, n_sources=8, n_receivers=32)


@pytest.fixture(scope="session")
def small_disc_dataset(disc_shape, small_scene):
    """Clean simulated Cauchy data, disc with n = 5, 8 sources, h = 0.1."""
    n_field = CoefficientField.constant(disc_shape, 5.0)
    return simulate_cauchy_data(disc_shape, n_field, small_scene, 0.1)


@pytest.fixture
def rng():
    return np.random.default_rng(42)
