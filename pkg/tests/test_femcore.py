"""Element matrices, sparse solves, flux recovery and the PML layer."""

import numpy as np
import pytest
import scipy.sparse as sp
from scipy import special as ss

from steklov.fem import (
    CoefficientField,
    DirichletSolver,
    PmlProfile,
    SparseLU,
    assemble,
    assemble_load,
    gamma_flux,
    point_source_field,
    solve,
    trace_on_gamma,
)
from steklov.geometry import Mesh, ScattererShape
from steklov.special import fundamental_solution


def _unit_triangle_mesh():
    return Mesh(
        vertices=np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
        triangles=np.array([[0, 1, 2]]),
        region=np.array([0]),
        gamma_ring=np.array([], dtype=np.int64),
        h=1.0,
    )


def test_p1_element_matrices():
    # reference P1 matrices on the unit right triangle
    system = assemble(_unit_triangle_mesh(), None, 1.0)
    K_ref = 0.5 * np.array([[2.0, -1.0, -1.0], [-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0]])
    M_ref = (0.5 / 12.0) * np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]])
    np.testing.assert_allclose(system.stiffness.toarray(), K_ref, atol=1e-14)
    np.testing.assert_allclose(system.mass.toarray(), M_ref, atol=1e-14)


def test_mass_linear_in_constant_coefficient():
    mesh = _unit_triangle_mesh()
    shape = ScattererShape.disc()  # the triangle sits inside the unit disc
    m1 = assemble(mesh, CoefficientField.constant(shape, 1.0), 1.0).mass.toarray()
    m5 = assemble(mesh, CoefficientField.constant(shape, 5.0), 1.0).mass.toarray()
    np.testing.assert_allclose(m5, 5.0 * m1, atol=1e-14)
    # stiffness does not see the coefficient
    k1 = assemble(mesh, CoefficientField.constant(shape, 1.0), 1.0).stiffness.toarray()
    k5 = assemble(mesh, CoefficientField.constant(shape, 5.0), 1.0).stiffness.toarray()
    np.testing.assert_allclose(k5, k1, atol=1e-14)


def test_coefficient_field_validation():
    shape = ScattererShape.disc()
    with pytest.raises(ValueError):
        CoefficientField.constant(shape, -1.0)
    with pytest.raises(ValueError):
        CoefficientField.constant(shape, 2.0 - 1.0j)  # absorption must be Im >= 0
    n = CoefficientField.radial_affine(shape, 4.0, 2.0)
    pts = np.array([[0.5, 0.0], [0.0, 0.0], [1.5, 0.0]])
    # 4 + 2|x| inside D, 1 outside
    np.testing.assert_allclose(n(pts), [5.0, 4.0, 1.0])


def test_weighted_mass_integrates_radial_profile(disc_interior_mesh, disc_shape):
    # ones^T M_n ones = integral of n over B:
    # (area(B) - area(D)) + int_D (4 + 2|x|) = 3 pi + 4 pi + 4 pi / 3
    system = assemble(
        disc_interior_mesh, CoefficientField.radial_affine(disc_shape, 4.0, 2.0), 1.0
    )
    ones = np.ones(system.ndof)
    total = (ones @ (system.mass @ ones)).real
    exact = 3 * np.pi + 4 * np.pi + 4 * np.pi / 3
    assert total == pytest.approx(exact, rel=5e-3)


def test_boundary_mass_integrates_circumference(disc_interior_system):
    B = disc_interior_system.boundary_mass
    ones = np.ones(disc_interior_system.ndof)
    assert (ones @ (B @ ones)).real == pytest.approx(4 * np.pi, rel=1e-3)
    # supported on Gamma dofs only
    rows = np.unique(B.tocoo().row)
    assert set(rows) <= set(disc_interior_system.gamma_dofs)


def test_assemble_load_constant_density(disc_interior_mesh):
    b = assemble_load(disc_interior_mesh, lambda pts: np.ones(len(pts), dtype=complex))
    # sum of the load of f = 1 equals the mesh area
    area = disc_interior_mesh.triangle_areas().sum()
    assert b.sum().real == pytest.approx(area, rel=1e-12)


def test_sparse_solve_contract(rng):
    n = 50
    A = sp.random(n, n, density=0.2, random_state=7) + sp.eye(n) * 5.0
    x_ref = rng.standard_normal(n)
    b = A @ x_ref
    x = solve(A.tocsc(), b)
    np.testing.assert_allclose(x.real, x_ref, atol=1e-9)
    with pytest.raises(ValueError):
        solve(A.tocsc(), b[:-1])


def test_singular_solve_raises():
    A = sp.csc_matrix(np.array([[1.0, 1.0], [1.0, 1.0]]))
    with pytest.raises(np.linalg.LinAlgError):
        SparseLU(A).solve(np.array([1.0, 0.0]))


def test_dirichlet_solver_zeroes_fixed_dofs():
    n = 20
    A = sp.eye(n, format="csc") * 2.0 + sp.diags([1.0] * (n - 1), 1) + sp.diags([1.0] * (n - 1), -1)
    fixed = np.array([0, n - 1])
    solver = DirichletSolver.build(A.tocsc(), fixed)
    x = solver.solve(np.ones(n))
    assert np.all(x[fixed] == 0)
    free = np.setdiff1d(np.arange(n), fixed)
    resid = (A @ x - np.ones(n))[free]
    assert np.linalg.norm(resid) < 1e-9


def test_trace_on_gamma():
    sol = np.arange(10.0)
    np.testing.assert_array_equal(trace_on_gamma(sol, np.array([3, 7])), [3.0, 7.0])


def test_gamma_flux_bessel_field(disc_interior_mesh):
    # u = J0(k r) solves Helmholtz with n = 1; normal flux on Gamma is
    # d/dr J0(kr) at r = 2, i.e. -J1(2)
    system = assemble(disc_interior_mesh, None, 1.0)
    r = np.linalg.norm(disc_interior_mesh.vertices, axis=1)
    u = ss.jv(0, r).astype(complex)
    flux = gamma_flux(system, 1.0, u)
    exact = -ss.jv(1, 2.0)
    np.testing.assert_allclose(flux.real, exact, rtol=0.03)
    assert np.abs(flux.imag).max() < 1e-10


def test_pml_absorbs_point_source(disc_mesh, disc_scene):
    # the analytic point-source field radiated through the PML matches
    # the fundamental solution in the bulk
    pml = PmlProfile(disc_scene.pml_inner, disc_scene.pml_outer)
    system = assemble(disc_mesh, None, 1.0, pml=pml)
    x0 = np.array([3.0, 0.0])
    sol, _ = point_source_field(system, 1.0, x0)
    on_gamma = np.abs(np.linalg.norm(disc_mesh.vertices, axis=1) - 2.0) < 1e-9
    ref = fundamental_solution(disc_mesh.vertices[on_gamma], x0, 1.0)
    err = np.linalg.norm(sol[on_gamma] - ref) / np.linalg.norm(ref)
    assert err < 0.03


def test_pml_profile_factors():
    pml = PmlProfile(3.5, 4.5)
    r = np.array([3.0, 4.0])
    s, d = pml.factors(r, 1.0)
    # no stretching before the layer; complex stretching inside it
    assert s[0] == 1.0 and d[0] == 1.0
    assert s[1].imag > 0 and d[1].imag > 0
