"""P1 finite elements for the Helmholtz operator with PML and Gamma mass.

Assembles the three bilinear forms of the problem: the (PML-stretched)
stiffness, the coefficient-weighted mass, and the boundary mass on the
Gamma ring.  All matrices are complex-symmetric (not Hermitian).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .geometry import SCATTERER, Mesh, ScattererShape

# exact value of area * integral of lambda_i lambda_j lambda_m on a triangle
_W3 = np.ones((3, 3, 3)) / 120.0
for _i in range(3):
    for _j in range(3):
        for _m in range(3):
            eq = (_i == _j) + (_j == _m) + (_i == _m)
            _W3[_i, _j, _m] = {0: 1.0, 1: 2.0, 3: 6.0}[eq] / 60.0


@dataclass(eq=False)
class CoefficientField:
    """Index of refraction n(x): a core profile inside D, 1 elsewhere."""

    shape: ScattererShape
    core: Callable[[np.ndarray], np.ndarray]
    label: str = "custom"

    @staticmethod
    def constant(shape: ScattererShape, value: complex) -> "CoefficientField":
        value = complex(value)
        if value.real <= 0 or value.imag < 0:
            raise ValueError("need Re(n) > 0 and Im(n) >= 0")
        return CoefficientField(
            shape, lambda pts: np.full(len(pts), value, dtype=complex), label=f"constant({value})"
        )

    @staticmethod
    def radial_affine(shape: ScattererShape, beta1: float, beta2: float) -> "CoefficientField":
        def core(pts):
            return (beta1 + beta2 * np.linalg.norm(pts, axis=1)).astype(complex)

        field = CoefficientField(shape, core, label=f"radial_affine({beta1},{beta2})")
        rmax = shape.max_radius()
        if beta1 <= 0 or beta1 + beta2 * rmax <= 0:
            raise ValueError("radial-affine profile must keep Re(n) > 0 on D")
        return field

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        vals = np.ones(len(pts), dtype=complex)
        mask = self.shape.contains(pts)
        if np.any(mask):
            vals[mask] = self.core(pts[mask])
        return vals


@dataclass(eq=False)
class PmlProfile:
    """Quadratic radial complex stretching x -> x (1 + i sigma(r)/k)."""

    inner: float
    outer: float
    # strength balances the physical reflection floor (exp(-2 sigma0/3)
    # here) against the discretization error of the stretched layer,
    # which grows with sigma0 at fixed mesh size
    sigma0: float = 12.0

    def factors(self, r: np.ndarray, k: float) -> tuple[np.ndarray, np.ndarray]:
        """Stretch factors (s, d) with s = x~/x and d = d(r~)/dr."""
        t = np.clip((r - self.inner) / (self.outer - self.inner), 0.0, None)
        sig = (self.sigma0 / k) * t**2
        dsig = (self.sigma0 / k) * 2.0 * t / (self.outer - self.inner)
        s = 1.0 + 1j * sig
        d = 1.0 + 1j * (sig + r * dsig)
        return s, d


@dataclass(eq=False)
class AssembledSystem:
    """Sparse forms for one mesh: stiffness K, weighted mass M, Gamma mass B."""

    stiffness: sp.csc_matrix
    mass: sp.csc_matrix
    boundary_mass: sp.csc_matrix
    gamma_dofs: np.ndarray
    ndof: int
    mesh: Mesh

    def helmholtz(self, k: float) -> sp.csc_matrix:
        return (self.stiffness - k**2 * self.mass).tocsc()


def _geometry_arrays(mesh: Mesh):
    p = mesh.vertices[mesh.triangles]  # (nt, 3, 2)
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    area = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    # grad lambda_i = (y_j - y_k, x_k - x_j) / (2 area), (i,j,k) cyclic
    grads = np.empty((len(p), 3, 2))
    for i in range(3):
        j, m = (i + 1) % 3, (i + 2) % 3
        grads[:, i, 0] = p[:, j, 1] - p[:, m, 1]
        grads[:, i, 1] = p[:, m, 0] - p[:, j, 0]
    grads /= (2.0 * area)[:, None, None]
    return p, area, grads


def _coefficient_at_vertices(mesh: Mesh, n: CoefficientField | None) -> np.ndarray:
    """n sampled per triangle at vertices pulled slightly toward the centroid.

    The pull keeps interface vertices on the correct side of the jump of
    a piecewise coefficient; region tags decide which triangles see the
    core profile at all.
    """
    p = mesh.vertices[mesh.triangles]
    vals = np.ones(p.shape[:2], dtype=complex)
    if n is None:
        return vals
    mask = mesh.region == SCATTERER
    if np.any(mask):
        cent = p[mask].mean(axis=1, keepdims=True)
        pulled = p[mask] + 1e-6 * (cent - p[mask])
        vals[mask] = n.core(pulled.reshape(-1, 2)).reshape(-1, 3)
    return vals


def assemble(
    mesh: Mesh,
    n: CoefficientField | None,
    k: float,
    pml: PmlProfile | None = None,
) -> AssembledSystem:
    """Assemble K, M_n and B_Gamma on the given mesh.

    With ``pml`` set, triangles past the PML inner radius carry the
    complex-stretched gradient tensor and mass Jacobian.
    """
    p, area, grads = _geometry_arrays(mesh)
    nt = len(area)

    ke = np.einsum("t,tia,tjb,ab->tij", area, grads, grads, np.eye(2)).astype(complex)
    nv = _coefficient_at_vertices(mesh, n)
    me = np.einsum("t,tm,ijm->tij", area, nv, _W3)

    if pml is not None:
        cent = p.mean(axis=1)
        in_pml = np.linalg.norm(cent, axis=1) > pml.inner
        if np.any(in_pml):
            # assemble the layer elements directly in the complex-stretched
            # coordinates x~ = x (1 + i sigma(r)/k), evaluated at the vertices;
            # the element formulas go through verbatim in complex arithmetic
            pp = p[in_pml]
            rv = np.linalg.norm(pp, axis=2)
            s, _ = pml.factors(rv, k)
            pz = pp * s[:, :, None]
            d1 = pz[:, 1] - pz[:, 0]
            d2 = pz[:, 2] - pz[:, 0]
            az = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
            gz = np.empty((len(pz), 3, 2), dtype=complex)
            for i in range(3):
                jj, mm = (i + 1) % 3, (i + 2) % 3
                gz[:, i, 0] = pz[:, jj, 1] - pz[:, mm, 1]
                gz[:, i, 1] = pz[:, mm, 0] - pz[:, jj, 0]
            gz /= (2.0 * az)[:, None, None]
            ke[in_pml] = np.einsum("t,tia,tja->tij", az, gz, gz)
            me[in_pml] = az[:, None, None] * _W3.sum(axis=2)

    rows = np.repeat(mesh.triangles, 3, axis=1).ravel()
    cols = np.tile(mesh.triangles, 3).ravel()
    ndof = len(mesh.vertices)
    K = sp.coo_matrix((ke.ravel(), (rows, cols)), shape=(ndof, ndof)).tocsc()
    M = sp.coo_matrix((me.ravel(), (rows, cols)), shape=(ndof, ndof)).tocsc()

    ring = mesh.gamma_ring
    nxt = np.roll(ring, -1)
    lengths = np.linalg.norm(mesh.vertices[nxt] - mesh.vertices[ring], axis=1)
    br = np.concatenate([ring, nxt, ring, nxt])
    bc = np.concatenate([ring, nxt, nxt, ring])
    bv = np.concatenate(
        [lengths / 3.0, lengths / 3.0, lengths / 6.0, lengths / 6.0]
    )
    B = sp.coo_matrix((bv, (br, bc)), shape=(ndof, ndof)).tocsc()

    return AssembledSystem(
        stiffness=K, mass=M, boundary_mass=B, gamma_dofs=ring.copy(), ndof=ndof, mesh=mesh
    )


def assemble_load(mesh: Mesh, f: Callable[[np.ndarray], np.ndarray], tri_mask=None) -> np.ndarray:
    """Load vector for a smooth density f, by the edge-midpoint rule."""
    p, area, _ = _geometry_arrays(mesh)
    if tri_mask is None:
        tri_mask = np.ones(len(area), dtype=bool)
    b = np.zeros(len(mesh.vertices), dtype=complex)
    pm = p[tri_mask]
    am = area[tri_mask]
    tm = mesh.triangles[tri_mask]
    mids = 0.5 * (pm + np.roll(pm, -1, axis=1))  # midpoint opposite vertex i+2
    fv = f(mids.reshape(-1, 2)).reshape(len(pm), 3)
    # midpoint of edge (i, i+1) carries phi_i = phi_{i+1} = 1/2
    contrib = np.zeros((len(pm), 3), dtype=complex)
    for e in range(3):
        contrib[:, e] += fv[:, e] * 0.5
        contrib[:, (e + 1) % 3] += fv[:, e] * 0.5
    contrib *= (am / 3.0)[:, None]
    np.add.at(b, tm.ravel(), contrib.ravel())
    return b


class SparseLU:
    """Complex sparse LU with a residual-check solve contract."""

    def __init__(self, matrix: sp.spmatrix, residual_tol: float = 1e-10):
        self.matrix = matrix.tocsc()
        self.residual_tol = residual_tol
        try:
            self._lu = spla.splu(self.matrix.astype(complex))
        except RuntimeError as exc:
            raise np.linalg.LinAlgError(f"sparse factorization failed: {exc}") from exc

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=complex)
        x = self._lu.solve(rhs)
        denom = np.linalg.norm(rhs)
        if denom > 0:
            res = np.linalg.norm(self.matrix @ x - rhs) / denom
            if not res <= self.residual_tol:
                raise np.linalg.LinAlgError(
                    f"linear solve residual {res:.3e} exceeds {self.residual_tol:.1e}; "
                    "matrix is singular or severely ill-conditioned"
                )
        return x


def solve(matrix: sp.spmatrix, rhs: np.ndarray) -> np.ndarray:
    """Direct sparse solve with the 1e-10 relative-residual contract."""
    if matrix.shape[0] != matrix.shape[1] or matrix.shape[0] != len(rhs):
        raise ValueError("matrix/rhs shape mismatch")
    return SparseLU(matrix).solve(rhs)


@dataclass(eq=False)
class DirichletSolver:
    """Factorized solver for A x = b with zero values on fixed dofs."""

    lu: SparseLU
    free: np.ndarray
    ndof: int

    @staticmethod
    def build(matrix: sp.spmatrix, fixed_dofs: np.ndarray) -> "DirichletSolver":
        ndof = matrix.shape[0]
        mask = np.ones(ndof, dtype=bool)
        mask[fixed_dofs] = False
        free = np.nonzero(mask)[0]
        reduced = matrix.tocsr()[free][:, free].tocsc()
        return DirichletSolver(lu=SparseLU(reduced), free=free, ndof=ndof)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        x = np.zeros(self.ndof, dtype=complex)
        x[self.free] = self.lu.solve(np.asarray(rhs, dtype=complex)[self.free])
        return x


def trace_on_gamma(solution: np.ndarray, dofs: np.ndarray) -> np.ndarray:
    """Vertex values of a FEM field at the given Gamma dofs."""
    return np.asarray(solution)[dofs]


def gamma_flux(system: AssembledSystem, k: float, solution: np.ndarray) -> np.ndarray:
    """Outward normal derivative on Gamma by variational flux recovery.

    ``system`` must be assembled (PML off) on the interior domain B and
    ``solution`` must solve the Helmholtz equation there; then
    (grad u, grad v) - k^2 (n u, v) = <du/dnu, v> for all v, and the
    flux is recovered by inverting the Gamma mass matrix.
    """
    resid = (system.stiffness @ solution - k**2 * (system.mass @ solution))[system.gamma_dofs]
    ring = system.gamma_dofs
    Bring = system.boundary_mass[ring][:, ring].tocsc()
    return spla.spsolve(Bring, resid)


def point_source_field(
    full_system: AssembledSystem,
    k: float,
    source: np.ndarray,
    patch_radius: float = 0.3,
) -> tuple[np.ndarray, np.ndarray]:
    """Field of a free-space point source at ``source``, radiated through the PML.

    The analytic field is collocated as Dirichlet data on the mesh
    vertices within ``patch_radius`` of the source, and the FEM+PML
    system propagates it through the rest of the domain.  This sidesteps
    the delta singularity while exercising bulk propagation and the
    absorbing layer.  Returns (solution vector, the source location).
    """
    from .special import fundamental_solution

    mesh = full_system.mesh
    x0 = np.asarray(source, dtype=float)
    d = np.linalg.norm(mesh.vertices - x0, axis=1)
    patch = np.nonzero((d <= patch_radius) & (d > 1e-12))[0]
    if len(patch) == 0:
        raise ValueError("no mesh vertices inside the source patch")
    values = np.zeros(full_system.ndof, dtype=complex)
    values[patch] = fundamental_solution(mesh.vertices[patch], x0, k)

    A = full_system.helmholtz(k)
    fixed = np.concatenate([mesh.outer_boundary_vertices(), patch, np.nonzero(d <= 1e-12)[0]])
    solver = DirichletSolver.build(A, fixed)
    u = solver.solve(-(A @ values))
    return u + values, x0
