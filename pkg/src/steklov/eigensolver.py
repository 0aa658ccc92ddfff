"""Steklov eigenvalue computation for the pencil (K - k^2 M_n) + lambda B_Gamma.

Three routes are provided: a contour-integral spectral indicator search
with recursive subdivision (the workhorse for complex regions), a dense
generalized eigensolve after Schur reduction onto the Gamma boundary
(cross-check oracle), and a closed-form Bessel route for concentric-disc
media (exact oracle).  All three reduce work to the Gamma degrees of
freedom: the boundary mass B_Gamma vanishes on interior dofs, so
resolvent applications live entirely on the Schur complement.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .fem import AssembledSystem, SparseLU
from .special import bessel_j, bessel_j_complex, bessel_jp, bessel_jp_complex, bessel_y, bessel_yp


@dataclass(eq=False)
class SearchRegion:
    """Rectangle in the complex plane to search for eigenvalues."""

    re_min: float
    re_max: float
    im_min: float = -1e-3
    im_max: float = 1e-3
    max_depth: int = 60
    indicator_tol: float = 1e-2

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError("search region must have positive width and height")

    @staticmethod
    def interval(a: float, b: float, **kw) -> "SearchRegion":
        # degenerate real searches run as thin rectangles: one code path
        return SearchRegion(a, b, -1e-3, 1e-3, **kw)

    def contains(self, lam: complex, margin: float = 0.0) -> bool:
        return (
            self.re_min - margin <= lam.real <= self.re_max + margin
            and self.im_min - margin <= lam.imag <= self.im_max + margin
        )


@dataclass(eq=False)
class EigenvalueSet:
    """Computed eigenvalues with provenance and (for FEM routes) residuals."""

    eigenvalues: np.ndarray
    method: str
    multiplicities: np.ndarray | None = None
    residuals: np.ndarray | None = None
    flagged_regions: list = field(default_factory=list)

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=complex)
        order = np.lexsort((ev.imag, ev.real))
        self.eigenvalues = ev[order]
        if self.multiplicities is not None:
            self.multiplicities = np.asarray(self.multiplicities)[order]
        if self.residuals is not None:
            self.residuals = np.asarray(self.residuals)[order]

    def __len__(self):
        return len(self.eigenvalues)

    def expanded(self) -> np.ndarray:
        """Eigenvalues repeated according to multiplicity."""
        if self.multiplicities is None:
            return self.eigenvalues.copy()
        return np.repeat(self.eigenvalues, self.multiplicities)


def largest_negative_eigenvalue(eigs: EigenvalueSet) -> complex | None:
    """The negative(-real-part) eigenvalue closest to zero, or None."""
    ev = eigs.eigenvalues
    neg = ev[ev.real < 0]
    if len(neg) == 0:
        return None
    return complex(neg[np.argmax(neg.real)])


class SteklovPencil:
    """A(lambda) = (K - k^2 M_n) + lambda B_Gamma, Schur-reduced onto Gamma.

    Built from a system assembled on the interior domain B (no PML).
    The interior block of K - k^2 M_n is factorized once; the dense
    Schur complement S and the Gamma mass block drive all resolvent
    applications, since B_Gamma f is supported on Gamma dofs.
    """

    def __init__(self, system: AssembledSystem, k: float):
        self.system = system
        self.k = k
        A0 = (system.stiffness - k**2 * system.mass).tocsr()
        ndof = system.ndof
        gamma = np.asarray(system.gamma_dofs)
        mask = np.zeros(ndof, dtype=bool)
        mask[gamma] = True
        interior = np.nonzero(~mask)[0]
        self.gamma = gamma
        self.interior = interior
        self.A0 = A0.tocsc()
        A_ii = A0[interior][:, interior].tocsc()
        A_ig = A0[interior][:, gamma].tocsc()
        A_gi = A0[gamma][:, interior].tocsc()
        A_gg = A0[gamma][:, gamma].toarray()
        try:
            self._lu_ii = SparseLU(A_ii)
        except np.linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError(
                "interior block singular: k^2 appears to be a Dirichlet eigenvalue"
            ) from exc
        X = np.column_stack(
            [self._lu_ii.solve(A_ig[:, j].toarray().ravel()) for j in range(A_ig.shape[1])]
        )
        self.schur = A_gg - A_gi @ X
        self._A_ig = A_ig
        self.B_gg = system.boundary_mass[gamma][:, gamma].toarray().astype(complex)
        self.B = system.boundary_mass.tocsc()

    @property
    def n_gamma(self) -> int:
        return len(self.gamma)

    def full_vector(self, w_gamma: np.ndarray) -> np.ndarray:
        """Lift a Gamma vector to a full eigenvector candidate.

        Uses w_I = -A_II^{-1} A_IG w_G, exact for eigenvectors of the
        reduced problem.
        """
        w = np.zeros(self.system.ndof, dtype=complex)
        w[self.gamma] = w_gamma
        w[self.interior] = -self._lu_ii.solve(self._A_ig @ w_gamma)
        return w

    def residual(self, lam: complex, w: np.ndarray) -> float:
        """|| (A0 + lam B) w || / ||w|| on the full dof set."""
        r = self.A0 @ w + lam * (self.B @ w)
        return float(np.linalg.norm(r) / np.linalg.norm(w))

    def reduced(self, lam: complex) -> np.ndarray:
        return self.schur + lam * self.B_gg


def schur_dense_eigenvalues(
    pencil: SteklovPencil,
    region: SearchRegion,
    cluster_tol: float = 1e-6,
    residual_tol: float = 1e-8,
) -> EigenvalueSet:
    """All pencil eigenvalues in the region by a dense solve of S g = -lambda B g."""
    vals, vecs = la.eig(pencil.schur, -pencil.B_gg)
    keep = np.isfinite(vals) & np.array([region.contains(v) for v in vals])
    vals, vecs = vals[keep], vecs[:, keep]
    eigenvalues, mults, residuals = [], [], []
    order = np.lexsort((vals.imag, vals.real))
    vals, vecs = vals[order], vecs[:, order]
    i = 0
    while i < len(vals):
        j = i + 1
        while j < len(vals) and abs(vals[j] - vals[i]) < cluster_tol:
            j += 1
        lam = vals[i:j].mean()
        w = pencil.full_vector(vecs[:, i])
        res = pencil.residual(lam, w)
        eigenvalues.append(lam)
        mults.append(j - i)
        residuals.append(res)
        i = j
    out = EigenvalueSet(
        np.array(eigenvalues, dtype=complex),
        method="SchurDense",
        multiplicities=np.array(mults, dtype=int),
        residuals=np.array(residuals),
    )
    bad = [r for r in out.residuals if not r <= residual_tol]
    if bad:
        raise np.linalg.LinAlgError(
            f"dense eigensolve residual {max(bad):.2e} exceeds {residual_tol:.1e}"
        )
    return out


# -- spectral indicator method ----------------------------------------------


def _contour_nodes(re0, re1, im0, im1, n_per_edge):
    """Trapezoid nodes and weights for the oriented rectangle boundary."""
    corners = [re0 + 1j * im0, re1 + 1j * im0, re1 + 1j * im1, re0 + 1j * im1]
    nodes, weights = [], []
    for c0, c1 in zip(corners, corners[1:] + corners[:1]):
        t = (np.arange(n_per_edge) + 0.5) / n_per_edge
        nodes.append(c0 + t * (c1 - c0))
        weights.append(np.full(n_per_edge, (c1 - c0) / n_per_edge))
    return np.concatenate(nodes), np.concatenate(weights)


def _apply_projector(pencil: SteklovPencil, box, probes: np.ndarray, n_per_edge: int = 32):
    """Contour-integral spectral projector applied to probe columns.

    (1/2 pi i) * contour integral of (S + lam B)^{-1} B probes d lam;
    equals the spectral projector onto eigenvectors inside the box.
    """
    nodes, weights = _contour_nodes(*box, n_per_edge)
    rhs = pencil.B_gg @ probes
    acc = np.zeros_like(rhs, dtype=complex)
    for lam, w in zip(nodes, weights):
        acc += w * la.solve(pencil.reduced(lam), rhs)
    return acc / (2j * np.pi)


def _refine_leaf(pencil: SteklovPencil, box, rng, n_probes: int = 8, svd_tol: float = 1e-5):
    """Rayleigh-Ritz on the projected subspace of a converged leaf box.

    Returns (eigenvalues, multiplicity-expanded Gamma vectors).
    """
    n = pencil.n_gamma
    probes = rng.standard_normal((n, n_probes)) + 1j * rng.standard_normal((n, n_probes))
    Q = _apply_projector(pencil, box, probes)
    U, s, _ = np.linalg.svd(Q, full_matrices=False)
    rank = int(np.sum(s > svd_tol * s[0])) if s[0] > 0 else 0
    if rank == 0:
        return np.array([], dtype=complex), np.zeros((n, 0), dtype=complex)
    U = U[:, :rank]
    Su = U.conj().T @ (pencil.schur @ U)
    Bu = U.conj().T @ (pencil.B_gg @ U)
    vals, vecs = la.eig(Su, -Bu)
    return vals, U @ vecs


def sim_eigenvalues(
    pencil: SteklovPencil,
    region: SearchRegion,
    n_per_edge: int = 32,
    leaf_diameter: float = 1e-4,
    residual_tol: float = 1e-8,
    cluster_tol: float = 1e-6,
    seed: int = 7,
) -> EigenvalueSet:
    """Eigenvalues in the region by recursive contour-indicator bisection.

    Each sub-rectangle gets the indicator ||P f|| / ||f|| for a seeded
    random probe f, where P is the contour spectral projector.  Boxes
    above the tolerance split along their longer side; boxes smaller
    than ``leaf_diameter`` are resolved by a multi-probe Rayleigh-Ritz
    step that also recovers multiplicities.  An indicator within 10x of
    the tolerance is re-checked with a second probe before discarding.
    """
    rng = np.random.default_rng(seed)
    n = pencil.n_gamma
    found: list[tuple[complex, np.ndarray]] = []
    flagged = []

    def probe():
        return (rng.standard_normal((n, 1)) + 1j * rng.standard_normal((n, 1)))

    stack = [((region.re_min, region.re_max, region.im_min, region.im_max), 0)]
    while stack:
        box, depth = stack.pop()
        re0, re1, im0, im1 = box
        diam = np.hypot(re1 - re0, im1 - im0)
        f = probe()
        ind = np.linalg.norm(_apply_projector(pencil, box, f, n_per_edge)) / np.linalg.norm(f)
        if ind < region.indicator_tol:
            if ind > 0.1 * region.indicator_tol:
                f2 = probe()
                ind2 = np.linalg.norm(
                    _apply_projector(pencil, box, f2, n_per_edge)
                ) / np.linalg.norm(f2)
                if ind2 < region.indicator_tol:
                    continue
            else:
                continue
        if diam < leaf_diameter:
            vals, vecs = _refine_leaf(pencil, box, rng)
            # a nearby outside eigenvalue can leak into the leaf projector;
            # keep only Ritz values the leaf itself is responsible for
            margin = 0.25 * diam
            leaf_id = len(found) + 1
            for v, w in zip(vals, vecs.T):
                if re0 - margin <= v.real <= re1 + margin and im0 - margin <= v.imag <= im1 + margin:
                    found.append((v, w, leaf_id))
            continue
        if depth >= region.max_depth:
            flagged.append(box)
            continue
        if (re1 - re0) >= (im1 - im0):
            mid = 0.5 * (re0 + re1)
            stack.append(((re0, mid, im0, im1), depth + 1))
            stack.append(((mid, re1, im0, im1), depth + 1))
        else:
            mid = 0.5 * (im0 + im1)
            stack.append(((re0, re1, im0, mid), depth + 1))
            stack.append(((re0, re1, mid, im1), depth + 1))

    # deduplicate across neighboring leaves, keep in-region values only
    found = [t for t in found if region.contains(t[0], margin=cluster_tol)]
    found.sort(key=lambda t: (t[0].real, t[0].imag))
    eigenvalues, mults, residuals = [], [], []
    i = 0
    while i < len(found):
        j = i + 1
        while j < len(found) and abs(found[j][0] - found[i][0]) < cluster_tol:
            j += 1
        group = found[i:j]
        lam = np.mean([v for v, _, _ in group])
        # a degenerate eigenvalue shows up several times within one leaf's
        # Rayleigh-Ritz step; repeats across different leaves are duplicates
        leaf_counts: dict[int, int] = {}
        for _, _, lid in group:
            leaf_counts[lid] = leaf_counts.get(lid, 0) + 1
        w_full = pencil.full_vector(group[0][1])
        eigenvalues.append(lam)
        mults.append(max(leaf_counts.values()))
        residuals.append(pencil.residual(lam, w_full))
        i = j
    out = EigenvalueSet(
        np.array(eigenvalues, dtype=complex),
        method="SIM",
        multiplicities=np.array(mults, dtype=int),
        residuals=np.array(residuals),
        flagged_regions=flagged,
    )
    bad = [r for r in out.residuals if not r <= residual_tol]
    if bad:
        raise np.linalg.LinAlgError(
            f"refined eigenpair residual {max(bad):.2e} exceeds {residual_tol:.1e}"
        )
    return out


# -- concentric-disc closed form --------------------------------------------


def bessel_oracle_eigenvalues(
    n_core: complex,
    core_radius: float,
    outer_radius: float,
    k: float,
    region: SearchRegion,
    max_mode: int = 200,
) -> EigenvalueSet:
    """Exact Steklov eigenvalues for a constant-index core disc in B.

    Per Fourier mode m the radial solution is J_m(k sqrt(n_core) r) in
    the core and c1 J_m(kr) + c2 Y_m(kr) in the annulus, with (c1, c2)
    fixed by value/derivative matching at the core radius; the
    eigenvalue is the impedance ratio at the outer radius:

        lambda_m = -k (c1 J_m'(kR) + c2 Y_m'(kR)) / (c1 J_m(kR) + c2 Y_m(kR))

    Each mode m >= 1 contributes a multiplicity-2 eigenvalue (the two
    angular orientations); m = 0 is simple.
    """
    if core_radius <= 0 or outer_radius <= core_radius:
        raise ValueError("need 0 < core_radius < outer_radius")
    n_core = complex(n_core)
    kappa = k * np.sqrt(n_core)
    a, R = core_radius, outer_radius
    eigenvalues, mults = [], []
    below = 0
    for m in range(max_mode + 1):
        ja, jpa = bessel_j(m, k * a), bessel_jp(m, k * a)
        ya, ypa = bessel_y(m, k * a), bessel_yp(m, k * a)
        if n_core == 1.0:
            c1, c2 = 1.0 + 0.0j, 0.0j
        else:
            val = bessel_j_complex(m, kappa * a)
            der = kappa * bessel_jp_complex(m, kappa * a)
            # Cramer's rule; the system determinant is the Wronskian 2/(pi a)
            det = k * (ja * ypa - jpa * ya)
            c1 = (val * k * ypa - der * ya) / det
            c2 = (der * ja - val * k * jpa) / det
        denom = c1 * bessel_j(m, k * R) + c2 * bessel_y(m, k * R)
        if denom == 0:
            raise ZeroDivisionError(f"mode {m} hits a modified Dirichlet resonance")
        lam = -k * (c1 * bessel_jp(m, k * R) + c2 * bessel_yp(m, k * R)) / denom
        if region.contains(lam):
            eigenvalues.append(lam)
            mults.append(1 if m == 0 else 2)
            below = 0
        elif lam.real < region.re_min:
            below += 1
            if below >= 5:  # eigenvalues decrease like -m/R; nothing more to find
                break
        else:
            below = 0
    return EigenvalueSet(
        np.array(eigenvalues, dtype=complex),
        method="BesselOracle",
        multiplicities=np.array(mults, dtype=int),
    )
