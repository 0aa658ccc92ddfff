"""Synthetic near-field Cauchy data on Gamma for point sources on C.

For each source the scattered field solves the source-term formulation

    Delta u^s + k^2 n u^s = k^2 (1 - n) Phi(., x0)

with PML truncation (the right-hand side is supported on the scatterer,
where 1 - n is nonzero, so the point singularity at x0 never meets the
discretization).  The total Cauchy data on Gamma is u^s + Phi and
du^s/dnu + dPhi/dnu with the analytic incident part.
"""

from __future__ import annotations

from dataclasses import dataclass, replace as dc_replace

import numpy as np

from . import geometry as geo
from .fem import CoefficientField, DirichletSolver, PmlProfile, assemble, assemble_load, gamma_flux
from .geometry import SCATTERER, Mesh, SceneConfig, ScattererShape
from .special import fundamental_solution, fundamental_solution_gradient


@dataclass(eq=False)
class CauchyDataSet:
    """Measured (u, du/dnu) samples on Gamma for every source on C.

    Attributes
    ----------
    cfg : SceneConfig
        The measurement scene.
    receiver_angles, receiver_weights : ndarray, shape (n_receivers,)
        Receiver angular positions on Gamma and their arc-length
        quadrature weights.
    u, dnu : ndarray, shape (n_sources, n_receivers), complex
        Cauchy data, possibly noisy.
    noise_level : float
        Relative noise magnitude already applied to u/dnu (0 = clean).
    seed : int
        Noise generator seed (0 when clean).
    clean_u, clean_dnu : ndarray or None
        Pre-noise data, kept alongside for testing when available.
    """

    cfg: SceneConfig
    receiver_angles: np.ndarray
    receiver_weights: np.ndarray
    u: np.ndarray
    dnu: np.ndarray
    noise_level: float = 0.0
    seed: int = 0
    clean_u: np.ndarray | None = None
    clean_dnu: np.ndarray | None = None

    def __post_init__(self):
        ns, nr = self.cfg.n_sources, self.cfg.n_receivers
        if self.u.shape != (ns, nr) or self.dnu.shape != (ns, nr):
            raise ValueError(
                f"data shape {self.u.shape} does not match scene ({ns}, {nr})"
            )
        if not 0.0 <= self.noise_level < 1.0:
            raise ValueError("noise level must be in [0, 1)")

    @property
    def receiver_points(self) -> np.ndarray:
        R = self.cfg.gamma_radius
        return R * np.stack(
            [np.cos(self.receiver_angles), np.sin(self.receiver_angles)], axis=1
        )


def simulate_cauchy_data(
    shape: ScattererShape,
    n: CoefficientField,
    cfg: SceneConfig,
    h: float,
    mesh: Mesh | None = None,
) -> CauchyDataSet:
    """Simulate clean Cauchy data by FEM+PML for every source on C.

    One factorization of the PML Helmholtz system serves all sources;
    only the load changes.  The flux on Gamma is recovered variationally
    on the interior submesh, then the analytic incident trace/flux is
    added back.
    """
    if mesh is None:
        mesh = geo.generate_mesh(shape, cfg, h)
    k = cfg.wavenumber
    pml = PmlProfile(cfg.pml_inner, cfg.pml_outer)
    full = assemble(mesh, n, k, pml=pml)
    solver = DirichletSolver.build(full.helmholtz(k), mesh.outer_boundary_vertices())

    imesh, vmap = geo.interior_submesh(mesh, cfg.gamma_radius)
    interior = assemble(imesh, n, k, pml=None)
    rec_idx, rec_angles, rec_weights = geo.receiver_setup(imesh, cfg.n_receivers)
    ring_pos = {int(v): i for i, v in enumerate(imesh.gamma_ring)}
    rec_ring = np.array([ring_pos[int(v)] for v in rec_idx])
    rec_pts = imesh.vertices[rec_idx]
    normals = rec_pts / np.linalg.norm(rec_pts, axis=1)[:, None]

    scat_mask = mesh.region == SCATTERER
    sources = cfg.source_points()
    u = np.empty((cfg.n_sources, cfg.n_receivers), dtype=complex)
    dnu = np.empty_like(u)
    for s, x0 in enumerate(sources):
        # K - k^2 M discretizes -Delta - k^2 n, so the source term
        # k^2 (1 - n) Phi enters negated
        def load(pts, x0=x0):
            return k**2 * (n(pts) - 1.0) * fundamental_solution(pts, x0, k)

        rhs = assemble_load(mesh, load, tri_mask=scat_mask)
        us = solver.solve(rhs)
        us_i = us[vmap]
        flux = gamma_flux(interior, k, us_i)
        inc = fundamental_solution(rec_pts, x0, k)
        inc_flux = np.sum(fundamental_solution_gradient(rec_pts, x0, k) * normals, axis=1)
        u[s] = us_i[rec_idx] + inc
        dnu[s] = flux[rec_ring] + inc_flux

    return CauchyDataSet(
        cfg=cfg,
        receiver_angles=rec_angles,
        receiver_weights=rec_weights,
        u=u,
        dnu=dnu,
    )


def add_noise(data: CauchyDataSet, level: float, seed: int) -> CauchyDataSet:
    """Multiplicative complex uniform noise: v -> v (1 + level (xi1 + i xi2)).

    xi1, xi2 are i.i.d. uniform on [-1, 1] per entry; deterministic for a
    fixed seed.  level=0 returns an identical copy.
    """
    if level < 0:
        raise ValueError("noise level must be nonnegative")
    rng = np.random.default_rng(seed)

    def perturb(v):
        xi = rng.uniform(-1.0, 1.0, v.shape) + 1j * rng.uniform(-1.0, 1.0, v.shape)
        return v * (1.0 + level * xi)

    return dc_replace(
        data,
        u=perturb(data.u),
        dnu=perturb(data.dnu),
        noise_level=float(level),
        seed=int(seed),
        clean_u=data.u.copy(),
        clean_dnu=data.dnu.copy(),
    )


def write_dataset(data: CauchyDataSet, path) -> None:
    """Write the line-based text format (lossless 17-digit round trip)."""
    cfg = data.cfg
    with open(path, "w") as f:
        f.write(
            f"steklov-cauchy v1 {cfg.n_sources} {cfg.n_receivers} {cfg.wavenumber!r} "
            f"{cfg.gamma_radius!r} {cfg.source_radius!r} {data.noise_level!r} {data.seed}\n"
        )
        for ang, w in zip(data.receiver_angles, data.receiver_weights):
            f.write(f"{float(ang)!r} {float(w)!r}\n")
        theta0 = 2.0 * np.pi * np.arange(cfg.n_sources) / cfg.n_sources
        for s in range(cfg.n_sources):
            f.write(f"source {float(theta0[s])!r}\n")
            for r in range(cfg.n_receivers):
                uu, dd = complex(data.u[s, r]), complex(data.dnu[s, r])
                f.write(f"{uu.real!r} {uu.imag!r} {dd.real!r} {dd.imag!r}\n")


def read_dataset(path) -> CauchyDataSet:
    """Read the text format written by :func:`write_dataset`."""
    with open(path) as f:
        lines = f.read().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty dataset file")
    head = lines[0].split()
    if len(head) != 9 or head[0] != "steklov-cauchy" or head[1] != "v1":
        raise ValueError(f"{path}:1: bad dataset header")
    ns, nr = int(head[2]), int(head[3])
    k, gr, sr = float(head[4]), float(head[5]), float(head[6])
    noise_level, seed = float(head[7]), int(head[8])
    expect = 1 + nr + ns * (1 + nr)
    if len(lines) != expect:
        raise ValueError(f"{path}: expected {expect} lines, found {len(lines)}")

    def fields(lineno, count):
        parts = lines[lineno].split()
        if len(parts) != count:
            raise ValueError(f"{path}:{lineno + 1}: expected {count} fields")
        return parts

    angles = np.empty(nr)
    weights = np.empty(nr)
    for i in range(nr):
        a, w = fields(1 + i, 2)
        angles[i], weights[i] = float(a), float(w)
    u = np.empty((ns, nr), dtype=complex)
    dnu = np.empty_like(u)
    line = 1 + nr
    for s in range(ns):
        parts = fields(line, 2)
        if parts[0] != "source":
            raise ValueError(f"{path}:{line + 1}: expected a source block")
        line += 1
        for r in range(nr):
            a, b, c, d = (float(p) for p in fields(line, 4))
            u[s, r] = complex(a, b)
            dnu[s, r] = complex(c, d)
            line += 1
    cfg = SceneConfig(
        wavenumber=k,
        gamma_radius=gr,
        source_radius=sr,
        n_sources=ns,
        n_receivers=nr,
    )
    return CauchyDataSet(
        cfg=cfg,
        receiver_angles=angles,
        receiver_weights=weights,
        u=u,
        dnu=dnu,
        noise_level=noise_level,
        seed=seed,
    )
