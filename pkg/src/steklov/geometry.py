"""Scatterer shapes, scene configuration, and tagged triangular meshes.

The computational domain is an annular disc of radius ``pml_outer``
containing (from the inside out) the scatterer D, the measurement circle
Gamma, the source circle C, and an absorbing PML annulus.  Meshes are
built from concentric vertex rings that blend the scatterer boundary
into the surrounding circles, so every boundary polygon (including the
Gamma ring) is present in the mesh exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

# region tags
SCATTERER = 0
BACKGROUND = 1
PML = 2

_TWO_PI = 2.0 * np.pi


@dataclass(eq=False)
class ScattererShape:
    """Star-shaped scatterer boundary, given either as a disc or a polygon."""

    kind: str
    radius: float = 1.0
    polygon: np.ndarray | None = None

    @staticmethod
    def disc(radius: float = 1.0) -> "ScattererShape":
        if radius <= 0:
            raise ValueError("disc radius must be positive")
        return ScattererShape(kind="disc", radius=radius)

    @staticmethod
    def square() -> "ScattererShape":
        poly = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
        return ScattererShape(kind="square", polygon=poly)

    @staticmethod
    def lshape() -> "ScattererShape":
        poly = np.array(
            [
                [-0.9, -1.1],
                [0.1, -1.1],
                [0.1, -0.1],
                [1.1, -0.1],
                [1.1, 0.9],
                [-0.9, 0.9],
            ]
        )
        return ScattererShape(kind="lshape", polygon=poly)

    @staticmethod
    def from_name(name: str) -> "ScattererShape":
        try:
            return {
                "disc": ScattererShape.disc,
                "square": ScattererShape.square,
                "lshape": ScattererShape.lshape,
            }[name]()
        except KeyError:
            raise ValueError(f"unknown shape {name!r}") from None

    def boundary_radius(self, theta) -> np.ndarray:
        """Distance from the origin to the boundary along direction theta."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if self.kind == "disc":
            return np.full(theta.shape, self.radius)
        d = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        poly = self.polygon
        best = np.full(theta.shape, np.inf)
        nv = len(poly)
        for a in range(nv):
            p, q = poly[a], poly[(a + 1) % nv]
            e = q - p
            denom = d[..., 0] * (-e[1]) - d[..., 1] * (-e[0])
            with np.errstate(divide="ignore", invalid="ignore"):
                t = (p[0] * (-e[1]) - p[1] * (-e[0])) / denom
                s = (d[..., 0] * p[1] - d[..., 1] * p[0]) / denom
            ok = (np.abs(denom) > 1e-14) & (t > 0) & (s >= -1e-12) & (s <= 1 + 1e-12)
            best = np.where(ok & (t < best), t, best)
        if not np.all(np.isfinite(best)):
            raise ValueError("shape is not star-shaped about the origin")
        return best

    def corner_angles(self) -> np.ndarray:
        if self.kind == "disc":
            return np.array([])
        a = np.arctan2(self.polygon[:, 1], self.polygon[:, 0])
        return np.sort(np.mod(a, _TWO_PI))

    def area(self) -> float:
        if self.kind == "disc":
            return np.pi * self.radius**2
        x, y = self.polygon[:, 0], self.polygon[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def max_radius(self) -> float:
        if self.kind == "disc":
            return self.radius
        return float(np.max(np.linalg.norm(self.polygon, axis=1)))

    def contains(self, pts: np.ndarray) -> np.ndarray:
        """Membership test for points, exploiting star-shapedness."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        r = np.linalg.norm(pts, axis=1)
        theta = np.arctan2(pts[:, 1], pts[:, 0])
        return r <= self.boundary_radius(theta) + 1e-12


@dataclass(frozen=True)
class SceneConfig:
    """Geometry and sampling layout of one measurement scene."""

    wavenumber: float = 1.0
    gamma_radius: float = 2.0
    source_radius: float = 3.0
    pml_inner: float = 3.5
    pml_outer: float = 4.5
    n_sources: int = 100
    n_receivers: int = 100

    def validate(self, shape: ScattererShape | None = None) -> None:
        if not (0 < self.gamma_radius < self.source_radius < self.pml_inner < self.pml_outer):
            raise ValueError(
                "radius ordering violated: need gamma < source < pml_inner < pml_outer, got "
                f"{self.gamma_radius}, {self.source_radius}, {self.pml_inner}, {self.pml_outer}"
            )
        if self.n_sources < 1 or self.n_receivers < 1:
            raise ValueError("need at least one source and one receiver")
        if self.wavenumber <= 0:
            raise ValueError("wavenumber must be positive")
        if shape is not None and shape.max_radius() >= self.gamma_radius:
            raise ValueError("scatterer must lie strictly inside the Gamma circle")

    def source_points(self) -> np.ndarray:
        th = _TWO_PI * np.arange(self.n_sources) / self.n_sources
        return self.source_radius * np.stack([np.cos(th), np.sin(th)], axis=1)


def make_scene(shape: ScattererShape, **overrides) -> SceneConfig:
    """Scene with the standard experiment defaults, selectively overridden."""
    cfg = replace(SceneConfig(), **overrides)
    cfg.validate(shape)
    return cfg


@dataclass(eq=False)
class Mesh:
    """Conforming triangle mesh with region tags and the Gamma vertex ring."""

    vertices: np.ndarray  # (nv, 2) float
    triangles: np.ndarray  # (nt, 3) int, CCW
    region: np.ndarray  # (nt,) int tag
    gamma_ring: np.ndarray  # ordered (CCW) vertex indices on Gamma
    h: float

    @property
    def gamma_edges(self) -> np.ndarray:
        ring = self.gamma_ring
        return np.stack([ring, np.roll(ring, -1)], axis=1)

    def triangle_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def scatterer_area(self) -> float:
        return float(np.sum(self.triangle_areas()[self.region == SCATTERER]))

    def outer_boundary_vertices(self) -> np.ndarray:
        r = np.linalg.norm(self.vertices, axis=1)
        return np.nonzero(r >= r.max() - 1e-9)[0]


def _ring_angles(n: int, corners: np.ndarray | None) -> np.ndarray:
    base = _TWO_PI * np.arange(n) / n
    if corners is None or len(corners) == 0:
        return base
    step = _TWO_PI / n
    keep = np.ones(n, dtype=bool)
    for c in corners:
        d = np.abs(np.mod(base - c + np.pi, _TWO_PI) - np.pi)
        keep &= d > 0.4 * step
    return np.sort(np.concatenate([base[keep], corners]))


def _merge_band(inner_idx, inner_ang, outer_idx, outer_ang, tris: list) -> None:
    """Triangulate the annular band between two vertex rings (CCW)."""
    ni, no = len(inner_idx), len(outer_idx)
    # align starting outer vertex with the first inner vertex
    d = np.mod(outer_ang - inner_ang[0] + np.pi, _TWO_PI) - np.pi
    j0 = int(np.argmin(np.abs(d)))
    ai = inner_ang[0]
    aj = ai + d[j0]
    i = j = 0
    while i < ni or j < no:
        gi = np.mod(inner_ang[(i + 1) % ni] - inner_ang[i % ni], _TWO_PI) if i < ni else np.inf
        gj = np.mod(outer_ang[(j0 + j + 1) % no] - outer_ang[(j0 + j) % no], _TWO_PI) if j < no else np.inf
        if gi == 0.0:
            gi = _TWO_PI
        if gj == 0.0 and j < no:
            gj = _TWO_PI
        if ai + gi <= aj + gj:
            tris.append((inner_idx[i % ni], outer_idx[(j0 + j) % no], inner_idx[(i + 1) % ni]))
            ai += gi
            i += 1
        else:
            tris.append((inner_idx[i % ni], outer_idx[(j0 + j) % no], outer_idx[(j0 + j + 1) % no]))
            aj += gj
            j += 1


def _interface_points(shape: ScattererShape, h: float) -> np.ndarray:
    """Points spaced ~h along the scatterer boundary (corners included)."""
    if shape.kind == "disc":
        n = max(8, int(np.ceil(_TWO_PI * shape.radius / h)))
        ang = _TWO_PI * np.arange(n) / n
        return shape.radius * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    pts = []
    poly = shape.polygon
    for a in range(len(poly)):
        p, q = poly[a], poly[(a + 1) % len(poly)]
        m = max(1, int(np.ceil(np.linalg.norm(q - p) / h)))
        t = (np.arange(m) / m)[:, None]
        pts.append(p + t * (q - p))
    return np.concatenate(pts)


def _interface_distance(shape: ScattererShape, pts: np.ndarray) -> np.ndarray:
    """Distance from each point to the scatterer boundary."""
    if shape.kind == "disc":
        return np.abs(np.linalg.norm(pts, axis=1) - shape.radius)
    poly = shape.polygon
    best = np.full(len(pts), np.inf)
    for a in range(len(poly)):
        p, q = poly[a], poly[(a + 1) % len(poly)]
        e = q - p
        t = np.clip((pts - p) @ e / (e @ e), 0.0, 1.0)
        best = np.minimum(best, np.linalg.norm(pts - p - t[:, None] * e, axis=1))
    return best


def generate_mesh(shape: ScattererShape, cfg: SceneConfig, h: float) -> Mesh:
    """Boundary-fitted tagged mesh of the full computational domain.

    Inside the Gamma circle, a hexagonal lattice locked to exact points
    on the scatterer boundary is Delaunay-triangulated (structured
    radial blending loses accuracy badly near reentrant polygon
    corners); from Gamma outward, circular vertex rings continue through
    the background annulus to the PML outer circle.
    """
    if h <= 0:
        raise ValueError("mesh size must be positive")
    cfg.validate(shape)
    from scipy.spatial import Delaunay

    r_gamma, r_pin, r_pout = cfg.gamma_radius, cfg.pml_inner, cfg.pml_outer

    # the Gamma ring is shared by the interior triangulation and the
    # first outer band; at least one vertex per receiver
    n_g = max(8, cfg.n_receivers, int(np.ceil(_TWO_PI * r_gamma / h)))
    gamma_ang = _TWO_PI * np.arange(n_g) / n_g
    gamma_pts = r_gamma * np.stack([np.cos(gamma_ang), np.sin(gamma_ang)], axis=1)

    iface = _interface_points(shape, h)
    dy = 0.5 * np.sqrt(3.0) * h
    jj, ii = np.meshgrid(
        np.arange(-int(np.ceil(r_gamma / dy)), int(np.ceil(r_gamma / dy)) + 1),
        np.arange(-int(np.ceil(r_gamma / h)), int(np.ceil(r_gamma / h)) + 1),
        indexing="ij",
    )
    lattice = np.stack([ii * h + 0.5 * h * (jj % 2), jj * dy], axis=-1).reshape(-1, 2)
    # clear the interface and the Gamma ring so their exact points survive
    keep = np.linalg.norm(lattice, axis=1) < r_gamma - 0.55 * h
    keep &= _interface_distance(shape, lattice) > 0.45 * h
    inner = np.vstack([lattice[keep], iface, gamma_pts])
    gamma_ring = np.arange(len(inner) - n_g, len(inner))

    cells = Delaunay(inner).simplices.astype(np.int64)
    p = inner[cells]
    signed = 0.5 * (
        (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
        - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0])
    )
    cells[signed < 0] = cells[signed < 0][:, [0, 2, 1]]

    verts: list[np.ndarray] = list(inner)
    tris: list[tuple[int, int, int]] = [tuple(t) for t in cells]
    centroids = inner[cells].mean(axis=1)
    region_list = list(np.where(shape.contains(centroids), SCATTERER, BACKGROUND))

    def add_ring(angles: np.ndarray, radii: np.ndarray):
        start = len(verts)
        pts = np.stack([radii * np.cos(angles), radii * np.sin(angles)], axis=1)
        verts.extend(pts)
        return np.arange(start, start + len(angles)), angles

    prev_idx, prev_ang = gamma_ring, gamma_ang

    def connect(idx, ang, tag: int):
        nonlocal prev_idx, prev_ang
        n0 = len(tris)
        _merge_band(prev_idx, prev_ang, idx, ang, tris)
        region_list.extend([tag] * (len(tris) - n0))
        prev_idx, prev_ang = idx, ang

    for tag, (ra, rb) in [(BACKGROUND, (r_gamma, r_pin)), (PML, (r_pin, r_pout))]:
        n_rings = max(2, int(np.ceil((rb - ra) / h)))
        for j in range(1, n_rings + 1):
            r = ra + (rb - ra) * j / n_rings
            n = max(8, int(np.ceil(_TWO_PI * r / h)))
            ang = _ring_angles(n, None)
            connect(*add_ring(ang, np.full(len(ang), r)), tag)

    mesh = Mesh(
        vertices=np.array(verts),
        triangles=np.array(tris, dtype=np.int64),
        region=np.array(region_list, dtype=np.int64),
        gamma_ring=np.asarray(gamma_ring, dtype=np.int64),
        h=h,
    )
    areas = mesh.triangle_areas()
    if np.any(areas <= 0):
        raise RuntimeError(f"mesh generation produced {np.sum(areas <= 0)} inverted triangles")
    return mesh


def boundary_quadrature(mesh: Mesh) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Trapezoid quadrature on the Gamma ring.

    Returns (points, weights, outward unit normals); weights are
    arc-length based and sum to 2*pi*gamma_radius exactly.
    """
    pts = mesh.vertices[mesh.gamma_ring]
    r = np.linalg.norm(pts, axis=1)
    theta = np.arctan2(pts[:, 1], pts[:, 0])
    gaps = np.mod(np.diff(theta, append=theta[0] + _TWO_PI), _TWO_PI)
    prev_gaps = np.roll(gaps, 1)
    weights = r * 0.5 * (gaps + prev_gaps)
    normals = pts / r[:, None]
    return pts, weights, normals


def submesh(mesh: Mesh, tri_mask: np.ndarray) -> tuple[Mesh, np.ndarray]:
    """Extract the submesh of selected triangles.

    Returns the submesh and the map from new vertex index to old.
    """
    tris = mesh.triangles[tri_mask]
    used = np.unique(tris)
    new_of_old = -np.ones(len(mesh.vertices), dtype=np.int64)
    new_of_old[used] = np.arange(len(used))
    ring = mesh.gamma_ring
    if np.any(new_of_old[ring] < 0):
        raise ValueError("submesh does not contain the Gamma ring")
    sub = Mesh(
        vertices=mesh.vertices[used],
        triangles=new_of_old[tris],
        region=mesh.region[tri_mask],
        gamma_ring=new_of_old[ring],
        h=mesh.h,
    )
    return sub, used


def interior_submesh(mesh: Mesh, gamma_radius: float) -> tuple[Mesh, np.ndarray]:
    """Submesh of the region enclosed by Gamma (the eigenproblem domain B)."""
    cent = mesh.vertices[mesh.triangles].mean(axis=1)
    return submesh(mesh, np.linalg.norm(cent, axis=1) < gamma_radius)


def exterior_submesh(mesh: Mesh, gamma_radius: float) -> tuple[Mesh, np.ndarray]:
    """Submesh of the annulus outside Gamma (up to the PML outer circle)."""
    cent = mesh.vertices[mesh.triangles].mean(axis=1)
    return submesh(mesh, np.linalg.norm(cent, axis=1) > gamma_radius)


def validate_mesh(mesh: Mesh) -> None:
    """Assert conformity, orientation, and Gamma-ring integrity."""
    areas = mesh.triangle_areas()
    if np.any(areas <= 0):
        raise AssertionError("non-positive triangle area")
    edges = {}
    for t, tri in enumerate(mesh.triangles):
        for a in range(3):
            e = (int(tri[a]), int(tri[(a + 1) % 3]))
            key = (min(e), max(e))
            edges.setdefault(key, []).append(e)
    for key, occ in edges.items():
        if len(occ) > 2:
            raise AssertionError(f"edge {key} shared by {len(occ)} triangles")
        if len(occ) == 2 and occ[0] == occ[1]:
            raise AssertionError(f"edge {key} traversed twice in the same direction")
    ring = mesh.gamma_ring
    for a, b in zip(ring, np.roll(ring, -1)):
        if (min(a, b), max(a, b)) not in edges:
            raise AssertionError("Gamma ring edge missing from the mesh")


def write_mesh(mesh: Mesh, path) -> None:
    """Write the line-based text format (see package README)."""
    with open(path, "w") as f:
        f.write(
            f"steklov-mesh v1 {len(mesh.vertices)} {len(mesh.triangles)} "
            f"{len(mesh.gamma_ring)} {float(mesh.h)!r}\n"
        )
        for x, y in mesh.vertices:
            f.write(f"{float(x)!r} {float(y)!r}\n")
        for (i, j, k), tag in zip(mesh.triangles, mesh.region):
            f.write(f"{i} {j} {k} {tag}\n")
        for i, j in mesh.gamma_edges:
            f.write(f"{i} {j}\n")


def read_mesh(path) -> Mesh:
    """Read the text format written by :func:`write_mesh`."""
    with open(path) as f:
        lines = f.read().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty mesh file")
    head = lines[0].split()
    if len(head) != 6 or head[0] != "steklov-mesh" or head[1] != "v1":
        raise ValueError(f"{path}:1: bad mesh header")
    nv, nt, ne = int(head[2]), int(head[3]), int(head[4])
    h = float(head[5])
    if len(lines) != 1 + nv + nt + ne:
        raise ValueError(f"{path}: expected {1 + nv + nt + ne} lines, found {len(lines)}")

    def parse(lineno, n, conv):
        parts = lines[lineno].split()
        if len(parts) != n:
            raise ValueError(f"{path}:{lineno + 1}: expected {n} fields")
        return [conv(p) for p in parts]

    vertices = np.array([parse(1 + i, 2, float) for i in range(nv)])
    tri_rows = [parse(1 + nv + i, 4, int) for i in range(nt)]
    triangles = np.array([r[:3] for r in tri_rows], dtype=np.int64)
    region = np.array([r[3] for r in tri_rows], dtype=np.int64)
    edge_rows = [parse(1 + nv + nt + i, 2, int) for i in range(ne)]
    ring = [edge_rows[0][0]]
    nxt = {a: b for a, b in edge_rows}
    for _ in range(ne - 1):
        ring.append(nxt[ring[-1]])
    return Mesh(
        vertices=vertices,
        triangles=triangles,
        region=region,
        gamma_ring=np.array(ring, dtype=np.int64),
        h=h,
    )


def receiver_setup(mesh: Mesh, n_receivers: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Receiver dofs on Gamma nearest to uniformly spaced angles.

    Returns (vertex indices, receiver angles, quadrature weights); the
    weights are arc-length trapezoid weights over the receiver subset
    and sum to the full circumference.
    """
    ring = mesh.gamma_ring
    pts = mesh.vertices[ring]
    theta = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), _TWO_PI)
    order = np.argsort(theta)
    targets = _TWO_PI * np.arange(n_receivers) / n_receivers
    pos = np.searchsorted(theta[order], targets)
    cand = np.stack([(pos - 1) % len(order), pos % len(order)], axis=1)
    dist = np.abs(np.mod(theta[order][cand] - targets[:, None] + np.pi, _TWO_PI) - np.pi)
    sel = order[cand[np.arange(n_receivers), np.argmin(dist, axis=1)]]
    if len(np.unique(sel)) != n_receivers:
        raise ValueError("Gamma ring too coarse for the requested receiver count")
    idx = ring[sel]
    angs = theta[sel]
    radius = float(np.mean(np.linalg.norm(pts, axis=1)))
    gaps = np.mod(np.diff(angs, append=angs[0] + _TWO_PI), _TWO_PI)
    weights = radius * 0.5 * (gaps + np.roll(gaps, 1))
    return idx, angs, weights
