"""Bayesian estimation of the refractive index from Steklov eigenvalues.

The measured eigenvalues are modeled as lambda = G(n) + noise with G the
map from the index parameters to the Steklov eigenvalues nearest the
measurement.  A random-walk Metropolis-Hastings chain samples the
posterior over a uniform prior box; the conditional mean of the chain is
the point estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .eigensolver import SearchRegion, SteklovPencil, bessel_oracle_eigenvalues, schur_dense_eigenvalues
from .fem import CoefficientField, assemble
from .geometry import SceneConfig, ScattererShape


@dataclass(eq=False)
class RefractiveIndexModel:
    """Parameterization of n(x) on the scatterer with its uniform prior box.

    Three kinds are supported: a real constant n0, a radial profile
    b1 + b2|x|, and a complex constant re + i*im.  The default boxes
    keep Re(n) > 0 and Im(n) >= 0 on any admissible scatterer.
    """

    kind: str
    bounds: np.ndarray

    _KINDS = ("constant", "radial", "complex")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        self.bounds = np.asarray(self.bounds, dtype=float)
        if self.bounds.shape != (self.n_params, 2) or np.any(
            self.bounds[:, 0] >= self.bounds[:, 1]
        ):
            raise ValueError("prior bounds must be (n_params, 2) with lo < hi")

    @staticmethod
    def real_constant(bounds=((0.0, 8.0),)) -> "RefractiveIndexModel":
        return RefractiveIndexModel("constant", np.asarray(bounds))

    @staticmethod
    def radial_affine(bounds=((3.0, 7.0), (0.0, 6.0))) -> "RefractiveIndexModel":
        return RefractiveIndexModel("radial", np.asarray(bounds))

    @staticmethod
    def complex_constant(bounds=((0.0, 8.0), (0.0, 8.0))) -> "RefractiveIndexModel":
        return RefractiveIndexModel("complex", np.asarray(bounds))

    @staticmethod
    def from_name(name: str) -> "RefractiveIndexModel":
        try:
            return {
                "constant": RefractiveIndexModel.real_constant,
                "radial": RefractiveIndexModel.radial_affine,
                "complex": RefractiveIndexModel.complex_constant,
            }[name]()
        except KeyError:
            raise ValueError(f"unknown model {name!r}") from None

    @property
    def n_params(self) -> int:
        return 1 if self.kind == "constant" else 2

    @property
    def parameter_names(self) -> tuple[str, ...]:
        return {
            "constant": ("n",),
            "radial": ("beta1", "beta2"),
            "complex": ("re_n", "im_n"),
        }[self.kind]

    def in_box(self, params) -> bool:
        p = np.asarray(params, dtype=float)
        return bool(np.all(p > self.bounds[:, 0]) and np.all(p < self.bounds[:, 1]))

    def to_field(self, shape: ScattererShape, params) -> CoefficientField:
        p = np.asarray(params, dtype=float)
        if self.kind == "constant":
            return CoefficientField.constant(shape, p[0])
        if self.kind == "radial":
            return CoefficientField.radial_affine(shape, p[0], p[1])
        return CoefficientField.constant(shape, complex(p[0], p[1]))

    def default_initial(self) -> np.ndarray:
        # a real-constant chain starts at 2 (the standard experiment);
        # other models start at the center of their prior box
        if self.kind == "constant":
            return np.array([2.0])
        return self.bounds.mean(axis=1)


class ForwardMap:
    """G: index parameters -> the eigenvalues nearest the measured ones.

    The eigenvalue solve runs on a cached coarse mesh via the dense
    Schur route, except for a constant index on a centered disc where
    the closed-form Bessel route is exact and much faster.  Results are
    memoized on parameters quantized to 1e-3, since a Metropolis chain
    revisits nearby values constantly.
    """

    def __init__(
        self,
        model: RefractiveIndexModel,
        shape: ScattererShape,
        cfg: SceneConfig,
        reference,
        h: float = 0.1,
        margin: float = 0.5,
        quantum: float = 1e-3,
        matching: str | None = None,
    ):
        self.model = model
        self.shape = shape
        self.cfg = cfg
        if matching is None:
            matching = "nearest" if model.kind == "complex" else "rank"
        if matching not in ("rank", "nearest"):
            raise ValueError("matching must be 'rank' or 'nearest'")
        self.matching = matching
        self.reference = np.asarray(reference, dtype=complex)
        if len(self.reference) == 0:
            raise ValueError("need at least one reference eigenvalue")
        self.h = h
        self.quantum = quantum
        re = self.reference.real
        im = self.reference.imag
        complex_spectrum = model.kind == "complex" or np.any(np.abs(im) > 1e-9)
        if complex_spectrum:
            self.region = SearchRegion(
                re.min() - margin, re.max() + margin, im.min() - margin, im.max() + margin
            )
        else:
            self.region = SearchRegion.interval(re.min() - margin, re.max() + margin)
        self.diameter = float(
            np.hypot(
                self.region.re_max - self.region.re_min,
                self.region.im_max - self.region.im_min,
            )
        )
        self._use_oracle = shape.kind == "disc" and model.kind in ("constant", "complex")
        self._mesh = None
        self._cache: dict[tuple, np.ndarray] = {}
        self.evaluations = 0

    def _interior_mesh(self):
        if self._mesh is None:
            full = geo.generate_mesh(self.shape, self.cfg, self.h)
            self._mesh, _ = geo.interior_submesh(full, self.cfg.gamma_radius)
        return self._mesh

    def eigenvalues(self, params) -> np.ndarray:
        """All model eigenvalues in the search region, multiplicity-expanded."""
        key = tuple(np.round(np.asarray(params, dtype=float) / self.quantum).astype(int))
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        self.evaluations += 1
        p = np.asarray(params, dtype=float)
        if self._use_oracle:
            n_core = p[0] if self.model.kind == "constant" else complex(p[0], p[1])
            eigs = bessel_oracle_eigenvalues(
                n_core, self.shape.radius, self.cfg.gamma_radius, self.cfg.wavenumber, self.region
            )
        else:
            n_field = self.model.to_field(self.shape, p)
            system = assemble(self._interior_mesh(), n_field, self.cfg.wavenumber, pml=None)
            pencil = SteklovPencil(system, self.cfg.wavenumber)
            eigs = schur_dense_eigenvalues(pencil, self.region)
        out = eigs.expanded()
        self._cache[key] = out
        return out

    def __call__(self, params) -> tuple[np.ndarray, np.ndarray]:
        """Match computed eigenvalues to the reference ones.

        Returns (values, matched): values[i] is the computed eigenvalue
        paired with reference[i]; matched[i] is False when the region
        held too few eigenvalues to pair reference[i].

        With ``matching='rank'`` (the default for real models) the
        pairing tracks spectral position from the origin: negative
        references take the largest negative eigenvalues in order,
        positive references the smallest positive ones.  Pairing each
        reference to whatever eigenvalue happens to be nearest
        (``matching='nearest'``, the default for the complex model)
        would make a real posterior nearly flat, because some branch of
        the spectrum passes close to any fixed value for almost every
        index parameter; complex spectra are sparse in the plane, so
        there greedy nearest matching works.
        """
        computed = self.eigenvalues(params)
        m = len(self.reference)
        values = np.zeros(m, dtype=complex)
        matched = np.zeros(m, dtype=bool)
        if len(computed) == 0:
            return values, matched
        if self.matching == "rank":
            ev = np.sort(computed.real)
            negatives = ev[ev < 0][::-1]  # toward -inf
            positives = ev[ev >= 0]  # toward +inf
            for sign, pool in ((-1, negatives), (1, positives)):
                idx = [i for i in range(m) if (self.reference[i].real < 0) == (sign < 0)]
                idx.sort(key=lambda i: -sign * self.reference[i].real)
                for rank, i in enumerate(idx):
                    if rank < len(pool):
                        values[i] = pool[rank]
                        matched[i] = True
            return values, matched
        dist = np.abs(self.reference[:, None] - computed[None, :])
        for _ in range(min(m, len(computed))):
            i, j = np.unravel_index(np.argmin(dist), dist.shape)
            values[i] = computed[j]
            matched[i] = True
            dist[i, :] = np.inf
            dist[:, j] = np.inf
        return values, matched


@dataclass(eq=False)
class PosteriorSpec:
    """Unnormalized posterior over index parameters given eigenvalues.

    ``squared`` selects the squared-misfit exponent (the default); the
    unsquared variant keeps the plain Euclidean norm in the exponent.
    """

    measured: np.ndarray
    sigma2: float
    model: RefractiveIndexModel
    forward: ForwardMap
    squared: bool = True

    def __post_init__(self):
        self.measured = np.asarray(self.measured, dtype=complex)
        if self.sigma2 <= 0:
            raise ValueError("noise scale must be positive")
        if np.any(np.abs(self.measured) < 1e-12):
            raise ValueError("measured eigenvalues must be nonzero")
        if len(self.measured) != len(self.forward.reference):
            raise ValueError("measured eigenvalues must match the forward map reference")

    @property
    def scales(self) -> np.ndarray:
        """Per-eigenvalue residual scale sigma2 * |measured|.

        The eigenvalues are reconstructed with roughly constant relative
        accuracy, so the noise scale is proportional to the magnitude:
        an absolute scale shared by all eigenvalues either washes out
        the small ones or over-constrains the large ones.
        """
        return self.sigma2 * np.abs(self.measured)


def log_posterior(spec: PosteriorSpec, params) -> float:
    """-sum((residual_i / scale_i)^2)/2 inside the prior box, -inf outside.

    Residuals are normalized by the per-eigenvalue scales of the spec.
    Reference eigenvalues left unmatched by the forward map contribute
    the search-region diameter as their residual, which repels the chain
    from parameter sets whose spectrum has drifted out of the region.
    """
    if not spec.model.in_box(params):
        return -np.inf
    values, matched = spec.forward(params)
    r = np.where(
        matched, np.abs(spec.measured - values), spec.forward.diameter
    )
    resid2 = float(np.sum((r / spec.scales) ** 2))
    misfit = resid2 if spec.squared else np.sqrt(resid2)
    return -misfit / 2.0


@dataclass(eq=False)
class MarkovChain:
    """Metropolis-Hastings output: samples with acceptance bookkeeping."""

    samples: np.ndarray  # (K, n_params)
    log_posts: np.ndarray  # (K,)
    accepted: np.ndarray  # (K,) bool; True where the proposal was taken
    gamma2: float
    seed: int

    @property
    def acceptance_rate(self) -> float:
        # the initial sample is not a transition
        return float(np.mean(self.accepted[1:])) if len(self.accepted) > 1 else 0.0


def mh_sample(
    spec: PosteriorSpec,
    n_samples: int = 3000,
    seed: int = 0,
    gamma2: float = 2.4**2 / 2.0,
    initial=None,
) -> MarkovChain:
    """Random-walk Metropolis-Hastings chain of length ``n_samples``.

    The proposal is an isotropic Gaussian step of variance ``gamma2``
    per parameter; a proposal is accepted when a uniform draw falls
    below the posterior ratio.  Fixed seed implies an identical chain.
    """
    if n_samples < 1:
        raise ValueError("need at least one sample")
    if gamma2 <= 0:
        raise ValueError("proposal variance must be positive")
    rng = np.random.default_rng(seed)
    d = spec.model.n_params
    x = np.asarray(initial if initial is not None else spec.model.default_initial(), dtype=float)
    if x.shape != (d,):
        raise ValueError(f"initial point must have {d} parameters")
    lp = log_posterior(spec, x)
    if lp == -np.inf:
        raise ValueError("initial point lies outside the prior box")
    samples = np.empty((n_samples, d))
    log_posts = np.empty(n_samples)
    accepted = np.zeros(n_samples, dtype=bool)
    samples[0], log_posts[0] = x, lp
    step = np.sqrt(gamma2)
    for t in range(1, n_samples):
        w = x + step * rng.standard_normal(d)
        lp_w = log_posterior(spec, w)
        if np.log(rng.uniform()) < lp_w - lp:
            x, lp = w, lp_w
            accepted[t] = True
        samples[t], log_posts[t] = x, lp
    return MarkovChain(
        samples=samples, log_posts=log_posts, accepted=accepted, gamma2=gamma2, seed=seed
    )


@dataclass(eq=False)
class ChainSummary:
    """Post-burn-in point estimate and plotting material for one chain."""

    cm: np.ndarray  # conditional mean per parameter
    acceptance_rate: float
    burn_in: int
    histograms: list = field(default_factory=list)  # (counts, edges) per parameter
    trace: np.ndarray | None = None


def chain_summary(chain: MarkovChain, burn_in: float = 0.2, bins: int = 50) -> ChainSummary:
    """Conditional mean, per-parameter histograms and the trace series."""
    if not 0.0 <= burn_in <= 0.9:
        raise ValueError("burn-in fraction must lie in [0, 0.9]")
    skip = int(burn_in * len(chain.samples))
    tail = chain.samples[skip:]
    hists = [np.histogram(tail[:, j], bins=bins) for j in range(tail.shape[1])]
    return ChainSummary(
        cm=tail.mean(axis=0),
        acceptance_rate=chain.acceptance_rate,
        burn_in=skip,
        histograms=hists,
        trace=chain.samples,
    )


def histogram_modes(counts: np.ndarray, edges: np.ndarray, min_weight: float = 0.05):
    """Centers of well-separated histogram modes, strongest first.

    A mode is a local maximum holding at least ``min_weight`` of the
    total mass within its bin; used to flag multimodal posteriors.
    """
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    centers = 0.5 * (edges[:-1] + edges[1:])
    modes = []
    for i in range(len(counts)):
        lo, hi = max(i - 2, 0), min(i + 3, len(counts))
        if counts[i] == counts[lo:hi].max() and counts[i] >= min_weight * total:
            if not modes or abs(centers[i] - modes[-1][0]) > 3 * (edges[1] - edges[0]):
                modes.append((centers[i], counts[i]))
    modes.sort(key=lambda t: -t[1])
    return [c for c, _ in modes]
