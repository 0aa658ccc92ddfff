"""Scikit-learn style wrappers around the reconstruction chain.

Two estimators cover the two inverse steps: recovering Steklov
eigenvalues from a Cauchy dataset, and recovering index-of-refraction
parameters from eigenvalues.  Both follow the BaseEstimator contract
(constructor stores hyperparameters verbatim, ``fit`` computes
underscore-suffixed attributes and returns self), so they compose with
standard model-selection tooling.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .bayes import (
    ForwardMap,
    PosteriorSpec,
    RefractiveIndexModel,
    chain_summary,
    mh_sample,
)
from .forward import CauchyDataSet
from .geometry import ScattererShape, make_scene
from .rg import complex_grid, detect_peaks, real_grid, sweep_indicator


class SteklovEigenvalueReconstructor(BaseEstimator):
    """Recover Steklov eigenvalues from near-field Cauchy data.

    Sweeps the reciprocity-gap indicator over a lambda grid and reports
    the detected peaks as eigenvalue estimates.

    Parameters
    ----------
    grid : tuple
        Either ``("interval", a, b, step)`` for a real search or
        ``("rect", re0, re1, im0, im1, step)`` for a complex one.
    alpha : float
        Tikhonov regularization parameter.
    z : tuple of float
        Sampling point inside Gamma for the right-hand side.
    threshold : float
        Peak acceptance factor over the field median.
    directions : int
        Number of plane-wave directions in the Herglotz discretization.

    Attributes
    ----------
    indicator_ : IndicatorField
        The swept indicator values over the grid.
    eigenvalues_ : ndarray of complex
        Detected peak locations.
    """

    def __init__(
        self,
        grid=("interval", -5.0, 5.0, 0.02),
        alpha: float = 1e-4,
        z=(0.2, 0.6),
        threshold: float = 3.0,
        directions: int = 100,
    ):
        self.grid = grid
        self.alpha = alpha
        self.z = z
        self.threshold = threshold
        self.directions = directions

    def _build_grid(self):
        kind, *rest = self.grid
        if kind == "interval":
            return real_grid(*rest)
        if kind == "rect":
            return complex_grid(*rest)
        raise ValueError(f"unknown grid kind {kind!r}")

    def fit(self, X: CauchyDataSet, y=None):
        """Sweep the indicator over the grid of the given dataset.

        Parameters
        ----------
        X : CauchyDataSet
            Measured (or simulated) Cauchy data.
        y : ignored
            Present for API compatibility.
        """
        if not isinstance(X, CauchyDataSet):
            raise TypeError("X must be a CauchyDataSet")
        self.indicator_ = sweep_indicator(
            X, self._build_grid(), z=self.z, alpha=self.alpha, directions=self.directions
        )
        peaks = detect_peaks(self.indicator_, threshold=self.threshold)
        self.eigenvalues_ = peaks.eigenvalues
        return self

    def transform(self, X: CauchyDataSet):
        """Fit on the dataset and return the detected eigenvalues."""
        return self.fit(X).eigenvalues_


class RefractiveIndexEstimator(BaseEstimator):
    """Estimate index-of-refraction parameters from Steklov eigenvalues.

    Runs a random-walk Metropolis-Hastings chain against the eigenvalue
    forward map and reports the posterior conditional mean.

    Parameters
    ----------
    model : str
        Parameterization: "constant", "radial" or "complex".
    shape : str or ScattererShape
        Scatterer geometry, by kind name or explicitly.
    sigma2 : float
        Relative noise scale of the eigenvalue measurements.
    n_samples : int
        Chain length.
    seed : int
        Chain seed; fixed seed gives an identical chain.
    gamma2 : float
        Proposal variance per parameter.
    burn_in : float
        Fraction of the chain discarded before averaging.
    h : float
        Mesh size of the cached forward-map mesh (FEM route only).
    matching : str or None
        Eigenvalue pairing rule for the forward map; None picks the
        per-model default.

    Attributes
    ----------
    chain_ : MarkovChain
        The full sampled chain.
    summary_ : ChainSummary
        Post-burn-in conditional mean, histograms and trace.
    cm_ : ndarray
        Conditional-mean point estimate per parameter.
    """

    def __init__(
        self,
        model: str = "constant",
        shape="disc",
        sigma2: float = 0.05,
        n_samples: int = 3000,
        seed: int = 0,
        gamma2: float = 2.4**2 / 2.0,
        burn_in: float = 0.2,
        h: float = 0.1,
        matching: str | None = None,
    ):
        self.model = model
        self.shape = shape
        self.sigma2 = sigma2
        self.n_samples = n_samples
        self.seed = seed
        self.gamma2 = gamma2
        self.burn_in = burn_in
        self.h = h
        self.matching = matching

    def fit(self, X, y=None):
        """Sample the posterior given measured eigenvalues.

        Parameters
        ----------
        X : array-like of complex
            Measured Steklov eigenvalues.
        y : ignored
            Present for API compatibility.
        """
        measured = np.atleast_1d(np.asarray(X, dtype=complex)).ravel()
        model = RefractiveIndexModel.from_name(self.model)
        shape = (
            self.shape
            if isinstance(self.shape, ScattererShape)
            else ScattererShape.from_name(self.shape)
        )
        cfg = make_scene(shape)
        forward = ForwardMap(
            model, shape, cfg, measured, h=self.h, matching=self.matching
        )
        spec = PosteriorSpec(
            measured=measured, sigma2=self.sigma2, model=model, forward=forward
        )
        self.chain_ = mh_sample(
            spec, n_samples=self.n_samples, seed=self.seed, gamma2=self.gamma2
        )
        self.summary_ = chain_summary(self.chain_, burn_in=self.burn_in)
        self.cm_ = self.summary_.cm
        return self

    def predict(self, X):
        """Fit on the eigenvalues and return the conditional mean."""
        return self.fit(X).cm_
