"""Steklov eigenvalue reconstruction from near-field Cauchy data.

The package covers the full chain: FEM+PML simulation of near-field
scattering data, reciprocity-gap recovery of Steklov eigenvalues from
that data, and Bayesian (Metropolis-Hastings) estimation of the index
of refraction from the recovered eigenvalues.
"""

from .geometry import Mesh, SceneConfig, ScattererShape, generate_mesh, make_scene
from .fem import AssembledSystem, CoefficientField, PmlProfile, assemble
from .forward import CauchyDataSet, add_noise, read_dataset, simulate_cauchy_data, write_dataset
from .eigensolver import (
    EigenvalueSet,
    SearchRegion,
    SteklovPencil,
    bessel_oracle_eigenvalues,
    schur_dense_eigenvalues,
    sim_eigenvalues,
)
from .rg import IndicatorField, complex_grid, detect_peaks, real_grid, sweep_indicator
from .bayes import (
    ForwardMap,
    MarkovChain,
    PosteriorSpec,
    RefractiveIndexModel,
    chain_summary,
    log_posterior,
    mh_sample,
)
from .estimators import RefractiveIndexEstimator, SteklovEigenvalueReconstructor
from .pipeline import PipelineConfig, config_from_preset, read_config, run_pipeline, write_config
from .presets import Preset, get_preset, list_presets

__all__ = [
    "Mesh",
    "SceneConfig",
    "ScattererShape",
    "generate_mesh",
    "make_scene",
    "AssembledSystem",
    "CoefficientField",
    "PmlProfile",
    "assemble",
    "CauchyDataSet",
    "add_noise",
    "read_dataset",
    "simulate_cauchy_data",
    "write_dataset",
    "EigenvalueSet",
    "SearchRegion",
    "SteklovPencil",
    "bessel_oracle_eigenvalues",
    "schur_dense_eigenvalues",
    "sim_eigenvalues",
    "IndicatorField",
    "complex_grid",
    "detect_peaks",
    "real_grid",
    "sweep_indicator",
    "ForwardMap",
    "MarkovChain",
    "PosteriorSpec",
    "RefractiveIndexModel",
    "chain_summary",
    "log_posterior",
    "mh_sample",
    "RefractiveIndexEstimator",
    "SteklovEigenvalueReconstructor",
    "PipelineConfig",
    "config_from_preset",
    "read_config",
    "run_pipeline",
    "write_config",
    "Preset",
    "get_preset",
    "list_presets",
]

__version__ = "0.1.0"
