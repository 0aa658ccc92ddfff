"""Estimator API contract and end-to-end wrapper behavior."""

import numpy as np
import pytest
from sklearn.base import clone

from steklov.estimators import RefractiveIndexEstimator, SteklovEigenvalueReconstructor


def test_reconstructor_params_round_trip():
    est = SteklovEigenvalueReconstructor(alpha=1e-3, threshold=4.0)
    params = est.get_params()
    assert params["alpha"] == 1e-3
    assert params["threshold"] == 4.0
    est.set_params(alpha=2e-3)
    assert est.alpha == 2e-3
    cloned = clone(est)
    assert cloned.get_params() == est.get_params()


def test_reconstructor_rejects_bad_input():
    with pytest.raises(TypeError):
        SteklovEigenvalueReconstructor().fit(np.zeros((3, 3)))
    est = SteklovEigenvalueReconstructor(grid=("hexagonal", 0.1))
    with pytest.raises(ValueError):
        est._build_grid()


def test_reconstructor_fits_dataset(small_disc_dataset):
    est = SteklovEigenvalueReconstructor(grid=("interval", -0.56, -0.36, 0.02))
    out = est.fit(small_disc_dataset)
    assert out is est
    assert hasattr(est, "indicator_")
    assert est.eigenvalues_.dtype == complex
    vals = est.transform(small_disc_dataset)
    np.testing.assert_array_equal(vals, est.eigenvalues_)


def test_index_estimator_params_round_trip():
    est = RefractiveIndexEstimator(model="radial", sigma2=0.1, n_samples=100)
    cloned = clone(est)
    assert cloned.get_params() == est.get_params()
    est.set_params(seed=5)
    assert est.seed == 5


def test_index_estimator_constant_disc():
    # fast closed-form forward map: a short chain already concentrates
    # near the index that produced the eigenvalue
    est = RefractiveIndexEstimator(model="constant", shape="disc", n_samples=400, seed=1)
    out = est.fit([-0.476])
    assert out is est
    assert est.chain_.samples.shape == (400, 1)
    assert est.cm_.shape == (1,)
    assert 4.0 < est.cm_[0] < 6.0
    np.testing.assert_array_equal(est.predict([-0.476]), est.cm_)


def test_index_estimator_deterministic():
    kw = dict(model="constant", shape="disc", n_samples=100, seed=7)
    a = RefractiveIndexEstimator(**kw).fit([-0.48])
    b = RefractiveIndexEstimator(**kw).fit([-0.48])
    np.testing.assert_array_equal(a.chain_.samples, b.chain_.samples)


def test_index_estimator_rejects_unknown_model():
    with pytest.raises(ValueError):
        RefractiveIndexEstimator(model="spline").fit([-0.48])
