"""Forward data simulation, noise model and dataset round trips."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special as ss

from steklov.fem import CoefficientField
from steklov.forward import (
    CauchyDataSet,
    add_noise,
    read_dataset,
    simulate_cauchy_data,
    write_dataset,
)
from steklov.geometry import ScattererShape, make_scene
from steklov.special import fundamental_solution, fundamental_solution_gradient


def _incident(data):
    cfg = data.cfg
    pts = data.receiver_points
    normals = pts / np.linalg.norm(pts, axis=1)[:, None]
    u = np.empty((cfg.n_sources, cfg.n_receivers), dtype=complex)
    dnu = np.empty_like(u)
    for s, x0 in enumerate(cfg.source_points()):
        u[s] = fundamental_solution(pts, x0, cfg.wavenumber)
        dnu[s] = np.sum(
            fundamental_solution_gradient(pts, x0, cfg.wavenumber) * normals, axis=1
        )
    return u, dnu


def test_vacuum_data_is_incident(disc_shape, small_scene):
    # n = 1 means no scattering: the data is exactly the incident field
    n_field = CoefficientField.constant(disc_shape, 1.0)
    data = simulate_cauchy_data(disc_shape, n_field, small_scene, 0.1)
    u_inc, dnu_inc = _incident(data)
    assert np.linalg.norm(data.u - u_inc) / np.linalg.norm(u_inc) < 0.01
    assert np.linalg.norm(data.dnu - dnu_inc) / np.linalg.norm(dnu_inc) < 0.01


def _transmission_oracle(data, n_c, core_radius, max_mode=60):
    """Independent series solution of the layered-disc source problem."""
    cfg = data.cfg
    k, a, R, rc = cfg.wavenumber, core_radius, cfg.gamma_radius, cfg.source_radius
    kap = k * np.sqrt(n_c)
    phi = data.receiver_angles
    theta0 = 2 * np.pi * np.arange(cfg.n_sources) / cfg.n_sources
    u = np.zeros((cfg.n_sources, cfg.n_receivers), dtype=complex)
    dnu = np.zeros_like(u)
    for m in range(-max_mode, max_mode + 1):
        phim = 0.25j * ss.hankel1(m, k * rc)
        A = np.array(
            [
                [ss.hankel1(m, k * a), -ss.jv(m, kap * a)],
                [k * ss.h1vp(m, k * a), -kap * ss.jvp(m, kap * a)],
            ]
        )
        rhs = -np.array([phim * ss.jv(m, k * a), phim * k * ss.jvp(m, k * a)])
        b, _ = np.linalg.solve(A, rhs)
        total = phim * ss.jv(m, k * R) + b * ss.hankel1(m, k * R)
        dtotal = k * (phim * ss.jvp(m, k * R) + b * ss.h1vp(m, k * R))
        e = np.exp(1j * m * (phi[None, :] - theta0[:, None]))
        u += total * e
        dnu += dtotal * e
    return u, dnu


def test_layered_disc_matches_series_oracle(disc_shape):
    cfg = make_scene(disc_shape, n_sources=6, n_receivers=64)
    n_field = CoefficientField.constant(disc_shape, 5.0)
    data = simulate_cauchy_data(disc_shape, n_field, cfg, 0.05)
    u_ref, dnu_ref = _transmission_oracle(data, 5.0, disc_shape.radius)
    assert np.linalg.norm(data.u - u_ref) / np.linalg.norm(u_ref) < 0.01
    assert np.linalg.norm(data.dnu - dnu_ref) / np.linalg.norm(dnu_ref) < 0.015


def _toy_dataset(rng, noise_level=0.0, seed=0):
    cfg = make_scene(ScattererShape.disc(), n_sources=5, n_receivers=7)
    angles = 2 * np.pi * np.arange(7) / 7
    weights = np.full(7, 2 * np.pi * 2.0 / 7)
    u = rng.standard_normal((5, 7)) + 1j * rng.standard_normal((5, 7))
    dnu = rng.standard_normal((5, 7)) + 1j * rng.standard_normal((5, 7))
    return CauchyDataSet(
        cfg=cfg, receiver_angles=angles, receiver_weights=weights,
        u=u, dnu=dnu, noise_level=noise_level, seed=seed,
    )


def test_dataset_shape_validation(rng):
    cfg = make_scene(ScattererShape.disc(), n_sources=5, n_receivers=7)
    with pytest.raises(ValueError):
        CauchyDataSet(
            cfg=cfg,
            receiver_angles=np.zeros(7),
            receiver_weights=np.zeros(7),
            u=np.zeros((4, 7), dtype=complex),
            dnu=np.zeros((4, 7), dtype=complex),
        )


@given(level=st.floats(min_value=1e-4, max_value=0.3), seed=st.integers(0, 2**31 - 1))
@settings(max_examples=30, deadline=None)
def test_noise_is_bounded_and_multiplicative(level, seed):
    data = _toy_dataset(np.random.default_rng(0))
    noisy = add_noise(data, level, seed)
    # |v'/v - 1| <= level * sqrt(2) entrywise
    for clean, dirty in ((data.u, noisy.u), (data.dnu, noisy.dnu)):
        ratio = dirty / clean
        assert np.abs(ratio - 1.0).max() <= level * np.sqrt(2.0) + 1e-12
    assert noisy.noise_level == level
    np.testing.assert_array_equal(noisy.clean_u, data.u)
    np.testing.assert_array_equal(noisy.clean_dnu, data.dnu)


def test_noise_deterministic_and_mean_zero(rng):
    data = _toy_dataset(rng)
    a = add_noise(data, 0.03, 11)
    b = add_noise(data, 0.03, 11)
    np.testing.assert_array_equal(a.u, b.u)
    assert not np.array_equal(a.u, add_noise(data, 0.03, 12).u)
    # relative perturbations average out over many draws
    devs = [
        np.mean(add_noise(data, 0.1, s).u / data.u - 1.0) for s in range(200)
    ]
    assert abs(np.mean(devs)) < 5e-3


def test_noise_zero_level_identity(rng):
    data = _toy_dataset(rng)
    same = add_noise(data, 0.0, 5)
    np.testing.assert_array_equal(same.u, data.u)
    with pytest.raises(ValueError):
        add_noise(data, -0.1, 5)


def test_dataset_round_trip(tmp_path, rng):
    data = _toy_dataset(rng, noise_level=0.03, seed=9)
    path = tmp_path / "data.txt"
    write_dataset(data, path)
    back = read_dataset(path)
    np.testing.assert_array_equal(back.u, data.u)
    np.testing.assert_array_equal(back.dnu, data.dnu)
    np.testing.assert_array_equal(back.receiver_angles, data.receiver_angles)
    np.testing.assert_array_equal(back.receiver_weights, data.receiver_weights)
    assert back.noise_level == data.noise_level
    assert back.seed == data.seed
    assert back.cfg.n_sources == data.cfg.n_sources


def test_read_dataset_rejects_corruption(tmp_path, rng):
    data = _toy_dataset(rng)
    path = tmp_path / "data.txt"
    write_dataset(data, path)
    lines = path.read_text().splitlines()
    truncated = tmp_path / "short.txt"
    truncated.write_text("\n".join(lines[:-2]) + "\n")
    with pytest.raises(ValueError):
        read_dataset(truncated)
    badhead = tmp_path / "bad.txt"
    badhead.write_text("not-a-dataset\n" + "\n".join(lines[1:]) + "\n")
    with pytest.raises(ValueError):
        read_dataset(badhead)
    empty = tmp_path / "empty.txt"
    empty.write_text("")
    with pytest.raises(ValueError):
        read_dataset(empty)
