"""Special-function kernels against scipy.special as an independent oracle."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special as ss

from steklov.special import (
    bessel_j,
    bessel_j_complex,
    bessel_jp,
    bessel_jp_complex,
    bessel_y,
    bessel_yp,
    fundamental_solution,
    fundamental_solution_gradient,
    hankel1,
    hankel1_01_array,
    hankel1p,
)

ORDERS = list(range(0, 31)) + [40, 60]
ARGS = [0.05, 0.3, 1.0, 2.0, 3.0, 5.5, 9.7, 20.0]


@pytest.mark.parametrize("m", ORDERS)
def test_bessel_j_matches_scipy(m):
    for x in ARGS:
        assert bessel_j(m, x) == pytest.approx(ss.jv(m, x), abs=1e-12, rel=1e-10)


@pytest.mark.parametrize("m", ORDERS)
def test_bessel_jp_matches_scipy(m):
    for x in ARGS:
        assert bessel_jp(m, x) == pytest.approx(ss.jvp(m, x), abs=1e-12, rel=1e-10)


@pytest.mark.parametrize("m", ORDERS)
def test_bessel_y_matches_scipy(m):
    for x in ARGS:
        assert bessel_y(m, x) == pytest.approx(ss.yv(m, x), abs=1e-10, rel=1e-8)


@pytest.mark.parametrize("m", ORDERS)
def test_bessel_yp_matches_scipy(m):
    for x in ARGS:
        assert bessel_yp(m, x) == pytest.approx(ss.yvp(m, x), abs=1e-10, rel=1e-8)


@pytest.mark.parametrize("m", [0, 1, 2, 5, 11])
def test_hankel_matches_scipy(m):
    for x in ARGS:
        assert hankel1(m, x) == pytest.approx(ss.hankel1(m, x), rel=1e-8)
        assert hankel1p(m, x) == pytest.approx(ss.h1vp(m, x), rel=1e-8)


def test_negative_orders_by_parity():
    # J_{-m} = (-1)^m J_m, same for Y
    for m in (1, 2, 3, 7):
        for x in (0.7, 2.0, 6.3):
            assert bessel_j(-m, x) == pytest.approx((-1) ** m * bessel_j(m, x), rel=1e-12)
            assert bessel_y(-m, x) == pytest.approx((-1) ** m * bessel_y(m, x), rel=1e-10)


@pytest.mark.parametrize("m", [0, 1, 2, 5, 12])
def test_bessel_j_complex_matches_scipy(m):
    for z in (0.5 + 0.0j, 1.0 + 2.0j, 2.0 * np.sqrt(2 + 4j), 4.0 + 0.3j):
        assert bessel_j_complex(m, z) == pytest.approx(complex(ss.jv(m, z)), rel=1e-9)
        assert bessel_jp_complex(m, z) == pytest.approx(complex(ss.jvp(m, z)), rel=1e-9)


@given(
    m=st.integers(min_value=0, max_value=25),
    x=st.floats(min_value=0.05, max_value=15.0),
)
@settings(max_examples=150, deadline=None)
def test_wronskian_identity(m, x):
    # J_m(x) Y_m'(x) - J_m'(x) Y_m(x) = 2 / (pi x)
    w = bessel_j(m, x) * bessel_yp(m, x) - bessel_jp(m, x) * bessel_y(m, x)
    assert w == pytest.approx(2.0 / (np.pi * x), rel=1e-8)


def test_hankel1_01_array():
    x = np.array([0.3, 1.0, 2.7, 8.0])
    h0, h1 = hankel1_01_array(x)
    np.testing.assert_allclose(h0, ss.hankel1(0, x), rtol=1e-9)
    np.testing.assert_allclose(h1, ss.hankel1(1, x), rtol=1e-9)


def test_fundamental_solution_value():
    k = 1.0
    x0 = np.array([3.0, 0.0])
    pts = np.array([[0.0, 0.0], [1.0, 1.0], [-2.0, 0.5]])
    r = np.linalg.norm(pts - x0, axis=1)
    expected = 0.25j * ss.hankel1(0, k * r)
    np.testing.assert_allclose(fundamental_solution(pts, x0, k), expected, rtol=1e-9)


def test_fundamental_solution_gradient_finite_difference():
    k, x0 = 1.0, np.array([3.0, 0.0])
    pts = np.array([[0.2, 0.7], [-1.0, 1.5]])
    grad = fundamental_solution_gradient(pts, x0, k)
    eps = 1e-6
    for axis in range(2):
        shift = np.zeros(2)
        shift[axis] = eps
        fd = (
            fundamental_solution(pts + shift, x0, k)
            - fundamental_solution(pts - shift, x0, k)
        ) / (2 * eps)
        np.testing.assert_allclose(grad[:, axis], fd, rtol=1e-6)


def test_fundamental_solution_solves_helmholtz():
    # 5-point Laplacian of Phi + k^2 Phi ~ 0 away from the source
    k, x0, hh = 1.0, np.array([3.0, 0.0]), 1e-3
    p = np.array([[0.4, -0.9]])
    stencil = [np.array(s) for s in ([hh, 0], [-hh, 0], [0, hh], [0, -hh])]
    lap = sum(fundamental_solution(p + s, x0, k) for s in stencil)
    lap = (lap - 4 * fundamental_solution(p, x0, k)) / hh**2
    resid = lap + k**2 * fundamental_solution(p, x0, k)
    assert abs(resid[0]) < 1e-5
