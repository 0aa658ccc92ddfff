"""Bessel/Hankel evaluations and the 2D Helmholtz point-source field.

All cylinder functions are computed in-package (ascending series plus
Miller backward recurrence for J, Neumann series plus upward recurrence
for Y) so that results are bit-stable across platforms.  Arguments are
real; a small complex-argument J series is provided for the layered-disc
eigenvalue oracle, where the core wavenumber k*sqrt(n) may be complex.
"""

from __future__ import annotations

import numpy as np

EULER_GAMMA = 0.5772156649015328606

_RESCALE = 1e250


def _miller_j_all(mmax: int, x: float) -> np.ndarray:
    """J_0(x)..J_mmax(x) by backward recurrence with series normalization."""
    if x == 0.0:
        out = np.zeros(mmax + 1)
        out[0] = 1.0
        return out
    start = max(mmax, int(abs(x))) + 42
    start += start % 2  # even start keeps the normalization sum aligned
    vals = np.empty(start + 2)
    vals[start + 1] = 0.0
    vals[start] = 1e-300
    for m in range(start, 0, -1):
        vals[m - 1] = (2.0 * m / x) * vals[m] - vals[m + 1]
        if abs(vals[m - 1]) > _RESCALE:
            vals[m - 1 :] /= _RESCALE
    norm = vals[0] + 2.0 * vals[2 : start + 1 : 2].sum()
    return vals[: mmax + 1] / norm


def _y01(x: float, j_all: np.ndarray) -> tuple[float, float]:
    """Y_0(x) and Y_1(x) from the Neumann series over even-order J's."""
    c = np.log(0.5 * x) + EULER_GAMMA
    nmax = (len(j_all) - 2) // 2
    acc0 = 0.0
    acc1 = 0.0
    sign = 1.0
    for kk in range(1, nmax + 1):
        j2k = j_all[2 * kk]
        j2kp = 0.5 * (j_all[2 * kk - 1] - j_all[2 * kk + 1])
        acc0 += sign * j2k / kk
        acc1 += sign * j2kp / kk
        sign = -sign
    y0 = (2.0 / np.pi) * (c * j_all[0] + 2.0 * acc0)
    # Y1 = -Y0'
    y0p = (2.0 / np.pi) * (j_all[0] / x - c * j_all[1] + 2.0 * acc1)
    return y0, -y0p


def _jy_all(mmax: int, x: float) -> tuple[np.ndarray, np.ndarray]:
    """Arrays J_0..J_{mmax+1}(x) and Y_0..Y_{mmax+1}(x)."""
    if x <= 0.0:
        raise ValueError(f"argument must be positive, got {x}")
    j = _miller_j_all(max(mmax + 1, int(abs(x)) + 60), x)
    y0, y1 = _y01(x, j)
    y = np.empty(mmax + 2)
    y[0] = y0
    if mmax + 1 >= 1:
        y[1] = y1
    for m in range(1, mmax + 1):
        y[m + 1] = (2.0 * m / x) * y[m] - y[m - 1]
    return j[: mmax + 2], y


def _reduce_order(m: int) -> tuple[int, float]:
    if m < 0:
        return -m, (-1.0) ** (-m)
    return m, 1.0


def bessel_j(m: int, x: float) -> float:
    """Bessel function of the first kind J_m(x) for real x >= 0."""
    m, sgn = _reduce_order(m)
    if x < 0.0:
        raise ValueError(f"argument must be nonnegative, got {x}")
    if x == 0.0:
        return sgn if m == 0 else 0.0
    return sgn * float(_miller_j_all(m, x)[m])


def bessel_jp(m: int, x: float) -> float:
    """Derivative J_m'(x)."""
    m, sgn = _reduce_order(m)
    if m == 0:
        return -sgn * bessel_j(1, x)
    vals = _miller_j_all(m + 1, x)
    return sgn * 0.5 * float(vals[m - 1] - vals[m + 1])


def bessel_y(m: int, x: float) -> float:
    """Bessel function of the second kind Y_m(x) for real x > 0."""
    m, sgn = _reduce_order(m)
    _, y = _jy_all(m, x)
    return sgn * float(y[m])


def bessel_yp(m: int, x: float) -> float:
    """Derivative Y_m'(x)."""
    m, sgn = _reduce_order(m)
    _, y = _jy_all(m + 1, x)
    if m == 0:
        return -sgn * float(y[1])
    return sgn * 0.5 * float(y[m - 1] - y[m + 1])


def hankel1(m: int, x: float) -> complex:
    """Hankel function of the first kind H_m^(1)(x) = J_m(x) + i Y_m(x)."""
    m, sgn = _reduce_order(m)
    j, y = _jy_all(m, x)
    return sgn * complex(j[m], y[m])


def hankel1p(m: int, x: float) -> complex:
    """Derivative of H_m^(1)."""
    m, sgn = _reduce_order(m)
    j, y = _jy_all(m + 1, x)
    if m == 0:
        return -sgn * complex(j[1], y[1])
    return sgn * 0.5 * (complex(j[m - 1], y[m - 1]) - complex(j[m + 1], y[m + 1]))


def bessel_j_complex(m: int, z: complex) -> complex:
    """J_m(z) for complex z by the ascending power series.

    Intended for moderate |z| (the layered-disc oracle uses |z| <= ~5);
    the series is truncated once terms fall below 1e-18 relative.
    """
    m, sgn = _reduce_order(m)
    z = complex(z)
    if z == 0:
        return sgn if m == 0 else 0.0
    half = 0.5 * z
    # (z/2)^m / m!
    term = 1.0 + 0.0j
    for p in range(1, m + 1):
        term *= half / p
    total = term
    q = -half * half
    for j in range(1, 400):
        term *= q / (j * (j + m))
        total += term
        if abs(term) < 1e-18 * max(abs(total), 1e-280):
            break
    return sgn * total


def bessel_jp_complex(m: int, z: complex) -> complex:
    """J_m'(z) for complex z."""
    if m == 0:
        return -bessel_j_complex(1, z)
    return 0.5 * (bessel_j_complex(m - 1, z) - bessel_j_complex(m + 1, z))


# -- vectorized low-order evaluations (for point-source fields) -------------


def _jy01_array(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized (J0, J1, Y0, Y1) for an array of positive arguments."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise ValueError("arguments must be positive")
    start = int(np.max(x)) + 42
    start += start % 2
    vp1 = np.zeros_like(x)
    v = np.full_like(x, 1e-300)
    norm = np.zeros_like(x)
    acc0 = np.zeros_like(x)
    acc1 = np.zeros_like(x)
    j0 = j1 = None
    # downward recurrence; harvest what we need on the way
    for m in range(start, 0, -1):
        vm1 = (2.0 * m / x) * v - vp1
        big = np.abs(vm1) > _RESCALE
        if np.any(big):
            scale = np.where(big, 1.0 / _RESCALE, 1.0)
            vm1 = vm1 * scale
            v = v * scale
            norm = norm * scale
            acc0 = acc0 * scale
            acc1 = acc1 * scale
            if j1 is not None:
                j1 = j1 * scale
        # after this step: vm1 ~ J_{m-1}, v ~ J_m, vp1 ~ J_{m+1}
        if (m - 1) >= 2 and (m - 1) % 2 == 0:
            kk = (m - 1) // 2
            sign = -1.0 if kk % 2 == 0 else 1.0  # (-1)^(k+1)
            acc0 += sign * 2.0 * vm1 / kk
            # J_{2k}' = (J_{2k-1} - J_{2k+1})/2 with J_{2k-1} from the recurrence
            acc1 += sign * (((2.0 * (m - 1) / x) * vm1 - v) - v) / kk
            norm += 2.0 * vm1
        if m - 1 == 1:
            j1 = vm1
        if m - 1 == 0:
            j0 = vm1
        vp1 = v
        v = vm1
    norm = norm + j0
    j0 = j0 / norm
    j1 = j1 / norm
    acc0 = acc0 / norm
    acc1 = acc1 / norm
    c = np.log(0.5 * x) + EULER_GAMMA
    y0 = (2.0 / np.pi) * (c * j0 + acc0)
    y0p = (2.0 / np.pi) * (j0 / x - c * j1 + acc1)
    return j0, j1, y0, -y0p


def hankel1_01_array(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (H0^(1)(x), H1^(1)(x)) for positive arguments."""
    j0, j1, y0, y1 = _jy01_array(x)
    return j0 + 1j * y0, j1 + 1j * y1


def fundamental_solution(x: np.ndarray, x0: np.ndarray, k: float) -> np.ndarray:
    """Free-space Helmholtz field of a point source, (i/4) H0^(1)(k|x-x0|).

    Parameters
    ----------
    x : array, shape (..., 2)
        Evaluation points (must not coincide with the source).
    x0 : array, shape (2,)
        Source location.
    k : float
        Wavenumber.
    """
    x = np.asarray(x, dtype=float)
    d = np.linalg.norm(x - np.asarray(x0, dtype=float), axis=-1)
    if np.any(d == 0.0):
        raise ValueError("evaluation point coincides with the source")
    h0, _ = hankel1_01_array(k * np.atleast_1d(d.ravel()))
    out = (0.25j * h0).reshape(d.shape)
    return out if out.shape else out[()]


def fundamental_solution_gradient(x: np.ndarray, x0: np.ndarray, k: float) -> np.ndarray:
    """Gradient in x of the point-source field; shape (..., 2), complex."""
    x = np.asarray(x, dtype=float)
    diff = x - np.asarray(x0, dtype=float)
    d = np.linalg.norm(diff, axis=-1)
    if np.any(d == 0.0):
        raise ValueError("evaluation point coincides with the source")
    _, h1 = hankel1_01_array(k * np.atleast_1d(d.ravel()))
    h1 = h1.reshape(d.shape)
    # d/dr (i/4) H0(kr) = -(i/4) k H1(kr)
    coeff = -0.25j * k * h1 / d
    return coeff[..., None] * diff
