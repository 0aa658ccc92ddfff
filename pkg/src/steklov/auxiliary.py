"""Series solver for the exterior impedance scattering problem.

For a point source on the source circle C, the auxiliary field u_lambda
solves the Helmholtz equation outside Gamma, radiates at infinity, and
satisfies the impedance condition du/dnu + lambda*u = 0 on Gamma.  With
Gamma a circle this separates into Fourier-Hankel modes and the solution
is a short series, evaluated here for every source at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import SceneConfig
from .special import bessel_j, bessel_jp, hankel1, hankel1p


class AuxiliaryResonanceError(RuntimeError):
    """The modal impedance denominator vanished for some mode."""

    def __init__(self, mode: int, lam: complex):
        self.mode = mode
        self.lam = lam
        super().__init__(
            f"impedance denominator vanishes at mode {mode} for lambda = {lam}"
        )


@dataclass(eq=False)
class AuxSolution:
    """Impedance-problem traces on Gamma for every source.

    Attributes
    ----------
    lam : complex
        The impedance constant lambda.
    coefficients : ndarray, shape (n_sources, 2M+1)
        Scattered-part Hankel coefficients a_m, m = -M..M.
    truncation : int
        Series truncation order M.
    u : ndarray, shape (n_sources, n_receivers)
        Total field u_lambda at the receiver points.
    dnu : ndarray, same shape
        Normal derivative; equals -lam * u exactly, by the boundary
        condition the series is built to satisfy.
    resonance_proximity : float
        min over modes of |k H_m' + lam H_m| / (|k H_m'| + |lam H_m|);
        small values mean lam sits near an exterior impedance resonance
        and the solution is untrustworthily large.
    """

    lam: complex
    coefficients: np.ndarray
    truncation: int
    u: np.ndarray
    dnu: np.ndarray
    resonance_proximity: float = 1.0


def _cylinder_table(k: float, radius: float, mmax: int):
    """J, J', H, H' at k*radius for modes 0..mmax."""
    x = k * radius
    j = np.array([bessel_j(m, x) for m in range(mmax + 1)])
    jp = np.array([bessel_jp(m, x) for m in range(mmax + 1)])
    h = np.array([hankel1(m, x) for m in range(mmax + 1)])
    hp = np.array([hankel1p(m, x) for m in range(mmax + 1)])
    return j, jp, h, hp


def solve_auxiliary(
    cfg: SceneConfig,
    lam: complex,
    receiver_points: np.ndarray | None = None,
    initial_truncation: int = 40,
) -> AuxSolution:
    """Solve the auxiliary impedance problem for every source on C.

    Parameters
    ----------
    cfg : SceneConfig
        Scene; provides k, the Gamma radius R, the source circle radius
        and the source count.
    lam : complex
        Impedance constant.  Im(lam) >= 0 is the provably well-posed
        regime; for Im(lam) < 0 (scanned routinely by complex-grid
        sweeps) the series still evaluates, and ``resonance_proximity``
        tells how close lam sits to an exterior resonance.
    receiver_points : array, shape (n_receivers, 2), optional
        Evaluation points on Gamma.  Defaults to cfg's uniform receiver
        angles at radius R.

    Returns
    -------
    AuxSolution
        Traces and fluxes on Gamma; the flux is -lam * trace exactly.

    Raises
    ------
    AuxiliaryResonanceError
        If k*H_m'(kR) + lam*H_m(kR) vanishes for some retained mode
        (an exterior impedance resonance).
    """
    lam = complex(lam)
    k = cfg.wavenumber
    R = cfg.gamma_radius
    rc = cfg.source_radius
    theta0 = 2.0 * np.pi * np.arange(cfg.n_sources) / cfg.n_sources

    if receiver_points is None:
        phi = 2.0 * np.pi * np.arange(cfg.n_receivers) / cfg.n_receivers
    else:
        receiver_points = np.asarray(receiver_points, dtype=float)
        phi = np.arctan2(receiver_points[:, 1], receiver_points[:, 0])

    M = initial_truncation
    while True:
        jr, jpr, hr, hpr = _cylinder_table(k, R, M)
        num = k * jpr + lam * jr
        den = k * hpr + lam * hr
        scale_den = (abs(k) * np.abs(hpr) + abs(lam) * np.abs(hr)).clip(min=1e-300)
        proximity = float(np.min(np.abs(den) / scale_den))
        small = np.abs(den) < 1e-10 * scale_den
        if np.any(small):
            raise AuxiliaryResonanceError(int(np.nonzero(small)[0][0]), lam)
        hc = np.array([hankel1(m, k * rc) for m in range(M + 1)])
        # scattered coefficient (source-angle part split off): a_m = base_m * exp(-i m theta0)
        base = -0.25j * hc * num / den
        # total trace coefficient of exp(i m (theta - theta0)) on Gamma
        total = 0.25j * hc * jr + base * hr
        scale = np.abs(base).max()
        if scale == 0.0 or abs(base[M]) < 1e-12 * scale:
            break
        M *= 2

    # negative orders by symmetry: every factor has order parity (-1)^m,
    # appearing an even number of times, so coefficients are even in m
    orders = np.arange(-M, M + 1)
    sym = total[np.abs(orders)]
    phase = np.exp(1j * np.outer(orders, phi))  # (2M+1, n_receivers)
    src_phase = np.exp(-1j * np.outer(theta0, orders))  # (n_sources, 2M+1)
    u = (src_phase * sym[None, :]) @ phase

    # a_{-m} = (-1)^m a_m: one Hankel factor flips sign under m -> -m
    parity = np.where((orders < 0) & (orders % 2 != 0), -1.0, 1.0)
    coeffs = src_phase * (parity * base[np.abs(orders)])[None, :]
    return AuxSolution(
        lam=lam, coefficients=coeffs, truncation=M, u=u, dnu=-lam * u,
        resonance_proximity=proximity,
    )
