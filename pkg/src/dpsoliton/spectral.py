"""Spectral-plane geometry for the DP Lax problem.

Eigenvalue functions lambda_j(k), the cube root z(k), phase functions
theta_ij, real stationary phase points of theta_12, the critical line and the
space-time region labels.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq

OMEGA = np.exp(2j * np.pi / 3)
K0 = np.exp(1j * np.pi / 6)          # reconstruction point e^{i pi/6}
SQ3 = np.sqrt(3.0)
XI_LEFT, XI_MID, XI_RIGHT = -3 / 8, 0.0, 3.0
BOUNDARY_TOL = 1e-6


class DegenerateRegionError(ValueError):
    """xi sits on (or too close to) a region boundary."""


class RegionLabel(Enum):
    SOLITONIC_LEFT = "SolitonicLeft"
    ZM24 = "ZM24"
    ZM12 = "ZM12"
    SOLITONIC_RIGHT = "SolitonicRight"

    @property
    def solitonic(self):
        return self in (RegionLabel.SOLITONIC_LEFT, RegionLabel.SOLITONIC_RIGHT)


@dataclass(frozen=True)
class FrameCoordinates:
    x: float
    y: float
    t: float

    @property
    def xi(self):
        return self.x / self.t

    @property
    def xi_hat(self):
        return self.y / self.t


@dataclass(frozen=True)
class PhasePointSet:
    xi_hat: float
    points: np.ndarray      # strictly descending real k_i

    @property
    def count(self):
        return len(self.points)


def _check_k(k):
    k = np.asarray(k, dtype=complex)
    if np.any(k == 0):
        raise ValueError("k = 0 is outside the spectral domain")
    return k


def lam(j, k):
    """lambda_j(k) = (w^j k + 1/(w^j k)) / sqrt(3)."""
    k = _check_k(k)
    a = OMEGA ** (j % 3) * k
    return (a + 1 / a) / SQ3


def dlam(j, k):
    k = _check_k(k)
    wj = OMEGA ** (j % 3)
    return wj * (1 - 1 / (wj * k) ** 2) / SQ3


def z_of_k(k):
    """z(k) = k (1 + k^-6)^(1/3) / sqrt(3), principal cube root."""
    k = _check_k(k)
    s = 1 + k ** -6.0
    if np.any(np.abs(s) < 1e-14):
        raise ValueError("k^6 = -1 is a branch point of z(k)")
    return k * s ** (1 / 3) / SQ3


def theta(i, j, k, xi_hat):
    """theta_ij with Q_i - Q_j = i t theta_ij at y = xi_hat t."""
    li, lj = lam(i, k), lam(j, k)
    if np.any(li == 0) or np.any(lj == 0):
        raise ValueError("theta evaluated at a zero of lambda")
    return -1j * (xi_hat * (li - lj) + (1 / li - 1 / lj))


def dtheta12_dk(k, xi_hat):
    l1, l2 = lam(1, k), lam(2, k)
    d1, d2 = dlam(1, k), dlam(2, k)
    return -1j * (xi_hat * (d1 - d2) - d1 / l1 ** 2 + d2 / l2 ** 2)


def d2theta12_dk2(k, xi_hat, h=1e-5):
    # central difference of the analytic first derivative, plenty for curvatures
    k = np.asarray(k, dtype=float)
    return (dtheta12_dk(k + h, xi_hat) - dtheta12_dk(k - h, xi_hat)) / (2 * h)


def classify_region(xi):
    for b in (XI_LEFT, XI_MID, XI_RIGHT):
        if abs(xi - b) < BOUNDARY_TOL:
            raise DegenerateRegionError(f"xi = {xi} is on the region boundary {b}")
    if xi < XI_LEFT:
        return RegionLabel.SOLITONIC_LEFT
    if xi < XI_MID:
        return RegionLabel.ZM24
    if xi < XI_RIGHT:
        return RegionLabel.ZM12
    return RegionLabel.SOLITONIC_RIGHT


def _dtheta_real(k, xi_hat):
    return dtheta12_dk(k, xi_hat).real


def phase_points(xi_hat):
    """Real zeros of d theta_12 / dk, sorted descending.

    Sign-change scan on a geometric grid of |k| followed by Brent refinement.
    """
    region = classify_region(xi_hat)
    if region.solitonic:
        return PhasePointSet(xi_hat, np.array([]))
    # roots sit at |k - 1/k| <= sqrt(s) with s ~ 3/|xi_hat| near xi_hat = 0
    kmax = max(1e3, 10 * np.sqrt(3 / abs(xi_hat)) + 10)
    grid = np.geomspace(1 / kmax, kmax, 20000)
    roots = []
    for sgn in (1.0, -1.0):
        g = sgn * grid
        f = _dtheta_real(g, xi_hat)
        idx = np.nonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)[0]
        for i in idx:
            roots.append(brentq(_dtheta_real, g[i], g[i + 1], args=(xi_hat,),
                                xtol=1e-15, rtol=1e-15, maxiter=200))
    pts = np.array(sorted(roots, reverse=True))
    expected = 4 if region is RegionLabel.ZM12 else 8
    if len(pts) != expected:
        raise DegenerateRegionError(
            f"found {len(pts)} phase points at xi_hat={xi_hat}, expected {expected}")
    return PhasePointSet(xi_hat, pts)


def critical_line(xi_hat):
    """L = (sqrt3/2) sqrt(1 + 1/xi_hat), or None when the radicand is negative."""
    if xi_hat == 0:
        raise ValueError("critical line undefined at xi_hat = 0")
    s = 1 + 1 / xi_hat
    if s < 0:
        return None
    return SQ3 / 2 * np.sqrt(s)


def indicator_set(xi_hat, pp):
    """The set I(xi_hat) as a list of open intervals (a, b); a may be -inf."""
    if pp.xi_hat != xi_hat:
        raise ValueError("phase point set was computed for a different xi_hat")
    region = classify_region(xi_hat)
    k = pp.points
    if region is RegionLabel.SOLITONIC_LEFT:
        return [(-np.inf, np.inf)]
    if region is RegionLabel.SOLITONIC_RIGHT:
        return []
    if region is RegionLabel.ZM12:
        if len(k) != 4:
            raise ValueError("ZM12 region needs 4 phase points")
        return [(k[3], k[2]), (k[1], k[0])]
    if len(k) != 8:
        raise ValueError("ZM24 region needs 8 phase points")
    out = [(-np.inf, k[7])]
    out += [(k[2 * i], k[2 * i - 1]) for i in (3, 2, 1)]
    out.append((k[0], np.inf))
    return out


def in_intervals(k, intervals):
    k = np.asarray(k, dtype=float)
    inside = np.zeros(k.shape, dtype=bool)
    for a, b in intervals:
        inside |= (k > a) & (k < b)
    return inside
