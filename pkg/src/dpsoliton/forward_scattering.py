"""Forward scattering: |r(k)| from decaying initial data.

The x-part of the Lax pair is integrated in the eigenbasis of the free
problem, written in the scale y(x) = x - int_x^inf (q - 1), where it reads

    dM/dy = [Lambda, M] + (U_hat / q) M.

The commutator is constant in y and is handled exactly by a Lawson
(integrating-factor) RK4 step, so only the smooth potential term is
discretised.  All k values are advanced together.
"""
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline

from .spectral import lam


class InvalidPotentialError(ValueError):
    pass


class ScatteringAccuracyError(RuntimeError):
    pass


@dataclass(frozen=True)
class Potential:
    x: np.ndarray
    u0: np.ndarray
    q: np.ndarray
    qx: np.ndarray
    y: np.ndarray          # y(x) = x - int_x^inf (q - 1)


def _spectral_dx(f, dx, order=1):
    mu = 2 * np.pi * np.fft.fftfreq(len(f), dx)
    return np.fft.ifft((1j * mu) ** order * np.fft.fft(f)).real


def q_of_u0(x, u0):
    """q = (1 + u0 - u0'')^(1/3) on a uniform grid where u0 has decayed at both ends."""
    x = np.asarray(x, dtype=float)
    u0 = np.asarray(u0, dtype=float)
    dx = x[1] - x[0]
    m = 1 + u0 - _spectral_dx(u0, dx, 2)
    if np.any(m <= 0):
        raise InvalidPotentialError("1 + u0 - u0'' must stay positive")
    q = np.cbrt(m)
    qx = _spectral_dx(q, dx)
    # Simpson integral of q - 1 from the right end
    w = q - 1
    tail = cumulative_simpson(w[::-1], dx=dx, initial=0.0)[::-1]
    return Potential(x, u0, q, qx, x - tail)


def _frame(k):
    l = np.stack([lam(1, k), lam(2, k), lam(3, k)], axis=-1)       # (nk, 3)
    P = np.stack([np.ones_like(l), l, l ** 2], axis=-2)               # (nk, 3, 3)
    return l, P, np.linalg.inv(P)


def _potential_on_y(pot, h):
    """Uniform y nodes (with half steps) and the scalars q, q_x there."""
    y0, y1 = pot.y[0], pot.y[-1]
    n = int(np.ceil((y1 - y0) / h))
    ys = np.linspace(y0, y0 + n * h, 2 * n + 1)
    xs = CubicSpline(pot.y, pot.x)(np.clip(ys, y0, y1))
    q = CubicSpline(pot.x, pot.q)(xs)
    qx = CubicSpline(pot.x, pot.qx)(xs)
    q[ys > y1] = 1.0
    qx[ys > y1] = 0.0
    return ys, q, qx


def _lawson(pot, k, h, backward):
    """Columns 1, 2 of the normalized Jost solution carried across the support.

    backward=True starts from I at the right end, otherwise from the left end.
    Returns the 3x2 block at the far end, in the free eigenbasis and with the
    free oscillation removed.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float)).astype(complex)
    l, P, Pi = _frame(k)
    ys, q, qx = _potential_on_y(pot, h)
    # U_hat/q = P^-1 Ut P / q with Ut = [[qx/q,0,0],[0,0,0],[0,1/q-q,-qx/q]]
    a = qx / q ** 2
    b = (1 / q - q) / q
    Pa = Pi[:, :, 0:1] * P[:, 0:1, :] - Pi[:, :, 2:3] * P[:, 2:3, :]    # coefficient of a
    Pb = Pi[:, :, 2:3] * P[:, 1:2, :]                                     # coefficient of b

    def G(i):
        return a[i] * Pa + b[i] * Pb

    D = l[:, :, None] - l[:, None, :2]            # (nk, 3, 2) rates for columns 1,2
    step = -h if backward else h
    E1 = np.exp(D * step)
    Eh = np.exp(D * step / 2)
    M = np.zeros((len(k), 3, 2), complex)
    M[:, 0, 0] = M[:, 1, 1] = 1
    nodes = range(len(ys) - 1, 0, -2) if backward else range(0, len(ys) - 1, 2)
    for i in nodes:
        im, ie = (i - 1, i - 2) if backward else (i + 1, i + 2)
        Gi, Gm, Ge = G(i), G(im), G(ie)
        k1 = Gi @ M
        k2 = Gm @ (Eh * (M + step / 2 * k1))
        k3 = Gm @ (Eh * M + step / 2 * k2)
        k4 = Ge @ (E1 * M + step * Eh * k3)
        M = E1 * M + step / 6 * (E1 * k1 + 2 * Eh * (k2 + k3) + k4)
    if not np.all(np.isfinite(M)):
        raise ScatteringAccuracyError("Jost integration overflowed")
    return M


def jost_integrate(pot, k, h=None):
    """Connection block S(k) between the Jost solutions on the (1, 2) channel.

    For k > 0 columns 1, 2 of the right-normalised solution are integrated
    leftwards; for k < 0 the left-normalised ones are integrated rightwards.
    Both directions are the numerically dominant ones.  The returned 2x2 block
    has the free oscillation stripped, so it reduces to I for u0 = 0.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if np.any(np.abs(k) < 1e-8):
        raise ValueError("k = 0 is a singular point")
    if h is None:
        # the potential term oscillates like e^{k y}; keep k h below 2
        h = min(float(np.median(np.diff(pot.y))), 2 / np.max(np.abs(k)))
    out = np.empty((len(k), 2, 2), complex)
    pos = k > 0
    if pos.any():
        out[pos] = _lawson(pot, k[pos], h, backward=True)[:, :2, :]
    if (~pos).any():
        out[~pos] = _lawson(pot, k[~pos], h, backward=False)[:, :2, :]
    return out


def reflection_coefficient(pot, k, h=None):
    """r(k) = S_21 / S_11 in the convention of jost_integrate."""
    S = jost_integrate(pot, k, h)
    return S[:, 1, 0] / S[:, 0, 0]


def reflection_magnitude(pot, k, h=None):
    r = np.abs(reflection_coefficient(pot, k, h))
    if np.any(r >= 1):
        raise ScatteringAccuracyError("|r| >= 1: integration not accurate enough")
    return r


def nu_of_r(r):
    return -np.log(1 - np.abs(r) ** 2) / (2 * np.pi)
