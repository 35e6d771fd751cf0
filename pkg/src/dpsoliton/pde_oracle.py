"""Pseudo-spectral RK4 integrator for DP on a periodic box.

Uses the nonlocal form

    u_t = -u u_x - d/dx (1 - d^2/dx^2)^{-1} [ (3/2) u^2 + 3 kappa u ]

with kappa = 1 unless overridden.  Quadratic products are dealiased with the
2/3 rule.  The right-hand side is an exact x-derivative, so the mean of u is
conserved to round-off.
"""
from dataclasses import dataclass, field

import numpy as np


class BlowUpError(RuntimeError):
    pass


class StepSizeError(ValueError):
    pass


@dataclass(frozen=True)
class PeriodicGrid:
    L: float
    N: int

    def __post_init__(self):
        if self.N < 256 or self.N & (self.N - 1):
            raise ValueError("N must be a power of two, at least 256")

    @property
    def dx(self):
        return 2 * self.L / self.N

    @property
    def x(self):
        return -self.L + self.dx * np.arange(self.N)

    @property
    def mu(self):
        return 2 * np.pi * np.fft.fftfreq(self.N, self.dx)

    @property
    def dealias(self):
        mu = np.abs(self.mu)
        return mu < (2 / 3) * mu.max()

    def check_resolution(self, width):
        """At least 16 points across a feature of the given width."""
        if width / self.dx < 16:
            raise ValueError(f"dx = {self.dx:.3g} under-resolves width {width}")


@dataclass
class WaveField:
    grid: PeriodicGrid
    u: np.ndarray
    t: float = 0.0

    def mass(self):
        return float(np.sum(self.u) * self.grid.dx)

    def copy(self):
        return WaveField(self.grid, self.u.copy(), self.t)

    def m_positive(self):
        """1 + u - u_xx > 0, needed before handing the field to forward scattering."""
        mu = self.grid.mu
        uxx = np.fft.ifft(-mu ** 2 * np.fft.fft(self.u)).real
        return bool(np.all(1 + self.u - uxx > 0))


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    mass: list = field(default_factory=list)


def nonlocal_rhs(field_or_u, grid=None, kappa=1.0):
    if isinstance(field_or_u, WaveField):
        u, grid = field_or_u.u, field_or_u.grid
    else:
        u = np.asarray(field_or_u, dtype=float)
    mu, cut = grid.mu, grid.dealias
    uh = np.fft.fft(u)
    ux = np.fft.ifft(1j * mu * uh).real
    uux = np.fft.fft(u * ux)
    sq = np.fft.fft(1.5 * u * u)
    rh = -uux * cut - 1j * mu * (sq * cut + 3 * kappa * uh) / (1 + mu ** 2)
    out = np.fft.ifft(rh).real
    if not np.all(np.isfinite(out)):
        raise BlowUpError("non-finite values in the right-hand side")
    return out


def cfl_limit(field):
    return 0.5 * field.grid.dx / (3 + np.max(np.abs(field.u)))


def rk4_step(field, dt, kappa=1.0, check_cfl=True):
    if check_cfl and abs(dt) > cfl_limit(field) * (1 + 1e-12):
        raise StepSizeError(f"dt = {dt} exceeds the CFL bound {cfl_limit(field):.4g}")
    g, u = field.grid, field.u
    k1 = nonlocal_rhs(u, g, kappa)
    k2 = nonlocal_rhs(u + dt / 2 * k1, g, kappa)
    k3 = nonlocal_rhs(u + dt / 2 * k2, g, kappa)
    k4 = nonlocal_rhs(u + dt * k3, g, kappa)
    return WaveField(g, u + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4), field.t + dt)


def run(field, t_end, dt=None, snapshot_times=(), kappa=1.0, blowup=1e3, observer=None):
    """Advance to t_end (either direction), landing exactly on each snapshot time."""
    traj = Trajectory()
    cur = field.copy()
    targets = sorted(set(float(s) for s in snapshot_times) | {float(t_end)},
                     reverse=t_end < cur.t)
    for target in targets:
        span = target - cur.t
        if span == 0:
            traj.times.append(cur.t)
            traj.snapshots.append(cur.u.copy())
            traj.mass.append(cur.mass())
            continue
        h = dt if dt is not None else 0.9 * cfl_limit(cur)
        n = max(1, int(np.ceil(abs(span) / h - 1e-9)))
        step = span / n
        for _ in range(n):
            cur = rk4_step(cur, step, kappa, check_cfl=dt is None)
            if np.max(np.abs(cur.u)) > blowup:
                raise BlowUpError(f"max|u| exceeded {blowup} at t = {cur.t:.4g}")
            if observer is not None:
                observer(cur)
        cur.t = target
        traj.times.append(target)
        traj.snapshots.append(cur.u.copy())
        traj.mass.append(cur.mass())
    return cur, traj


def edge_amplitude(u, frac=0.02):
    n = max(1, int(len(u) * frac))
    return float(max(np.max(np.abs(u[:n])), np.max(np.abs(u[-n:]))))
