"""Reflectionless N-soliton solutions of DP.

Two evaluators share one parametrisation (zeta_n, c_n):

* the residue system of the row-vector RH problem m = (1,1,1) M.  Each pole
  carries the six-point orbit {w^l zeta, w^l conj(zeta)} and a residue in a
  single component.  Solutions are exact for one pole;
* the tau-function form, exact for every N.  Its per-soliton phases are read
  off the one-pole RH solution so both evaluators agree term by term.

``method="auto"`` uses the RH system when N <= 1 and the tau form otherwise.
Reconstruction: x = y + log(m3/m1)(e^{i pi/6}) and u = d/dt of the same
logarithm at fixed y.
"""
from dataclasses import dataclass

import numpy as np

from . import spectral as sp
from .scattering import DiscreteSpectrum, Pole, ScatteringData

W = sp.OMEGA
TAU_IDX = (1, 0, 2)          # conjugation swaps columns 1 and 2
REALITY_TOL = 1e-6           # catches branch failures; round-off grows with |y|, |t|
RH_ETA_MAX = 25.0            # |phase| beyond which the one-pole RH solve hands over to tau


class DegenerateSpectrumError(RuntimeError):
    pass


class ReconstructionError(RuntimeError):
    pass


class CoordinateFoldError(RuntimeError):
    pass


def residue_constant(pole):
    """Residue constant C = i zeta c for a pole on the unit circle."""
    return 1j * complex(pole.zeta) * pole.c


@dataclass(frozen=True)
class OrbitPoint:
    k: complex
    C: complex
    a: int          # residue of component b is proportional to component a
    b: int


def orbit(zeta, C):
    """Six orbit points with their residue pairings, starting from (1, 2) at zeta."""
    zeta, C = complex(zeta), complex(C)
    a, b = 0, 1
    if zeta.imag < 0:
        zeta, C, a, b = zeta.conjugate(), C.conjugate(), 1, 0
    pts = []
    for z, c, aa, bb in ((zeta, C, a, b), (zeta.conjugate(), C.conjugate(), TAU_IDX[a], TAU_IDX[b])):
        for _ in range(3):
            pts.append(OrbitPoint(z, c, aa, bb))
            z, c, aa, bb = W * z, W * c, (aa - 1) % 3, (bb - 1) % 3
    return pts


def orbit_points(data):
    pts = []
    for q in _spectrum(data):
        pts += orbit(q.zeta, residue_constant(q))
    ks = np.array([p.k for p in pts])
    if len(ks) and np.min(np.abs(ks[:, None] - ks[None, :]) + np.eye(len(ks))) < 1e-10:
        raise DegenerateSpectrumError("orbit points collide")
    return pts


def _spectrum(data):
    """Discrete spectrum with every pole moved to the upper half plane.

    zeta and conj(zeta) label the same six-point orbit, so conjugate data
    describe the same solution.
    """
    if isinstance(data, ScatteringData):
        data = data.discrete
    poles = tuple(data)
    if all(complex(q.zeta).imag >= 0 for q in poles):
        return data if isinstance(data, DiscreteSpectrum) else DiscreteSpectrum(poles)
    return DiscreteSpectrum(tuple(
        q if complex(q.zeta).imag >= 0 else Pole(np.conj(complex(q.zeta)), q.c) for q in poles))


def _Q(j, k, y, t):
    l = sp.lam(j + 1, k)
    return l * y + t / l


def _rates(pts):
    """Exponent slopes of C e^{Q_a - Q_b}(p) in y and in t.

    Rotation leaves the slopes unchanged and conjugation conjugates them, so
    they are computed once per orbit and copied; independent evaluation
    leaves 1e-12 discrepancies that the residue system amplifies.
    """
    ry = np.empty(len(pts), complex)
    rt = np.empty(len(pts), complex)
    for o in range(0, len(pts), 6):
        p = pts[o]
        la, lb = sp.lam(p.a + 1, p.k), sp.lam(p.b + 1, p.k)
        sy, st = complex(la - lb), complex(1 / la - 1 / lb)
        # on the unit circle both slopes are real
        if abs(sy.imag) < 1e-12 * (1 + abs(sy)) and abs(st.imag) < 1e-12 * (1 + abs(st)):
            sy, st = sy.real + 0j, st.real + 0j
        ry[o:o + 3], rt[o:o + 3] = sy, st
        ry[o + 3:o + 6], rt[o + 3:o + 6] = sy.conjugate(), st.conjugate()
    return ry, rt


def assemble_system(data, y, t, pts=None):
    """Dense system A rho = g for the residues rho_s of m_{b_s} at p_s.

    rho_s = g_s m_{a_s}(p_s),  g_s = C_s e^{Q_a - Q_b}(p_s),  m_b = 1 + sum rho_r/(k - p_r).
    Returns (A, g, pts); y and t may be arrays (leading batch axes).
    """
    if pts is None:
        pts = orbit_points(data)
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    n = len(pts)
    ks = np.array([p.k for p in pts])
    Cs = np.array([p.C for p in pts])
    a = np.array([p.a for p in pts])
    b = np.array([p.b for p in pts])
    ry, rt = _rates(pts)
    g = Cs * np.exp(y[..., None] * ry + t[..., None] * rt)
    couple = (b[None, :] == a[:, None]) & ~np.eye(n, dtype=bool)
    K = np.where(couple, 1 / np.where(couple, ks[:, None] - ks[None, :], 1), 0)
    A = np.eye(n) - g[..., :, None] * K
    return A, g, pts


@dataclass
class MLambdaSolution:
    pts: list
    rho: np.ndarray        # (..., 6N)
    drho: np.ndarray       # d rho / dt at fixed y
    residual: float

    def m(self, k):
        return self._sum(self.rho, k, 1.0)

    def dm_dt(self, k):
        return self._sum(self.drho, k, 0.0)

    def _sum(self, r, k, base):
        out = np.full(r.shape[:-1] + (3,), base, dtype=complex)
        for s, p in enumerate(self.pts):
            out[..., p.b] += r[..., s] / (k - p.k)
        return out

    def residue_matrix(self, s):
        """Residue of M at orbit point s: only column b_s, which is rho_s times row-independent data."""
        R = np.zeros(self.rho.shape[:-1] + (3,), complex)
        R[..., self.pts[s].b] = self.rho[..., s]
        return R


def solve_mlambda(data, y, t, cond_max=1e12):
    A, g, pts = assemble_system(data, y, t)
    if not pts:
        shape = np.broadcast(np.asarray(y), np.asarray(t)).shape
        return MLambdaSolution([], np.zeros(shape + (0,)), np.zeros(shape + (0,)), 0.0)
    # row scaling keeps huge exponentials from dominating the conditioning
    s = 1 / (1 + np.abs(g))
    As = A * s[..., :, None]
    gs = g * s
    cond = np.linalg.cond(As)
    if np.any(cond > cond_max):
        raise DegenerateSpectrumError(f"residue system condition number {np.max(cond):.2e}")
    rho = np.linalg.solve(As, gs[..., None])[..., 0]
    _, rt = _rates(pts)
    # dA/dt = -(g rt) K = (A - I) rt row-wise; dg/dt = g rt
    dA = (A - np.eye(len(pts))) * rt[:, None]
    rhs = g * rt - (dA @ rho[..., None])[..., 0]
    drho = np.linalg.solve(As, (rhs * s)[..., None])[..., 0]
    res = np.max(np.abs((A @ rho[..., None])[..., 0] - g) / (1 + np.abs(g)))
    return MLambdaSolution(pts, rho, drho, float(res))


def m_row(data, y, t, k=sp.K0):
    return solve_mlambda(data, y, t).m(k)


def _modal_m(pts, y, t):
    """m and dm/dt at K0 for one pole, from the eigenmodes of the residue system.

    All six exponents share one rate, so A = I - E B with E = e^eta and B
    constant.  Modes of B invisible at K0 carry zero weight yet can make A
    nearly singular at real eta; dropping them removes the cancellation that
    the direct solve suffers there.
    """
    ry, rt = _rates(pts)
    Cs = np.array([p.C for p in pts])
    n = len(pts)
    ks = np.array([p.k for p in pts])
    a = np.array([p.a for p in pts])
    b = np.array([p.b for p in pts])
    couple = (b[None, :] == a[:, None]) & ~np.eye(n, dtype=bool)
    B = Cs[:, None] * np.where(couple, 1 / np.where(couple, ks[:, None] - ks[None, :], 1), 0)
    mu, V = np.linalg.eig(B)
    R = np.zeros((3, n), complex)
    R[b, np.arange(n)] = 1 / (sp.K0 - ks)
    w = (R @ V) * np.linalg.solve(V, Cs)[None, :]
    keep = np.max(np.abs(w), axis=0) > 1e-9 * np.max(np.abs(w))
    w, mu = w[:, keep], mu[keep]
    eta = np.clip(ry[0].real * y + rt[0].real * t, -700, 700)
    q = np.exp(-eta)[..., None] - mu                       # (1/E - mu)
    m = 1 + (1 / q) @ w.T
    dm = rt[0].real * (np.exp(-eta)[..., None] / q ** 2) @ w.T
    return m, dm


def _rh_log_ratio(data, y, t):
    pts = orbit_points(data)
    if len(pts) == 6:
        m, dm = _modal_m(pts, np.asarray(y, float), np.asarray(t, float))
    else:
        sol = solve_mlambda(data, y, t)
        m, dm = sol.m(sp.K0), sol.dm_dt(sp.K0)
    R = m[..., 2] / m[..., 0]
    if np.any(np.abs(m[..., 0]) < 1e-300) or np.any(R.real <= 0):
        raise ReconstructionError("m3/m1 left the right half plane")
    u = dm[..., 2] / m[..., 2] - dm[..., 0] / m[..., 0]
    return np.log(R).real, u.real, np.max(np.abs(np.log(R).imag)), np.max(np.abs(u.imag))


# -- tau form -------------------------------------------------------------------

def soliton_phi(p):
    """Phase constant phi(p) = (1/2) log[(1-p)(2-p) / ((1+p)(2+p))]."""
    return 0.5 * np.log((1 - p) * (2 - p) / ((1 + p) * (2 + p)))


def interaction(pa, pb):
    """Pairwise phase shift gamma_ab of the tau form."""
    num = (pa - pb) ** 2 * (pa * pa - pa * pb + pb * pb - 3)
    den = (pa + pb) ** 2 * (pa * pa + pa * pb + pb * pb - 3)
    return np.log(num / den)


def calibrate_phase(pole):
    """sigma with eta = -p (y - V t) + sigma matching the one-pole RH solution."""
    p, phi = pole.p, soliton_phi(pole.p)
    data = DiscreteSpectrum((pole,))
    y = 0.0
    for _ in range(3):
        lr, *_ = _rh_log_ratio(data, np.array(y), np.array(0.0))
        R = np.exp(lr)
        eta = np.log((1 - R) / (R * np.exp(phi) - np.exp(-phi)))
        sigma = float(eta + p * y)
        y = sigma / p           # re-evaluate at the soliton centre
    return sigma


class TauSoliton:
    """x = y + log(f+/f-), f+- = sum_nu exp(sum nu_i (eta_i -+ phi_i) + sum gamma_ij nu_i nu_j)."""

    def __init__(self, p, sigma):
        self.p = np.asarray(p, dtype=float)
        self.sigma = np.asarray(sigma, dtype=float)
        self.V = 3 / (1 - self.p ** 2)
        self.phi = soliton_phi(self.p)
        n = len(self.p)
        self.gamma = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                self.gamma[i, j] = interaction(self.p[i], self.p[j])
        self.nu = np.array(np.meshgrid(*[[0, 1]] * n, indexing="ij")).reshape(n, -1).T \
            if n else np.zeros((1, 0))
        self.pair = np.einsum("mi,ij,mj->m", self.nu, self.gamma, self.nu)

    @classmethod
    def from_data(cls, data):
        poles = list(_spectrum(data))
        return cls([q.p for q in poles], [calibrate_phase(q) for q in poles])

    def _weights(self, y, t, sign):
        eta = -self.p * (y[..., None] - self.V * t[..., None]) + self.sigma
        E = (eta - sign * self.phi) @ self.nu.T + self.pair
        Emax = E.max(axis=-1, keepdims=True)
        w = np.exp(E - Emax)
        S = w.sum(axis=-1)
        return Emax[..., 0] + np.log(S), w / S[..., None]

    def log_ratio(self, y, t):
        y, t = np.broadcast_arrays(np.asarray(y, float), np.asarray(t, float))
        lp, wp = self._weights(y, t, +1)
        lm, wm = self._weights(y, t, -1)
        deta_dt = self.p * self.V
        dE = self.nu @ deta_dt
        u = (wp - wm) @ dE
        return lp - lm, u


# -- public reconstruction -----------------------------------------------------

def _pick(data, method):
    n = len(_spectrum(data))
    if method == "auto":
        method = "rh" if n <= 1 else "tau"
    if method not in ("rh", "tau"):
        raise ValueError(f"unknown method {method!r}")
    return method


class NSoliton:
    """Evaluator bound to one discrete spectrum."""

    def __init__(self, data, method="auto"):
        self.spectrum = _spectrum(data)
        self.method = _pick(self.spectrum, method)
        self.tau = TauSoliton.from_data(self.spectrum)
        self.shift_bound = float(-2 * sum(soliton_phi(q.p) for q in self.spectrum))

    def log_ratio(self, y, t):
        y, t = np.broadcast_arrays(np.asarray(y, float), np.asarray(t, float))
        if len(self.spectrum) == 0:
            return np.zeros(y.shape), np.zeros(y.shape)
        if self.method == "tau":
            return self.tau.log_ratio(y, t)
        # far from the soliton centre the residue solve loses digits; the
        # calibrated tau form is exact there and overflow-safe
        lr, u = self.tau.log_ratio(y, t)
        eta = -self.tau.p[0] * (y - self.tau.V[0] * t) + self.tau.sigma[0]
        near = np.abs(eta) < RH_ETA_MAX
        if np.any(near):
            lr_n, u_n, im_lr, im_u = _rh_log_ratio(self.spectrum, y[near], t[near])
            if im_lr > REALITY_TOL or im_u > REALITY_TOL * (1 + np.max(np.abs(u_n))):
                raise ReconstructionError("m3/m1 is not real at e^{i pi/6}")
            lr[near], u[near] = lr_n, u_n
        return lr, u

    def x_of_y(self, y, t):
        return np.asarray(y, float) + self.log_ratio(y, t)[0]

    def u_of_y(self, y, t):
        return self.log_ratio(y, t)[1]

    def y_of_x(self, x, t, tol=1e-13):
        """Invert y -> x(y, t) by vectorised bisection; x - y lies in [0, shift_bound]."""
        x, t = np.broadcast_arrays(np.asarray(x, float), np.asarray(t, float))
        lo = x - self.shift_bound - 1.0
        hi = x + 1.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            right = self.x_of_y(mid, t) > x
            hi = np.where(right, mid, hi)
            lo = np.where(right, lo, mid)
            if np.max(hi - lo) < tol:
                break
        return 0.5 * (lo + hi)

    def u_of_x(self, x, t):
        return self.u_of_y(self.y_of_x(x, t), t)

    def check_monotone(self, t, y_range, n=2048):
        y = np.linspace(*y_range, n)
        dx = np.diff(self.x_of_y(y, np.full(n, float(t))))
        if np.min(dx) <= 0:
            raise CoordinateFoldError("x(y) is not increasing")
        return float(np.min(dx) / (y[1] - y[0]))


def reconstruct_uy(y, t, data, method="auto"):
    return NSoliton(data, method).u_of_y(y, t)


def x_of_y(y, t, data, method="auto"):
    return NSoliton(data, method).x_of_y(y, t)


def u_of_x(x, t, data, method="auto"):
    return NSoliton(data, method).u_of_x(x, t)


def single_soliton(zeta, c, x, t):
    return NSoliton(DiscreteSpectrum((Pole(complex(zeta), float(c)),)), "rh").u_of_x(x, t)


def speed(zeta):
    """Soliton speed 3/(1 - 4 sin^2 arg zeta)."""
    p = 2 * np.sin(np.angle(zeta))
    return 3 / (1 - p * p)
