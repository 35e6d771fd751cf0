"""Long-time formulas.

Solitonic cones: the N-soliton with modified constants, and its resolution
into single solitons.  Zakharov-Manakov cones: the t^{-1/2} f_1 term built
from the parabolic-cylinder coefficients at the real phase points.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma

from . import scattering as sc
from . import spectral as sp
from .nsoliton import NSoliton, interaction, soliton_phi
from .scattering import DiscreteSpectrum, Pole

W = sp.OMEGA
# symmetry maps completing F_i on the rotated lines: swap(2,3) and swap(1,3)
GAMMA3 = np.array([[1, 0, 0], [0, 0, 1], [0, 1, 0]], dtype=complex)
GAMMA2 = np.array([[0, 0, 1], [0, 1, 0], [1, 0, 0]], dtype=complex)


class RegionError(ValueError):
    pass


class DegenerateCurvatureError(ValueError):
    pass


def eta(xi_hat, i):
    """Sign eta(xi_hat, i) for phase point i (1-based)."""
    region = sp.classify_region(xi_hat)
    if region is sp.RegionLabel.ZM24:
        return (-1) ** i
    if region is sp.RegionLabel.ZM12:
        return (-1) ** (i + 1)
    raise RegionError("eta is defined in the Zakharov-Manakov cones only")


def curvature(k, xi_hat):
    return sp.d2theta12_dk2(k, xi_hat)


def eta_tilde(xi_hat, i, pp):
    """Sign of theta_12'' at k_i, so that 4 t theta'' eta~ > 0."""
    th2 = curvature(pp.points[i - 1], xi_hat).real
    if abs(th2) < 1e-12:
        raise DegenerateCurvatureError("theta'' vanishes at a phase point")
    return 1 if th2 > 0 else -1


@dataclass(frozen=True)
class ZMCoefficients:
    k: float
    nu: float
    r: complex
    r_dressed: complex
    beta12: complex
    beta21: complex
    eta: int
    eta_tilde: int
    theta2: float


@lru_cache(maxsize=64)
def _zm_setup(xi_hat):
    region = sp.classify_region(xi_hat)
    if region not in (sp.RegionLabel.ZM12, sp.RegionLabel.ZM24):
        raise RegionError(f"xi_hat = {xi_hat} is not in a Zakharov-Manakov cone")
    pp = sp.phase_points(xi_hat)
    return region, pp, sp.indicator_set(xi_hat, pp)


def _H_regular(k, data, part, I_set):
    """H at a real endpoint of I(xi) with the (k - k_i)^{i nu} factor removed."""
    refl = data.reflection
    sup = refl.support()
    val = 1 + 0j
    for j in part.delta:
        z = complex(data.discrete.poles[j].zeta)
        val *= (k - z) / (k - np.conj(z))
    if sup is None or not I_set:
        return val
    nk = float(sc.nu(k, refl))
    J = 0.0
    for a, b in I_set:
        a, b = max(a, sup[0]), min(b, sup[1])
        if a >= b:
            continue
        f = lambda s: (sc.nu(s, refl) - nk) / (s - k) if s != k else 0.0
        J += quad(f, a, b, limit=400, points=[k] if a < k < b else None)[0]
        for e, sgn in ((b, 1), (a, -1)):
            if abs(e - k) > 1e-12:
                J += sgn * nk * np.log(abs(e - k))
    return val * np.exp(1j * J)


@lru_cache(maxsize=256)
def _r_static(i, xi_hat, data):
    """t-independent part r(k_i) T_12(k_i) of the dressed reflection coefficient."""
    _, pp, I_set = _zm_setup(xi_hat)
    k = pp.points[i - 1]
    r = complex(data.reflection(k))
    if r == 0:
        return 0j
    part = sc.partition(xi_hat, data.discrete)
    Hw2, Hw = sc.H_many(np.array([W ** 2 * k, W * k]), data, part, I_set)
    T12 = Hw2 * Hw / _H_regular(k, data, part, I_set) ** 2
    return r * T12


@lru_cache(maxsize=256)
def _point(i, xi_hat, data):
    """t-independent quantities at the phase point k_i."""
    _, pp, _ = _zm_setup(xi_hat)
    k = pp.points[i - 1]
    th2 = curvature(k, xi_hat).real
    if abs(th2) < 1e-12:
        raise DegenerateCurvatureError("theta'' vanishes at a phase point")
    return dict(k=k, theta=sp.theta(1, 2, k, xi_hat).real, theta2=th2,
                eta=eta(xi_hat, i), eta_tilde=eta_tilde(xi_hat, i, pp),
                nu=float(sc.nu(k, data.reflection)), r=complex(data.reflection(k)))


def r_dressed(i, xi_hat, t, data):
    """r(k_i) T_12(k_i) e^{-2 i t theta(k_i)} exp{-i eta nu log(4 t theta'' eta~)}."""
    xi_hat = float(xi_hat)
    rt = _r_static(i, xi_hat, data)
    if rt == 0:
        return 0j
    q = _point(i, xi_hat, data)
    return rt * np.exp(-2j * t * q["theta"]) \
        * np.exp(-1j * q["eta"] * q["nu"] * np.log(4 * t * q["theta2"] * q["eta_tilde"]))


def beta_coeffs(i, xi_hat, t, data, beta21="closed_form"):
    """(beta12, beta21) of the local parabolic-cylinder model at k_i.

    beta21="closed_form" uses the closed form with modulus nu/(1-|r|^2)^p;
    beta21="product" enforces beta12 beta21 = nu instead.
    """
    if beta21 not in ("closed_form", "product"):
        raise ValueError("beta21 must be 'closed_form' or 'product'")
    xi_hat = float(xi_hat)
    region, _, _ = _zm_setup(xi_hat)
    rk = r_dressed(i, xi_hat, t, data)
    if rk == 0:
        return 0j, 0j
    q = _point(i, xi_hat, data)
    nu_k, a = q["nu"], abs(q["r"]) ** 2
    if nu_k == 0:
        return 0j, 0j
    if region is sp.RegionLabel.ZM24:
        b12 = np.sqrt(2 * np.pi) / (np.conj(rk) * gamma(1j * nu_k)) \
            * np.exp(np.pi * nu_k / 2) * np.exp(-1j * np.pi / 4)
        mod = nu_k / (1 - a)
        arg = np.pi / 2 * nu_k - np.pi / 4 - np.angle(-np.conj(rk)) - np.angle(gamma(1j * nu_k))
    else:
        b12 = -np.sqrt(2 * np.pi) / (np.conj(rk) * gamma(-1j * nu_k)) \
            * np.exp(5 * np.pi * nu_k / 2) * np.exp(-7j * np.pi / 4)
        mod = nu_k / (1 - a) ** 3
        arg = 5 * np.pi / 2 * nu_k - 7 * np.pi / 4 - np.angle(-np.conj(rk)) \
            - np.angle(gamma(-1j * nu_k))
    if beta21 == "product":
        return complex(b12), complex(nu_k / b12)
    return complex(b12), complex(mod * np.exp(1j * arg))


def zm_coefficients(xi_hat, t, data, beta21="closed_form"):
    xi_hat = float(xi_hat)
    _, pp, _ = _zm_setup(xi_hat)
    out = []
    for i in range(1, pp.count + 1):
        q = _point(i, xi_hat, data)
        b12, b21 = beta_coeffs(i, xi_hat, t, data, beta21)
        out.append(ZMCoefficients(
            k=q["k"], nu=q["nu"], r=q["r"], r_dressed=r_dressed(i, xi_hat, t, data),
            beta12=b12, beta21=b21, eta=q["eta"], eta_tilde=q["eta_tilde"],
            theta2=float(q["theta2"])))
    return out


def _A(c):
    A = np.zeros((3, 3), complex)
    A[0, 1], A[1, 0] = c.beta12, c.beta21
    return A


def F_i(k, c, xi_hat):
    """Pole sum of one phase point completed on the two rotated lines."""
    ki = c.k
    pts = (ki, W * ki, W ** 2 * ki)
    if min(abs(k - p) for p in pts) < 1e-14:
        raise ZeroDivisionError("F_i evaluated at a pole")
    A = _A(c)
    # the rotated copies share the local scale of k_i
    s = [np.sqrt(abs(c.theta2))] * 3
    return (A / (s[0] * (k - pts[0]))
            + W * GAMMA3 @ A.conj() @ GAMMA3 / (s[1] * (k - pts[1]))
            + W ** 2 * GAMMA2 @ A.conj() @ GAMMA2 / (s[2] * (k - pts[2])))


def H0(xi_hat, t, data, Mr=None, beta21="closed_form"):
    """-(1/2) sum_i M^r(k_i) F_i(e^{i pi/6}) M^r(k_i)^{-1}; M^r = I unless given."""
    coeffs = zm_coefficients(xi_hat, t, data, beta21)
    out = np.zeros((3, 3), complex)
    for c in coeffs:
        F = F_i(sp.K0, c, xi_hat)
        if Mr is not None:
            M = Mr(c.k)
            F = M @ F @ np.linalg.inv(M)
        out += F
    return -0.5 * out


def _phase_rate(k, xi_hat, hold):
    """d/dt of t theta_12(k_i) along the chosen path."""
    if hold == "y":
        l1, l2 = sp.lam(1, k), sp.lam(2, k)
        return (-1j * (1 / l1 - 1 / l2)).real
    if hold == "xi_hat":
        return sp.theta(1, 2, k, xi_hat).real
    raise ValueError("hold must be 'y' or 'xi_hat'")


def f1(xi_hat, t, data, hold="y", columns=(2, 1), Mr=None, beta21="closed_form"):
    """sum_j d/dt (H0_{j,a} - H0_{j,b}) for columns (a, b), derivative taken analytically.

    Every beta carries the factor e^{-2 i t theta(k_i)} t^{-i eta nu}; the
    conjugated blocks carry its conjugate.
    """
    ca, cb = columns[0] - 1, columns[1] - 1
    coeffs = zm_coefficients(xi_hat, t, data, beta21)
    total = 0j
    for c in coeffs:
        D = -2j * _phase_rate(c.k, xi_hat, hold) - 1j * c.eta * c.nu / t
        # beta12 carries e^{-2it theta} t^{-i eta nu}; the closed-form beta21 shares
        # that phase, while beta21 = nu / beta12 carries its inverse
        Ad = np.zeros((3, 3), complex)
        Ad[0, 1] = c.beta12 * D
        Ad[1, 0] = c.beta21 * (-D if beta21 == "product" else D)
        pts = (c.k, W * c.k, W ** 2 * c.k)
        s = [np.sqrt(abs(c.theta2))] * 3
        blocks = (Ad / (s[0] * (sp.K0 - pts[0])),
                  W * GAMMA3 @ Ad.conj() @ GAMMA3 / (s[1] * (sp.K0 - pts[1])),
                  W ** 2 * GAMMA2 @ Ad.conj() @ GAMMA2 / (s[2] * (sp.K0 - pts[2])))
        F = sum(blocks)
        if Mr is not None:
            M = Mr(c.k)
            F = M @ F @ np.linalg.inv(M)
        total += -0.5 * (F[:, ca].sum() - F[:, cb].sum())
    return total


def u_zm(x, t, data, **kw):
    """Leading Zakharov-Manakov term t^{-1/2} Re f_1 at xi = x/t."""
    return t ** -0.5 * f1(x / t, t, data, **kw).real


def f1_envelope(xi_hat, t, data, n=48, **kw):
    """Local oscillation amplitude of t^{-1/2} f_1: sweep the fast phase over one period."""
    _, pp, _ = _zm_setup(xi_hat)
    th0 = max(abs(sp.theta(1, 2, k, xi_hat).real) for k in pp.points)
    period = np.pi / th0
    vals = []
    for d in np.linspace(0, period, n, endpoint=False):
        vals.append(abs(f1(xi_hat, t + d, data, **kw).real))
    return t ** -0.5 * max(vals)


# -- solitonic cones ----------------------------------------------------------

def require_solitonic(x, t):
    xi = np.atleast_1d(np.asarray(x, float) / t)
    labels = {sp.classify_region(v).solitonic for v in (xi.min(), xi.max())}
    if labels != {True} or (xi.min() < sp.XI_LEFT < xi.max()):
        raise RegionError("window must lie inside one solitonic cone")


def modified_spectrum(data, xi):
    """Poles with constants modified by the reflection on I(xi)."""
    pp = sp.PhasePointSet(xi, np.array([]))
    I_set = sp.indicator_set(xi, pp)
    poles = []
    for n, q in enumerate(data.discrete):
        ct = sc.modified_constant(n, data, I_set)
        poles.append(Pole(q.zeta, float(abs(ct))))
    return DiscreteSpectrum(tuple(poles))


def soliton_region_u(x, t, data, method="auto"):
    """N-soliton approximant with modified constants, evaluated on a solitonic window."""
    x = np.asarray(x, float)
    require_solitonic(x, t)
    xi = float(np.mean(x) / t)
    spec = modified_spectrum(data, xi) if not data.reflectionless else data.discrete
    return NSoliton(spec, method).u_of_x(x, np.full_like(x, t))


def asymptotic_constants(spectrum, t_sign=1, rule="exact"):
    """Per-soliton constants of the far-separated pieces of an N-soliton.

    rule="exact" uses the pairwise shifts of the exact solution; rule="blaschke"
    applies the Blaschke ratio H(w^2 z) H(w z) / H(z)^2 over the poles ahead.
    """
    poles = list(spectrum)
    out = []
    for i, qi in enumerate(poles):
        ahead = [q for q in poles if (q.velocity > qi.velocity) == (t_sign > 0) and q is not qi]
        if rule == "exact":
            log_fac = sum(interaction(qi.p, q.p) - 2 * qi.p * soliton_phi(q.p) for q in ahead)
        elif rule == "blaschke":
            z = complex(qi.zeta)
            log_fac = 0.0
            for q in ahead:
                zj = complex(q.zeta)
                B = lambda k: (k - zj) / (k - np.conj(zj))
                log_fac += np.log(B(W ** 2 * z) * B(W * z) / B(z) ** 2).real
        else:
            raise ValueError(f"unknown rule {rule!r}")
        out.append(Pole(qi.zeta, float(qi.c * np.exp(log_fac))))
    return out


def resolution_sum(x, t, data, rule="exact"):
    """Sum of single solitons with the constants they carry as t -> +-infinity."""
    x = np.asarray(x, float)
    spec = data.discrete if hasattr(data, "discrete") else data
    if len(spec) == 0:
        return np.zeros_like(x)
    total = np.zeros_like(x)
    tt = np.full_like(x, t)
    for q in asymptotic_constants(spec, np.sign(t) or 1, rule):
        total += NSoliton(DiscreteSpectrum((q,)), "rh").u_of_x(x, tt)
    return total
