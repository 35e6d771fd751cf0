"""Scattering data and the dressing functions built from it."""
import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from . import spectral as sp


class InvalidReflectionError(ValueError):
    pass


class QuadratureError(RuntimeError):
    pass


class ReflectionSamples:
    """Cubic interpolant of r(k) on an ascending real grid, zero outside it."""

    def __init__(self, k, r):
        k = np.asarray(k, dtype=float)
        r = np.asarray(r, dtype=complex)
        if k.ndim != 1 or len(k) != len(r) or len(k) < 4:
            raise ValueError("need matching 1-d grids with at least 4 nodes")
        if np.any(np.diff(k) <= 0):
            raise ValueError("reflection nodes must be strictly ascending")
        if np.any(np.abs(r) >= 1):
            raise InvalidReflectionError("|r| must stay below 1")
        self.k, self.r = k, r
        self._re = CubicSpline(k, r.real)
        self._im = CubicSpline(k, r.imag)

    @classmethod
    def zero(cls):
        return cls(np.linspace(-1, 1, 4), np.zeros(4))

    @property
    def is_zero(self):
        return not np.any(self.r)

    def __call__(self, k):
        k = np.asarray(k, dtype=float)
        out = self._re(k) + 1j * self._im(k)
        out = np.where((k < self.k[0]) | (k > self.k[-1]), 0, out)
        if np.any(np.abs(out) >= 1):
            raise InvalidReflectionError("|r| >= 1 after interpolation")
        return out

    def support(self):
        nz = np.nonzero(np.abs(self.r) > 1e-14)[0]
        if len(nz) == 0:
            return None
        return self.k[max(nz[0] - 1, 0)], self.k[min(nz[-1] + 1, len(self.k) - 1)]


@dataclass(frozen=True)
class Pole:
    zeta: complex
    c: float

    @property
    def phi(self):
        return float(np.angle(self.zeta))

    @property
    def p(self):
        """Decay rate 2 sin(arg zeta) of the soliton tails in y."""
        return 2 * np.sin(self.phi)

    @property
    def velocity(self):
        return 3 / (1 - self.p ** 2)


@dataclass(frozen=True)
class DiscreteSpectrum:
    poles: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "poles", tuple(
            sorted(self.poles, key=lambda q: -complex(q.zeta).real)))

    @classmethod
    def from_pairs(cls, pairs, strict=True):
        poles = tuple(Pole(complex(z), float(c)) for z, c in pairs)
        ds = cls(poles)
        ds.validate(strict)
        return ds

    def validate(self, strict=True):
        zs = [complex(q.zeta) for q in self.poles]
        for i, z in enumerate(zs):
            if z.imag <= 0:
                raise ValueError("poles must lie in the upper half plane")
            if any(abs(z - w) < 1e-12 for w in zs[:i]):
                raise ValueError("duplicate pole")
            if self.poles[i].c <= 0:
                raise ValueError("norming constants must be positive")
            if strict:
                if abs(abs(z) - 1) > 1e-12:
                    raise ValueError("admissible poles sit on the unit circle")
                if not 0 < np.angle(z) < np.pi / 6:
                    raise ValueError("admissible poles have arg in (0, pi/6)")

    def __len__(self):
        return len(self.poles)

    def __iter__(self):
        return iter(self.poles)


@dataclass(frozen=True)
class ScatteringData:
    reflection: ReflectionSamples = field(default_factory=ReflectionSamples.zero)
    discrete: DiscreteSpectrum = field(default_factory=DiscreteSpectrum)

    @property
    def reflectionless(self):
        return self.reflection.is_zero

    def to_json(self):
        refl = self.reflection
        return json.dumps({
            "reflection": {"k": refl.k.tolist(), "re": refl.r.real.tolist(),
                           "im": refl.r.imag.tolist()},
            "poles": [{"zeta_re": complex(q.zeta).real, "zeta_im": complex(q.zeta).imag,
                       "c_re": q.c, "c_im": 0.0} for q in self.discrete],
        })

    @classmethod
    def from_json(cls, text, strict=True):
        d = json.loads(text) if isinstance(text, str) else text
        refl = d.get("reflection")
        if refl and len(refl["k"]):
            r = ReflectionSamples(refl["k"], np.asarray(refl["re"]) + 1j * np.asarray(refl["im"]))
        else:
            r = ReflectionSamples.zero()
        pairs = []
        for q in d.get("poles", []):
            if abs(q.get("c_im", 0.0)) > 0:
                raise ValueError("norming constants are real in this convention")
            pairs.append((q["zeta_re"] + 1j * q["zeta_im"], q["c_re"]))
        return cls(r, DiscreteSpectrum.from_pairs(pairs, strict))


def solitons(*pairs):
    """Reflectionless data from (arg zeta, c) pairs."""
    return ScatteringData(discrete=DiscreteSpectrum.from_pairs(
        [(np.exp(1j * a), c) for a, c in pairs]))


# -- scalar spectral functions ------------------------------------------------

def nu(k, refl):
    r = np.abs(refl(k))
    if np.any(r >= 1):
        raise InvalidReflectionError("|r| >= 1")
    return -np.log1p(-r ** 2) / (2 * np.pi)


def rho(k, refl, I_set):
    r = refl(k)
    on_I = sp.in_intervals(k, I_set)
    return np.where(on_I, -r / (1 - np.abs(r) ** 2), r)


@dataclass(frozen=True)
class SpectrumPartition:
    delta: tuple
    nabla: tuple
    lambda_set: tuple
    # the A-class sub-lists stay empty for admissible data
    delta2: tuple = ()
    nabla2: tuple = ()
    lambda2: tuple = ()


def partition(xi_hat, discrete, delta0=1e-3):
    L = sp.critical_line(xi_hat)
    if L is None:
        return SpectrumPartition((), tuple(range(len(discrete))), ())
    delta, nabla, lam_ = [], [], []
    for n, q in enumerate(discrete):
        re = complex(q.zeta).real
        if abs(re - L) < delta0:
            lam_.append(n)
        elif re < L:
            delta.append(n)
        else:
            nabla.append(n)
    return SpectrumPartition(tuple(delta), tuple(nabla), tuple(lam_))


def _cauchy_nu(k, refl, I_set, kern=None):
    """int_I nu(s) kern(s) ds, kern defaulting to 1/(s - k), by adaptive quadrature.

    For the Cauchy kernel with k close to the interval, nu(Re k) is subtracted
    and its integral added in closed form, so boundary values stay accurate.
    """
    sup = refl.support()
    if sup is None:
        return 0j
    total = 0j
    for a, b in I_set:
        a, b = max(a, sup[0]), min(b, sup[1])
        if a >= b:
            continue
        brk = refl.k[(refl.k > a) & (refl.k < b)]
        pts = list(brk[:: max(1, len(brk) // 40)])
        if kern is None:
            k0 = float(np.clip(k.real, a, b))
            n0 = float(nu(k0, refl)) if a < k.real < b else 0.0
            f = lambda s: (nu(s, refl) - n0) / (s - k)
            total += n0 * (np.log(b - k) - np.log(a - k))
            if a < k0 < b:
                pts.append(k0)
        else:
            f = lambda s: nu(s, refl) * kern(s)
        for part in (np.real, np.imag):
            val, err = quad(lambda s: part(f(s)), a, b,
                            limit=400, points=sorted(pts) or None, epsabs=1e-13, epsrel=1e-11)
            if err > 1e-8:
                raise QuadratureError(f"quadrature error estimate {err:.2e}")
            total += val if part is np.real else 1j * val
    return total


def H_of_k(k, data, part, I_set):
    """Dressing scalar: Blaschke factors of Delta times exp(i int_I nu/(s-k))."""
    k = complex(k)
    if k.imag == 0 and sp.in_intervals(k.real, I_set):
        raise ValueError("H on I(xi) needs a one-sided boundary value")
    val = 1 + 0j
    for j in part.delta:
        z = complex(data.discrete.poles[j].zeta)
        if abs(k - np.conj(z)) < 1e-14:
            raise ZeroDivisionError("H evaluated at a pole")
        val *= (k - z) / (k - np.conj(z))
    for j in part.delta2:
        z = complex(data.discrete.poles[j].zeta)
        val *= (k - sp.OMEGA * z) / (k - sp.OMEGA ** 2 * np.conj(z))
    if I_set and not data.reflectionless:
        val *= np.exp(1j * _cauchy_nu(k, data.reflection, I_set))
    return val


@lru_cache(maxsize=8)
def _leggauss(order):
    return np.polynomial.legendre.leggauss(order)


def _gl_rule(edges, order=16):
    g, wg = _leggauss(order)
    mid, half = (edges[1:] + edges[:-1]) / 2, (edges[1:] - edges[:-1]) / 2
    return (mid[:, None] + half[:, None] * g).ravel(), (half[:, None] * wg).ravel()


def _cauchy_nu_panels(ks, refl, I_set, width=0.02, reach=4.0, window=0.1):
    """Vectorized int_I nu(s)/(s - k) ds by fixed Gauss-Legendre panels.

    A panel rule is accurate to near round-off at distance >= reach * width.
    Points closer to I get panels refined to their distance inside a window
    around Re k; points within reach * 1e-4 use the adaptive scalar path.
    """
    ks = np.asarray(ks, dtype=complex)
    out = np.zeros(ks.shape, complex)
    sup = refl.support()
    if sup is None:
        return out
    spans = [(max(a, sup[0]), min(b, sup[1])) for a, b in I_set]
    spans = [(a, b) for a, b in spans if a < b]
    if not spans:
        return out
    coarse = [np.linspace(a, b, max(1, int(np.ceil((b - a) / width))) + 1) for a, b in spans]
    dist = np.full(ks.shape, np.inf)
    for a, b in spans:
        d = np.where((ks.real >= a) & (ks.real <= b), np.abs(ks.imag),
                     np.minimum(np.abs(ks - a), np.abs(ks - b)))
        dist = np.minimum(dist, d)
    s, w = map(np.concatenate, zip(*(_gl_rule(e) for e in coarse)))
    wn = w * nu(s, refl)
    far = dist >= reach * width
    out[far] = (wn[None, :] / (s[None, :] - ks[far][:, None])).sum(axis=1)
    for i in np.flatnonzero(~far):
        k, d = ks.flat[i], dist.flat[i]
        if d < reach * 1e-4:
            out.flat[i] = _cauchy_nu(k, refl, I_set)
            continue
        lo, hi = k.real - window, k.real + window
        parts = []
        for e in coarse:
            outer = e[(e <= lo) | (e >= hi)]
            for seg in np.split(outer, np.flatnonzero(np.diff(outer) > 1.5 * width) + 1):
                if len(seg) > 1:
                    parts.append(_gl_rule(seg))
            a, b = max(e[0], outer[outer <= lo].max(initial=e[0])), min(e[-1], outer[outer >= hi].min(initial=e[-1]))
            if a < b:
                n = int(np.ceil((b - a) * reach / d))
                parts.append(_gl_rule(np.linspace(a, b, n + 1)))
        ss, ww = map(np.concatenate, zip(*parts))
        out.flat[i] = np.sum(ww * nu(ss, refl) / (ss - k))
    return out


def H_many(ks, data, part, I_set):
    """H_of_k on an array of points, with the Cauchy integral vectorized."""
    ks = np.asarray(ks, dtype=complex)
    val = np.ones(ks.shape, complex)
    for j in part.delta:
        z = complex(data.discrete.poles[j].zeta)
        val *= (ks - z) / (ks - np.conj(z))
    for j in part.delta2:
        z = complex(data.discrete.poles[j].zeta)
        val *= (ks - sp.OMEGA * z) / (ks - sp.OMEGA ** 2 * np.conj(z))
    if I_set and not data.reflectionless:
        val *= np.exp(1j * _cauchy_nu_panels(ks, data.reflection, I_set))
    return val


def H_boundary(k, data, part, I_set, side=+1, eps=1e-7):
    """One-sided limit of H at real k (side=+1 from above)."""
    return H_of_k(k + side * 1j * eps, data, part, I_set)


def T_i(i, k, data, part, I_set):
    """T_i(k) = H(w^{i+1} k) / H(w^{i+2} k); arrays take the vectorized path."""
    w = sp.OMEGA
    if np.ndim(k):
        k = np.asarray(k)
        return (H_many(w ** ((i + 1) % 3) * k, data, part, I_set)
                / H_many(w ** ((i + 2) % 3) * k, data, part, I_set))
    return (H_of_k(w ** ((i + 1) % 3) * k, data, part, I_set)
            / H_of_k(w ** ((i + 2) % 3) * k, data, part, I_set))


def delta_zeta(n, data, part, I_set):
    """delta_{zeta_n} = H(w^2 z) H(w z) / H(z)^2 for an admissible pole."""
    z = complex(data.discrete.poles[n].zeta)
    H = lambda k: H_of_k(k, data, part, I_set)
    return H(sp.OMEGA ** 2 * z) * H(sp.OMEGA * z) / H(z) ** 2


def modified_constant(n, data, I_set):
    """c_n exp{-i int_I nu(s) (1/(s-w^2 z) + 1/(s-w z) - 2/(s-z)) ds}."""
    q = data.discrete.poles[n]
    if not I_set or data.reflectionless:
        return complex(q.c)
    z, w = complex(q.zeta), sp.OMEGA
    kern = lambda s: 1 / (s - w ** 2 * z) + 1 / (s - w * z) - 2 / (s - z)
    return q.c * np.exp(-1j * _cauchy_nu(None, data.reflection, I_set, kern))
