import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


def random_k(rng, n, scale=2.0):
    """Random complex k away from 0 and from the branch points k^6 = -1."""
    k = rng.normal(scale=scale, size=n) + 1j * rng.normal(scale=scale, size=n)
    bad = (np.abs(k) < 0.05) | (np.abs(k ** 6 + 1) < 1e-3)
    k[bad] = 0.7 + 0.3j
    return k


# 6th-order central difference weights for the first and second derivative
D1 = np.array([-1, 9, -45, 0, 45, -9, 1]) / 60
D2 = np.array([2, -27, 270, -490, 270, -27, 2]) / 180


def _fd(f, h, w, axis):
    out = 0
    for j, c in enumerate(w):
        if c:
            out = out + c * np.take(f, range(j, f.shape[axis] - 6 + j), axis=axis)
    return out / h


def dp_residual(u_of_xt, x0, x1, n, t, dt=1e-3):
    """Relative sup-norm residual of u_t - u_txx + 3u_x + 4uu_x - 3u_x u_xx - u u_xxx.

    Derivatives are 6th-order central differences in x (n points on [x0, x1])
    and in t (step dt); u_of_xt(x, t) must accept arrays.
    """
    x = np.linspace(x0, x1, n)
    h = x[1] - x[0]
    U = np.array([u_of_xt(x, np.full_like(x, t + j * dt)) for j in range(-3, 4)])
    ut = _fd(U, dt, D1, 0)[0]                                  # (n,)
    u = U[3]
    ux = _fd(u, h, D1, 0)
    uxx = _fd(u, h * h, D2, 0)
    uxxx = _fd(ux, h * h, D2, 0)                               # on the inner n-12 points
    utxx = _fd(ut, h * h, D2, 0)
    c = slice(6, n - 6)
    terms = [ut[c], -utxx[3:-3], 3 * ux[3:-3], 4 * u[c] * ux[3:-3],
             -3 * ux[3:-3] * uxx[3:-3], -u[c] * uxxx]
    res = sum(terms)
    scale = max(np.max(np.abs(tm)) for tm in terms)
    return float(np.max(np.abs(res)) / scale)


# -- acceptance report -------------------------------------------------------------

ACCEPTANCE = []


@pytest.fixture
def accept():
    """Record one PASS/FAIL line; returns the verdict so the test can assert on it."""
    def record(name, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
        print(line)
        ACCEPTANCE.append(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
