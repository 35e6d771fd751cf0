import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from dpsoliton import nsoliton as ns
from dpsoliton import scattering as sc
from dpsoliton import spectral as sp
from conftest import dp_residual

ONE = sc.solitons((np.pi / 12, 1.0)).discrete
TWO = sc.solitons((0.25, 1.0), (0.2, 1.0)).discrete


# -- residue system ----------------------------------------------------------------

def test_one_pole_system_shape_and_coupling():
    A, g, pts = ns.assemble_system(ONE, 0.3, 0.1)
    assert A.shape == (6, 6) and g.shape == (6,)
    ks = np.array([p.k for p in pts])
    # orbit closed under rotation and conjugation
    for k in ks:
        assert np.min(np.abs(ks - sp.OMEGA * k)) < 1e-14
        assert np.min(np.abs(ks - np.conj(k))) < 1e-14
    # row s couples to r only when the residue component of r feeds equation s
    for s, p in enumerate(pts):
        assert p.a != p.b
        for r, q in enumerate(pts):
            if r != s and q.b != p.a:
                assert A[s, r] == 0
    assert np.allclose(np.diag(A), 1)


def test_residue_conditions_hold_after_solve():
    y, t = 0.7, 0.4
    sol = ns.solve_mlambda(ONE, y, t)
    _, g, pts = ns.assemble_system(ONE, y, t)
    for s, p in enumerate(pts):
        with np.errstate(divide="ignore", invalid="ignore"):
            m = sol.m(p.k)       # component a_s is regular at p_s
        assert sol.rho[s] == pytest.approx(g[s] * m[p.a], abs=1e-13)


def test_homogeneous_limit():
    tiny = sc.solitons((0.3, 1e-200)).discrete
    sol = ns.solve_mlambda(tiny, 0.0, 0.0)
    assert np.max(np.abs(sol.rho)) < 1e-150
    assert np.allclose(sol.m(sp.K0), 1, atol=1e-150)


def test_two_pole_backward_error():
    for y, t in [(0.0, 0.0), (3.0, 1.0), (-4.0, 2.0)]:
        assert ns.solve_mlambda(TWO, y, t).residual < 1e-12


def test_duplicate_poles_rejected():
    dup = sc.DiscreteSpectrum((sc.Pole(np.exp(0.2j), 1.0), sc.Pole(np.exp(0.2j), 2.0)))
    with pytest.raises(ns.DegenerateSpectrumError):
        ns.assemble_system(dup, 0.0, 0.0)


def test_far_field_limits():
    # behind the soliton (t -> -inf at fixed y) the residues vanish and M -> I
    for t in (-20.0, -40.0):
        sol = ns.solve_mlambda(ONE, 0.0, t)
        assert np.max(np.abs(sol.rho)) < 10 * np.exp(2.1 * t)
        assert np.allclose(sol.m(sp.K0), 1, atol=1e-15)
    # ahead of it they settle to constants, so u -> 0 while x - y stays finite
    a, b = (ns.solve_mlambda(ONE, 0.0, t) for t in (30.0, 60.0))
    assert np.max(np.abs(a.rho - b.rho)) < 1e-20 + 1e-12 * np.max(np.abs(a.rho))
    assert np.max(np.abs(b.drho)) < 1e-14           # round-off floor


def test_normalization_at_infinity():
    sol = ns.solve_mlambda(TWO, 0.5, 0.5)
    assert np.allclose(sol.m(1e9j), 1, atol=1e-8)


def test_residue_by_contour_integral():
    sol = ns.solve_mlambda(ONE, 0.4, 0.2)
    n = 64
    for s, p in enumerate(sol.pts):
        z = p.k + 1e-3 * np.exp(2j * np.pi * np.arange(n) / n)
        res = np.mean(np.array([sol.m(zz) for zz in z]) * (z - p.k)[:, None], axis=0)
        assert np.allclose(res, sol.residue_matrix(s), atol=1e-10)


def test_m_row_empty_spectrum():
    assert np.array_equal(ns.m_row(sc.DiscreteSpectrum(), 1.0, 2.0), [1, 1, 1])


def test_ratio_real_positive_on_grid():
    y = np.linspace(-20, 20, 81)[:, None]
    t = np.linspace(0, 5, 6)[None, :]
    y, t = np.broadcast_arrays(y, t)
    m = ns.m_row(ONE, y, t)
    R = m[..., 2] / m[..., 0]
    assert np.max(np.abs(R.imag)) < 1e-12 and np.min(R.real) > 0
    assert np.max(np.abs(m)) < 10


# -- reconstruction --------------------------------------------------------------

def test_empty_spectrum_reconstruction():
    empty = sc.DiscreteSpectrum()
    y = np.linspace(-5, 5, 11)
    assert np.all(ns.reconstruct_uy(y, 1.0, empty) == 0)
    assert np.array_equal(ns.x_of_y(y, 1.0, empty), y)
    assert np.all(ns.u_of_x(y, 1.0, empty) == 0)


def test_analytic_time_derivative_matches_fd():
    y = np.linspace(-10, 10, 41)
    h = 1e-4
    lr = lambda t: ns.NSoliton(ONE, "rh").log_ratio(y, np.full_like(y, t))[0]
    fd = (lr(0.3 + h) - lr(0.3 - h)) / (2 * h)
    an = ns.reconstruct_uy(y, 0.3, ONE, "rh")
    assert np.max(np.abs(an - fd)) < 1e-7


def test_rh_and_tau_agree_for_one_pole():
    y = np.linspace(-60, 60, 2001)
    t = np.full_like(y, 1.5)
    a = ns.NSoliton(ONE, "rh").log_ratio(y, t)
    b = ns.NSoliton(ONE, "tau").log_ratio(y, t)
    assert np.max(np.abs(a[0] - b[0])) < 1e-12
    assert np.max(np.abs(a[1] - b[1])) < 1e-12


def test_single_hump_translates():
    sol = ns.NSoliton(ONE)
    V = ns.speed(ONE.poles[0].zeta)
    peaks = []
    for t in (0.0, 5.0, 10.0):
        x = np.linspace(V * t - 15, V * t + 15, 3001)
        u = sol.u_of_x(x, np.full_like(x, t))
        assert np.min(u) > 0
        i = np.argmax(u)
        assert np.sum((u[1:-1] > u[:-2]) & (u[1:-1] >= u[2:])) == 1
        # parabolic refinement of the peak
        a, b, c = u[i - 1], u[i], u[i + 1]
        peaks.append((x[i] + 0.5 * (a - c) / (a - 2 * b + c) * (x[1] - x[0]), b))
    xs, hs = np.array(peaks).T
    assert np.diff(xs) / 5 == pytest.approx([V, V], rel=1e-4)
    assert np.ptp(hs) < 1e-6


def test_x_of_y_tails_and_monotonicity():
    sol = ns.NSoliton(TWO)
    far = np.array([-200.0, -150.0, 150.0, 200.0])
    shift = sol.x_of_y(far, np.full(4, 2.0)) - far
    assert abs(shift[0] - shift[1]) < 1e-10 and abs(shift[2] - shift[3]) < 1e-10
    assert abs(shift[3]) < 1e-10
    assert shift[0] == pytest.approx(sol.shift_bound, rel=1e-10)
    assert sol.check_monotone(2.0, (-60, 60)) > 0


def test_max_u_invariant_under_change_of_variables():
    sol = ns.NSoliton(ONE)
    y = np.linspace(-5, 5, 20001)
    x = sol.x_of_y(y, np.zeros_like(y))
    u_y = sol.u_of_y(y, np.zeros_like(y))
    u_x = sol.u_of_x(x, np.zeros_like(x))
    assert np.max(np.abs(u_x - u_y)) < 1e-10
    assert np.max(u_x) == pytest.approx(np.max(u_y), abs=1e-12)


def test_single_soliton_wrapper():
    x = np.linspace(-20, 20, 201)
    t = np.full_like(x, 2.0)
    q = ONE.poles[0]
    assert np.max(np.abs(ns.single_soliton(q.zeta, q.c, x, t) - ns.u_of_x(x, t, ONE))) < 1e-12


def test_speed_exceeds_linear_limit_and_amplitude_grows_with_arg():
    args = np.linspace(0.02, 0.5, 12)
    assert all(ns.speed(np.exp(1j * a)) > 3 for a in args)
    peaks = []
    for a in args:
        x = np.linspace(-15, 15, 1501)
        peaks.append(np.max(ns.single_soliton(np.exp(1j * a), 1.0, x, np.zeros_like(x))))
    assert np.all(np.diff(peaks) > 0)


@given(st.floats(0.02, 0.5), st.floats(0.1, 10))
def test_orbit_closed_under_symmetries(arg, c):
    z = np.exp(1j * arg)
    pts = ns.orbit(z, ns.residue_constant(sc.Pole(z, c)))
    ks = np.array([p.k for p in pts])
    assert np.min(np.abs(ks[:, None] - ks[None, :]) + np.eye(6)) > 1e-3

    def find(k):
        return pts[int(np.argmin(np.abs(ks - k)))]

    for p in pts:
        rot, conj = find(sp.OMEGA * p.k), find(np.conj(p.k))
        assert abs(rot.k - sp.OMEGA * p.k) < 1e-13 and abs(conj.k - np.conj(p.k)) < 1e-13
        assert (rot.a, rot.b) == ((p.a - 1) % 3, (p.b - 1) % 3)
        assert (conj.a, conj.b) == (ns.TAU_IDX[p.a], ns.TAU_IDX[p.b])
        assert rot.C == pytest.approx(sp.OMEGA * p.C, abs=1e-13)
        assert conj.C == pytest.approx(np.conj(p.C), abs=1e-13)


def test_reality_of_profiles():
    sol = ns.solve_mlambda(ONE, np.linspace(-10, 10, 21), np.zeros(21))
    m, dm = sol.m(sp.K0), sol.dm_dt(sp.K0)
    assert np.max(np.abs(np.log(m[:, 2] / m[:, 0]).imag)) < 1e-10
    assert np.max(np.abs((dm[:, 2] / m[:, 2] - dm[:, 0] / m[:, 0]).imag)) < 1e-10


# -- PDE oracles -------------------------------------------------------------------

def test_one_soliton_solves_dp():
    assert dp_residual(ns.NSoliton(ONE, "rh").u_of_x, -30, 30, 4096, 0.0) < 1e-6


def test_two_soliton_solves_dp():
    assert dp_residual(ns.NSoliton(TWO).u_of_x, -20, 60, 4096, 5.0) < 1e-6


def test_tau_form_against_high_precision():
    """Tau-form x(y) and u(y) against an independent 40-digit evaluation."""
    tau = ns.NSoliton(TWO).tau
    mp.mp.dps = 40
    p = [mp.mpf(float(v)) for v in tau.p]
    sig = [mp.mpf(float(v)) for v in tau.sigma]
    V = [3 / (1 - q * q) for q in p]
    phi = [mp.log((1 - q) * (2 - q) / ((1 + q) * (2 + q))) / 2 for q in p]
    a, b = p
    G = mp.log((a - b) ** 2 * (a * a - a * b + b * b - 3) / ((a + b) ** 2 * (a * a + a * b + b * b - 3)))

    def f(y, t, s):
        e = [-p[i] * (y - V[i] * t) + sig[i] - s * phi[i] for i in range(2)]
        return 1 + mp.exp(e[0]) + mp.exp(e[1]) + mp.exp(e[0] + e[1] + G)

    for y, t in [(0.0, 0.0), (5.0, 1.0), (20.0, 4.0), (-3.0, 2.5)]:
        lr = lambda tt: mp.log(f(mp.mpf(y), tt, 1) / f(mp.mpf(y), tt, -1))
        u = mp.diff(lr, mp.mpf(t))
        got = tau.log_ratio(np.array(y), np.array(t))
        assert float(got[0]) == pytest.approx(float(lr(mp.mpf(t))), abs=1e-13)
        assert float(got[1]) == pytest.approx(float(u), abs=1e-13)


@given(st.floats(0.05, 0.5), st.floats(0.1, 10), st.floats(-10, 10), st.floats(0, 5))
def test_conjugate_data_same_solution(arg, c, x, t):
    up = sc.DiscreteSpectrum((sc.Pole(np.exp(1j * arg), c),))
    down = sc.DiscreteSpectrum((sc.Pole(np.exp(-1j * arg), c),))
    x, t = np.array([x]), np.array([t])
    assert abs(ns.u_of_x(x, t, up)[0] - ns.u_of_x(x, t, down)[0]) < 1e-10


def test_conjugate_data_same_solution_two_poles():
    down = sc.DiscreteSpectrum(tuple(sc.Pole(np.conj(q.zeta), q.c) for q in TWO))
    x = np.linspace(-10, 40, 101)
    t = np.full_like(x, 3.0)
    assert np.max(np.abs(ns.u_of_x(x, t, TWO) - ns.u_of_x(x, t, down))) < 1e-10


def test_superposition_at_large_separation():
    # faster soliton placed far to the right of the slower one at t = 0
    fast, slow = 0.25, 0.2
    pf, ps = 2 * np.sin(fast), 2 * np.sin(slow)
    spec = sc.solitons((fast, np.exp(40 * pf)), (slow, np.exp(-40 * ps))).discrete
    x = np.linspace(-80, 80, 1601)
    t = np.zeros_like(x)
    from dpsoliton import asymptotics as asy
    gap = np.max(np.abs(ns.u_of_x(x, t, spec) - asy.resolution_sum(x, 0.0, spec)))
    assert gap < 1e-6
