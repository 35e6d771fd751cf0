"""Command-line front end: ``dpsoliton <command> ...``.

Config-driven commands read a JSON file validated against the schemas in
``dpsoliton/schemas`` (unknown fields rejected).  Every table is written as CSV
with a one-line header; plots are standalone SVG.  Exit codes: 0 ok,
2 config error, 3 numerical failure, 4 region or degeneracy error.
"""
import functools
import json
import os
import sys
from importlib import resources

import click
import jsonschema
import numpy as np

from . import asymptotics as asy
from . import forward_scattering as fs
from . import nsoliton as ns
from . import pde_oracle as pde
from . import scattering as sc
from . import spectral as sp
from . import svg

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_REGION = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


REGION_ERRORS = (asy.RegionError, asy.DegenerateCurvatureError, sp.DegenerateRegionError,
                 ns.DegenerateSpectrumError)
CONFIG_ERRORS = (ConfigError, jsonschema.ValidationError, json.JSONDecodeError, OSError)


def _guard(fn):
    """Map module errors onto the documented exit codes."""
    @functools.wraps(fn)
    def wrapper(*args, **kw):
        try:
            return fn(*args, **kw)
        except click.exceptions.Exit:
            raise
        except CONFIG_ERRORS as e:
            click.echo(f"config error: {getattr(e, 'message', e)}", err=True)
            sys.exit(EXIT_CONFIG)
        except REGION_ERRORS as e:
            click.echo(f"region error: {e}", err=True)
            sys.exit(EXIT_REGION)
        except Exception as e:      # any other module failure is numerical
            click.echo(f"numerical failure: {type(e).__name__}: {e}", err=True)
            sys.exit(EXIT_NUMERICAL)
    return wrapper


# -- config handling -------------------------------------------------------------

def load_schema(name):
    text = resources.files("dpsoliton").joinpath("schemas", f"{name}.v1.json").read_text()
    return json.loads(text)


def _fill_defaults(cfg, schema):
    for key, sub in schema.get("properties", {}).items():
        if key not in cfg and "default" in sub:
            cfg[key] = sub["default"]
        if isinstance(cfg.get(key), dict) and sub.get("type") == "object":
            _fill_defaults(cfg[key], sub)
    return cfg


def load_config(path, name):
    with open(path) as fh:
        cfg = json.load(fh)
    schema = load_schema(name)
    jsonschema.validate(cfg, schema)
    if name in ("zm-check",) and "scatter" not in cfg:
        cfg["scatter"] = {}
    return _fill_defaults(cfg, schema)


def spectrum_of(poles):
    try:
        return sc.DiscreteSpectrum.from_pairs(
            [(np.exp(1j * p["arg"]), p["c"]) for p in poles])
    except ValueError as e:
        raise ConfigError(str(e)) from e


def initial_profile(spec, x):
    kind = spec["kind"]
    if kind == "zero":
        return np.zeros_like(x)
    if kind == "gaussian":
        return spec["amplitude"] * np.exp(-((x - spec.get("center", 0.0)) / spec["width"]) ** 2)
    if kind == "samples":
        xs, us = np.asarray(spec["x"], float), np.asarray(spec["u"], float)
        if len(xs) != len(us) or np.any(np.diff(xs) <= 0):
            raise ConfigError("samples need matching lengths and increasing x")
        return np.interp(x, xs, us, left=0.0, right=0.0)
    sol = ns.NSoliton(spectrum_of(spec["poles"]))
    return sol.u_of_x(x, np.full_like(x, spec.get("t0", 0.0)))


def _out_dir(cfg, override):
    d = override or cfg.get("out_dir") or "."
    os.makedirs(d, exist_ok=True)
    return d


def write_csv(path, header, columns):
    data = np.column_stack([np.asarray(c, float) for c in columns]) if columns else np.zeros((0, 0))
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in data:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def _report(obj):
    click.echo(json.dumps(obj, indent=2, sort_keys=True))


def count_peaks(u, rel=1e-3):
    u = np.asarray(u, float)
    top = np.max(np.abs(u)) if len(u) else 0.0
    if top == 0:
        return 0
    inner = (u[1:-1] > u[:-2]) & (u[1:-1] >= u[2:]) & (u[1:-1] > rel * top)
    return int(np.sum(inner))


def loglog_fit(t, v):
    """Least-squares slope and R^2 of log v against log t (None when v has zeros)."""
    t, v = np.asarray(t, float), np.asarray(v, float)
    if len(t) < 2 or np.any(v <= 0):
        return None, None
    return _linfit(np.log(t), np.log(v))


def _linfit(a, b):
    A = np.vstack([a, np.ones_like(a)]).T
    coef, *_ = np.linalg.lstsq(A, b, rcond=None)
    fit = A @ coef
    ss = np.sum((b - np.mean(b)) ** 2)
    r2 = 1 - np.sum((b - fit) ** 2) / ss if ss > 0 else 1.0
    return float(coef[0]), float(r2)


def reflection_grid(k_min, k_max, n_k, exclude):
    """Symmetric geometric k grid with a gap of half-width `exclude` around k = +-1."""
    kp = np.geomspace(k_min, k_max, n_k)
    kp = kp[np.abs(kp - 1) > exclude]
    return np.concatenate([-kp[::-1], kp])


def scatter_profile(u0_of_x, half_width, n_x, k):
    x = np.linspace(-half_width, half_width, n_x, endpoint=False)
    u0 = u0_of_x(x)
    if not np.any(u0):
        return np.zeros(len(k), complex)
    return fs.reflection_coefficient(fs.q_of_u0(x, u0), k)


# -- commands --------------------------------------------------------------------

@click.group()
def main():
    """Degasperis-Procesi solitons, long-time asymptotics and a PDE oracle."""


@main.command("phase-points")
@click.option("--xi-hat", type=float, required=True, help="Ratio y/t.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="CSV path (default stdout).")
@_guard
def cmd_phase_points(xi_hat, out):
    """Real stationary points of theta_12 at the given xi_hat."""
    region = sp.classify_region(xi_hat)
    pp = sp.phase_points(xi_hat)
    k = pp.points
    th = sp.theta(1, 2, k, xi_hat).real if len(k) else k
    th2 = sp.d2theta12_dk2(k, xi_hat).real if len(k) else k
    res = np.abs(sp.dtheta12_dk(k, xi_hat)) if len(k) else k
    cols = [np.arange(1, len(k) + 1), k, th, th2, res]
    header = ["index", "k", "theta12", "theta12_kk", "residual"]
    if out:
        write_csv(out, header, cols)
    else:
        click.echo(",".join(header))
        for row in zip(*cols):
            click.echo(f"{int(row[0])}," + ",".join(f"{v:.17g}" for v in row[1:]))
    if not len(k):
        click.echo(f"note: xi_hat = {xi_hat} lies in the {region.name} cone; no real phase points",
                   err=True)


@main.command("nsoliton")
@click.argument("config", type=click.Path(dir_okay=False))
@click.option("--out-dir", default=None)
@_guard
def cmd_nsoliton(config, out_dir):
    """Exact N-soliton profile u(x, t) from a discrete spectrum."""
    cfg = load_config(config, "nsoliton")
    if cfg["x_max"] <= cfg["x_min"]:
        raise ConfigError("x_max must exceed x_min")
    d = _out_dir(cfg, out_dir)
    spec = spectrum_of(cfg["poles"])
    x = np.linspace(cfg["x_min"], cfg["x_max"], cfg["n"])
    sol = ns.NSoliton(spec, cfg["method"])
    tt = np.full_like(x, cfg["t"])
    y = sol.y_of_x(x, tt) if len(spec) else x
    u = sol.u_of_y(y, tt)
    write_csv(os.path.join(d, "nsoliton.csv"), ["t", "x", "y", "u"], [tt, x, y, u])
    svg.write(os.path.join(d, "nsoliton.svg"), [(f"t = {cfg['t']}", x, u)],
              title=f"{len(spec)}-soliton", xlabel="x", ylabel="u")
    _report({"n": len(spec), "t": cfg["t"], "max_u": float(np.max(u)) if len(u) else 0.0,
             "peaks": count_peaks(u)})


@main.command("simulate")
@click.argument("config", type=click.Path(dir_okay=False))
@click.option("--out-dir", default=None)
@_guard
def cmd_simulate(config, out_dir):
    """Pseudo-spectral run of the periodic DP equation."""
    cfg = load_config(config, "simulate")
    d = _out_dir(cfg, out_dir)
    try:
        grid = pde.PeriodicGrid(float(cfg["L"]), int(cfg["N"]))
    except ValueError as e:
        raise ConfigError(str(e)) from e
    init = cfg["initial"]
    t0 = init.get("t0", 0.0) if init["kind"] == "nsoliton" else 0.0
    field = pde.WaveField(grid, initial_profile(init, grid.x), t0)
    snaps = [t0] + list(cfg["snapshot_times"])
    final, traj = pde.run(field, cfg["t_end"], dt=cfg.get("dt"), snapshot_times=snaps)
    write_csv(os.path.join(d, "snapshots.csv"), ["t", "x", "u"],
              [np.repeat(traj.times, grid.N), np.tile(grid.x, len(traj.times)),
               np.concatenate(traj.snapshots)])
    write_csv(os.path.join(d, "mass.csv"), ["t", "mass"], [traj.times, traj.mass])
    svg.write(os.path.join(d, "simulate.svg"),
              [(f"t = {t:g}", grid.x, u) for t, u in zip(traj.times, traj.snapshots)],
              title="pseudo-spectral run", xlabel="x", ylabel="u")
    rep = {"t_end": final.t, "mass_drift": traj.mass[-1] - field.mass(),
           "max_u": float(np.max(np.abs(final.u))), "edge_amplitude": pde.edge_amplitude(final.u)}
    if init["kind"] == "nsoliton" and init["poles"]:
        exact = initial_profile(dict(init, t0=final.t), grid.x)
        rep["sup_error_vs_exact"] = float(np.max(np.abs(final.u - exact)))
    _report(rep)


@main.command("resolve")
@click.argument("config", type=click.Path(dir_okay=False))
@click.option("--out-dir", default=None)
@_guard
def cmd_resolve(config, out_dir):
    """Sup-norm gap between an N-soliton and its single-soliton resolution."""
    cfg = load_config(config, "resolve")
    d = _out_dir(cfg, out_dir)
    spec = spectrum_of(cfg["poles"])
    sol = ns.NSoliton(spec)
    V = [q.velocity for q in spec] or [3.0]
    data = sc.ScatteringData(discrete=spec)
    times, gaps, gaps_b = [], [], []
    for t in cfg["times"]:
        if "xi_window" in cfg:
            lo, hi = cfg["xi_window"]
            if hi <= lo:
                raise ConfigError("xi_window must be increasing")
            x = np.linspace(lo * t, hi * t, cfg["n"])
            asy.require_solitonic(x, t)
        else:
            x = np.linspace(min(V) * t - cfg["margin"], max(V) * t + cfg["margin"], cfg["n"])
        tt = np.full_like(x, t)
        u = sol.u_of_x(x, tt)
        times.append(t)
        gaps.append(float(np.max(np.abs(u - asy.resolution_sum(x, t, data, "exact")))))
        gaps_b.append(float(np.max(np.abs(u - asy.resolution_sum(x, t, data, "blaschke")))))
    write_csv(os.path.join(d, "resolve.csv"), ["t", "gap_exact", "gap_blaschke"],
              [times, gaps, gaps_b])
    svg.write(os.path.join(d, "resolve.svg"),
              [("exact shifts", times, gaps), ("Blaschke shifts", times, gaps_b)],
              title="resolution gap", xlabel="t", ylabel="sup gap", logy=True)
    order = np.argsort(times)
    g = np.asarray(gaps)[order]
    slope = r2 = None
    if len(g) >= 2 and np.all(g > 0):
        slope, r2 = _linfit(np.asarray(times, float)[order], np.log(g))
    _report({"times": times, "gap_exact": gaps, "gap_blaschke": gaps_b,
             "monotone": bool(np.all(np.diff(g) < 0)) if len(g) > 1 else True,
             "exp_fit_slope": slope, "exp_fit_r2": r2})


@main.command("zm-check")
@click.argument("config", type=click.Path(dir_okay=False))
@click.option("--out-dir", default=None)
@_guard
def cmd_zm_check(config, out_dir):
    """t^{-1/2} decay in the Zakharov-Manakov cone: oracle run against the formula."""
    cfg = load_config(config, "zm-check")
    d = _out_dir(cfg, out_dir)
    try:
        grid = pde.PeriodicGrid(float(cfg["L"]), int(cfg["N"]))
    except ValueError as e:
        raise ConfigError(str(e)) from e
    init = cfg["initial"]
    times = sorted(float(t) for t in cfg["times"])
    u0 = initial_profile(init, grid.x)
    _, traj = pde.run(pde.WaveField(grid, u0), times[-1], snapshot_times=times)
    snap = dict(zip(traj.times, traj.snapshots))
    x = grid.x
    lo, hi = cfg["cone"]
    cone = [float(np.max(np.abs(snap[t][(x >= lo * t) & (x <= hi * t)]), initial=0.0))
            for t in times]
    slope, r2 = loglog_fit(times, cone)
    scaled = [c * np.sqrt(t) for c, t in zip(cone, times)]
    variation = (max(scaled) - min(scaled)) / max(scaled) if max(scaled) > 0 else 0.0
    write_csv(os.path.join(d, "zm_cone.csv"), ["t", "cone_max", "cone_max_sqrt_t"],
              [times, cone, scaled])

    s = cfg["scatter"]
    k = reflection_grid(s["k_min"], s["k_max"], s["n_k"], s["exclude"])
    r = scatter_profile(lambda xx: initial_profile(init, xx), s["half_width"], s["n_x"], k)
    data = sc.ScatteringData(sc.ReflectionSamples(k, r))
    rows = []
    for t in times:
        for xi in cfg["xi"]:
            oracle = oracle_envelope(x, snap[t], xi, t)
            formula = asy.f1_envelope(xi, t, data, hold=cfg["hold"],
                                      columns=tuple(cfg["columns"]), beta21=cfg["beta21"])
            ratio = formula / oracle if oracle > 0 else (1.0 if formula == 0 else float("inf"))
            rows.append((t, xi, oracle, formula, ratio))
    cols = list(zip(*rows)) if rows else [[]] * 5
    write_csv(os.path.join(d, "zm_envelopes.csv"), ["t", "xi", "oracle", "formula", "ratio"], cols)
    svg.write(os.path.join(d, "zm.svg"), [("max |u| sqrt(t) on the cone", times, scaled)],
              title="Zakharov-Manakov decay", xlabel="t", ylabel="|u| sqrt(t)")
    _report({"times": times, "cone_max": cone, "cone_max_sqrt_t": scaled,
             "loglog_slope": slope, "loglog_r2": r2, "sqrt_t_variation": variation,
             "envelopes": [dict(zip(("t", "xi", "oracle", "formula", "ratio"), row))
                           for row in rows]})


def oracle_envelope(x, u, xi, t):
    """Local oscillation amplitude of u around x = xi t, over one local wavelength."""
    pp = sp.phase_points(xi)
    mu0 = abs(pp.points[0] - 1 / pp.points[0])
    win = np.abs(x - xi * t) < 2 * np.pi / mu0
    return float(np.max(np.abs(u[win]), initial=0.0))


@main.command("scatter")
@click.argument("config", type=click.Path(dir_okay=False))
@click.option("--out-dir", default=None)
@_guard
def cmd_scatter(config, out_dir):
    """|r(k)| and nu(k) of the given initial data."""
    cfg = load_config(config, "scatter")
    d = _out_dir(cfg, out_dir)
    k = reflection_grid(cfg["k_min"], cfg["k_max"], cfg["n_k"], cfg["exclude"])
    r = scatter_profile(lambda xx: initial_profile(cfg["initial"], xx),
                        cfg["half_width"], cfg["n_x"], k)
    a = np.abs(r)
    if np.any(a >= 1):
        raise fs.ScatteringAccuracyError("|r| >= 1 on the sampling grid")
    nu = fs.nu_of_r(r)
    write_csv(os.path.join(d, "scatter.csv"), ["k", "abs_r", "nu"], [k, a, nu])
    svg.write(os.path.join(d, "scatter.svg"), [("|r(k)|", k, a)],
              title="reflection coefficient", xlabel="k", ylabel="|r|")
    _report({"n_k": len(k), "max_abs_r": float(np.max(a)) if len(a) else 0.0,
             "k_at_max": float(k[np.argmax(a)]) if len(a) else None})


if __name__ == "__main__":
    main()
