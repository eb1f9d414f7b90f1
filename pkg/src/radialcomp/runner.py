"""
Scenario execution and output files.

Checks run in dependency order: hypotheses, ODE integrations, comparison
inequalities, volume, rigidity. Each registered check carries an
applicability predicate, so a default run executes exactly the checks that
make sense for the model (ball volumes need the pole inside the domain,
the conformal bound needs a gradient constant, and so on).
"""

import csv
import datetime
import json
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import comparison as cmp
from . import volume as vol
from .config import ConfigError
from .models import build_model, make_grid, reparam_distance
from .radial import IntegratorConfig, integrate_jacobi, integrate_riccati, consistency_riccati_vs_jacobi
from .reports import GapReport, to_jsonable
from .rigidity import conical_check, verify_conformal_rigidity
from .weighted import hess_r, laplacian_r, mchess_u_via_conformal, mhess_u

__all__ = [
    "CSV_COLUMNS",
    "VOLUME_COLUMNS",
    "CHECKS",
    "RunContext",
    "RunReport",
    "run_scenario",
    "emit_outputs",
]

CSV_COLUMNS = ["r", "theta", "A", "S_tan", "wS_tan", "lap_r", "wlap_r",
               "mhess_rad", "mhess_tan", "gap_mhess", "gap_hessian",
               "gap_laplacian", "norm_density", "dlog_norm_density"]
VOLUME_COLUMNS = ["R", "vol", "wvol", "fit_residual"]
VOLUME_RADII = 12
REPARAM_SAMPLES = 25


@dataclass
class RunContext:
    cfg: object
    model: object
    grid: object
    comparison: object
    bounds: object
    tol: dict
    integrator: IntegratorConfig
    status: dict = field(default_factory=dict)
    cache: dict = field(default_factory=dict)

    @property
    def K(self):
        return cmp.resolve_K(self.comparison)

    @property
    def gradient_constant(self):
        return None if self.bounds is None else self.bounds.c


@dataclass
class RunReport:
    scenario: str
    passed: bool
    checks: list
    rigidity: dict
    volumes: dict
    config_echo: dict
    hypothesis_status: dict
    wall_clock: float = 0.0
    timestamp: str = ""
    series: dict = field(default_factory=dict, repr=False)
    volume_rows: list = field(default_factory=list, repr=False)

    def to_dict(self):
        return to_jsonable({
            "scenario": self.scenario,
            "pass": self.passed,
            "checks": self.checks,
            "rigidity": self.rigidity,
            "volumes": self.volumes,
            "hypothesis_status": self.hypothesis_status,
            "config_echo": self.config_echo,
            "timestamp": {"utc": self.timestamp, "wall_clock_s": self.wall_clock},
        })


# -- individual checks ---------------------------------------------------------

def _ode_grid(ctx):
    return ctx.grid.r


def _riccati(ctx):
    if "riccati" not in ctx.cache:
        ctx.cache["riccati"] = integrate_riccati(ctx.model, ctx.integrator, _ode_grid(ctx))
    return ctx.cache["riccati"]


def _jacobi(ctx):
    if "jacobi" not in ctx.cache:
        ctx.cache["jacobi"] = integrate_jacobi(ctx.model, ctx.integrator, _ode_grid(ctx))
    return ctx.cache["jacobi"]


def _rel_report(name, r, value, reference, tol, extra=None):
    dev = np.abs(value - reference) / np.maximum(1.0, np.abs(reference))
    dev = np.where(np.isnan(dev), np.inf, dev)
    return GapReport(name, r, [0.0], -dev, tol, extra=extra or {})


def _check_mhess_identity(ctx):
    R, TH = ctx.grid.mesh()
    a = mhess_u(ctx.model, R, TH)
    b = mchess_u_via_conformal(ctx.model, R, TH)
    dev = np.maximum(np.maximum(np.abs(a.radial - b.radial), np.abs(a.tangential - b.tangential)),
                     np.abs(a.mixed - b.mixed))
    return GapReport("mhess_conformal_identity", ctx.grid.r, ctx.grid.theta, -dev,
                     ctx.tol["identity"])


def _check_riccati(ctx):
    s = _riccati(ctx)
    ref = hess_r(ctx.model, s.grid).tangential
    return _rel_report("riccati_closed_form", s.grid, s.values, ref, ctx.tol["ode"],
                       {"error_estimate": s.error_estimate, "blowup_radius": s.blowup_radius})


def _check_jacobi(ctx):
    j = _jacobi(ctx)
    ref = ctx.model.warp_jet(j.grid).f ** (ctx.model.n - 1)
    return _rel_report("jacobi_determinant", j.grid, j.extra["det"] / ref, np.ones_like(ref),
                       ctx.tol["ode"], {"error_estimate": j.error_estimate})


def _check_duality(ctx):
    return consistency_riccati_vs_jacobi(ctx.model, ctx.integrator, _ode_grid(ctx), ctx.tol["ode"])


def _fd_grid_ok(ctx):
    r = ctx.grid.r
    lo, hi = ctx.model.r_domain
    step = 1e-4
    return r[0] - step > max(0.0, lo) and r[-1] + step <= hi and np.min(np.diff(r)) > 2 * step


def _with_status(fn):
    def run(ctx):
        return fn(ctx.model, ctx.comparison, ctx.grid, tol=ctx.tol["inequality"],
                  hypotheses=ctx.status)
    return run


def _check_conformal(ctx):
    return cmp.check_conformal_mhess_bound(ctx.model, ctx.gradient_constant, ctx.grid,
                                           tol=ctx.tol["inequality"])


def _check_kwy(ctx):
    return cmp.check_kwy_radial_inequality(ctx.model, ctx.grid, tol=ctx.tol["inequality"],
                                           hypotheses=ctx.status)


def _check_implication(ctx):
    return cmp.check_implication_chain(ctx.model, ctx.comparison, ctx.grid, hypotheses=ctx.status)


def _check_logder(ctx):
    return vol.check_log_derivative_identity(ctx.model, ctx.grid, tol=ctx.tol["fd"],
                                             cfg=ctx.integrator)


def _upper_r0(ctx):
    return max(1.0, float(ctx.grid.r[0]))


def _check_upper(ctx):
    r0 = _upper_r0(ctx)
    g = ctx.grid
    keep = g.r >= r0
    sub = type(g)(g.r[keep], g.theta, g.psi_samples)
    return vol.check_density_upper_bound(ctx.model, ctx.comparison, r0, sub,
                                         tol=ctx.tol["inequality"], hypotheses=ctx.status)


def _check_monotone(ctx):
    return vol.check_normalized_monotonicity(ctx.model, ctx.comparison, ctx.grid,
                                             tol=ctx.tol["inequality"], hypotheses=ctx.status,
                                             fd_tol=ctx.tol["fd"])


def _sandwich_a(ctx):
    if ctx.bounds is not None:
        return ctx.bounds.a
    return min(0.0, ctx.status.get("phi_min", 0.0))


def _volume_radii(ctx):
    r = ctx.grid.r
    return np.geomspace(r[0], r[-1], VOLUME_RADII)


def _volume_table(ctx):
    if "volumes" not in ctx.cache:
        ctx.cache["volumes"] = vol.growth_table(ctx.model, _volume_radii(ctx))
    return ctx.cache["volumes"]


def _check_sandwich(ctx):
    rows, _ = _volume_table(ctx)
    R = np.array([row["R"] for row in rows])
    v = np.array([row["vol"] for row in rows])
    w = np.array([row["wvol"] for row in rows])
    a = _sandwich_a(ctx)
    # relative slack of vol <= mu_phi <= e^{-a} vol
    slack = np.minimum(w - v, math.exp(-a) * v - w) / v
    return GapReport("volume_sandwich", R, [0.0], slack, ctx.tol["inequality"],
                     ctx.status, {"a": a})


def _check_reparam(ctx):
    r = np.unique(np.geomspace(ctx.grid.r[0], ctx.grid.r[-1], REPARAM_SAMPLES))
    s = reparam_distance(ctx.model, r)
    return GapReport("reparam_distance_bound", r, [0.0], s - r, ctx.tol["inequality"],
                     ctx.status)


def _pole_in_domain(ctx):
    return float(ctx.model.r_domain[0]) == 0.0 and ctx.model.density.regular_at_origin


def _always(ctx):
    return True


def _has_bounds(ctx):
    # with K_override the constant is decoupled from the density hypotheses
    return ctx.bounds is not None


# name -> (stage, description, applicable, run)
CHECKS = {
    "mhess_conformal_identity": ("identity", "MHess u equals the conformal-route MCHess u",
                                 _always, _check_mhess_identity),
    "riccati_closed_form": ("ode", "Riccati-integrated S matches f'/f",
                            _always, _check_riccati),
    "jacobi_determinant": ("ode", "Jacobi det A matches f^(n-1)",
                           _always, _check_jacobi),
    "riccati_vs_jacobi": ("ode", "S equals j'/j along the ray",
                          _always, _check_duality),
    "mhess_bound": ("comparison", "MHess(r^2/2) <= K g",
                    _always, _with_status(cmp.check_mhess_bound)),
    "conformal_mhess_bound": ("comparison", "MCHess(r^2/2) <= (1 + c) g~",
                              lambda ctx: ctx.gradient_constant is not None, _check_conformal),
    "kwy_radial": ("comparison", "Hess r - phi_r g_r <= e^(-2 phi)/r on spheres",
                   _has_bounds, _check_kwy),
    "hessian_comparison": ("comparison", "Hess r <= (K/r + phi_r) on spheres",
                           _always, _with_status(cmp.check_hessian_comparison)),
    "shape_comparison": ("comparison", "S - phi_r <= K/r",
                         _always, _with_status(cmp.check_shape_comparison)),
    "laplacian_comparison": ("comparison", "Delta r <= (n-1)(K/r + phi_r)",
                             _always, _with_status(cmp.check_laplacian_comparison)),
    "weighted_laplacian_comparison": ("comparison", "Delta_phi r <= (n-1)K/r + (n-2)phi_r",
                                      _always, _with_status(cmp.check_weighted_laplacian_comparison)),
    "implication_chain": ("comparison", "MHess bound implies Hessian bound; exact trace",
                          _always, _check_implication),
    "reparam_distance_bound": ("comparison", "s(r) >= r for phi <= 0",
                               lambda ctx: _pole_in_domain(ctx) and ctx.model.density.nonpositive,
                               _check_reparam),
    "log_derivative_identity": ("volume", "d/dr log A = Delta r (central differences)",
                                _fd_grid_ok, _check_logder),
    "density_upper_bound": ("volume", "A <= C(r0) r^((n-1)K) for r >= r0",
                            lambda ctx: ctx.model.density.nonpositive and ctx.grid.r[-1] > _upper_r0(ctx),
                            _check_upper),
    "normalized_monotonicity": ("volume", "d/dr log A~ = -(Laplacian slack) <= 0",
                                _always, _check_monotone),
    "volume_sandwich": ("volume", "vol <= mu_phi <= e^(-a) vol on ball radii",
                        lambda ctx: _pole_in_domain(ctx) and ctx.model.density.nonpositive,
                        _check_sandwich),
}


def _series(ctx):
    model, grid, K = ctx.model, ctx.grid, ctx.K
    R, TH = grid.mesh()
    rate = hess_r(model, R).tangential
    phi_r = model.density_jet(R, TH).phi_r
    mh = mhess_u(model, R, TH)
    hs = cmp.hessian_slack(model, K, grid)
    cols = {
        "r": R, "theta": TH,
        "A": vol.radial_density(model, R, TH),
        "S_tan": rate,
        "wS_tan": rate - phi_r,
        "lap_r": laplacian_r(model, R) * np.ones_like(R),
        "wlap_r": laplacian_r(model, R) - phi_r,
        "mhess_rad": mh.radial,
        "mhess_tan": mh.tangential,
        "gap_mhess": K - mh.max_eigenvalue(),
        "gap_hessian": hs,
        "gap_laplacian": cmp.laplacian_slack(model, K, grid),
        "norm_density": vol.normalized_density(model, K, R, TH),
        "dlog_norm_density": vol.dlog_normalized_density(model, K, R, TH),
    }
    return {k: np.asarray(v, dtype=float).ravel() for k, v in cols.items()}


def _rigidity(ctx):
    cfg = ctx.cfg
    K = ctx.K
    # g_r grows like r^{2K}; shrink the log-step so the relative RK4 error stays put
    base = ctx.integrator
    integ = IntegratorConfig(h=base.h / max(1, math.ceil(K / 2.0)), r_eps=base.r_eps,
                             refinement=base.refinement, tol=base.tol, guard=base.guard)
    conical = conical_check(ctx.model, K, ctx.grid, tol=ctx.tol["rigidity"], cfg=integ)
    conformal = verify_conformal_rigidity(K, ctx.model, ctx.grid, cfg=integ, tol=ctx.tol["ode"])
    out = {"conical": conical.to_dict(), "conformal": conformal.to_dict(),
           "expected": cfg.expect_rigidity}
    check = None
    if cfg.expect_rigidity is not None:
        ok = conical.kind == cfg.expect_rigidity
        check = GapReport("rigidity_expectation", [0.0], [0.0], [0.0 if ok else -1.0], 0.0,
                          extra={"expected": cfg.expect_rigidity, "kind": conical.kind})
    return out, check


def _max_abs(values):
    # the growth fit is skipped (NaN residuals) when the radii span under a decade
    vals = np.abs([v for v in values if not math.isnan(v)])
    return float(vals.max()) if vals.size else None


def run_scenario(cfg):
    """Execute every requested (default: applicable) check of ``cfg``.

    Raises
    ------
    ConfigError
        A requested check is not applicable to the model.
    """
    t0 = time.perf_counter()
    model = build_model(cfg.model)
    g = cfg.grid
    # theta only matters in dimension 2; higher dimensions carry radial densities
    theta_samples = g["theta_samples"] if model.n == 2 else 1
    grid = make_grid(g["r_min"], g["r_max"], g["steps"], theta_samples, g["psi_samples"],
                     g.get("spacing", "linear"))
    ctx = RunContext(cfg, model, grid, cfg.comparison, cfg.density_bounds, cfg.tolerances,
                     IntegratorConfig(tol=cfg.tolerances["ode"]))
    ctx.status = cmp.check_hypotheses(model, ctx.bounds, grid)

    requested = cfg.checks
    results = []
    for name, (_, _, applicable, run) in CHECKS.items():
        if requested is not None and name not in requested:
            continue
        if not applicable(ctx):
            if requested is not None:
                raise ConfigError(f"checks.{name}", "not applicable to this scenario")
            continue
        results.append(run(ctx))

    volumes = {}
    volume_rows = []
    if _pole_in_domain(ctx):
        rows, slope = _volume_table(ctx)
        volume_rows = rows
        volumes = {"radii": [r["R"] for r in rows], "growth_exponent": slope,
                   "comparison_exponent": (model.n - 1) * ctx.K + 1.0,
                   "max_abs_fit_residual": _max_abs(r["fit_residual"] for r in rows)}

    rigidity, expectation = _rigidity(ctx)
    if expectation is not None and (requested is None or "rigidity_expectation" in requested):
        results.append(expectation)

    checks = []
    for rep in results:
        d = rep.to_dict()
        checks.append({"name": d["name"], "pass": d["pass"], "min_slack": d["min_slack"],
                       "argmin": d["argmin"], "tolerance": d["tolerance"],
                       "hypothesis_status": d["hypothesis_status"],
                       "conditions": d["conditions"], "extra": d["extra"]})
    passed = all(c["pass"] for c in checks)
    return RunReport(cfg.name, passed, checks, rigidity, volumes, cfg.to_dict(), ctx.status,
                     wall_clock=time.perf_counter() - t0,
                     timestamp=datetime.datetime.now(datetime.timezone.utc).isoformat(),
                     series=_series(ctx), volume_rows=volume_rows)


def _fmt(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def emit_outputs(report, out_dir):
    """Write ``series.csv``, ``report.json`` and (when volumes exist) ``volumes.csv``.

    Returns
    -------
    list of str
        Paths written.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    series_path = os.path.join(out_dir, "series.csv")
    with open(series_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        cols = [report.series[c] for c in CSV_COLUMNS]
        for row in zip(*cols):
            w.writerow([_fmt(x) for x in row])
    paths.append(series_path)

    report_path = os.path.join(out_dir, "report.json")
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    paths.append(report_path)

    if report.volume_rows:
        vol_path = os.path.join(out_dir, "volumes.csv")
        with open(vol_path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(VOLUME_COLUMNS)
            for row in report.volume_rows:
                w.writerow([_fmt(row[c]) for c in VOLUME_COLUMNS])
        paths.append(vol_path)
    return paths
