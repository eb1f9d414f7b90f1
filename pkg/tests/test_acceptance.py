"""
Acceptance criteria, one test per criterion at its stated tolerance.

Each test records a single PASS/FAIL line in ``ACCEPTANCE``; the lines are
printed in the terminal summary (see ``conftest.py``) and when the module
is run as a script.
"""

import math

import numpy as np
import pytest

from radialcomp import comparison as cmp
from radialcomp import volume as vol
from radialcomp.config import SCENARIOS, parse_config
from radialcomp.models import (DensityBounds, build_model, comparison_constant, make_density,
                               make_grid, reparam_distance)
from radialcomp.radial import IntegratorConfig, integrate_jacobi, integrate_riccati
from radialcomp.rigidity import conical_check, verify_conformal_rigidity
from radialcomp.weighted import hess_r, mchess_u_via_conformal, mhess_u, min_weighted_sec

from conftest import bounded, cone_log, model, power

ACCEPTANCE = {}


def record(number, title, ok, detail=""):
    ACCEPTANCE[number] = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {title}" + (
        f"  [{detail}]" if detail else "")
    print(ACCEPTANCE[number])
    assert ok, ACCEPTANCE[number]


def scenario(name, **params):
    doc = {"builtin": name, "params": params} if params else name
    cfg = parse_config(doc)
    m = build_model(cfg.model)
    g = cfg.grid
    grid = make_grid(g["r_min"], g["r_max"], g["steps"],
                     g["theta_samples"] if m.n == 2 else 1, g["psi_samples"])
    return cfg, m, grid


def all_scenarios():
    return [scenario(name) for name in SCENARIOS]


def test_01_euclidean_identity():
    r = np.linspace(0.1, 10.0, 1000)
    worst = 0.0
    for n in (2, 3, 5):
        m = model(n=n)
        for tensor in (mhess_u(m, r), mchess_u_via_conformal(m, r)):
            worst = max(worst, np.max(np.abs(tensor.radial - 1.0)),
                        np.max(np.abs(tensor.tangential - 1.0)))
    record(1, "Euclidean MHess(r^2/2) = g for n in {2,3,5}", worst <= 1e-10, f"max dev {worst:.2e}")


def test_02_cone_equality():
    grid = make_grid(0.2, 10.0, 1000)
    ric, slack = 0.0, 0.0
    for K in (0.5, 1.0, 2.0):
        m = model(power(K), n=3)
        s = integrate_riccati(m, grid=grid.r)
        ric = max(ric, np.max(np.abs(s.values - K / grid.r) / (K / grid.r)))
        for check in (cmp.check_hessian_comparison, cmp.check_shape_comparison,
                      cmp.check_laplacian_comparison):
            slack = max(slack, np.max(np.abs(check(m, K, grid).slack)))
    ok = ric <= 1e-6 and slack <= 1e-9
    record(2, "cone S = K/r and zero comparison slacks", ok,
           f"Riccati rel {ric:.2e}, |slack| {slack:.2e}")


def test_03_jacobi_determinant():
    worst = 0.0
    cases = [("identity", None), (power(2), None), ("sin", (0.0, 3.0)), ("sinh", None)]
    for warp, dom in cases:
        r = np.linspace(0.1, 3.0 if warp == "sin" else 10.0, 1000)
        for n in (2, 3):
            m = model(warp, n=n, r_domain=dom)
            det = integrate_jacobi(m, grid=r).extra["det"]
            ref = m.warp_jet(r).f ** (n - 1)
            worst = max(worst, np.max(np.abs(det - ref) / ref))
    record(3, "Jacobi det A = f^(n-1)", worst <= 1e-6, f"max rel {worst:.2e}")


def test_04_log_derivative_identity():
    worst = 0.0
    for cfg, m, grid in all_scenarios():
        rep = vol.check_log_derivative_identity(m, grid, step=1e-4)
        worst = max(worst, -rep.min_slack)
    record(4, "d/dr log A = Delta r on every built-in scenario", worst < 1e-5, f"max dev {worst:.2e}")


def test_05_implication_chain():
    ok = True
    worst = 0.0
    for cfg, m, grid in all_scenarios():
        mh = cmp.check_mhess_bound(m, cfg.comparison, grid, hypotheses=False)
        hs = cmp.check_hessian_comparison(m, cfg.comparison, grid, hypotheses=False)
        lp = cmp.check_laplacian_comparison(m, cfg.comparison, grid, hypotheses=False)
        where = mh.slack >= 0.0
        if where.any():
            worst = min(worst, float(np.min(hs.slack[where])))
        ok &= bool(np.all(hs.slack[where] >= -1e-12))
        ok &= bool(np.array_equal(lp.slack, (m.n - 1) * hs.slack))
    record(5, "MHess bound => Hessian bound, Laplacian = (n-1) x Hessian exactly", ok,
           f"min Hessian slack where MHess holds {worst:.2e}")


def test_06_monotonicity():
    exact = True
    for cfg, m, grid in all_scenarios():
        R, TH = grid.mesh()
        K = cmp.resolve_K(cfg.comparison)
        dlog = vol.dlog_normalized_density(m, K, R, TH)
        lap = cmp.laplacian_slack(m, K, grid)
        exact &= bool(np.all(dlog == -lap))
    one = 0.0
    equality = [scenario("euclidean")] + [scenario("cone", K=K) for K in (0.5, 1.0, 2.0)] + [
        scenario("conical_rigidity", K=K, F=0.0) for K in (0.5, 2.0)]
    for cfg, m, grid in equality:
        R, TH = grid.mesh()
        one = max(one, np.max(np.abs(vol.normalized_density(m, cfg.comparison, R, TH) - 1.0)))
    record(6, "d/dr log A~ = -(Laplacian slack) exactly; A~ = 1 on equality cases",
           exact and one <= 1e-10, f"max |A~ - 1| {one:.2e}")


def test_07_volume():
    e3 = model(n=3)
    v = vol.ball_volume(e3, 2.0).value
    vq = vol.ball_volume(e3, 2.0, method="quadrature").value
    ball_ok = abs(v - 32 * math.pi / 3) <= 1e-6 and abs(vq - 32 * math.pi / 3) <= 1e-6
    R = np.geomspace(1.0, 100.0, 9)
    fit_err = 0.0
    for K in (0.5, 1.0, 2.0):
        for n in (2, 3):
            m = model(power(K), n=n)
            target = K * (n - 1) + 1
            for method in ("auto", "quadrature"):
                p = vol.fit_growth_exponent(m, R, method=method)
                fit_err = max(fit_err, abs(p - target) / target)
    sandwich = True
    for density, a in ((bounded(1.0), -1.0), ({"kind": "constant", "params": {"value": -1.0}}, -1.0),
                       ("zero", 0.0)):
        m = model("identity", density, n=3)
        for x in np.geomspace(0.1, 10.0, 12):
            b, w = vol.ball_volume(m, x).value, vol.weighted_ball_volume(m, x).value
            sandwich &= b <= w * (1 + 1e-12) and w <= math.exp(-a) * b * (1 + 1e-12)
    ok = ball_ok and fit_err <= 0.01 and sandwich
    record(7, "ball volume, growth exponent, weighted sandwich", ok,
           f"|vol - 32pi/3| {abs(v - 32 * math.pi / 3):.1e}, fit rel {fit_err:.1e}")


def test_08_density_upper_bound():
    g = make_grid(1.0, 50.0, 500)
    worst = np.inf
    for density, bounds in (("zero", DensityBounds(0.0, 0.0)), (bounded(1.0), DensityBounds(-1.0, 0.25))):
        rep = vol.check_density_upper_bound(model("identity", density, n=3), bounds, 1.0, g)
        worst = min(worst, rep.min_slack)
    record(8, "A <= C(r0) r^((n-1)K) on [1, 50]", worst >= -1e-9, f"min slack {worst:.2e}")


def test_09_conformal_reconstruction():
    grid = make_grid(0.1, 10.0, 1000)
    worst, ratio = 0.0, np.inf
    for K in (1.0, 2.0):
        for d in (make_density("zero"), make_density("bounded", b=1.0)):
            worst = max(worst, verify_conformal_rigidity(K, d, grid).max_deviation)
            coarse = verify_conformal_rigidity(K, d, grid, cfg=IntegratorConfig(h=0.02, tol=1e-2))
            fine = verify_conformal_rigidity(K, d, grid, cfg=IntegratorConfig(h=0.005, tol=1e-2))
            ratio = min(ratio, coarse.max_deviation / fine.max_deviation)
    record(9, "reconstructed g_r = r^(2K) e^(2 phi); quartering h gains >= 8x",
           worst <= 1e-5 and ratio >= 8.0, f"max rel {worst:.2e}, min gain {ratio:.0f}x")


def test_10_conical_rigidity():
    grid = make_grid(0.1, 10.0, 1000, theta_samples=16)
    m = build_model({"warp": "identity", "density": cone_log(0.5), "n": 2, "r_domain": [0.05, 20]})
    R, TH = grid.mesh()
    mh = mhess_u(m, R, TH)
    eig = max(np.max(np.abs(mh.radial - 0.5)), np.max(np.abs(mh.tangential - 0.5)))
    shape = np.max(np.abs(hess_r(m, R).tangential - 1.0 / R))
    verdict = conical_check(m, 0.5, grid).kind
    pert = conical_check(model("perturbed_cone", n=3), 1.0, make_grid(0.5, 2.0, 200))
    scales = [conical_check(build_model({"warp": "identity", "density": cone_log(K, {"sin": 0.1}),
                                         "n": 2, "r_domain": [0.05, 20]}), K, grid).extra["cone_scale"]
              for K in (0.5, 1.0, 2.0)]
    spread = max(scales) - min(scales)
    ok = (eig <= 1e-9 and shape <= 1e-9 and verdict == "conical_rigid"
          and pert.kind == "none" and pert.residuals["cone"] >= 1e-4 and spread <= 1e-9)
    record(10, "conical rigidity, perturbation rejected, K-independent scale", ok,
           f"eig {eig:.1e}, S {shape:.1e}, perturbed {pert.residuals['cone']:.2e}, spread {spread:.1e}")


def test_11_constants():
    exact = comparison_constant(0.0, 0.0) == 1.0
    rng = np.random.default_rng(11)
    a = -rng.exponential(1.0, 1000)
    c = rng.exponential(1.0, 1000)
    k_ok = all(comparison_constant(x, y) >= 1.0 for x, y in zip(a, c))
    r = np.linspace(0.05, 2.9, 30)
    s_ok = True
    densities = ["zero", {"kind": "constant", "params": {"value": -1.0}}, bounded(1.0),
                 {"kind": "tabulated", "params": {"r": list(np.linspace(0, 20, 60)),
                                                  "phi": list(-np.exp(-np.linspace(0, 20, 60)))}}]
    for d in densities:
        s = reparam_distance(model("identity", d, n=3), r)
        s_ok &= bool(np.all(s >= r))
    m2 = model("identity", {"kind": "bounded_angular", "params": {"b": 1.0, "eps": 0.5}}, n=2)
    for th in np.linspace(0, 2 * np.pi, 7):
        s_ok &= bool(np.all(reparam_distance(m2, r, th) >= r))
    record(11, "K(0,0) = 1, K >= 1, s(r) >= r", exact and k_ok and s_ok)


def test_12_hypothesis_checker():
    grid = make_grid(0.1, 2.9, 300, psi_samples=32)
    flat = min_weighted_sec(model(), grid)[0]
    sphere = min_weighted_sec(model("sin", r_domain=(0.0, 3.0)), grid)[0]
    hyper = min_weighted_sec(model("sinh"), grid)[0]
    cfg, m, g = scenario("bounded_density")
    status = cmp.check_hypotheses(m, cfg.density_bounds, g)
    passes = all(f(m, cfg.comparison, g, hypotheses=status).passed
                 for f in (cmp.check_hessian_comparison, cmp.check_laplacian_comparison))
    ok = (abs(flat) <= 1e-8 and abs(sphere - 1) <= 1e-8 and abs(hyper + 1) <= 1e-8
          and status["min_weighted_sec"] < 0 and not status["all_hold"] and passes)
    record(12, "min weighted sec 0 / +1 / -1; bounded density negative yet comparisons pass", ok,
           f"{flat:.1e}, {sphere:.9f}, {hyper:.9f}, bounded {status['min_weighted_sec']:.4f}")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q"]))
