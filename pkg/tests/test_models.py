import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from radialcomp.models import (DensityBounds, ModelError, ModelSpec, RadialGrid, angular_profile,
                               as_grid, build_model, comparison_constant, make_density, make_grid,
                               make_warp, reparam_distance)
from radialcomp.quadrature import QuadratureError, adaptive_simpson

from conftest import bounded, cone_log, model, power

r_sym, th_sym = sp.symbols("r theta", positive=True)

WARP_ORACLES = {
    ("identity", ()): r_sym,
    ("power", (("K", 2.0),)): r_sym ** 2,
    ("power", (("K", 0.5),)): sp.sqrt(r_sym),
    ("sin", ()): sp.sin(r_sym),
    ("sinh", ()): sp.sinh(r_sym),
    ("perturbed_cone", (("eps", 0.01),)): r_sym * (1 + sp.Rational(1, 100) * r_sym),
}


@pytest.mark.parametrize("key", list(WARP_ORACLES))
def test_warp_jets_match_symbolic(key):
    kind, params = key
    warp = make_warp(kind, **dict(params))
    expr = WARP_ORACLES[key]
    funcs = [sp.lambdify(r_sym, sp.diff(expr, r_sym, k), "numpy") for k in range(3)]
    r = np.linspace(0.1, 2.9, 57)
    jet = warp(r)
    for got, f in zip((jet.f, jet.fp, jet.fpp), funcs):
        np.testing.assert_allclose(got, f(r) * np.ones_like(r), rtol=1e-13, atol=1e-14)


DENSITY_ORACLES = [
    ("bounded", {"b": 1.5}, -sp.Float(1.5) / (1 + r_sym)),
    ("bounded_angular", {"b": 1.0, "eps": 0.5}, -(1 + sp.Float(0.5) * sp.cos(th_sym)) / (1 + r_sym)),
    ("cone_log", {"K": 0.5, "F": {"sin": 0.1}}, sp.Float(0.5) * sp.log(r_sym) + sp.Float(0.1) * sp.sin(th_sym)),
    ("cone_log", {"K": 2.0, "F": {"sin": 0.2, "mode": 3, "phase": 0.4}},
     -sp.log(r_sym) + sp.Float(0.2) * sp.sin(3 * th_sym + sp.Float(0.4))),
    ("constant", {"value": -0.7}, sp.Float(-0.7) + 0 * r_sym),
]


@pytest.mark.parametrize("kind,params,expr", DENSITY_ORACLES)
def test_density_jets_match_symbolic(kind, params, expr):
    d = make_density(kind, **params)
    parts = [expr, sp.diff(expr, r_sym), sp.diff(expr, th_sym), sp.diff(expr, r_sym, 2),
             sp.diff(expr, r_sym, th_sym), sp.diff(expr, th_sym, 2)]
    funcs = [sp.lambdify((r_sym, th_sym), p, "numpy") for p in parts]
    r, th = np.meshgrid(np.linspace(0.2, 5.0, 13), np.linspace(0.0, 2 * np.pi, 11))
    jet = d(r, th)
    got = [jet.phi, jet.phi_r, jet.phi_th, jet.phi_rr, jet.phi_rth, jet.phi_thth]
    for g, f in zip(got, funcs):
        np.testing.assert_allclose(g, f(r, th) * np.ones_like(r), rtol=1e-12, atol=1e-13)


def test_tabulated_warp_tracks_sinh():
    t = np.linspace(0.0, 5.0, 400)
    w = make_warp("tabulated", r=t, f=np.sinh(t))
    r = np.linspace(0.2, 4.5, 50)
    jet = w(r)
    np.testing.assert_allclose(jet.f, np.sinh(r), rtol=1e-6)
    np.testing.assert_allclose(jet.fp, np.cosh(r), rtol=1e-4)
    assert not w.closed_form


def test_angular_table_profile_is_periodic():
    F, dF, ddF = angular_profile(np.sin(2 * np.pi * np.arange(32) / 32))
    th = np.linspace(0, 2 * np.pi, 9)
    np.testing.assert_allclose(F(th), np.sin(th), atol=5e-5)
    np.testing.assert_allclose(F(th + 2 * np.pi), F(th), atol=1e-14)
    np.testing.assert_allclose(dF(th), np.cos(th), atol=5e-4)


def test_angular_profile_errors():
    with pytest.raises(ModelError):
        angular_profile(lambda t: t)
    with pytest.raises(ModelError):
        angular_profile({"cos": 1.0})
    with pytest.raises(ModelError):
        angular_profile([1.0, 2.0])


def test_comparison_constant_values():
    assert comparison_constant(0.0, 0.0) == 1.0
    assert comparison_constant(-0.1, 0.1) == pytest.approx(math.exp(0.2) * 1.1, rel=1e-15)
    # (a, c) = (-1, 0.25) gives e^2 * 1.25
    assert comparison_constant(-1.0, 0.25) == pytest.approx(9.236320123663313, rel=1e-15)
    assert DensityBounds(-0.1, 0.1).K == pytest.approx(1.343543, abs=1e-6)
    with pytest.raises(ModelError):
        comparison_constant(0.1, 0.0)
    with pytest.raises(ModelError):
        DensityBounds(0.0, -1.0)


@given(st.floats(-5.0, 0.0), st.floats(0.0, 5.0))
def test_comparison_constant_at_least_one_and_monotone(a, c):
    K = comparison_constant(a, c)
    assert K >= 1.0
    assert comparison_constant(a - 0.1, c) >= K
    assert comparison_constant(a, c + 0.1) >= K


def test_reparam_distance_against_quad():
    m = model("identity", bounded(1.0))
    got = reparam_distance(m, 1.0)
    ref = quad(lambda t: math.exp(2.0 / (1.0 + t)), 0.0, 1.0, epsabs=1e-13)[0]
    assert got == pytest.approx(ref, abs=1e-10)
    assert got == pytest.approx(4.165740637279351, abs=1e-11)


def test_reparam_distance_constant_density_exact():
    m = model("identity", {"kind": "constant", "params": {"value": -1.0}})
    r = np.array([0.5, 1.0, 2.0])
    np.testing.assert_array_equal(reparam_distance(m, r), math.exp(2.0) * r)


def test_reparam_distance_rejects_singular_density():
    m = model("identity", cone_log(0.5), n=2, r_domain=(0.1, 5.0))
    with pytest.raises(ModelError):
        reparam_distance(m, 1.0)


@given(st.floats(0.01, 5.0), st.floats(0.05, 3.0))
def test_reparam_distance_dominates_r(r, b):
    m = model("identity", bounded(b))
    assert reparam_distance(m, r) >= r


def test_model_validation():
    with pytest.raises(ModelError):
        model(n=1)
    with pytest.raises(ModelError):
        model("sin", r_domain=(0.0, math.pi))
    with pytest.raises(ModelError):
        model("identity", {"kind": "bounded_angular", "params": {"b": 1.0, "eps": 0.5}}, n=3)
    with pytest.raises(ModelError):
        make_warp("nope")
    with pytest.raises(ModelError):
        make_density("bounded", b=-1.0)
    m = model("sin", r_domain=(0.0, 3.0))
    with pytest.raises(ModelError):
        m.warp_jet(3.1)
    with pytest.raises(ModelError):
        m.warp_jet(0.0)


def test_default_domains():
    assert build_model({"warp": "sin"}).r_domain == (0.0, 3.0)
    assert build_model({"warp": "identity"}).r_domain == (0.0, np.inf)


def test_model_spec_round_trip():
    spec = ModelSpec.from_dict({"warp": power(2.0), "density": bounded(0.5), "n": 4,
                                "r_domain": [0.0, 8.0], "name": "x"})
    again = ModelSpec.from_dict(spec.to_dict())
    assert again == ModelSpec(**{**spec.to_dict(), "r_domain": [0.0, 8.0]})
    with pytest.raises(ModelError):
        ModelSpec.from_dict({"warp": "identity", "colour": "red"})
    with pytest.raises(ModelError):
        build_model({"warp": {"kind": "power", "params": {"K": 2}, "extra": 1}})


def test_grids():
    g = make_grid(0.1, 1.0, 10, theta_samples=4)
    assert g.shape == (4, 10)
    R, TH = g.mesh()
    assert R.shape == TH.shape == (4, 10)
    np.testing.assert_allclose(g.theta, [0, np.pi / 2, np.pi, 3 * np.pi / 2])
    assert make_grid(0.1, 10.0, 3, spacing="log").r[1] == pytest.approx(1.0)
    with pytest.raises(ModelError):
        RadialGrid([1.0, 1.0])
    with pytest.raises(ModelError):
        make_grid(0.1, 1.0, 1)
    assert as_grid([0.5, 1.0]).shape == (1, 2)


@pytest.mark.parametrize("func,a,b,exact", [
    (math.sin, 0.0, math.pi, 2.0),
    (math.exp, 0.0, 1.0, math.e - 1.0),
    (lambda x: x ** 4, -1.0, 2.0, 33.0 / 5.0),
])
def test_adaptive_simpson(func, a, b, exact):
    value, err = adaptive_simpson(func, a, b, tol=1e-12)
    assert value == pytest.approx(exact, abs=1e-11)
    assert err <= 1e-11
    flipped, _ = adaptive_simpson(func, b, a, tol=1e-12)
    assert flipped == pytest.approx(-value, abs=1e-15)


def test_adaptive_simpson_endpoint_singularity():
    # sqrt has unbounded derivatives at 0, so only moderate tolerances converge
    value, _ = adaptive_simpson(math.sqrt, 0.0, 1.0, tol=1e-7)
    assert value == pytest.approx(2.0 / 3.0, abs=1e-7)


def test_adaptive_simpson_failure():
    with pytest.raises(QuadratureError):
        adaptive_simpson(lambda x: 1.0 / x if x else float("inf"), 0.0, 1.0, max_depth=10)
