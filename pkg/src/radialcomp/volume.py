"""
Radial volume density, ball volumes and the normalized density.

In geodesic polar coordinates the Riemannian volume element is
``A(r, theta) dr dtheta_{S^{n-1}}`` with ``A = det`` of the transverse Jacobi
matrix. On the warped products used here ``A = f^{n-1}``; tabulated warps
fall back to the Jacobi integration so both routes can be compared.
"""

import math
from dataclasses import dataclass

import numpy as np

from .comparison import _status, comparison_rate, laplacian_slack, resolve_K
from .models import ModelError, as_grid
from .quadrature import adaptive_simpson
from .radial import integrate_jacobi
from .reports import GapReport
from .weighted import hess_r, laplacian_r

__all__ = [
    "VolumeResult",
    "sphere_area",
    "radial_density",
    "check_log_derivative_identity",
    "check_density_upper_bound",
    "ball_volume",
    "weighted_ball_volume",
    "fit_growth_exponent",
    "growth_table",
    "normalized_density",
    "dlog_normalized_density",
    "check_normalized_monotonicity",
]

ANGULAR_NODES = 64


@dataclass(frozen=True)
class VolumeResult:
    R: float
    value: float
    method: str
    error: float = 0.0


def sphere_area(n):
    """Surface measure of the unit round sphere ``S^{n-1}``."""
    return 2.0 * math.pi ** (0.5 * n) / math.gamma(0.5 * n)


def _jacobi_density(model, r, cfg=None):
    r = np.asarray(r, dtype=float)
    nodes, inverse = np.unique(r.ravel(), return_inverse=True)
    series = integrate_jacobi(model, cfg, nodes)
    return series.extra["det"][inverse].reshape(r.shape)


def radial_density(model, r, theta=0.0, source="auto", cfg=None):
    """Radial volume density ``A(r, theta)``.

    Parameters
    ----------
    source : {"auto", "closed", "jacobi"}
        ``"closed"`` uses ``f^{n-1}``; ``"jacobi"`` integrates the transverse
        Jacobi field; ``"auto"`` picks the closed form for built-in warps.

    Raises
    ------
    ModelError
        If ``A <= 0`` at a requested radius (a conjugate point is behind it).
    """
    r = model.check_radius(r)
    if source == "auto":
        source = "closed" if model.warp.closed_form else "jacobi"
    if source == "closed":
        A = model.warp_jet(r).f ** (model.n - 1)
    elif source == "jacobi":
        A = _jacobi_density(model, r, cfg)
    else:
        raise ModelError(f"unknown density source {source!r}")
    if np.any(~(A > 0)):
        raise ModelError("radial density is non-positive: conjugate point before r")
    return A * np.ones(np.broadcast(r, theta).shape)


def check_log_derivative_identity(model, grid, step=1e-4, tol=1e-5, source="auto", cfg=None):
    """``d/dr log A = Delta r`` by central differences of step ``step``."""
    grid = as_grid(grid)
    r = grid.r
    if r[0] - step <= 0.0 or r[0] - step < model.r_domain[0] or r[-1] + step > model.r_domain[1]:
        raise ModelError("grid too close to the domain boundary for central differences")
    if r.size > 1 and np.min(np.diff(r)) <= 2.0 * step:
        raise ModelError("grid too coarse relative to the difference step")
    if source == "auto":
        source = "closed" if model.warp.closed_form else "jacobi"
    if source == "jacobi":
        both = radial_density(model, np.concatenate([r - step, r + step]), source="jacobi", cfg=cfg)
        lo, hi = both[:r.size], both[r.size:]
    else:
        lo = radial_density(model, r - step, source=source)
        hi = radial_density(model, r + step, source=source)
    fd = (np.log(hi) - np.log(lo)) / (2.0 * step)
    dev = np.abs(fd - laplacian_r(model, r))
    slack = -np.broadcast_to(dev, grid.shape)
    return GapReport("log_derivative_identity", r, grid.theta, slack, tol,
                     extra={"step": step, "source": source})


def check_density_upper_bound(model, bounds_or_K, r0, grid, tol=1e-9, hypotheses=None):
    """``A(r, theta) <= C(r0, theta) r^{(n-1)K}`` for ``r >= r0``.

    ``C = A(r0) r0^{-(n-1)K} e^{-(n-1) phi(r0)}``. The sharper intermediate
    bound ``A(r0) (r/r0)^{(n-1)K} e^{(n-1)(phi(r) - phi(r0))}`` is reported in
    ``extra``. ``phi`` is read along the fixed-``theta`` ray.
    """
    grid = as_grid(grid)
    K = resolve_K(bounds_or_K)
    model.check_radius(r0)
    model.check_radius(grid.r)
    if grid.r[0] < r0:
        raise ModelError(f"grid must lie in [r0, r_max], got r_min={grid.r[0]} < r0={r0}")
    n1 = model.n - 1
    R, TH = grid.mesh()
    A = radial_density(model, R, TH)
    A0 = radial_density(model, np.full(grid.theta.shape, float(r0)), grid.theta)[:, None]
    phi0 = model.density_jet(float(r0), grid.theta).phi
    phi0 = np.broadcast_to(phi0, grid.theta.shape)[:, None]
    phi = model.density_jet(R, TH).phi
    C = A0 * r0 ** (-n1 * K) * np.exp(-n1 * phi0)
    slack = C * R ** (n1 * K) - A
    sharper = A0 * (R / r0) ** (n1 * K) * np.exp(n1 * (phi - phi0)) - A
    return GapReport("density_upper_bound", grid.r, grid.theta, slack, tol,
                     _status(model, bounds_or_K, grid, hypotheses),
                     {"K": K, "r0": float(r0), "C": C[:, 0],
                      "sharper_min_slack": float(np.min(sharper))})


def _radial_integral(integrand, R, r0, tol):
    split = min(r0, R)
    total, err = 0.0, 0.0
    for lo, hi in ((0.0, split), (split, R)):
        v, e = adaptive_simpson(integrand, lo, hi, tol=tol, rel_tol=1e-12)
        total += v
        err += e
    return total, err


def _check_ball(model, R):
    if float(model.r_domain[0]) != 0.0:
        raise ModelError("ball volumes need a model domain starting at the origin")
    if not (0.0 < R <= model.r_domain[1]):
        raise ModelError(f"radius {R} outside model domain {tuple(model.r_domain)}")


def _warp_power(model):
    n1 = model.n - 1
    warp = model.warp
    # the origin itself is excluded by check_radius, but f(0) = 0 is needed here
    return lambda t: float(warp(t).f) ** n1 if t > 0.0 else 0.0


def ball_volume(model, R, r0=0.1, tol=1e-10, method="auto"):
    """Riemannian volume of the geodesic ball ``B_R`` about the pole.

    Closed form for ``f = r`` and ``f = r^K``; otherwise (or with
    ``method="quadrature"``) adaptive Simpson of ``f^{n-1}`` on ``[0, r0]``
    and ``[r0, R]``.
    """
    R = float(R)
    _check_ball(model, R)
    if method not in ("auto", "quadrature"):
        raise ModelError(f"unknown volume method {method!r}")
    area = sphere_area(model.n)
    kind, n1 = model.warp.kind, model.n - 1
    if method == "auto" and kind in ("identity", "power"):
        K = 1.0 if kind == "identity" else float(model.warp.params["K"])
        p = n1 * K + 1.0
        return VolumeResult(R, area * R ** p / p, "closed-form", 0.0)
    value, err = _radial_integral(_warp_power(model), R, r0, tol)
    if value <= 0.0:
        raise ModelError("non-positive volume: conjugate point before R")
    return VolumeResult(R, area * value, "quadrature", area * err)


def weighted_ball_volume(model, R, r0=0.1, tol=1e-10, method="auto"):
    """Weighted measure ``mu_phi(B_R) = int_{B_R} e^{-phi} dvol``.

    Constant densities rescale :func:`ball_volume` exactly; radial densities
    use the exact sphere area; ``n = 2`` non-radial densities apply the
    composite trapezoid rule on 64 equispaced angles.
    """
    R = float(R)
    _check_ball(model, R)
    dkind = model.density.kind
    if dkind in ("zero", "constant"):
        base = ball_volume(model, R, r0, tol, method)
        scale = math.exp(-float(model.density.params.get("value", 0.0)))
        return VolumeResult(R, scale * base.value, base.method, scale * base.error)
    if not model.density.regular_at_origin:
        raise ModelError(f"density {dkind!r} is singular at the origin")
    power = _warp_power(model)
    phi = model.density.phi

    def ray(theta):
        return _radial_integral(lambda t: math.exp(-float(phi(t, theta))) * power(t), R, r0, tol)

    if model.radial_density:
        value, err = ray(0.0)
        area = sphere_area(model.n)
        return VolumeResult(R, area * value, "quadrature", area * err)
    thetas = 2.0 * np.pi * np.arange(ANGULAR_NODES) / ANGULAR_NODES
    parts = np.array([ray(th) for th in thetas])
    w = 2.0 * np.pi / ANGULAR_NODES
    return VolumeResult(R, float(w * parts[:, 0].sum()), "quadrature", float(w * parts[:, 1].sum()))


def fit_growth_exponent(model, R_grid, weighted=False, return_residual=False, method="auto"):
    """Least-squares slope of ``log vol(B_R)`` against ``log R``.

    Raises
    ------
    ModelError
        Fewer than three radii, or the radii span less than one decade.
    """
    R = np.asarray(R_grid, dtype=float)
    if R.size < 3:
        raise ModelError("growth fit needs at least 3 radii")
    if R.max() / R.min() < 10.0 * (1.0 - 1e-12):
        raise ModelError("growth fit radii must span at least one decade")
    vol = weighted_ball_volume if weighted else ball_volume
    logv = np.log([vol(model, x, method=method).value for x in R])
    slope, intercept = np.polyfit(np.log(R), logv, 1)
    resid = logv - (slope * np.log(R) + intercept)
    if return_residual:
        return float(slope), resid
    return float(slope)


def growth_table(model, R_grid):
    """Rows ``(R, vol, wvol, fit_residual)`` with the residual of the unweighted fit."""
    R = np.asarray(R_grid, dtype=float)
    vols = [ball_volume(model, x) for x in R]
    wvols = [weighted_ball_volume(model, x) for x in R]
    try:
        slope, resid = fit_growth_exponent(model, R, return_residual=True)
    except ModelError:
        slope, resid = float("nan"), np.full(R.size, np.nan)
    rows = [{"R": float(x), "vol": v.value, "wvol": w.value, "fit_residual": float(e)}
            for x, v, w, e in zip(R, vols, wvols, resid)]
    return rows, slope


def normalized_density(model, bounds_or_K, r, theta=0.0):
    """``A / (r^{(n-1)K} e^{(n-1) phi})``, evaluated through logarithms."""
    K = resolve_K(bounds_or_K)
    r = model.check_radius(r)
    n1 = model.n - 1
    logA = np.log(radial_density(model, r, theta))
    phi = model.density_jet(r, theta).phi
    return np.exp(logA - n1 * (K * np.log(r) + phi))


def dlog_normalized_density(model, K, r, theta=0.0):
    """Closed-form ``d/dr log A~ = (n-1)(f'/f - K/r - phi_r)``.

    Written as ``(n-1) * (f'/f - rate)`` so that it is the exact negation of
    the Laplacian-comparison slack.
    """
    rate = comparison_rate(model, K, r, theta)
    return (model.n - 1) * (hess_r(model, r).tangential - rate)


def check_normalized_monotonicity(model, bounds_or_K, grid, tol=1e-9, hypotheses=None,
                                  fd_points=32, fd_step=1e-4, fd_tol=1e-5, seed=0):
    """``d/dr log A~ <= 0`` wherever the Laplacian comparison holds.

    The slack is ``-d/dr log A~`` at points with non-negative Laplacian slack
    (NaN elsewhere). Conditions: ``negation_exact`` (the derivative is the
    exact negation of the Laplacian slack) and ``fd_crosscheck`` (central
    differences of ``log A~`` at ``fd_points`` random grid points agree with
    the closed form within ``fd_tol``).
    """
    grid = as_grid(grid)
    K = resolve_K(bounds_or_K)
    R, TH = grid.mesh()
    dlog = dlog_normalized_density(model, K, R, TH)
    lap = laplacian_slack(model, K, grid)
    slack = np.where(lap >= 0.0, -dlog, np.nan)
    exact = bool(np.all(dlog + lap == 0.0))

    r_lo, r_hi = model.r_domain
    ok_r = (grid.r - fd_step > max(0.0, r_lo)) & (grid.r + fd_step <= r_hi)
    idx = np.nonzero(ok_r)[0]
    fd_dev = float("nan")
    if idx.size:
        rng = np.random.default_rng(seed)
        ir = rng.choice(idx, size=fd_points, replace=idx.size < fd_points)
        it = rng.integers(0, grid.theta.size, size=fd_points)
        rr, tt = grid.r[ir], grid.theta[it]
        hi = np.log(normalized_density(model, K, rr + fd_step, tt))
        lo = np.log(normalized_density(model, K, rr - fd_step, tt))
        fd = (hi - lo) / (2.0 * fd_step)
        closed = dlog_normalized_density(model, K, rr, tt)
        fd_dev = float(np.max(np.abs(fd - closed) / np.maximum(1.0, np.abs(closed))))
    conditions = {"negation_exact": exact,
                  "fd_crosscheck": bool(np.isnan(fd_dev) or fd_dev <= fd_tol)}
    norm = normalized_density(model, K, R, TH)
    return GapReport("normalized_monotonicity", grid.r, grid.theta, slack, tol,
                     _status(model, bounds_or_K, grid, hypotheses),
                     {"K": K, "fd_max_deviation": fd_dev,
                      "norm_density_range": [float(np.min(norm)), float(np.max(norm))]},
                     conditions)
