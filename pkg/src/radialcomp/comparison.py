"""
Grid evaluation of the radial comparison inequalities.

Every check returns a :class:`~radialcomp.reports.GapReport` with
``slack = RHS - LHS`` per grid point. Tangential checks use unit vectors
orthogonal to ``grad r``; the inequalities are quadratic in the vector, so
nothing is lost.

The comparison constant is passed either as :class:`DensityBounds` (``K`` is
then ``e^{-2a}(1 + c)``) or directly as a number, which is how the cone
equality examples decouple ``K`` from the density hypotheses.
"""

import numpy as np

from .models import DensityBounds, ModelError, as_grid
from .reports import GapReport
from .weighted import hess_r, laplacian_r, mhess_u, min_weighted_sec

__all__ = [
    "resolve_K",
    "check_hypotheses",
    "comparison_rate",
    "check_mhess_bound",
    "check_conformal_mhess_bound",
    "check_kwy_radial_inequality",
    "check_hessian_comparison",
    "weighted_shape_operator",
    "check_shape_comparison",
    "check_laplacian_comparison",
    "check_weighted_laplacian_comparison",
    "check_implication_chain",
    "hessian_slack",
    "laplacian_slack",
]

HYP_TOL = 1e-12


def resolve_K(bounds_or_K):
    if isinstance(bounds_or_K, DensityBounds):
        return bounds_or_K.K
    if bounds_or_K is None:
        raise ModelError("a comparison constant (bounds or K) is required")
    K = float(bounds_or_K)
    if not K > 0:
        raise ModelError(f"comparison constant must be positive, got K={K}")
    return K


def _bounds(bounds_or_K):
    return bounds_or_K if isinstance(bounds_or_K, DensityBounds) else None


def check_hypotheses(model, bounds, grid):
    """Sample the hypotheses ``a <= phi <= 0``, ``r |grad phi| <= c`` and ``sec_phi >= 0``.

    ``bounds`` may be None, in which case the ``a`` and ``c`` entries are None
    and only the sign of ``phi`` and the curvature are reported.
    """
    grid = as_grid(grid)
    R, TH = grid.mesh()
    wj = model.warp_jet(R)
    dj = model.density_jet(R, TH)
    grad = np.hypot(dj.phi_r, dj.phi_th / wj.f)
    r_grad = float(np.max(R * grad))
    phi_min, phi_max = float(np.min(dj.phi)), float(np.max(dj.phi))
    sec_min, sec_at = min_weighted_sec(model, grid)
    status = {
        "phi_min": phi_min,
        "phi_max": phi_max,
        "phi_le_0": phi_max <= HYP_TOL,
        "max_r_grad_phi": r_grad,
        "min_weighted_sec": sec_min,
        "min_weighted_sec_at": sec_at,
        "sec_nonneg": sec_min >= -1e-10,
        "a": None, "c": None, "a_le_phi": None, "grad_bound": None,
    }
    if bounds is not None:
        status.update(a=bounds.a, c=bounds.c,
                      a_le_phi=phi_min >= bounds.a - HYP_TOL,
                      grad_bound=r_grad <= bounds.c + HYP_TOL)
    flags = [status[k] for k in ("phi_le_0", "sec_nonneg", "a_le_phi", "grad_bound")]
    status["all_hold"] = all(f for f in flags if f is not None) and bounds is not None
    return status


def _status(model, bounds_or_K, grid, hypotheses):
    if hypotheses is False:
        return None
    if isinstance(hypotheses, dict):
        return hypotheses
    return check_hypotheses(model, _bounds(bounds_or_K), grid)


def comparison_rate(model, K, R, TH):
    """``K / r + phi_r``, the comparison bound on the shape operator."""
    return K / R + model.density_jet(R, TH).phi_r


def hessian_slack(model, K, grid):
    """``(K/r + phi_r) - f'/f`` on the grid; shape ``(n_theta, n_r)``."""
    R, TH = as_grid(grid).mesh()
    return comparison_rate(model, K, R, TH) - hess_r(model, R).tangential


def laplacian_slack(model, K, grid):
    """Trace of :func:`hessian_slack` over the ``n - 1`` sphere directions."""
    return (model.n - 1) * hessian_slack(model, K, grid)


def check_mhess_bound(model, bounds_or_K, grid, tol=1e-9, hypotheses=None):
    """``MHess(r^2/2) <= K g``: slack ``K - max eigenvalue``."""
    grid = as_grid(grid)
    K = resolve_K(bounds_or_K)
    R, TH = grid.mesh()
    slack = K - mhess_u(model, R, TH).max_eigenvalue()
    return GapReport("mhess_bound", grid.r, grid.theta, slack, tol,
                     _status(model, bounds_or_K, grid, hypotheses), {"K": K})


def check_conformal_mhess_bound(model, c, grid, tol=1e-9, hypotheses=None):
    """``MCHess(r^2/2) <= K g~`` with ``g~ = e^{-2 phi} g`` and ``K = 1 + c``.

    The a-free constant is used because the factor ``e^{-2 phi}`` is carried
    by ``g~`` itself.
    """
    grid = as_grid(grid)
    if c < 0:
        raise ModelError(f"gradient constant must be >= 0, got c={c}")
    K = 1.0 + c
    R, TH = grid.mesh()
    phi = model.density_jet(R, TH).phi
    slack = K * np.exp(-2.0 * phi) - mhess_u(model, R, TH).max_eigenvalue()
    if hypotheses is None:
        hypotheses = check_hypotheses(model, DensityBounds(min(0.0, float(np.min(phi))), c), grid)
    return GapReport("conformal_mhess_bound", grid.r, grid.theta, slack, tol,
                     hypotheses or None, {"K": K, "K_rule": "1 + c"})


def check_kwy_radial_inequality(model, grid, tol=1e-9, hypotheses=None, bounds=None):
    """``Hess r - phi_r g_r <= e^{-2 phi} / r`` on sphere directions."""
    grid = as_grid(grid)
    R, TH = grid.mesh()
    dj = model.density_jet(R, TH)
    slack = np.exp(-2.0 * dj.phi) / R - (hess_r(model, R).tangential - dj.phi_r)
    return GapReport("kwy_radial", grid.r, grid.theta, slack, tol,
                     _status(model, bounds, grid, hypotheses))


def check_hessian_comparison(model, bounds_or_K, grid, tol=1e-9, hypotheses=None):
    """``Hess r(X, X) <= (K/r + phi_r) |X_perp|^2`` for unit tangential ``X``."""
    grid = as_grid(grid)
    K = resolve_K(bounds_or_K)
    return GapReport("hessian_comparison", grid.r, grid.theta, hessian_slack(model, K, grid),
                     tol, _status(model, bounds_or_K, grid, hypotheses), {"K": K})


def weighted_shape_operator(model, r, theta=0.0):
    """Tangential eigenvalue ``f'/f - phi_r`` of the weighted shape operator."""
    return hess_r(model, r).tangential - model.density_jet(r, theta).phi_r


def check_shape_comparison(model, bounds_or_K, grid, tol=1e-9, hypotheses=None):
    """``S - phi_r I <= (K/r) I``: slack ``K/r - (f'/f - phi_r)``."""
    grid = as_grid(grid)
    K = resolve_K(bounds_or_K)
    R, TH = grid.mesh()
    slack = K / R - weighted_shape_operator(model, R, TH)
    return GapReport("shape_comparison", grid.r, grid.theta, slack, tol,
                     _status(model, bounds_or_K, grid, hypotheses), {"K": K})


def check_laplacian_comparison(model, bounds_or_K, grid, tol=1e-9, hypotheses=None):
    """``Delta r <= (n - 1)(K/r + phi_r)``."""
    grid = as_grid(grid)
    K = resolve_K(bounds_or_K)
    return GapReport("laplacian_comparison", grid.r, grid.theta, laplacian_slack(model, K, grid),
                     tol, _status(model, bounds_or_K, grid, hypotheses), {"K": K})


def check_weighted_laplacian_comparison(model, bounds_or_K, grid, tol=1e-9,
                                        hypotheses=None, c=None):
    """``Delta_phi r <= (n-1) K/r + (n-2) phi_r`` and its ``c``-form.

    The second form ``((n-1) K + (n-2) c) / r`` is evaluated where
    ``r |phi_r| <= c`` holds (``c`` taken from the bounds when not given);
    the report slack is the pointwise minimum of both forms.
    """
    grid = as_grid(grid)
    K = resolve_K(bounds_or_K)
    n = model.n
    R, TH = grid.mesh()
    phi_r = model.density_jet(R, TH).phi_r
    wlap = laplacian_r(model, R) - phi_r
    first = (n - 1) * K / R + (n - 2) * phi_r - wlap
    if c is None and isinstance(bounds_or_K, DensityBounds):
        c = bounds_or_K.c
    extra = {"K": K, "first_form_min_slack": float(np.min(first))}
    slack = first
    if c is not None:
        holds = R * np.abs(phi_r) <= c + HYP_TOL
        second = np.where(holds, ((n - 1) * K + (n - 2) * c) / R - wlap, np.nan)
        slack = np.fmin(first, second)
        extra.update(c=c, second_form_min_slack=float(np.nanmin(second)) if holds.any() else None,
                     second_form_points=int(holds.sum()))
    return GapReport("weighted_laplacian_comparison", grid.r, grid.theta, slack, tol,
                     _status(model, bounds_or_K, grid, hypotheses), extra)


def check_implication_chain(model, bounds_or_K, grid, tol=1e-12, hypotheses=None):
    """Where the MHess bound holds, the Hessian comparison must hold too.

    Slack is the Hessian slack restricted to points with non-negative MHess
    slack (NaN elsewhere). The condition ``trace_exact`` asserts that the
    Laplacian slack equals ``(n - 1)`` times the Hessian slack bit for bit.
    """
    grid = as_grid(grid)
    mh = check_mhess_bound(model, bounds_or_K, grid, hypotheses=False)
    hs = check_hessian_comparison(model, bounds_or_K, grid, hypotheses=False)
    lp = check_laplacian_comparison(model, bounds_or_K, grid, hypotheses=False)
    restricted = np.where(mh.slack >= 0.0, hs.slack, np.nan)
    exact = bool(np.array_equal(lp.slack, (model.n - 1) * hs.slack))
    return GapReport("implication_chain", grid.r, grid.theta, restricted, tol,
                     _status(model, bounds_or_K, grid, hypotheses),
                     {"mhess_points": int(np.sum(mh.slack >= 0.0))},
                     {"trace_exact": exact})
