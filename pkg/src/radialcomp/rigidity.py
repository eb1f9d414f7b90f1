"""
Equality cases of the comparison estimates.

Three levels are distinguished, each implying the previous one:

* ``umbilic_equality``: geodesic spheres are totally umbilic at exactly the
  comparison rate, ``S = (K/r + phi_r) I``;
* ``conformal_rigid``: the sphere metric solves the evolution equation
  ``d g_r / dr = 2 (K/r + phi_r) g_r`` and hence equals
  ``r^{2K} e^{2 phi} g_0`` after anchoring;
* ``conical_rigid``: ``MHess u = K g`` for ``u = r^2 / 2``, which forces the
  metric cone ``f = r`` and ``phi_r = (1 - K) / r``.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .comparison import comparison_rate, resolve_K
from .models import Density, ModelError, angular_profile, as_grid
from .radial import IntegratorConfig, RadialSeries, integrate_metric_evolution
from .reports import to_jsonable
from .weighted import hess_r, mhess_u

__all__ = [
    "RIGIDITY_TOL",
    "RigidityVerdict",
    "umbilicity_gap",
    "verify_conformal_rigidity",
    "conical_check",
    "cone_density_profile",
]

RIGIDITY_TOL = 1e-9
KINDS = ("none", "umbilic_equality", "conformal_rigid", "conical_rigid")


@dataclass
class RigidityVerdict:
    """Outcome of a rigidity test.

    ``max_deviation`` is the largest residual that decided ``kind``;
    ``reconstruction_error`` the relative error of the ODE-reconstructed
    sphere metric against its closed form.
    """

    kind: str
    max_deviation: float
    witness: dict
    reconstruction_error: Optional[float] = None
    tolerance: float = RIGIDITY_TOL
    residuals: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown verdict kind {self.kind!r}")

    @property
    def rigid(self):
        return self.kind != "none"

    def to_dict(self):
        return to_jsonable({
            "kind": self.kind,
            "max_deviation": self.max_deviation,
            "witness": self.witness,
            "reconstruction_error": self.reconstruction_error,
            "tolerance": self.tolerance,
            "residuals": self.residuals,
            "extra": self.extra,
        })


def _witness(grid, values):
    if np.all(np.isnan(values)):
        return {"r": None, "theta": None}
    it, ir = np.unravel_index(np.nanargmax(values), values.shape)
    return {"r": float(grid.r[ir]), "theta": float(grid.theta[it])}


def _umbilic(model, K, grid):
    R, TH = grid.mesh()
    return np.abs(hess_r(model, R).tangential - comparison_rate(model, K, R, TH))


def umbilicity_gap(model, bounds_or_K, grid):
    """``|f'/f - (K/r + phi_r)|`` per grid point.

    Returns
    -------
    RadialSeries
        ``values`` has shape ``(n_r,)`` for a single direction and
        ``(n_r, n_theta)`` otherwise.
    """
    grid = as_grid(grid)
    K = resolve_K(bounds_or_K)
    gap = _umbilic(model, K, grid).T
    if grid.theta.size == 1:
        gap = gap[:, 0]
    return RadialSeries(grid.r, gap, float(grid.theta[0]), "umbilicity_gap",
                        extra={"K": K, "max": float(np.max(gap))})


def _density_of(density_or_model):
    if isinstance(density_or_model, Density):
        return density_or_model, None
    if hasattr(density_or_model, "density") and hasattr(density_or_model, "warp"):
        return density_or_model.density, density_or_model
    raise ModelError("expected a Density or a ManifoldModel")


def verify_conformal_rigidity(K, density_or_model, grid, g0_scale=1.0, cfg=None, tol=1e-5):
    """Reconstruct ``g_r`` from ``d g_r / dr = 2 (K/r + phi_r) g_r`` and compare.

    The ODE is anchored at the smallest grid radius ``r_a`` with value
    ``g0_scale``; the reference is ``g0_scale (r/r_a)^{2K} e^{2(phi(r) -
    phi(r_a))}``, which absorbs any angular factor into ``g_0``. When a model
    is passed, the deviation of its own ``f^2`` (anchored the same way) is
    reported under ``extra["model_warp_deviation"]``.
    """
    grid = as_grid(grid)
    K = float(K)
    if np.any(grid.r <= 0.0):
        raise ModelError("rigidity grid must be positive")
    density, model = _density_of(density_or_model)
    th = grid.theta
    single = th.size == 1

    def coefficient(r):
        r = np.asarray(r, dtype=float)
        if single:
            return K / r + density(r, th[0]).phi_r
        rr = r[..., None]
        return K / rr + density(rr, th).phi_r

    series = integrate_metric_evolution(coefficient, g0_scale, grid.r, cfg)
    rec = series.values.reshape(grid.r.size, th.size).T
    ra = grid.r[0]
    R, TH = grid.mesh()
    phi = density(R, TH).phi
    phi_a = density(np.full(th.shape, ra), th).phi[:, None]
    closed = g0_scale * (R / ra) ** (2.0 * K) * np.exp(2.0 * (phi - phi_a))
    dev = np.abs(rec - closed) / np.abs(closed)
    max_dev = float(np.max(dev))
    extra = {"K": K, "anchor_radius": float(ra), "ode_error_estimate": series.error_estimate}
    if model is not None:
        f = model.warp_jet(grid.r).f
        f2 = g0_scale * (f / f[0]) ** 2
        extra["model_warp_deviation"] = float(np.max(np.abs(rec - f2) / f2))
    kind = "conformal_rigid" if max_dev <= tol else "none"
    return RigidityVerdict(kind, max_dev, _witness(grid, dev), max_dev, tol,
                           {"metric": max_dev}, extra)


def conical_check(model, K, grid, tol=RIGIDITY_TOL, cfg=None):
    """Test the conical equality ``MHess u = K g``.

    Residuals, each maximised over the grid:

    * ``radial``: ``|1 - r phi_r - K|``;
    * ``tangential``: ``|r f'/f - r phi_r - K|``;
    * ``cone``: ``|f'/f - 1/r|``;
    * ``forced_profile``: ``|phi_r - (1 - K)/r|`` where ``radial`` passes;
    * ``umbilic``: the umbilicity gap with the same ``K``.

    The metric is also reconstructed from the evolution equation, anchored
    to ``f(r_a)^2`` at the smallest radius; ``extra["cone_scale"]`` is
    ``g_r / r^2`` at the outermost radius, the same for every ``K`` on a
    conical model.
    """
    grid = as_grid(grid)
    K = float(K)
    R, TH = grid.mesh()
    mh = mhess_u(model, R, TH)
    res_rad = np.abs(mh.radial - K)
    res_tan = np.abs(mh.tangential - K)
    res_cone = np.abs(hess_r(model, R).tangential - 1.0 / R)
    phi_r = model.density_jet(R, TH).phi_r
    res_prof = np.where(res_rad <= tol, np.abs(phi_r - (1.0 - K) / R), np.nan)
    umb = _umbilic(model, K, grid)

    worst = np.maximum(np.maximum(res_rad, res_tan), res_cone)
    residuals = {"radial": float(np.max(res_rad)),
                 "tangential": float(np.max(res_tan)),
                 "cone": float(np.max(res_cone)),
                 "forced_profile": None if np.all(np.isnan(res_prof)) else float(np.nanmax(res_prof)),
                 "umbilic": float(np.max(umb))}

    f = model.warp_jet(grid.r).f
    rec = verify_conformal_rigidity(K, model, grid, g0_scale=float(f[0] ** 2), cfg=cfg)
    g_rec = rec.extra.get("model_warp_deviation")

    conical = float(np.max(worst)) <= tol and (residuals["forced_profile"] or 0.0) <= tol
    if conical:
        kind, dev, wit = "conical_rigid", float(np.max(worst)), _witness(grid, worst)
    elif residuals["umbilic"] <= tol:
        kind, dev, wit = "umbilic_equality", residuals["umbilic"], _witness(grid, umb)
    else:
        kind, dev, wit = "none", float(np.max(worst)), _witness(grid, worst)

    scale = _cone_scale(K, model, grid, f[0] ** 2, cfg)
    extra = {"K": K, "cone_scale": scale, "conformal_metric_deviation": rec.max_deviation}
    return RigidityVerdict(kind, dev, wit, g_rec, tol, residuals, extra)


def _cone_scale(K, model, grid, g0, cfg):
    density = model.density
    th0 = float(grid.theta[0])
    coefficient = lambda r: K / np.asarray(r) + density(r, th0).phi_r
    series = integrate_metric_evolution(coefficient, g0, grid.r, cfg or IntegratorConfig())
    return float(series.values[-1] / grid.r[-1] ** 2)


def cone_density_profile(K, F_values, r, theta=0.0):
    """Forced conical density ``(1 - K) log r + F(theta)``.

    ``F_values`` is any angular profile accepted by
    :func:`~radialcomp.models.angular_profile` (None, a constant, a
    ``{"sin": amp}`` dict or a periodic table).
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise ModelError("cone density profile needs r > 0")
    F = angular_profile(F_values)[0]
    theta = np.asarray(theta, dtype=float)
    r, theta = np.broadcast_arrays(r, theta)
    out = (1.0 - float(K)) * np.log(r) + F(theta)
    return out if out.ndim else float(out)
