"""
Curvature, Hessian and Laplacian quantities of the radial functions
``r`` and ``u = r^2 / 2`` on a warped product with density.

Rotational symmetry makes every symmetric 2-tensor built from ``r`` diagonal
in the frame ``{d/dr, unit sphere directions}``, so tensors are returned as
:class:`RadialTensorEigen` (radial and tangential eigenvalue, plus a mixed
``(r, theta)`` entry that only non-radial ``n = 2`` densities could populate).
"""

from dataclasses import dataclass

import numpy as np

from .models import ModelError, as_grid

__all__ = [
    "RadialTensorEigen",
    "PlaneSpec",
    "hess_r",
    "hess_density",
    "weighted_sec",
    "min_weighted_sec",
    "mhess_u",
    "mchess_u_via_conformal",
    "laplacian_r",
    "weighted_laplacian_r",
]


@dataclass(frozen=True)
class RadialTensorEigen:
    radial: np.ndarray
    tangential: np.ndarray
    mixed: np.ndarray = 0.0

    def max_eigenvalue(self):
        """Largest eigenvalue of the ``2x2`` block ``[[radial, mixed], [mixed, tangential]]``."""
        mean = 0.5 * (self.radial + self.tangential)
        half = 0.5 * (self.radial - self.tangential)
        return mean + np.hypot(half, self.mixed)


@dataclass(frozen=True)
class PlaneSpec:
    """An oriented tangent plane ``(U, V)`` at a point.

    The first leg is ``W = cos(psi) d/dr + sin(psi) X`` with ``X`` a unit
    sphere direction. For ``n >= 3`` the second leg is a unit sphere
    direction ``Y`` orthogonal to ``X``; for ``n = 2`` it is the rotation of
    ``W`` by a right angle. ``u_leg`` selects which leg plays ``U`` in the
    asymmetric weighted curvature (0 for ``W``, 1 for the second leg).
    """

    psi: float
    u_leg: int = 0

    def __post_init__(self):
        if self.u_leg not in (0, 1):
            raise ModelError(f"u_leg must be 0 or 1, got {self.u_leg}")


def _tangential_rate(jet):
    if np.any(jet.f == 0.0):
        raise ModelError("warp vanishes at an interior radius")
    return jet.fp / jet.f


def hess_r(model, r):
    """Hessian of the distance function: ``0`` radially, ``f'/f`` on spheres."""
    jet = model.warp_jet(r)
    rate = _tangential_rate(jet)
    return RadialTensorEigen(np.zeros_like(rate), rate, np.zeros_like(rate))


def _u_components(model, psi, u_leg):
    c, s = np.cos(psi), np.sin(psi)
    if u_leg == 0:
        return c, s
    if model.n == 2:
        return -s, c
    return np.zeros_like(c), np.ones_like(c)


def _hess_phi_frame(model, r, theta):
    """Components of ``Hess phi`` in the orthonormal frame ``(d/dr, e_theta)``."""
    wj = model.warp_jet(r)
    dj = model.density_jet(r, theta)
    rate = _tangential_rate(wj)
    h_rr = dj.phi_rr
    h_rt = (dj.phi_rth - rate * dj.phi_th) / wj.f
    h_tt = (dj.phi_thth + wj.f * wj.fp * dj.phi_r) / wj.f**2
    return h_rr, h_rt, h_tt, wj, dj


def hess_density(model, r, theta, psi, u_leg=0):
    """``Hess phi(U, U)`` for the unit vector ``U`` selected by ``(psi, u_leg)``.

    With ``u_leg = 0`` this is ``U = cos(psi) d/dr + sin(psi) e_theta``.
    """
    if not model.radial_density and model.n != 2:
        raise ModelError("non-radial densities are supported only for n = 2")
    h_rr, h_rt, h_tt, _, _ = _hess_phi_frame(model, r, theta)
    ur, ut = _u_components(model, psi, u_leg)
    return ur * ur * h_rr + 2.0 * ur * ut * h_rt + ut * ut * h_tt


def _sectional(model, wj, psi):
    radial_sec = -wj.fpp / wj.f
    if model.n == 2:
        return radial_sec + 0.0 * psi
    sphere_sec = (1.0 - wj.fp) * (1.0 + wj.fp) / wj.f**2
    c2 = np.cos(psi) ** 2
    return c2 * radial_sec + (1.0 - c2) * sphere_sec


def weighted_sec(model, r, theta, plane):
    """Weighted sectional curvature ``sec(U, V) + Hess phi(U, U) + dphi(U)^2``.

    Parameters
    ----------
    model : ManifoldModel
    r, theta : float or ndarray
        Evaluation point(s); broadcast together.
    plane : PlaneSpec
        Plane and the choice of leg playing ``U``.
    """
    psi = plane.psi
    h_rr, h_rt, h_tt, wj, dj = _hess_phi_frame(model, r, theta)
    ur, ut = _u_components(model, psi, plane.u_leg)
    hess = ur * ur * h_rr + 2.0 * ur * ut * h_rt + ut * ut * h_tt
    dphi_u = ur * dj.phi_r + ut * dj.phi_th / wj.f
    # for n >= 3 the orthogonal leg Y carries no theta component
    if model.n > 2 and plane.u_leg == 1:
        dphi_u = ur * dj.phi_r
    return _sectional(model, wj, psi) + hess + dphi_u**2


def min_weighted_sec(model, grid):
    """Sampled minimum of the weighted sectional curvature.

    Scans every ``(r, theta)`` of ``grid``, ``grid.psi_samples`` mixing
    angles in ``[0, pi/2]`` and both choices of ``U``. The expression is
    affine in the squared radial component of ``U``, so the two legs bound
    every unit vector of each plane.

    Returns
    -------
    value : float
    where : dict
        ``{"r", "theta", "psi", "u_leg"}`` of the minimiser.
    """
    grid = as_grid(grid)
    R, TH = grid.mesh()
    psis = np.linspace(0.0, 0.5 * np.pi, max(int(grid.psi_samples), 2))
    best = np.inf
    where = None
    for leg in (0, 1):
        vals = np.stack([weighted_sec(model, R, TH, PlaneSpec(p, leg)) for p in psis])
        k = int(np.argmin(vals))
        if vals.flat[k] < best:
            ip, it, ir = np.unravel_index(k, vals.shape)
            best = float(vals.flat[k])
            where = {"r": float(grid.r[ir]), "theta": float(grid.theta[it]),
                     "psi": float(psis[ip]), "u_leg": leg}
    return best, where


def mhess_u(model, r, theta=0.0):
    """Modified Hessian ``Hess u - g(grad u, grad phi) g`` of ``u = r^2 / 2``.

    Uses ``Hess u = dr (x) dr + r Hess r``: the radial eigenvalue is
    ``1 - r phi_r`` and the tangential one ``r f'/f - r phi_r``.
    """
    r = model.check_radius(r)
    rate = hess_r(model, r).tangential
    phi_r = model.density_jet(r, theta).phi_r
    return RadialTensorEigen(1.0 - r * phi_r, r * rate - r * phi_r,
                             np.zeros(np.broadcast(r, phi_r).shape))


def _christoffel(g, dg):
    """``Gamma^k_ij`` from metric ``g[..., i, j]`` and ``dg[..., k, i, j] = d_k g_ij``."""
    ginv = np.linalg.inv(g)
    # lower[i, j, l] = (d_i g_jl + d_j g_il - d_l g_ij) / 2
    lower = 0.5 * (dg + np.swapaxes(dg, -3, -2) - np.einsum("...lij->...ijl", dg))
    return np.einsum("...kl,...ijl->...kij", ginv, lower)


def mchess_u_via_conformal(model, r, theta=0.0):
    """Modified conformal Hessian of ``u = r^2 / 2``, eigenvalues relative to ``g``.

    Computes ``Hess_{g~} u`` for ``g~ = e^{-2 phi} g`` from the Christoffel
    symbols of ``g~`` in the coordinate chart ``(r, theta)`` (a great-circle
    angle when ``n >= 3``), then subtracts ``dphi (x) du + du (x) dphi``.
    This route never uses the closed form of :func:`mhess_u`.
    """
    r = model.check_radius(r)
    wj = model.warp_jet(r)
    dj = model.density_jet(r, theta)
    shape = np.broadcast(r, dj.phi).shape
    f, fp = np.broadcast_to(wj.f, shape), np.broadcast_to(wj.fp, shape)
    w = np.exp(-2.0 * dj.phi)
    phi_r = np.broadcast_to(dj.phi_r, shape)
    phi_th = np.broadcast_to(dj.phi_th, shape)

    g = np.zeros(shape + (2, 2))
    g[..., 0, 0] = w
    g[..., 1, 1] = w * f * f
    dg = np.zeros(shape + (2, 2, 2))
    dg[..., 0, 0, 0] = -2.0 * phi_r * w
    dg[..., 1, 0, 0] = -2.0 * phi_th * w
    dg[..., 0, 1, 1] = w * (2.0 * f * fp - 2.0 * phi_r * f * f)
    dg[..., 1, 1, 1] = -2.0 * phi_th * w * f * f
    gamma = _christoffel(g, dg)

    rb = np.broadcast_to(r, shape)
    du = np.stack([rb, np.zeros(shape)], axis=-1)
    ddu = np.zeros(shape + (2, 2))
    ddu[..., 0, 0] = 1.0
    hess_tilde = ddu - np.einsum("...kij,...k->...ij", gamma, du)

    dphi = np.stack([phi_r, phi_th], axis=-1)
    cross = np.einsum("...i,...j->...ij", dphi, du)
    mch = hess_tilde - cross - np.swapaxes(cross, -1, -2)
    return RadialTensorEigen(mch[..., 0, 0], mch[..., 1, 1] / (f * f), mch[..., 0, 1] / f)


def laplacian_r(model, r):
    """``Delta r = (n - 1) f'/f``, the trace of :func:`hess_r` over the sphere."""
    return (model.n - 1) * hess_r(model, r).tangential


def weighted_laplacian_r(model, r, theta=0.0):
    """Drift Laplacian ``Delta_phi r = Delta r - phi_r``."""
    return laplacian_r(model, r) - model.density_jet(r, theta).phi_r
