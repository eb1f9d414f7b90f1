"""
Model geometries: rotationally symmetric warped products with density.

A model is the metric ``g = dr^2 + f(r)^2 g_round`` on ``(r_min, r_max) x
S^{n-1}`` together with a density function ``phi(r, theta)``. Both pieces are
carried as jet evaluators that return the function and the derivatives the
curvature formulas need, so downstream code never differentiates
numerically.

Built-in warp families
----------------------
``identity`` (f = r), ``power`` (f = r^K), ``sin``, ``sinh``,
``perturbed_cone`` (f = r (1 + eps r)) and ``tabulated`` (cubic spline).

Built-in density families
-------------------------
``zero``, ``constant``, ``bounded`` (phi = -b / (1 + r)), ``bounded_angular``
(phi = -b (1 + eps cos theta) / (1 + r), n = 2 only), ``cone_log``
(phi = (1 - K) log r + F(theta)) and ``tabulated`` (radial cubic spline).
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .quadrature import adaptive_simpson

__all__ = [
    "ModelError",
    "WarpJet",
    "DensityJet",
    "Warp",
    "Density",
    "ManifoldModel",
    "ModelSpec",
    "DensityBounds",
    "WARP_KINDS",
    "DENSITY_KINDS",
    "build_model",
    "make_warp",
    "make_density",
    "angular_profile",
    "comparison_constant",
    "reparam_distance",
    "RadialGrid",
    "make_grid",
    "as_grid",
]


class ModelError(ValueError):
    """Invalid model family, parameter, or evaluation point."""


@dataclass(frozen=True)
class WarpJet:
    f: np.ndarray
    fp: np.ndarray
    fpp: np.ndarray


@dataclass(frozen=True)
class DensityJet:
    """Density value and partials in geodesic polar coordinates ``(r, theta)``."""

    phi: np.ndarray
    phi_r: np.ndarray
    phi_th: np.ndarray
    phi_rr: np.ndarray
    phi_rth: np.ndarray
    phi_thth: np.ndarray


@dataclass(frozen=True)
class Warp:
    """Warp function ``f`` with its first two derivatives.

    ``closed_form`` marks families whose volume density ``f^{n-1}`` is taken
    as exact; tabulated warps set it to False and route through the Jacobi
    integrator instead.
    """

    kind: str
    params: dict
    jet: Callable[[np.ndarray], WarpJet]
    closed_form: bool = True
    smooth_origin: bool = True
    max_radius: float = np.inf

    def __call__(self, r):
        return self.jet(np.asarray(r, dtype=float))


@dataclass(frozen=True)
class Density:
    kind: str
    params: dict
    jet: Callable[[np.ndarray, np.ndarray], DensityJet]
    radial: bool = True
    nonpositive: bool = True
    regular_at_origin: bool = True

    def __call__(self, r, theta=0.0):
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float)
        r, theta = np.broadcast_arrays(r, theta)
        return self.jet(r, theta)

    def phi(self, r, theta=0.0):
        return self(r, theta).phi


def _zeros(r):
    return np.zeros_like(r, dtype=float)


# -- warp families ---------------------------------------------------------

def _identity_warp():
    return Warp("identity", {}, lambda r: WarpJet(r.copy(), np.ones_like(r), _zeros(r)))


def _power_warp(K):
    K = float(K)
    if K <= 0:
        raise ModelError(f"power warp exponent must be positive, got K={K}")

    def jet(r):
        return WarpJet(r**K, K * r**(K - 1.0), K * (K - 1.0) * r**(K - 2.0))

    return Warp("power", {"K": K}, jet, smooth_origin=(K == 1.0))


def _sin_warp():
    return Warp("sin", {}, lambda r: WarpJet(np.sin(r), np.cos(r), -np.sin(r)),
                max_radius=np.pi)


def _sinh_warp():
    return Warp("sinh", {}, lambda r: WarpJet(np.sinh(r), np.cosh(r), np.sinh(r)))


def _perturbed_cone_warp(eps=0.01):
    eps = float(eps)

    def jet(r):
        return WarpJet(r * (1.0 + eps * r), 1.0 + 2.0 * eps * r,
                       np.full_like(r, 2.0 * eps))

    return Warp("perturbed_cone", {"eps": eps}, jet)


def _tabulated_warp(r, f):
    r = np.asarray(r, dtype=float)
    f = np.asarray(f, dtype=float)
    if r.ndim != 1 or r.shape != f.shape or r.size < 4:
        raise ModelError("tabulated warp needs matching 1-d tables of >= 4 samples")
    if np.any(np.diff(r) <= 0):
        raise ModelError("tabulated warp radii must be strictly increasing")
    spline = CubicSpline(r, f)
    d1, d2 = spline.derivative(1), spline.derivative(2)

    def jet(x):
        return WarpJet(spline(x), d1(x), d2(x))

    smooth = bool(r[0] == 0.0 and f[0] == 0.0)
    return Warp("tabulated", {"r": r.tolist(), "f": f.tolist()}, jet,
                closed_form=False, smooth_origin=smooth, max_radius=float(r[-1]))


WARP_KINDS = {
    "identity": _identity_warp,
    "power": _power_warp,
    "sin": _sin_warp,
    "sinh": _sinh_warp,
    "perturbed_cone": _perturbed_cone_warp,
    "tabulated": _tabulated_warp,
}


# -- density families -----------------------------------------------------

def angular_profile(F):
    """Return ``(F, F', F'')`` callables for an angular profile spec.

    ``F`` may be None or a number (constant profile), a callable (its
    derivatives are then unavailable, so only constant use is safe; pass a
    triple instead), a triple of callables, a dict ``{"sin": amp, "mode": m,
    "phase": p}`` for ``amp * sin(m theta + p)``, or a 1-d table of values on
    the uniform periodic grid ``theta_k = 2 pi k / len(table)``.
    """
    if F is None or np.isscalar(F):
        c = 0.0 if F is None else float(F)
        return (lambda th: np.full_like(th, c, dtype=float), _zeros, _zeros)
    if isinstance(F, dict):
        unknown = set(F) - {"sin", "mode", "phase"}
        if unknown or "sin" not in F:
            raise ModelError(f"angular profile dict needs 'sin' (and optional mode/phase), got {sorted(F)}")
        amp = float(F["sin"])
        m = float(F.get("mode", 1))
        p = float(F.get("phase", 0.0))
        return (lambda th: amp * np.sin(m * th + p),
                lambda th: amp * m * np.cos(m * th + p),
                lambda th: -amp * m * m * np.sin(m * th + p))
    if isinstance(F, tuple) and len(F) == 3 and all(callable(x) for x in F):
        return F
    if callable(F):
        raise ModelError("a bare callable profile has no derivatives; pass (F, dF, d2F)")
    table = np.asarray(F, dtype=float)
    if table.ndim != 1 or table.size < 4:
        raise ModelError("angular table must be 1-d with at least 4 samples")
    nodes = 2.0 * np.pi * np.arange(table.size + 1) / table.size
    spline = CubicSpline(nodes, np.append(table, table[0]), bc_type="periodic")
    d1, d2 = spline.derivative(1), spline.derivative(2)
    wrap = lambda g: (lambda th: g(np.mod(th, 2.0 * np.pi)))
    return wrap(spline), wrap(d1), wrap(d2)


def _profile_is_constant(F):
    if F is None or np.isscalar(F):
        return True
    if isinstance(F, dict):
        return float(F.get("sin", 0.0)) == 0.0
    if isinstance(F, (list, np.ndarray)):
        arr = np.asarray(F, dtype=float)
        return bool(np.all(arr == arr[0]))
    return False


def _zero_density():
    def jet(r, th):
        z = _zeros(r)
        return DensityJet(z, z, z, z, z, z)

    return Density("zero", {}, jet)


def _constant_density(value=-1.0):
    value = float(value)

    def jet(r, th):
        z = _zeros(r)
        return DensityJet(np.full_like(r, value), z, z, z, z, z)

    return Density("constant", {"value": value}, jet, nonpositive=value <= 0.0)


def _bounded_density(b=1.0):
    b = float(b)
    if b <= 0:
        raise ModelError(f"bounded density needs b > 0, got b={b}")

    def jet(r, th):
        z = _zeros(r)
        u = 1.0 + r
        return DensityJet(-b / u, b / u**2, z, -2.0 * b / u**3, z, z)

    return Density("bounded", {"b": b}, jet)


def _bounded_angular_density(b=1.0, eps=0.5):
    b, eps = float(b), float(eps)
    if b <= 0 or not 0.0 <= eps <= 1.0:
        raise ModelError("bounded_angular density needs b > 0 and 0 <= eps <= 1")

    def jet(r, th):
        u = 1.0 + r
        a = 1.0 + eps * np.cos(th)
        da = -eps * np.sin(th)
        dda = -eps * np.cos(th)
        return DensityJet(-b * a / u, b * a / u**2, -b * da / u,
                          -2.0 * b * a / u**3, b * da / u**2, -b * dda / u)

    return Density("bounded_angular", {"b": b, "eps": eps}, jet, radial=(eps == 0.0))


def _cone_log_density(K=0.5, F=None):
    K = float(K)
    Fv, dF, ddF = angular_profile(F)

    def jet(r, th):
        z = _zeros(r)
        return DensityJet((1.0 - K) * np.log(r) + Fv(th), (1.0 - K) / r, dF(th),
                          -(1.0 - K) / r**2, z, ddF(th))

    params = {"K": K}
    if F is not None:
        params["F"] = F.tolist() if isinstance(F, np.ndarray) else F
    # (1-K) log r is unbounded at both ends unless K == 1
    return Density("cone_log", params, jet, radial=_profile_is_constant(F),
                   nonpositive=False, regular_at_origin=(K == 1.0))


def _tabulated_density(r, phi):
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if r.ndim != 1 or r.shape != phi.shape or r.size < 4:
        raise ModelError("tabulated density needs matching 1-d tables of >= 4 samples")
    spline = CubicSpline(r, phi)
    d1, d2 = spline.derivative(1), spline.derivative(2)

    def jet(x, th):
        z = _zeros(x)
        return DensityJet(spline(x), d1(x), z, d2(x), z, z)

    return Density("tabulated", {"r": r.tolist(), "phi": phi.tolist()}, jet,
                   nonpositive=bool(np.all(phi <= 0.0)),
                   regular_at_origin=bool(r[0] == 0.0))


DENSITY_KINDS = {
    "zero": _zero_density,
    "constant": _constant_density,
    "bounded": _bounded_density,
    "bounded_angular": _bounded_angular_density,
    "cone_log": _cone_log_density,
    "tabulated": _tabulated_density,
}


def make_warp(kind, **params):
    try:
        factory = WARP_KINDS[kind]
    except KeyError:
        raise ModelError(f"unknown warp family {kind!r}; known: {sorted(WARP_KINDS)}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise ModelError(f"bad parameters for warp {kind!r}: {exc}") from None


def make_density(kind, **params):
    try:
        factory = DENSITY_KINDS[kind]
    except KeyError:
        raise ModelError(f"unknown density family {kind!r}; known: {sorted(DENSITY_KINDS)}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise ModelError(f"bad parameters for density {kind!r}: {exc}") from None


# -- model ---------------------------------------------------------------

@dataclass(frozen=True)
class ManifoldModel:
    """Warped product ``dr^2 + f(r)^2 g_round`` of dimension ``n`` with density.

    ``r_domain`` is the radial sampling range; evaluation points must satisfy
    ``r_min <= r <= r_max`` and ``r > 0``. For ``n = 2`` the angle ``theta``
    is the polar angle; for ``n >= 3`` the density must be radial and
    ``theta`` is ignored.
    """

    n: int
    warp: Warp
    density: Density
    r_domain: tuple = (0.0, np.inf)
    name: str = ""

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ModelError(f"dimension must be an integer >= 2, got n={self.n}")
        r_min, r_max = map(float, self.r_domain)
        if not (0.0 <= r_min < r_max):
            raise ModelError(f"invalid radial domain {self.r_domain}")
        if r_max > self.warp.max_radius or (
                self.warp.kind == "sin" and r_max >= np.pi):
            raise ModelError(
                f"warp {self.warp.kind!r} requires r_max < {self.warp.max_radius}, got {r_max}")
        if not self.density.radial and self.n != 2:
            raise ModelError("non-radial densities are supported only for n = 2")

    @property
    def radial_density(self):
        return self.density.radial

    @property
    def smooth_origin(self):
        return self.warp.smooth_origin and float(self.r_domain[0]) == 0.0

    def check_radius(self, r):
        r = np.asarray(r, dtype=float)
        r_min, r_max = self.r_domain
        bad = ~((r > 0.0) & (r >= r_min) & (r <= r_max))
        if np.any(bad):
            worst = r[bad].ravel()[0]
            raise ModelError(f"radius {worst!r} outside model domain {tuple(self.r_domain)}")
        return r

    def warp_jet(self, r):
        return self.warp(self.check_radius(r))

    def density_jet(self, r, theta=0.0):
        return self.density(self.check_radius(r), theta)


@dataclass
class ModelSpec:
    """Declarative model description, as found under ``model`` in a scenario."""

    warp: dict = field(default_factory=lambda: {"kind": "identity"})
    density: dict = field(default_factory=lambda: {"kind": "zero"})
    n: int = 3
    r_domain: Optional[tuple] = None
    name: str = ""

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - {"warp", "density", "n", "r_domain", "name"}
        if unknown:
            raise ModelError(f"unknown model keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self):
        return {"warp": self.warp, "density": self.density, "n": self.n,
                "r_domain": None if self.r_domain is None else list(self.r_domain),
                "name": self.name}


def _family(entry, what):
    if isinstance(entry, str):
        return entry, {}
    if not isinstance(entry, dict) or "kind" not in entry:
        raise ModelError(f"{what} must be a name or a {{kind, params}} object")
    unknown = set(entry) - {"kind", "params"}
    if unknown:
        raise ModelError(f"unknown {what} keys: {sorted(unknown)}")
    return entry["kind"], dict(entry.get("params") or {})


def build_model(spec):
    """Construct a :class:`ManifoldModel` from a :class:`ModelSpec` or dict."""
    if isinstance(spec, dict):
        spec = ModelSpec.from_dict(spec)
    wkind, wparams = _family(spec.warp, "warp")
    dkind, dparams = _family(spec.density, "density")
    warp = make_warp(wkind, **wparams)
    density = make_density(dkind, **dparams)
    if spec.r_domain is None:
        r_max = 3.0 if wkind == "sin" else min(np.inf, warp.max_radius)
        domain = (0.0, r_max)
    else:
        domain = tuple(float(x) for x in spec.r_domain)
    return ManifoldModel(int(spec.n), warp, density, domain, spec.name)


# -- hypothesis constants -------------------------------------------------

def comparison_constant(a, c):
    """Comparison constant ``K = max(1 + c, e^{-2a} (1 + c))`` for ``a <= 0 <= c``."""
    if a > 0:
        raise ModelError(f"density lower bound must satisfy a <= 0, got a={a}")
    if c < 0:
        raise ModelError(f"gradient constant must satisfy c >= 0, got c={c}")
    return float(max(1.0 + c, np.exp(-2.0 * a) * (1.0 + c)))


@dataclass(frozen=True)
class DensityBounds:
    """Hypothesis constants ``a <= phi <= 0`` and ``|grad phi| <= c / r``."""

    a: float = 0.0
    c: float = 0.0

    def __post_init__(self):
        comparison_constant(self.a, self.c)

    @property
    def K(self):
        return comparison_constant(self.a, self.c)


def reparam_distance(model, r, theta=0.0, tol=1e-10):
    """Conformally reparametrized distance ``s(r) = int_0^r exp(-2 phi(t)) dt``.

    Integrates along the ray at angle ``theta``; ``r`` may be an array.
    Constant densities use the exact ``e^{-2 phi} r``.
    """
    if not model.density.regular_at_origin:
        raise ModelError(f"density {model.density.kind!r} is singular at the origin")
    r_arr = np.asarray(r, dtype=float)
    r_max = model.r_domain[1]
    if np.any(r_arr < 0.0) or np.any(r_arr > r_max):
        raise ModelError(f"radius outside [0, {r_max}]")
    if model.density.kind in ("zero", "constant"):
        out = np.exp(-2.0 * model.density.params.get("value", 0.0)) * r_arr
        return out if r_arr.ndim else float(out)

    def integrand(t):
        return float(np.exp(-2.0 * model.density.phi(t, theta)))

    out = np.array([adaptive_simpson(integrand, 0.0, float(x), tol=tol)[0]
                    for x in r_arr.ravel()])
    return out.reshape(r_arr.shape) if r_arr.ndim else float(out[0])


# -- sampling grids -------------------------------------------------------

@dataclass(frozen=True)
class RadialGrid:
    """Tensor grid of radii and polar angles.

    Arrays produced on a grid have shape ``(len(theta), len(r))``.
    """

    r: np.ndarray
    theta: np.ndarray = field(default_factory=lambda: np.zeros(1))
    psi_samples: int = 32

    def __post_init__(self):
        r = np.atleast_1d(np.asarray(self.r, dtype=float))
        th = np.atleast_1d(np.asarray(self.theta, dtype=float))
        if r.size == 0 or th.size == 0:
            raise ModelError("empty grid")
        if r.ndim != 1 or np.any(np.diff(r) <= 0):
            raise ModelError("grid radii must be a strictly increasing 1-d array")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "theta", th)

    @property
    def shape(self):
        return (self.theta.size, self.r.size)

    def mesh(self):
        """Return ``(R, TH)`` broadcast to :attr:`shape`."""
        TH, R = np.meshgrid(self.theta, self.r, indexing="ij")
        return R, TH


def make_grid(r_min, r_max, steps, theta_samples=1, psi_samples=32, spacing="linear"):
    if steps < 2:
        raise ModelError("grid needs at least 2 radial steps")
    if spacing == "linear":
        r = np.linspace(r_min, r_max, int(steps))
    elif spacing == "log":
        r = np.geomspace(r_min, r_max, int(steps))
    else:
        raise ModelError(f"unknown spacing {spacing!r}")
    theta = 2.0 * np.pi * np.arange(int(theta_samples)) / int(theta_samples)
    return RadialGrid(r, theta, int(psi_samples))


def as_grid(grid):
    """Coerce a bare radius array into a single-direction :class:`RadialGrid`."""
    if isinstance(grid, RadialGrid):
        return grid
    return RadialGrid(np.asarray(grid, dtype=float))
