"""
Scenario configuration: the built-in registry and the JSON wire format.

A scenario document is a JSON object with the keys of
:class:`ScenarioConfig`. Instead of a full document one may pass the name of
a built-in scenario, or ``{"builtin": name, "params": {...}}`` optionally
followed by overrides of individual sections.
"""

import copy
import json
from dataclasses import dataclass, field
from typing import Optional

from .models import DensityBounds, ModelError, ModelSpec, build_model

__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "SCENARIOS",
    "DEFAULT_TOLERANCES",
    "builtin_config",
    "parse_config",
    "apply_override",
]

DEFAULT_TOLERANCES = {"identity": 1e-10, "ode": 1e-6, "fd": 1e-5,
                      "inequality": 1e-9, "rigidity": 1e-9}
GRID_KEYS = {"r_min", "r_max", "steps", "theta_samples", "psi_samples", "spacing"}
TOP_KEYS = {"name", "model", "bounds", "grid", "tolerances", "checks", "output",
            "expect_rigidity", "description"}
RIGIDITY_KINDS = {"none", "umbilic_equality", "conical_rigid"}


class ConfigError(ValueError):
    """Malformed or semantically invalid scenario document."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


def _default_grid(n):
    return {"r_min": 0.1, "r_max": 10.0, "steps": 1000,
            "theta_samples": 64 if n == 2 else 1, "psi_samples": 32, "spacing": "linear"}


def _scenario(name, description, warp, density, n, bounds, grid=None, r_domain=None,
              expect=None):
    g = _default_grid(n)
    g.update(grid or {})
    return {"name": name, "description": description,
            "model": {"warp": warp, "density": density, "n": n, "r_domain": r_domain,
                      "name": name},
            "bounds": bounds, "grid": g, "tolerances": dict(DEFAULT_TOLERANCES),
            "checks": None, "output": None, "expect_rigidity": expect}


def _euclidean(n=3):
    return _scenario("euclidean", "flat R^n, zero density, K = 1",
                     "identity", "zero", n, {"a": 0.0, "c": 0.0}, expect="conical_rigid")


def _cone(K=2.0, n=3):
    K = float(K)
    return _scenario("cone", "f = r^K, zero density, comparison constant set to K",
                     {"kind": "power", "params": {"K": K}}, "zero", n, {"K_override": K},
                     grid={"r_min": 0.25, "r_max": 10.0, "steps": 40},
                     expect="conical_rigid" if K == 1.0 else "umbilic_equality")


def _bounded_density(b=1.0, n=3, a=-1.0, c=0.25):
    return _scenario("bounded_density", "flat base, phi = -b/(1+r), K from (a, c)",
                     "identity", {"kind": "bounded", "params": {"b": float(b)}}, n,
                     {"a": float(a), "c": float(c)}, expect="none")


def _sphere_warp(n=2):
    return _scenario("sphere_warp", "f = sin r on (0, 3), zero density, K = 1",
                     "sin", "zero", n, {"a": 0.0, "c": 0.0},
                     grid={"r_min": 0.1, "r_max": 2.9}, r_domain=[0.0, 3.0], expect="none")


def _hyperbolic(n=3):
    return _scenario("hyperbolic", "f = sinh r, zero density; curvature hypothesis fails, "
                     "so the comparisons are expected to fail",
                     "sinh", "zero", n, {"a": 0.0, "c": 0.0}, grid={"r_max": 5.0},
                     expect="none")


def _conical_rigidity(K=0.5, F=None):
    K = float(K)
    F = {"sin": 0.1} if F is None else F
    return _scenario("conical_rigidity", "cone f = r with phi = (1-K) log r + F(theta), n = 2",
                     "identity", {"kind": "cone_log", "params": {"K": K, "F": F}}, 2,
                     {"K_override": K}, r_domain=[0.05, 20.0], expect="conical_rigid")


SCENARIOS = {
    "euclidean": _euclidean,
    "cone": _cone,
    "bounded_density": _bounded_density,
    "sphere_warp": _sphere_warp,
    "hyperbolic": _hyperbolic,
    "conical_rigidity": _conical_rigidity,
}


def builtin_config(name, **params):
    if name not in SCENARIOS:
        raise ConfigError("builtin", f"unknown scenario {name!r}; known: {sorted(SCENARIOS)}")
    try:
        return SCENARIOS[name](**params)
    except TypeError as exc:
        raise ConfigError("params", f"bad parameters for scenario {name!r}: {exc}") from None


@dataclass
class ScenarioConfig:
    name: str
    model: ModelSpec
    bounds: dict
    grid: dict
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    checks: Optional[list] = None
    output: Optional[str] = None
    expect_rigidity: Optional[str] = None
    description: str = ""

    @property
    def density_bounds(self):
        if "K_override" in self.bounds:
            return None
        return DensityBounds(self.bounds["a"], self.bounds["c"])

    @property
    def comparison(self):
        """Either :class:`DensityBounds` or the overriding ``K``."""
        if "K_override" in self.bounds:
            return float(self.bounds["K_override"])
        return self.density_bounds

    def to_dict(self):
        return {"name": self.name, "description": self.description,
                "model": self.model.to_dict(), "bounds": dict(self.bounds),
                "grid": dict(self.grid), "tolerances": dict(self.tolerances),
                "checks": None if self.checks is None else list(self.checks),
                "output": self.output, "expect_rigidity": self.expect_rigidity}


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k not in ("bounds",):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _number(value, path, positive=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(path, f"must be positive, got {value!r}")
    return int(value) if integer else float(value)


def _validate(doc, check_names):
    unknown = set(doc) - TOP_KEYS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown key")
    for key in ("name", "model", "bounds", "grid"):
        if key not in doc:
            raise ConfigError(key, "missing required key")
    if not isinstance(doc["name"], str) or not doc["name"]:
        raise ConfigError("name", "must be a non-empty string")

    if not isinstance(doc["model"], dict):
        raise ConfigError("model", "must be an object")
    try:
        spec = ModelSpec.from_dict(doc["model"])
        build_model(spec)
    except (ModelError, TypeError) as exc:
        raise ConfigError("model", str(exc)) from None

    bounds = doc["bounds"]
    if not isinstance(bounds, dict):
        raise ConfigError("bounds", "must be an object")
    if "K_override" in bounds:
        if set(bounds) != {"K_override"}:
            raise ConfigError("bounds", "K_override excludes a and c")
        bounds = {"K_override": _number(bounds["K_override"], "bounds.K_override", positive=True)}
    else:
        extra = set(bounds) - {"a", "c"}
        if extra:
            raise ConfigError(f"bounds.{sorted(extra)[0]}", "unknown key")
        bounds = {"a": _number(bounds.get("a", 0.0), "bounds.a"),
                  "c": _number(bounds.get("c", 0.0), "bounds.c")}
        if bounds["a"] > 0:
            raise ConfigError("bounds.a", "must be <= 0")
        if bounds["c"] < 0:
            raise ConfigError("bounds.c", "must be >= 0")

    grid = doc["grid"]
    if not isinstance(grid, dict):
        raise ConfigError("grid", "must be an object")
    extra = set(grid) - GRID_KEYS
    if extra:
        raise ConfigError(f"grid.{sorted(extra)[0]}", "unknown key")
    g = _default_grid(spec.n)
    g.update(grid)
    g["r_min"] = _number(g["r_min"], "grid.r_min", positive=True)
    g["r_max"] = _number(g["r_max"], "grid.r_max", positive=True)
    if not g["r_max"] > g["r_min"]:
        raise ConfigError("grid.r_max", "must exceed grid.r_min")
    g["steps"] = _number(g["steps"], "grid.steps", positive=True, integer=True)
    if g["steps"] < 3:
        raise ConfigError("grid.steps", "must be >= 3")
    g["theta_samples"] = _number(g["theta_samples"], "grid.theta_samples", positive=True, integer=True)
    g["psi_samples"] = _number(g["psi_samples"], "grid.psi_samples", positive=True, integer=True)
    if g["spacing"] not in ("linear", "log"):
        raise ConfigError("grid.spacing", "must be 'linear' or 'log'")
    model = build_model(spec)
    lo, hi = model.r_domain
    if g["r_min"] < lo or g["r_max"] > hi:
        raise ConfigError("grid", f"[{g['r_min']}, {g['r_max']}] outside model domain {tuple(model.r_domain)}")

    tol = dict(DEFAULT_TOLERANCES)
    tin = doc.get("tolerances") or {}
    if not isinstance(tin, dict):
        raise ConfigError("tolerances", "must be an object")
    for k, v in tin.items():
        if k not in DEFAULT_TOLERANCES:
            raise ConfigError(f"tolerances.{k}", "unknown key")
        tol[k] = _number(v, f"tolerances.{k}", positive=True)

    checks = doc.get("checks")
    if checks is not None:
        if not isinstance(checks, list) or not all(isinstance(c, str) for c in checks):
            raise ConfigError("checks", "must be a list of check names")
        for i, c in enumerate(checks):
            if check_names is not None and c not in check_names:
                raise ConfigError(f"checks[{i}]", f"unknown check {c!r}")

    expect = doc.get("expect_rigidity")
    if expect is not None and expect not in RIGIDITY_KINDS:
        raise ConfigError("expect_rigidity", f"must be one of {sorted(RIGIDITY_KINDS)}")
    output = doc.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("output", "must be a path string")

    return ScenarioConfig(doc["name"], spec, bounds, g, tol, checks, output, expect,
                          str(doc.get("description", "")))


def _resolve_doc(data):
    if isinstance(data, str):
        return builtin_config(data)
    if not isinstance(data, dict):
        raise ConfigError("", "scenario document must be a JSON object or a scenario name")
    if "builtin" in data:
        params = data.get("params") or {}
        if not isinstance(params, dict):
            raise ConfigError("params", "must be an object")
        base = builtin_config(data["builtin"], **params)
        over = {k: v for k, v in data.items() if k not in ("builtin", "params")}
        return _merge(base, over)
    return data


def parse_config(text, overrides=(), check_names=None):
    """Parse a scenario name or JSON document into a validated :class:`ScenarioConfig`.

    Parameters
    ----------
    text : str or dict
        Built-in scenario name, JSON text, or an already-decoded object.
    overrides : sequence of str
        ``dotted.key=value`` assignments applied before validation; values
        are decoded as JSON when possible, else kept as strings.
    check_names : collection of str, optional
        Registered check names used to validate ``checks``.

    Raises
    ------
    ConfigError
        With the offending field path.
    """
    if isinstance(text, str):
        stripped = text.strip()
        if stripped in SCENARIOS:
            data = stripped
        else:
            try:
                data = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise ConfigError("", f"parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    else:
        data = text
    doc = _resolve_doc(data)
    for item in overrides:
        doc = apply_override(doc, item)
    return _validate(doc, check_names)


def apply_override(doc, assignment):
    """Apply one ``dotted.key=value`` assignment to a scenario document."""
    if "=" not in assignment:
        raise ConfigError(assignment, "override must look like key=value")
    key, raw = assignment.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    path = key.strip().split(".")
    if not all(path):
        raise ConfigError(key, "empty path component")
    doc = copy.deepcopy(doc)
    node = doc
    for i, part in enumerate(path[:-1]):
        child = node.get(part)
        if child is None:
            child = node[part] = {}
        if not isinstance(child, dict):
            raise ConfigError(".".join(path[:i + 1]), "is not an object")
        node = child
    node[path[-1]] = value
    return doc
