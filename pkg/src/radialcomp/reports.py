"""Per-check result records shared by the checking modules."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = ["GapReport", "to_jsonable"]


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays and tuples into JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if np.isfinite(x) else None
    return obj


@dataclass
class GapReport:
    """Slack of one inequality (``RHS - LHS``) sampled on an ``(theta, r)`` grid.

    Identity checks store ``slack = -|deviation|`` so the same rule applies:
    the check passes iff ``min slack >= -tolerance`` and every entry of
    ``conditions`` (named auxiliary pass/fail results) holds. NaN entries mark
    points where the check does not apply and are ignored.
    """

    name: str
    r: np.ndarray
    theta: np.ndarray
    slack: np.ndarray
    tolerance: float = 1e-9
    hypothesis_status: Optional[dict] = None
    extra: dict = field(default_factory=dict)
    conditions: dict = field(default_factory=dict)

    def __post_init__(self):
        self.r = np.atleast_1d(np.asarray(self.r, dtype=float))
        self.theta = np.atleast_1d(np.asarray(self.theta, dtype=float))
        self.slack = np.asarray(self.slack, dtype=float).reshape(self.theta.size, self.r.size)

    @property
    def min_slack(self):
        if np.all(np.isnan(self.slack)):
            return np.nan
        return float(np.nanmin(self.slack))

    @property
    def argmin(self):
        if np.all(np.isnan(self.slack)):
            return {"r": None, "theta": None}
        it, ir = np.unravel_index(np.nanargmin(self.slack), self.slack.shape)
        return {"r": float(self.r[ir]), "theta": float(self.theta[it])}

    @property
    def passed(self):
        m = self.min_slack
        ok = bool(np.isnan(m) or m >= -self.tolerance)
        return ok and all(bool(v) for v in self.conditions.values())

    def to_dict(self):
        return to_jsonable({
            "name": self.name,
            "pass": self.passed,
            "min_slack": self.min_slack,
            "argmin": self.argmin,
            "tolerance": self.tolerance,
            "hypothesis_status": self.hypothesis_status,
            "conditions": self.conditions,
            "extra": self.extra,
        })
