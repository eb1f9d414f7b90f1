import sys

import numpy as np
import pytest
from hypothesis import settings

from radialcomp.models import build_model, make_grid

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def model(warp="identity", density="zero", n=3, r_domain=None, **_):
    return build_model({"warp": warp, "density": density, "n": n, "r_domain": r_domain})


def power(K):
    return {"kind": "power", "params": {"K": float(K)}}


def bounded(b=1.0):
    return {"kind": "bounded", "params": {"b": float(b)}}


def cone_log(K, F=None):
    params = {"K": float(K)}
    if F is not None:
        params["F"] = F
    return {"kind": "cone_log", "params": params}


@pytest.fixture
def flat3():
    return model()


@pytest.fixture
def grid():
    return make_grid(0.1, 10.0, 400)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for name, mod in list(sys.modules.items()):
        if name.endswith("test_acceptance") and hasattr(mod, "ACCEPTANCE"):
            lines = [mod.ACCEPTANCE[k] for k in sorted(mod.ACCEPTANCE)]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
