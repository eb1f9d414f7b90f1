"""
Running the built-in scenarios
==============================

The same pipeline the ``radialcomp run`` command uses, driven from Python.
"""

from radialcomp.config import SCENARIOS, parse_config
from radialcomp.runner import run_scenario

for name in SCENARIOS:
    report = run_scenario(parse_config(name, ["grid.steps=200"]))
    failed = [c["name"] for c in report.checks if not c["pass"]]
    print(f"{name:<18} pass={report.passed!s:<5} rigidity={report.rigidity['conical']['kind']:<17}"
          f" failed={failed or '-'}")
