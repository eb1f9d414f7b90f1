"""
Command-line scenario runner.

Exit codes: 0 every check passed, 1 at least one check failed, 2 invalid
configuration, 3 runtime or I/O failure.
"""

import argparse
import os
import sys

from .config import SCENARIOS, ConfigError, builtin_config, parse_config
from .models import ModelError
from .quadrature import QuadratureError
from .radial import IntegrationError
from .runner import CHECKS, emit_outputs, run_scenario

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3


def _load_text(scenario):
    if scenario in SCENARIOS:
        return scenario
    if os.path.isfile(scenario):
        with open(scenario, encoding="utf-8") as fh:
            return fh.read()
    # inline JSON is convenient for one-off runs
    return scenario


def cmd_run(args):
    overrides = list(args.set or [])
    for flag, key in ((args.r_min, "grid.r_min"), (args.r_max, "grid.r_max"),
                      (args.steps, "grid.steps")):
        if flag is not None:
            overrides.append(f"{key}={flag}")
    try:
        cfg = parse_config(_load_text(args.scenario), overrides, set(CHECKS) | {"rigidity_expectation"})
    except (ConfigError, ModelError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out or cfg.output or os.path.join("out", cfg.name)
    try:
        report = run_scenario(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, QuadratureError, ModelError, FloatingPointError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        paths = emit_outputs(report, out)
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    if not args.quiet:
        width = max(len(c["name"]) for c in report.checks) if report.checks else 0
        for c in report.checks:
            status = "PASS" if c["pass"] else "FAIL"
            m = c["min_slack"]
            m = "nan" if m is None else f"{m:.3e}"
            print(f"{status}  {c['name']:<{width}}  min_slack={m}")
        kind = report.rigidity["conical"]["kind"]
        print(f"rigidity: {kind}")
        print(f"{'PASS' if report.passed else 'FAIL'}  scenario {report.scenario}"
              f" ({report.wall_clock:.2f} s) -> {', '.join(paths)}")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_list_scenarios(args):
    for name in SCENARIOS:
        print(f"{name:<18} {builtin_config(name)['description']}")
    return EXIT_OK


def cmd_list_checks(args):
    for name, (stage, desc, _, _) in CHECKS.items():
        print(f"{name:<30} [{stage}] {desc}")
    print(f"{'rigidity_expectation':<30} [rigidity] conical verdict matches expect_rigidity")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="radialcomp",
                                description="Run radial comparison scenarios.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write series.csv / report.json")
    run.add_argument("--scenario", required=True,
                     help="built-in name, path to a JSON document, or inline JSON")
    run.add_argument("--out", help="output directory (default out/<name>)")
    run.add_argument("--r-min", type=float, dest="r_min")
    run.add_argument("--r-max", type=float, dest="r_max")
    run.add_argument("--steps", type=int)
    run.add_argument("--set", action="append", metavar="KEY=VALUE",
                     help="dotted-path override, e.g. bounds.c=0.5 (repeatable)")
    run.add_argument("-q", "--quiet", action="store_true")
    run.set_defaults(func=cmd_run)

    ls = sub.add_parser("list-scenarios", help="list built-in scenarios")
    ls.set_defaults(func=cmd_list_scenarios)
    lc = sub.add_parser("list-checks", help="list registered checks")
    lc.set_defaults(func=cmd_list_checks)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors, which already matches the config code
        return int(exc.code or 0)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
