import csv
import json
import os
import subprocess
import sys

import pytest

from radialcomp.cli import main
from radialcomp.config import (DEFAULT_TOLERANCES, SCENARIOS, ConfigError, apply_override,
                               builtin_config, parse_config)
from radialcomp.runner import CHECKS, CSV_COLUMNS, emit_outputs, run_scenario

FAST = ["--steps", "60"]


def run(tmp_path, *args):
    out = tmp_path / "out"
    code = main(["run", "--out", str(out), "-q", *args])
    return code, out


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def test_parse_builtin_defaults():
    cfg = parse_config("euclidean")
    assert cfg.name == "euclidean" and cfg.model.n == 3
    assert cfg.grid == {"r_min": 0.1, "r_max": 10.0, "steps": 1000, "theta_samples": 1,
                        "psi_samples": 32, "spacing": "linear"}
    assert cfg.tolerances == DEFAULT_TOLERANCES
    assert cfg.bounds == {"a": 0.0, "c": 0.0}
    assert cfg.expect_rigidity == "conical_rigid"


def test_parse_builtin_with_params():
    cfg = parse_config('{"builtin": "cone", "params": {"K": 2}}')
    assert cfg.model.warp["kind"] == "power" and cfg.model.warp["params"]["K"] == 2.0
    assert cfg.comparison == 2.0 and cfg.density_bounds is None
    cfg = parse_config({"builtin": "cone", "params": {"K": 1}})
    assert cfg.expect_rigidity == "conical_rigid"


def test_parse_full_document_and_overrides():
    doc = builtin_config("bounded_density")
    doc["grid"]["steps"] = 50
    cfg = parse_config(json.dumps(doc), ["bounds.c=0.5", "tolerances.inequality=1e-8"])
    assert cfg.bounds == {"a": -1.0, "c": 0.5}
    assert cfg.tolerances["inequality"] == 1e-8
    assert cfg.grid["steps"] == 50
    assert apply_override({"a": {"b": 1}}, "a.c=x") == {"a": {"b": 1, "c": "x"}}


@pytest.mark.parametrize("text,field", [
    ("{not json", ""),
    ('{"builtin": "nowhere"}', "builtin"),
    ('{"builtin": "cone", "params": {"k": 2}}', "params"),
    ('{"builtin": "euclidean", "colour": 1}', "colour"),
    ('{"builtin": "euclidean", "grid": {"r_min": -1}}', "grid.r_min"),
    ('{"builtin": "euclidean", "grid": {"steps": 2}}', "grid.steps"),
    ('{"builtin": "euclidean", "grid": {"stepz": 20}}', "grid.stepz"),
    ('{"builtin": "euclidean", "bounds": {"a": 0.5, "c": 0}}', "bounds.a"),
    ('{"builtin": "euclidean", "bounds": {"K_override": 1, "a": 0}}', "bounds"),
    ('{"builtin": "euclidean", "tolerances": {"ode": 0}}', "tolerances.ode"),
    ('{"builtin": "euclidean", "checks": ["mhess_bound", "bogus"]}', "checks[1]"),
    ('{"builtin": "euclidean", "expect_rigidity": "maybe"}', "expect_rigidity"),
    ('{"builtin": "sphere_warp", "grid": {"r_max": 4.0}}', "grid"),
    ('{"builtin": "euclidean", "model": {"warp": "nope"}}', "model"),
])
def test_parse_errors_name_the_field(text, field):
    with pytest.raises(ConfigError) as info:
        parse_config(text, check_names=set(CHECKS))
    assert info.value.path == field
    assert field in str(info.value)


def test_registry_covers_required_scenarios():
    assert {"euclidean", "cone", "bounded_density", "sphere_warp", "conical_rigidity"} <= set(SCENARIOS)


@pytest.mark.parametrize("name", ["euclidean", "cone", "bounded_density", "sphere_warp", "conical_rigidity"])
def test_builtin_scenarios_pass(tmp_path, name):
    code, out = run(tmp_path, "--scenario", name, *FAST)
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["pass"] is True


def test_hyperbolic_scenario_fails_comparisons(tmp_path):
    code, out = run(tmp_path, "--scenario", "hyperbolic", *FAST)
    assert code == 1
    report = json.loads((out / "report.json").read_text())
    failed = {c["name"] for c in report["checks"] if not c["pass"]}
    assert {"hessian_comparison", "laplacian_comparison"} <= failed


def test_exit_codes(tmp_path, capsys):
    assert run(tmp_path, "--scenario", "bogus_name")[0] == 2
    assert run(tmp_path, "--scenario", "euclidean", "--set", "grid.steps=1")[0] == 2
    assert run(tmp_path, "--scenario", "euclidean", *FAST, "--set", 'checks=["conformal_mhess_bound"]')[0] == 0
    # an inapplicable check that was asked for by name is a configuration problem
    assert run(tmp_path, "--scenario", "cone", "--set", 'checks=["kwy_radial"]')[0] == 2
    assert main(["run"]) == 2
    assert main(["frobnicate"]) == 2
    blocked = tmp_path / "file"
    blocked.write_text("x")
    assert main(["run", "--scenario", "euclidean", "--steps", "20", "-q", "--out", str(blocked)]) == 3
    capsys.readouterr()


def test_runtime_error_exit_code(tmp_path):
    # no fixed RK4 step meets an ODE tolerance this tight
    code, _ = run(tmp_path, "--scenario", "bounded_density", *FAST, "--set", "tolerances.ode=1e-14")
    assert code == 3


def test_cone_with_small_K_fails_mhess(tmp_path):
    code, out = run(tmp_path, "--scenario", '{"builtin": "cone", "params": {"K": 0.5}}', *FAST)
    assert code == 1
    report = json.loads((out / "report.json").read_text())
    assert [c["name"] for c in report["checks"] if not c["pass"]] == ["mhess_bound"]


def test_csv_schema_and_cone_row(tmp_path):
    code, out = run(tmp_path, "--scenario", "cone", "--r-min", "0.5", "--r-max", "2.0", "--steps", "4")
    assert code == 0
    rows = read_csv(out / "series.csv")
    assert rows[0] == CSV_COLUMNS
    assert all(len(r) == len(CSV_COLUMNS) for r in rows)
    r05 = next(dict(zip(rows[0], r)) for r in rows[1:] if float(r[0]) == 0.5)
    assert float(r05["S_tan"]) == 4.0
    assert float(r05["A"]) == 0.0625
    vols = read_csv(out / "volumes.csv")
    assert vols[0] == ["R", "vol", "wvol", "fit_residual"]
    report = json.loads((out / "report.json").read_text())
    # [0.5, 2] spans less than a decade, so no growth fit is attempted
    assert report["volumes"]["max_abs_fit_residual"] is None


def test_two_dimensional_rows_cover_theta(tmp_path):
    code, out = run(tmp_path, "--scenario", "conical_rigidity", "--steps", "10",
                    "--set", "grid.theta_samples=4")
    assert code == 0
    rows = read_csv(out / "series.csv")[1:]
    assert len(rows) == 40
    assert len({r[1] for r in rows}) == 4


def test_report_round_trip_and_shape(tmp_path):
    code, out = run(tmp_path, "--scenario", "bounded_density", *FAST)
    text = (out / "report.json").read_text()
    report = json.loads(text)
    assert json.dumps(report, indent=2, sort_keys=True) + "\n" == text
    assert {"scenario", "pass", "checks", "rigidity", "volumes", "config_echo"} <= set(report)
    for c in report["checks"]:
        assert {"name", "pass", "min_slack", "argmin", "hypothesis_status"} <= set(c)
        assert set(c["argmin"]) == {"r", "theta"}
    assert report["hypothesis_status"]["sec_nonneg"] is False
    assert report["pass"] == all(c["pass"] for c in report["checks"])
    again = parse_config(report["config_echo"])
    assert again.to_dict() == report["config_echo"]


@pytest.mark.parametrize("name", ["bounded_density", "conical_rigidity"])
def test_determinism(tmp_path, name):
    cfg = parse_config(name, ["grid.steps=40"])
    a, b = tmp_path / "a", tmp_path / "b"
    emit_outputs(run_scenario(cfg), str(a))
    emit_outputs(run_scenario(cfg), str(b))
    for name in ("series.csv", "volumes.csv"):
        if (a / name).exists():
            assert (a / name).read_bytes() == (b / name).read_bytes()
    ja, jb = (json.loads((d / "report.json").read_text()) for d in (a, b))
    ja.pop("timestamp"), jb.pop("timestamp")
    assert ja == jb
    assert (a / "series.csv").read_bytes() == (b / "series.csv").read_bytes()


def test_outputs_overwrite(tmp_path):
    cfg = parse_config("euclidean", ["grid.steps=20"])
    first = emit_outputs(run_scenario(cfg), str(tmp_path))
    second = emit_outputs(run_scenario(cfg), str(tmp_path))
    assert first == second
    assert len(read_csv(tmp_path / "series.csv")) == 21


def test_listing_commands(capsys):
    assert main(["list-scenarios"]) == 0
    listed = capsys.readouterr().out
    assert all(name in listed for name in SCENARIOS)
    assert main(["list-checks"]) == 0
    listed = capsys.readouterr().out
    assert all(name in listed for name in CHECKS)


def test_module_entry_point(tmp_path):
    env = dict(os.environ)
    proc = subprocess.run([sys.executable, "-m", "radialcomp", "run", "--scenario", "euclidean",
                           "--steps", "20", "--out", str(tmp_path)], capture_output=True, text=True,
                          env=env, cwd=tmp_path)
    assert proc.returncode == 0, proc.stderr
    assert "PASS  scenario euclidean" in proc.stdout
