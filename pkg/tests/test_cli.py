import json

import pytest
from click.testing import CliRunner

from grushin_riesz.cli import main
from grushin_riesz.grid import load_grid


@pytest.fixture
def runner():
    return CliRunner()


def test_unknown_suite_exits_2(runner):
    result = runner.invoke(main, ["verify", "nonsense"])
    assert result.exit_code == 2
    assert "unknown suite" in result.output


def test_hermite_suite_passes_and_writes_report(runner, tmp_path):
    report = tmp_path / "r.json"
    result = runner.invoke(main, ["verify", "hermite", "--report", str(report)])
    assert result.exit_code == 0
    doc = json.loads(report.read_text())
    gram = next(c for c in doc["checks"] if c["name"] == "gram_max_deviation")
    assert gram["passed"] and gram["measured"] < 1e-10
    assert doc["version"]


def test_undersampled_representation_exits_1(runner, tmp_path):
    report = tmp_path / "r.json"
    result = runner.invoke(main, ["verify", "representation", "--samples", "10", "--report", str(report)])
    assert result.exit_code == 1
    doc = json.loads(report.read_text())
    assert doc["config"]["samples"] == 10
    assert not doc["passed"]


def test_bad_config_file_exits_2(runner, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("no equals sign\n")
    result = runner.invoke(main, ["verify", "hermite", "--config", str(cfg)])
    assert result.exit_code == 2


def test_sweep_minimal_and_deterministic(runner, tmp_path):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text("dims = 1\nexponents = 2\ntrials = 1\nseed = 0\n")
    outs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        result = runner.invoke(main, ["sweep", "--config", str(cfg), "--out", str(out)])
        assert result.exit_code == 0, result.output
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    lines = outs[0].decode().splitlines()
    assert lines[0] == "n,p,epsilon,estimate,stderr,seed,trial_id,grid_hash"
    assert len(lines) == 2
    assert abs(float(lines[1].split(",")[3]) - 2**0.5) < 0.01
    sidecar = json.loads((tmp_path / "a.json").read_text())
    assert sidecar["config"]["trials"] == 1 and sidecar["version"]


def test_sweep_flag_overrides_config(runner, tmp_path):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text("dims = 1\nexponents = 2\ntrials = 5\n")
    out = tmp_path / "s.csv"
    result = runner.invoke(main, ["sweep", "--config", str(cfg), "--trials", "1", "--out", str(out)])
    assert result.exit_code == 0
    assert json.loads(out.with_suffix(".json").read_text())["config"]["trials"] == 1


def test_sweep_unwritable_output_exits_2(runner, tmp_path):
    result = runner.invoke(main, ["sweep", "--out", str(tmp_path / "missing" / "x.csv")])
    assert result.exit_code == 2


def test_field_and_apply(runner, tmp_path):
    src, dst = tmp_path / "f.grid", tmp_path / "g.grid"
    assert runner.invoke(main, ["field", "--n", "1", "--seed", "2", "--out", str(src)]).exit_code == 0
    result = runner.invoke(main, ["apply", "--transform", "riesz-star", "--j", "0", "--epsilon", "0.5",
                                  "--in", str(src), "--out", str(dst)])
    assert result.exit_code == 0, result.output
    g = load_grid(dst)
    assert g.meta["config"]["transform"] == "riesz-star"
    assert g.meta["version"]


def test_apply_missing_input_exits_2(runner, tmp_path):
    result = runner.invoke(main, ["apply", "--transform", "riesz", "--in", str(tmp_path / "nope"),
                                  "--out", str(tmp_path / "o")])
    assert result.exit_code == 2


def test_kernel_eval(runner):
    result = runner.invoke(main, ["kernel", "--eval", "p", "--at", "0,0,0"])
    assert result.exit_code == 0
    assert json.loads(result.output)["value"] > 0
    result = runner.invoke(main, ["kernel", "--eval", "grad", "--at", "0.3,0.2,0.1"])
    assert set(json.loads(result.output)) >= {"d_dx", "d_dy", "d_dt", "Z", "Z_star"}
    assert runner.invoke(main, ["kernel", "--eval", "q", "--at", "1,2"]).exit_code == 2
