"""Command-line interface behavior (fast paths only)."""

import json

import pytest
import yaml

from urllc_sched.cli import main
from urllc_sched.config import preset_text
from urllc_sched.harness import tiny_config

TINY_YAML = """\
K: 2
M: 2
N: 2
Nt: 2
Pmax: 30.0
W: 180000.0
B: [12.0, 12.0]
D: [2, 2]
eps: [1.0e-6, 1.0e-6]
delta_sq: 0.01
N0: -173.0
dist: [50.0, 100.0]
"""


@pytest.fixture()
def tiny_yaml(tmp_path):
    path = tmp_path / "tiny.yaml"
    path.write_text(TINY_YAML, encoding="utf-8")
    return str(path)


def test_presets_prints_valid_yaml(capsys):
    assert main(["presets", "table1"]) == 0
    data = yaml.safe_load(capsys.readouterr().out)
    assert data["K"] == 4
    assert capsys.readouterr().out == ""     # nothing else printed
    assert preset_text("table1")


def test_solve_config_file(tiny_yaml, tmp_path, capsys):
    out = str(tmp_path / "result.json")
    code = main(["solve", tiny_yaml, "--seed", "1", "--out", out])
    assert code == 0
    assert "Solved" in capsys.readouterr().out
    dump = json.load(open(out, encoding="utf-8"))
    assert dump["status"] == "Solved"


def test_solve_bad_config(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("K: 2\n", encoding="utf-8")
    assert main(["solve", str(bad)]) == 2
    assert "error:" in capsys.readouterr().err


def test_experiment_from_spec_file(tiny_yaml, tmp_path, capsys):
    spec = tmp_path / "spec.yaml"
    spec.write_text(
        f"experiment: fig2\nconfig: {tiny_yaml}\nn_realizations: 1\n"
        f"out_dir: {tmp_path}/res\n",
        encoding="utf-8",
    )
    assert main(["experiment", str(spec)]) == 0
    assert "fig2.csv" in capsys.readouterr().out
    # --out overrides the spec's directory
    assert main(["experiment", str(spec), "--out", str(tmp_path / "alt")]) == 0
    assert (tmp_path / "alt" / "fig2.csv").exists()


def test_experiment_bad_spec(tmp_path, capsys):
    spec = tmp_path / "spec.yaml"
    spec.write_text("experiment: bogus\n", encoding="utf-8")
    assert main(["experiment", str(spec)]) == 2
    assert "error:" in capsys.readouterr().err


def test_oracle_gap_command(tmp_path, capsys):
    out = str(tmp_path / "gap.csv")
    assert main(["oracle-gap", "--instances", "2", "--out", out]) == 0
    captured = capsys.readouterr().out
    assert "wrote" in captured
    assert open(out, encoding="utf-8").readline().startswith("instance,")
