from __future__ import annotations

import json

import pytest

from steklov_lab.cli import EXIT_ERROR, EXIT_OK, main
from steklov_lab.experiments import PRESET_NAMES, preset


def test_preset_list(capsys):
    assert main(["preset", "--list"]) == EXIT_OK
    assert capsys.readouterr().out.split() == list(PRESET_NAMES)


def test_preset_run_writes_outputs(tmp_path, capsys):
    code = main(["preset", "dim3_contrast", "--epsilon-grid", "0.3", "0.15", "--out", str(tmp_path)])
    assert code == EXIT_OK
    for suffix in (".csv", ".svg", ".certificates.json"):
        assert (tmp_path / f"dim3_contrast{suffix}").stat().st_size > 0
    assert "ok" in capsys.readouterr().out


def test_run_and_sweep_from_config(tmp_path, monkeypatch):
    # outputs not named in the config land in the cwd
    monkeypatch.chdir(tmp_path)
    cfg = preset("dim2_contrast", [0.4, 0.2]).to_dict()
    cfg["output"] = {"csv": str(tmp_path / "custom" / "table.csv")}
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(cfg))
    assert main(["sweep", str(path)]) == EXIT_OK
    lines = (tmp_path / "custom" / "table.csv").read_text().splitlines()
    assert len(lines) == 3
    assert (tmp_path / "dim2_contrast.svg").exists()
    assert main(["run", str(path), "--epsilon", "0.2", "--out", str(tmp_path / "single")]) == EXIT_OK
    single = (tmp_path / "single" / "dim2_contrast.csv").read_text().splitlines()
    assert len(single) == 2 and single[1].startswith("2.000000000000e-01")


def test_oracle(tmp_path, capsys):
    assert main(["oracle", "berger", "--kmax", "1"]) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "k,m,multiplicity,mu1" and len(out) == 4
    assert main(["oracle", "berger", "--kmax", "2", "--out", str(tmp_path / "o.csv")]) == EXIT_OK
    assert len((tmp_path / "o.csv").read_text().splitlines()) == 7


@pytest.mark.parametrize(
    "argv",
    [
        ["oracle", "berger", "--kmax", "9"],
        ["preset"],
        ["run", "does-not-exist.json"],
    ],
)
def test_errors_exit_two(argv, capsys):
    assert main(argv) == EXIT_ERROR
    assert "steklov-lab:" in capsys.readouterr().err


def test_bad_config_exits_two(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"name": "x", "epsilons": [0.1, 0.2]}))
    assert main(["sweep", str(path)]) == EXIT_ERROR


def test_validate_subset(capsys):
    assert main(["validate", "2", "4"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "[PASS]  2" in out and "2/2 criteria passed" in out
