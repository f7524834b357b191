import json
import subprocess
import sys

import pytest

from esisav.cli import EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main

GRID = {"nx": 16, "ny": 16, "lx": "2pi", "ly": "2pi"}


def write(tmp_path, name="run.json", **cfg):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


@pytest.fixture(autouse=True)
def in_tmp(tmp_path, monkeypatch):
    # relative output paths resolve against the working directory
    monkeypatch.chdir(tmp_path)


@pytest.fixture
def ac(tmp_path):
    return write(tmp_path, model={"name": "allen_cahn", "epsilon": 0.1}, grid=GRID, dt=0.1, t_end=1.0,
                 ic="ac_cos", outputs={"series": "series.csv", "snapshots": "snaps", "snapshot_times": [1.0]},
                 dts=[0.2, 0.1, 0.05], reference_dt=0.01, schemes=["first_order", "sav"],
                 check={"monotone": True})


def test_evolve_writes_outputs(ac, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["evolve", "--config", ac, "--out", str(out)]) == EXIT_OK
    assert (out / "series.csv").exists()
    assert (out / "snaps" / "allen_cahn_first_order_t1.bin").exists()
    assert (out / "snaps" / "allen_cahn_first_order_t1.json").exists()
    assert json.loads((out / "report.json").read_text())["kind"] == "evolve"
    assert "energy_increases" in capsys.readouterr().out


def test_overrides(ac, tmp_path):
    out = tmp_path / "o"
    assert main(["evolve", "--config", ac, "--out", str(out), "--dt", "1/20", "--scheme", "bdf2",
                 "--seed", "4", "--t-end", "0.5"]) == EXIT_OK
    lines = (out / "series.csv").read_text().splitlines()
    assert len(lines) == 1 + 10
    assert not list(out.glob("**/*.bin"))


def test_converge_and_compare(ac, capsys):
    assert main(["converge", "--config", ac]) == EXIT_OK
    assert "first_order" in capsys.readouterr().out
    assert main(["compare", "--config", ac]) == EXIT_OK
    text = capsys.readouterr().out
    assert "sav" in text and "first_order" in text
    assert main(["compare", "--config", ac, "--scheme", "semi"]) == EXIT_OK
    assert "first_order" not in capsys.readouterr().out


def test_check_pass_and_fail(ac, tmp_path, capsys):
    assert main(["evolve", "--config", ac, "--check"]) == EXIT_OK
    assert "PASS monotone" in capsys.readouterr().out
    strict = write(tmp_path, "strict.json", model={"name": "allen_cahn", "epsilon": 0.1}, grid=GRID, dt=0.1,
                   t_end=1.0, dts=[0.2, 0.1], reference_dt=0.01, check={"rate_min": 5.0})
    assert main(["converge", "--config", strict, "--check"]) == EXIT_CHECK
    assert "FAIL rate_min" in capsys.readouterr().out


def test_check_without_thresholds(tmp_path):
    p = write(tmp_path, model={"name": "allen_cahn"}, grid=GRID, dt=0.1, t_end=1.0)
    assert main(["evolve", "--config", p, "--check"]) == EXIT_CONFIG


@pytest.mark.parametrize("cfg", [
    {"model": {"name": "allen_cahn"}, "grid": GRID, "dt": 0.3, "t_end": 1.0},
    {"model": {"name": "allen_cahn"}, "grid": GRID, "bogus": 1},
    {"model": {"name": "allen_cahn"}, "grid": {"nx": 5, "ny": 16, "lx": 1, "ly": 1}},
    {"model": {"name": "allen_cahn"}, "grid": GRID, "ic": "nope"},
])
def test_config_errors(tmp_path, cfg, capsys):
    assert main(["evolve", "--config", write(tmp_path, **cfg)]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_missing_config(tmp_path):
    assert main(["evolve", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG


def test_numerical_failure(tmp_path, capsys):
    # the theta-relaxed baseline diverges on this under-resolved large-step run
    p = write(tmp_path, model={"name": "cahn_hilliard", "epsilon": 0.1, "beta": 0.5}, scheme="new_sav",
              grid={"nx": 8, "ny": 8, "lx": "2pi", "ly": "2pi"}, dt=0.5, t_end=20, ic="ch_random", seed=3,
              outputs={"series": "s.csv"})
    assert main(["evolve", "--config", p, "--out", str(tmp_path)]) == EXIT_NUMERICAL
    assert "numerical failure" in capsys.readouterr().err
    # rows written before the failure are kept
    assert len((tmp_path / "s.csv").read_text().splitlines()) > 1


def test_ns_check(tmp_path, capsys):
    p = write(tmp_path, model={"name": "navier_stokes", "nu": 0.1}, grid=GRID, dt=0.05, t_end=0.5,
              ic="taylor_green", dts=[0.1, 0.05, 0.025],
              check={"rate_min": 0.85, "rate_max": 1.15, "monotone": True, "max_div": 1e-10})
    assert main(["ns", "--config", p, "--check"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.count("PASS") == 4


def test_module_entry_point(ac, tmp_path):
    res = subprocess.run([sys.executable, "-m", "esisav", "evolve", "--config", ac, "--t-end", "0.2"],
                         capture_output=True, text=True, cwd=tmp_path)
    assert res.returncode == 0, res.stderr
    bad = subprocess.run([sys.executable, "-m", "esisav", "frobnicate"], capture_output=True, text=True)
    assert bad.returncode == 2
