import csv
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from screwon.cli import UsageError, main, parse_grid, parse_n_range

from .test_wkb import FROZEN_P1


def run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, out


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


class TestHelpers:
    def test_n_range(self):
        assert parse_n_range("1..3,10") == [1, 2, 3, 10]
        assert parse_n_range("5") == [5]
        assert parse_n_range([3, 1]) == [3, 1]
        with pytest.raises(UsageError):
            parse_n_range("5..1")

    def test_grid(self):
        g = parse_grid("1:100:3")
        assert np.allclose(g, [1, 10, 100])
        assert list(parse_grid("1,2,3")) == [1, 2, 3]
        for bad in ("1:2", "0:1:5", "1,2", "2:1:4"):
            with pytest.raises(UsageError):
                parse_grid(bad)


class TestCommands:
    def test_spectrum_golden(self, tmp_path):
        code, out = run(tmp_path, "spectrum", "--lambda", "1", "--k", "1", "--pz", "0.3",
                        "--l", "1", "--n", "1..5")
        assert code == 0
        rows = read_csv(out / "spectrum.csv")
        assert [int(r["n"]) for r in rows] == [1, 2, 3, 4, 5]
        assert np.allclose([float(r["E"]) for r in rows], FROZEN_P1, rtol=1e-12)
        man = json.loads((out / "manifest.json").read_text())
        assert man["command"] == "spectrum" and man["outputs"] == ["spectrum.csv"]
        assert man["model"]["lambda"] == 1.0 and man["model"]["l"] == 1
        assert "time" not in json.dumps(man)

    def test_spectrum_both(self, tmp_path):
        code, out = run(tmp_path, "spectrum", "--lambda", "1", "--l", "1", "--n", "20,30",
                        "--method", "both", "--maslov", "0.5")
        assert code == 0
        rows = read_csv(out / "spectrum.csv")
        assert {r["method"] for r in rows} == {"wkb", "radial-fd"}
        assert max(float(r["rel_diff"]) for r in rows) < 5e-3

    def test_spectrum_weak(self, tmp_path):
        code, out = run(tmp_path, "spectrum", "--lambda", "0", "--k", "2", "--n", "0..2", "--method", "weak")
        assert code == 0
        assert [float(r["E"]) for r in read_csv(out / "spectrum.csv")] == [4.0, 8.0, 12.0]

    def test_dispersion(self, tmp_path):
        code, out = run(tmp_path, "dispersion", "--lambda", "1", "--pz", "1", "--l", "1",
                        "--sweep", "k", "--grid", "0.01:10:8", "--n", "200,400")
        assert code == 0
        fits = json.loads((out / "fits.json").read_text())
        assert fits["sweep"] == "k" and fits["n"] == 400 and fits["slope_lambda"] is None
        assert 0.5 < fits["slope_k"] < 0.8
        assert len(read_csv(out / "dispersion.csv")) == 16

    def test_dispersion_fit_min(self, tmp_path):
        code, _ = run(tmp_path, "dispersion", "--sweep", "lambda", "--grid", "1:100:5",
                      "--n", "50", "--fit-min", "50")
        assert code == 2

    def test_classify(self, tmp_path, capsys):
        code, out = run(tmp_path, "classify", "y'' + (1/z)*y' + (1/z)*y = 0")
        assert code == 0
        rep = json.loads((out / "report.json").read_text())
        assert rep["ince_type"] == "[0,1,1_1]"
        assert "Ince type" in capsys.readouterr().out

    def test_classify_coeffs(self, tmp_path):
        coeffs = json.dumps({"p": {"num": ["1"], "den": ["0", "1"]}, "q": {"num": ["1"], "den": ["1"]}})
        code, out = run(tmp_path, "classify", "--coeffs", coeffs)
        assert code == 0
        assert json.loads((out / "report.json").read_text())["ince_type"] == "[0,1,1_2]"

    def test_orbit(self, tmp_path):
        code, out = run(tmp_path, "orbit", "--periods", "5", "--two-route")
        assert code == 0
        drift = json.loads((out / "drift.json").read_text())
        assert max(drift["drift"].values()) <= 1e-9
        assert drift["two_route_max_deviation"] <= 1e-8
        assert (out / "trajectory.csv").read_text().startswith("t,x,y,z,px,py,pz,H,Lz\n")

    def test_algebra(self, tmp_path):
        code, out = run(tmp_path, "algebra", "--lambda", "0.5", "--pz", "0.2", "--exact")
        assert code == 0
        rep = json.loads((out / "algebra.json").read_text())
        assert rep["exact"] is True
        assert all(r["residual"] == 0 for r in rep["relations"])
        assert rep["nilpotency"]["step3"] is True


class TestBehaviour:
    def test_deterministic(self, tmp_path):
        argv = ["dispersion", "--sweep", "lambdak", "--grid", "1,2,4,8", "--n", "100"]
        _, a = run(tmp_path, *argv, "--threads", "1", name="a")
        _, b = run(tmp_path, *argv, "--threads", "3", name="b")
        assert (a / "dispersion.csv").read_bytes() == (b / "dispersion.csv").read_bytes()
        assert (a / "fits.json").read_bytes() == (b / "fits.json").read_bytes()

    def test_thread_env_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SCREWON_THREADS", "2")
        _, out = run(tmp_path, "spectrum", "--n", "1", "--threads", "5")
        assert json.loads((out / "manifest.json").read_text())["threads"] == 2

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"lambda": 2.0, "k": 0.5, "n": "1..2"}))
        code, out = run(tmp_path, "spectrum", "--config", str(cfg), "--k", "1")
        assert code == 0
        man = json.loads((out / "manifest.json").read_text())
        assert man["model"]["lambda"] == 2.0 and man["model"]["k"] == 1.0
        assert len(read_csv(out / "spectrum.csv")) == 2
        cfg.write_text(json.dumps({"bogus": 1}))
        assert run(tmp_path, "spectrum", "--config", str(cfg))[0] == 2

    @pytest.mark.parametrize("argv", [["spectrum", "--k", "0"], ["spectrum", "--mu", "-1"],
                                      ["spectrum", "--n", "0"], ["orbit", "--state", "1,2"],
                                      ["classify", "y'' + $"], ["bogus"], ["algebra", "--lambda", "0"]])
    def test_usage_errors(self, tmp_path, argv):
        assert run(tmp_path, *argv)[0] == 2

    def test_numerical_error(self, tmp_path):
        assert run(tmp_path, "spectrum", "--n", "1" + "0" * 305)[0] == 3

    def test_json_errors(self, tmp_path, capsys):
        code, _ = run(tmp_path, "spectrum", "--k", "0", "--json-errors")
        assert code == 2
        err = json.loads(capsys.readouterr().err.strip())
        assert err["exit_code"] == 2 and err["error"] == "FreeParticleError"
        assert "free-particle" in err["message"]

    def test_console_script_module(self, tmp_path):
        res = subprocess.run([sys.executable, "-m", "screwon", "classify", "y'' + z*y = 0",
                              "--out", str(tmp_path / "m")], capture_output=True, text=True,
                             env={**os.environ, "SCREWON_NO_JIT": "1"})
        assert res.returncode == 0, res.stderr
        assert "[0,0,1_3]" in res.stdout
