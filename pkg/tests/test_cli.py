import csv
import json
import math

import numpy as np
import pytest

from fermibounce.cli import main
from fermibounce.diagnostics import TimeSeriesRecord

TWO_PI = 2.0 * math.pi

CONVERT_CFG = {
    "mass_kg": 2.21e-25,
    "gravity_m_s2": 9.81,
    "hbar_Js": 6.673e-34 / TWO_PI,
    "drive_omega_rad_s": TWO_PI * 1477.0,
    "decay_k_inv_m": 1.0 / 0.455e-6,
    "rabi_eff_rad_s": TWO_PI * 88.8e3,
}


def write_json(path, payload):
    path.write_text(json.dumps(payload))
    return str(path)


class TestConvert:
    def test_emits_dimensionless_set(self, tmp_path, capsys):
        cfg = write_json(tmp_path / "phys.json", CONVERT_CFG)
        assert main(["convert", "--config", cfg]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["kbar"] == pytest.approx(4.0, rel=0.01)
        assert out["kappa"] == pytest.approx(0.5, rel=0.01)
        assert out["v0"] == pytest.approx(60.0, rel=0.01)
        assert out["lambda_u"] == pytest.approx(1.0, rel=0.01)

    def test_out_dir_writes_file(self, tmp_path):
        cfg = write_json(tmp_path / "phys.json", CONVERT_CFG)
        assert main(["convert", "--config", cfg,
                     "--out-dir", str(tmp_path / "out")]) == 0
        assert (tmp_path / "out" / "convert.json").exists()

    def test_missing_config_is_config_error(self):
        assert main(["convert"]) == 2

    def test_malformed_json_is_config_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{nope")
        assert main(["convert", "--config", str(bad)]) == 2

    def test_unknown_fields_is_config_error(self, tmp_path):
        cfg = write_json(tmp_path / "phys.json", {"omega": 1.0})
        assert main(["convert", "--config", cfg]) == 2


class TestClassical:
    def test_writes_record(self, tmp_path):
        cfg = write_json(tmp_path / "run.json", {
            "lambda": 0.5, "t_final": 5 * TWO_PI, "n": 30,
            "steps_per_period": 500,
        })
        out = tmp_path / "out"
        assert main(["classical", "--config", cfg, "--out-dir", str(out),
                     "--seed", "7"]) == 0
        rec = TimeSeriesRecord.read_csv(out / "classical_record.csv")
        assert len(rec) == 6
        assert rec.times[-1] == pytest.approx(5 * TWO_PI)

    def test_requires_out_dir(self, tmp_path):
        cfg = write_json(tmp_path / "run.json",
                         {"lambda": 0.5, "t_final": TWO_PI})
        assert main(["classical", "--config", cfg]) == 2


class TestQuantum:
    def test_writes_record_and_distributions(self, tmp_path):
        cfg = write_json(tmp_path / "run.json", {
            "lambda": 0.5, "t_final": 2 * TWO_PI, "profile": "ci",
        })
        out = tmp_path / "out"
        ckpt = tmp_path / "psi.fbqc"
        assert main(["quantum", "--config", cfg, "--out-dir", str(out),
                     "--checkpoint", str(ckpt)]) == 0
        for name in ("quantum_record.csv", "quantum_position_dist.csv",
                     "quantum_momentum_dist.csv"):
            assert (out / name).exists()
        assert ckpt.exists()


class TestLyapunov:
    def test_writes_table(self, tmp_path):
        cfg = write_json(tmp_path / "ly.json", {
            "lambda": 0.5, "starts": [[20, 0], [40, -2]],
            "n_periods": 20, "steps_per_period": 500,
        })
        out = tmp_path / "out"
        assert main(["lyapunov", "--config", cfg, "--out-dir", str(out),
                     "--convergence"]) == 0
        with open(out / "lyapunov.csv") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["z0", "p0", "lambda", "L"]
        assert len(rows) == 3
        assert (out / "convergence_z20_p0.csv").exists()
        assert (out / "convergence_z40_pm2.csv").exists()

    def test_blowup_is_numerical_error(self, tmp_path):
        cfg = write_json(tmp_path / "ly.json", {
            "lambda": 0.5, "v0": 1e300, "starts": [[-2000, 0]],
            "n_periods": 5, "steps_per_period": 500,
        })
        assert main(["lyapunov", "--config", cfg,
                     "--out-dir", str(tmp_path / "out")]) == 3


class TestMapAndPoincare:
    def test_map_summary(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["map", "--K", "10", "--orbits", "500", "--steps", "100",
                     "--seed", "1", "--out-dir", str(out)]) == 0
        summary = json.loads((out / "map_summary.json").read_text())
        assert summary["D_quasilinear"] == 50.0
        assert summary["D_measured"] > 10.0
        assert (out / "map_msd.csv").exists()

    def test_map_k_from_lambda(self, tmp_path):
        out = tmp_path / "out"
        assert main(["map", "--lambda", "0.5", "--orbits", "500",
                     "--steps", "100", "--seed", "1",
                     "--out-dir", str(out)]) == 0
        summary = json.loads((out / "map_summary.json").read_text())
        assert summary["K"] == 2.0

    def test_poincare_rows(self, tmp_path):
        out = tmp_path / "out"
        assert main(["poincare", "--z0", "20", "--p0", "0", "--periods", "10",
                     "--lambda", "0.3", "--out-dir", str(out)]) == 0
        with open(out / "poincare.csv") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["k", "z", "p"]
        assert len(rows) == 12


class TestAnalyze:
    def test_record_and_distribution(self, tmp_path, capsys):
        n = 40
        t = TWO_PI * np.arange(n)
        rec = TimeSeriesRecord(times=t, mean_z=np.zeros(n),
                               mean_p=np.zeros(n), var_z=np.ones(n),
                               var_p=1.0 + 2.0 * t, norm=np.ones(n))
        rec_path = tmp_path / "rec.csv"
        rec.write_csv(rec_path)

        centers = np.linspace(0.25, 29.75, 60)
        density = np.exp(-centers / 5.0) / 5.0
        dist_path = tmp_path / "dist.csv"
        with open(dist_path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(("coord", "density"))
            w.writerows(zip(centers, density))

        assert main(["analyze", "--record", str(rec_path),
                     "--distribution", str(dist_path),
                     "--fit", "exponential", "--transient", "5"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["record"]["D"] == pytest.approx(2.0, rel=1e-9)
        slope = out["distribution"]["exponential"]["params"]["slope"]
        assert slope == pytest.approx(-0.2, rel=1e-6)

    def test_needs_an_input(self):
        assert main(["analyze"]) == 2


class TestSweep:
    def test_tiny_sweep(self, tmp_path):
        out = tmp_path / "out"
        assert main(["sweep", "--lambdas", "0.3", "--profile", "ci",
                     "--t-final", "40", "--n", "30",
                     "--out-dir", str(out)]) == 0
        with open(out / "sweep.csv") as f:
            rows = list(csv.reader(f))
        assert len(rows) == 2
        assert rows[1][0] == "0.3"
