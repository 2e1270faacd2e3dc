import csv
import json
import math

import pytest

from fermibounce.errors import ConfigError
from fermibounce.experiments import (CANONICAL, DEFAULT_SEED, ExperimentConfig,
                                     LYAPUNOV_STARTS, PACKET, SWEEP_LAMBDAS,
                                     _PRESET_TABLE, preset, quantum_grid,
                                     run_experiment, run_sweep)
from fermibounce.classical import IntegratorConfig
from fermibounce.scaling import DimensionlessParams

TWO_PI = 2.0 * math.pi


def tiny_config(tmp_path, name="fig2", lam=0.5, n=30, t_final=5 * TWO_PI):
    d = DimensionlessParams(v0=60.0, kappa=0.5, lambda_mod=lam, kbar=4.0)
    return ExperimentConfig(
        name=name, lambda_mod=lam, dimensionless=d,
        integrator=IntegratorConfig(dt=TWO_PI / 500),
        grid=quantum_grid(lam, 4.0, "ci"),
        ensemble_n=n, seed=DEFAULT_SEED, t_final=t_final,
        out_dir=str(tmp_path), profile="ci",
    )


class TestPresets:
    def test_canonical_parameters(self):
        assert CANONICAL == dict(v0=60.0, kappa=0.5, kbar=4.0)
        assert PACKET == dict(center_z=20.0, center_p=0.0, dz=2.0)
        assert LYAPUNOV_STARTS == ((20.0, 0.0), (20.0, -2.0), (40.0, -2.0))

    def test_preset_table_frozen(self):
        assert _PRESET_TABLE == {
            "fig1a": (0.2, 0, 10_000 * TWO_PI),
            "fig1b": (0.5, 0, 10_000 * TWO_PI),
            "fig2": (0.5, 2000, 2650.0),
            "fig3": (0.5, 2000, 2650.0),
            "fig4": (0.8, 10_000, 2650.0),
            "fig5": (None, 2000, 3200.0),
        }

    def test_sweep_lambdas(self):
        assert SWEEP_LAMBDAS[0] == 0.05
        assert SWEEP_LAMBDAS[-1] == 1.4
        assert len(SWEEP_LAMBDAS) == 28

    def test_preset_resolution(self, tmp_path):
        cfg = preset("fig2", str(tmp_path))
        assert cfg.lambda_mod == 0.5
        assert cfg.ensemble_n == 2000
        assert cfg.t_final == 2650.0
        assert cfg.dimensionless.v0 == 60.0
        assert cfg.spec.lambda_mod == 0.5

    def test_ci_profile_shrinks_fig5(self, tmp_path):
        cfg = preset("fig5", str(tmp_path), profile="ci")
        assert cfg.t_final == 800.0

    def test_unknown_preset(self, tmp_path):
        with pytest.raises(ConfigError):
            preset("fig9", str(tmp_path))


class TestQuantumGrid:
    def test_default_profile(self):
        g = quantum_grid(0.5, 4.0)
        assert g.n_points == 2**14
        assert g.z_max == 800.0

    def test_delocalized_needs_bigger_box(self):
        g = quantum_grid(1.2, 4.0)
        assert g.z_max == 3000.0
        assert g.n_points == 2**16

    def test_ci_profiles(self):
        g = quantum_grid(0.5, 4.0, "ci")
        assert g.n_points == 2**12
        assert g.steps_per_period == 500
        g = quantum_grid(1.2, 4.0, "ci")
        assert g.z_max == 3000.0
        assert g.n_points == 2**14


class TestRunExperiment:
    def test_matched_preset_outputs(self, tmp_path):
        cfg = tiny_config(tmp_path)
        manifest = run_experiment(cfg)
        assert (tmp_path / "classical_record.csv").exists()
        assert (tmp_path / "quantum_record.csv").exists()
        data = json.loads((tmp_path / "manifest.json").read_text())
        assert data["name"] == "fig2"
        assert data["seed"] == DEFAULT_SEED
        assert data["config"]["lambda"] == 0.5
        assert sorted(data["outputs"]) == sorted(
            ["classical_record.csv", "quantum_record.csv"])
        assert manifest.wall_time_s > 0

    def test_envelope_preset_outputs(self, tmp_path):
        cfg = tiny_config(tmp_path, name="fig3")
        run_experiment(cfg)
        for label in ("classical", "quantum"):
            for obs in ("mean_p", "mean_z"):
                path = tmp_path / f"{label}_envelope_{obs}.csv"
                with open(path) as f:
                    header = next(csv.reader(f))
                assert header == ["t", "upper", "lower"]

    def test_deterministic_reruns_bit_identical(self, tmp_path):
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        for out in (out_a, out_b):
            out.mkdir()
            run_experiment(tiny_config(out))
        for name in ("classical_record.csv", "quantum_record.csv"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_failed_run_removes_partial_outputs(self, tmp_path, monkeypatch):
        import fermibounce.experiments as exp

        def boom(cfg):
            raise RuntimeError("forced")

        monkeypatch.setattr(exp, "_quantum_run", boom)
        with pytest.raises(RuntimeError):
            run_experiment(tiny_config(tmp_path))
        assert not (tmp_path / "classical_record.csv").exists()
        assert not (tmp_path / "manifest.json").exists()


class TestRunSweep:
    def test_schema_and_rows(self, tmp_path):
        base = tiny_config(tmp_path, name="fig5")
        out = tmp_path / "sweep.csv"
        run_sweep([0.3], base, out)
        with open(out) as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["lambda", "classical_varp", "quantum_varp",
                           "window_class", "fit_verdict", "fit_r2",
                           "classical_varp_trail10", "quantum_varp_trail10"]
        assert len(rows) == 2
        assert float(rows[1][1]) > 0

    def test_per_lambda_failure_recorded(self, tmp_path, monkeypatch):
        import fermibounce.experiments as exp

        real = exp._quantum_run

        def flaky(cfg):
            if cfg.lambda_mod == 0.4:
                raise RuntimeError("forced")
            return real(cfg)

        monkeypatch.setattr(exp, "_quantum_run", flaky)
        base = tiny_config(tmp_path, name="fig5")
        out = tmp_path / "sweep.csv"
        run_sweep([0.3, 0.4], base, out)
        with open(out) as f:
            rows = list(csv.reader(f))
        assert len(rows) == 3
        assert rows[2][4] == "error:RuntimeError"
        assert rows[2][1] == "nan"
        # The failing row does not poison its neighbours.
        assert float(rows[1][1]) > 0

    def test_rejects_negative_lambda(self, tmp_path):
        base = tiny_config(tmp_path, name="fig5")
        with pytest.raises(ConfigError):
            run_sweep([-0.1], base, tmp_path / "sweep.csv")
