import csv
import json
import math

import numpy as np
import pytest

TWO_PI = 2.0 * math.pi

TAGS = ("z20_p0", "z20_pm2", "z40_pm2")


def write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)


def synth_record(path, n=50, seed=0):
    rng = np.random.default_rng(seed)
    t = TWO_PI * np.arange(n)
    write_csv(path, ("t", "mean_z", "mean_p", "var_z", "var_p", "norm"),
              zip(t, 20 + rng.normal(0, 1, n), rng.normal(0, 2, n),
                  10 + 0.5 * t, 1 + 0.2 * t, np.ones(n)))


def synth_distribution(path, kind="exp", n=80):
    x = np.linspace(0.5, 80.0, n)
    if kind == "exp":
        d = np.exp(-x / 10.0) / 10.0
    else:
        x = np.linspace(-20.0, 20.0, n)
        d = np.exp(-(x**2) / 18.0) / math.sqrt(18.0 * math.pi)
    write_csv(path, ("coord", "density"), zip(x, d))


@pytest.fixture
def dataset(tmp_path):
    """A directory with schema-valid synthetic inputs for every preset."""
    d = tmp_path / "data"
    d.mkdir()
    # Lyapunov presets.
    for k, tag in enumerate(TAGS):
        periods = np.arange(1, 101)
        write_csv(d / f"convergence_{tag}.csv", ("period", "L_t"),
                  zip(periods, 0.1 / periods + 0.01 * k))
        th = np.linspace(0, TWO_PI, 200)
        write_csv(d / f"poincare_{tag}.csv", ("k", "z", "p"),
                  zip(range(200), 20 + 5 * np.cos(th), 5 * np.sin(th)))
    write_csv(d / "lyapunov.csv", ("z0", "p0", "lambda", "L"),
              [(20, 0, 0.5, 0.08), (20, -2, 0.5, 0.1), (40, -2, 0.5, 4e-4)])
    # Matched records and envelopes.
    synth_record(d / "classical_record.csv", seed=1)
    synth_record(d / "quantum_record.csv", seed=2)
    t = TWO_PI * np.arange(50)
    for label in ("classical", "quantum"):
        for obs in ("mean_p", "mean_z"):
            write_csv(d / f"{label}_envelope_{obs}.csv",
                      ("t", "upper", "lower"),
                      zip(t, 2 + 0.1 * t, -2 - 0.1 * t))
    # Distributions and fits.
    synth_distribution(d / "classical_position_dist.csv", "exp")
    synth_distribution(d / "classical_momentum_dist.csv", "gauss")
    synth_distribution(d / "quantum_position_dist.csv", "exp")
    synth_distribution(d / "quantum_momentum_dist.csv", "gauss")
    fits = {
        "classical_position_exponential": {
            "model": "exponential", "r_squared": 0.99,
            "fit_range": [40.0, 80.0],
            "params": {"slope": -0.1, "intercept": -2.3, "eta": 10.0},
            "fallback_single": False,
        },
        "classical_momentum_gaussian": {
            "model": "gaussian", "r_squared": 0.99,
            "fit_range": [-20.0, 20.0],
            "params": {"slope": -1 / 18.0, "intercept": -2.0, "mean": 0.0,
                       "eta": 9.0},
            "fallback_single": False,
        },
        "quantum_position_two_exponential": {
            "model": "two_exponential", "r_squared": 0.95,
            "fit_range": [0.5, 80.0],
            "params": {"slope_left": -0.3, "slope_right": -0.05,
                       "slope_steep": -0.3, "slope_flat": -0.05,
                       "intercept_left": -2.0, "intercept_right": -7.0,
                       "breakpoint": 20.0},
            "fallback_single": False,
        },
    }
    (d / "fits.json").write_text(json.dumps(fits))
    # Sweep.
    lam = np.round(np.arange(0.1, 1.5, 0.1), 1)
    classes = ["below_window" if l <= 0.24 else
               "in_window" if l <= 1.0 else "above_window" for l in lam]
    write_csv(d / "sweep.csv",
              ("lambda", "classical_varp", "quantum_varp", "window_class",
               "fit_verdict", "fit_r2",
               "classical_varp_trail10", "quantum_varp_trail10"),
              [(l, 10 + 40 * l, 10 + 15 * l, c, "exponential", 0.9,
                10 + 40 * l, 10 + 15 * l) for l, c in zip(lam, classes)])
    return d
