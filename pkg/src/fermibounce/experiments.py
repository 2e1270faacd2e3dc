"""Named, reproducible experiment presets and the modulation-depth sweep.

Each preset regenerates a desk-scale analog of one of the five reference
figures with the canonical parameters V0=60, kappa=0.5, kbar=4. Outputs
are CSV files with pinned schemas plus a manifest JSON capturing the full
resolved configuration, so any output is reproducible from its manifest
alone.

CSV schemas:
    records       t,mean_z,mean_p,var_z,var_p,norm
    distributions coord,density
    sweep         lambda,classical_varp,quantum_varp,window_class,
                  fit_verdict,fit_r2,classical_varp_trail10,quantum_varp_trail10
    lyapunov      z0,p0,lambda,L
    poincare      k,z,p
"""

import csv
import json
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .classical import (Ensemble, IntegratorConfig, PhaseState,
                        poincare_section, propagate_ensemble, sample_gaussian)
from .diagnostics import (FitModel, classify_window, fit_exponential,
                          fit_gaussian, fit_two_exponential,
                          histogram_from_samples, envelope)
from .errors import ConfigError
from .lyapunov import LyapunovConfig, lyapunov_exponent
from .potential import PotentialSpec
from .quantum import (GridConfig, init_gaussian, momentum_distribution,
                      position_distribution, propagate)
from .scaling import DimensionlessParams

TWO_PI = 2.0 * math.pi

CANONICAL = dict(v0=60.0, kappa=0.5, kbar=4.0)

# Initial packet shared by every matched classical/quantum comparison:
# Gaussian at (20, 0), position width 2, momentum width kbar/(2*2).
PACKET = dict(center_z=20.0, center_p=0.0, dz=2.0)

LYAPUNOV_STARTS = ((20.0, 0.0), (20.0, -2.0), (40.0, -2.0))

SWEEP_LAMBDAS = [round(0.05 * k, 2) for k in range(1, 29)]  # 0.05 .. 1.40

DEFAULT_SEED = 20260823


@dataclass
class ExperimentConfig:
    name: str
    lambda_mod: float
    dimensionless: DimensionlessParams
    integrator: IntegratorConfig
    grid: GridConfig | None
    ensemble_n: int
    seed: int
    t_final: float
    out_dir: str
    record_every: int = 1
    profile: str = "full"
    sweep_lambdas: list = field(default_factory=list)

    @property
    def spec(self) -> PotentialSpec:
        return PotentialSpec(self.dimensionless.v0, self.dimensionless.kappa,
                             self.lambda_mod)


@dataclass
class RunManifest:
    name: str
    config: dict
    seed: int
    version: str
    wall_time_s: float
    outputs: list


def quantum_grid(lambda_mod: float, kbar: float, profile: str = "full",
                 ) -> GridConfig:
    """Grid profile for one quantum run.

    Delocalized runs (lambda above the window) need a much larger box to
    keep the absorbed norm below budget; the reduced "ci" profile trades
    resolution for speed while preserving the qualitative ordering.
    """
    delocalized = lambda_mod > math.sqrt(kbar) / 2.0
    if profile == "ci":
        if delocalized:
            return GridConfig(z_min=-20.0, z_max=3000.0, n_points=2**14,
                              dt=TWO_PI / 500.0, absorber_width=50.0)
        return GridConfig(z_min=-20.0, z_max=800.0, n_points=2**12,
                          dt=TWO_PI / 500.0, absorber_width=50.0)
    if delocalized:
        return GridConfig(z_min=-20.0, z_max=3000.0, n_points=2**16)
    return GridConfig()


_PRESET_TABLE = {
    # name: (lambda, ensemble_n, t_final)
    "fig1a": (0.2, 0, 10_000 * TWO_PI),
    "fig1b": (0.5, 0, 10_000 * TWO_PI),
    "fig2": (0.5, 2000, 2650.0),
    "fig3": (0.5, 2000, 2650.0),
    "fig4": (0.8, 10_000, 2650.0),
    "fig5": (None, 2000, 3200.0),
}


def preset(name: str, out_dir: str, seed: int = DEFAULT_SEED,
           profile: str = "full") -> ExperimentConfig:
    """Resolve a named preset to a full configuration."""
    if name not in _PRESET_TABLE:
        raise ConfigError(
            f"unknown preset {name!r}; choose from {sorted(_PRESET_TABLE)}"
        )
    lam, n, t_final = _PRESET_TABLE[name]
    d = DimensionlessParams(v0=CANONICAL["v0"], kappa=CANONICAL["kappa"],
                            lambda_mod=lam if lam is not None else 0.0,
                            kbar=CANONICAL["kbar"])
    if profile == "ci" and name == "fig5":
        t_final = 800.0
    cfg = ExperimentConfig(
        name=name,
        lambda_mod=lam if lam is not None else 0.0,
        dimensionless=d,
        integrator=IntegratorConfig(),
        grid=None if lam is None else quantum_grid(lam, d.kbar, profile),
        ensemble_n=n,
        seed=seed,
        t_final=t_final,
        out_dir=out_dir,
        profile=profile,
        sweep_lambdas=list(SWEEP_LAMBDAS) if name == "fig5" else [],
    )
    return cfg


def _fmt_cell(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    # repr of a Python float round-trips exactly, so reruns are bit-identical
    return repr(float(x))


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt_cell(x) for x in row])


def _atomic_json(path, payload):
    tmp = f"{path}.tmp"
    with open(tmp, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    os.replace(tmp, path)


def _config_dict(cfg: ExperimentConfig) -> dict:
    return {
        "name": cfg.name,
        "lambda": cfg.lambda_mod,
        "v0": cfg.dimensionless.v0,
        "kappa": cfg.dimensionless.kappa,
        "kbar": cfg.dimensionless.kbar,
        "dt": cfg.integrator.dt,
        "grid": None if cfg.grid is None else {
            "z_min": cfg.grid.z_min, "z_max": cfg.grid.z_max,
            "n_points": cfg.grid.n_points, "dt": cfg.grid.dt,
            "absorber_width": cfg.grid.absorber_width,
            "absorber_strength": cfg.grid.absorber_strength,
        },
        "packet": PACKET,
        "ensemble_n": cfg.ensemble_n,
        "seed": cfg.seed,
        "t_final": cfg.t_final,
        "record_every": cfg.record_every,
        "profile": cfg.profile,
        "sweep_lambdas": cfg.sweep_lambdas,
    }


def _matched_ensemble(cfg: ExperimentConfig) -> Ensemble:
    dp = cfg.dimensionless.kbar / (2.0 * PACKET["dz"])
    return sample_gaussian(
        PhaseState(PACKET["center_z"], PACKET["center_p"]),
        PACKET["dz"], dp, cfg.ensemble_n, cfg.seed,
    )


def _classical_run(cfg: ExperimentConfig):
    e = _matched_ensemble(cfg)
    return propagate_ensemble(e, cfg.t_final, cfg.integrator, cfg.spec,
                              cfg.record_every)


def _quantum_run(cfg: ExperimentConfig):
    grid = cfg.grid or quantum_grid(cfg.lambda_mod, cfg.dimensionless.kbar,
                                    cfg.profile)
    psi = init_gaussian(PACKET["center_z"], PACKET["center_p"], PACKET["dz"],
                        grid, cfg.dimensionless.kbar)
    psi, rec = propagate(psi, cfg.t_final, grid, cfg.spec,
                         cfg.dimensionless.kbar, cfg.record_every)
    return psi, rec, grid


def _momentum_fit_verdict(hist, floor=1e-8):
    """Compare exponential vs Gaussian quality of a momentum distribution."""
    fe = fit_exponential(hist, density_floor=floor, fold=True)
    fg = fit_gaussian(hist, density_floor=floor)
    if fe.r_squared >= fg.r_squared:
        return "exponential", fe, fg
    return "gaussian", fe, fg


def run_experiment(cfg: ExperimentConfig) -> RunManifest:
    """Execute one preset, write its CSV outputs and manifest."""
    os.makedirs(cfg.out_dir, exist_ok=True)
    written = []
    start = time.monotonic()

    def out(name):
        path = os.path.join(cfg.out_dir, name)
        written.append(path)
        return path

    try:
        if cfg.name in ("fig1a", "fig1b"):
            _run_lyapunov_preset(cfg, out)
        elif cfg.name in ("fig2", "fig3"):
            _run_matched_preset(cfg, out, with_envelopes=cfg.name == "fig3")
        elif cfg.name == "fig4":
            _run_distribution_preset(cfg, out)
        elif cfg.name == "fig5":
            run_sweep(cfg.sweep_lambdas, cfg, out("sweep.csv"))
        else:
            raise ConfigError(f"preset {cfg.name!r} has no runner")
    except Exception:
        for path in written:
            if os.path.exists(path):
                os.unlink(path)
        raise

    manifest = RunManifest(
        name=cfg.name,
        config=_config_dict(cfg),
        seed=cfg.seed,
        version=__version__,
        wall_time_s=time.monotonic() - start,
        outputs=[os.path.basename(p) for p in written],
    )
    _atomic_json(os.path.join(cfg.out_dir, "manifest.json"), {
        "name": manifest.name, "config": manifest.config,
        "seed": manifest.seed, "version": manifest.version,
        "wall_time_s": manifest.wall_time_s, "outputs": manifest.outputs,
    })
    return manifest


def _run_lyapunov_preset(cfg, out):
    lcfg = LyapunovConfig(n_periods=round(cfg.t_final / TWO_PI))
    rows = []
    for z0, p0 in LYAPUNOV_STARTS:
        res = lyapunov_exponent(PhaseState(z0, p0), lcfg, cfg.integrator,
                                cfg.spec)
        rows.append((z0, p0, cfg.lambda_mod, res.exponent))
        tag = f"z{z0:g}_p{p0:g}".replace("-", "m").replace(".", "_")
        _write_csv(out(f"convergence_{tag}.csv"), ("period", "L_t"),
                   zip(res.convergence_periods, res.convergence))
        section = poincare_section(PhaseState(z0, p0),
                                   round(cfg.t_final / TWO_PI),
                                   cfg.integrator, cfg.spec)
        _write_csv(out(f"poincare_{tag}.csv"), ("k", "z", "p"),
                   ((k, zz, pp) for k, (zz, pp) in enumerate(section)))
    _write_csv(out("lyapunov.csv"), ("z0", "p0", "lambda", "L"), rows)


def _run_matched_preset(cfg, out, with_envelopes=False):
    _, crec = _classical_run(cfg)
    crec.write_csv(out("classical_record.csv"))
    _, qrec, _ = _quantum_run(cfg)
    qrec.write_csv(out("quantum_record.csv"))
    if with_envelopes:
        for label, rec in (("classical", crec), ("quantum", qrec)):
            for obs in ("mean_p", "mean_z"):
                t, upper, lower = envelope(rec.times, getattr(rec, obs))
                _write_csv(out(f"{label}_envelope_{obs}.csv"),
                           ("t", "upper", "lower"), zip(t, upper, lower))


def _run_distribution_preset(cfg, out):
    final, crec = _classical_run(cfg)
    crec.write_csv(out("classical_record.csv"))
    pos_h = histogram_from_samples(final.z, bins=120)
    mom_h = histogram_from_samples(final.p, bins=40)
    pos_h.write_csv(out("classical_position_dist.csv"))
    mom_h.write_csv(out("classical_momentum_dist.csv"))

    count_floor_pos = 10.0 / (len(final) * pos_h.bin_width)
    count_floor_mom = 10.0 / (len(final) * mom_h.bin_width)
    eta = float(crec.var_p[-1])
    fits = {
        "classical_eta_varp": eta,
        "classical_position_exponential": fit_exponential(
            pos_h, fit_range=(40.0, float(final.z.max())),
            density_floor=count_floor_pos).to_dict(),
        "classical_momentum_gaussian": fit_gaussian(
            mom_h, density_floor=count_floor_mom).to_dict(),
        "classical_momentum_exponential": fit_exponential(
            mom_h, density_floor=count_floor_mom, fold=True).to_dict(),
    }

    psi, qrec, grid = _quantum_run(cfg)
    qrec.write_csv(out("quantum_record.csv"))
    qpos = position_distribution(psi, grid)
    qmom = momentum_distribution(psi, grid, cfg.dimensionless.kbar)
    qpos.write_csv(out("quantum_position_dist.csv"))
    qmom.write_csv(out("quantum_momentum_dist.csv"))

    verdict, fe, fg = _momentum_fit_verdict(qmom)
    fits.update({
        "quantum_momentum_verdict": verdict,
        "quantum_momentum_exponential": fe.to_dict(),
        "quantum_momentum_gaussian": fg.to_dict(),
        "quantum_position_two_exponential": fit_two_exponential(qpos).to_dict(),
    })
    _atomic_json(out("fits.json"), fits)


def _trailing_mean(values, n=10):
    tail = values[-n:] if len(values) >= n else values
    return float(np.mean(tail))


def run_sweep(lambdas, base: ExperimentConfig, out_path) -> None:
    """Classical and quantum final momentum variance for each lambda.

    A failing lambda is recorded in its row and the sweep continues.
    """
    if any(l < 0 for l in lambdas):
        raise ConfigError("sweep lambdas must be >= 0")
    rows = []
    for lam in lambdas:
        cfg = ExperimentConfig(
            name=f"sweep_{lam:g}", lambda_mod=lam,
            dimensionless=DimensionlessParams(
                base.dimensionless.v0, base.dimensionless.kappa, lam,
                base.dimensionless.kbar),
            integrator=base.integrator,
            grid=quantum_grid(lam, base.dimensionless.kbar, base.profile),
            ensemble_n=base.ensemble_n, seed=base.seed,
            t_final=base.t_final, out_dir=base.out_dir,
            profile=base.profile,
        )
        wclass = classify_window(lam, cfg.dimensionless).value
        try:
            _, crec = _classical_run(cfg)
            psi, qrec, grid = _quantum_run(cfg)
            qmom = momentum_distribution(psi, grid, cfg.dimensionless.kbar)
            verdict, fe, fg = _momentum_fit_verdict(qmom)
            fit_r2 = max(fe.r_squared, fg.r_squared)
            rows.append((lam, float(crec.var_p[-1]), float(qrec.var_p[-1]),
                         wclass, verdict, fit_r2,
                         _trailing_mean(crec.var_p), _trailing_mean(qrec.var_p)))
        except Exception as exc:  # noqa: BLE001 - per-row failure is recorded
            rows.append((lam, math.nan, math.nan, wclass,
                         f"error:{type(exc).__name__}", math.nan,
                         math.nan, math.nan))
    _write_csv(out_path,
               ("lambda", "classical_varp", "quantum_varp", "window_class",
                "fit_verdict", "fit_r2",
                "classical_varp_trail10", "quantum_varp_trail10"),
               rows)
