"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
JSON config schemas are documented in the README; every run writes CSV
files with the pinned schemas from the experiments module.
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .classical import IntegratorConfig, PhaseState, poincare_section
from .diagnostics import (Histogram, TimeSeriesRecord, boltzmann_eta,
                          classify_window, diffusion_fit, fit_exponential,
                          fit_gaussian, fit_two_exponential,
                          theoretical_scales)
from .errors import ConfigError, NumericalError
from .experiments import (ExperimentConfig, _classical_run, _quantum_run,
                          _write_csv, preset, quantum_grid, run_experiment,
                          run_sweep, DEFAULT_SEED, SWEEP_LAMBDAS)
from .lyapunov import LyapunovConfig, lyapunov_exponent
from .potential import ModulationForm, PotentialSpec
from .quantum import (momentum_distribution, position_distribution,
                      save_checkpoint)
from .scaling import (DimensionlessParams, PhysicalParams, epsilon_for_lambda,
                      to_dimensionless, window_bounds)
from .standard_map import chaos_parameter, diffusion_coefficient

TWO_PI = 2.0 * math.pi


def _load_json(path):
    if path is None:
        raise ConfigError("this subcommand requires --config <json>")
    try:
        with open(path) as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _spec_from(cfg) -> PotentialSpec:
    form = ModulationForm(cfg.get("modulation_form", "mirror_oscillation"))
    return PotentialSpec(v0=cfg.get("v0", 60.0), kappa=cfg.get("kappa", 0.5),
                         lambda_mod=cfg["lambda"], modulation_form=form)


def _integrator_from(cfg) -> IntegratorConfig:
    spp = cfg.get("steps_per_period", 2000)
    return IntegratorConfig(dt=TWO_PI / spp)


def _experiment_config(cfg, args) -> ExperimentConfig:
    d = DimensionlessParams(v0=cfg.get("v0", 60.0), kappa=cfg.get("kappa", 0.5),
                            lambda_mod=cfg["lambda"], kbar=cfg.get("kbar", 4.0))
    profile = cfg.get("profile", "full")
    return ExperimentConfig(
        name=cfg.get("name", "cli"),
        lambda_mod=cfg["lambda"],
        dimensionless=d,
        integrator=_integrator_from(cfg),
        grid=quantum_grid(cfg["lambda"], d.kbar, profile),
        ensemble_n=cfg.get("n", 2000),
        seed=args.seed if args.seed is not None else cfg.get("seed", DEFAULT_SEED),
        t_final=cfg["t_final"],
        out_dir=args.out_dir,
        record_every=cfg.get("record_every", 1),
        profile=profile,
    )


def cmd_convert(args):
    cfg = _load_json(args.config)
    try:
        params = PhysicalParams(**cfg)
    except TypeError as exc:
        raise ConfigError(f"bad PhysicalParams fields: {exc}") from exc
    d = to_dimensionless(params)
    lo, hi = window_bounds(d)
    payload = {
        "v0": d.v0, "kappa": d.kappa, "lambda": d.lambda_mod, "kbar": d.kbar,
        "lambda_l": lo, "lambda_u": hi,
        "epsilon_l": epsilon_for_lambda(lo, d.kappa),
        "epsilon_u": epsilon_for_lambda(hi, d.kappa),
    }
    _emit_json(args, payload, "convert.json")


def cmd_classical(args):
    cfg = _load_json(args.config)
    ecfg = _experiment_config(cfg, args)
    _, rec = _classical_run(ecfg)
    os.makedirs(args.out_dir, exist_ok=True)
    rec.write_csv(os.path.join(args.out_dir, "classical_record.csv"))
    print(os.path.join(args.out_dir, "classical_record.csv"))


def cmd_quantum(args):
    cfg = _load_json(args.config)
    ecfg = _experiment_config(cfg, args)
    psi, rec, grid = _quantum_run(ecfg)
    os.makedirs(args.out_dir, exist_ok=True)
    rec.write_csv(os.path.join(args.out_dir, "quantum_record.csv"))
    position_distribution(psi, grid).write_csv(
        os.path.join(args.out_dir, "quantum_position_dist.csv"))
    momentum_distribution(psi, grid, ecfg.dimensionless.kbar).write_csv(
        os.path.join(args.out_dir, "quantum_momentum_dist.csv"))
    if args.checkpoint:
        save_checkpoint(psi, grid, args.checkpoint)
    print(os.path.join(args.out_dir, "quantum_record.csv"))


def cmd_lyapunov(args):
    cfg = _load_json(args.config)
    spec = _spec_from(cfg)
    icfg = _integrator_from(cfg)
    lcfg = LyapunovConfig(
        d0=cfg.get("d0", 1e-8),
        n_periods=cfg.get("n_periods", 10_000),
        zero_threshold=cfg.get("zero_threshold", 0.005),
    )
    os.makedirs(args.out_dir, exist_ok=True)
    rows = []
    for z0, p0 in cfg["starts"]:
        res = lyapunov_exponent(PhaseState(z0, p0), lcfg, icfg, spec)
        rows.append((z0, p0, spec.lambda_mod, res.exponent))
        if args.convergence:
            tag = f"z{z0:g}_p{p0:g}".replace("-", "m").replace(".", "_")
            _write_csv(os.path.join(args.out_dir, f"convergence_{tag}.csv"),
                       ("period", "L_t"),
                       zip(res.convergence_periods, res.convergence))
    path = os.path.join(args.out_dir, "lyapunov.csv")
    _write_csv(path, ("z0", "p0", "lambda", "L"), rows)
    print(path)


def cmd_map(args):
    K = args.K if args.K is not None else chaos_parameter(args.lambda_mod)
    result = diffusion_coefficient(K, args.orbits, args.steps,
                                   args.seed if args.seed is not None else 0)
    os.makedirs(args.out_dir, exist_ok=True)
    _write_csv(os.path.join(args.out_dir, "map_msd.csv"), ("n", "msd"),
               zip(result.steps, result.msd))
    _emit_json(args, {"K": K, "D_measured": result.d_measured,
                      "D_quasilinear": result.d_quasilinear},
               "map_summary.json")


def cmd_poincare(args):
    spec = PotentialSpec(v0=args.v0, kappa=args.kappa,
                         lambda_mod=args.lambda_mod)
    section = poincare_section(PhaseState(args.z0, args.p0), args.periods,
                               IntegratorConfig(), spec)
    os.makedirs(args.out_dir, exist_ok=True)
    path = os.path.join(args.out_dir, "poincare.csv")
    _write_csv(path, ("k", "z", "p"),
               ((k, z, p) for k, (z, p) in enumerate(section)))
    print(path)


def cmd_analyze(args):
    payload = {}
    d = DimensionlessParams(v0=args.v0, kappa=args.kappa,
                            lambda_mod=args.lambda_mod, kbar=args.kbar)
    if args.record:
        rec = TimeSeriesRecord.read_csv(args.record)
        D, r2 = diffusion_fit(rec, args.transient, args.smooth_window)
        eta = boltzmann_eta(rec)
        scales = theoretical_scales(d, max(D, 0.0))
        payload["record"] = {
            "D": D, "r2": r2,
            "eta_from_z_final": float(eta.eta_from_z[-1]),
            "eta_from_p2_final": float(eta.eta_from_p2[-1]),
            "window_class": classify_window(args.lambda_mod, d).value,
            "t_break": scales.t_break,
            "loc_length": scales.loc_length,
            "loc_length_measured": scales.loc_length_measured,
            "order_of_magnitude": True,
        }
    if args.distribution:
        h = Histogram.read_csv(args.distribution)
        fit_range = tuple(args.fit_range) if args.fit_range else None
        fits = {}
        if args.fit in ("exponential", "all"):
            fits["exponential"] = fit_exponential(
                h, fit_range=fit_range, density_floor=args.floor,
                fold=args.fold).to_dict()
        if args.fit in ("gaussian", "all"):
            fits["gaussian"] = fit_gaussian(
                h, fit_range=fit_range, density_floor=args.floor).to_dict()
        if args.fit in ("two_exponential", "all"):
            fits["two_exponential"] = fit_two_exponential(
                h, fit_range=fit_range, density_floor=args.floor).to_dict()
        payload["distribution"] = fits
    if not payload:
        raise ConfigError("analyze needs --record and/or --distribution")
    _emit_json(args, payload, "analysis.json")


def cmd_experiment(args):
    cfg = preset(args.preset, args.out_dir,
                 seed=args.seed if args.seed is not None else DEFAULT_SEED,
                 profile=args.profile)
    manifest = run_experiment(cfg)
    print(os.path.join(args.out_dir, "manifest.json"))
    return manifest


def cmd_sweep(args):
    lambdas = ([float(x) for x in args.lambdas.split(",")]
               if args.lambdas else list(SWEEP_LAMBDAS))
    base = preset("fig5", args.out_dir,
                  seed=args.seed if args.seed is not None else DEFAULT_SEED,
                  profile=args.profile)
    if args.t_final is not None:
        base.t_final = args.t_final
    if args.n is not None:
        base.ensemble_n = args.n
    os.makedirs(args.out_dir, exist_ok=True)
    path = os.path.join(args.out_dir, "sweep.csv")
    run_sweep(lambdas, base, path)
    print(path)


def _emit_json(args, payload, default_name):
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        path = os.path.join(args.out_dir, default_name)
        with open(path, "w") as f:
            f.write(text + "\n")
        print(path)
    else:
        print(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fermibounce",
        description="Atom-optics Fermi accelerator simulator",
    )
    parser.add_argument("--version", action="version", version=__version__)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out-dir", default=None)
    common.add_argument("--config", default=None,
                        help="JSON configuration file")
    common.add_argument("--threads", type=int, default=None,
                        help="numba thread count for ensemble kernels")

    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("convert", parents=[common]).set_defaults(func=cmd_convert)

    p = sub.add_parser("classical", parents=[common])
    p.set_defaults(func=cmd_classical)

    p = sub.add_parser("quantum", parents=[common])
    p.add_argument("--checkpoint", default=None,
                   help="write a binary wavefunction checkpoint here")
    p.set_defaults(func=cmd_quantum)

    p = sub.add_parser("lyapunov", parents=[common])
    p.add_argument("--convergence", action="store_true",
                   help="also write per-orbit convergence CSVs")
    p.set_defaults(func=cmd_lyapunov)

    p = sub.add_parser("map", parents=[common])
    p.add_argument("--K", type=float, default=None)
    p.add_argument("--lambda", dest="lambda_mod", type=float, default=None)
    p.add_argument("--orbits", type=int, default=10_000)
    p.add_argument("--steps", type=int, default=1000)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("poincare", parents=[common])
    p.add_argument("--z0", type=float, required=True)
    p.add_argument("--p0", type=float, required=True)
    p.add_argument("--periods", type=int, default=10_000)
    p.add_argument("--lambda", dest="lambda_mod", type=float, required=True)
    p.add_argument("--v0", type=float, default=60.0)
    p.add_argument("--kappa", type=float, default=0.5)
    p.set_defaults(func=cmd_poincare)

    p = sub.add_parser("analyze", parents=[common])
    p.add_argument("--record", default=None, help="record CSV to analyze")
    p.add_argument("--distribution", default=None, help="distribution CSV")
    p.add_argument("--fit", default="all",
                   choices=["exponential", "gaussian", "two_exponential", "all"])
    p.add_argument("--fit-range", type=float, nargs=2, default=None)
    p.add_argument("--floor", type=float, default=1e-8)
    p.add_argument("--fold", action="store_true",
                   help="fit the exponential against |coord - mean|")
    p.add_argument("--transient", type=int, default=20)
    p.add_argument("--smooth-window", type=int, default=1)
    p.add_argument("--lambda", dest="lambda_mod", type=float, default=0.5)
    p.add_argument("--v0", type=float, default=60.0)
    p.add_argument("--kappa", type=float, default=0.5)
    p.add_argument("--kbar", type=float, default=4.0)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("experiment", parents=[common])
    p.add_argument("preset", choices=["fig1a", "fig1b", "fig2", "fig3",
                                      "fig4", "fig5"])
    p.add_argument("--profile", default="full", choices=["full", "ci"])
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("sweep", parents=[common])
    p.add_argument("--lambdas", default=None,
                   help="comma-separated modulation depths")
    p.add_argument("--t-final", type=float, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--profile", default="full", choices=["full", "ci"])
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", None):
        import numba
        numba.set_num_threads(args.threads)
    needs_outdir = args.command in ("classical", "quantum", "lyapunov",
                                    "poincare", "experiment", "sweep")
    try:
        if needs_outdir and not args.out_dir:
            raise ConfigError(f"{args.command} requires --out-dir")
        args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
