"""Render the five preset figure analogs from experiment output files.

Every reader validates the CSV header and names the file and the missing
columns on error, so a wrong or truncated input fails loudly instead of
producing an empty panel. Rendering never mutates inputs and embeds no
timestamps, so re-renders are byte-stable.
"""

import csv
import json
import math
import os
from dataclasses import dataclass, field

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

TWO_PI = 2.0 * math.pi

# Initial-condition tags used by the Lyapunov presets.
ORBIT_TAGS = ("z20_p0", "z20_pm2", "z40_pm2")

PRESETS = ("fig1a", "fig1b", "fig2", "fig3", "fig4", "fig5")

# Pinned PNG metadata: matplotlib would otherwise embed its own version
# string, which breaks byte-stable re-rendering across environments.
_METADATA = {"Software": "figplots"}


class InputError(ValueError):
    """Missing or malformed input file."""


@dataclass
class FigureSpec:
    preset_name: str
    input_dir: str
    output: str
    log_axes: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.preset_name not in PRESETS:
            raise InputError(
                f"unknown preset {self.preset_name!r}; choose from {PRESETS}"
            )
        if not os.path.isdir(self.input_dir):
            raise InputError(f"input dir {self.input_dir!r} does not exist")


def _read_csv(path, columns):
    if not os.path.exists(path):
        raise InputError(f"{path}: missing input file")
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: empty CSV") from None
        missing = [c for c in columns if c not in header]
        if missing:
            raise InputError(f"{path}: missing columns {missing} in {header}")
        idx = [header.index(c) for c in columns]
        try:
            rows = [[float(r[i]) for i in idx] for r in reader if r]
        except (ValueError, IndexError) as exc:
            raise InputError(f"{path}: malformed row: {exc}") from exc
    data = np.array(rows, dtype=float).reshape(len(rows), len(columns))
    return {c: data[:, j] for j, c in enumerate(columns)}


def _maybe_read_csv(path, columns):
    """Optional layer: missing or empty file just drops the layer."""
    if not os.path.exists(path) or os.path.getsize(path) == 0:
        return None
    data = _read_csv(path, columns)
    if len(next(iter(data.values()))) == 0:
        return None
    return data


def _save(fig, output):
    fig.savefig(output, dpi=150, metadata=_METADATA)
    plt.close(fig)


def _render_lyapunov(spec: FigureSpec):
    fig, (ax_conv, ax_poinc) = plt.subplots(1, 2, figsize=(10, 4))
    for tag, color in zip(ORBIT_TAGS, ("C0", "C1", "C2")):
        conv = _read_csv(os.path.join(spec.input_dir, f"convergence_{tag}.csv"),
                         ("period", "L_t"))
        ax_conv.plot(conv["period"], conv["L_t"], color=color,
                     label=tag.replace("_", " ").replace("m", "-"))
        poinc = _read_csv(os.path.join(spec.input_dir, f"poincare_{tag}.csv"),
                          ("k", "z", "p"))
        ax_poinc.plot(poinc["z"], poinc["p"], ".", color=color, ms=1.5)
    ax_conv.set_xscale("log")
    ax_conv.set_xlabel("drive periods")
    ax_conv.set_ylabel("running Lyapunov estimate")
    ax_conv.axhline(0.0, color="k", lw=0.5)
    ax_conv.legend(fontsize=8)
    ax_poinc.set_xlabel("z")
    ax_poinc.set_ylabel("p")
    fig.suptitle(f"Lyapunov convergence and stroboscopic sections "
                 f"({spec.preset_name})")
    fig.tight_layout()
    _save(fig, spec.output)


def _render_widths(spec: FigureSpec):
    cl = _read_csv(os.path.join(spec.input_dir, "classical_record.csv"),
                   ("t", "var_z", "var_p"))
    qm = _read_csv(os.path.join(spec.input_dir, "quantum_record.csv"),
                   ("t", "var_z", "var_p"))
    fig, (ax_p, ax_z) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    ax_p.plot(cl["t"] / TWO_PI, cl["var_p"], "C0", lw=1.8, label="classical")
    ax_p.plot(qm["t"] / TWO_PI, qm["var_p"], "C3", lw=1.0, label="quantum")
    ax_p.set_ylabel("momentum variance")
    ax_p.legend()
    ax_z.plot(cl["t"] / TWO_PI, np.sqrt(cl["var_z"]), "C0", lw=1.8)
    ax_z.plot(qm["t"] / TWO_PI, np.sqrt(qm["var_z"]), "C3", lw=1.0)
    ax_z.set_ylabel("position width")
    ax_z.set_xlabel("drive periods")
    fig.suptitle("Width growth and saturation")
    fig.tight_layout()
    _save(fig, spec.output)


def _render_envelopes(spec: FigureSpec):
    fig, axes = plt.subplots(2, 2, figsize=(10, 6), sharex=True)
    for col, (label, color) in enumerate((("classical", "C0"),
                                          ("quantum", "C3"))):
        rec = _read_csv(
            os.path.join(spec.input_dir, f"{label}_record.csv"),
            ("t", "mean_z", "mean_p"))
        for row, obs in enumerate(("mean_p", "mean_z")):
            ax = axes[row][col]
            ax.plot(rec["t"] / TWO_PI, rec[obs], color=color, lw=0.7)
            env = _maybe_read_csv(
                os.path.join(spec.input_dir, f"{label}_envelope_{obs}.csv"),
                ("t", "upper", "lower"))
            if env is not None:
                ax.fill_between(env["t"] / TWO_PI, env["lower"], env["upper"],
                                color=color, alpha=0.2, lw=0)
            ax.set_ylabel(("average momentum", "average position")[row])
            if row == 1:
                ax.set_xlabel("drive periods")
            if row == 0:
                ax.set_title(label)
    fig.suptitle("Mean motion and envelopes")
    fig.tight_layout()
    _save(fig, spec.output)


def _overlay_exponential(ax, params, x):
    ax.plot(x, np.exp(params["intercept"] + params["slope"] * x), "k--", lw=1)


def _overlay_gaussian(ax, params, x):
    ax.plot(x, np.exp(params["intercept"]
                      + params["slope"] * (x - params["mean"]) ** 2),
            "k--", lw=1)


def _overlay_two_exponential(ax, params, x):
    if "slope_left" not in params:  # single-line fallback
        _overlay_exponential(ax, params, x)
        return
    b = params["breakpoint"]
    left = x[x <= b]
    right = x[x > b]
    ax.plot(left, np.exp(params["intercept_left"]
                         + params["slope_left"] * left), "k--", lw=1)
    ax.plot(right, np.exp(params["intercept_right"]
                          + params["slope_right"] * right), "k--", lw=1)


def _render_distributions(spec: FigureSpec):
    fits = {}
    fits_path = os.path.join(spec.input_dir, "fits.json")
    if os.path.exists(fits_path):
        try:
            with open(fits_path) as f:
                fits = json.load(f)
        except json.JSONDecodeError as exc:
            raise InputError(f"{fits_path}: malformed JSON: {exc}") from exc

    panels = (
        ("classical_position_dist.csv", "classical position",
         "classical_position_exponential", _overlay_exponential),
        ("classical_momentum_dist.csv", "classical momentum",
         "classical_momentum_gaussian", _overlay_gaussian),
        ("quantum_position_dist.csv", "quantum position",
         "quantum_position_two_exponential", _overlay_two_exponential),
        ("quantum_momentum_dist.csv", "quantum momentum",
         "quantum_momentum_exponential", None),
    )
    fig, axes = plt.subplots(2, 2, figsize=(10, 6))
    for ax, (name, title, fit_key, overlay) in zip(axes.flat, panels):
        data = _read_csv(os.path.join(spec.input_dir, name),
                         ("coord", "density"))
        keep = data["density"] > 0
        ax.plot(data["coord"][keep], data["density"][keep], lw=0.8)
        fit = fits.get(fit_key)
        if fit is not None and overlay is not None:
            lo, hi = fit["fit_range"]
            x = np.linspace(lo, hi, 200)
            overlay(ax, fit["params"], x)
        ax.set_yscale("log")
        ax.set_title(title, fontsize=9)
        ax.set_ylabel("density")
    fig.suptitle("Final distributions (log scale) with fit overlays")
    fig.tight_layout()
    _save(fig, spec.output)


def _render_sweep(spec: FigureSpec):
    data = _read_csv(os.path.join(spec.input_dir, "sweep.csv"),
                     ("lambda", "classical_varp", "quantum_varp"))
    lam = data["lambda"]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(lam, data["classical_varp"], "C0", lw=2.2, label="classical")
    ax.plot(lam, data["quantum_varp"], "C3", lw=1.2, label="quantum")
    ax.set_xlabel("modulation depth")
    ax.set_ylabel("final momentum variance")
    ax.legend()
    # Window classes, when present, shade the localization window.
    classes = _window_column(spec)
    if classes is not None:
        in_window = [l for l, w in zip(lam, classes) if w == "in_window"]
        if in_window:
            ax.axvspan(min(in_window), max(in_window), color="C2", alpha=0.12)
    fig.suptitle("Localization window sweep")
    fig.tight_layout()
    _save(fig, spec.output)


def _window_column(spec: FigureSpec):
    path = os.path.join(spec.input_dir, "sweep.csv")
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if "window_class" not in (reader.fieldnames or ()):
            return None
        return [row["window_class"] for row in reader]


_RENDERERS = {
    "fig1a": _render_lyapunov,
    "fig1b": _render_lyapunov,
    "fig2": _render_widths,
    "fig3": _render_envelopes,
    "fig4": _render_distributions,
    "fig5": _render_sweep,
}


def render(spec: FigureSpec) -> str:
    """Render one preset figure; returns the output path."""
    _RENDERERS[spec.preset_name](spec)
    return spec.output
