"""Derived quantities: diffusion constants, effective temperature, distribution
fits, localization scales and the localization-window classification.

All fits operate on the logarithm of a histogram density, so they are
invariant under renormalization of the histogram by a positive constant.
"""

import csv
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigError, FitError
from .scaling import DimensionlessParams, window_bounds

TWO_PI = 2.0 * math.pi

RECORD_COLUMNS = ("t", "mean_z", "mean_p", "var_z", "var_p", "norm")

# Default floors below which log-density bins are considered noise.
CLASSICAL_COUNT_FLOOR = 10
QUANTUM_DENSITY_FLOOR = 1e-8


@dataclass
class TimeSeriesRecord:
    """Stroboscopic ensemble/wavepacket moments, one sample per drive period."""

    times: np.ndarray
    mean_z: np.ndarray
    mean_p: np.ndarray
    var_z: np.ndarray
    var_p: np.ndarray
    norm: np.ndarray

    def __post_init__(self):
        arrays = [np.asarray(a, dtype=float) for a in
                  (self.times, self.mean_z, self.mean_p,
                   self.var_z, self.var_p, self.norm)]
        (self.times, self.mean_z, self.mean_p,
         self.var_z, self.var_p, self.norm) = arrays
        n = len(self.times)
        if any(len(a) != n for a in arrays):
            raise ConfigError("record columns must have equal length")
        if n > 1 and not np.all(np.diff(self.times) > 0):
            raise ConfigError("record times must be strictly increasing")
        if np.any(self.var_z < 0) or np.any(self.var_p < 0):
            raise ConfigError("variances must be non-negative")

    def __len__(self):
        return len(self.times)

    def write_csv(self, path):
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(RECORD_COLUMNS)
            for row in zip(self.times, self.mean_z, self.mean_p,
                           self.var_z, self.var_p, self.norm):
                w.writerow([repr(float(x)) for x in row])

    @classmethod
    def read_csv(cls, path):
        data = _read_columns(path, RECORD_COLUMNS)
        return cls(*(data[c] for c in RECORD_COLUMNS))


@dataclass
class Histogram:
    """Bin centers and normalized density on a uniform grid."""

    centers: np.ndarray
    density: np.ndarray
    bin_width: float

    def __post_init__(self):
        self.centers = np.asarray(self.centers, dtype=float)
        self.density = np.asarray(self.density, dtype=float)
        if len(self.centers) != len(self.density):
            raise ConfigError("centers and density must have equal length")
        if np.any(self.density < 0):
            raise ConfigError("density must be non-negative")
        if self.bin_width <= 0:
            raise ConfigError("bin_width must be positive")
        if self.density.sum() * self.bin_width > 1.0 + 1e-9:
            raise ConfigError("histogram integrates to more than 1")

    def write_csv(self, path):
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(("coord", "density"))
            for c, d in zip(self.centers, self.density):
                w.writerow([repr(float(c)), repr(float(d))])

    @classmethod
    def read_csv(cls, path):
        data = _read_columns(path, ("coord", "density"))
        centers = data["coord"]
        if len(centers) < 2:
            raise ConfigError(f"{path}: need at least two bins")
        return cls(centers, data["density"], float(centers[1] - centers[0]))


def _read_columns(path, columns):
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"{path}: empty CSV") from None
        missing = [c for c in columns if c not in header]
        if missing:
            raise ConfigError(f"{path}: missing columns {missing} in {header}")
        idx = [header.index(c) for c in columns]
        rows = [[float(r[i]) for i in idx] for r in reader if r]
    data = np.array(rows, dtype=float).reshape(len(rows), len(columns))
    return {c: data[:, j] for j, c in enumerate(columns)}


def histogram_from_samples(samples, bins=120, hist_range=None) -> Histogram:
    """Normalized histogram of ensemble samples."""
    density, edges = np.histogram(np.asarray(samples, dtype=float), bins=bins,
                                  range=hist_range, density=True)
    centers = 0.5 * (edges[:-1] + edges[1:])
    return Histogram(centers, density, float(edges[1] - edges[0]))


class FitModel(Enum):
    EXPONENTIAL = "exponential"
    GAUSSIAN = "gaussian"
    TWO_EXPONENTIAL = "two_exponential"


@dataclass
class FitReport:
    model: FitModel
    params: dict
    r_squared: float
    fit_range: tuple
    fallback_single: bool = False

    def to_dict(self):
        return {
            "model": self.model.value,
            "params": self.params,
            "r_squared": self.r_squared,
            "fit_range": list(self.fit_range),
            "fallback_single": self.fallback_single,
        }


class WindowClass(Enum):
    BELOW_WINDOW = "below_window"
    IN_WINDOW = "in_window"
    ABOVE_WINDOW = "above_window"


@dataclass
class EtaSeries:
    """Effective-temperature estimators per stroboscopic sample.

    In the triangular-well limit the Boltzmann distribution gives the
    equality (position std) = eta = (momentum variance); for the exponential
    mirror it holds approximately.
    """

    times: np.ndarray
    eta_from_z: np.ndarray
    eta_from_p2: np.ndarray


@dataclass
class TheoreticalScales:
    """Order-of-magnitude break time and localization length.

    t_break and loc_length_measured use the measured diffusion constant;
    loc_length uses the quasi-linear D = K^2/2 = 8 lambda^2. All three are
    order-of-magnitude estimates, not pinned predictions.
    """

    t_break: float
    loc_length: float
    loc_length_measured: float
    order_of_magnitude: bool = field(default=True)


def _linear_r2(x, y):
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), float(r2)


def _block_average(x, w):
    n = (len(x) // w) * w
    return x[:n].reshape(-1, w).mean(axis=1)


def diffusion_fit(rec: TimeSeriesRecord, transient_periods: int,
                  smooth_window: int = 1) -> tuple[float, float]:
    """Least-squares slope of var_p versus t after a transient.

    smooth_window > 1 block-averages that many consecutive stroboscopic
    samples before fitting. An initial packet near the 2:1 bounce resonance
    aliases a coherent oscillation into alternating per-period samples;
    a window of 2 (or 4) removes it without biasing the slope.
    """
    keep = rec.times > rec.times[0] + transient_periods * TWO_PI - 1e-9
    t = rec.times[keep]
    v = rec.var_p[keep]
    if smooth_window > 1:
        t = _block_average(t, smooth_window)
        v = _block_average(v, smooth_window)
    if len(t) < 10:
        raise ConfigError(
            f"diffusion fit needs >= 10 post-transient samples, got {len(t)}"
        )
    slope, _, r2 = _linear_r2(t, v)
    return slope, r2


def boltzmann_eta(rec: TimeSeriesRecord) -> EtaSeries:
    """Both effective-temperature estimators: sqrt(var_z) and var_p."""
    return EtaSeries(rec.times.copy(), np.sqrt(rec.var_z), rec.var_p.copy())


class _SegmentFits:
    """O(1) least-squares line fits on contiguous index ranges via prefix sums."""

    def __init__(self, x, y):
        z = np.zeros(1)
        self.sx = np.concatenate([z, np.cumsum(x)])
        self.sy = np.concatenate([z, np.cumsum(y)])
        self.sxx = np.concatenate([z, np.cumsum(x * x)])
        self.sxy = np.concatenate([z, np.cumsum(x * y)])
        self.syy = np.concatenate([z, np.cumsum(y * y)])

    def segment(self, i, j):
        """(sse, slope, intercept) of the fit over x[i:j]."""
        n = j - i
        sx = self.sx[j] - self.sx[i]
        sy = self.sy[j] - self.sy[i]
        sxx = self.sxx[j] - self.sxx[i]
        sxy = self.sxy[j] - self.sxy[i]
        syy = self.syy[j] - self.syy[i]
        vxx = sxx - sx * sx / n
        vxy = sxy - sx * sy / n
        vyy = syy - sy * sy / n
        slope = vxy / vxx if vxx > 0 else 0.0
        intercept = (sy - slope * sx) / n
        sse = max(vyy - slope * vxy, 0.0)
        return float(sse), float(slope), float(intercept)


def rebin(h: Histogram, factor: int) -> Histogram:
    """Average whole groups of `factor` adjacent bins.

    Useful before log-space fits of fine-grained wavefunction densities,
    where per-cell oscillations would otherwise dominate the residuals.
    """
    if factor < 1:
        raise ConfigError(f"rebin factor must be >= 1, got {factor}")
    if factor == 1:
        return h
    n = (len(h.centers) // factor) * factor
    centers = h.centers[:n].reshape(-1, factor).mean(axis=1)
    density = h.density[:n].reshape(-1, factor).mean(axis=1)
    return Histogram(centers, density, h.bin_width * factor)


def _valid_log_bins(h: Histogram, fit_range, density_floor):
    mask = h.density > density_floor
    if fit_range is not None:
        lo, hi = fit_range
        mask &= (h.centers >= lo) & (h.centers <= hi)
    return mask


def fit_exponential(h: Histogram, fit_range=None,
                    density_floor=QUANTUM_DENSITY_FLOOR,
                    fold=False) -> FitReport:
    """Linear fit of log(density); slope -1/eta for a barometric profile.

    With fold=True the coordinate is |center - weighted mean|, appropriate
    for a symmetric exponentially-localized momentum distribution.
    """
    mask = _valid_log_bins(h, fit_range, density_floor)
    if mask.sum() < 5:
        raise FitError(f"exponential fit needs >= 5 valid bins, got {mask.sum()}")
    x = h.centers[mask]
    y = np.log(h.density[mask])
    if fold:
        w = h.density[mask]
        mu = np.sum(x * w) / np.sum(w)
        x = np.abs(x - mu)
    slope, intercept, r2 = _linear_r2(x, y)
    lo = float(x.min()) if fit_range is None else float(fit_range[0])
    hi = float(x.max()) if fit_range is None else float(fit_range[1])
    return FitReport(
        model=FitModel.EXPONENTIAL,
        params={"slope": slope, "intercept": intercept,
                "eta": (-1.0 / slope) if slope < 0 else math.inf},
        r_squared=r2,
        fit_range=(lo, hi),
    )


def fit_gaussian(h: Histogram, fit_range=None,
                 density_floor=QUANTUM_DENSITY_FLOOR) -> FitReport:
    """Linear fit of log(density) vs squared centered coordinate.

    The coordinate is centered at the density-weighted mean; the returned
    eta is the fitted variance.
    """
    mask = _valid_log_bins(h, fit_range, density_floor)
    if mask.sum() < 5:
        raise FitError(f"gaussian fit needs >= 5 valid bins, got {mask.sum()}")
    x = h.centers[mask]
    w = h.density[mask]
    mu = np.sum(x * w) / np.sum(w)
    slope, intercept, r2 = _linear_r2((x - mu) ** 2, np.log(w))
    eta = (-1.0 / (2.0 * slope)) if slope < 0 else math.inf
    lo = float(x.min()) if fit_range is None else float(fit_range[0])
    hi = float(x.max()) if fit_range is None else float(fit_range[1])
    return FitReport(
        model=FitModel.GAUSSIAN,
        params={"slope": slope, "intercept": intercept, "mean": float(mu),
                "eta": eta},
        r_squared=r2,
        fit_range=(lo, hi),
    )


def fit_two_exponential(h: Histogram, fit_range=None,
                        density_floor=QUANTUM_DENSITY_FLOOR,
                        min_segment=5) -> FitReport:
    """Piecewise-linear fit of log(density) with one breakpoint.

    The breakpoint is chosen over interior bin positions to minimize the
    total squared error of the two independent line fits. Falls back to a
    single exponential (fallback_single=True) when the best breakpoint sits
    at the range edge or the two slopes are indistinguishable.
    """
    mask = _valid_log_bins(h, fit_range, density_floor)
    if mask.sum() < 12:
        raise FitError(
            f"two-exponential fit needs >= 12 valid bins, got {mask.sum()}"
        )
    x = h.centers[mask]
    y = np.log(h.density[mask])

    fit_all = _SegmentFits(x, y)
    s_single, slope_single, icpt_single = fit_all.segment(0, len(x))
    best = None
    for b in range(min_segment, len(x) - min_segment + 1):
        s1, sl1, ic1 = fit_all.segment(0, b)
        s2, sl2, ic2 = fit_all.segment(b, len(x))
        if best is None or s1 + s2 < best[0]:
            best = (s1 + s2, b, sl1, ic1, sl2, ic2)
    total_sse, b, sl1, ic1, sl2, ic2 = best
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - total_sse / ss_tot if ss_tot > 0 else 1.0
    breakpoint_coord = float(0.5 * (x[b - 1] + x[b]))

    edge = b in (min_segment, len(x) - min_segment)
    slopes_close = abs(sl1 - sl2) <= 0.1 * max(abs(sl1), abs(sl2), 1e-300)
    if edge or slopes_close:
        return FitReport(
            model=FitModel.TWO_EXPONENTIAL,
            params={"slope": slope_single, "intercept": icpt_single,
                    "eta": (-1.0 / slope_single) if slope_single < 0 else math.inf},
            r_squared=1.0 - s_single / ss_tot if ss_tot > 0 else 1.0,
            fit_range=(float(x.min()), float(x.max())),
            fallback_single=True,
        )

    steep, flat = (sl1, sl2) if abs(sl1) >= abs(sl2) else (sl2, sl1)
    return FitReport(
        model=FitModel.TWO_EXPONENTIAL,
        params={"slope_steep": float(steep), "slope_flat": float(flat),
                "slope_left": float(sl1), "slope_right": float(sl2),
                "intercept_left": float(ic1), "intercept_right": float(ic2),
                "breakpoint": breakpoint_coord},
        r_squared=float(r2),
        fit_range=(float(x.min()), float(x.max())),
    )


def theoretical_scales(d: DimensionlessParams,
                       d_measured: float) -> TheoreticalScales:
    """Break time D/kbar^2 and localization length 8 lambda^2 / kbar^2."""
    if d_measured < 0:
        raise ConfigError(f"D must be >= 0, got {d_measured!r}")
    kbar2 = d.kbar**2
    return TheoreticalScales(
        t_break=d_measured / kbar2,
        loc_length=8.0 * d.lambda_mod**2 / kbar2,
        loc_length_measured=d_measured / kbar2,
    )


def classify_window(lambda_mod: float, d: DimensionlessParams) -> WindowClass:
    """Place a modulation depth relative to the localization window.

    Boundary convention: the window is the half-open interval
    (lambda_l, lambda_u]; both edges require strict inequality to advance.
    """
    if lambda_mod < 0:
        raise ConfigError(f"lambda must be >= 0, got {lambda_mod!r}")
    lo, hi = window_bounds(d)
    if lambda_mod <= lo:
        return WindowClass.BELOW_WINDOW
    if lambda_mod <= hi:
        return WindowClass.IN_WINDOW
    return WindowClass.ABOVE_WINDOW


def envelope(times, values, window_periods: int = 10):
    """Running local extrema of a stroboscopic series.

    Returns (times, upper, lower) with the extrema taken over a centered
    window of the given number of drive periods.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if len(t) < 3:
        raise ConfigError("envelope needs at least 3 samples")
    from scipy.ndimage import maximum_filter1d, minimum_filter1d
    size = max(1, int(window_periods))
    upper = maximum_filter1d(v, size=size, mode="nearest")
    lower = minimum_filter1d(v, size=size, mode="nearest")
    return t, upper, lower
