"""Chirikov-Taylor map approximation of the driven bouncer.

Between consecutive bounces the atom's momentum p and the drive phase
theta transform as

    p'     = p + K cos(theta)
    theta' = theta + p'   (mod 2*pi)

with chaos parameter K = 4*lambda. Momentum is deliberately left
unwrapped: diffusion in p is the observable.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

TWO_PI = 2.0 * math.pi

# Map iterations discarded before the mean-square-displacement slope fit,
# suppressing initial correlations.
DEFAULT_TRANSIENT = 10


@dataclass(frozen=True)
class MapState:
    p: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", self.theta % TWO_PI)


@dataclass
class DiffusionResult:
    d_measured: float
    d_quasilinear: float
    steps: np.ndarray
    msd: np.ndarray


def map_step(s: MapState, K: float) -> MapState:
    """One application of the map."""
    p = s.p + K * math.cos(s.theta)
    return MapState(p=p, theta=(s.theta + p) % TWO_PI)


def chaos_parameter(lambda_mod: float) -> float:
    """K = 4*lambda."""
    if lambda_mod < 0:
        raise ConfigError(f"lambda must be >= 0, got {lambda_mod!r}")
    return 4.0 * lambda_mod


def quasilinear_diffusion(K: float) -> float:
    """Uncorrelated-phase prediction D = K^2/2."""
    return 0.5 * K * K


def momentum_msd(K: float, n_orbits: int, n_steps: int, seed: int):
    """Ensemble mean square momentum displacement after each map step.

    Initial conditions are uniform in [0, 2*pi) x [0, 2*pi). Returns
    (steps, msd) with steps = 0..n_steps.
    """
    rng = np.random.default_rng(seed)
    p = rng.uniform(0.0, TWO_PI, n_orbits)
    theta = rng.uniform(0.0, TWO_PI, n_orbits)
    p0 = p.copy()
    msd = np.empty(n_steps + 1)
    msd[0] = 0.0
    for n in range(1, n_steps + 1):
        p += K * np.cos(theta)
        theta = (theta + p) % TWO_PI
        msd[n] = np.mean((p - p0) ** 2)
    return np.arange(n_steps + 1), msd


def diffusion_coefficient(K: float, n_orbits: int, n_steps: int, seed: int,
                          transient: int = DEFAULT_TRANSIENT) -> DiffusionResult:
    """Measured and quasi-linear diffusion constants of the map.

    D_measured is the least-squares slope of the ensemble mean square
    momentum displacement versus step count, after discarding the
    transient.
    """
    if n_orbits < 10 or n_steps < 10:
        raise ConfigError("need n_orbits >= 10 and n_steps >= 10")
    steps, msd = momentum_msd(K, n_orbits, n_steps, seed)
    keep = steps > transient
    if keep.sum() < 3:
        raise ConfigError("fewer than 3 post-transient samples for the slope fit")
    slope = np.polyfit(steps[keep], msd[keep], 1)[0]
    return DiffusionResult(
        d_measured=float(slope),
        d_quasilinear=quasilinear_diffusion(K),
        steps=steps,
        msd=msd,
    )
