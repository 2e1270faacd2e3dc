"""Conversion between laboratory parameters and the reduced parameter set.

An atom of mass m bounces under gravity g off an evanescent-wave mirror
whose light field decays over 1/k and is driven at frequency omega. After
rescaling position, momentum and time by gravity and the drive frequency,
the dynamics depend only on four dimensionless numbers:

    V0     = hbar * omega^2 * Omega_eff / (4 m g^2)   (mirror height)
    kappa  = 2 k g / omega^2                          (mirror steepness)
    lambda = omega^2 * eps / (2 k g)                  (modulation depth)
    kbar   = hbar * omega^3 / (m g^2)                 (effective Planck constant)

with the identity kappa * lambda = eps.
"""

import math
from dataclasses import dataclass

from .errors import ConfigError

# Critical chaos parameter of the Chirikov-Taylor map (truncated decimal,
# kept exactly as the constant 0.9716).
K_CRITICAL = 0.9716

_REQUIRED_POSITIVE = (
    "mass_kg",
    "gravity_m_s2",
    "hbar_Js",
    "drive_omega_rad_s",
    "decay_k_inv_m",
)
_NONNEGATIVE = ("rabi_eff_rad_s", "modulation_eps")


@dataclass(frozen=True)
class PhysicalParams:
    """Laboratory-frame experiment parameters (SI units).

    decay_k_inv_m is the evanescent decay constant k in 1/m (the field
    intensity decays over a distance 1/k).
    """

    mass_kg: float
    gravity_m_s2: float
    hbar_Js: float
    drive_omega_rad_s: float
    decay_k_inv_m: float
    rabi_eff_rad_s: float = 0.0
    modulation_eps: float = 0.0

    def __post_init__(self):
        for name in _REQUIRED_POSITIVE:
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be finite and > 0, got {v!r}")
        for name in _NONNEGATIVE:
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ConfigError(f"{name} must be finite and >= 0, got {v!r}")


@dataclass(frozen=True)
class DimensionlessParams:
    """The reduced parameter set (V0, kappa, lambda, kbar)."""

    v0: float
    kappa: float
    lambda_mod: float
    kbar: float

    def __post_init__(self):
        if not (math.isfinite(self.kappa) and self.kappa > 0):
            raise ConfigError(f"kappa must be finite and > 0, got {self.kappa!r}")
        if not (math.isfinite(self.kbar) and self.kbar > 0):
            raise ConfigError(f"kbar must be finite and > 0, got {self.kbar!r}")
        if not (math.isfinite(self.v0) and self.v0 >= 0):
            raise ConfigError(f"v0 must be finite and >= 0, got {self.v0!r}")
        if not (math.isfinite(self.lambda_mod) and self.lambda_mod >= 0):
            raise ConfigError(
                f"lambda_mod must be finite and >= 0, got {self.lambda_mod!r}"
            )


def to_dimensionless(params: PhysicalParams) -> DimensionlessParams:
    """Reduce laboratory parameters to (V0, kappa, lambda, kbar)."""
    m = params.mass_kg
    g = params.gravity_m_s2
    hbar = params.hbar_Js
    omega = params.drive_omega_rad_s
    k = params.decay_k_inv_m

    v0 = hbar * omega**2 * params.rabi_eff_rad_s / (4.0 * m * g**2)
    kappa = 2.0 * k * g / omega**2
    lambda_mod = omega**2 * params.modulation_eps / (2.0 * k * g)
    kbar = hbar * omega**3 / (m * g**2)

    d = DimensionlessParams(v0=v0, kappa=kappa, lambda_mod=lambda_mod, kbar=kbar)
    # kappa * lambda must reproduce the input modulation amplitude.
    eps = d.kappa * d.lambda_mod
    if abs(eps - params.modulation_eps) > 1e-12 * max(1.0, params.modulation_eps):
        raise ConfigError(
            f"kappa*lambda = {eps!r} does not reproduce eps = "
            f"{params.modulation_eps!r}"
        )
    return d


def window_bounds(d: DimensionlessParams) -> tuple[float, float]:
    """Boundaries (lambda_l, lambda_u) of the dynamical-localization window.

    The lower edge K_CRITICAL/4 ~ 0.24 marks the onset of classical chaos
    and is independent of all parameters; the upper edge sqrt(kbar)/2 marks
    the onset of quantum delocalization.
    """
    return K_CRITICAL / 4.0, math.sqrt(d.kbar) / 2.0


def epsilon_for_lambda(lambda_mod: float, kappa: float) -> float:
    """Intensity-modulation amplitude eps = kappa * lambda."""
    if not (math.isfinite(kappa) and kappa > 0):
        raise ConfigError(f"kappa must be finite and > 0, got {kappa!r}")
    return kappa * lambda_mod
