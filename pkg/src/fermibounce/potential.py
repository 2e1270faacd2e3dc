"""Time-dependent potential and force shared by the classical and quantum solvers.

Two modulation forms are supported:

  MIRROR_OSCILLATION (default):  V(z,t) = z + V0 exp[-kappa (z - lambda sin t)]
  INTENSITY_MODULATION:          V(z,t) = z + V0 exp(-kappa z) (1 + kappa lambda sin t)

Both coincide at lambda = 0 and agree to first order in eps = kappa*lambda.
The drive phase is fixed so that sin(0) = 0 at t = 0.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError

log = logging.getLogger(__name__)

# Exponent clamp: keeps exp() finite deep inside the classically forbidden
# region without affecting any physically reachable z for V0 ~ 60.
EXP_CLAMP = 700.0

_clamp_logged = False


class ModulationForm(Enum):
    MIRROR_OSCILLATION = "mirror_oscillation"
    INTENSITY_MODULATION = "intensity_modulation"


@dataclass(frozen=True)
class PotentialSpec:
    v0: float
    kappa: float
    lambda_mod: float
    modulation_form: ModulationForm = ModulationForm.MIRROR_OSCILLATION

    def __post_init__(self):
        if not (math.isfinite(self.v0) and self.v0 >= 0):
            raise ConfigError(f"v0 must be finite and >= 0, got {self.v0!r}")
        if not (math.isfinite(self.kappa) and self.kappa > 0):
            raise ConfigError(f"kappa must be finite and > 0, got {self.kappa!r}")
        if not (math.isfinite(self.lambda_mod) and self.lambda_mod >= 0):
            raise ConfigError(
                f"lambda_mod must be finite and >= 0, got {self.lambda_mod!r}"
            )


def _clamped_exp(arg):
    global _clamp_logged
    clipped = np.minimum(arg, EXP_CLAMP)
    if not _clamp_logged and np.any(clipped != arg):
        log.warning(
            "potential exponent clamped at %g; result saturates in the deep "
            "classically forbidden region", EXP_CLAMP,
        )
        _clamp_logged = True
    return np.exp(clipped)


def modulation_factor(spec: PotentialSpec, t):
    """Multiplier m(t) of the static mirror profile: V_mirror = V0 exp(-kappa z) m(t)."""
    s = np.sin(t)
    if spec.modulation_form is ModulationForm.MIRROR_OSCILLATION:
        return np.exp(spec.kappa * spec.lambda_mod * s)
    return 1.0 + spec.kappa * spec.lambda_mod * s


def mirror_term(spec: PotentialSpec, z, t):
    """The mirror part of the potential, V(z,t) - z, for either modulation form."""
    z = np.asarray(z, dtype=float)
    if spec.modulation_form is ModulationForm.MIRROR_OSCILLATION:
        return spec.v0 * _clamped_exp(-spec.kappa * (z - spec.lambda_mod * np.sin(t)))
    factor = 1.0 + spec.kappa * spec.lambda_mod * np.sin(t)
    return spec.v0 * _clamped_exp(-spec.kappa * z) * factor


def potential(spec: PotentialSpec, z, t):
    """V(z, t): gravity term plus the modulated exponential mirror."""
    out = np.asarray(z, dtype=float) + mirror_term(spec, z, t)
    return float(out) if out.ndim == 0 else out


def force(spec: PotentialSpec, z, t):
    """-dV/dz, including the constant gravity pull of -1."""
    out = -1.0 + spec.kappa * mirror_term(spec, z, t)
    return float(out) if out.ndim == 0 else out
