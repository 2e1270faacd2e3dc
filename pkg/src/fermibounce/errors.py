"""Exception hierarchy shared by all solver and CLI modules.

Exit-code mapping used by the CLI: ConfigError -> 2, NumericalError -> 3.
"""


class ConfigError(ValueError):
    """Invalid parameters, malformed input files, or violated preconditions."""


class NumericalError(RuntimeError):
    """A computation failed for numerical reasons (blowup, norm loss)."""


class BlowupError(NumericalError):
    """A trajectory or wavefunction became non-finite.

    Carries enough context (state, time, particle index) to reproduce.
    """

    def __init__(self, message, z=None, p=None, t=None, particle=None):
        super().__init__(message)
        self.z = z
        self.p = p
        self.t = t
        self.particle = particle


class NormLossError(NumericalError):
    """Absorbed probability exceeded the tolerated budget.

    The system is bound: any non-negligible absorption means the grid is
    too small for the chosen modulation depth. Enlarge z_max / n_points.
    """

    def __init__(self, message, norm_lost=None, t=None):
        super().__init__(message)
        self.norm_lost = norm_lost
        self.t = t


class FitError(ValueError):
    """A histogram fit could not be performed (too few valid bins)."""
