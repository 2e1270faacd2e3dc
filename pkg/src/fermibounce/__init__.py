"""Desk-scale simulator of an atom bouncing off a modulated light mirror.

Classical and quantum dynamics of the gravity + modulated-exponential-mirror
system: chaotic diffusion, Lyapunov classification, the Chirikov-Taylor map
approximation, and quantum dynamical localization in position and momentum.
"""

__version__ = "0.1.0"

from .classical import (Ensemble, IntegratorConfig, PhaseState,
                        poincare_section, propagate_ensemble, sample_gaussian,
                        step)
from .diagnostics import (FitModel, FitReport, Histogram, TimeSeriesRecord,
                          WindowClass, boltzmann_eta, classify_window,
                          diffusion_fit, envelope, fit_exponential,
                          fit_gaussian, fit_two_exponential,
                          histogram_from_samples, rebin, theoretical_scales)
from .errors import (BlowupError, ConfigError, FitError, NormLossError,
                     NumericalError)
from .lyapunov import LyapunovConfig, LyapunovResult, lyapunov_exponent
from .potential import ModulationForm, PotentialSpec, force, potential
from .quantum import (GridConfig, Wavefunction, energy_expectation,
                      init_gaussian, load_checkpoint, momentum_distribution,
                      position_distribution, propagate, save_checkpoint)
from .scaling import (DimensionlessParams, K_CRITICAL, PhysicalParams,
                      epsilon_for_lambda, to_dimensionless, window_bounds)
from .standard_map import (DiffusionResult, MapState, chaos_parameter,
                           diffusion_coefficient, map_step)
