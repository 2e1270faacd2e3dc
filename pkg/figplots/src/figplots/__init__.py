"""Publication-style figures from fermibounce CSV/JSON outputs.

This package only reads the documented file contracts (record,
distribution, convergence, Poincare, sweep CSVs and the fits JSON); it has
no dependency on the simulator package itself.
"""

__version__ = "0.1.0"

from .render import FigureSpec, PRESETS, render
