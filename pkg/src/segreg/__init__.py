"""Four-regime segmented linear regression with two splitting hyperplanes.

The package estimates piecewise-linear models whose regimes are the sign
cells of two linear boundary functions of observed covariates.  It provides
an exact enumeration solver, a block-coordinate heuristic, a mixed-integer
formulation (with LP-format export and a small branch-and-bound solver),
bootstrap and plug-in inference, and backward-elimination selection of the
number of regimes.
"""

from __future__ import annotations

from .errors import ConfigError, DataError, SegregError, SolverError

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DataError",
    "SegregError",
    "SolverError",
    "__version__",
]
