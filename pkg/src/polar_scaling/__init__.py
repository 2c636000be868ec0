"""Upper bounds on the scaling exponent of polar codes.

The pipeline bounds the Bhattacharyya parameter of serial combinations from
below, feeds those bounds into a power iteration for an eigen-score, and
turns the eigenvalue into ``mu <= 1 / -log2(lambda)``.
"""

from .errors import (CacheCorruptionError, ConvergenceError, DomainError, MemoryBudgetError,
                     ResolutionMismatchError)
from .interval import Interval
from .power_iteration import mu_from_lambda

__all__ = ["CacheCorruptionError", "ConvergenceError", "DomainError", "MemoryBudgetError",
           "ResolutionMismatchError", "Interval", "mu_from_lambda"]
__version__ = "0.1.0"
