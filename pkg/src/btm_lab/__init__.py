"""Simulation and verification lab for the Bouchaud trap model on the integers."""

from .errors import BTMError, InvalidParameter, NumericalFailure, PreconditionViolation, ResourceLimit
from .landscape import IntervalStats, Landscape, interval_stats, sample_trap

__version__ = "0.1.0"

__all__ = [
    "BTMError",
    "InvalidParameter",
    "IntervalStats",
    "Landscape",
    "NumericalFailure",
    "PreconditionViolation",
    "ResourceLimit",
    "interval_stats",
    "sample_trap",
    "__version__",
]
