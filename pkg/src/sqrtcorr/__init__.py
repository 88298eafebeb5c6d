"""Local statistics of sqrt(n) mod 1, the random affine lattice limit, and supporting number theory."""

from .errors import ConditioningError, DomainError, EmptySequenceError, InsufficientDataError, TruncationWarning
from .intervals import Box, Interval
from .seq import FracSequence, generate, generate_alpha_power

__version__ = "0.1.0"

__all__ = [
    "Box",
    "ConditioningError",
    "DomainError",
    "EmptySequenceError",
    "FracSequence",
    "InsufficientDataError",
    "Interval",
    "TruncationWarning",
    "generate",
    "generate_alpha_power",
]
