"""Eigenfunction expansions, spectral-projection kernels and Ingham-type decay experiments."""

from .errors import (
    ConfigError,
    DegreeBoundsError,
    InvariantViolation,
    NumericalError,
    ParameterError,
    PreconditionError,
    QuadratureEvaluationError,
    SpecDecayError,
    TruncationError,
)
from .scaled import ScaledValue

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DegreeBoundsError",
    "InvariantViolation",
    "NumericalError",
    "ParameterError",
    "PreconditionError",
    "QuadratureEvaluationError",
    "ScaledValue",
    "SpecDecayError",
    "TruncationError",
]
