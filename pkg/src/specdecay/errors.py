"""Exception hierarchy shared by every module."""


class SpecDecayError(Exception):
    """Base class for all library errors."""


class ParameterError(SpecDecayError, ValueError):
    """A family or function parameter lies outside its domain."""


class DegreeBoundsError(ParameterError):
    """Requested degree exceeds the configured cap."""


class PreconditionError(SpecDecayError, ValueError):
    """An operation's mathematical precondition does not hold."""


class NumericalError(SpecDecayError, ArithmeticError):
    """A numerical procedure failed (non-convergence, non-finite values)."""


class QuadratureEvaluationError(NumericalError):
    """The integrand returned a non-finite value at a quadrature node."""


class TruncationError(NumericalError):
    """An infinite sum could not be truncated within the hard cap."""


class InvariantViolation(SpecDecayError, AssertionError):
    """A checked mathematical invariant failed."""


class ConfigError(SpecDecayError):
    """Malformed experiment configuration."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}, column {column or 1}: "
        super().__init__(where + message)
