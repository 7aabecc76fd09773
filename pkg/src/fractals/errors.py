"""
errors.py

Exception hierarchy for the fractal dimension toolkit. Every error carries the
exit code the command line reports for it.

Status: Development
"""


class FractalError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class ParseError(FractalError):
    """Malformed input file (JSON or CSV)."""

    exit_code = 2


class InvalidInputError(FractalError, ValueError):
    """Invalid model or argument."""

    exit_code = 3


class PreconditionError(InvalidInputError):
    """A formula was requested without the certificate it needs (e.g. SSC)."""


class UnsupportedModeError(FractalError):
    """Requested engine or mode cannot handle the input."""

    exit_code = 4


class UnsupportedOrderError(UnsupportedModeError, ValueError):
    """Quantization order outside the range an engine supports."""


class InsufficientDataError(FractalError):
    """Not enough scales or curve points to estimate a dimension."""

    exit_code = 5


class ResourceLimitError(FractalError):
    """A configured size cap would be exceeded."""

    exit_code = 6


class BudgetError(ResourceLimitError):
    """The epsilon budget of a construction cannot be met."""

    def __init__(self, message, breakdown=None):
        super().__init__(message)
        self.breakdown = dict(breakdown or {})


class NumericalFailureError(FractalError):
    """Iteration did not converge or an internal identity failed."""

    exit_code = 1
