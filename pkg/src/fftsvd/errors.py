"""Exception types shared across the package."""

from __future__ import annotations


class UsageError(ValueError):
    """Caller violated a precondition (bad size, index, format mismatch...)."""


class DimensionError(UsageError):
    """Array or image dimensions are not acceptable (e.g. not a power of two)."""


class FormatMismatchError(UsageError):
    """Two fixed-point operands carry different Q formats."""


class CapacityError(UsageError):
    """Watermark payload does not fit in the available embedding positions."""


class ConvergenceError(RuntimeError):
    """Jacobi sweeps did not reach the requested tolerance.

    The partially converged factors are attached as ``partial`` so callers can
    still inspect or persist them.
    """

    def __init__(self, message: str, residual: float, partial=None):
        super().__init__(message)
        self.residual = residual
        self.partial = partial


class ParseError(UsageError):
    """Input file or flag text could not be parsed."""
