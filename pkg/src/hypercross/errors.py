"""Exception types shared across the package."""

from __future__ import annotations


class HypercrossError(Exception):
    """Base class for all package errors."""


class PreconditionError(HypercrossError, ValueError):
    """An operation was called with arguments outside its contract."""


class ConvergenceError(HypercrossError, ArithmeticError):
    """An iterative numerical procedure failed to converge."""


class IntegrandError(HypercrossError, ArithmeticError):
    """An integrand returned a non-finite value at a quadrature node."""

    def __init__(self, message: str, node=None):
        super().__init__(message)
        self.node = node


class EmptyTruncationError(PreconditionError):
    """The truncation threshold lies beyond the largest zero."""


class MemoryGuardError(HypercrossError, MemoryError):
    """A node enumeration would exceed the configured cap."""
