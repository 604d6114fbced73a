"""Weighted quadrature on R^d: truncated Gauss rules, hyperbolic-cross
Smolyak rules, assembled shifted-cube rules and sparse B-spline recovery."""

from __future__ import annotations

from .errors import (
    ConvergenceError,
    EmptyTruncationError,
    HypercrossError,
    IntegrandError,
    MemoryGuardError,
    PreconditionError,
)
from .weights import FreudWeight, MarkovSoninWeight, gaussian_density, parse_weight

__all__ = [
    "ConvergenceError",
    "EmptyTruncationError",
    "FreudWeight",
    "HypercrossError",
    "IntegrandError",
    "MarkovSoninWeight",
    "MemoryGuardError",
    "PreconditionError",
    "gaussian_density",
    "parse_weight",
]

__version__ = "0.1.0"
