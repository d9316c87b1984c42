"""
tnnflag Errors
==============
Typed exceptions. Each carries a stable code so the CLI and the HTTP surface
can report failures in one consistent format.
"""

from typing import Any, Dict, Optional


class TnnFlagError(Exception):
    """Base class for every error raised by the library."""

    code = "TNNFLAG_ERROR"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_detail(self):
        from tnnflag.models import ErrorDetail

        return ErrorDetail(code=self.code, message=self.message, context=self.details)


class FieldZeroDivisionError(TnnFlagError, ZeroDivisionError):
    """Inverse of zero, or a denominator vanishing at an evaluation point."""

    code = "FIELD_ZERO_DIVISION"


class OutsideDomainError(TnnFlagError):
    """Input lies outside the domain of an operation."""

    code = "OUTSIDE_DOMAIN"


class InvalidInputError(TnnFlagError, ValueError):
    """Malformed permutations, windows, subsets or mismatched sizes."""

    code = "INVALID_INPUT"


class FactorizationError(TnnFlagError):
    """A Gauss, Birkhoff, split or Snider inversion has no solution."""

    code = "FACTORIZATION_INFEASIBLE"


class WindowOverflowError(TnnFlagError):
    """A loop-group window is too small for the data it must hold."""

    code = "WINDOW_OVERFLOW"


class LocateError(TnnFlagError):
    """No affine permutation matches the lattice invariants."""

    code = "LOCATE_FAILED"


class InvariantViolation(TnnFlagError):
    """Two independent computations of the same quantity disagree."""

    code = "INVARIANT_VIOLATION"
