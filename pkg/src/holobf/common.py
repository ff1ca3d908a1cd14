#!/usr/bin/env python3
# Justin, 2026-01-12
"""Common exceptions for the holobf framework.

Every error raised deliberately by the library derives from 'HolobfError',
so that scripts can catch the whole family at once. The 'exit_code' class
attribute is what the command line returns when the error escapes.
"""

__all__ = [
    "HolobfError", "DomainError", "DegreeError", "NumericError",
    "ResourceError", "ConstructionError",
    "EXIT_SUCCESS", "EXIT_VERIFY_FAILED", "EXIT_USAGE", "EXIT_NUMERIC",
]

EXIT_SUCCESS = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


class HolobfError(Exception):
    exit_code = EXIT_USAGE


class DomainError(HolobfError, ValueError):
    """Input outside the domain of an operation.

    Examples: nonpositive scales, arity mismatch, disconnected graphs,
    inputs with the wrong parity, non-polynomial moments.
    """
    exit_code = EXIT_USAGE


class DegreeError(DomainError):
    """Top-form extraction requested on an expression of mixed degree."""


class NumericError(HolobfError, ArithmeticError):
    """Quadrature, extrapolation or fit did not reach the tolerance."""
    exit_code = EXIT_NUMERIC


class ResourceError(HolobfError, RuntimeError):
    """Combinatorial or dimensional budget exceeded."""
    exit_code = EXIT_NUMERIC


class ConstructionError(HolobfError, ValueError):
    """Invalid algebraic structure, e.g. a differential with d^2 != 0."""
    exit_code = EXIT_USAGE
