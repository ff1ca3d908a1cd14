#!/usr/bin/env python3
# Justin, 2026-01-14
"""Numerical helpers shared by the weight and boundary evaluators.

The scale integrals of this library live on boxes [eps, L]^d with power-law
behaviour near eps, so they are integrated in u = log T, where the integrand
is smooth and the trapezoid rule has an even-power error expansion.
Romberg extrapolation across grid refinements then gives both the value and
an error estimate.

Changelog:
    2026-01-14, Justin: Init, Romberg tables after the cora quadrature.
    2026-02-03, Justin: Chunked tensor grids, curve fitting with ufloats.
"""

__all__ = [
    "romberg_table", "richardson", "log_tensor_trapezoid", "integrate_t_box",
    "fit",
]

import inspect

import numpy as np
import scipy.optimize
import uncertainties

from holobf.common import DomainError, NumericError
from holobf.logging import get_logger

logger = get_logger(__name__)

# Upper refinement level per dimension, keeping the finest grid near 10^6 points
DEFAULT_MAX_LEVEL = {1: 14, 2: 9, 3: 7, 4: 5}


def romberg_table(values, ratio: float = 2, order: float = 2, step: float = 2):
    """Builds the Richardson extrapolation table of a refinement sequence.

    The k-th value is assumed to approximate the limit with errors
    c_1 h_k^order + c_2 h_k^(order+step) + ..., and h_{k+1} = h_k/ratio.

    Examples:
        >>> romberg_table([1.0, 0.5], ratio=10, order=1)[1, 1]  # doctest: +SKIP
        0.4444444444444444

    Note:
        The defaults (2, 2, 2) recover the classical Romberg table for the
        trapezoid rule, i.e. r[i,j] = r[i,j-1] + (r[i,j-1]-r[i-1,j-1])/(4^j-1).
    """
    values = np.asarray(values)
    n = len(values)
    dtype = np.result_type(values.dtype, np.float64)
    r = np.full((n, n), np.nan, dtype=dtype)
    r[:, 0] = values
    for i in range(1, n):
        for j in range(1, i+1):
            factor = ratio ** (order + (j-1)*step)
            r[i, j] = r[i, j-1] + (r[i, j-1] - r[i-1, j-1]) / (factor - 1)
    return r

def richardson(values, ratio: float = 2, order: float = 2, step: float = 2):
    """Returns (extrapolated value, error estimate) of a refinement sequence.

    The error estimate is the difference of the last two diagonal entries.
    """
    if len(values) == 0:
        raise DomainError("Richardson extrapolation needs at least one value")
    r = romberg_table(values, ratio, order, step)
    n = len(values)
    best = r[n-1, n-1]
    error = abs(r[n-1, n-1] - r[n-2, n-2]) if n > 1 else np.inf
    return best, error


def _box_bounds(lower, upper, dim):
    lower = np.broadcast_to(np.asarray(lower, dtype=np.float64), (dim,))
    upper = np.broadcast_to(np.asarray(upper, dtype=np.float64), (dim,))
    if np.any(lower <= 0) or np.any(upper <= lower):
        raise DomainError(f"Invalid scale box: lower={lower}, upper={upper}")
    return lower, upper

def log_tensor_trapezoid(f, lower, upper, dim: int, points: int, chunk: int = 2**16):
    """Tensor trapezoid rule in u = log T over the box [lower, upper]^dim.

    Args:
        f: Vectorized integrand, receives an (N, dim) array of scales T and
            returns N real or complex values.
        lower, upper: Scalars or per-axis bounds, all positive.
        dim: Number of scale variables.
        points: Grid points per axis, including both endpoints.
        chunk: Maximum number of grid points evaluated per call of 'f'.
    """
    if dim == 0:
        return np.asarray(f(np.zeros((1, 0))))[0]
    lower, upper = _box_bounds(lower, upper, dim)
    if points < 2:
        raise DomainError("Trapezoid rule needs at least two points per axis")

    us = np.linspace(np.log(lower), np.log(upper), points, axis=1)  # (dim, points)
    h = (np.log(upper) - np.log(lower)) / (points - 1)
    ws = np.ones((dim, points)) * h[:, None]
    ws[:, 0] *= 0.5
    ws[:, -1] *= 0.5

    total = 0.0
    size = points ** dim
    for start in range(0, size, chunk):
        flat = np.arange(start, min(start + chunk, size))
        idx = np.unravel_index(flat, (points,) * dim)
        u = np.stack([us[a][idx[a]] for a in range(dim)], axis=1)
        T = np.exp(u)
        weight = np.prod([ws[a][idx[a]] for a in range(dim)], axis=0) * np.prod(T, axis=1)
        total = total + np.sum(weight * np.asarray(f(T)))
    return total

def integrate_t_box(
        f, lower, upper, dim: int,
        tol: float = 1e-6,
        atol: float = 0.0,
        min_level: int = 2,
        max_level: int = None,
        chunk: int = 2**16,
        strict: bool = True,
):
    """Integrates f(T) over a box of scales with Romberg refinement.

    Level k uses 2^k+1 points per axis. Refinement stops once the difference
    of successive Romberg diagonal entries is within max(tol*|value|, atol).

    Returns:
        Tuple (value, error estimate, level reached).

    Raises:
        NumericError: If the tolerance is not met at 'max_level' and 'strict'.
            Otherwise a warning is logged and the best estimate is returned.

    Examples:
        >>> f = lambda T: T[:,0]**-1.5
        >>> integrate_t_box(f, 0.1, 1, dim=1)  # doctest: +SKIP
        (4.324555320336759, ..., ...)
    """
    if dim == 0:
        return log_tensor_trapezoid(f, lower, upper, 0, 2), 0.0, 0
    if max_level is None:
        max_level = max(min_level, DEFAULT_MAX_LEVEL.get(dim, 4))
    min_level = min(min_level, max_level)

    estimates = []
    details = []
    value, error = np.nan, np.inf
    for k, level in enumerate(range(min_level, max_level + 1)):
        estimates.append(
            log_tensor_trapezoid(f, lower, upper, dim, 2**level + 1, chunk=chunk)
        )
        value, error = richardson(estimates)
        details.append(f"level {level}: {estimates[-1]} -> {value} (err {error:.3g})")
        if k > 0 and error <= max(tol * abs(value), atol):
            logger.debug("T-box converged", extra={"details": details})
            return value, float(error), level

    if len(estimates) == 1 and not strict:
        return value, float(error), max_level  # single fixed grid, no estimate
    message = f"T-box quadrature did not converge: value={value}, error={error}, tol={tol}"
    if strict:
        raise NumericError(message)
    logger.warning(message, extra={"details": details})
    return value, float(error), max_level


def fit(f, xs, ys, errors: bool = False, labels: bool = False, *args, **kwargs):
    """Least-squares fit via 'scipy.optimize.curve_fit'.

    Returns plain parameters by default; with 'errors', parameters are
    'uncertainties.ufloat' objects carrying the standard error, and with
    'labels', pretty strings "name = value ± std" are returned as well.
    """
    popt, pcov = scipy.optimize.curve_fit(f, xs, ys, *args, **kwargs)
    if not errors and not labels:
        return popt

    perr = np.sqrt(np.abs(np.diag(pcov)))
    pvals = [uncertainties.ufloat(*p) for p in zip(popt, perr)]
    argnames = list(inspect.signature(f).parameters.keys())[1:]
    pretty_pvals = [str(pval).split("+/-") for pval in pvals]
    plabels = [f"{a} = {v} ± {u}" for a, (v, u) in zip(argnames, pretty_pvals)]

    ret = pvals if errors else popt
    if labels:
        return ret, plabels
    return ret
