#!/usr/bin/env python3
# Justin, 2026-01-24
"""Gaussian moments for wheel integrands.

Two layers live here:

  1. Exact closed forms for the wheel measure in edge coordinates
     q_0, ..., q_{n-1},

         exp(-sum_i |q_i|^2/4T_i - |q_0 + ... + q_{n-1}|^2/4T_n),

     whose matrix per real direction is M = diag(1/T_i) + (1/T_n) 1 1^T,
     a rank-one shift of a diagonal. The inverse and determinant follow from
     the Sherman-Morrison formula and the matrix determinant lemma, and
     polynomial moments from Isserlis/Wick pairings with covariance 2 M^-1.

  2. 'GaussianMoments', the numeric workhorse of the weight evaluators.
     Given any quadratic exponent with a complex block (z_a zbar_b terms)
     and a real block (t_a t_b terms) whose coefficients depend on scale
     parameters, it integrates polynomial integrands against exp(exponent)
     for a whole batch of parameter values at once, optionally over the
     half-space t >= 0 in every time coordinate.

Integrals are always with respect to Lebesgue measure d^2z = dx dy and dt.

Examples:

    >>> M = RankOneShiftedMatrix([1, 2, 4])
    >>> inverse(M)
    Matrix([
    [ 6/7, -2/7],
    [-2/7, 10/7]])
    >>> det_inverse(RankOneShiftedMatrix([1, 1, 1]))
    1/3

Changelog:
    2026-01-24, Justin: Init
    2026-02-05, Justin: Batched moments, half-space orthant recursion.
"""

__all__ = [
    "RankOneShiftedMatrix", "WickMoment", "GaussianMoments",
    "inverse", "det_inverse", "wick_moments", "expectation",
    "normalization", "sample_monte_carlo", "orthant_probability",
]

import dataclasses
import functools
import itertools
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
import sympy

from holobf.common import DomainError, ResourceError
from holobf.exterior import RE_COORDINATE, check_scales, is_coordinate, t, z, zbar
from holobf.logging import get_logger

logger = get_logger(__name__)

# Orthant probabilities are closed-form only up to three dimensions
MAX_ORTHANT_DIMENSION = 3


class RankOneShiftedMatrix:
    """The matrix diag(1/T_0, ..., 1/T_{n-1}) + (1/T_n) 1 1^T.

    Scales may be numbers or positive symbols; all arithmetic is exact.
    """

    def __init__(self, Ts: Sequence):
        self.Ts = check_scales(Ts, min_arity=2)
        self.dimension = len(self.Ts) - 1
        self.diag = tuple(1/T for T in self.Ts[:-1])
        self.shift = 1/self.Ts[-1]

    def matrix(self) -> sympy.Matrix:
        n = self.dimension
        return sympy.Matrix(n, n, lambda i, j: (self.diag[i] if i == j else 0) + self.shift)

    def inverse(self) -> sympy.Matrix:
        """Sherman-Morrison: entries T_i delta_ij - T_i T_j/(T_0 + ... + T_n)."""
        n = self.dimension
        total = sum(self.Ts)
        Ts = self.Ts
        return sympy.Matrix(
            n, n, lambda i, j: sympy.cancel((Ts[i] if i == j else 0) - Ts[i]*Ts[j]/total)
        )

    def det_inverse(self):
        """Matrix determinant lemma: det M^-1 = T_0 ... T_n/(T_0 + ... + T_n)."""
        return sympy.cancel(sympy.Mul(*self.Ts) / sum(self.Ts))

    def __repr__(self):
        return f"RankOneShiftedMatrix({list(self.Ts)})"

def inverse(M: RankOneShiftedMatrix) -> sympy.Matrix:
    return M.inverse()

def det_inverse(M: RankOneShiftedMatrix):
    return M.det_inverse()


##########################
#  EXACT WICK MOMENTS    #
##########################

@functools.lru_cache(maxsize=None)
def _real_coordinates(i: int):
    return (
        sympy.Symbol(f"x{i}", real=True),
        sympy.Symbol(f"y{i}", real=True),
        t(i),
    )

def _isserlis(powers: Tuple[int, ...], covariance: sympy.Matrix, cache: Dict):
    """E[prod x_a^k_a] for a centered Gaussian with the given covariance."""
    if powers in cache:
        return cache[powers]
    if sum(powers) % 2:
        return sympy.Integer(0)
    if sum(powers) == 0:
        return sympy.Integer(1)
    i = next(a for a, k in enumerate(powers) if k > 0)
    reduced = list(powers)
    reduced[i] -= 1
    result = sympy.Integer(0)
    for j, k in enumerate(reduced):
        if k == 0:
            continue
        rest = list(reduced)
        rest[j] -= 1
        result += k * covariance[i, j] * _isserlis(tuple(rest), covariance, cache)
    result = sympy.cancel(result)
    cache[powers] = result
    return result


@dataclasses.dataclass(frozen=True)
class WickMoment:
    """Normalized moment of a real monomial under the wheel measure.

    'powers' is indexed as (x_0, ..., x_{n-1}, y_0, ..., y_{n-1}, t_0, ...,
    t_{n-1}), where z_i = x_i + i y_i. 'value' excludes the total mass, see
    'normalization'.
    """
    powers: Tuple[int, ...]
    value: object

    @property
    def degree(self):
        return sum(self.powers)


def _wheel_polynomial(poly, n: int):
    """Rewrites a coordinate polynomial over the real edge coordinates."""
    poly = sympy.sympify(poly)
    substitutions = {}
    for s in poly.free_symbols:
        match = RE_COORDINATE.match(s.name) if isinstance(s, sympy.Symbol) else None
        if match is None:
            continue
        head, index = match.group(1), int(match.group(2))
        if index >= n:
            raise DomainError(f"Coordinate '{s}' is not an edge coordinate of a {n}-dimensional wheel")
        x, y, _ = _real_coordinates(index)
        if head == "z":
            substitutions[s] = x + sympy.I*y
        elif head == "zbar":
            substitutions[s] = x - sympy.I*y
    expanded = sympy.expand(poly.subs(substitutions, simultaneous=True))
    coords = [c for i in range(n) for c in _real_coordinates(i)]
    # Reorder to (x..., y..., t...)
    coords = coords[0::3] + coords[1::3] + coords[2::3]
    try:
        return sympy.Poly(expanded, *coords), coords
    except sympy.PolynomialError:
        raise DomainError(f"'{poly}' is not a polynomial in the edge coordinates")

def wick_moments(poly, Ts: Sequence):
    """Lists the nonzero WickMoment of every monomial of 'poly'.

    Returns:
        List of (coefficient, WickMoment) pairs.

    Raises:
        DomainError: If 'poly' is not polynomial in the edge coordinates.
    """
    M = RankOneShiftedMatrix(Ts)
    n = M.dimension
    poly, _ = _wheel_polynomial(poly, n)
    covariance = 2 * M.inverse()
    caches = ({}, {}, {})
    moments = []
    for powers, coeff in zip(poly.monoms(), poly.coeffs()):
        value = sympy.Integer(1)
        for block in range(3):
            value *= _isserlis(tuple(powers[block*n:(block+1)*n]), covariance, caches[block])
            if value == 0:
                break
        if value != 0:
            moments.append((coeff, WickMoment(tuple(powers), value)))
    return moments

def normalization(Ts: Sequence):
    """Total mass (4 pi)^(3n/2) (T_0 ... T_n/(T_0 + ... + T_n))^(3/2)."""
    M = RankOneShiftedMatrix(Ts)
    return (4*sympy.pi)**sympy.Rational(3*M.dimension, 2) * M.det_inverse()**sympy.Rational(3, 2)

def expectation(poly, Ts: Sequence):
    """Integral of a polynomial against the wheel measure, exactly.

    The measure is exp(-sum |q_i|^2/4T_i - |sum q_i|^2/4T_n) over the edge
    coordinates q_0, ..., q_{n-1}, i.e. unnormalized: expectation(1) is the
    total mass.

    Examples:
        >>> T0, T1, T2 = sympy.symbols("T0 T1 T2", positive=True)
        >>> sympy.simplify(expectation(t(0)*t(1), [T0, T1, T2]) / expectation(1, [T0, T1, T2]))
        -2*T0*T1/(T0 + T1 + T2)
    """
    total = sum(
        (coeff * moment.value for coeff, moment in wick_moments(poly, Ts)),
        sympy.Integer(0),
    )
    return sympy.factor(sympy.cancel(total)) * normalization(Ts)

def sample_monte_carlo(poly, Ts: Sequence, samples: int = 10**6, seed: int = 0, chunk: int = 2**17):
    """Monte Carlo estimate of 'expectation' for numeric scales.

    Returns:
        Tuple (mean, standard error), both scaled by the total mass.
    """
    M = RankOneShiftedMatrix(Ts)
    if not all(T.is_number for T in M.Ts):
        raise DomainError("Monte Carlo sampling needs numeric scales")
    n = M.dimension
    poly, coords = _wheel_polynomial(poly, n)
    re, im = sympy.expand(poly.as_expr()).as_real_imag()
    f_re = sympy.lambdify(coords, re, "numpy")
    f_im = sympy.lambdify(coords, im, "numpy") if im != 0 else None

    covariance = np.array((2 * M.inverse()).evalf(), dtype=np.float64)
    cholesky = np.linalg.cholesky(covariance)
    rng = np.random.default_rng(seed)

    sums = np.zeros(2)
    squares = np.zeros(2)
    remaining = samples
    while remaining > 0:
        size = min(chunk, remaining)
        remaining -= size
        draws = rng.standard_normal((size, 3*n)).reshape(size, 3, n) @ cholesky.T
        args = list(draws.transpose(1, 2, 0).reshape(3*n, size))
        for k, f in enumerate((f_re, f_im)):
            if f is None:
                continue
            values = np.broadcast_to(np.asarray(f(*args), dtype=np.float64), (size,))
            sums[k] += values.sum()
            squares[k] += np.square(values).sum()

    means = sums / samples
    variances = (squares - samples*np.square(means)) / (samples - 1)
    mass = float(normalization(Ts))
    stderr = mass * float(np.sqrt(variances.sum() / samples))
    if f_im is None:
        return mass * means[0], stderr
    return mass * complex(means[0], means[1]), stderr


##########################
#  BATCHED MOMENTS       #
##########################

def orthant_probability(covariance: np.ndarray) -> np.ndarray:
    """P(X >= 0) for centered Gaussians, batched over the leading axis.

    Args:
        covariance: Array of shape (N, m, m).

    Raises:
        ResourceError: If m exceeds the closed-form limit of three.
    """
    covariance = np.asarray(covariance)
    N, m = covariance.shape[0], covariance.shape[-1]
    if m > MAX_ORTHANT_DIMENSION:
        raise ResourceError(f"Orthant probabilities beyond {MAX_ORTHANT_DIMENSION} dimensions are not supported (got {m})")
    if m == 0:
        return np.ones(N)
    if m == 1:
        return np.full(N, 0.5)
    std = np.sqrt(np.diagonal(covariance, axis1=1, axis2=2))
    rho = covariance / (std[:, :, None] * std[:, None, :])
    if m == 2:
        return 0.25 + np.arcsin(rho[:, 0, 1]) / (2*np.pi)
    pairs = rho[:, 0, 1], rho[:, 0, 2], rho[:, 1, 2]
    return 0.125 + sum(np.arcsin(r) for r in pairs) / (4*np.pi)


class GaussianMoments:
    """Batched integrals of polynomials against exp(Q) for a quadratic Q.

    The exponent may contain z_a*zbar_b and t_a*t_b terms only. Their
    coefficients are functions of 'params', and every evaluation takes an
    (N, len(params)) array of parameter values.

    Args:
        exponent: Quadratic form Q in the coordinates z_i, zbar_i, t_i.
        params: Symbols the coefficients of Q (and of integrands) depend on.
        half_space: Integrate over t_i >= 0 for every time coordinate.

    Examples:
        >>> g = GaussianMoments(-z(0)*zbar(0) - t(0)**2)
        >>> g.integrate(1, np.zeros((1, 0)))  # doctest: +SKIP
        array([5.56832800])   # pi^(3/2)
    """

    def __init__(self, exponent, params: Sequence = (), half_space: bool = False):
        exponent = sympy.expand(sympy.sympify(exponent))
        self.params = tuple(params)
        self.half_space = half_space
        self._compiled = {}

        coords = sorted((s for s in exponent.free_symbols if is_coordinate(s)), key=lambda s: s.name)
        indices = {"z": set(), "t": set()}
        for s in coords:
            head, index = RE_COORDINATE.match(s.name).groups()
            indices["t" if head == "t" else "z"].add(int(index))
        self.z_indices = tuple(sorted(indices["z"]))
        self.t_indices = tuple(sorted(indices["t"]))
        self.zs = tuple(z(i) for i in self.z_indices)
        self.zbars = tuple(zbar(i) for i in self.z_indices)
        self.ts = tuple(t(i) for i in self.t_indices)
        self.coordinates = self.zs + self.zbars + self.ts

        if half_space and len(self.ts) > MAX_ORTHANT_DIMENSION:
            raise ResourceError(
                f"Half-space moments support at most {MAX_ORTHANT_DIMENSION} time coordinates, got {len(self.ts)}"
            )
        try:
            poly = sympy.Poly(exponent, *self.coordinates)
        except sympy.PolynomialError:
            raise DomainError(f"Exponent '{exponent}' is not polynomial in its coordinates")
        if not poly.is_homogeneous or poly.total_degree() != 2:
            raise DomainError(f"Exponent '{exponent}' is not a homogeneous quadratic form")

        mz, mt = len(self.zs), len(self.ts)
        xy_entries = [[sympy.Integer(0)]*mz for _ in range(mz)]
        t_entries = [[sympy.Integer(0)]*mt for _ in range(mt)]
        for monom, coeff in zip(poly.monoms(), poly.coeffs()):
            a_z, a_zbar, a_t = monom[:mz], monom[mz:2*mz], monom[2*mz:]
            if sum(a_z) == 1 and sum(a_zbar) == 1:
                xy_entries[a_z.index(1)][a_zbar.index(1)] = -coeff
            elif sum(a_t) == 2:
                idx = [i for i, k in enumerate(a_t) for _ in range(k)]
                if idx[0] == idx[1]:
                    t_entries[idx[0]][idx[0]] = -coeff
                else:
                    t_entries[idx[0]][idx[1]] = t_entries[idx[1]][idx[0]] = -coeff/2
            else:
                raise DomainError(f"Exponent '{exponent}' mixes the complex and time blocks or lacks a zbar partner")
        self._xy = self._compile(xy_entries)
        self._t = self._compile(t_entries)

    def _compile(self, entries):
        compiled = []
        for row in entries:
            compiled.append([self._lambdify(e) for e in row])
        return compiled

    def _lambdify(self, expr):
        extra = {s for s in sympy.sympify(expr).free_symbols if s not in self.params}
        if extra:
            raise DomainError(f"Unexpected symbols {sorted(map(str, extra))} outside the parameters")
        return sympy.lambdify(self.params, expr, "numpy")

    @staticmethod
    def _apply(func, values):
        N = values.shape[0]
        return np.broadcast_to(func(*values.T), (N,))

    def _matrices(self, values):
        N = values.shape[0]
        A_xy = np.zeros((N, len(self.zs), len(self.zs)), dtype=np.complex128)
        A_t = np.zeros((N, len(self.ts), len(self.ts)))
        for i, row in enumerate(self._xy):
            for j, f in enumerate(row):
                A_xy[:, i, j] = self._apply(f, values)
        for i, row in enumerate(self._t):
            for j, f in enumerate(row):
                A_t[:, i, j] = self._apply(f, values)
        if not np.any(A_xy.imag):
            A_xy = A_xy.real
        for name, A in (("complex", A_xy), ("time", A_t)):
            if A.shape[-1] == 0:
                continue
            try:
                np.linalg.cholesky((A + np.conj(np.swapaxes(A, 1, 2))) / 2)
            except np.linalg.LinAlgError:
                raise DomainError(f"Gaussian exponent is not negative definite in the {name} block")
        return A_xy, A_t

    def normalization(self, values) -> np.ndarray:
        """Integral of exp(Q) over the whole space, per parameter row."""
        values = self._check_values(values)
        A_xy, A_t = self._matrices(values)
        return self._normalization(A_xy, A_t)

    def _normalization(self, A_xy, A_t):
        mz, mt = A_xy.shape[-1], A_t.shape[-1]
        norm = np.pi**mz / np.linalg.det(A_xy) if mz else 1.0
        if mt:
            norm = norm * np.pi**(mt/2) / np.sqrt(np.linalg.det(A_t))
        return np.real_if_close(norm)

    def _check_values(self, values):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim == 1:
            values = values.reshape(-1, len(self.params)) if self.params else values.reshape(-1, 0)
        if values.ndim != 2 or values.shape[1] != len(self.params):
            raise DomainError(f"Expected parameter rows of length {len(self.params)}, got shape {values.shape}")
        return values

    def monomials(self, integrand):
        """Splits a polynomial integrand into (z, zbar, t powers, coefficient)."""
        integrand = sympy.expand(sympy.sympify(integrand))
        outside = {
            s for s in integrand.free_symbols
            if is_coordinate(s) and s not in self.coordinates
        }
        if outside:
            raise DomainError(
                f"Integrand depends on {sorted(map(str, outside))}, which the Gaussian does not bound"
            )
        try:
            poly = sympy.Poly(integrand, *self.coordinates)
        except sympy.PolynomialError:
            raise DomainError(f"Integrand '{integrand}' is not polynomial in the coordinates")
        mz = len(self.zs)
        for monom, coeff in zip(poly.monoms(), poly.coeffs()):
            yield monom[:mz], monom[mz:2*mz], monom[2*mz:], coeff

    def compile(self, integrand):
        """Monomials of the integrand with coefficients lambdified once.

        Repeated integration of the same integrand, e.g. chunk by chunk over a
        grid of scales, reuses the compiled list.
        """
        integrand = sympy.sympify(integrand)
        if integrand not in self._compiled:
            self._compiled[integrand] = [
                (a_z, a_zbar, a_t, self._lambdify(coeff))
                for a_z, a_zbar, a_t, coeff in self.monomials(integrand)
            ]
        return self._compiled[integrand]

    def integrate(self, integrand, values) -> np.ndarray:
        """Integral of integrand * exp(Q) for every parameter row.

        Args:
            integrand: Polynomial in the coordinates of Q, coefficients in
                the parameters.
            values: Array (N, len(params)).

        Returns:
            Array of N values, real unless the integrand has complex
            coefficients.
        """
        values = self._check_values(values)
        N = values.shape[0]
        A_xy, A_t = self._matrices(values)
        # E[z_a zbar_b] = (A^-1)_ba for exp(-sum A_ab z_a zbar_b)
        C = np.swapaxes(np.linalg.inv(A_xy), 1, 2) if len(self.zs) else A_xy
        covariance = np.linalg.inv(2*A_t) if len(self.ts) else A_t
        norm = self._normalization(A_xy, A_t)

        z_cache, t_cache = {}, {}
        total = np.zeros(N, dtype=np.result_type(C.dtype, np.float64))
        for a_z, a_zbar, a_t, func in self.compile(integrand):
            if sum(a_z) != sum(a_zbar):
                continue
            if not self.half_space and sum(a_t) % 2:
                continue
            moment = _complex_moment(a_z, a_zbar, C, z_cache)
            if self.half_space:
                moment = moment * _orthant_moment(
                    tuple(range(len(self.ts))), a_t, covariance, t_cache)
            else:
                moment = moment * _real_moment(a_t, covariance, t_cache)
            c = self._apply(func, values)
            total = total + c * moment
        return np.real_if_close(total * norm, tol=1000)


def _complex_moment(alpha, beta, C, cache):
    """Wick pairing of z^alpha zbar^beta with E[z_a zbar_b] = C[a, b]."""
    key = (alpha, beta)
    if key in cache:
        return cache[key]
    if sum(alpha) == 0:
        return 1.0
    a = next(i for i, k in enumerate(alpha) if k > 0)
    reduced = list(alpha)
    reduced[a] -= 1
    result = 0.0
    for b, k in enumerate(beta):
        if k == 0:
            continue
        rest = list(beta)
        rest[b] -= 1
        result = result + k * C[:, a, b] * _complex_moment(tuple(reduced), tuple(rest), C, cache)
    cache[key] = result
    return result

def _real_moment(powers, covariance, cache):
    """Isserlis recursion, E[t^powers] for t ~ N(0, covariance)."""
    if sum(powers) % 2:
        return 0.0
    if sum(powers) == 0:
        return 1.0
    if powers in cache:
        return cache[powers]
    i = next(a for a, k in enumerate(powers) if k > 0)
    reduced = list(powers)
    reduced[i] -= 1
    result = 0.0
    for j, k in enumerate(reduced):
        if k == 0:
            continue
        rest = list(reduced)
        rest[j] -= 1
        result = result + k * covariance[:, i, j] * _real_moment(tuple(rest), covariance, cache)
    cache[powers] = result
    return result

def _orthant_moment(region, powers, covariance, cache):
    """E[t^powers 1{t_region >= 0}] for t ~ N(0, covariance) on 'region'.

    Gaussian integration by parts in a coordinate i with a positive power
    gives, besides the usual pairing terms, a boundary term on each face
    t_j = 0. On that face the remaining coordinates are again Gaussian,
    with precision the sub-block of the original precision.

    Args:
        region: Indices (into the full time block) still constrained and
            random; 'powers' and 'covariance' are restricted to it.
    """
    key = (region, powers)
    if key in cache:
        return cache[key]
    if sum(powers) == 0:
        result = orthant_probability(covariance)
        cache[key] = result
        return result

    i = next(a for a, k in enumerate(powers) if k > 0)
    reduced = list(powers)
    reduced[i] -= 1
    result = 0.0
    for j in range(len(region)):
        if reduced[j] > 0:
            rest = list(reduced)
            rest[j] -= 1
            result = result + reduced[j] * covariance[:, i, j] * _orthant_moment(
                region, tuple(rest), covariance, cache)
        else:
            # Boundary face t_j = 0
            density = 1 / np.sqrt(2*np.pi*covariance[:, j, j])
            keep = [a for a in range(len(region)) if a != j]
            face_powers = tuple(reduced[a] for a in keep)
            face_region = tuple(region[a] for a in keep)
            if keep:
                precision = np.linalg.inv(covariance)[:, keep][:, :, keep]
                face_covariance = np.linalg.inv(precision)
            else:
                face_covariance = covariance[:, :0, :0]
            result = result + covariance[:, i, j] * density * _orthant_moment(
                face_region, face_powers, face_covariance, cache)
    cache[key] = result
    return result
