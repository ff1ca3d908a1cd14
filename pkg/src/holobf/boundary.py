#!/usr/bin/env python3
# Justin, 2026-03-02
"""Weights on the half-space C x R>=0 with the chiral boundary condition.

At the boundary t = 0 the alpha-fields are restricted to the (-1)-eigenspace
of time reflection: the 0-form part f_0(t) of an input is odd, the dt part
f_1(t) is even. Propagators become image kernels E - R^*E, each of which is
odd under reflecting both of its endpoints.

Two computations live here:

  1. The two-vertex boundary wheel, between an input phi = a(z)(f_0 + f_1 dt)
     at (z, t) and psi = b(w) dwbar (g_0 + g_1 ds) at (w, s). Its integrand
     factors into

         prefactor(T_0, T_1) * I_C(T_0, T_1) * I_R(T_0, T_1),

     each part integrated in closed form with 'gaussian.GaussianMoments'.
     As eps -> 0 the weight tends to c_an times the level functional
     (f_1(0) g_0'(0) - f_0'(0) g_1(0)) int b da, and 'extract_level' fits
     c_an across a family of inputs.

  2. Wheels with three vertices, assembled by 'weights.prepare_weight' with
     image kernels and integrated over the half-space by orthant moments.

Examples:

    >>> round(boundary_t_integral(0.1, 1), 4)
    0.4274
    >>> phi = ParityInput(a=1, f0="t", f1=0, sigma=4)
    >>> psi = ParityInput(a="z", f0=0, f1=1, sigma=4)
    >>> level_functional(phi, psi)  # doctest: +SKIP
    12.566370614359172

Changelog:
    2026-03-02, Justin: Init
    2026-03-06, Justin: Level fits over input families, three-vertex wheels.
"""

__all__ = [
    "ParityInput", "LevelReport", "validate_parity",
    "boundary_t_integral", "boundary_t_quadrature",
    "half_line_integral", "half_line_bound", "boundary_factors",
    "two_vertex_density", "two_vertex_boundary_weight", "level_functional",
    "extract_level", "boundary_wheel_weight", "boundary_anomaly_weight",
]

import dataclasses
import functools
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
import scipy.integrate
import sympy

from holobf.common import DomainError, NumericError
from holobf.exterior import T, check_scale, t, z, zbar
from holobf.gaussian import GaussianMoments
from holobf.graphs import ChiralGraph, graph_id
from holobf.kernels import Variant
from holobf.logging import get_logger
from holobf.mathutil import fit, integrate_t_box
from holobf.weights import (
    LegFactor, TestInput, WeightResult, epsilon_sweep, parse_polynomial, prepare_weight,
)

logger = get_logger(__name__)

# 4 (4 pi)^-3, from the two heat-kernel normalizations and the dz dt pairing
PREFACTOR = 4 / (4*np.pi)**3


@dataclasses.dataclass(frozen=True)
class ParityInput:
    """Boundary input a(z) (f_0(t) + f_1(t) dt), optionally times dzbar.

    Every factor carries the envelope exp(-(|z|^2 + t^2)/4 sigma).

    Args:
        a: Polynomial in z and zbar.
        f0: Odd polynomial in t, the 0-form component.
        f1: Even polynomial in t, the dt component.
        sigma: Envelope width.
        dzbar: Attach dzbar, for legs of wheels that need it.

    Raises:
        DomainError: If f0 is not odd or f1 is not even.
    """
    a: object = 1
    f0: object = "t"
    f1: object = 0
    sigma: object = 1
    dzbar: bool = False

    def __post_init__(self):
        object.__setattr__(self, "a", parse_polynomial(self.a, (z(0), zbar(0)), "Input factor a"))
        object.__setattr__(self, "f0", parse_polynomial(self.f0, (t(0),), "Input factor f0"))
        object.__setattr__(self, "f1", parse_polynomial(self.f1, (t(0),), "Input factor f1"))
        object.__setattr__(self, "sigma", check_scale(self.sigma))
        validate_parity(self)

    @property
    def is_zero(self) -> bool:
        return self.a == 0 or (self.f0 == 0 and self.f1 == 0)

    def leg_factor(self) -> LegFactor:
        """The same input as a 'weights.LegFactor'."""
        forms = ("dzbar", "dzbar^dt") if self.dzbar else ("1", "dt")
        components = tuple((w, f) for w, f in zip(forms, (self.f0, self.f1)) if f != 0)
        return LegFactor(self.a, components or ((forms[0], 0),), self.sigma)


def validate_parity(phi: ParityInput) -> None:
    """Checks the chiral boundary condition: f_0 odd, f_1 even."""
    s = t(0)
    if sympy.expand(phi.f0.subs(s, -s) + phi.f0) != 0:
        raise DomainError(f"0-form component f0 = {phi.f0} is not odd in t")
    if sympy.expand(phi.f1.subs(s, -s) - phi.f1) != 0:
        raise DomainError(f"dt component f1 = {phi.f1} is not even in t")


def _check_box(epsilon, L):
    if not 0 < epsilon < L:
        raise DomainError(f"Scale box needs 0 < eps < L, got eps={epsilon}, L={L}")

def _values(T0, T1):
    T0, T1 = np.broadcast_arrays(np.asarray(T0, dtype=np.float64), np.asarray(T1, dtype=np.float64))
    if np.any(T0 <= 0) or np.any(T1 <= 0):
        raise DomainError("Scales must be positive")
    return np.stack([T0.ravel(), T1.ravel()], axis=1), T0.shape

def _shaped(values, shape):
    values = np.real_if_close(values)
    return values.reshape(shape) if shape else values[0]


#############################
#  SCALE AND HALF-LINE PARTS #
#############################

def boundary_t_integral(epsilon, L) -> float:
    """Integral of 1/(T_0 + T_1) over the ordered region eps <= T_0 <= T_1 <= L.

    The value tends to L log 2 as eps -> 0.
    """
    _check_box(epsilon, L)
    e, L = float(epsilon), float(L)
    return L*np.log(2*L) - e*np.log(L + e) - L*np.log(e + L) + e*np.log(2*e)

def boundary_t_quadrature(epsilon, L, tol: float = 1e-10) -> float:
    """Same integral as 'boundary_t_integral' by adaptive 2D quadrature."""
    _check_box(epsilon, L)
    value, _ = scipy.integrate.dblquad(
        lambda T0, T1: 1 / (T0 + T1), epsilon, L, epsilon, lambda T1: T1,
        epsabs=0, epsrel=tol,
    )
    return value


def _half_line_exponents(sigma0=None, sigma1=None):
    s0, s1 = t(0), t(1)
    envelope = 0
    if sigma0 is not None:
        envelope = -s0**2/(4*sigma0) - s1**2/(4*sigma1)
    direct = -(s0 - s1)**2/(4*T(0)) - (s0 + s1)**2/(4*T(1))
    swapped = -(s0 + s1)**2/(4*T(0)) - (s0 - s1)**2/(4*T(1))
    return direct + envelope, swapped + envelope

@functools.lru_cache(maxsize=None)
def _half_line_gaussian() -> GaussianMoments:
    direct, _ = _half_line_exponents()
    return GaussianMoments(direct, (T(0), T(1)), half_space=True)

def half_line_integral(T0, T1):
    """int_{t,s >= 0} t s exp(-(t-s)^2/4T_0 - (t+s)^2/4T_1) dt ds, exactly."""
    values, shape = _values(T0, T1)
    return _shaped(_half_line_gaussian().integrate(t(0)*t(1), values), shape)

def half_line_bound(T0, T1):
    """(pi/2) sqrt(T_0 T_1) (T_0 + T_1), bounding 'half_line_integral'.

    In u = t + s and v = t - s, |t s| <= (u^2 + v^2)/4 and the full-plane
    Gaussian moments give pi sqrt(T_0 T_1)(T_0 + T_1). The quadrants t, s >= 0
    and t, s <= 0 contribute equally, hence the half.
    """
    T0, T1 = np.asarray(T0, dtype=np.float64), np.asarray(T1, dtype=np.float64)
    return np.pi/2 * np.sqrt(T0*T1) * (T0 + T1)


#############################
#  TWO-VERTEX BOUNDARY WHEEL #
#############################

def _on_second_vertex(expr):
    return expr.subs({z(0): z(1), zbar(0): zbar(1), t(0): t(1)}, simultaneous=True)

def _holomorphic_derivative(phi: ParityInput):
    """d/dz of a(z) exp(-|z|^2/4 sigma), divided by the envelope."""
    return sympy.expand(sympy.diff(phi.a, z(0)) - phi.a*zbar(0)/(4*phi.sigma))

@functools.lru_cache(maxsize=None)
def _two_vertex_parts(phi: ParityInput, psi: ParityInput):
    params = (T(0), T(1))
    z0, z1 = z(0), z(1)
    holomorphic = GaussianMoments(
        -(z0 - z1)*(zbar(0) - zbar(1))*(1/T(0) + 1/T(1))/4
        - z0*zbar(0)/(4*phi.sigma) - z1*zbar(1)/(4*psi.sigma),
        params,
    )
    holomorphic_integrand = sympy.expand(_holomorphic_derivative(phi) * _on_second_vertex(psi.a))

    direct, swapped = _half_line_exponents(phi.sigma, psi.sigma)
    times = [GaussianMoments(Q, params, half_space=True) for Q in (direct, swapped)]
    g0, g1 = _on_second_vertex(psi.f0), _on_second_vertex(psi.f1)
    time_integrand = sympy.expand(t(0)*phi.f1*g0 - t(1)*phi.f0*g1)
    return holomorphic, holomorphic_integrand, times, time_integrand

def _integrate(gaussian: GaussianMoments, integrand, values):
    if integrand == 0:
        return np.zeros(values.shape[0])
    return gaussian.integrate(integrand, values)

def _factors(values, phi, psi):
    holomorphic, h_integrand, times, t_integrand = _two_vertex_parts(phi, psi)
    T0, T1 = values[:, 0], values[:, 1]
    prefactor = PREFACTOR * (T0*T1)**-1.5 / (T0 + T1)
    I_C = _integrate(holomorphic, h_integrand, values)
    I_R = sum(_integrate(g, t_integrand, values) for g in times)
    return prefactor, I_C, I_R

def boundary_factors(T0, T1, phi: ParityInput, psi: ParityInput):
    """Returns (prefactor, I_C, I_R) of the two-vertex integrand at scales (T_0, T_1).

    'psi' is read as b(w) dwbar (g_0 + g_1 ds) whatever its 'dzbar' flag.
    """
    values, shape = _values(T0, T1)
    return tuple(_shaped(np.asarray(x), shape) for x in _factors(values, phi, psi))

def two_vertex_density(phi: ParityInput, psi: ParityInput):
    """Vectorized integrand T -> prefactor * I_C * I_R, for 'mathutil.integrate_t_box'."""
    def f(Ts):
        prefactor, I_C, I_R = _factors(np.asarray(Ts, dtype=np.float64), phi, psi)
        return np.real_if_close(prefactor * I_C * I_R)
    return f

def two_vertex_boundary_weight(
        epsilon, L, phi: ParityInput, psi: ParityInput,
        tol: float = 1e-6, atol: float = 1e-14,
        min_level: int = 2, max_level: int = None, strict: bool = True,
) -> WeightResult:
    """Two-vertex boundary weight over the ordered region eps <= T_0 <= T_1 <= L.

    The integrand is symmetric in (T_0, T_1), so the box [eps, L]^2 is
    integrated and halved.
    """
    _check_box(epsilon, L)
    if phi.is_zero or psi.is_zero:
        return WeightResult(0.0, 0.0, reason="zero input")
    value, error, level = integrate_t_box(
        two_vertex_density(phi, psi), epsilon, L, dim=2,
        tol=tol, atol=atol, min_level=min_level, max_level=max_level, strict=strict,
    )
    return WeightResult(value/2, error/2, level=level)


def level_functional(phi: ParityInput, psi: ParityInput):
    """(f_1(0) g_0'(0) - f_0'(0) g_1(0)) int b da d^2z, envelopes included."""
    s = t(0)
    coefficient = (
        phi.f1.subs(s, 0) * sympy.diff(psi.f0, s).subs(s, 0)
        - sympy.diff(phi.f0, s).subs(s, 0) * psi.f1.subs(s, 0)
    )
    if coefficient == 0:
        return 0.0
    integrand = sympy.expand(psi.a * _holomorphic_derivative(phi))
    if integrand == 0:
        return 0.0
    gaussian = GaussianMoments(-z(0)*zbar(0)*(1/(4*phi.sigma) + 1/(4*psi.sigma)))
    value = gaussian.integrate(integrand, np.zeros((1, 0)))[0] * complex(coefficient)
    return np.real_if_close(value).item()


@dataclasses.dataclass
class LevelReport:
    c_an: float
    c_an_error: float
    residual: float
    L: float
    table: List[Dict]

    def record(self) -> Dict:
        """JSON-ready record for 'datautil.write_report'."""
        return dataclasses.asdict(self)


def extract_level(
        epsilons: Sequence[float], L, family: Sequence[Tuple[ParityInput, ParityInput]],
        tol: float = 1e-6, order: float = 1, workers: int = 1, **quadrature,
) -> LevelReport:
    """Fits the eps -> 0 two-vertex weights of a family against the level functional.

    Each pair (phi, psi) is swept along 'epsilons' and Richardson-extrapolated,
    then weight ~ c_an * level_functional(phi, psi) is fitted by least squares.
    The residual is |weights - c_an levels| / |weights|.

    Raises:
        DomainError: For fewer than three distinct pairs.
        NumericError: If every level functional vanishes, or c_an is not
            distinguishable from zero.
    """
    family = list(family)
    if len(set(family)) < 3:
        raise DomainError(f"Level fit needs at least three distinct inputs, got {len(set(family))}")
    levels = np.array([np.real(level_functional(phi, psi)) for phi, psi in family], dtype=np.float64)
    if np.all(np.abs(levels) <= 1e-12 * max(1.0, np.max(np.abs(levels)))):
        raise NumericError("Degenerate family: every level functional vanishes")

    table, weights = [], []
    for (phi, psi), level in zip(family, levels):
        report = epsilon_sweep(
            lambda e, phi=phi, psi=psi: two_vertex_boundary_weight(e, L, phi, psi, tol=tol, **quadrature),
            epsilons, tol=tol, order=order, workers=workers,
        )
        weights.append(report.extrapolated)
        table.append({
            "level": float(level), "epsilons": report.epsilons, "values": report.values,
            "extrapolated": report.extrapolated, "extrapolation_error": report.extrapolation_error,
        })
    weights = np.array(weights)

    (c_an,) = fit(lambda x, c: c*x, levels, weights, errors=True)
    norm = np.linalg.norm(weights)
    if norm == 0 or c_an.n == 0 or abs(c_an.n) <= c_an.s:
        raise NumericError(f"Level constant indistinguishable from zero: {c_an}")
    residual = float(np.linalg.norm(weights - c_an.n*levels) / norm)
    logger.info("Level constant c_an = %s, fit residual %.3g", c_an, residual)
    return LevelReport(float(c_an.n), float(c_an.s), residual, float(L), table)


#############################
#  HALF-SPACE WHEELS         #
#############################

def _boundary_input(g: ChiralGraph, inputs: Union[ParityInput, Sequence[ParityInput]]) -> TestInput:
    if len(g.vertices) < 3:
        raise DomainError(
            f"Half-space wheels start at three vertices, got {len(g.vertices)}; "
            "use 'two_vertex_boundary_weight' for two"
        )
    if isinstance(inputs, ParityInput):
        inputs = (inputs,)
    for phi in inputs:
        if not isinstance(phi, ParityInput):
            raise DomainError(f"Boundary inputs must satisfy the parity condition, got {type(phi).__name__}")
    return TestInput(tuple(phi.leg_factor() for phi in inputs))

def boundary_wheel_weight(g: ChiralGraph, epsilon, L, inputs, **quadrature) -> WeightResult:
    """Weight of a wheel on the half-space, every edge an image propagator E - R^*E."""
    phi = _boundary_input(g, inputs)
    logger.debug("Boundary weight of %s", graph_id(g))
    return prepare_weight(g, phi, variant=Variant.IMAGE).evaluate(epsilon, L, **quadrature)

def boundary_anomaly_weight(g: ChiralGraph, edge, epsilon, L, inputs, **quadrature) -> WeightResult:
    """Half-space anomaly weight: image heat kernel on 'edge', image propagators elsewhere."""
    phi = _boundary_input(g, inputs)
    return prepare_weight(g, phi, distinguished=edge, variant=Variant.IMAGE).evaluate(epsilon, L, **quadrature)
