#!/usr/bin/env python3
# Justin, 2026-01-20
"""Heat kernels, propagator integrands and the operators acting on them.

Conventions, fixed once for the whole library:

    k_T(q)  = (4 pi T)^(-3/2) exp(-(z zbar + t^2)/4T)
    mu_V    = dzbar ^ dz ^ dt
    K_T     = k_T mu_V                     (heat kernel, pulled back along q_a - q_b)
    Q       = dzbar ^ d/dzbar + dt ^ d/dt  (wedged on the left)
    Q*      = 4 i_dzbar d/dz + i_dt d/dt
    E_T     = Q*(K_T) = (k_T/T) (-zbar dz^dt + (t/2) dz^dzbar)
    G_T     = k_T dz
    lambda  = c1 dzbar d/dt + c2 dt d/dz,  lambda G_T = E_T

so that QQ* + Q*Q = 4 d/dz d/dzbar + d^2/dt^2 is the flat Laplacian on
C x R, and d/dT k_T equals the Laplacian of k_T.

Single-coordinate kernels live at vertex 0, whose coordinates stand for the
difference q = (z - w, t - s); 'endpoints=(a, b)' pulls them back along
q_a - q_b. Products over a wheel use the edge frame: edge i carries the
coordinates q_i, and the closing edge carries q_n = q_0 + ... + q_{n-1}.

Changelog:
    2026-01-20, Justin: Init
    2026-02-02, Justin: Image kernels for the half-space.
    2026-02-10, Justin: Graded commutators of constant-coefficient operators.
"""

__all__ = [
    "Variant", "KernelForm", "DiffOperator",
    "heat_density", "heat_kernel", "gaussian_form", "propagator_integrand",
    "product_gaussian", "product_propagator", "restrict_to_loop",
    "image_kernel", "image_propagator_integrand", "image_part",
    "gauge_adjoint", "gauge_differential", "flat_laplacian",
    "laplacian_residual", "heat_equation_residual",
    "holomorphic_edge", "reflect_time",
    "lambda_operator", "zeta", "tau", "dz_minus_zeta", "dt_minus_tau",
    "holomorphic_derivative", "commutator", "solve_lambda_constants",
    "lambda_residual", "product_residual", "zeta_residuals", "tau_residuals",
]

import dataclasses
import enum
import itertools
from typing import Iterable, Optional, Sequence, Tuple

import sympy

from holobf import constants
from holobf.common import ConstructionError, DegreeError, DomainError
from holobf.exterior import (
    FormExpression, check_scale, check_scales, derive, gaussian_product, interior, wedge,
    dz, dzbar, dt, z, zbar, t, is_coordinate,
)
from holobf.logging import get_logger

logger = get_logger(__name__)


class Variant(enum.Enum):
    BULK = "bulk"
    IMAGE = "image"


def _coordinates(v: int):
    return z(v), zbar(v), t(v)

def _difference_map(a: int, b: int):
    """Pullback data of the difference map q_a - q_b from vertex 0."""
    coord_map = {
        z(0): z(a) - z(b), zbar(0): zbar(a) - zbar(b), t(0): t(a) - t(b),
    }
    generator_map = {
        dz(0): FormExpression.generator(dz(a)) - FormExpression.generator(dz(b)),
        dzbar(0): FormExpression.generator(dzbar(a)) - FormExpression.generator(dzbar(b)),
        dt(0): FormExpression.generator(dt(a)) - FormExpression.generator(dt(b)),
    }
    return coord_map, generator_map

def _relabel(F: FormExpression, vertex: int) -> FormExpression:
    """Moves a vertex-0 expression to 'vertex'."""
    if vertex == 0:
        return F
    coord_map = dict(zip(_coordinates(0), _coordinates(vertex)))
    generator_map = {
        g(0): FormExpression.generator(g(vertex)) for g in (dz, dzbar, dt)
    }
    return F.pullback(coord_map, generator_map)


@dataclasses.dataclass(frozen=True)
class KernelForm:
    """Form-valued kernel with its coordinate arity and bulk/image variant.

    'arity' is 1 for a kernel in the single difference coordinate, 2 once
    pulled back to two vertices, and n+1 for products over a wheel.
    """
    expression: FormExpression
    arity: int
    variant: Variant = Variant.BULK
    scale: Optional[object] = None

    def pullback(self, a: int, b: int) -> "KernelForm":
        if self.arity != 1:
            raise DomainError("Only single-coordinate kernels can be pulled back")
        if a == b:
            raise DomainError("Pullback needs two distinct endpoints")
        coord_map, generator_map = _difference_map(a, b)
        return KernelForm(
            self.expression.pullback(coord_map, generator_map), 2,
            self.variant, self.scale,
        )

    def render(self):
        return self.expression.render()

def _kernel(expression, T, endpoints, variant=Variant.BULK):
    kernel = KernelForm(expression, 1, variant, T)
    if endpoints is None:
        return kernel
    return kernel.pullback(*endpoints)


# Kernels in a single difference coordinate

def _heat_density_vertex(T, v: int = 0) -> FormExpression:
    zv, zbarv, tv = _coordinates(v)
    return FormExpression.gaussian(
        -(zv*zbarv + tv**2) / (4*T),
        coeff=(4*sympy.pi*T)**sympy.Rational(-3, 2),
    )

def _volume_form(v: int = 0) -> FormExpression:
    return FormExpression.word([dzbar(v), dz(v), dt(v)])

def heat_density(T, endpoints: Optional[Tuple[int, int]] = None) -> KernelForm:
    """The scalar heat density k_T, normalized to unit mass."""
    T = check_scale(T)
    return _kernel(_heat_density_vertex(T), T, endpoints)

def heat_kernel(T, endpoints: Optional[Tuple[int, int]] = None) -> KernelForm:
    """K_T = k_T dzbar^dz^dt.

    Raises:
        DomainError: If T is not positive.

    Examples:
        >>> from holobf.exterior import evaluate
        >>> K = heat_kernel(1).expression
        >>> evaluate(K, {"z0": 0, "t0": 0}, 1, [dzbar(0), dz(0), dt(0)])  # doctest: +SKIP
        0.022446689113355783
    """
    T = check_scale(T)
    return _kernel(wedge(_heat_density_vertex(T), _volume_form()), T, endpoints)

def gaussian_form(T, endpoints: Optional[Tuple[int, int]] = None) -> KernelForm:
    """G_T = k_T dz."""
    T = check_scale(T)
    return _kernel(
        wedge(_heat_density_vertex(T), FormExpression.generator(dz(0))), T, endpoints,
    )

def propagator_integrand(T, endpoints: Optional[Tuple[int, int]] = None) -> KernelForm:
    """E_T = Q*(K_T); the mollified propagator is E_T integrated over [eps, L]."""
    T = check_scale(T)
    K = wedge(_heat_density_vertex(T), _volume_form())
    return _kernel(gauge_adjoint(K, 0), T, endpoints)


# Gauge operators

def gauge_adjoint(F: FormExpression, vertex: int = 0) -> FormExpression:
    """Q* = 4 i_dzbar d/dz + i_dt d/dt in the coordinates of one vertex."""
    zv, _, tv = _coordinates(vertex)
    return (
        4 * interior(derive(F, zv), dzbar(vertex))
        + interior(derive(F, tv), dt(vertex))
    )

def gauge_differential(F: FormExpression, vertex: int = 0) -> FormExpression:
    """Q = dzbar ^ d/dzbar + dt ^ d/dt in the coordinates of one vertex."""
    _, zbarv, tv = _coordinates(vertex)
    return (
        wedge(FormExpression.generator(dzbar(vertex)), derive(F, zbarv))
        + wedge(FormExpression.generator(dt(vertex)), derive(F, tv))
    )

def flat_laplacian(F: FormExpression, vertex: int = 0) -> FormExpression:
    zv, zbarv, tv = _coordinates(vertex)
    return 4*derive(derive(F, zv), zbarv) + derive(derive(F, tv), tv)

def laplacian_residual(F: FormExpression, vertex: int = 0) -> FormExpression:
    """(QQ* + Q*Q)F minus the flat Laplacian of F; vanishes identically."""
    QQs = gauge_differential(gauge_adjoint(F, vertex), vertex)
    QsQ = gauge_adjoint(gauge_differential(F, vertex), vertex)
    return QQs + QsQ - flat_laplacian(F, vertex)

def heat_equation_residual(T) -> FormExpression:
    """d/dT k_T minus the flat Laplacian of k_T, for a scale symbol T."""
    T = check_scale(T)
    if not isinstance(T, sympy.Symbol):
        raise DomainError("The heat equation is checked for a scale symbol")
    k = _heat_density_vertex(T)
    return derive(k, T) - flat_laplacian(k)


# Edge and reflection operations

def holomorphic_edge(F: FormExpression, alpha: int, beta: int) -> FormExpression:
    """Drops the terms of a two-point form carrying dz at the beta end.

    The ends are those of the propagator, oriented from its alpha input to
    its beta output. The alpha input attaches to the beta-leg of a vertex,
    which is where the (1,*)-type factor dz survives.
    """
    del alpha  # the alpha end keeps every generator
    return FormExpression(
        (tag, word, c) for tag, word, c in F.terms() if dz(beta) not in word
    )

def reflect_time(F: FormExpression, vertices: Iterable[int]) -> FormExpression:
    """Pullback along t -> -t (hence dt -> -dt) at the given vertices."""
    vertices = list(vertices)
    coord_map = {t(v): -t(v) for v in vertices}
    generator_map = {dt(v): FormExpression.generator(dt(v), -1) for v in vertices}
    return F.pullback(coord_map, generator_map)

def image_part(T, endpoints: Tuple[int, int] = (0, 1), kernel: str = "propagator") -> FormExpression:
    """Reflected summand R_b^* of a two-point kernel, with b the beta end.

    For the propagator, R_b^* E_T = Q*_a(R_b^* K_T), since Q* at the alpha
    end commutes with reflecting the beta end.
    """
    a, b = endpoints
    builder = {"propagator": propagator_integrand, "heat": heat_kernel}[kernel]
    return reflect_time(builder(T, (a, b)).expression, [b])

def image_kernel(T, endpoints: Tuple[int, int] = (0, 1)) -> KernelForm:
    """K^chi_T = K_T - R_b^* K_T, vanishing where either time is zero."""
    T = check_scale(T)
    K = heat_kernel(T, endpoints).expression
    return KernelForm(K - image_part(T, endpoints, "heat"), 2, Variant.IMAGE, T)

def image_propagator_integrand(T, endpoints: Tuple[int, int] = (0, 1)) -> KernelForm:
    """E~_T = E_T - E*_T with E*_T = R_b^* E_T."""
    T = check_scale(T)
    E = propagator_integrand(T, endpoints).expression
    return KernelForm(E - image_part(T, endpoints), 2, Variant.IMAGE, T)


# Constant-coefficient differential operators

def _sort_vars(vars_):
    return tuple(sorted(vars_, key=lambda s: s.name))

class DiffOperator:
    """Finite sum of (form coefficient) ^ (product of partial derivatives).

    Coefficients must not depend on the coordinates, so that composition is
    the concatenation of derivatives with the coefficients wedged in order.
    Coefficients may depend on scales, e.g. T_i/(T_0+...+T_n) in zeta.
    """
    __slots__ = ("terms", "name")

    def __init__(self, terms: Iterable[Tuple[FormExpression, Sequence]] = (), name: str = ""):
        merged = {}
        for coeff, vars_ in terms:
            coeff = coeff if isinstance(coeff, FormExpression) else FormExpression.scalar(coeff)
            for _, _, c in coeff.terms():
                if any(is_coordinate(s) for s in c.free_symbols):
                    raise DomainError(f"Coefficient '{c}' depends on coordinates")
            for tag, _, _ in coeff.terms():
                if tag is not None:
                    raise DomainError("Operator coefficients cannot carry Gaussian factors")
            key = _sort_vars(vars_)
            merged[key] = merged.get(key, FormExpression.zero()) + coeff
        self.terms = tuple(
            (merged[key], key) for key in sorted(merged, key=lambda k: (len(k), [s.name for s in k]))
            if not merged[key].is_zero
        )
        self.name = name

    @classmethod
    def partial(cls, var, coeff=1, name: str = ""):
        return cls([(coeff, (var,))], name=name or f"d/d{var}")

    @classmethod
    def identity(cls):
        return cls([(1, ())], name="1")

    def __call__(self, F: FormExpression) -> FormExpression:
        result = FormExpression.zero()
        for coeff, vars_ in self.terms:
            G = F
            for var in vars_:
                G = derive(G, var)
            result = result + wedge(coeff, G)
        return result

    @property
    def is_zero(self) -> bool:
        return len(self.terms) == 0

    @property
    def parity(self) -> int:
        """0 for even, 1 for odd operators; DegreeError for mixed parity."""
        parities = {d % 2 for coeff, _ in self.terms for d in coeff.degrees()}
        if len(parities) > 1:
            raise DegreeError(f"Operator '{self.name}' has mixed parity")
        return parities.pop() if parities else 0

    def compose(self, other: "DiffOperator") -> "DiffOperator":
        """self o other."""
        return DiffOperator(
            [(wedge(a, b), va + vb) for (a, va), (b, vb) in itertools.product(self.terms, other.terms)],
            name=f"{self.name}{other.name}",
        )

    __matmul__ = compose

    def __pow__(self, k: int):
        if k < 0:
            raise DomainError("Negative operator powers are undefined")
        result = DiffOperator.identity()
        for _ in range(k):
            result = result.compose(self)
        return result

    def __add__(self, other):
        return DiffOperator(self.terms + other.terms, name=f"({self.name}+{other.name})")

    def __neg__(self):
        return DiffOperator([(-c, v) for c, v in self.terms], name=f"-{self.name}")

    def __sub__(self, other):
        return DiffOperator(self.terms + (-other).terms, name=f"({self.name}-{other.name})")

    def __mul__(self, scalar):
        return DiffOperator([(c * scalar, v) for c, v in self.terms], name=self.name)

    __rmul__ = __mul__

    def __repr__(self):
        return f"DiffOperator({self.name or len(self.terms)})"

def commutator(A: DiffOperator, B: DiffOperator) -> DiffOperator:
    """Graded commutator [A, B] = AB - (-1)^(|A||B|) BA."""
    sign = (-1) ** (A.parity * B.parity)
    return A.compose(B) - B.compose(A) * sign

def holomorphic_derivative(j: int, k: int = 1) -> DiffOperator:
    """D'_j = (d/dz_j)^k."""
    return DiffOperator([(1, (z(j),) * k)], name=f"(d/dz{j})^{k}")

def lambda_operator(j: int, lambda_constants=None) -> DiffOperator:
    """lambda_j = c1 dzbar_j d/dt_j + c2 dt_j d/dz_j."""
    c1, c2 = lambda_constants or (constants.LAMBDA_C1, constants.LAMBDA_C2)
    return DiffOperator([
        (FormExpression.generator(dzbar(j), c1), (t(j),)),
        (FormExpression.generator(dt(j), c2), (z(j),)),
    ], name=f"lambda{j}")

def _weighted_derivative(Ts, coordinate, name):
    Ts = check_scales(Ts)
    n = len(Ts) - 1
    total = sympy.Add(*Ts)
    return DiffOperator(
        [(Ts[i] / total, (coordinate(i),)) for i in range(n)], name=name,
    )

def zeta(Ts) -> DiffOperator:
    """zeta = (T_0 d/dz_0 + ... + T_{n-1} d/dz_{n-1}) / (T_0 + ... + T_n)."""
    return _weighted_derivative(Ts, z, "zeta")

def tau(Ts) -> DiffOperator:
    """Time analogue of zeta."""
    return _weighted_derivative(Ts, t, "tau")

def _check_loop_index(j, Ts):
    n = len(Ts) - 1
    if not 0 <= j < n:
        raise DomainError(f"Loop index {j} outside 0 <= j < {n}")

def dz_minus_zeta(j: int, Ts) -> DiffOperator:
    _check_loop_index(j, Ts)
    return DiffOperator.partial(z(j)) - zeta(Ts)

def dt_minus_tau(j: int, Ts) -> DiffOperator:
    _check_loop_index(j, Ts)
    return DiffOperator.partial(t(j)) - tau(Ts)


# Products over a wheel

def restrict_to_loop(F: FormExpression, n: int) -> FormExpression:
    """Substitutes q_n = q_0 + ... + q_{n-1} in the coefficients."""
    if n < 1:
        raise DomainError("A loop needs at least two edges")
    coord_map = {
        z(n): sympy.Add(*[z(i) for i in range(n)]),
        zbar(n): sympy.Add(*[zbar(i) for i in range(n)]),
        t(n): sympy.Add(*[t(i) for i in range(n)]),
    }
    return F.subs(coord_map)

def product_gaussian(Ts, independent: bool = False) -> KernelForm:
    """G^(n) = G_{T_0}(q_0) ^ ... ^ G_{T_{n-1}}(q_{n-1}) ^ G_{T_n}(q_n).

    Args:
        independent: Keep q_n as independent coordinates instead of
            substituting the loop constraint.
    """
    Ts = check_scales(Ts)
    n = len(Ts) - 1
    G = gaussian_product(*[_relabel(gaussian_form(T_).expression, i) for i, T_ in enumerate(Ts)])
    if not independent:
        G = restrict_to_loop(G, n)
    return KernelForm(G, n + 1, Variant.BULK, Ts)

def product_propagator(Ts, independent: bool = False) -> KernelForm:
    """E^(n) = E_{T_0}(q_0) ^ ... ^ E_{T_n}(q_n), in the edge frame."""
    Ts = check_scales(Ts)
    n = len(Ts) - 1
    E = gaussian_product(*[_relabel(propagator_integrand(T_).expression, i) for i, T_ in enumerate(Ts)])
    if not independent:
        E = restrict_to_loop(E, n)
    return KernelForm(E, n + 1, Variant.BULK, Ts)


# Identity checks, each returning a residual that vanishes identically

def lambda_residual(T=None, lambda_constants=None) -> FormExpression:
    """lambda G_T - E_T."""
    if T is None:
        T = sympy.Symbol("T", positive=True)
    G = gaussian_form(T).expression
    E = propagator_integrand(T).expression
    return lambda_operator(0, lambda_constants)(G) - E

def product_residual(Ts, lambda_constants=None) -> FormExpression:
    """E^(n) - (-1)^(n(n+1)/2) lambda_0 ... lambda_n G^(n).

    Checked in independent edge coordinates, where each lambda_i acts on its
    own edge, then restricted to the loop.
    """
    Ts = check_scales(Ts)
    n = len(Ts) - 1
    G = product_gaussian(Ts, independent=True).expression
    for i in reversed(range(n + 1)):
        G = lambda_operator(i, lambda_constants)(G)
    E = product_propagator(Ts, independent=True).expression
    residual = E - G * (-1) ** (n*(n+1)//2)
    return restrict_to_loop(residual, n)

def zeta_residuals(Ts):
    """Residuals of the eigen-actions of zeta and d/dz_j - zeta on G^(n)."""
    Ts = check_scales(Ts)
    n = len(Ts) - 1
    G = product_gaussian(Ts).expression
    sum_zbar = sympy.Add(*[zbar(i) for i in range(n)])
    residuals = {"zeta": zeta(Ts)(G) + G * (sum_zbar / (4*Ts[n]))}
    for j in range(n):
        residuals[f"dz{j}-zeta"] = dz_minus_zeta(j, Ts)(G) + G * (zbar(j) / (4*Ts[j]))
    return residuals

def tau_residuals(Ts):
    """Residuals of the eigen-actions of tau and d/dt_j - tau on G^(n)."""
    Ts = check_scales(Ts)
    n = len(Ts) - 1
    G = product_gaussian(Ts).expression
    sum_t = sympy.Add(*[t(i) for i in range(n)])
    residuals = {"tau": tau(Ts)(G) + G * (sum_t / (2*Ts[n]))}
    for j in range(n):
        residuals[f"dt{j}-tau"] = dt_minus_tau(j, Ts)(G) + G * (t(j) / (2*Ts[j]))
    return residuals

def solve_lambda_constants():
    """Solves lambda G_T = E_T for (c1, c2), coefficient by coefficient.

    Raises:
        ConstructionError: If the solution is not unique.
    """
    c1, c2 = sympy.symbols("c1 c2")
    residual = lambda_residual(lambda_constants=(c1, c2))
    equations = []
    for _, _, coeff in residual.terms():
        numerator, _ = sympy.fraction(sympy.together(coeff))
        coordinates = sorted(
            (s for s in numerator.free_symbols if is_coordinate(s)), key=lambda s: s.name,
        )
        poly = sympy.Poly(numerator, *coordinates) if coordinates else None
        equations.extend(poly.coeffs() if poly is not None else [numerator])
    solutions = sympy.solve(equations, [c1, c2], dict=True)
    if len(solutions) != 1 or set(solutions[0]) != {c1, c2}:
        raise ConstructionError(f"lambda constants are not uniquely determined: {solutions}")
    solution = (solutions[0][c1], solutions[0][c2])
    logger.debug("Solved lambda constants c1=%s, c2=%s", *solution)
    return solution
