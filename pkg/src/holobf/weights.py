#!/usr/bin/env python3
# Justin, 2026-02-14
"""Analytic weights of one-loop graphs and their scale bounds.

A weight is assembled symbolically in the vertex coordinates q_v = (z_v, t_v):

    - every internal edge a -> b carries the propagator integrand E_T pulled
      back along q_a - q_b, keeping dz only at the beta-leg end a; for the
      anomaly one distinguished edge carries the heat kernel K_eps instead,
    - every external alpha-leg carries a test input a(z) f(t) w times the
      envelope exp(-(|z|^2 + t^2)/4 sigma), w being one of 1, dzbar, dt,
      dzbar^dt,
    - holomorphic derivative orders of the vertices act as d/dz_v on the
      factor attached to that leg.

The coefficient of the top form dzbar_0^dz_0^dt_0^dzbar_1^... is then a
polynomial times a Gaussian in the coordinates, integrated in closed form by
'gaussian.GaussianMoments' for a whole batch of scales at once, and finally
over the box [eps, L]^E of edge scales by 'mathutil.integrate_t_box'. The
measure mu_V = dzbar^dz^dt at each vertex is taken as the Lebesgue measure,
so the overall orientation sign is a convention (see 'constants').

A weight that cannot reach the top form is reported as an exact zero with
'degree_zero_flag' set, without any quadrature.

Examples:

    >>> from holobf.graphs import wheel
    >>> phi = TestInput.uniform(LegFactor.of(form="dzbar"))
    >>> bulk_weight(wheel(2), 1e-2, 1, phi).degree_zero_flag
    True

Changelog:
    2026-02-14, Justin: Init
    2026-02-18, Justin: Anomaly weights, sweeps and scale bounds.
    2026-03-14, Justin: Input-dependent scale bound of bulk weights.
"""

__all__ = [
    "LegFactor", "TestInput", "WeightResult", "WeightIntegrand", "SweepReport",
    "prepare_weight", "bulk_weight", "anomaly_weight", "anomaly_weight_sum",
    "t_box_bound", "anomaly_bound", "anomaly_bound_limit", "weight_bound",
    "holomorphic_reduction_check", "epsilon_sweep", "zeta_bound_check",
    "parse_polynomial", "MAX_DERIVATIVE_ORDER",
]

import concurrent.futures
import dataclasses
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy

from holobf.common import DomainError, ResourceError
from holobf.exterior import (
    EPSILON, FormExpression, GaussianTag, Generator, Kind, T, derive, gaussian_product,
    check_scale, dz, dzbar, dt, z, zbar, t,
)
from holobf.gaussian import GaussianMoments
from holobf.graphs import ChiralGraph, Edge, GraphClass, classify, graph_id
from holobf.kernels import (
    Variant, heat_kernel, holomorphic_edge, image_kernel,
    image_propagator_integrand, propagator_integrand,
)
from holobf.logging import get_logger
from holobf.mathutil import integrate_t_box, richardson

logger = get_logger(__name__)

MAX_DERIVATIVE_ORDER = 4

FORMS = {
    "1": (),
    "dzbar": (Kind.DZBAR,),
    "dt": (Kind.DT,),
    "dzbar^dt": (Kind.DZBAR, Kind.DT),
}
_INPUT_SYMBOLS = {"z": z(0), "zbar": zbar(0), "t": t(0), "I": sympy.I, "pi": sympy.pi}


def parse_polynomial(value, allowed, what: str = "Polynomial"):
    """Parses a string or sympy expression, requiring a polynomial in 'allowed'."""
    if isinstance(value, str):
        try:
            expr = sympy.sympify(value, locals=_INPUT_SYMBOLS)
        except sympy.SympifyError as e:
            raise DomainError(f"Cannot parse {what} '{value}'") from e
    else:
        expr = sympy.sympify(value)
    extra = expr.free_symbols - set(allowed)
    if extra:
        raise DomainError(f"{what} '{expr}' depends on {sorted(map(str, extra))}")
    if not expr.is_polynomial(*allowed):
        raise DomainError(f"{what} '{expr}' is not polynomial")
    return expr


@dataclasses.dataclass(frozen=True)
class LegFactor:
    """Input on one external leg: a(z) (sum_w f_w(t) w) times a Gaussian envelope.

    Polynomials are written in z, zbar (for a) and t (for f), either as sympy
    expressions in z(0), zbar(0), t(0) or as strings, e.g. "z**2 + 1".

    Args:
        a: Polynomial in z and zbar.
        components: Pairs (form, f) with form in 'FORMS'.
        sigma: Envelope width, exp(-(|z|^2 + t^2)/4 sigma).
    """
    a: object = 1
    components: Tuple[Tuple[str, object], ...] = (("1", 1),)
    sigma: object = 1

    def __post_init__(self):
        object.__setattr__(self, "a", parse_polynomial(self.a, (z(0), zbar(0)), "Input factor a"))
        components = dict(self.components)
        if not components:
            raise DomainError("Input needs at least one form component")
        parsed = []
        for form, f in components.items():
            if form not in FORMS:
                raise DomainError(f"Unknown input form '{form}', expected one of {list(FORMS)}")
            parsed.append((form, parse_polynomial(f, (t(0),), "Input factor f")))
        object.__setattr__(self, "components", tuple(sorted(parsed, key=lambda p: list(FORMS).index(p[0]))))
        object.__setattr__(self, "sigma", check_scale(self.sigma))

    @classmethod
    def of(cls, a=1, f=1, form: str = "1", sigma=1) -> "LegFactor":
        return cls(a, ((form, f),), sigma)

    @property
    def degrees(self) -> Tuple[int, ...]:
        return tuple(sorted({len(FORMS[form]) for form, f in self.components if f != 0}))

    def at(self, v: int, deriv: int = 0) -> FormExpression:
        """The input placed at vertex v, with d/dz_v applied 'deriv' times."""
        relabel = {z(0): z(v), zbar(0): zbar(v), t(0): t(v)}
        a = self.a.subs(relabel, simultaneous=True)
        tag = GaussianTag.from_exponent(-(z(v)*zbar(v) + t(v)**2) / (4*self.sigma))
        F = FormExpression([
            (tag, tuple(Generator(v, kind) for kind in FORMS[form]), a * f.subs(relabel, simultaneous=True))
            for form, f in self.components
        ])
        for _ in range(deriv):
            F = derive(F, z(v))
        return F


@dataclasses.dataclass(frozen=True)
class TestInput:
    """Inputs for the external alpha-legs of a graph.

    The factors are matched to 'ChiralGraph.external_alpha_legs()' in order;
    a single factor is used on every leg.
    """
    __test__ = False  # not a pytest class

    factors: Tuple[LegFactor, ...]

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise DomainError("TestInput needs at least one factor")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def uniform(cls, factor: LegFactor) -> "TestInput":
        return cls((factor,))

    def assign(self, g: ChiralGraph) -> Dict[Tuple[int, int], LegFactor]:
        legs = g.external_alpha_legs()
        if len(self.factors) == 1:
            return {leg: self.factors[0] for leg in legs}
        if len(self.factors) != len(legs):
            raise DomainError(f"Graph has {len(legs)} external alpha-legs, got {len(self.factors)} input factors")
        return dict(zip(legs, self.factors))


@dataclasses.dataclass
class WeightResult:
    value: Union[float, complex]
    quadrature_error_estimate: float
    degree_zero_flag: bool = False
    reason: str = ""
    level: int = 0

    def __post_init__(self):
        if self.degree_zero_flag and self.value != 0:
            raise DomainError("A weight vanishing by form degree must be exactly zero")

    def __float__(self):
        return float(np.real(self.value))


def _zero(reason: str, degree: bool) -> WeightResult:
    return WeightResult(0.0, 0.0, degree_zero_flag=degree, reason=reason)

def _top_word(vertices: int) -> Tuple[Generator, ...]:
    return tuple(g(v) for v in range(vertices) for g in (dzbar, dz, dt))

def _edge_index(g: ChiralGraph, edge) -> int:
    if isinstance(edge, Edge):
        if edge not in g.edges:
            raise DomainError(f"{edge} is not an edge of the graph")
        return g.edges.index(edge)
    edge = int(edge)
    if not 0 <= edge < len(g.edges):
        raise DomainError(f"Edge index {edge} outside 0..{len(g.edges) - 1}")
    return edge


@dataclasses.dataclass
class WeightIntegrand:
    """Symbolic weight integrand, ready for quadrature over the scale box.

    'pieces' pairs every Gaussian factor of the top coefficient with its
    polynomial prefactor; the prefactors depend on 'params', which are the
    scales of the integrated edges followed by EPSILON when a heat kernel
    edge is present. An empty 'reason' means the integrand is not known to
    vanish.
    """
    graph: ChiralGraph
    params: Tuple[sympy.Symbol, ...]
    pieces: List[Tuple[GaussianMoments, sympy.Expr]]
    distinguished: Optional[int] = None
    variant: Variant = Variant.BULK
    reason: str = ""
    degree_zero: bool = False

    @property
    def dim(self) -> int:
        return len(self.params) - (EPSILON in self.params)

    def density(self, epsilon: float) -> Callable[[np.ndarray], np.ndarray]:
        """Returns T -> integrand over all of space, for an (N, dim) batch."""
        def f(Ts):
            Ts = np.atleast_2d(np.asarray(Ts, dtype=np.float64))
            values = Ts
            if EPSILON in self.params:
                values = np.column_stack([Ts, np.full(len(Ts), float(epsilon))])
            total = np.zeros(len(Ts))
            for moments, coeff in self.pieces:
                total = total + moments.integrate(coeff, values)
            return total
        return f

    def evaluate(self, epsilon, L, tol: float = 1e-6, atol: float = 1e-12,
                 min_level: int = 2, max_level: Optional[int] = None,
                 chunk: int = 2**14, strict: bool = True) -> WeightResult:
        if not 0 < epsilon < L:
            raise DomainError(f"Expected 0 < epsilon < L, got epsilon={epsilon}, L={L}")
        if self.reason:
            return _zero(self.reason, self.degree_zero)
        value, error, level = integrate_t_box(
            self.density(epsilon), epsilon, L, self.dim, tol=tol, atol=atol,
            min_level=min_level, max_level=max_level, chunk=chunk, strict=strict,
        )
        value = complex(value)
        if abs(value.imag) <= 1e-12 * max(1.0, abs(value.real)):
            value = value.real
        logger.debug(
            "Weight of %s at eps=%g, L=%g: %s (err %.3g, level %d)",
            graph_id(self.graph), epsilon, L, value, error, level,
        )
        return WeightResult(value, error, level=level)


def _edge_form(edge: Edge, scale, vertices, heat: bool, variant: Variant) -> FormExpression:
    endpoints = (edge.source, edge.target)
    if variant is Variant.BULK:
        builder = heat_kernel if heat else propagator_integrand
    else:
        builder = image_kernel if heat else image_propagator_integrand
    F = builder(scale, endpoints).expression
    F = holomorphic_edge(F, alpha=edge.source, beta=edge.target)
    for _ in range(vertices[edge.source].beta_order):
        F = derive(F, z(edge.source))
    for _ in range(vertices[edge.target].alpha_order(edge.leg)):
        F = derive(F, z(edge.target))
    return F

def _check_orders(g: ChiralGraph):
    for vertex in g.vertices:
        if max(vertex.deriv_orders, default=0) > MAX_DERIVATIVE_ORDER:
            raise ResourceError(
                f"Vertex '{vertex.label}' has derivative order above {MAX_DERIVATIVE_ORDER}"
            )

def prepare_weight(g: ChiralGraph, phi: TestInput, distinguished=None,
                   variant: Variant = Variant.BULK) -> WeightIntegrand:
    """Assembles the weight integrand of a one-loop graph.

    Args:
        distinguished: Edge (or its index) carrying the heat kernel K_eps,
            for anomaly weights.
        variant: IMAGE evaluates on the half-space t >= 0 with image kernels.

    Raises:
        DomainError: If the graph is not one-loop, or inputs do not match.
        ResourceError: For derivative orders above MAX_DERIVATIVE_ORDER, or
            too many vertices for half-space moments.
    """
    if classify(g) is not GraphClass.ONE_LOOP_WHEEL:
        raise DomainError(f"Weights are evaluated on one-loop graphs, got {classify(g).value}")
    _check_orders(g)
    inputs = phi.assign(g)
    if distinguished is not None:
        distinguished = _edge_index(g, distinguished)

    integrated = [i for i in range(len(g.edges)) if i != distinguished]
    params = tuple(T(k) for k in range(len(integrated)))
    if distinguished is not None:
        params = params + (EPSILON,)
    integrand = WeightIntegrand(g, params, [], distinguished, variant)

    if any(e.source == e.target for e in g.edges):
        integrand.reason = "self-loop"  # propagator on the diagonal
        return integrand

    # Degree count before any symbolic work
    V = len(g.vertices)
    fixed = sum(3 if i == distinguished else 2 for i in range(len(g.edges)))
    reachable = {fixed}
    for factor in inputs.values():
        reachable = {r + d for r in reachable for d in factor.degrees}
    if 3*V not in reachable:
        integrand.reason, integrand.degree_zero = "form degree", True
        return integrand

    scales = dict(zip(integrated, params))
    forms = [
        _edge_form(e, EPSILON if i == distinguished else scales[i], g.vertices, i == distinguished, variant)
        for i, e in enumerate(g.edges)
    ]
    for (v, leg), factor in sorted(inputs.items()):
        forms.append(factor.at(v, g.vertices[v].alpha_order(leg)))
    F = gaussian_product(*forms)

    pieces = []
    for tag, coeff in F.coefficient(_top_word(V)):
        if tag is None:
            raise DomainError("Weight integrand lacks a Gaussian factor")
        pieces.append((GaussianMoments(tag.exponent, params, half_space=variant is Variant.IMAGE), coeff))
    if not pieces:
        integrand.reason, integrand.degree_zero = "form degree", True
    integrand.pieces = pieces
    logger.debug(
        "Prepared weight of %s: %d Gaussian pieces, params %s",
        graph_id(g), len(pieces), [str(p) for p in params],
    )
    return integrand


def bulk_weight(g: ChiralGraph, epsilon, L, phi: TestInput, **quadrature) -> WeightResult:
    """w[eps, L](phi) of a one-loop graph; 'quadrature' goes to 'WeightIntegrand.evaluate'."""
    return prepare_weight(g, phi).evaluate(epsilon, L, **quadrature)

def anomaly_weight(g: ChiralGraph, edge, epsilon, L, phi: TestInput, **quadrature) -> WeightResult:
    """Weight with K_eps on the distinguished edge and E_T on the others."""
    return prepare_weight(g, phi, distinguished=edge).evaluate(epsilon, L, **quadrature)

def anomaly_weight_sum(g: ChiralGraph, epsilon, L, phi: TestInput, **quadrature) -> WeightResult:
    """Sum of anomaly weights over all choices of the distinguished edge."""
    results = [anomaly_weight(g, i, epsilon, L, phi, **quadrature) for i in range(len(g.edges))]
    return WeightResult(
        sum(r.value for r in results),
        sum(r.quadrature_error_estimate for r in results),
        degree_zero_flag=all(r.degree_zero_flag for r in results),
        reason=results[0].reason if len({r.reason for r in results}) == 1 else "",
        level=max(r.level for r in results),
    )


#########################
#  SCALE BOUNDS, SWEEPS #
#########################

def _power_box(p: float, epsilon, L, dim: int) -> float:
    """Integral of prod T_i^(p-1) over [eps, L]^dim."""
    return ((L**p - epsilon**p) / p) ** dim

def _check_box(epsilon, L):
    if not 0 < epsilon < L:
        raise DomainError(f"Expected 0 < epsilon < L, got epsilon={epsilon}, L={L}")

def t_box_bound(n: int, epsilon, L, tol: float = 1e-6) -> Tuple[float, float]:
    """(integral of (sum T)^(-3/2) over [eps, L]^(n+1), its AM-GM bound).

    The bound integrates prod T_i^(-3/2(n+1)), which dominates the integrand
    pointwise, so lhs <= rhs. Both stay finite as eps -> 0 once n+1 > 2.
    """
    if n < 0:
        raise DomainError(f"Loop order n must be nonnegative, got {n}")
    _check_box(epsilon, L)
    dim = n + 1
    lhs, _, _ = integrate_t_box(lambda Ts: np.sum(Ts, axis=1)**-1.5, epsilon, L, dim, tol=tol)
    return float(lhs), _power_box(1 - 1.5/dim, epsilon, L, dim)

def anomaly_bound(n: int, epsilon, L, tol: float = 1e-6) -> Tuple[float, float]:
    """(integral of (eps + sum T)^(-3/2) over [eps, L]^n, its AM-GM bound)."""
    if n < 1:
        raise DomainError(f"Anomaly bound needs n >= 1, got {n}")
    _check_box(epsilon, L)
    f = lambda Ts: (epsilon + np.sum(Ts, axis=1))**-1.5
    lhs, _, _ = integrate_t_box(f, epsilon, L, n, tol=tol)
    return float(lhs), _power_box(1 - 1.5/n, epsilon, L, n)

def anomaly_bound_limit(n: int, L) -> float:
    """eps -> 0 value of the anomaly bound; infinite for n = 1."""
    if n < 1:
        raise DomainError(f"Anomaly bound needs n >= 1, got {n}")
    p = 1 - 1.5/n
    if p <= 0:
        return math.inf
    return (L**p / p) ** n

def weight_bound(integrand: WeightIntegrand, epsilon, L, points: int = 9, **quadrature) -> Tuple[float, float]:
    """(|w[eps, L]|, C times the AM-GM bound of 't_box_bound') for a bulk weight.

    The density is dominated by C (T_0 + ... + T_n)^(-3/2), where C depends
    on the inputs. C is estimated as the largest value of that ratio on a
    logarithmic grid with 'points' per axis, endpoints included.
    """
    if integrand.distinguished is not None:
        raise DomainError("The scale bound applies to bulk weights")
    _check_box(epsilon, L)
    if integrand.reason:
        return 0.0, 0.0
    value = integrand.evaluate(epsilon, L, **quadrature).value

    dim = integrand.dim
    axis = np.geomspace(epsilon, L, points)
    Ts = np.stack(np.meshgrid(*[axis]*dim, indexing="ij"), axis=-1).reshape(-1, dim)
    ratios = np.abs(integrand.density(epsilon)(Ts)) * np.sum(Ts, axis=1)**1.5
    C = float(np.max(ratios))
    rhs = _power_box(1 - 1.5/dim, epsilon, L, dim)
    logger.debug("Scale bound: |w| = %.6g, C = %.6g, bound %.6g", abs(value), C, C*rhs)
    return float(abs(value)), C * rhs


def holomorphic_reduction_check(n: int, T_=None) -> bool:
    """Whether (d/dz)^n E_T = (-zbar/4T)^n E_T holds symbolically."""
    if n < 0:
        raise DomainError(f"Derivative order must be nonnegative, got {n}")
    if T_ is None:
        T_ = T(0)
    E = propagator_integrand(T_).expression
    D = E
    for _ in range(n):
        D = derive(D, z(0))
    return (D - E * (-zbar(0) / (4*T_))**n).is_zero

def zeta_bound_check(Ts) -> bool:
    """Whether every zeta weight T_i/(T_0 + ... + T_n), i < n, lies in (0, 1).

    Accepts a single scale vector or an (N, n+1) batch.
    """
    Ts = np.atleast_2d(np.asarray(Ts, dtype=np.float64))
    if Ts.shape[1] < 2:
        raise DomainError("zeta needs at least two scales")
    if np.any(Ts <= 0):
        raise DomainError("Scales must be positive")
    weights = Ts[:, :-1] / np.sum(Ts, axis=1, keepdims=True)
    return bool(np.all((weights > 0) & (weights < 1)))


@dataclasses.dataclass
class SweepReport:
    epsilons: List[float]
    values: List[float]
    errors: List[float]
    differences: List[float]
    monotone: bool
    converged: bool
    extrapolated: float
    extrapolation_error: float

    def rows(self, L, graph: str = ""):
        """Rows for 'datautil.write_sweep_csv'."""
        return [
            {"epsilon": e, "L": L, "graph_id": graph, "value": v, "error_estimate": err}
            for e, v, err in zip(self.epsilons, self.values, self.errors)
        ]


def epsilon_sweep(evaluate: Callable, epsilons: Sequence[float], tol: float = 1e-6,
                  order: float = 0.5, workers: int = 1) -> SweepReport:
    """Evaluates a weight along a decreasing eps sequence.

    The sequence is Cauchy-tested: 'monotone' if successive differences do
    not grow, 'converged' if the last difference is below 10 times the
    quadrature tolerance. For geometric sequences the eps -> 0 value is
    Richardson-extrapolated assuming errors in powers of eps^order.

    Args:
        evaluate: eps -> WeightResult or number.
        workers: Sweep points evaluated on a thread pool; results keep the
            order of 'epsilons'.
    """
    epsilons = [float(e) for e in epsilons]
    if len(epsilons) < 2:
        raise DomainError("A sweep needs at least two values of epsilon")
    if any(a <= b for a, b in zip(epsilons, epsilons[1:])):
        raise DomainError("Sweep epsilons must be strictly decreasing")

    with concurrent.futures.ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(evaluate, epsilons))
    values, errors = [], []
    for r in results:
        if isinstance(r, WeightResult):
            values.append(float(r))
            errors.append(r.quadrature_error_estimate)
        else:
            values.append(float(r))
            errors.append(0.0)

    differences = [abs(b - a) for a, b in zip(values, values[1:])]
    slack = 10 * tol * max(1.0, max(abs(v) for v in values))
    monotone = all(d1 <= d0 + slack for d0, d1 in zip(differences, differences[1:]))
    converged = differences[-1] < 10 * tol * max(1.0, abs(values[-1]))

    ratios = np.array(epsilons[:-1]) / np.array(epsilons[1:])
    if np.allclose(ratios, ratios[0], rtol=1e-9):
        extrapolated, error = richardson(values, ratio=ratios[0], order=order, step=order)
    else:
        extrapolated, error = values[-1], differences[-1]
    logger.info(
        "Sweep over %d epsilons: converged=%s, extrapolated %.10g",
        len(epsilons), converged, extrapolated,
        extra={"details": [f"eps={e:g}: {v:.10g} (diff {d:.3g})"
                           for e, v, d in zip(epsilons[1:], values[1:], differences)]},
    )
    return SweepReport(epsilons, values, errors, differences, monotone, converged,
                       float(extrapolated), float(error))
