#!/usr/bin/env python3
# Justin, 2026-02-21
"""Chevalley-Eilenberg complexes of finite-dimensional Lie algebras.

Everything is computed over the rationals with sympy's DomainMatrix, so
cohomology dimensions are exact ranks. Cochains in degree k with values in
a module M are stored as coefficient vectors over the basis

    e^I (x) m,    I a sorted k-subset of the Lie algebra basis,

with the module index running fastest. The differential is

    (d w)(x_0, ..., x_k) = sum_i (-1)^i x_i . w(..., ^x_i, ...)
                         + sum_{i<j} (-1)^(i+j) w([x_i, x_j], ..., ^x_i, ..., ^x_j, ...).

Two complexes describe the deformations of the mixed gauge theory:

    - 'complex_a(g)', the total complex of C*_red(g)[3] -> C*(g; g^v)[1]
      whose connecting map sends phi in g^v to 1 (x) phi and is extended as
      a derivation, i.e. (D w)(x_1, ..., x_{k-1}) = w(-, x_1, ..., x_{k-1}).
      D anticommutes with the Chevalley-Eilenberg differentials, so the
      total differential is (a, b) -> (d a, D a + d b).
    - 'ce_complex(g, "adjoint")', the weight-one complex C*(g; g).

Examples:

    >>> g = load_lie_algebra("sl2")
    >>> cohomology_dims(ce_complex(g))
    {0: 1, 1: 0, 2: 0, 3: 1}
    >>> weight_one_triviality(g)
    True

Changelog:
    2026-02-21, Justin: Init
    2026-02-25, Justin: Complex A, rendering of cocycles as vertices.
"""

__all__ = [
    "FinDimLieAlgebra", "CEComplex", "ComplexA", "Cochain", "Functional",
    "load_lie_algebra", "shipped_lie_algebras", "killing_form", "is_semisimple",
    "ce_complex", "complex_a", "cohomology_dims", "euler_characteristic",
    "weight_one_triviality", "chern_simons_class", "render_j0", "render_j1",
    "truncated_current_algebra",
]

import concurrent.futures
import dataclasses
import functools
import importlib.resources
import itertools
import json
import pathlib
from typing import Dict, List, Optional, Tuple

import sympy
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from holobf.common import ConstructionError, DomainError
from holobf.graphs import ChiralVertex
from holobf.logging import get_logger

logger = get_logger(__name__)

MODULES = ("trivial", "adjoint", "coadjoint")


@dataclasses.dataclass(frozen=True)
class FinDimLieAlgebra:
    """Lie algebra with rational structure constants and an invariant pairing.

    'brackets[i][j]' is the coefficient vector of [e_i, e_j]. Construction
    checks antisymmetry, the Jacobi identity and that the pairing is
    symmetric, nondegenerate and invariant.
    """
    name: str
    brackets: Tuple[Tuple[Tuple[sympy.Rational, ...], ...], ...]
    pairing: sympy.ImmutableMatrix
    basis: Tuple[str, ...] = ()

    def __post_init__(self):
        n = self.dimension
        if not self.basis:
            object.__setattr__(self, "basis", tuple(f"e{i}" for i in range(n)))
        if len(self.basis) != n:
            raise ConstructionError(f"'{self.name}': {len(self.basis)} basis names for dimension {n}")
        if self.pairing.shape != (n, n):
            raise ConstructionError(f"'{self.name}': pairing must be {n}x{n}, got {self.pairing.shape}")
        self.validate()

    @property
    def dimension(self) -> int:
        return len(self.brackets)

    def bracket(self, u, v) -> sympy.Matrix:
        """Bracket of two coefficient vectors."""
        u, v = sympy.Matrix(u), sympy.Matrix(v)
        result = sympy.zeros(self.dimension, 1)
        for i, j in itertools.product(range(self.dimension), repeat=2):
            if u[i] and v[j]:
                result += u[i] * v[j] * sympy.Matrix(self.brackets[i][j])
        return result

    @functools.lru_cache(maxsize=None)
    def ad(self, i: int) -> sympy.ImmutableMatrix:
        n = self.dimension
        return sympy.ImmutableMatrix(n, n, lambda k, j: self.brackets[i][j][k])

    def representation(self, module: str, i: int) -> sympy.ImmutableMatrix:
        if module == "trivial":
            return sympy.ImmutableMatrix([[0]])
        if module == "adjoint":
            return self.ad(i)
        if module == "coadjoint":
            return -self.ad(i).T
        raise DomainError(f"Unknown module '{module}', expected one of {MODULES}")

    def validate(self):
        n = self.dimension
        c = self.brackets
        for i, j in itertools.product(range(n), repeat=2):
            if any(c[i][j][k] + c[j][i][k] for k in range(n)):
                raise ConstructionError(f"'{self.name}': bracket [{i},{j}] is not antisymmetric")

        # Jacobi as [ad_i, ad_j] = ad_[e_i, e_j]
        for i, j in itertools.combinations(range(n), 2):
            lhs = self.ad(i) * self.ad(j) - self.ad(j) * self.ad(i)
            rhs = sum((c[i][j][k] * self.ad(k) for k in range(n)), sympy.zeros(n, n))
            if lhs != rhs:
                raise ConstructionError(f"'{self.name}': Jacobi identity fails for ({i},{j})")

        P = self.pairing
        if P != P.T:
            raise ConstructionError(f"'{self.name}': pairing is not symmetric")
        if P.det() == 0:
            raise ConstructionError(f"'{self.name}': pairing is degenerate")
        for i in range(n):
            # <[x,y],z> + <y,[x,z]> = 0 reads ad_i^T P + P ad_i = 0
            if self.ad(i).T * P + P * self.ad(i) != sympy.zeros(n, n):
                raise ConstructionError(f"'{self.name}': pairing is not invariant under e_{i}")

    @classmethod
    def from_structure_constants(cls, dimension, entries, pairing, name="g", basis=()):
        """Builds the algebra from nonzero entries [i, j, k, value], [e_i, e_j] = value e_k.

        The entry for [e_j, e_i] is implied; listing it anyway is allowed if
        consistent.
        """
        n = int(dimension)
        if n < 1:
            raise ConstructionError(f"'{name}': dimension must be positive, got {dimension}")
        c = [[[sympy.Integer(0)] * n for _ in range(n)] for _ in range(n)]
        seen = {}
        for entry in entries:
            try:
                i, j, k, value = entry
                i, j, k = int(i), int(j), int(k)
                value = sympy.Rational(str(value))
            except (TypeError, ValueError) as e:
                raise ConstructionError(f"'{name}': malformed structure constant {entry!r}") from e
            if not all(0 <= x < n for x in (i, j, k)):
                raise ConstructionError(f"'{name}': index out of range in {entry!r}")
            if i == j:
                if value:
                    raise ConstructionError(f"'{name}': [e_{i}, e_{i}] must vanish")
                continue
            for key, v in (((i, j, k), value), ((j, i, k), -value)):
                if key in seen and seen[key] != v:
                    raise ConstructionError(f"'{name}': conflicting entries for [e_{key[0]}, e_{key[1]}]")
                seen[key] = v
                c[key[0]][key[1]][key[2]] = v
        brackets = tuple(tuple(tuple(row) for row in block) for block in c)
        try:
            pairing = sympy.ImmutableMatrix([[sympy.Rational(str(x)) for x in row] for row in pairing])
        except (TypeError, ValueError) as e:
            raise ConstructionError(f"'{name}': malformed pairing") from e
        return cls(name, brackets, pairing, tuple(basis))


def shipped_lie_algebras() -> List[str]:
    root = importlib.resources.files("holobf") / "data" / "lie"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_lie_algebra(name_or_path) -> FinDimLieAlgebra:
    """Loads a shipped algebra by name, or a JSON file by path.

    Fields: "dimension", "structure_constants" as a list of [i, j, k, value],
    "pairing" as a square matrix, and optionally "name" and "basis". Values
    may be integers or rational strings like "1/2".
    """
    if str(name_or_path) in shipped_lie_algebras():
        resource = importlib.resources.files("holobf") / "data" / "lie" / f"{name_or_path}.json"
        text = resource.read_text()
        default_name = str(name_or_path)
    else:
        path = pathlib.Path(name_or_path)
        if not path.is_file():
            raise DomainError(
                f"No Lie algebra '{name_or_path}': not a file, and not one of {shipped_lie_algebras()}"
            )
        text = path.read_text()
        default_name = path.stem

    try:
        data = json.loads(text)
        dimension = data["dimension"]
        entries = data["structure_constants"]
        pairing = data["pairing"]
    except (json.JSONDecodeError, KeyError, TypeError) as e:
        raise ConstructionError(f"Malformed Lie algebra file '{name_or_path}': {e}") from e
    return FinDimLieAlgebra.from_structure_constants(
        dimension, entries, pairing,
        name=data.get("name", default_name), basis=data.get("basis", ()),
    )


def killing_form(g: FinDimLieAlgebra) -> sympy.ImmutableMatrix:
    n = g.dimension
    return sympy.ImmutableMatrix(n, n, lambda i, j: (g.ad(i) * g.ad(j)).trace())


def is_semisimple(g: FinDimLieAlgebra) -> bool:
    """Cartan's criterion: the Killing form is nondegenerate."""
    return killing_form(g).det() != 0


def truncated_current_algebra(g: FinDimLieAlgebra, N: int = 3) -> FinDimLieAlgebra:
    """g (x) C[z]/z^(N+1), basis e_i z^a ordered by a then i.

    The pairing <x z^a, y z^b> = <x, y> delta_{a+b,N} is invariant and
    nondegenerate.
    """
    if N < 0:
        raise DomainError(f"Truncation order must be nonnegative, got {N}")
    n = g.dimension
    entries = []
    for a, b in itertools.product(range(N + 1), repeat=2):
        if a + b > N:
            continue
        for i, j in itertools.product(range(n), repeat=2):
            for k, value in enumerate(g.brackets[i][j]):
                if value and (a, i) < (b, j):
                    entries.append((a*n + i, b*n + j, (a+b)*n + k, value))
    dim = n * (N + 1)
    pairing = sympy.zeros(dim, dim)
    for a in range(N + 1):
        b = N - a
        pairing[a*n:(a+1)*n, b*n:(b+1)*n] = g.pairing
    basis = tuple(f"{name}z{a}" for a in range(N + 1) for name in g.basis)
    return FinDimLieAlgebra.from_structure_constants(
        dim, entries, pairing.tolist(), name=f"{g.name}[z]/z^{N+1}", basis=basis,
    )


##############
#  COMPLEXES #
##############

def _rank(M: DomainMatrix) -> int:
    rows, cols = M.shape
    if rows == 0 or cols == 0:
        return 0
    return M.rank()


def _is_zero(M: DomainMatrix) -> bool:
    return M.is_zero_matrix


def _domain_matrix(entries, shape) -> DomainMatrix:
    dok = {key: QQ.convert(v) for key, v in entries.items() if v}
    return DomainMatrix.from_dok(dok, shape, QQ)


@dataclasses.dataclass
class CEComplex:
    """Finite cochain complex with differentials d^n: C^n -> C^(n+1).

    'dims' maps each degree to the dimension of its cochain space, and
    'differentials[n]' is the matrix of d^n over QQ. Missing differentials
    are zero.
    """
    name: str
    dims: Dict[int, int]
    differentials: Dict[int, DomainMatrix]
    _checked: bool = dataclasses.field(default=False, repr=False)

    @property
    def degrees(self) -> List[int]:
        return sorted(self.dims)

    def differential(self, n: int) -> DomainMatrix:
        if n in self.differentials:
            return self.differentials[n]
        shape = (self.dims.get(n + 1, 0), self.dims.get(n, 0))
        return DomainMatrix.zeros(shape, QQ)

    def check(self):
        """Raises ConstructionError unless d^(n+1) d^n = 0 in every degree."""
        if self._checked:
            return
        for n in self.degrees:
            a, b = self.differential(n), self.differential(n + 1)
            if 0 in a.shape or 0 in b.shape:
                continue
            if not _is_zero(b * a):
                raise ConstructionError(f"d^2 != 0 in degree {n} of complex '{self.name}'")
        self._checked = True
        logger.debug("Complex '%s': d^2 = 0 verified in degrees %s", self.name, self.degrees)


def _subsets(n: int, k: int) -> List[Tuple[int, ...]]:
    return list(itertools.combinations(range(n), k))


def _ce_differential(g: FinDimLieAlgebra, module: str, k: int) -> Dict[Tuple[int, int], sympy.Rational]:
    """Entries of d: Lambda^k g^v (x) M -> Lambda^(k+1) g^v (x) M."""
    n = g.dimension
    rho = [g.representation(module, i) for i in range(n)]
    dM = rho[0].shape[0]
    source = {I: p for p, I in enumerate(_subsets(n, k))}
    entries = {}

    def add(row, col, value):
        entries[row, col] = entries.get((row, col), 0) + value

    for q, J in enumerate(_subsets(n, k + 1)):
        if module != "trivial":
            for i, x in enumerate(J):
                I = J[:i] + J[i+1:]
                for m, m_ in itertools.product(range(dM), repeat=2):
                    value = rho[x][m_, m]
                    if value:
                        add(q*dM + m_, source[I]*dM + m, (-1)**i * value)
        for a, b in itertools.combinations(range(k + 1), 2):
            rest = J[:a] + J[a+1:b] + J[b+1:]
            for l, value in enumerate(g.brackets[J[a]][J[b]]):
                if not value or l in rest:
                    continue
                p = sum(1 for r in rest if r < l)
                I = rest[:p] + (l,) + rest[p:]
                sign = (-1)**(a + b + p)
                for m in range(dM):
                    add(q*dM + m, source[I]*dM + m, sign * value)
    return entries


def ce_complex(g: FinDimLieAlgebra, module: str = "trivial", reduced: bool = False,
               max_degree: Optional[int] = None) -> CEComplex:
    """Chevalley-Eilenberg complex C*(g; M) for M trivial, adjoint or coadjoint.

    The reduced complex drops the constants in degree 0, and is only defined
    for trivial coefficients. 'max_degree' truncates the complex, keeping
    degrees up to and including it; cohomology in the top kept degree is
    then only an upper bound.
    """
    if module not in MODULES:
        raise DomainError(f"Unknown module '{module}', expected one of {MODULES}")
    if reduced and module != "trivial":
        raise DomainError("The reduced complex is defined for trivial coefficients only")
    n = g.dimension
    top = n if max_degree is None else min(n, max_degree)
    dM = 1 if module == "trivial" else n
    low = 1 if reduced else 0
    dims = {k: sympy.binomial(n, k) * dM for k in range(low, top + 1)}
    dims = {k: int(v) for k, v in dims.items()}
    differentials = {
        k: _domain_matrix(_ce_differential(g, module, k), (dims[k+1], dims[k]))
        for k in range(low, top)
    }
    name = f"C*_red({g.name})" if reduced else f"C*({g.name}; {module})"
    C = CEComplex(name, dims, differentials)
    C.check()
    return C


@dataclasses.dataclass
class ComplexA(CEComplex):
    """Total complex of C*_red(g)[3] -> C*(g; g^v)[1].

    In total degree n the cochains are C^(n+3)_red (+) C^(n+1)(g; g^v), with
    the reduced component first.
    """
    reduced: CEComplex = None
    coefficients: CEComplex = None

    def split(self, n: int) -> Tuple[int, int]:
        """Dimensions of the two components in total degree n."""
        return self.reduced.dims.get(n + 3, 0), self.coefficients.dims.get(n + 1, 0)


def _connecting_map(g: FinDimLieAlgebra, k: int) -> Dict[Tuple[int, int], sympy.Rational]:
    """Entries of D: Lambda^k g^v -> Lambda^(k-1) g^v (x) g^v, (D w)(x..)(y) = w(y, x..)."""
    n = g.dimension
    target = {J: p for p, J in enumerate(_subsets(n, k - 1))}
    entries = {}
    for q, I in enumerate(_subsets(n, k)):
        for p, m in enumerate(I):
            J = I[:p] + I[p+1:]
            entries[target[J]*n + m, q] = sympy.Integer((-1)**p)
    return entries


def complex_a(g: FinDimLieAlgebra) -> ComplexA:
    reduced = ce_complex(g, reduced=True)
    coefficients = ce_complex(g, "coadjoint")
    n = g.dimension
    degrees = range(-2, n)
    dims = {}
    for d in degrees:
        dims[d] = reduced.dims.get(d + 3, 0) + coefficients.dims.get(d + 1, 0)

    differentials = {}
    for d in degrees:
        if d + 1 not in dims:
            continue
        r0, c0 = reduced.dims.get(d + 3, 0), coefficients.dims.get(d + 1, 0)
        r1 = reduced.dims.get(d + 4, 0)
        entries = {}
        if d + 3 in reduced.differentials:
            for (r, c), v in reduced.differentials[d + 3].to_dok().items():
                entries[r, c] = v
        if d + 1 in coefficients.differentials:
            for (r, c), v in coefficients.differentials[d + 1].to_dok().items():
                entries[r1 + r, r0 + c] = v
        if r0:
            for (r, c), v in _connecting_map(g, d + 3).items():
                entries[r1 + r, c] = v
        differentials[d] = _domain_matrix(entries, (dims[d + 1], r0 + c0))

    A = ComplexA(f"A({g.name})", dims, differentials, reduced=reduced, coefficients=coefficients)
    A.check()
    return A


def cohomology_dims(C: CEComplex, workers: int = 1) -> Dict[int, int]:
    """Dimensions dim ker d^n - dim im d^(n-1), per degree in increasing order.

    Ranks in different degrees are independent and are computed on a
    thread pool when 'workers' > 1.
    """
    C.check()
    degrees = C.degrees
    with concurrent.futures.ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        ranks = dict(zip(degrees, pool.map(lambda n: _rank(C.differential(n)), degrees)))
    result = {}
    for n in degrees:
        result[n] = C.dims[n] - ranks[n] - ranks.get(n - 1, 0)
        if result[n] < 0:
            raise ConstructionError(f"Negative cohomology in degree {n} of '{C.name}'")
    logger.debug("Cohomology of '%s': %s", C.name, result)
    return result


def euler_characteristic(C: CEComplex, cohomology: Optional[Dict[int, int]] = None) -> int:
    """Alternating sum of cochain dimensions.

    When 'cohomology' is given, its alternating sum must agree, and a
    mismatch raises ConstructionError.
    """
    chi = sum((-1)**(n % 2) * d for n, d in C.dims.items())
    if cohomology is not None:
        chi_h = sum((-1)**(n % 2) * d for n, d in cohomology.items())
        if chi_h != chi:
            raise ConstructionError(f"Euler characteristic of '{C.name}' is {chi}, cohomology gives {chi_h}")
    return chi


def weight_one_triviality(g: FinDimLieAlgebra, workers: int = 1) -> bool:
    """Whether H*(g; g) vanishes in every degree, computed from ranks."""
    if not is_semisimple(g):
        K = killing_form(g)
        raise DomainError(
            f"'{g.name}' is not semisimple: Killing form has rank {K.rank()} < {g.dimension}"
        )
    dims = cohomology_dims(ce_complex(g, "adjoint"), workers=workers)
    return not any(dims.values())


##############
#  RENDERING #
##############

@dataclasses.dataclass(frozen=True)
class Cochain:
    """Homogeneous cochain in C^k(g; M), coefficients over the basis e^I (x) m."""
    algebra: FinDimLieAlgebra
    module: str
    arity: int
    values: Tuple[sympy.Rational, ...]

    def __post_init__(self):
        n = self.algebra.dimension
        dM = 1 if self.module == "trivial" else n
        if self.module not in MODULES:
            raise DomainError(f"Unknown module '{self.module}'")
        if not 0 <= self.arity <= n:
            raise DomainError(f"Arity {self.arity} outside 0..{n}")
        expected = int(sympy.binomial(n, self.arity)) * dM
        if len(self.values) != expected:
            raise DomainError(f"Cochain of arity {self.arity} needs {expected} coefficients, got {len(self.values)}")
        object.__setattr__(self, "values", tuple(sympy.Rational(v) for v in self.values))

    @property
    def is_zero(self) -> bool:
        return not any(self.values)

    @classmethod
    def from_bilinear(cls, g: FinDimLieAlgebra, form) -> "Cochain":
        """x -> form(x, -) as an element of C^1(g; g^v)."""
        form = sympy.Matrix(form)
        n = g.dimension
        return cls(g, "coadjoint", 1, tuple(form[i, j] for i in range(n) for j in range(n)))


def chern_simons_class(g: FinDimLieAlgebra, kappa=None) -> sympy.Matrix:
    """Degree zero cocycle of complex A carrying an invariant symmetric form.

    The coefficient component is x -> kappa(x, -); it is completed by minus
    the Cartan 3-cocycle kappa([x, y], z) in the reduced component. Raises
    ConstructionError if the result is not closed.
    """
    n = g.dimension
    kappa = sympy.Matrix(g.pairing if kappa is None else kappa)
    A = complex_a(g)
    r0, _ = A.split(0)
    vector = sympy.zeros(A.dims[0], 1)
    if r0:
        for p, (x, y, z) in enumerate(_subsets(n, 3)):
            vector[p] = -(g.bracket(sympy.eye(n)[:, x], sympy.eye(n)[:, y]).T * kappa[:, z])[0]
    for i, j in itertools.product(range(n), repeat=2):
        vector[r0 + i*n + j] = kappa[i, j]
    image = A.differential(0).to_Matrix() * vector
    if any(image):
        raise ConstructionError("kappa does not give a cocycle; is it invariant and symmetric?")
    return vector


@dataclasses.dataclass(frozen=True)
class Functional:
    """Local functional rendered from a cochain.

    'vertex' is None for the zero functional, and for functionals without
    alpha-legs which have no vertex form.
    """
    text: str
    alpha_legs: int
    beta_legs: int
    deriv_orders: Tuple[int, ...]
    vertex: Optional[ChiralVertex] = None

    @property
    def is_zero(self) -> bool:
        return self.text == "0"

    @property
    def weight(self) -> int:
        return self.beta_legs


def _legs(k: int) -> str:
    return ", ".join(["alpha"] * k)


def render_j0(mu: Cochain) -> Functional:
    """mu in C^k(g; g^v) -> int ev(mu(alpha, ..., alpha), d alpha)."""
    if mu.module != "coadjoint":
        raise DomainError(f"j0 takes cochains with values in g^v, got '{mu.module}'")
    k = mu.arity
    if mu.is_zero:
        return Functional("0", 0, 0, ())
    orders = (0,) * k + (1,)
    label = "cs" if k == 1 else f"j0_{k}"
    return Functional(
        f"int ev(mu({_legs(k)}), d alpha)", k + 1, 0, orders,
        ChiralVertex(k + 1, 0, orders, label),
    )


def render_j1(xi: Cochain) -> Functional:
    """xi in C^k(g; g) -> int <beta, xi(alpha, ..., alpha)>."""
    if xi.module != "adjoint":
        raise DomainError(f"j1 takes cochains with values in g, got '{xi.module}'")
    k = xi.arity
    if xi.is_zero:
        return Functional("0", 0, 0, ())
    orders = (0,) * (k + 1)
    vertex = ChiralVertex(k, 1, orders, f"j1_{k}") if k else None
    return Functional(f"int <beta, xi({_legs(k)})>", k, 1, orders, vertex)
