#!/usr/bin/env python3
# Justin, 2026-01-16
"""Graded algebra of form-valued integrands over per-vertex generators.

A 'FormExpression' is a finite sum of terms

    coefficient * exp(Q) * dx_1 ^ ... ^ dx_k

where the coefficient is a polynomial in the coordinates z_i, zbar_i, t_i
with rational functions of the scales T_i (and epsilon) as coefficients,
Q is a homogeneous quadratic exponent in the coordinates (the "Gaussian
tag"), and the generator word is kept in canonical order with its sign
absorbed into the coefficient.

All arithmetic is exact (sympy); nothing is floated until 'evaluate'.

Examples:

    >>> F = FormExpression.generator(dz(0))
    >>> wedge(F, F).is_zero
    True
    >>> wedge(F, FormExpression.generator(dt(0))) == \\
    ...     -wedge(FormExpression.generator(dt(0)), F)
    True

Changelog:
    2026-01-16, Justin: Init
    2026-01-30, Justin: Pullbacks and scale derivations for the heat equation.
    2026-03-14, Justin: Reject mismatched Gaussian factors in wedge, add gaussian_product.
"""

__all__ = [
    "Kind", "Generator", "GaussianTag", "FormExpression",
    "dz", "dzbar", "dt", "z", "zbar", "t", "T", "EPSILON",
    "wedge", "gaussian_product", "derive", "interior", "evaluate", "canonical_word", "is_coordinate",
    "check_scale", "check_scales",
]

import dataclasses
import enum
import functools
import itertools
import re
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np
import sympy
from sympy.combinatorics import Permutation
from sortedcontainers import SortedDict

from holobf.common import DegreeError, DomainError

RE_COORDINATE = re.compile(r"^(z|zbar|t)(\d+)$")
EPSILON = sympy.Symbol("epsilon", positive=True)

@functools.lru_cache(maxsize=None)
def z(i: int):
    return sympy.Symbol(f"z{i}")

@functools.lru_cache(maxsize=None)
def zbar(i: int):
    return sympy.Symbol(f"zbar{i}")

@functools.lru_cache(maxsize=None)
def t(i: int):
    return sympy.Symbol(f"t{i}", real=True)

@functools.lru_cache(maxsize=None)
def T(i: int):
    return sympy.Symbol(f"T{i}", positive=True)

def check_scale(value):
    """Returns the scale as a sympy object, rejecting nonpositive scales."""
    value = sympy.sympify(value)
    if value.is_number:
        if not value.is_real or not (value > 0):
            raise DomainError(f"Scale {value} is not positive")
    elif value.is_positive is not True:
        raise DomainError(f"Scale '{value}' is not known to be positive")
    return value

def check_scales(values, min_arity: int = 2):
    values = tuple(check_scale(v) for v in values)
    if len(values) < min_arity:
        raise DomainError(f"Expected at least {min_arity} scales, got {len(values)}")
    return values

def is_coordinate(symbol) -> bool:
    return isinstance(symbol, sympy.Symbol) and bool(RE_COORDINATE.match(symbol.name))

def _coordinates_of(expr):
    return sorted(
        (s for s in expr.free_symbols if is_coordinate(s)),
        key=lambda s: s.name,
    )


class Kind(enum.IntEnum):
    DZ = 0
    DZBAR = 1
    DT = 2


@dataclasses.dataclass(frozen=True, order=True)
class Generator:
    """Anticommuting 1-form generator attached to a vertex.

    Ordering is by (vertex_index, kind), with dz < dzbar < dt.
    """
    vertex_index: int
    kind: Kind

    def __post_init__(self):
        if self.vertex_index < 0:
            raise DomainError(f"Negative vertex index {self.vertex_index}")
        object.__setattr__(self, "kind", Kind(self.kind))

    def __str__(self):
        return f"{self.kind.name.lower()}{self.vertex_index}"

    def __repr__(self):
        return str(self)

def dz(i: int) -> Generator:
    return Generator(i, Kind.DZ)

def dzbar(i: int) -> Generator:
    return Generator(i, Kind.DZBAR)

def dt(i: int) -> Generator:
    return Generator(i, Kind.DT)

Word = Tuple[Generator, ...]

def canonical_word(word: Iterable[Generator]) -> Tuple[int, Word]:
    """Sorts a generator word, returning (sign, sorted word).

    A word with a repeated generator is zero, signalled by sign 0.
    """
    word = tuple(word)
    if len(set(word)) != len(word):
        return 0, ()
    if len(word) < 2:
        return 1, word
    order = sorted(range(len(word)), key=lambda i: word[i])
    sign = Permutation(order).signature()
    return sign, tuple(word[i] for i in order)


class GaussianTag:
    """Homogeneous quadratic exponent Q of a Gaussian factor exp(Q).

    The exponent is stored in a canonical form, monomial by monomial with
    cancelled rational coefficients, so that equal exponents built along
    different routes share the same 'key'.
    """
    __slots__ = ("exponent", "key", "coordinates")

    def __init__(self, exponent):
        exponent = sympy.sympify(exponent)
        coordinates = _coordinates_of(exponent)
        if not coordinates:
            raise DomainError(f"Gaussian exponent '{exponent}' has no coordinates")
        try:
            poly = sympy.Poly(exponent, *coordinates)
        except sympy.PolynomialError:
            raise DomainError(f"Gaussian exponent '{exponent}' is not polynomial")
        if any(sum(m) != 2 for m in poly.monoms()):
            raise DomainError(f"Gaussian exponent '{exponent}' is not homogeneous quadratic")

        monomials = []
        for monom, coeff in zip(poly.monoms(), poly.coeffs()):
            coeff = sympy.cancel(coeff)
            if coeff != 0:
                monomials.append((coeff, sympy.Mul(*[c**k for c, k in zip(coordinates, monom)])))
        self.exponent = sympy.Add(*[c*m for c, m in monomials])
        self.coordinates = tuple(coordinates)
        self.key = ";".join(sorted(f"{m}:{c}" for c, m in monomials))

    @classmethod
    def from_exponent(cls, exponent) -> Optional["GaussianTag"]:
        """Returns None for a vanishing exponent."""
        exponent = sympy.sympify(exponent)
        if exponent == 0 or sympy.expand(exponent) == 0:
            return None
        tag = cls(exponent)
        return tag if tag.key else None

    def __eq__(self, other):
        return isinstance(other, GaussianTag) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"GaussianTag({self.exponent})"

def _exponent(tag: Optional[GaussianTag]):
    return sympy.Integer(0) if tag is None else tag.exponent

def _key(tag: Optional[GaussianTag]) -> str:
    return "" if tag is None else tag.key

def _product_tag(a: Optional[GaussianTag], b: Optional[GaussianTag], independent: bool = False):
    if a is None:
        return b
    if b is None:
        return a
    if not independent and a != b:
        raise DomainError(
            f"Incompatible Gaussian factors exp({a.exponent}) and exp({b.exponent}), "
            "use 'gaussian_product' for independent heat kernels"
        )
    return GaussianTag.from_exponent(a.exponent + b.exponent)


class FormExpression:
    """Immutable sum of (coefficient, Gaussian tag, generator word) terms.

    Terms sharing a tag and a word are merged; zero coefficients are dropped,
    so an expression is zero iff it has no terms.
    """
    __slots__ = ("_terms", "_tags")

    def __init__(self, terms: Iterable[Tuple[Optional[GaussianTag], Iterable[Generator], object]] = ()):
        merged = {}
        tags = {}
        for tag, word, coeff in terms:
            sign, word = canonical_word(word)
            if sign == 0:
                continue
            key = (_key(tag), word)
            tags[key[0]] = tag
            merged[key] = merged.get(key, 0) + sign * sympy.sympify(coeff)

        self._terms = SortedDict()
        self._tags = {}
        for key, coeff in merged.items():
            coeff = sympy.cancel(coeff)
            if coeff != 0:
                self._terms[key] = coeff
                self._tags[key[0]] = tags[key[0]]

    # Constructors

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def scalar(cls, coeff=1, tag: Optional[GaussianTag] = None):
        return cls([(tag, (), coeff)])

    @classmethod
    def gaussian(cls, exponent, coeff=1):
        return cls([(GaussianTag.from_exponent(exponent), (), coeff)])

    @classmethod
    def generator(cls, g: Generator, coeff=1):
        return cls([(None, (g,), coeff)])

    @classmethod
    def word(cls, generators: Sequence[Generator], coeff=1):
        return cls([(None, tuple(generators), coeff)])

    # Accessors

    def terms(self):
        """Yields (tag, word, coefficient) in canonical order."""
        for (key, word), coeff in self._terms.items():
            yield self._tags[key], word, coeff

    def __len__(self):
        return len(self._terms)

    @property
    def is_zero(self) -> bool:
        return len(self._terms) == 0

    def degrees(self):
        return sorted({len(word) for _, word in self._terms.keys()})

    def degree(self) -> int:
        """Form degree of a homogeneous expression, 0 for the zero form."""
        degrees = self.degrees()
        if len(degrees) > 1:
            raise DegreeError(f"Expression has mixed degrees {degrees}")
        return degrees[0] if degrees else 0

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    def vertices(self):
        return sorted({g.vertex_index for _, word in self._terms.keys() for g in word})

    def coefficient(self, word: Iterable[Generator]):
        """Returns [(tag, coefficient)] of the given word, sign-adjusted.

        The word need not be canonical; the coefficient is that of the word
        as given, e.g. coefficient([dt0, dz0]) = -coefficient([dz0, dt0]).
        """
        sign, word = canonical_word(word)
        if sign == 0:
            return []
        return [
            (self._tags[key], sign*coeff)
            for (key, w), coeff in self._terms.items() if w == word
        ]

    def words(self):
        return sorted({word for _, word in self._terms.keys()})

    # Arithmetic

    def __add__(self, other):
        other = _as_form(other)
        return FormExpression(itertools.chain(self.terms(), other.terms()))

    __radd__ = __add__

    def __neg__(self):
        return FormExpression((tag, word, -c) for tag, word, c in self.terms())

    def __sub__(self, other):
        return self + (-_as_form(other))

    def __rsub__(self, other):
        return _as_form(other) - self

    def __mul__(self, other):
        """Scalar multiplication only; use 'wedge' for forms."""
        if isinstance(other, FormExpression):
            return wedge(self, other)
        other = sympy.sympify(other)
        return FormExpression((tag, word, c*other) for tag, word, c in self.terms())

    def __rmul__(self, other):
        if isinstance(other, FormExpression):
            return wedge(other, self)
        return self * other

    def __eq__(self, other):
        if not isinstance(other, FormExpression):
            try:
                other = _as_form(other)
            except (TypeError, sympy.SympifyError):
                return NotImplemented
        return (self - other).is_zero

    __hash__ = None

    def wedge(self, other):
        return wedge(self, other)

    def derive(self, var):
        return derive(self, var)

    # Substitutions

    def subs(self, mapping: Mapping):
        """Substitutes symbols in coefficients and Gaussian exponents."""
        mapping = dict(mapping)
        return FormExpression(
            (GaussianTag.from_exponent(_exponent(tag).subs(mapping, simultaneous=True)),
             word, c.subs(mapping, simultaneous=True))
            for tag, word, c in self.terms()
        )

    def pullback(self, coord_map: Mapping = None, generator_map: Mapping = None):
        """Pulls back along a linear change of coordinates.

        Args:
            coord_map: Coordinate symbol -> expression substitutions.
            generator_map: Generator -> FormExpression (1-form) images;
                generators not in the map are kept.
        """
        coord_map = dict(coord_map or {})
        generator_map = dict(generator_map or {})
        result = FormExpression.zero()
        for tag, word, coeff in self.terms():
            head = FormExpression.scalar(
                coeff.subs(coord_map, simultaneous=True),
                GaussianTag.from_exponent(_exponent(tag).subs(coord_map, simultaneous=True)),
            )
            images = [generator_map.get(g, FormExpression.generator(g)) for g in word]
            result = result + wedge(head, *images)
        return result

    def map_coefficients(self, func):
        return FormExpression((tag, word, func(c)) for tag, word, c in self.terms())

    # Rendering

    def render(self) -> str:
        """Deterministic plain-text form, one term per line."""
        if self.is_zero:
            return "0"
        lines = []
        for tag, word, coeff in self.terms():
            parts = [f"({sympy.sstr(sympy.factor(coeff), order='lex')})"]
            if tag is not None:
                parts.append(f"exp({sympy.sstr(tag.exponent, order='lex')})")
            if word:
                parts.append("^".join(str(g) for g in word))
            lines.append(" * ".join(parts))
        return "\n".join(lines)

    def __str__(self):
        return self.render()

    def __repr__(self):
        return f"FormExpression({len(self)} terms)"


def _as_form(value) -> FormExpression:
    if isinstance(value, FormExpression):
        return value
    if isinstance(value, Generator):
        return FormExpression.generator(value)
    return FormExpression.scalar(sympy.sympify(value))


def _wedge(forms, independent: bool) -> FormExpression:
    if len(forms) == 0:
        return FormExpression.scalar(1)
    result = _as_form(forms[0])
    for other in forms[1:]:
        other = _as_form(other)
        result = FormExpression(
            (_product_tag(ta, tb, independent), wa + wb, ca*cb)
            for (ta, wa, ca), (tb, wb, cb) in itertools.product(result.terms(), other.terms())
        )
    return result

def wedge(*forms) -> FormExpression:
    """Wedge product, bilinear and graded-commutative.

    Gaussian factors must agree where both sides carry one, i.e. equal tags
    multiply (exponents add) and a tagless side leaves the tag unchanged.

    Raises:
        DomainError: For two different Gaussian factors.
    """
    return _wedge(forms, independent=False)

def gaussian_product(*forms) -> FormExpression:
    """Wedge product of independent heat kernels or input envelopes.

    Unlike 'wedge', different Gaussian factors are multiplied, so that e.g.
    exp(-|q_0|^2/4T_0) ^ exp(-|q_1|^2/4T_1) carries the summed exponent.
    """
    return _wedge(forms, independent=True)

def derive(F: FormExpression, var) -> FormExpression:
    """Applies the derivation d/d(var) to the coefficients of F.

    The product rule covers the Gaussian factor, i.e. each term c*exp(Q)
    maps to (dc/dvar + c*dQ/dvar)*exp(Q). Generators are constant.

    Args:
        var: A coordinate symbol z_i, zbar_i, t_i, or a scale symbol.
    """
    if not isinstance(var, sympy.Symbol):
        raise DomainError(f"Cannot differentiate by '{var}'")
    F = _as_form(F)
    return FormExpression(
        (tag, word, sympy.diff(c, var) + c*sympy.diff(_exponent(tag), var))
        for tag, word, c in F.terms()
    )

def interior(F: FormExpression, g: Generator) -> FormExpression:
    """Contraction with the vector dual to 'g'.

    Removing 'g' from position p of a word contributes the sign (-1)^p, so
    that interior(g ^ F) + g ^ interior(F) = F.
    """
    F = _as_form(F)
    terms = []
    for tag, word, coeff in F.terms():
        if g in word:
            p = word.index(g)
            terms.append((tag, word[:p] + word[p+1:], (-1)**p * coeff))
    return FormExpression(terms)

def _point_substitutions(point: Mapping, scales) -> Dict:
    subs = {}
    for key, value in dict(point).items():
        symbol = key if isinstance(key, sympy.Symbol) else None
        name = key.name if symbol is not None else str(key)
        match = RE_COORDINATE.match(name)
        if match is None:
            raise DomainError(f"Unknown coordinate '{name}'")
        head, index = match.group(1), int(match.group(2))
        value = complex(value)
        if head == "z":
            subs[z(index)] = value
            subs.setdefault(zbar(index), value.conjugate())
        elif head == "zbar":
            subs[zbar(index)] = value
        else:
            subs[t(index)] = value.real
    if scales is not None:
        if isinstance(scales, Mapping):
            for key, value in scales.items():
                symbol = key if isinstance(key, sympy.Symbol) else (
                    EPSILON if str(key) == "epsilon" else T(int(str(key).lstrip("T"))))
                subs[symbol] = float(value)
        else:
            if np.ndim(scales) == 0:
                scales = [scales]
            for i, value in enumerate(scales):
                if value <= 0:
                    raise DomainError(f"Scale T{i} = {value} is not positive")
                subs[T(i)] = float(value)
    return subs

def evaluate(F: FormExpression, point: Mapping, scales=None, word: Iterable[Generator] = ()):
    """Numerical value of the coefficient of 'word' at a point.

    Args:
        point: Mapping of coordinates (symbols or names like "z0", "t1") to
            numbers. A missing zbar_i defaults to the conjugate of z_i.
        scales: Sequence (T_0, T_1, ...) or mapping including "epsilon".
        word: Generator word, typically the top form.

    Raises:
        DegreeError: If F has mixed degree and 'word' is not of top degree.
    """
    F = _as_form(F)
    word = tuple(word)
    degrees = F.degrees()
    if len(degrees) > 1 and len(word) != degrees[-1]:
        raise DegreeError(
            f"Word of degree {len(word)} requested from expression of degrees {degrees}"
        )
    subs = _point_substitutions(point, scales)
    total = 0j
    for tag, coeff in F.coefficient(word):
        value = complex(sympy.N((coeff * sympy.exp(_exponent(tag))).subs(subs)))
        total += value
    if abs(total.imag) <= 1e-15 * max(1.0, abs(total.real)):
        return float(total.real)
    return total
