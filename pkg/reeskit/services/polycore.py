"""
Exact polynomial arithmetic over the rationals.

Rings carry a positive integer degree per variable, polynomials are sparse maps from
exponent tuples to ``Fraction`` coefficients, and term orders are realized as sort keys so a
single comparison kernel serves lex, graded reverse lex and weight-refined orders.
"""

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from types import MappingProxyType
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

from reeskit.errors import (
    NonHomogeneousError,
    ParseError,
    RingMismatchError,
    ZeroElementError,
)

Monomial = tuple[int, ...]
Coefficient = Union[int, Fraction]

# Value of weight_value on the zero polynomial
INFINITY = float("inf")

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")
_IDENTIFIER_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def parse_rational(value: Union[int, str, Fraction]) -> Fraction:
    """
    Parse an integer or a ``"p/q"`` string into a Fraction.

    Decimals and exponents are rejected so every accepted value is exact as written.
    """
    if isinstance(value, bool):
        raise ValueError(f"Not a rational number: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        match = _RATIONAL_RE.match(value)
        if match:
            numerator = int(match.group(1))
            denominator = int(match.group(2)) if match.group(2) else 1
            if denominator == 0:
                raise ValueError(f"Zero denominator in rational {value!r}")
            return Fraction(numerator, denominator)
    raise ValueError(f"Not a rational number: {value!r}")


def format_rational(value: Fraction) -> str:
    """Canonical text for a rational: ``"p/q"`` in lowest terms or a bare integer."""
    return str(Fraction(value))


def rational_json(value: Fraction) -> Union[int, str]:
    """JSON rendering: integers stay integers, everything else becomes ``"p/q"``."""
    value = Fraction(value)
    if value.denominator == 1:
        return value.numerator
    return format_rational(value)


# --- monomials -------------------------------------------------------------------------


def monomial_mul(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


def monomial_divides(a: Monomial, b: Monomial) -> bool:
    """True iff a divides b."""
    return all(x <= y for x, y in zip(a, b))


def monomial_quotient(b: Monomial, a: Monomial) -> Monomial:
    return tuple(y - x for x, y in zip(a, b))


def monomial_lcm(a: Monomial, b: Monomial) -> Monomial:
    return tuple(max(x, y) for x, y in zip(a, b))


def monomials_coprime(a: Monomial, b: Monomial) -> bool:
    return all(x == 0 or y == 0 for x, y in zip(a, b))


def grevlex_key(grading: Sequence[int]) -> Callable[[Monomial], tuple]:
    def key(mono: Monomial) -> tuple:
        degree = sum(g * e for g, e in zip(grading, mono))
        return (degree,) + tuple(-e for e in reversed(mono))

    return key


@lru_cache(maxsize=None)
def _monomials_of_degree(grading: tuple[int, ...], n: int) -> tuple[Monomial, ...]:
    found: list[Monomial] = []

    def extend(prefix: list[int], position: int, remaining: int) -> None:
        if position == len(grading) - 1:
            if remaining % grading[position] == 0:
                found.append(tuple(prefix + [remaining // grading[position]]))
            return
        for e in range(remaining // grading[position] + 1):
            extend(prefix + [e], position + 1, remaining - e * grading[position])

    if n < 0 or not grading:
        return ()
    extend([], 0, n)
    return tuple(sorted(found, key=grevlex_key(grading), reverse=True))


def monomial_string(variables: Sequence[str], mono: Monomial) -> str:
    parts = []
    for name, e in zip(variables, mono):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts) if parts else "1"


# --- rings -----------------------------------------------------------------------------


@dataclass(frozen=True)
class PolynomialRing:
    """Polynomial ring over the rationals with a positive degree per variable."""

    variables: tuple[str, ...]
    grading: tuple[int, ...] = ()

    def __post_init__(self):
        variables = tuple(self.variables)
        for name in variables:
            if not isinstance(name, str) or not _IDENTIFIER_RE.match(name):
                raise ValueError(f"Invalid variable name: {name!r}")
        if len(set(variables)) != len(variables):
            raise ValueError(f"Duplicate variable names in {variables}")
        grading = tuple(self.grading) if self.grading else (1,) * len(variables)
        if len(grading) != len(variables):
            raise RingMismatchError(
                f"Grading has {len(grading)} entries for {len(variables)} variables"
            )
        for g in grading:
            if isinstance(g, bool) or not isinstance(g, int) or g <= 0:
                raise ValueError(f"Variable degrees must be positive integers: {grading}")
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "grading", grading)

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def degree_of(self, mono: Monomial) -> int:
        return sum(g * e for g, e in zip(self.grading, mono))

    def monomials_of_degree(self, n: int) -> tuple[Monomial, ...]:
        """All monomials of weighted degree n, descending in graded reverse lex."""
        return _monomials_of_degree(self.grading, n)

    def zero(self) -> "Polynomial":
        return Polynomial(self, {})

    def one(self) -> "Polynomial":
        return self.constant(1)

    def constant(self, c: Coefficient) -> "Polynomial":
        return Polynomial(self, {(0,) * self.nvars: c})

    def monomial(self, mono: Monomial, coefficient: Coefficient = 1) -> "Polynomial":
        return Polynomial(self, {tuple(mono): coefficient})

    def variable(self, name: str) -> "Polynomial":
        if name not in self.variables:
            raise ValueError(f"Unknown variable {name!r}")
        index = self.variables.index(name)
        mono = tuple(1 if i == index else 0 for i in range(self.nvars))
        return self.monomial(mono)

    def gens(self) -> tuple["Polynomial", ...]:
        return tuple(self.variable(name) for name in self.variables)

    def parse(self, text: str) -> "Polynomial":
        return parse_polynomial(text, self)

    def __str__(self) -> str:
        if all(g == 1 for g in self.grading):
            return f"QQ[{', '.join(self.variables)}]"
        graded = ", ".join(f"{v}:{g}" for v, g in zip(self.variables, self.grading))
        return f"QQ[{graded}]"


# --- polynomials -----------------------------------------------------------------------


class Polynomial:
    """
    Sparse polynomial with exact rational coefficients.

    Immutable: arithmetic returns new objects. Zero coefficients are never stored, so two
    polynomials are equal iff their term maps are equal.
    """

    __slots__ = ("ring", "_terms", "_hash")

    def __init__(self, ring: PolynomialRing, terms: Mapping[Monomial, Coefficient]):
        cleaned: dict[Monomial, Fraction] = {}
        for mono, c in terms.items():
            if len(mono) != ring.nvars:
                raise RingMismatchError(
                    f"Exponent {mono} has {len(mono)} entries, ring has {ring.nvars}"
                )
            if c:
                cleaned[tuple(mono)] = Fraction(c)
        self.ring = ring
        self._terms = cleaned
        self._hash: Optional[int] = None

    @classmethod
    def _trusted(
        cls, ring: PolynomialRing, terms: dict[Monomial, Fraction]
    ) -> "Polynomial":
        poly = cls.__new__(cls)
        poly.ring = ring
        poly._terms = terms
        poly._hash = None
        return poly

    @property
    def terms(self) -> Mapping[Monomial, Fraction]:
        return MappingProxyType(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = self.ring.constant(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.ring == other.ring and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.ring, frozenset(self._terms.items())))
        return self._hash

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.ring != self.ring:
                raise RingMismatchError(f"Ring mismatch: {self.ring} vs {other.ring}")
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.ring.constant(other)
        raise TypeError(f"Cannot combine Polynomial with {type(other).__name__}")

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        terms = dict(self._terms)
        for mono, c in other._terms.items():
            value = terms.get(mono, 0) + c
            if value:
                terms[mono] = value
            else:
                terms.pop(mono, None)
        return Polynomial._trusted(self.ring, terms)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._trusted(
            self.ring, {mono: -c for mono, c in self._terms.items()}
        )

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.scale(other)
        other = self._coerce(other)
        terms: dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                mono = monomial_mul(m1, m2)
                value = terms.get(mono, 0) + c1 * c2
                if value:
                    terms[mono] = value
                else:
                    terms.pop(mono, None)
        return Polynomial._trusted(self.ring, terms)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "Polynomial":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError(f"Exponent must be a non-negative integer, got {exponent}")
        result = self.ring.one()
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            exponent >>= 1
            if exponent:
                base = base * base
        return result

    def scale(self, c: Coefficient) -> "Polynomial":
        c = Fraction(c)
        if not c:
            return self.ring.zero()
        return Polynomial._trusted(
            self.ring, {mono: c * v for mono, v in self._terms.items()}
        )

    def mul_monomial(self, mono: Monomial, c: Coefficient = 1) -> "Polynomial":
        c = Fraction(c)
        if not c:
            return self.ring.zero()
        return Polynomial._trusted(
            self.ring, {monomial_mul(m, mono): c * v for m, v in self._terms.items()}
        )

    def degree(self) -> int:
        """Largest weighted degree of a term."""
        if not self._terms:
            raise ZeroElementError("The zero polynomial has no degree")
        return max(self.ring.degree_of(mono) for mono in self._terms)

    def is_homogeneous(self) -> bool:
        """Zero counts as homogeneous of every degree."""
        degrees = {self.ring.degree_of(mono) for mono in self._terms}
        return len(degrees) <= 1

    def homogeneous_degree(self) -> int:
        if not self.is_homogeneous():
            raise NonHomogeneousError(f"{self} is not homogeneous")
        return self.degree()

    def leading_term(self, order: "TermOrder") -> tuple[Monomial, Fraction]:
        if not self._terms:
            raise ZeroElementError("The zero polynomial has no leading term")
        key = order.key_function(self.ring)
        mono = max(self._terms, key=key)
        return mono, self._terms[mono]

    def monic(self, order: "TermOrder") -> "Polynomial":
        if not self._terms:
            return self
        _, lc = self.leading_term(order)
        return self.scale(1 / lc)

    def sorted_terms(
        self, order: Optional["TermOrder"] = None
    ) -> list[tuple[Monomial, Fraction]]:
        """Terms in descending order (graded reverse lex by default)."""
        key = (
            order.key_function(self.ring) if order else grevlex_key(self.ring.grading)
        )
        return sorted(self._terms.items(), key=lambda item: key(item[0]), reverse=True)

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        pieces: list[str] = []
        for mono, c in self.sorted_terms():
            sign = "-" if c < 0 else "+"
            magnitude = abs(c)
            body = monomial_string(self.ring.variables, mono)
            if body == "1":
                text = format_rational(magnitude)
            elif magnitude == 1:
                text = body
            else:
                text = f"{format_rational(magnitude)}*{body}"
            if not pieces:
                pieces.append(f"-{text}" if sign == "-" else text)
            else:
                pieces.append(f"{sign} {text}")
        return " ".join(pieces)

    def __repr__(self) -> str:
        return f"Polynomial({str(self)!r})"


# --- weights and orders ----------------------------------------------------------------


@dataclass(frozen=True)
class WeightVector:
    """Non-negative rational weights, one per coordinate."""

    weights: tuple[Fraction, ...]

    def __post_init__(self):
        weights = tuple(parse_rational(w) for w in self.weights)
        for w in weights:
            if w < 0:
                raise ValueError(f"Weights must be non-negative, got {format_rational(w)}")
        object.__setattr__(self, "weights", weights)

    @classmethod
    def of(cls, values: Iterable[Union[int, str, Fraction]]) -> "WeightVector":
        return cls(tuple(values))  # type: ignore[arg-type]

    def __len__(self) -> int:
        return len(self.weights)

    def is_strictly_positive(self) -> bool:
        return all(w > 0 for w in self.weights)

    def value(self, exponents: Sequence[int]) -> Fraction:
        if len(exponents) != len(self.weights):
            raise RingMismatchError(
                f"Weight vector of length {len(self.weights)} applied to "
                f"{len(exponents)} coordinates"
            )
        return sum((w * e for w, e in zip(self.weights, exponents)), Fraction(0))

    def __str__(self) -> str:
        return "(" + ", ".join(format_rational(w) for w in self.weights) + ")"


@dataclass(frozen=True)
class TermOrder:
    """
    A monomial order realized as a sort key (larger key = larger monomial).

    ``weight`` orders use the min convention: the monomial of smallest weight leads, and
    ties go to ``tiebreak``. Internally this is the key ``(-weight, tiebreak key)``.
    """

    kind: str
    weights: Optional[WeightVector] = None
    tiebreak: Optional["TermOrder"] = field(default=None)

    def __post_init__(self):
        if self.kind not in ("lex", "grevlex", "weight"):
            raise ValueError(f"Unknown term order {self.kind!r}")
        if self.kind == "weight" and self.weights is None:
            raise ValueError("Weight-refined orders need a weight vector")

    @classmethod
    def lex(cls) -> "TermOrder":
        return cls("lex")

    @classmethod
    def grevlex(cls) -> "TermOrder":
        return cls("grevlex")

    @classmethod
    def weight_refined(
        cls, weights: WeightVector, tiebreak: Optional["TermOrder"] = None
    ) -> "TermOrder":
        return cls("weight", weights, tiebreak or cls.grevlex())

    @classmethod
    def named(cls, name: str) -> "TermOrder":
        if name not in ("lex", "grevlex"):
            raise ValueError(f"Unknown term order {name!r}; use 'lex' or 'grevlex'")
        return cls(name)

    def key_function(self, ring: PolynomialRing) -> Callable[[Monomial], tuple]:
        return _key_function(self, ring.grading)

    def __str__(self) -> str:
        if self.kind == "weight":
            return f"weight{self.weights}>{self.tiebreak}"
        return self.kind


@lru_cache(maxsize=None)
def _key_function(
    order: TermOrder, grading: tuple[int, ...]
) -> Callable[[Monomial], tuple]:
    if order.kind == "lex":
        return lambda mono: tuple(mono)
    if order.kind == "grevlex":
        return grevlex_key(grading)
    assert order.weights is not None and order.tiebreak is not None
    weights = order.weights
    if len(weights) != len(grading):
        raise RingMismatchError(
            f"Weight vector of length {len(weights)} for a ring with "
            f"{len(grading)} variables"
        )
    tiebreak = _key_function(order.tiebreak, grading)
    return lambda mono: (-weights.value(mono),) + tiebreak(mono)


def weight_value(f: Polynomial, w: WeightVector) -> Union[Fraction, float]:
    """Minimum w-weight over the terms of f; ``INFINITY`` for the zero polynomial."""
    if len(w) != f.ring.nvars:
        raise RingMismatchError(
            f"Weight vector of length {len(w)} for a ring with {f.ring.nvars} variables"
        )
    if f.is_zero():
        return INFINITY
    return min(w.value(mono) for mono in f.terms)


def initial_form(f: Polynomial, w: WeightVector) -> Polynomial:
    """Sum of the terms of f of minimal w-weight."""
    if f.is_zero():
        raise ZeroElementError("The zero polynomial has no initial form")
    lowest = weight_value(f, w)
    return Polynomial(
        f.ring, {mono: c for mono, c in f.terms.items() if w.value(mono) == lowest}
    )


# --- parser ----------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"(?P<space>\s+)|(?P<number>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*^/()])"
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int


def _position(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    column = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, column


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    offset = 0
    while offset < len(text):
        match = _TOKEN_RE.match(text, offset)
        if not match:
            line, column = _position(text, offset)
            raise ParseError(f"Unexpected character {text[offset]!r}", line, column)
        kind = match.lastgroup or ""
        if kind != "space":
            tokens.append(_Token(kind, match.group(), offset))
        offset = match.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    """Recursive descent over: expr := [+-] term {(+|-) term}; term := factor {* factor};
    factor := coefficient | atom [^ integer]; coefficient := power [/ power];
    power := integer [^ integer]; atom := name | ( expr ).

    ``^`` binds tighter than ``/``, so ``2/3^2`` is 2/9; write ``(2/3)^2`` for 4/9."""

    def __init__(self, text: str, ring: PolynomialRing):
        self.text = text
        self.ring = ring
        self.tokens = _tokenize(text)
        self.index = 0

    def peek(self) -> _Token:
        return self.tokens[self.index]

    def advance(self) -> _Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def fail(self, message: str, token: Optional[_Token] = None) -> ParseError:
        token = token or self.peek()
        line, column = _position(self.text, token.offset)
        return ParseError(message, line, column)

    def parse(self) -> Polynomial:
        if self.peek().kind == "end":
            raise self.fail("Empty input; write the zero polynomial as '0'")
        result = self.expression()
        if self.peek().kind != "end":
            raise self.fail(f"Unexpected token {self.peek().text!r}")
        return result

    def expression(self) -> Polynomial:
        negate = False
        if self.peek().text in ("+", "-"):
            negate = self.advance().text == "-"
        result = self.term()
        if negate:
            result = -result
        while self.peek().text in ("+", "-"):
            op = self.advance().text
            right = self.term()
            result = result + right if op == "+" else result - right
        return result

    def term(self) -> Polynomial:
        result = self.factor()
        while True:
            token = self.peek()
            if token.text == "*":
                self.advance()
                result = result * self.factor()
            elif token.kind in ("name", "number") or token.text == "(":
                raise self.fail("Explicit '*' required between factors", token)
            elif token.text == "/":
                raise self.fail(
                    "Division is only allowed inside a rational coefficient p/q", token
                )
            else:
                return result

    def factor(self) -> Polynomial:
        if self.peek().kind == "number":
            return self.coefficient()
        base = self.atom()
        if self.peek().text == "^":
            self.advance()
            base = base ** self.exponent()
        return base

    def exponent(self) -> int:
        token = self.peek()
        if token.kind != "number":
            raise self.fail("Exponent must be a non-negative integer", token)
        self.advance()
        return int(token.text)

    def power_of_integer(self) -> int:
        value = int(self.advance().text)
        if self.peek().text == "^":
            self.advance()
            value = value ** self.exponent()
        return value

    def coefficient(self) -> Polynomial:
        numerator = self.power_of_integer()
        if self.peek().text != "/":
            return self.ring.constant(numerator)
        self.advance()
        denominator_token = self.peek()
        if denominator_token.kind != "number":
            raise self.fail("Malformed rational coefficient", denominator_token)
        denominator = self.power_of_integer()
        if denominator == 0:
            raise self.fail(
                "Malformed rational coefficient: zero denominator", denominator_token
            )
        return self.ring.constant(Fraction(numerator, denominator))

    def atom(self) -> Polynomial:
        token = self.advance()
        if token.kind == "name":
            if token.text not in self.ring.variables:
                raise self.fail(f"Undeclared variable {token.text!r}", token)
            return self.ring.variable(token.text)
        if token.text == "(":
            inner = self.expression()
            closing = self.peek()
            if closing.text != ")":
                raise self.fail("Expected ')'", closing)
            self.advance()
            return inner
        if token.kind == "end":
            raise self.fail("Unexpected end of input", token)
        raise self.fail(f"Unexpected token {token.text!r}", token)


def parse_polynomial(text: str, ring: PolynomialRing) -> Polynomial:
    """
    Parse polynomial text in the declared variables of ``ring``.

    Args:
        text: e.g. ``"u^3 - v^3 + (u+v)*w^2"``; ``*`` is mandatory, coefficients are
            integers or ``p/q``.
        ring: the ring whose variables may appear.

    Returns:
        The expanded Polynomial.
    """
    if not isinstance(text, str):
        raise ParseError(f"Expected polynomial text, got {type(text).__name__}")
    return _Parser(text, ring).parse()
