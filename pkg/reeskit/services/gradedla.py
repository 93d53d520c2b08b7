"""
Per-degree exact linear algebra.

Subspaces of a degree-n piece are kept as sparse integer rows in echelon form. Elimination
is fraction-free: a step replaces ``v`` by ``a*v - b*row`` and then strips the content of
the result, so entries stay integral and small without ever dividing.
"""

import logging
import threading
from bisect import insort
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import gcd, lcm
from typing import Iterable, Mapping, Optional, Sequence, Union

from reeskit.config import Budget
from reeskit.errors import ContainmentError, NonHomogeneousError, RingMismatchError
from reeskit.services.groebner import GroebnerBasis, Ideal, default_cache, normal_form
from reeskit.services.polycore import (
    Monomial,
    Polynomial,
    PolynomialRing,
    TermOrder,
    monomial_divides,
)

logger = logging.getLogger(__name__)

SparseVector = dict[int, int]
VectorLike = Union[Mapping[int, Union[int, Fraction]], Sequence[Union[int, Fraction]]]


def _as_mapping(vec: VectorLike) -> Mapping[int, Union[int, Fraction]]:
    if isinstance(vec, Mapping):
        return vec
    return {i: x for i, x in enumerate(vec) if x}


def _strip_content(vec: SparseVector) -> SparseVector:
    g = 0
    for x in vec.values():
        g = gcd(g, x)
        if g == 1:
            return vec
    if g > 1:
        return {k: x // g for k, x in vec.items()}
    return vec


def integer_vector(vec: VectorLike) -> SparseVector:
    """Primitive integer multiple of a rational sparse vector (zero entries dropped)."""
    mapping = _as_mapping(vec)
    denominator = 1
    for x in mapping.values():
        if isinstance(x, Fraction):
            denominator = lcm(denominator, x.denominator)
    result: SparseVector = {}
    for k, x in mapping.items():
        value = x * denominator
        if value:
            result[int(k)] = int(value)
    return _strip_content(result)


class RowEchelon:
    """
    Incremental row echelon form over the integers.

    Each stored row has a positive pivot at its smallest column and distinct rows have
    distinct pivots. ``reduce`` returns a primitive multiple of the remainder.
    """

    __slots__ = ("_rows", "_pivots")

    def __init__(self):
        self._rows: dict[int, SparseVector] = {}
        self._pivots: list[int] = []

    def copy(self) -> "RowEchelon":
        new = RowEchelon()
        new._rows = dict(self._rows)
        new._pivots = list(self._pivots)
        return new

    @property
    def rank(self) -> int:
        return len(self._pivots)

    @property
    def pivots(self) -> tuple[int, ...]:
        return tuple(self._pivots)

    def rows(self) -> list[SparseVector]:
        return [dict(self._rows[c]) for c in self._pivots]

    def reduce(self, vec: VectorLike) -> SparseVector:
        v = integer_vector(vec)
        if not v:
            return v
        for c in self._pivots:
            b = v.get(c)
            if not b:
                continue
            row = self._rows[c]
            a = row[c]
            g = gcd(a, b)
            a //= g
            b //= g
            combined = {k: a * x for k, x in v.items()} if a != 1 else dict(v)
            for k, x in row.items():
                value = combined.get(k, 0) - b * x
                if value:
                    combined[k] = value
                else:
                    combined.pop(k, None)
            v = _strip_content(combined)
            if not v:
                break
        return v

    def remainder(self, vec: VectorLike) -> dict[int, Fraction]:
        """Exact remainder of vec against the stored rows, without rescaling."""
        v = {int(k): Fraction(x) for k, x in _as_mapping(vec).items() if x}
        for c in self._pivots:
            b = v.get(c)
            if not b:
                continue
            row = self._rows[c]
            factor = b / row[c]
            for k, x in row.items():
                value = v.get(k, 0) - factor * x
                if value:
                    v[k] = value
                else:
                    v.pop(k, None)
        return v

    def contains(self, vec: VectorLike) -> bool:
        return not self.reduce(vec)

    def insert(self, vec: VectorLike) -> bool:
        """Add a vector to the span; returns False when it was already inside."""
        remainder = self.reduce(vec)
        if not remainder:
            return False
        pivot = min(remainder)
        if remainder[pivot] < 0:
            remainder = {k: -x for k, x in remainder.items()}
        self._rows[pivot] = remainder
        insort(self._pivots, pivot)
        return True


def matrix_rank(rows: Iterable[VectorLike], pivoting: str = "leading") -> int:
    """
    Exact rank of a rational matrix given by (sparse or dense) rows.

    ``pivoting="trailing"`` eliminates from the last column instead of the first; both
    must agree, which makes a cheap determinism cross-check.
    """
    if pivoting not in ("leading", "trailing"):
        raise ValueError(f"Unknown pivoting {pivoting!r}")
    echelon = RowEchelon()
    for row in rows:
        mapping = _as_mapping(row)
        if pivoting == "trailing":
            mapping = {-int(k) - 1: x for k, x in mapping.items()}
        echelon.insert(mapping)
    return echelon.rank


# --- degree slices ---------------------------------------------------------------------


class DegreeSlice:
    """
    A subspace of the degree-n piece of a graded space.

    ``ambient`` lists the coordinate monomials (standard monomials of a quotient, or all
    monomials of a polynomial ring); the subspace is the row span of ``rows``.
    Treated as immutable once built.
    """

    __slots__ = ("degree", "ambient", "_echelon")

    def __init__(
        self,
        degree: int,
        ambient: Sequence[Monomial],
        rows: Iterable[VectorLike] = (),
    ):
        self.degree = degree
        self.ambient = tuple(ambient)
        self._echelon = RowEchelon()
        width = len(self.ambient)
        for row in rows:
            mapping = _as_mapping(row)
            if any(not 0 <= int(k) < width for k in mapping):
                raise RingMismatchError(
                    f"Row has coordinates outside an ambient of dimension {width}"
                )
            self._echelon.insert(mapping)

    @classmethod
    def _from_echelon(
        cls, degree: int, ambient: tuple[Monomial, ...], echelon: RowEchelon
    ) -> "DegreeSlice":
        piece = cls.__new__(cls)
        piece.degree = degree
        piece.ambient = ambient
        piece._echelon = echelon
        return piece

    @classmethod
    def full(cls, degree: int, ambient: Sequence[Monomial]) -> "DegreeSlice":
        return cls(degree, ambient, ({i: 1} for i in range(len(ambient))))

    @classmethod
    def zero(cls, degree: int, ambient: Sequence[Monomial]) -> "DegreeSlice":
        return cls(degree, ambient)

    @property
    def dim(self) -> int:
        return self._echelon.rank

    @property
    def ambient_dim(self) -> int:
        return len(self.ambient)

    @property
    def rows(self) -> list[SparseVector]:
        return self._echelon.rows()

    def basis_matrix(self) -> list[list[Fraction]]:
        width = len(self.ambient)
        return [
            [Fraction(row.get(j, 0)) for j in range(width)] for row in self.rows
        ]

    def is_full(self) -> bool:
        return self.dim == len(self.ambient)

    def reduce(self, vec: VectorLike) -> SparseVector:
        return self._echelon.reduce(vec)

    def remainder(self, vec: VectorLike) -> dict[int, Fraction]:
        return self._echelon.remainder(vec)

    def contains(self, vec: VectorLike) -> bool:
        return self._echelon.contains(vec)

    def contains_slice(self, other: "DegreeSlice") -> bool:
        _check_compatible([self, other])
        if self.is_full():
            return True
        return all(self.contains(row) for row in other.rows)

    def same_space(self, other: "DegreeSlice") -> bool:
        return (
            self.dim == other.dim
            and self.contains_slice(other)
            and other.contains_slice(self)
        )

    def echelon_copy(self) -> RowEchelon:
        return self._echelon.copy()

    def polynomials(self, ring: PolynomialRing) -> list[Polynomial]:
        return [vector_polynomial(row, self.ambient, ring) for row in self.rows]

    def __repr__(self) -> str:
        return f"DegreeSlice(degree={self.degree}, dim={self.dim}/{len(self.ambient)})"


def vector_polynomial(
    vec: Mapping[int, Union[int, Fraction]],
    ambient: Sequence[Monomial],
    ring: PolynomialRing,
) -> Polynomial:
    return Polynomial(ring, {ambient[k]: Fraction(x) for k, x in vec.items()})


def _check_compatible(slices: Sequence[DegreeSlice]) -> None:
    first = slices[0]
    for piece in slices[1:]:
        if piece.degree != first.degree:
            raise RingMismatchError(
                f"Degree mismatch: {piece.degree} vs {first.degree}"
            )
        if piece.ambient != first.ambient:
            raise RingMismatchError("Slices live in different ambient coordinates")


def _intersect_pair(a: DegreeSlice, b: DegreeSlice) -> DegreeSlice:
    if a.is_full():
        return b
    if b.is_full():
        return a
    if not a.dim or not b.dim:
        return DegreeSlice.zero(a.degree, a.ambient)
    # Zassenhaus: rows (x | x) for x in A and (y | 0) for y in B; rows with an empty
    # left half span A ∩ B in their right half.
    width = len(a.ambient)
    echelon = RowEchelon()
    for row in a.rows:
        doubled = dict(row)
        doubled.update({k + width: x for k, x in row.items()})
        echelon.insert(doubled)
    for row in b.rows:
        echelon.insert(row)
    result = RowEchelon()
    for row in echelon.rows():
        if min(row) >= width:
            result.insert({k - width: x for k, x in row.items()})
    return DegreeSlice._from_echelon(a.degree, a.ambient, result)


def intersect_slices(slices: Sequence[DegreeSlice]) -> DegreeSlice:
    """Exact intersection of row spaces sharing degree and ambient coordinates."""
    if not slices:
        raise ValueError("intersect_slices needs at least one slice")
    _check_compatible(slices)
    result = slices[0]
    for piece in slices[1:]:
        result = _intersect_pair(result, piece)
    return result


def sum_slices(slices: Sequence[DegreeSlice]) -> DegreeSlice:
    if not slices:
        raise ValueError("sum_slices needs at least one slice")
    _check_compatible(slices)
    largest = max(slices, key=lambda s: s.dim)
    echelon = largest.echelon_copy()
    for piece in slices:
        if piece is largest:
            continue
        for row in piece.rows:
            echelon.insert(row)
    return DegreeSlice._from_echelon(largest.degree, largest.ambient, echelon)


# --- quotient rings --------------------------------------------------------------------


class QuotientRing:
    """
    R = P/I for a homogeneous ideal I.

    Degree-n coordinates are the standard monomials of degree n modulo the graded reverse
    lex Gröbner basis of I; normal forms of monomials are memoized.
    """

    def __init__(
        self,
        ambient: PolynomialRing,
        relations: Union[Ideal, Sequence[Polynomial]] = (),
        budget: Optional[Budget] = None,
    ):
        ideal = (
            relations
            if isinstance(relations, Ideal)
            else Ideal(ambient, tuple(relations))
        )
        if ideal.ring != ambient:
            raise RingMismatchError(f"Relations are not in {ambient}")
        if not ideal.is_homogeneous():
            raise NonHomogeneousError(f"Relations must be homogeneous; got {ideal}")
        self.ambient = ambient
        self.relations = ideal
        self.groebner_basis: GroebnerBasis = default_cache.get(
            ideal, TermOrder.grevlex(), budget
        )
        self._leading = self.groebner_basis.leading_monomials
        self._lock = threading.Lock()
        self._nf: dict[Monomial, dict[Monomial, Fraction]] = {}
        self._standard: dict[int, tuple[Monomial, ...]] = {}
        self._index: dict[int, dict[Monomial, int]] = {}

    @classmethod
    def polynomial_ring(cls, ambient: PolynomialRing) -> "QuotientRing":
        return cls(ambient, ())

    def is_zero_ring(self) -> bool:
        return self.groebner_basis.is_unit()

    def parse(self, text: str) -> Polynomial:
        return self.ambient.parse(text)

    def standard_monomials(self, n: int) -> tuple[Monomial, ...]:
        with self._lock:
            cached = self._standard.get(n)
        if cached is not None:
            return cached
        standard = tuple(
            mono
            for mono in self.ambient.monomials_of_degree(n)
            if not any(monomial_divides(lm, mono) for lm in self._leading)
        )
        with self._lock:
            self._standard.setdefault(n, standard)
            self._index.setdefault(n, {mono: i for i, mono in enumerate(standard)})
            return self._standard[n]

    def hilbert_function(self, n: int) -> int:
        return len(self.standard_monomials(n))

    def _index_of(self, n: int) -> dict[Monomial, int]:
        self.standard_monomials(n)
        return self._index[n]

    def monomial_normal_form(self, mono: Monomial) -> dict[Monomial, Fraction]:
        with self._lock:
            cached = self._nf.get(mono)
        if cached is not None:
            return cached
        if not any(monomial_divides(lm, mono) for lm in self._leading):
            reduced = {mono: Fraction(1)}
        else:
            reduced = dict(
                normal_form(self.ambient.monomial(mono), self.groebner_basis).terms
            )
        with self._lock:
            return self._nf.setdefault(mono, reduced)

    def normal_form(self, f: Polynomial) -> Polynomial:
        if f.ring != self.ambient:
            raise RingMismatchError(f"{f} is not in {self.ambient}")
        terms: dict[Monomial, Fraction] = {}
        for mono, c in f.terms.items():
            for target, x in self.monomial_normal_form(mono).items():
                value = terms.get(target, 0) + c * x
                if value:
                    terms[target] = value
                else:
                    terms.pop(target, None)
        return Polynomial(self.ambient, terms)

    def is_zero(self, f: Polynomial) -> bool:
        return self.normal_form(f).is_zero()

    def coordinates(self, f: Polynomial, n: int) -> dict[int, Fraction]:
        """Coordinates of the class of a degree-n homogeneous f in the standard basis."""
        reduced = self.normal_form(f)
        index = self._index_of(n)
        coords: dict[int, Fraction] = {}
        for mono, c in reduced.terms.items():
            position = index.get(mono)
            if position is None:
                raise NonHomogeneousError(f"{f} is not homogeneous of degree {n}")
            coords[position] = c
        return coords

    def element(self, vec: Mapping[int, Union[int, Fraction]], n: int) -> Polynomial:
        return vector_polynomial(vec, self.standard_monomials(n), self.ambient)

    def __repr__(self) -> str:
        return f"QuotientRing({self.ambient} / {self.relations})"


@dataclass(frozen=True, eq=False)
class IdealDescriptor:
    """
    The ideal ((generators) + I)/I of a quotient ring, or the whole ring when ``unit``.
    """

    ring: QuotientRing
    generators: tuple[Polynomial, ...] = ()
    unit: bool = False

    def __post_init__(self):
        for g in self.generators:
            if g.ring != self.ring.ambient:
                raise RingMismatchError(f"Generator {g} is not in {self.ring.ambient}")
            if not g.is_homogeneous():
                raise NonHomogeneousError(f"Generator {g} is not homogeneous")
        object.__setattr__(
            self, "generators", tuple(g for g in self.generators if not g.is_zero())
        )

    @classmethod
    def whole(cls, ring: QuotientRing) -> "IdealDescriptor":
        return cls(ring, (), unit=True)

    def __str__(self) -> str:
        if self.unit:
            return "(1)"
        return "(" + ", ".join(str(g) for g in self.generators) + ")"


def degree_slice(
    space: Union[IdealDescriptor, QuotientRing], n: int
) -> DegreeSlice:
    """
    Degree-n piece of an ideal of a quotient ring (or of the ring itself).

    Rows are the normal-form coordinates of generator times monomial products of
    degree n.
    """
    if isinstance(space, QuotientRing):
        space = IdealDescriptor.whole(space)
    ring = space.ring
    ambient = ring.standard_monomials(n)
    if space.unit:
        return DegreeSlice.full(n, ambient)
    rows = []
    for g in space.generators:
        d = g.degree()
        if d > n:
            continue
        for mono in ring.ambient.monomials_of_degree(n - d):
            rows.append(ring.coordinates(g.mul_monomial(mono), n))
    return DegreeSlice(n, ambient, rows)


# --- complexes -------------------------------------------------------------------------


@dataclass(frozen=True)
class ComplexTerm:
    """A direct summand of a chain group, labelled by an index subset."""

    label: tuple[int, ...]
    space: DegreeSlice


Operator = dict[int, dict[int, Union[int, Fraction]]]


@dataclass(frozen=True)
class GradedComplex:
    """
    A chain complex of finite-dimensional subspaces at one graded degree.

    ``terms[p]`` are the summands of C_p. Each summand sits in its own block of ambient
    coordinates; ``differentials[p]`` (p ≥ 1) maps ambient coordinates of position p to
    ambient coordinates of position p - 1 and restricts to d_p on C_p.
    """

    degree: int
    terms: tuple[tuple[ComplexTerm, ...], ...]
    differentials: tuple[Operator, ...]

    @property
    def length(self) -> int:
        return len(self.terms)

    def dims(self) -> list[int]:
        return [sum(t.space.dim for t in position) for position in self.terms]

    def offsets(self, p: int) -> list[int]:
        result = []
        offset = 0
        for term in self.terms[p]:
            result.append(offset)
            offset += term.space.ambient_dim
        return result

    def basis(self, p: int) -> list[SparseVector]:
        """Basis of C_p in the global ambient coordinates of position p."""
        vectors = []
        for offset, term in zip(self.offsets(p), self.terms[p]):
            for row in term.space.rows:
                vectors.append({offset + k: x for k, x in row.items()})
        return vectors

    def apply(
        self, p: int, vec: Mapping[int, Union[int, Fraction]]
    ) -> dict[int, Union[int, Fraction]]:
        result: dict[int, Union[int, Fraction]] = {}
        operator = self.differentials[p]
        for k, x in vec.items():
            for target, y in operator.get(k, {}).items():
                value = result.get(target, 0) + x * y
                if value:
                    result[target] = value
                else:
                    result.pop(target, None)
        return result

    def differential_rows(self, p: int) -> list[dict[int, Union[int, Fraction]]]:
        if p <= 0 or p >= len(self.terms):
            return []
        return [self.apply(p, vec) for vec in self.basis(p)]

    def rank(self, p: int, pivoting: str = "leading") -> int:
        return matrix_rank(self.differential_rows(p), pivoting)

    def verify_square_zero(self) -> None:
        for p in range(2, len(self.terms)):
            for vec in self.basis(p):
                if self.apply(p - 1, self.apply(p, vec)):
                    raise ValueError(
                        f"Differentials do not compose to zero at position {p}"
                    )


def _intersection_operator(
    labels: Sequence[tuple[int, ...]],
    widths: Sequence[int],
    target_labels: Sequence[tuple[int, ...]],
    target_widths: Sequence[int],
) -> Operator:
    target_offset = {}
    offset = 0
    for label, width in zip(target_labels, target_widths):
        target_offset[label] = offset
        offset += width
    operator: Operator = {}
    offset = 0
    for label, width in zip(labels, widths):
        for position in range(len(label)):
            face = label[:position] + label[position + 1 :]
            sign = 1 if position % 2 == 0 else -1
            base = target_offset[face]
            for j in range(width):
                operator.setdefault(offset + j, {})[base + j] = sign
        offset += width
    return operator


def build_intersection_complex(
    M: Union[DegreeSlice, IdealDescriptor],
    subs: Sequence[Union[DegreeSlice, IdealDescriptor]],
    n: Optional[int] = None,
) -> GradedComplex:
    """
    Intersection complex of M and subobjects M_1..M_k at degree n.

    C_p is the sum over size-p subsets S of the intersection of the M_i (i in S), with
    C_0 = M. The summand for S maps into the summand for S minus its p-th element by
    (-1)^(p+1) times the inclusion.
    """
    whole = _slice_at(M, n)
    degree = whole.degree
    pieces = [_slice_at(sub, degree) for sub in subs]
    for i, piece in enumerate(pieces):
        _check_compatible([whole, piece])
        if not whole.contains_slice(piece):
            raise ContainmentError(
                f"Subobject {i + 1} is not contained in M at degree {degree}"
            )

    k = len(pieces)
    intersections: dict[tuple[int, ...], DegreeSlice] = {(): whole}
    terms: list[tuple[ComplexTerm, ...]] = [(ComplexTerm((), whole),)]
    for p in range(1, k + 1):
        row = []
        for label in combinations(range(k), p):
            if p == 1:
                space = pieces[label[0]]
            else:
                space = _intersect_pair(intersections[label[:-1]], pieces[label[-1]])
            intersections[label] = space
            row.append(ComplexTerm(label, space))
        terms.append(tuple(row))

    differentials: list[Operator] = [{}]
    for p in range(1, k + 1):
        differentials.append(
            _intersection_operator(
                [t.label for t in terms[p]],
                [t.space.ambient_dim for t in terms[p]],
                [t.label for t in terms[p - 1]],
                [t.space.ambient_dim for t in terms[p - 1]],
            )
        )
    complex_ = GradedComplex(degree, tuple(terms), tuple(differentials))
    complex_.verify_square_zero()
    return complex_


def _slice_at(
    space: Union[DegreeSlice, IdealDescriptor], n: Optional[int]
) -> DegreeSlice:
    if isinstance(space, DegreeSlice):
        if n is not None and space.degree != n:
            raise RingMismatchError(f"Slice has degree {space.degree}, expected {n}")
        return space
    if n is None:
        raise ValueError("A degree is required to slice an ideal descriptor")
    return degree_slice(space, n)


def build_koszul_complex(
    ring: QuotientRing, elements: Sequence[Polynomial], n: int
) -> GradedComplex:
    """
    Koszul complex K(R; f_1..f_k) at degree n.

    K_p is the sum over size-p subsets S of R shifted by the degree of prod f_S, and
    e_S maps to the alternating sum of f_s * e_(S minus s).
    """
    for f in elements:
        if not f.is_homogeneous() or f.is_zero():
            raise NonHomogeneousError(f"Koszul elements must be nonzero homogeneous: {f}")
    degrees = [f.degree() for f in elements]
    k = len(elements)

    def block(label: tuple[int, ...]) -> DegreeSlice:
        d = n - sum(degrees[i] for i in label)
        return DegreeSlice.full(d, ring.standard_monomials(d) if d >= 0 else ())

    terms: list[tuple[ComplexTerm, ...]] = []
    for p in range(k + 1):
        terms.append(
            tuple(ComplexTerm(label, block(label)) for label in combinations(range(k), p))
        )

    differentials: list[Operator] = [{}]
    for p in range(1, k + 1):
        target_offset = {}
        offset = 0
        for term in terms[p - 1]:
            target_offset[term.label] = offset
            offset += term.space.ambient_dim
        operator: Operator = {}
        offset = 0
        for term in terms[p]:
            for j, mono in enumerate(term.space.ambient):
                image: dict[int, Fraction] = {}
                for position, index in enumerate(term.label):
                    face = term.label[:position] + term.label[position + 1 :]
                    sign = 1 if position % 2 == 0 else -1
                    product = elements[index].mul_monomial(mono, sign)
                    face_degree = term.space.degree + degrees[index]
                    for col, x in ring.coordinates(product, face_degree).items():
                        image[target_offset[face] + col] = x
                if image:
                    operator[offset + j] = image
            offset += term.space.ambient_dim
        differentials.append(operator)
    complex_ = GradedComplex(n, tuple(terms), tuple(differentials))
    complex_.verify_square_zero()
    return complex_


def homology_dims(complex_: GradedComplex) -> list[int]:
    """dim H_p = dim C_p - rank d_p - rank d_(p+1) for every position p."""
    dims = complex_.dims()
    ranks = [complex_.rank(p) for p in range(len(dims))] + [0]
    return [dims[p] - ranks[p] - ranks[p + 1] for p in range(len(dims))]


def euler_characteristic(values: Sequence[int]) -> int:
    return sum(v if p % 2 == 0 else -v for p, v in enumerate(values))
