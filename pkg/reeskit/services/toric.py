"""
Simplicial affine toric models.

The lattice N is Z^r or an overlattice Z^r + Σ Z g_j given by rational generators; N/Z^r is
kept as an explicit finite set of fractional residues so membership in N and in the dual
lattice M is decided exactly. Divisors are Σ c_i D_i on the rays, div(χ^u) = Σ ⟨u, e_i⟩ D_i
and sections of L are the u with ⟨u, e_i⟩ + c_i ≥ 0.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import floor, lcm
from typing import Iterator, Mapping, Optional, Sequence, Union

import sympy

from reeskit.errors import CartierError, ContainmentError, RingMismatchError
from reeskit.services.polycore import INFINITY, WeightVector, parse_rational

logger = logging.getLogger(__name__)

RationalVector = tuple[Fraction, ...]
Point = tuple[int, ...]


def _dot(a: Sequence, b: Sequence):
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def _fractional(vec: Sequence[Fraction]) -> RationalVector:
    return tuple(x - floor(x) for x in vec)


def _matrix(rows: Sequence[Sequence]) -> sympy.Matrix:
    return sympy.Matrix(
        [
            [sympy.Rational(q.numerator, q.denominator) for q in map(Fraction, row)]
            for row in rows
        ]
    )


def _fraction(value: sympy.Rational) -> Fraction:
    return Fraction(int(value.p), int(value.q))


def determinant(rows: Sequence[Sequence]) -> Fraction:
    """Exact determinant of a square rational matrix."""
    return _fraction(_matrix(rows).det())


def solve_exact(rows: Sequence[Sequence], rhs: Sequence) -> Optional[RationalVector]:
    """The unique solution of rows·x = rhs, or None when the system is singular."""
    matrix = _matrix(rows)
    if matrix.det() == 0:
        return None
    solution = matrix.LUsolve(_matrix([[value] for value in rhs]))
    return tuple(_fraction(x) for x in solution)


def _residue_group(generators: Sequence[RationalVector], r: int) -> frozenset:
    zero = (Fraction(0),) * r
    found = {zero}
    frontier = [zero]
    steps = [_fractional(g) for g in generators]
    while frontier:
        current = frontier.pop()
        for step in steps:
            candidate = _fractional([a + b for a, b in zip(current, step)])
            if candidate not in found:
                found.add(candidate)
                frontier.append(candidate)
    return frozenset(found)


@dataclass(frozen=True)
class ToricDivisor:
    """L = Σ c_i D_i."""

    coefficients: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(int(c) for c in self.coefficients))

    @classmethod
    def prime(cls, i: int, r: int, multiple: int = 1) -> "ToricDivisor":
        return cls(tuple(multiple if j == i else 0 for j in range(r)))

    def __len__(self) -> int:
        return len(self.coefficients)

    def scaled(self, k: int) -> "ToricDivisor":
        return ToricDivisor(tuple(k * c for c in self.coefficients))

    def minus(self, m: Sequence[int]) -> "ToricDivisor":
        """L - Σ m_i D_i."""
        return ToricDivisor(tuple(c - e for c, e in zip(self.coefficients, m)))

    def __str__(self) -> str:
        terms = [f"{c}*D_{i + 1}" for i, c in enumerate(self.coefficients) if c]
        return " + ".join(terms) if terms else "0"


@dataclass(frozen=True)
class LatticeBox:
    """Closed integer box; a coordinate with lo > hi makes the box empty."""

    bounds: tuple[tuple[int, int], ...]

    @classmethod
    def symmetric(cls, radius: int, r: int) -> "LatticeBox":
        return cls(tuple((-radius, radius) for _ in range(r)))

    def enlarged(self, k: int) -> "LatticeBox":
        return LatticeBox(tuple((lo - k, hi + k) for lo, hi in self.bounds))

    def is_empty(self) -> bool:
        return any(lo > hi for lo, hi in self.bounds)

    def points(self) -> Iterator[Point]:
        if self.is_empty():
            return iter(())
        return product(*(range(lo, hi + 1) for lo, hi in self.bounds))

    def __len__(self) -> int:
        if self.is_empty():
            return 0
        count = 1
        for lo, hi in self.bounds:
            count *= hi - lo + 1
        return count


@dataclass(frozen=True)
class ToricModel:
    """
    A full-dimensional simplicial cone spanned by primitive rays e_1..e_r of N.

    Build it with ``from_rays`` so the rays and the overlattice are validated.
    """

    rays: tuple[RationalVector, ...]
    overlattice: tuple[RationalVector, ...]
    residues: frozenset

    @classmethod
    def from_rays(
        cls,
        rays: Sequence[Sequence[Union[int, str, Fraction]]],
        overlattice: Optional[Sequence[Sequence[Union[int, str, Fraction]]]] = None,
    ) -> "ToricModel":
        if not rays:
            raise ValueError("A toric model needs at least one ray")
        r = len(rays)
        parsed = tuple(tuple(parse_rational(x) for x in ray) for ray in rays)
        if any(len(ray) != r for ray in parsed):
            raise RingMismatchError(
                f"Simplicial full-dimensional cone: expected {r} rays of length {r}"
            )
        generators = tuple(
            tuple(parse_rational(x) for x in g) for g in (overlattice or ())
        )
        if any(len(g) != r for g in generators):
            raise RingMismatchError(f"Overlattice generators must have length {r}")
        if _matrix(parsed).rank() != r:
            raise ValueError(f"Rays {_render_rows(parsed)} are linearly dependent")
        model = cls(parsed, generators, _residue_group(generators, r))
        for ray in parsed:
            if not model.in_lattice(ray):
                raise ValueError(f"Ray {_render_row(ray)} is not a point of N")
            if not model.is_primitive(ray):
                raise ValueError(f"Ray {_render_row(ray)} is not primitive in N")
        return model

    @property
    def r(self) -> int:
        return len(self.rays)

    def in_lattice(self, vec: Sequence[Fraction]) -> bool:
        """Membership in N."""
        return _fractional([Fraction(x) for x in vec]) in self.residues

    def in_dual_lattice(self, u: Sequence) -> bool:
        """Membership in M = Hom(N, Z)."""
        values = [Fraction(x) for x in u]
        if any(x.denominator != 1 for x in values):
            return False
        return all(_dot(values, g).denominator == 1 for g in self.overlattice)

    def is_primitive(self, vec: Sequence[Fraction]) -> bool:
        denominator = 1
        for residue in self.residues:
            for x in residue:
                denominator = lcm(denominator, x.denominator)
        numerators = [abs(Fraction(x) * denominator) for x in vec]
        bound = int(max(numerators))
        for k in range(2, bound + 1):
            if self.in_lattice([Fraction(x) / k for x in vec]):
                return False
        return True

    def pairing(self, u: Sequence[int]) -> tuple[int, ...]:
        """(⟨u, e_1⟩, ..., ⟨u, e_r⟩) for u ∈ M."""
        values = tuple(_dot(u, ray) for ray in self.rays)
        return tuple(int(v) for v in values)


def _render_row(row: Sequence[Fraction]) -> str:
    return "(" + ", ".join(str(x) for x in row) + ")"


def _render_rows(rows: Sequence[Sequence[Fraction]]) -> str:
    return ", ".join(_render_row(row) for row in rows)


def lattice_index(T: ToricModel) -> int:
    """[N : Σ Z e_i] = |det(e)| · |N / Z^r|."""
    index = abs(determinant(T.rays)) * len(T.residues)
    assert index.denominator == 1
    return int(index)


def dual_monoid_points(T: ToricModel, box: LatticeBox) -> list[Point]:
    """Points u ∈ M in the box with ⟨u, e_i⟩ ≥ 0 for every i, sorted."""
    _check_box(T, box)
    return [
        u
        for u in box.points()
        if T.in_dual_lattice(u) and all(v >= 0 for v in T.pairing(u))
    ]


def toric_valuation(
    T: ToricModel,
    alpha: WeightVector,
    element: Mapping[Sequence[int], Union[int, Fraction]],
) -> Union[Fraction, float]:
    """
    v_α(Σ c_u χ^u) = min over c_u ≠ 0 of Σ_i α_i ⟨u, e_i⟩; ``INFINITY`` on zero.

    ``alpha`` is given in the ray basis, so v_α(D_i) = α_i.
    """
    if len(alpha) != T.r:
        raise RingMismatchError(f"alpha has length {len(alpha)}, expected {T.r}")
    values = []
    for u, c in element.items():
        if not c:
            continue
        u = tuple(u)
        if len(u) != T.r or not T.in_dual_lattice(u):
            raise ContainmentError(f"Exponent {u} is not a point of M")
        pairing = T.pairing(u)
        if any(v < 0 for v in pairing):
            raise ContainmentError(f"Exponent {u} is outside the dual monoid")
        values.append(alpha.value(pairing))
    return min(values) if values else INFINITY


@dataclass(frozen=True)
class CartierResult:
    divisor: ToricDivisor
    solution: RationalVector
    index: int

    @property
    def is_cartier(self) -> bool:
        return self.index == 1

    @property
    def witness(self) -> Optional[Point]:
        """u ∈ M with div(χ^u) = L when L is Cartier."""
        if not self.is_cartier:
            return None
        return tuple(int(x) for x in self.solution)


def _solve_divisor(T: ToricModel, L: ToricDivisor) -> RationalVector:
    if len(L) != T.r:
        raise RingMismatchError(f"Divisor has {len(L)} coefficients, expected {T.r}")
    solution = solve_exact(T.rays, L.coefficients)
    assert solution is not None
    return solution


def cartier_index(T: ToricModel, L: ToricDivisor) -> int:
    """Smallest n ≥ 1 with nL Cartier; at most the lattice index."""
    solution = _solve_divisor(T, L)
    for n in range(1, lattice_index(T) + 1):
        if T.in_dual_lattice([n * x for x in solution]):
            return n
    raise AssertionError(f"{L} is not Q-Cartier on a simplicial model")


def is_cartier(T: ToricModel, L: ToricDivisor) -> CartierResult:
    """
    Solve ⟨u, e_i⟩ = c_i exactly; L is Cartier iff the rational solution lies in M.

    The result also carries the Cartier index, the denominator that clears the solution.
    """
    return CartierResult(L, _solve_divisor(T, L), cartier_index(T, L))


@dataclass(frozen=True)
class Section:
    u: Point
    tags: tuple[int, ...]


def divisor_sections(T: ToricModel, L: ToricDivisor, box: LatticeBox) -> list[Section]:
    """Sections χ^u of O(L) in the box, tagged with (⟨u, e_i⟩ + c_i)_i."""
    _check_box(T, box)
    if len(L) != T.r:
        raise RingMismatchError(f"Divisor has {len(L)} coefficients, expected {T.r}")
    sections = []
    for u in box.points():
        if not T.in_dual_lattice(u):
            continue
        tags = tuple(v + c for v, c in zip(T.pairing(u), L.coefficients))
        if all(t >= 0 for t in tags):
            sections.append(Section(u, tags))
    return sections


def section_valuation(alpha: WeightVector, section: Section) -> Fraction:
    """v_α of χ^u read as a section of O(L): Σ_i α_i (⟨u, e_i⟩ + c_i)."""
    return alpha.value(section.tags)


@dataclass(frozen=True)
class SectionSumReport:
    """Every section of L is a section of some L - D_i (checked on the box)."""

    divisor: ToricDivisor
    box: LatticeBox
    checked: int
    counterexamples: tuple[Section, ...]

    @property
    def verified(self) -> bool:
        return not self.counterexamples


def check_noncartier_sum(
    T: ToricModel, L: ToricDivisor, box: LatticeBox
) -> SectionSumReport:
    if is_cartier(T, L).is_cartier:
        raise CartierError(f"{L} is Cartier; its sections do not split over the L - D_i")
    sections = divisor_sections(T, L, box)
    counterexamples = tuple(s for s in sections if all(t < 1 for t in s.tags))
    if counterexamples:
        logger.warning(
            f"❌ {len(counterexamples)} sections of {L} lie in no O(L - D_i)"
        )
    return SectionSumReport(L, box, len(sections), counterexamples)


@dataclass(frozen=True)
class ValuativeMismatch:
    section: Section
    valuation: Fraction
    witness: Optional[tuple[int, ...]]


@dataclass(frozen=True)
class ValuativeIdealReport:
    divisor: ToricDivisor
    alpha: WeightVector
    level: Fraction
    box: LatticeBox
    checked: int
    in_ideal: int
    mismatches: tuple[ValuativeMismatch, ...]

    @property
    def verified(self) -> bool:
        return not self.mismatches


def _shift_witness(
    alpha: WeightVector, tags: Sequence[int], level: Fraction
) -> Optional[tuple[int, ...]]:
    # χ^u is a section of L - Σ m_i D_i exactly when m ≤ tags
    for m in product(*(range(t + 1) for t in tags)):
        if alpha.value(m) >= level:
            return m
    return None


def check_valuative_ideal(
    T: ToricModel,
    L: ToricDivisor,
    alpha: WeightVector,
    level: Union[int, str, Fraction],
    box: LatticeBox,
) -> ValuativeIdealReport:
    """
    Two-sided check of F^λ O(L) = Σ_{⟨α, m⟩ ≥ λ} O(L - Σ m_i D_i) on the sections in the
    box: v_α(u) ≥ λ iff some m ∈ N^r with ⟨α, m⟩ ≥ λ has u as a section of L - Σ m_i D_i.
    """
    if len(alpha) != T.r:
        raise RingMismatchError(f"alpha has length {len(alpha)}, expected {T.r}")
    if not alpha.is_strictly_positive():
        raise ValueError(f"alpha must be strictly positive, got {alpha}")
    level = parse_rational(level)
    sections = divisor_sections(T, L, box)
    mismatches = []
    in_ideal = 0
    for section in sections:
        valuation = section_valuation(alpha, section)
        witness = _shift_witness(alpha, section.tags, level)
        if valuation >= level:
            in_ideal += 1
        if (valuation >= level) != (witness is not None):
            mismatches.append(ValuativeMismatch(section, valuation, witness))
    if mismatches:
        logger.warning(
            f"❌ Valuative ideal of {L} at alpha = {alpha}, level {level}: "
            f"{len(mismatches)} mismatches"
        )
    return ValuativeIdealReport(
        L, alpha, level, box, len(sections), in_ideal, tuple(mismatches)
    )


def _check_box(T: ToricModel, box: LatticeBox) -> None:
    if len(box.bounds) != T.r:
        raise RingMismatchError(f"Box has {len(box.bounds)} coordinates, expected {T.r}")


__all__ = [
    "CartierResult",
    "LatticeBox",
    "Section",
    "SectionSumReport",
    "ToricDivisor",
    "ToricModel",
    "ValuativeIdealReport",
    "cartier_index",
    "check_noncartier_sum",
    "check_valuative_ideal",
    "determinant",
    "divisor_sections",
    "dual_monoid_points",
    "is_cartier",
    "lattice_index",
    "section_valuation",
    "solve_exact",
    "toric_valuation",
]
