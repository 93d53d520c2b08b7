"""
Buchberger's algorithm over the rationals.

Pairs are chosen with the normal selection strategy (smallest lcm degree, ties by pair
index) and pruned with the Gebauer-Moeller criteria; the result is always the reduced,
monic basis.
"""

import logging
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

from reeskit.config import Budget
from reeskit.errors import NonHomogeneousError, RingMismatchError
from reeskit.services.polycore import (
    Monomial,
    Polynomial,
    PolynomialRing,
    TermOrder,
    WeightVector,
    initial_form,
    monomial_divides,
    monomial_lcm,
    monomial_mul,
    monomial_quotient,
    monomials_coprime,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Ideal:
    """Ideal given by nonzero, deduplicated generators (input order kept)."""

    ring: PolynomialRing
    generators: tuple[Polynomial, ...] = ()

    def __post_init__(self):
        seen: list[Polynomial] = []
        for g in self.generators:
            if g.ring != self.ring:
                raise RingMismatchError(f"Generator {g} is not in {self.ring}")
            if not g.is_zero() and g not in seen:
                seen.append(g)
        object.__setattr__(self, "generators", tuple(seen))

    @classmethod
    def from_strings(cls, ring: PolynomialRing, texts: Iterable[str]) -> "Ideal":
        return cls(ring, tuple(ring.parse(text) for text in texts))

    def is_zero(self) -> bool:
        return not self.generators

    def is_homogeneous(self) -> bool:
        return all(g.is_homogeneous() for g in self.generators)

    def __str__(self) -> str:
        if not self.generators:
            return "(0)"
        return "(" + ", ".join(str(g) for g in self.generators) + ")"


@dataclass(frozen=True)
class GroebnerBasis:
    order: TermOrder
    elements: tuple[Polynomial, ...]
    source: Ideal

    @property
    def ring(self) -> PolynomialRing:
        return self.source.ring

    @property
    def leading_monomials(self) -> tuple[Monomial, ...]:
        return tuple(g.leading_term(self.order)[0] for g in self.elements)

    def is_unit(self) -> bool:
        return any(not any(lm) for lm in self.leading_monomials)

    def __str__(self) -> str:
        if not self.elements:
            return "(0)"
        return "(" + ", ".join(str(g) for g in self.elements) + ")"


Divisor = tuple[Monomial, Fraction, Polynomial]


def _divisors(elements: Sequence[Polynomial], order: TermOrder) -> list[Divisor]:
    result = []
    for g in elements:
        lm, lc = g.leading_term(order)
        result.append((lm, lc, g))
    return result


def _reduce_terms(
    terms: dict[Monomial, Fraction],
    divisors: Sequence[Divisor],
    key: Callable[[Monomial], tuple],
) -> dict[Monomial, Fraction]:
    remainder: dict[Monomial, Fraction] = {}
    p = dict(terms)
    while p:
        lm = max(p, key=key)
        lc = p[lm]
        for dlm, dlc, g in divisors:
            if monomial_divides(dlm, lm):
                shift = monomial_quotient(lm, dlm)
                factor = lc / dlc
                for mono, c in g.terms.items():
                    target = monomial_mul(mono, shift)
                    value = p.get(target, 0) - factor * c
                    if value:
                        p[target] = value
                    else:
                        p.pop(target, None)
                break
        else:
            remainder[lm] = p.pop(lm)
    return remainder


def reduce_polynomial(
    f: Polynomial, elements: Sequence[Polynomial], order: TermOrder
) -> Polynomial:
    """Full remainder of f on division by ``elements`` (no Gröbner property assumed)."""
    for g in elements:
        if g.ring != f.ring:
            raise RingMismatchError(f"Ring mismatch: {f.ring} vs {g.ring}")
    key = order.key_function(f.ring)
    remainder = _reduce_terms(dict(f.terms), _divisors(elements, order), key)
    return Polynomial(f.ring, remainder)


def s_polynomial(f: Polynomial, g: Polynomial, order: TermOrder) -> Polynomial:
    lmf, lcf = f.leading_term(order)
    lmg, lcg = g.leading_term(order)
    lcm = monomial_lcm(lmf, lmg)
    return f.mul_monomial(monomial_quotient(lcm, lmf), 1 / lcf) - g.mul_monomial(
        monomial_quotient(lcm, lmg), 1 / lcg
    )


def _update(
    lms: list[Monomial],
    pairs: set[tuple[int, int]],
    lmf: Monomial,
    key: Callable[[Monomial], tuple],
) -> set[tuple[int, int]]:
    """Gebauer-Moeller update of the pair set when a new element with lead lmf arrives."""
    new_index = len(lms)
    kept = set()
    for i, j in pairs:
        lcm_ij = monomial_lcm(lms[i], lms[j])
        if (
            not monomial_divides(lmf, lcm_ij)
            or lcm_ij == monomial_lcm(lms[i], lmf)
            or lcm_ij == monomial_lcm(lms[j], lmf)
        ):
            kept.add((i, j))

    by_lcm: dict[Monomial, list[int]] = {}
    for i, lm in enumerate(lms):
        by_lcm.setdefault(monomial_lcm(lm, lmf), []).append(i)
    minimal: list[Monomial] = []
    for lcm in sorted(by_lcm, key=key):
        if all(not monomial_divides(other, lcm) for other in minimal):
            minimal.append(lcm)
    for lcm in minimal:
        if not any(monomials_coprime(lms[i], lmf) for i in by_lcm[lcm]):
            kept.add((min(by_lcm[lcm]), new_index))
    return kept


def _minimalize(
    elements: list[Polynomial], order: TermOrder, key: Callable[[Monomial], tuple]
) -> list[Polynomial]:
    chosen: list[Polynomial] = []
    chosen_lms: list[Monomial] = []
    for g in sorted(elements, key=lambda h: key(h.leading_term(order)[0])):
        lm = g.leading_term(order)[0]
        if all(not monomial_divides(other, lm) for other in chosen_lms):
            chosen.append(g)
            chosen_lms.append(lm)
    return chosen


def _interreduce(elements: list[Polynomial], order: TermOrder) -> list[Polynomial]:
    reduced = []
    for i, g in enumerate(elements):
        others = elements[:i] + elements[i + 1 :]
        reduced.append(reduce_polynomial(g, others, order).monic(order))
    return reduced


def buchberger(
    ideal: Ideal,
    order: Optional[TermOrder] = None,
    budget: Optional[Budget] = None,
) -> GroebnerBasis:
    """
    Compute the reduced Gröbner basis of ``ideal``.

    Args:
        ideal: generators in a single ring.
        order: defaults to graded reverse lex.
        budget: optional step budget; one step is one S-pair reduction.

    Returns:
        GroebnerBasis whose elements are monic, reduced and sorted by descending leading
        monomial.
    """
    order = order or TermOrder.grevlex()
    ring = ideal.ring
    if order.kind == "weight" and not ideal.is_homogeneous():
        raise NonHomogeneousError(
            "Weight-refined orders are only supported on homogeneous ideals"
        )
    key = order.key_function(ring)

    basis: list[Polynomial] = []
    lms: list[Monomial] = []
    pairs: set[tuple[int, int]] = set()
    for g in ideal.generators:
        g = g.monic(order)
        pairs = _update(lms, pairs, g.leading_term(order)[0], key)
        basis.append(g)
        lms.append(g.leading_term(order)[0])

    steps = 0
    while pairs:
        i, j = min(
            pairs, key=lambda p: (ring.degree_of(monomial_lcm(lms[p[0]], lms[p[1]])), p)
        )
        pairs.remove((i, j))
        if budget is not None:
            budget.charge_gb_step()
        steps += 1
        s = s_polynomial(basis[i], basis[j], order)
        remainder = Polynomial(
            ring, _reduce_terms(dict(s.terms), _divisors(basis, order), key)
        )
        if remainder:
            remainder = remainder.monic(order)
            lm = remainder.leading_term(order)[0]
            pairs = _update(lms, pairs, lm, key)
            basis.append(remainder)
            lms.append(lm)

    elements = _interreduce(_minimalize(basis, order, key), order)
    elements.sort(key=lambda g: key(g.leading_term(order)[0]), reverse=True)
    logger.debug(f"Buchberger finished: {len(elements)} elements after {steps} steps")
    return GroebnerBasis(order, tuple(elements), ideal)


def is_groebner_basis(elements: Sequence[Polynomial], order: TermOrder) -> bool:
    """Buchberger criterion: every S-polynomial reduces to zero."""
    for i in range(len(elements)):
        for j in range(i + 1, len(elements)):
            s = s_polynomial(elements[i], elements[j], order)
            if reduce_polynomial(s, elements, order):
                return False
    return True


def is_reduced(basis: GroebnerBasis) -> bool:
    """No term of any element is divisible by another element's leading monomial."""
    lms = basis.leading_monomials
    for i, g in enumerate(basis.elements):
        for j, lm in enumerate(lms):
            if i != j and any(monomial_divides(lm, mono) for mono in g.terms):
                return False
    return True


def normal_form(f: Polynomial, basis: GroebnerBasis) -> Polynomial:
    """Unique remainder of f modulo the Gröbner basis."""
    if f.ring != basis.ring:
        raise RingMismatchError(f"Ring mismatch: {f.ring} vs {basis.ring}")
    return reduce_polynomial(f, basis.elements, basis.order)


class GroebnerCache:
    """
    Memo of reduced bases keyed by (ideal, order).

    Lookups are lock-protected; two threads missing at once both compute, and the first
    stored result wins (both are equal anyway).
    """

    def __init__(self):
        self._bases: dict[tuple[Ideal, TermOrder], GroebnerBasis] = {}
        self._lock = threading.Lock()

    def get(
        self,
        ideal: Ideal,
        order: Optional[TermOrder] = None,
        budget: Optional[Budget] = None,
    ) -> GroebnerBasis:
        order = order or TermOrder.grevlex()
        cache_key = (ideal, order)
        with self._lock:
            cached = self._bases.get(cache_key)
        if cached is not None:
            return cached
        basis = buchberger(ideal, order, budget)
        with self._lock:
            return self._bases.setdefault(cache_key, basis)

    def __len__(self) -> int:
        with self._lock:
            return len(self._bases)

    def clear(self) -> None:
        with self._lock:
            self._bases.clear()


default_cache = GroebnerCache()


def ideal_membership(f: Polynomial, ideal: Ideal, budget: Optional[Budget] = None) -> bool:
    if f.ring != ideal.ring:
        raise RingMismatchError(f"Ring mismatch: {f.ring} vs {ideal.ring}")
    basis = default_cache.get(ideal, TermOrder.grevlex(), budget)
    return normal_form(f, basis).is_zero()


def initial_ideal(
    ideal: Ideal, w: WeightVector, budget: Optional[Budget] = None
) -> Ideal:
    """
    Initial ideal of a homogeneous ideal for the weight vector w (min convention).

    Generated by the w-initial forms of the reduced basis under weight-refined(w, grevlex).
    """
    if not ideal.is_homogeneous():
        raise NonHomogeneousError(f"Initial ideals need homogeneous input; got {ideal}")
    if len(w) != ideal.ring.nvars:
        raise RingMismatchError(
            f"Weight vector of length {len(w)} for a ring with {ideal.ring.nvars} "
            "variables"
        )
    order = TermOrder.weight_refined(w)
    basis = default_cache.get(ideal, order, budget)
    return Ideal(ideal.ring, tuple(initial_form(g, w) for g in basis.elements))
