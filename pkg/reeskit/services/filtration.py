"""
Principal image filtrations on a graded quotient ring.

A cutter g gives the filtration F^m = ((g^m) + I)/I (the whole ring for m ≤ 0); a family of
cutters gives the multi-index pieces J(m) = ∩_i F_i^{m_i}.
"""

import logging
import threading
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Optional, Sequence, Union

from reeskit import constants
from reeskit.config import Budget
from reeskit.errors import (
    NonHomogeneousError,
    RingMismatchError,
    ZeroElementError,
)
from reeskit.services.gradedla import (
    DegreeSlice,
    IdealDescriptor,
    QuotientRing,
    degree_slice,
    intersect_slices,
    matrix_rank,
)
from reeskit.services.groebner import Ideal, buchberger
from reeskit.services.polycore import (
    Polynomial,
    TermOrder,
    WeightVector,
    monomial_divides,
)

logger = logging.getLogger(__name__)

__all__ = [
    "FiltrationFamily",
    "MultiIndex",
    "OrderResult",
    "QuotientRing",
    "filtration_piece",
    "is_zero_divisor",
    "multi_piece",
    "ord_alpha",
    "piece_dimension_via_groebner",
]


@dataclass(frozen=True)
class MultiIndex:
    entries: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(int(e) for e in self.entries))

    @property
    def truncated(self) -> tuple[int, ...]:
        """Effective exponents: negative entries count as 0."""
        return tuple(max(e, 0) for e in self.entries)

    def step(self, i: int) -> "MultiIndex":
        return MultiIndex(
            tuple(e + 1 if j == i else e for j, e in enumerate(self.entries))
        )

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        return MultiIndex(tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __len__(self) -> int:
        return len(self.entries)


def as_multi_index(m: Union[MultiIndex, Sequence[int]]) -> MultiIndex:
    return m if isinstance(m, MultiIndex) else MultiIndex(tuple(m))


class FiltrationFamily:
    """
    Cutters g_1..g_r on a quotient ring, with a lock-protected (m, n) -> J(m)_n cache.
    """

    def __init__(
        self,
        ring: QuotientRing,
        cutters: Sequence[Polynomial],
        budget: Optional[Budget] = None,
        probe_degree: int = constants.ZERO_DIVISOR_PROBE_DEGREE,
    ):
        if not cutters:
            raise ValueError("A filtration family needs at least one cutter")
        for g in cutters:
            if g.ring != ring.ambient:
                raise RingMismatchError(f"Cutter {g} is not in {ring.ambient}")
            if g.is_zero() or not g.is_homogeneous():
                raise NonHomogeneousError(f"Cutter {g} must be nonzero and homogeneous")
            if g.degree() <= 0:
                raise ValueError(f"Cutter {g} must have positive degree")
        self.ring = ring
        self.cutters = tuple(cutters)
        self.degrees = tuple(g.degree() for g in self.cutters)
        self.budget = budget
        self._lock = threading.Lock()
        self._pieces: dict[tuple[int, int, int], DegreeSlice] = {}
        self._multi: dict[tuple[tuple[int, ...], int], DegreeSlice] = {}

        if ring.is_zero_ring():
            logger.warning("⚠️ Filtration family on the zero ring; every piece is zero")
            return
        for i, g in enumerate(self.cutters):
            if ring.is_zero(g):
                raise ZeroElementError(f"Cutter {i + 1} ({g}) is zero in the quotient")
            if is_zero_divisor(ring, g, probe_degree):
                logger.warning(
                    f"⚠️ Cutter {i + 1} ({g}) is a zero-divisor modulo the relations; "
                    "its filtration has no divisorial reading"
                )

    @property
    def r(self) -> int:
        return len(self.cutters)

    def support_bound(self, n: int) -> tuple[int, ...]:
        """Largest m_i for which J(m)_n can be nonzero."""
        return tuple(n // d for d in self.degrees)

    def vanishes(self, m: Sequence[int], n: int) -> bool:
        return any(e > 0 and e * d > n for e, d in zip(m, self.degrees))

    def _piece_slice(self, i: int, m: int, n: int) -> DegreeSlice:
        cache_key = (i, m, n)
        with self._lock:
            cached = self._pieces.get(cache_key)
        if cached is not None:
            return cached
        computed = degree_slice(filtration_piece(self, i, m), n)
        with self._lock:
            return self._pieces.setdefault(cache_key, computed)

    def __repr__(self) -> str:
        cutters = ", ".join(str(g) for g in self.cutters)
        return f"FiltrationFamily({self.ring!r}; {cutters})"


def filtration_piece(F: FiltrationFamily, i: int, m: int) -> IdealDescriptor:
    """The ideal ((g_i^m) + I)/I, or the whole ring when m ≤ 0 (i is 0-based)."""
    if not 0 <= i < F.r:
        raise IndexError(f"Cutter index {i} out of range for r = {F.r}")
    if m <= 0:
        return IdealDescriptor.whole(F.ring)
    return IdealDescriptor(F.ring, (F.cutters[i] ** m,))


def multi_piece(
    F: FiltrationFamily, m: Union[MultiIndex, Sequence[int]], n: int
) -> DegreeSlice:
    """Degree-n slice of J(m) = ∩_i F_i^{m_i} in quotient coordinates."""
    index = as_multi_index(m)
    if len(index) != F.r:
        raise RingMismatchError(f"Multi-index {index.entries} has length != r = {F.r}")
    effective = index.truncated
    cache_key = (effective, n)
    with F._lock:
        cached = F._multi.get(cache_key)
    if cached is not None:
        return cached

    ambient = F.ring.standard_monomials(n)
    if F.vanishes(effective, n):
        computed = DegreeSlice.zero(n, ambient)
    else:
        if F.budget is not None:
            F.budget.charge_cells()
        pieces = [
            F._piece_slice(i, e, n) for i, e in enumerate(effective) if e > 0
        ]
        computed = intersect_slices(pieces) if pieces else DegreeSlice.full(n, ambient)
    with F._lock:
        return F._multi.setdefault(cache_key, computed)


@dataclass(frozen=True)
class OrderResult:
    value: Fraction
    maximizer: tuple[int, ...]
    at_boundary: bool


def ord_alpha(
    F: FiltrationFamily,
    f: Polynomial,
    alpha: WeightVector,
    window: Optional[Union[int, Sequence[int]]] = None,
) -> OrderResult:
    """
    Largest ⟨alpha, m⟩ over the window with f ∈ J(m) in degree deg f.

    ``window`` caps each m_i (an int applies to every coordinate); the degree already
    caps m_i at deg f // deg g_i. ``at_boundary`` is set when the maximizer sits on a cap
    that is tighter than the degree cap, so the value is only a lower bound.
    """
    if len(alpha) != F.r:
        raise RingMismatchError(f"alpha has length {len(alpha)}, expected r = {F.r}")
    if not alpha.is_strictly_positive():
        raise ValueError(f"alpha must be strictly positive, got {alpha}")
    if not f.is_homogeneous():
        raise NonHomogeneousError(f"{f} is not homogeneous")
    if f.is_zero() or F.ring.is_zero(f):
        raise ZeroElementError("ord_alpha of the zero element is +infinity")

    n = f.degree()
    coords = F.ring.coordinates(f, n)
    degree_caps = F.support_bound(n)
    if window is None:
        caps = degree_caps
    elif isinstance(window, int):
        caps = tuple(min(window, c) for c in degree_caps)
    else:
        if len(window) != F.r:
            raise RingMismatchError(f"Window has length {len(window)}, expected {F.r}")
        caps = tuple(min(w, c) for w, c in zip(window, degree_caps))

    best_value: Optional[Fraction] = None
    best_m: tuple[int, ...] = (0,) * F.r
    for m in product(*(range(c + 1) for c in caps)):
        value = alpha.value(m)
        if best_value is not None and value <= best_value:
            continue
        if multi_piece(F, m, n).contains(coords):
            best_value = value
            best_m = m
    assert best_value is not None
    at_boundary = any(
        b == cap and cap < degree_cap
        for b, cap, degree_cap in zip(best_m, caps, degree_caps)
    )
    if at_boundary:
        logger.warning(
            f"⚠️ ord_alpha maximizer {best_m} touches the window; value is a lower bound"
        )
    return OrderResult(best_value, best_m, at_boundary)


def is_zero_divisor(ring: QuotientRing, g: Polynomial, max_degree: int) -> bool:
    """True if multiplication by g is not injective on some R_n with n ≤ max_degree."""
    d = g.degree()
    for n in range(max_degree + 1):
        basis = ring.standard_monomials(n)
        if not basis:
            continue
        rows = [ring.coordinates(g.mul_monomial(mono), n + d) for mono in basis]
        if matrix_rank(rows) < len(basis):
            return True
    return False


def piece_dimension_via_groebner(F: FiltrationFamily, i: int, m: int, n: int) -> int:
    """dim of ((g_i^m) + I)/I in degree n, counted from a Gröbner basis of (g_i^m) + I."""
    if m <= 0:
        return F.ring.hilbert_function(n)
    ambient = F.ring.ambient
    ideal = Ideal(ambient, F.ring.relations.generators + (F.cutters[i] ** m,))
    basis = buchberger(ideal, TermOrder.grevlex(), F.budget)
    leading = basis.leading_monomials
    standard = [
        mono
        for mono in ambient.monomials_of_degree(n)
        if not any(monomial_divides(lm, mono) for lm in leading)
    ]
    return F.ring.hilbert_function(n) - len(standard)
