"""
Windows of the extended Rees algebra and everything computed from them.

A window holds the graded pieces J(m)_n for n ≤ N and m in a finite box. From it we
certify flatness cell by cell, build the central fiber J(m) / Σ_i J(m + e_i) with its
multiplication, test it for zero-divisors, check the level-by-level dimension bookkeeping
of the weighted filtrations, and sample the support cone.
"""

import logging
import random
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Mapping, Optional, Sequence, Union

from reeskit import constants
from reeskit.config import Budget
from reeskit.errors import ContainmentError, OutOfWindowError, RingMismatchError
from reeskit.services.cone import RationalCone, cone_from_generators
from reeskit.services.filtration import (
    FiltrationFamily,
    MultiIndex,
    multi_piece,
    ord_alpha,
)
from reeskit.services.gradedla import (
    DegreeSlice,
    RowEchelon,
    build_intersection_complex,
    homology_dims,
    sum_slices,
)
from reeskit.services.polycore import Monomial, Polynomial, WeightVector

logger = logging.getLogger(__name__)

Box = tuple[tuple[int, int], ...]
Cell = tuple[int, tuple[int, ...]]
RANDOM_ATTEMPTS = 50


def normalize_box(W: Union[Sequence[int], Sequence[Sequence[int]]], r: int) -> Box:
    """
    Accepts ``[lo, hi]`` (same bounds for every coordinate) or ``[[lo, hi], ...]``.
    """
    if len(W) == 2 and all(isinstance(x, int) for x in W):
        lo, hi = W  # type: ignore[misc]
        bounds = [(int(lo), int(hi))] * r
    else:
        bounds = [(int(pair[0]), int(pair[1])) for pair in W]  # type: ignore[index]
    if len(bounds) != r:
        raise RingMismatchError(f"Index window has {len(bounds)} coordinates, r = {r}")
    for lo, hi in bounds:
        if lo > hi:
            raise ValueError(f"Empty index range [{lo}, {hi}]")
    return tuple(bounds)


class SubspaceTable:
    """
    A raw per-degree subspace table standing in for a filtration family.

    ``cells`` maps (n, m) to row vectors in k^{ambient_dim(n)}; unlisted cells are zero and
    negative entries of m truncate to 0. Coordinates are labelled by unit exponent
    vectors so slices from a table look like slices of a polynomial ring.
    """

    def __init__(
        self,
        r: int,
        ambient_dims: Union[int, Mapping[int, int]],
        cells: Mapping[Cell, Sequence[Sequence[Union[int, Fraction]]]],
    ):
        if r < 1:
            raise ValueError("A subspace table needs r ≥ 1")
        self.r = r
        self._ambient_dims = ambient_dims
        self._cells: dict[Cell, DegreeSlice] = {}
        for (n, m), rows in cells.items():
            m = tuple(max(e, 0) for e in m)
            if len(m) != r:
                raise RingMismatchError(f"Cell index {m} has length != r = {r}")
            self._cells[(n, m)] = DegreeSlice(n, self.ambient(n), rows)

    def ambient_dim(self, n: int) -> int:
        if isinstance(self._ambient_dims, int):
            return self._ambient_dims
        return self._ambient_dims.get(n, 0)

    def ambient(self, n: int) -> tuple[Monomial, ...]:
        d = self.ambient_dim(n)
        return tuple(tuple(1 if i == j else 0 for j in range(d)) for i in range(d))

    def piece(self, n: int, m: Sequence[int]) -> DegreeSlice:
        m = tuple(max(e, 0) for e in m)
        cached = self._cells.get((n, m))
        if cached is not None:
            return cached
        return DegreeSlice.zero(n, self.ambient(n))

    def support_bound(self, n: int) -> tuple[int, ...]:
        bound = [0] * self.r
        for (degree, m), piece in self._cells.items():
            if degree == n and piece.dim:
                bound = [max(b, e) for b, e in zip(bound, m)]
        return tuple(bound)


Source = Union[FiltrationFamily, SubspaceTable]


class ReesWindow:
    """
    The pieces J(m)_n for n ≤ degree_bound and m in index_window.

    Pieces outside the window are computed on demand (the central fiber needs
    J(m + e_i) at the window edge); every computed cell is stored once.
    """

    def __init__(
        self,
        source: Source,
        degree_bound: int,
        index_window: Union[Sequence[int], Sequence[Sequence[int]]],
        budget: Optional[Budget] = None,
    ):
        if degree_bound < 0:
            raise ValueError(f"Degree bound must be non-negative, got {degree_bound}")
        self.source = source
        self.r = source.r
        self.degree_bound = degree_bound
        self.index_window = normalize_box(index_window, self.r)
        self.budget = budget
        self._lock = threading.Lock()
        self._table: dict[Cell, DegreeSlice] = {}
        self._fiber: dict[Cell, "CentralFiberPiece"] = {}

    @property
    def family(self) -> Optional[FiltrationFamily]:
        return self.source if isinstance(self.source, FiltrationFamily) else None

    def indices(self) -> list[tuple[int, ...]]:
        """Distinct truncated multi-indices of the window, sorted."""
        ranges = [range(lo, hi + 1) for lo, hi in self.index_window]
        return sorted({tuple(max(e, 0) for e in m) for m in product(*ranges)})

    def upper_bounds(self) -> tuple[int, ...]:
        return tuple(max(hi, 0) for _, hi in self.index_window)

    def ambient(self, n: int) -> tuple[Monomial, ...]:
        if isinstance(self.source, FiltrationFamily):
            return self.source.ring.standard_monomials(n)
        return self.source.ambient(n)

    def support_bound(self, n: int) -> tuple[int, ...]:
        return self.source.support_bound(n)

    def piece(self, n: int, m: Sequence[int]) -> DegreeSlice:
        cell = (n, tuple(max(e, 0) for e in m))
        with self._lock:
            cached = self._table.get(cell)
        if cached is not None:
            return cached
        if isinstance(self.source, FiltrationFamily):
            computed = multi_piece(self.source, cell[1], n)
        else:
            if self.budget is not None:
                self.budget.charge_cells()
            computed = self.source.piece(n, cell[1])
        with self._lock:
            return self._table.setdefault(cell, computed)

    def filled_cells(self) -> list[Cell]:
        with self._lock:
            return sorted(self._table)

    def monotonicity_violations(self) -> list[tuple[Cell, int]]:
        """Filled cells where J(m) ⊄ J(m - e_i) for some i with m_i > 0."""
        violations = []
        for n, m in self.filled_cells():
            for i in range(self.r):
                if m[i] == 0:
                    continue
                lower = tuple(e - 1 if j == i else e for j, e in enumerate(m))
                if not self.piece(n, lower).contains_slice(self.piece(n, m)):
                    violations.append(((n, m), i))
        return violations


def build_window(
    source: Source,
    degree_bound: int,
    index_window: Union[Sequence[int], Sequence[Sequence[int]]],
    budget: Optional[Budget] = None,
) -> ReesWindow:
    """Create a window and fill every in-window cell."""
    window = ReesWindow(source, degree_bound, index_window, budget)
    started = time.monotonic()
    for n in range(degree_bound + 1):
        for m in window.indices():
            window.piece(n, m)
    logger.info(
        f"✅ Window filled: N = {degree_bound}, {len(window.filled_cells())} cells in "
        f"{time.monotonic() - started:.2f}s"
    )
    return window


# --- flatness --------------------------------------------------------------------------


@dataclass(frozen=True)
class FlatnessCell:
    subset: tuple[int, ...]
    m: tuple[int, ...]
    n: int
    homology: tuple[int, ...]


@dataclass(frozen=True)
class FlatnessWitness:
    subset: tuple[int, ...]
    m: tuple[int, ...]
    n: int
    position: int
    dim: int


@dataclass(frozen=True)
class FlatnessReport:
    degree_bound: int
    index_window: Box
    cells: tuple[FlatnessCell, ...]
    witness: Optional[FlatnessWitness]

    @property
    def certified(self) -> bool:
        return self.witness is None

    @property
    def verdict(self) -> str:
        return "certified-on-window" if self.certified else "violation"


def _flatness_cell(
    window: ReesWindow, subset: tuple[int, ...], m: tuple[int, ...], n: int
) -> FlatnessCell:
    M = window.piece(n, m)
    subs = [
        window.piece(n, tuple(e + 1 if j == i else e for j, e in enumerate(m)))
        for i in subset
    ]
    if not M.dim:
        return FlatnessCell(subset, m, n, (0,) * len(subset))
    complex_ = build_intersection_complex(M, subs)
    return FlatnessCell(subset, m, n, tuple(homology_dims(complex_)[1:]))


def check_flatness(window: ReesWindow, threads: int = 1) -> FlatnessReport:
    """
    For every index subset I, m in the window and n ≤ N, compute the positive homology of
    the intersection complex of J(m) and the J(m + e_i), i in I.
    """
    subsets = [
        subset
        for size in range(window.r + 1)
        for subset in combinations(range(window.r), size)
    ]
    jobs = [
        (subset, m, n)
        for subset in subsets
        for m in window.indices()
        for n in range(window.degree_bound + 1)
    ]
    logger.info(f"🔄 Checking flatness on {len(jobs)} cells with {threads} thread(s)")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cells = list(pool.map(lambda job: _flatness_cell(window, *job), jobs))
    else:
        cells = [_flatness_cell(window, *job) for job in jobs]
    cells.sort(key=lambda c: (len(c.subset), c.subset, c.m, c.n))

    witness = None
    for cell in cells:
        for position, dim in enumerate(cell.homology, start=1):
            if dim:
                witness = FlatnessWitness(cell.subset, cell.m, cell.n, position, dim)
                break
        if witness:
            break
    if witness:
        logger.warning(
            f"❌ Flatness violation: H_{witness.position} = {witness.dim} at "
            f"I = {witness.subset}, m = {witness.m}, n = {witness.n}"
        )
    return FlatnessReport(
        window.degree_bound, window.index_window, tuple(cells), witness
    )


# --- central fiber ---------------------------------------------------------------------


@dataclass(frozen=True)
class CentralFiberPiece:
    """
    J(m)_n / Σ_i J(m + e_i)_n, stored as representatives reduced against the sum.
    """

    n: int
    m: tuple[int, ...]
    representatives: tuple[dict[int, Fraction], ...]
    denominator: DegreeSlice
    numerator_dim: int

    @property
    def dim(self) -> int:
        return len(self.representatives)


@dataclass(frozen=True)
class FiberElement:
    """Class of ``lift`` in the piece (n, m); ``lift`` is already reduced."""

    n: int
    m: tuple[int, ...]
    lift: Polynomial

    def is_zero(self) -> bool:
        return self.lift.is_zero()

    def __str__(self) -> str:
        return f"[{self.lift}]@{self.n},{self.m}"


@dataclass(frozen=True)
class CentralFiber:
    degree_bound: int
    pieces: Mapping[Cell, CentralFiberPiece]
    totals: Mapping[int, int]

    def dimension_table(self) -> dict[Cell, int]:
        return {cell: piece.dim for cell, piece in self.pieces.items()}

    def support(self) -> list[Cell]:
        return sorted(cell for cell, piece in self.pieces.items() if piece.dim)


def _denominator(window: ReesWindow, n: int, m: tuple[int, ...]) -> DegreeSlice:
    steps = [
        window.piece(n, tuple(e + 1 if j == i else e for j, e in enumerate(m)))
        for i in range(window.r)
    ]
    return sum_slices(steps)


def fiber_piece(window: ReesWindow, n: int, m: Sequence[int]) -> CentralFiberPiece:
    cell = (n, tuple(max(e, 0) for e in m))
    with window._lock:
        cached = window._fiber.get(cell)
    if cached is not None:
        return cached
    numerator = window.piece(n, cell[1])
    denominator = _denominator(window, n, cell[1])
    echelon = denominator.echelon_copy()
    representatives = []
    for row in numerator.rows:
        remainder = echelon.remainder(row)
        if remainder:
            representatives.append(remainder)
            echelon.insert(remainder)
    computed = CentralFiberPiece(
        n, cell[1], tuple(representatives), denominator, numerator.dim
    )
    with window._lock:
        return window._fiber.setdefault(cell, computed)


def central_fiber(window: ReesWindow) -> CentralFiber:
    """Every piece (n, m) with n ≤ N and m in the window, plus per-n totals."""
    pieces: dict[Cell, CentralFiberPiece] = {}
    totals: dict[int, int] = {}
    for n in range(window.degree_bound + 1):
        totals[n] = 0
        for m in window.indices():
            piece = fiber_piece(window, n, m)
            pieces[(n, m)] = piece
            totals[n] += piece.dim
    logger.info(f"✅ Central fiber totals: {list(totals.values())}")
    return CentralFiber(window.degree_bound, pieces, totals)


def _require_family(window: ReesWindow) -> FiltrationFamily:
    family = window.family
    if family is None:
        raise ValueError("Fiber multiplication needs a window built from cutters")
    return family


def fiber_element(
    window: ReesWindow, f: Polynomial, m: Sequence[int]
) -> FiberElement:
    """The class of a homogeneous f ∈ J(m) in the piece (deg f, m)."""
    family = _require_family(window)
    m = tuple(max(e, 0) for e in m)
    if f.is_zero():
        raise ContainmentError("Use a nonzero element to name a fiber class")
    n = f.homogeneous_degree()
    coords = family.ring.coordinates(f, n)
    if not window.piece(n, m).contains(coords):
        raise ContainmentError(f"{f} is not in J{m} at degree {n}")
    piece = fiber_piece(window, n, m)
    remainder = piece.denominator.remainder(coords)
    return FiberElement(n, m, family.ring.element(remainder, n))


def fiber_basis(window: ReesWindow, n: int, m: Sequence[int]) -> list[FiberElement]:
    family = _require_family(window)
    piece = fiber_piece(window, n, m)
    return [
        FiberElement(n, piece.m, family.ring.element(rep, n))
        for rep in piece.representatives
    ]


def fiber_multiply(window: ReesWindow, a: FiberElement, b: FiberElement) -> FiberElement:
    """Product of two classes: multiply lifts in R, reduce modulo Σ_i J(m + m' + e_i)."""
    family = _require_family(window)
    n = a.n + b.n
    if n > window.degree_bound:
        raise OutOfWindowError(
            f"Product degree {n} exceeds the window degree bound {window.degree_bound}"
        )
    m = tuple(x + y for x, y in zip(a.m, b.m))
    if a.is_zero() or b.is_zero():
        return FiberElement(n, m, family.ring.ambient.zero())
    coords = family.ring.coordinates(a.lift * b.lift, n)
    piece = fiber_piece(window, n, m)
    remainder = piece.denominator.remainder(coords)
    return FiberElement(n, m, family.ring.element(remainder, n))


@dataclass(frozen=True)
class DomainTestResult:
    passed: bool
    pairs_checked: int
    witness: Optional[tuple[FiberElement, FiberElement]] = None


def domain_test(window: ReesWindow, d: int) -> DomainTestResult:
    """
    Multiply every pair of basis elements from pieces with n ≤ d; the first zero product
    is returned as a witness.
    """
    basis: list[FiberElement] = []
    for n in range(d + 1):
        for m in window.indices():
            if window.family is None:
                if fiber_piece(window, n, m).dim:
                    raise ValueError("The domain test needs a window built from cutters")
                continue
            basis.extend(fiber_basis(window, n, m))
    if basis and 2 * d > window.degree_bound:
        raise OutOfWindowError(
            f"Domain test at d = {d} needs degree bound ≥ {2 * d}, "
            f"window has {window.degree_bound}"
        )
    checked = 0
    for i, a in enumerate(basis):
        for b in basis[i:]:
            checked += 1
            if fiber_multiply(window, a, b).is_zero():
                logger.warning(f"❌ Zero-divisor pair in the central fiber: {a} * {b}")
                return DomainTestResult(False, checked, (a, b))
    return DomainTestResult(True, checked)


# --- weighted bookkeeping --------------------------------------------------------------


@dataclass(frozen=True)
class BookkeepingLevel:
    n: int
    level: Fraction
    filtration_dim: int
    fiber_dim: int

    @property
    def matches(self) -> bool:
        return self.filtration_dim == self.fiber_dim


@dataclass(frozen=True)
class BookkeepingReport:
    alpha: WeightVector
    levels: tuple[BookkeepingLevel, ...]
    totals: Mapping[int, int]

    @property
    def mismatches(self) -> tuple[BookkeepingLevel, ...]:
        return tuple(level for level in self.levels if not level.matches)


def verify_graded_bookkeeping(
    window: ReesWindow, alpha: WeightVector
) -> BookkeepingReport:
    """
    Compare dim F^λ/F^{>λ} (F^λ = Σ_{⟨α,m⟩ ≥ λ} J(m)) with the fiber pieces on level λ,
    for every n ≤ N and every level attained inside the window.
    """
    if len(alpha) != window.r:
        raise RingMismatchError(f"alpha has length {len(alpha)}, expected {window.r}")
    if not alpha.is_strictly_positive():
        raise ValueError(f"alpha must be strictly positive, got {alpha}")
    in_window_levels = {alpha.value(m) for m in window.indices()}
    levels: list[BookkeepingLevel] = []
    totals: dict[int, int] = {}
    for n in range(window.degree_bound + 1):
        bound = window.support_bound(n)
        by_level: dict[Fraction, list[tuple[int, ...]]] = {}
        for m in product(*(range(b + 1) for b in bound)):
            by_level.setdefault(alpha.value(m), []).append(m)
        accumulated = RowEchelon()
        totals[n] = 0
        for level in sorted(by_level, reverse=True):
            before = accumulated.rank
            for m in by_level[level]:
                for row in window.piece(n, m).rows:
                    accumulated.insert(row)
            quotient = accumulated.rank - before
            fiber_dim = sum(fiber_piece(window, n, m).dim for m in by_level[level])
            totals[n] += quotient
            if level in in_window_levels:
                levels.append(BookkeepingLevel(n, level, quotient, fiber_dim))
    report = BookkeepingReport(alpha, tuple(levels), totals)
    if report.mismatches:
        logger.warning(
            f"❌ Bookkeeping for alpha = {alpha}: {len(report.mismatches)} mismatches"
        )
    return report


# --- weight cone -----------------------------------------------------------------------


@dataclass(frozen=True)
class WeightConeSample:
    support: tuple[tuple[int, ...], ...]
    cone: RationalCone
    saturated: bool
    hole: Optional[tuple[int, ...]] = None

    @property
    def rays(self) -> tuple[tuple[int, ...], ...]:
        return self.cone.rays


def weight_cone_sample(
    window: ReesWindow, fiber: Optional[CentralFiber] = None
) -> WeightConeSample:
    """Support (n, m) of the central fiber in the window and its rational cone."""
    fiber = fiber or central_fiber(window)
    support = tuple((n,) + m for n, m in fiber.support())
    cone = cone_from_generators(support, 1 + window.r)
    present = set(support)
    hole = None
    for n in range(window.degree_bound + 1):
        for m in window.indices():
            point = (n,) + m
            if point not in present and cone.contains(point):
                hole = point
                break
        if hole:
            break
    return WeightConeSample(support, cone, hole is None, hole)


# --- multiplicativity ------------------------------------------------------------------


@dataclass(frozen=True)
class MultiplicativityCase:
    f: Polynomial
    g: Polynomial
    ord_f: Fraction
    ord_g: Fraction
    ord_product: Optional[Fraction]
    boundary: bool

    @property
    def holds(self) -> bool:
        """False for a zero product; boundary cases are reported separately."""
        return self.ord_product is not None and self.ord_product == self.ord_f + self.ord_g


@dataclass(frozen=True)
class MultiplicativityReport:
    alpha: WeightVector
    cases: tuple[MultiplicativityCase, ...] = field(default=())

    @property
    def failures(self) -> tuple[MultiplicativityCase, ...]:
        return tuple(case for case in self.cases if not case.holds and not case.boundary)

    @property
    def inconclusive(self) -> tuple[MultiplicativityCase, ...]:
        return tuple(case for case in self.cases if case.boundary)


def random_homogeneous(
    family: FiltrationFamily, degree: int, rng: random.Random
) -> Polynomial:
    """A random nonzero homogeneous element: a cutter monomial times a random form."""
    ring = family.ring
    for _ in range(RANDOM_ATTEMPTS):
        exponents = [0] * family.r
        remaining = degree
        for i in rng.sample(range(family.r), family.r):
            top = remaining // family.degrees[i]
            exponents[i] = rng.randint(0, top)
            remaining -= exponents[i] * family.degrees[i]
        basis = ring.standard_monomials(remaining)
        if not basis:
            continue
        chosen = rng.sample(list(basis), min(len(basis), rng.randint(1, 4)))
        form = ring.ambient.zero()
        for mono in chosen:
            form = form + ring.ambient.monomial(mono, rng.choice([-3, -2, -1, 1, 2, 3]))
        element = form
        for g, e in zip(family.cutters, exponents):
            element = element * g**e
        element = ring.normal_form(element)
        if element:
            return element
    basis = ring.standard_monomials(degree)
    if not basis:
        raise ValueError(f"The ring has nothing in degree {degree}")
    return ring.ambient.monomial(rng.choice(basis))


def multiplicativity_sample(
    family: FiltrationFamily,
    alpha: WeightVector,
    window: Optional[Union[int, Sequence[int]]] = None,
    count: int = constants.DEFAULT_MULTIPLICATIVITY_PAIRS,
    max_degree: int = constants.DEFAULT_MULTIPLICATIVITY_DEGREE,
    seed: int = constants.DEFAULT_SEED,
) -> MultiplicativityReport:
    """ord(f·g) against ord(f) + ord(g) on seeded random homogeneous pairs."""
    if family.ring.is_zero_ring():
        raise ValueError("Multiplicativity is vacuous on the zero ring")
    degrees = [n for n in range(1, max_degree + 1) if family.ring.hilbert_function(n)]
    if not degrees:
        raise ValueError(f"The ring is zero in degrees 1..{max_degree}")
    rng = random.Random(seed)
    cases = []
    for _ in range(count):
        f = random_homogeneous(family, rng.choice(degrees), rng)
        g = random_homogeneous(family, rng.choice(degrees), rng)
        of = ord_alpha(family, f, alpha, window)
        og = ord_alpha(family, g, alpha, window)
        product_ = family.ring.normal_form(f * g)
        if product_.is_zero():
            cases.append(MultiplicativityCase(f, g, of.value, og.value, None, False))
            continue
        ofg = ord_alpha(family, product_, alpha, window)
        boundary = of.at_boundary or og.at_boundary or ofg.at_boundary
        cases.append(
            MultiplicativityCase(f, g, of.value, og.value, ofg.value, boundary)
        )
    report = MultiplicativityReport(alpha, tuple(cases))
    if report.failures:
        logger.warning(f"❌ {len(report.failures)} pairs break ord multiplicativity")
    return report


__all__ = [
    "BookkeepingLevel",
    "BookkeepingReport",
    "CentralFiber",
    "CentralFiberPiece",
    "DomainTestResult",
    "FiberElement",
    "FlatnessCell",
    "FlatnessReport",
    "FlatnessWitness",
    "MultiIndex",
    "MultiplicativityReport",
    "ReesWindow",
    "SubspaceTable",
    "WeightConeSample",
    "build_window",
    "central_fiber",
    "check_flatness",
    "domain_test",
    "fiber_basis",
    "fiber_element",
    "fiber_multiply",
    "fiber_piece",
    "multiplicativity_sample",
    "normalize_box",
    "verify_graded_bookkeeping",
    "weight_cone_sample",
]
