from itertools import product
from math import comb

import pytest

from reeskit.errors import ContainmentError, OutOfWindowError, RingMismatchError
from reeskit.services.filtration import FiltrationFamily
from reeskit.services.gradedla import QuotientRing
from reeskit.services.polycore import PolynomialRing, WeightVector
from reeskit.services.rees import (
    ReesWindow,
    SubspaceTable,
    build_window,
    central_fiber,
    check_flatness,
    domain_test,
    fiber_basis,
    fiber_element,
    fiber_multiply,
    fiber_piece,
    multiplicativity_sample,
    normalize_box,
    verify_graded_bookkeeping,
    weight_cone_sample,
)


def variable_family(names, cutters=None):
    ring = PolynomialRing(tuple(names))
    quotient = QuotientRing.polynomial_ring(ring)
    chosen = [ring.variable(c) for c in (cutters or names)]
    return FiltrationFamily(quotient, chosen)


@pytest.fixture
def three_lines():
    """Three distinct lines in a plane: pairwise fine, not distributive as a triple."""
    table = SubspaceTable(
        3,
        {0: 2},
        {
            (0, (0, 0, 0)): [[1, 0], [0, 1]],
            (0, (1, 0, 0)): [[1, 0]],
            (0, (0, 1, 0)): [[0, 1]],
            (0, (0, 0, 1)): [[1, 1]],
        },
    )
    return build_window(table, 0, [0, 1])


class TestWindow:
    def test_normalize_box(self):
        assert normalize_box([0, 2], 3) == ((0, 2), (0, 2), (0, 2))
        assert normalize_box([[0, 1], [2, 3]], 2) == ((0, 1), (2, 3))
        with pytest.raises(RingMismatchError):
            normalize_box([[0, 1]], 2)
        with pytest.raises(ValueError, match="Empty index range"):
            normalize_box([3, 1], 2)

    def test_negative_degree_bound(self):
        with pytest.raises(ValueError):
            ReesWindow(variable_family("xy"), -1, [0, 1])

    def test_filled_pieces(self):
        window = build_window(variable_family("xy"), 3, [0, 2])
        assert len(window.filled_cells()) == 4 * 9
        assert window.piece(2, (1, 1)).dim == 1
        assert window.piece(3, (-1, 2)).dim == 2
        assert window.monotonicity_violations() == []

    def test_table_monotonicity_violation(self):
        table = SubspaceTable(1, 2, {(0, (0,)): [[1, 0]], (0, (1,)): [[0, 1]]})
        window = build_window(table, 0, [0, 1])
        assert window.monotonicity_violations() == [((0, (1,)), 0)]


class TestFlatness:
    @pytest.mark.parametrize(
        "names,degree_bound,upper",
        [("xy", 8, 3), ("xyz", 5, 2), pytest.param("abcd", 4, 1, marks=pytest.mark.slow)],
    )
    def test_regular_sequences_are_flat(self, names, degree_bound, upper):
        window = build_window(variable_family(names), degree_bound, [0, upper])
        report = check_flatness(window)
        assert report.certified
        assert report.verdict == "certified-on-window"
        assert len(report.cells) == 2 ** len(names) * (upper + 1) ** len(names) * (
            degree_bound + 1
        )

    def test_three_lines_violate(self, three_lines):
        report = check_flatness(three_lines)
        assert report.verdict == "violation"
        witness = report.witness
        assert witness.subset == (0, 1, 2)
        assert witness.m == (0, 0, 0)
        assert (witness.n, witness.position, witness.dim) == (0, 1, 1)

    def test_threads_do_not_change_the_result(self):
        window = build_window(variable_family("xyz", "xy"), 3, [0, 2])
        assert check_flatness(window, threads=3).cells == check_flatness(window).cells


class TestCentralFiber:
    def test_single_cutter_fiber_matches_ring(self):
        window = build_window(variable_family("xy", "x"), 3, [0, 3])
        fiber = central_fiber(window)
        assert dict(fiber.totals) == {0: 1, 1: 2, 2: 3, 3: 4}
        assert fiber.support() == [(n, (m,)) for n in range(4) for m in range(n + 1)]

    def test_support_of_coordinate_cutters(self):
        window = build_window(variable_family("xy"), 3, [0, 3])
        sample = weight_cone_sample(window)
        assert all(n == sum(m) for n, *m in sample.support)
        assert sample.rays == ((1, 0, 1), (1, 1, 0))
        assert sample.saturated

    def test_support_with_a_free_variable(self):
        window = build_window(variable_family("xyz", "xy"), 3, [0, 3])
        fiber = central_fiber(window)
        assert {(n, m) for n, m in fiber.support()} == {
            (n, m)
            for n in range(4)
            for m in product(range(4), repeat=2)
            if sum(m) <= n
        }
        assert [fiber.totals[n] for n in range(4)] == [comb(n + 2, 2) for n in range(4)]
        sample = weight_cone_sample(window, fiber)
        assert sample.rays == ((1, 0, 0), (1, 0, 1), (1, 1, 0))
        assert sample.saturated

    def test_three_lines_fiber(self, three_lines):
        fiber = central_fiber(three_lines)
        assert fiber.dimension_table()[(0, (1, 0, 0))] == 1
        assert fiber.dimension_table()[(0, (0, 0, 0))] == 0
        assert fiber.totals[0] == 3


class TestFiberMultiplication:
    @pytest.fixture
    def plane_window(self):
        return build_window(variable_family("xy"), 3, [0, 2])

    def test_product_of_coordinates(self, plane_window):
        ring = plane_window.family.ring
        u = fiber_element(plane_window, ring.parse("x"), (1, 0))
        v = fiber_element(plane_window, ring.parse("y"), (0, 1))
        product_ = fiber_multiply(plane_window, u, v)
        assert not product_.is_zero()
        assert (product_.n, product_.m) == (2, (1, 1))
        assert str(product_.lift) == "x*y"

    def test_unit_class_is_identity(self, plane_window):
        ring = plane_window.family.ring
        one = fiber_element(plane_window, ring.ambient.one(), (0, 0))
        u = fiber_element(plane_window, ring.parse("x"), (1, 0))
        assert fiber_multiply(plane_window, one, u) == u

    def test_element_must_lie_in_piece(self, plane_window):
        ring = plane_window.family.ring
        with pytest.raises(ContainmentError):
            fiber_element(plane_window, ring.parse("x"), (0, 1))

    def test_product_outside_window(self, plane_window):
        ring = plane_window.family.ring
        a = fiber_element(plane_window, ring.parse("x^2"), (2, 0))
        with pytest.raises(OutOfWindowError):
            fiber_multiply(plane_window, a, a)
        with pytest.raises(OutOfWindowError):
            domain_test(plane_window, 2)

    def test_cubic_products_commute_and_associate(self, cubic_threefold):
        ring = cubic_threefold.ambient
        family = FiltrationFamily(cubic_threefold, [ring.variable("u"), ring.variable("v")])
        window = build_window(family, 3, [0, 2])
        basis = [
            element
            for m in window.indices()
            for element in fiber_basis(window, 1, m)
        ]
        assert [fiber_piece(window, 1, m).dim for m in [(0, 0), (1, 0), (0, 1)]] == [
            4,
            1,
            1,
        ]
        for a, b in product(basis, repeat=2):
            assert fiber_multiply(window, a, b) == fiber_multiply(window, b, a)
        for a, b, c in product(basis, repeat=3):
            left = fiber_multiply(window, fiber_multiply(window, a, b), c)
            right = fiber_multiply(window, a, fiber_multiply(window, b, c))
            assert left == right


class TestDomainTest:
    def test_polynomial_ring_fiber_is_a_domain(self):
        window = build_window(variable_family("xyz", "xy"), 4, [0, 2])
        result = domain_test(window, 2)
        assert result.passed
        assert result.witness is None
        assert result.pairs_checked > 0

    @pytest.fixture
    def a2_window(self, a2_surface):
        ring = a2_surface.ambient
        family = FiltrationFamily(a2_surface, [ring.variable("x"), ring.variable("y")])
        return build_window(family, 8, [0, 2])

    def test_weighted_surface_passes_low_degree(self, a2_window):
        assert domain_test(a2_window, 3).passed

    def test_weighted_surface_has_zero_divisor(self, a2_window):
        result = domain_test(a2_window, 4)
        assert not result.passed
        a, b = result.witness
        assert (a.n, a.m, str(a.lift)) == (2, (0, 0), "z")
        assert (b.n, b.m, str(b.lift)) == (4, (0, 0), "z^2")
        assert fiber_multiply(a2_window, a, b).is_zero()

    def test_table_windows_cannot_multiply(self, three_lines):
        with pytest.raises(ValueError, match="built from cutters"):
            domain_test(three_lines, 0)


class TestBookkeeping:
    @pytest.mark.parametrize("alpha", [(1, 1), (1, 2), (3, 5)])
    def test_flat_family_matches_every_level(self, alpha):
        window = build_window(variable_family("xyz", "xy"), 3, [0, 3])
        report = verify_graded_bookkeeping(window, WeightVector.of(alpha))
        assert report.mismatches == ()
        assert [report.totals[n] for n in range(4)] == [comb(n + 2, 2) for n in range(4)]

    def test_three_lines_mismatch(self, three_lines):
        report = verify_graded_bookkeeping(three_lines, WeightVector.of([1, 1, 1]))
        (level,) = report.mismatches
        assert (level.n, level.level) == (0, 1)
        assert (level.filtration_dim, level.fiber_dim) == (2, 3)

    def test_alpha_length(self, three_lines):
        with pytest.raises(RingMismatchError):
            verify_graded_bookkeeping(three_lines, WeightVector.of([1, 1]))


class TestMultiplicativity:
    def test_monomial_valuation_is_multiplicative(self):
        family = variable_family("xyz", "xy")
        report = multiplicativity_sample(
            family, WeightVector.of([1, 2]), count=15, max_degree=3, seed=11
        )
        assert len(report.cases) == 15
        assert report.failures == ()
        assert report.inconclusive == ()

    def test_seed_is_reproducible(self):
        family = variable_family("xyz", "xy")
        alpha = WeightVector.of([2, 3])
        first = multiplicativity_sample(family, alpha, count=5, seed=3)
        second = multiplicativity_sample(family, alpha, count=5, seed=3)
        assert [(c.f, c.g) for c in first.cases] == [(c.f, c.g) for c in second.cases]

    def test_zero_ring_is_rejected(self, xyz):
        quotient = QuotientRing(xyz, [xyz.one()])
        family = FiltrationFamily(quotient, [xyz.variable("x")])
        with pytest.raises(ValueError, match="zero ring"):
            multiplicativity_sample(family, WeightVector.of([1]))
