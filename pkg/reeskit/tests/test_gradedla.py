import random
from fractions import Fraction
from math import comb

import pytest

from reeskit.errors import ContainmentError, NonHomogeneousError, RingMismatchError
from reeskit.services.gradedla import (
    DegreeSlice,
    IdealDescriptor,
    QuotientRing,
    RowEchelon,
    build_intersection_complex,
    build_koszul_complex,
    degree_slice,
    euler_characteristic,
    homology_dims,
    integer_vector,
    intersect_slices,
    matrix_rank,
    sum_slices,
)
from reeskit.services.polycore import PolynomialRing

PLANE = ((1, 0), (0, 1))


class TestRowEchelon:
    def test_integer_vector_is_primitive(self):
        assert integer_vector([Fraction(1, 2), Fraction(-3, 4), 0]) == {0: 2, 1: -3}

    def test_insert_and_contains(self):
        echelon = RowEchelon()
        assert echelon.insert([2, 4, 0])
        assert echelon.insert([0, 1, 1])
        assert not echelon.insert([1, 3, 1])
        assert echelon.rank == 2
        assert echelon.contains({0: 1, 1: 2})
        assert not echelon.contains([0, 0, 1])

    def test_exact_remainder_keeps_scale(self):
        echelon = RowEchelon()
        echelon.insert([1, 1])
        assert echelon.remainder([3, 5]) == {1: Fraction(2)}

    def test_pivoting_orders_agree(self):
        rng = random.Random(7)
        for _ in range(20):
            rows = [[rng.randint(-3, 3) for _ in range(6)] for _ in range(5)]
            assert matrix_rank(rows) == matrix_rank(rows, pivoting="trailing")

    def test_unknown_pivoting(self):
        with pytest.raises(ValueError, match="Unknown pivoting"):
            matrix_rank([[1]], pivoting="middle")


class TestDegreeSlices:
    def test_intersection_of_planes(self):
        a = DegreeSlice(1, ((1, 0, 0), (0, 1, 0), (0, 0, 1)), [[1, 0, 0], [0, 1, 0]])
        b = DegreeSlice(1, a.ambient, [[0, 1, 0], [0, 0, 1]])
        both = intersect_slices([a, b])
        assert both.dim == 1
        assert both.contains([0, 5, 0])
        assert sum_slices([a, b]).is_full()

    def test_incompatible_slices(self):
        a = DegreeSlice(1, PLANE, [[1, 0]])
        b = DegreeSlice(2, PLANE, [[1, 0]])
        with pytest.raises(RingMismatchError, match="Degree mismatch"):
            intersect_slices([a, b])

    def test_rows_outside_ambient(self):
        with pytest.raises(RingMismatchError):
            DegreeSlice(0, PLANE, [{3: 1}])

    def test_same_space(self):
        a = DegreeSlice(0, PLANE, [[1, 1], [1, -1]])
        assert a.same_space(DegreeSlice.full(0, PLANE))
        assert not a.same_space(DegreeSlice(0, PLANE, [[1, 1]]))


class TestQuotientRing:
    def test_cubic_hypersurface_hilbert_function(self, cubic_threefold):
        values = [cubic_threefold.hilbert_function(n) for n in range(5)]
        assert values == [comb(n + 5, 5) - comb(n + 2, 5) for n in range(5)]
        assert values == [1, 6, 21, 55, 120]

    def test_coordinates_round_trip_through_normal_form(self, cubic_threefold):
        f = cubic_threefold.parse("u^3 + x*y*z")
        coords = cubic_threefold.coordinates(f, 3)
        assert cubic_threefold.element(coords, 3) == cubic_threefold.normal_form(f)

    def test_relation_is_zero(self, cubic_threefold):
        from reeskit import constants

        assert cubic_threefold.is_zero(cubic_threefold.parse(constants.EXAMPLE_41_CUBIC))

    def test_wrong_degree_coordinates(self, cubic_threefold):
        with pytest.raises(NonHomogeneousError):
            cubic_threefold.coordinates(cubic_threefold.parse("u^2"), 3)

    def test_zero_ring(self, xyz):
        ring = QuotientRing(xyz, [xyz.parse("x"), xyz.parse("y"), xyz.parse("z")])
        assert not ring.is_zero_ring()
        assert ring.hilbert_function(1) == 0
        unit = QuotientRing(xyz, [xyz.one()])
        assert unit.is_zero_ring()
        assert unit.hilbert_function(0) == 0

    def test_rejects_non_homogeneous_relations(self, xyz):
        with pytest.raises(NonHomogeneousError):
            QuotientRing(xyz, [xyz.parse("x^2 - y")])

    def test_weighted_quotient(self, a2_surface):
        assert [a2_surface.hilbert_function(n) for n in range(7)] == [1, 0, 1, 2, 1, 2, 3]

    def test_ideal_slices(self, xyz):
        ring = QuotientRing.polynomial_ring(xyz)
        ideal = IdealDescriptor(ring, (xyz.parse("x"), xyz.parse("y")))
        assert degree_slice(ideal, 0).dim == 0
        assert degree_slice(ideal, 2).dim == 5
        assert degree_slice(IdealDescriptor.whole(ring), 2).is_full()


class TestIntersectionComplex:
    def test_three_lines_in_the_plane(self):
        plane = DegreeSlice.full(0, PLANE)
        lines = [
            DegreeSlice(0, PLANE, [[1, 0]]),
            DegreeSlice(0, PLANE, [[0, 1]]),
            DegreeSlice(0, PLANE, [[1, 1]]),
        ]
        complex_ = build_intersection_complex(plane, lines)
        assert complex_.dims() == [2, 3, 0, 0]
        assert homology_dims(complex_) == [0, 1, 0, 0]
        assert euler_characteristic(homology_dims(complex_)) == euler_characteristic(
            complex_.dims()
        )

    def test_two_lines_are_exact(self):
        plane = DegreeSlice.full(0, PLANE)
        lines = [DegreeSlice(0, PLANE, [[1, 0]]), DegreeSlice(0, PLANE, [[1, 1]])]
        assert homology_dims(build_intersection_complex(plane, lines)) == [0, 0, 0]

    def test_monomial_ideals_are_exact(self, xyz):
        ring = QuotientRing.polynomial_ring(xyz)
        subs = [IdealDescriptor(ring, (g,)) for g in xyz.gens()]
        for n in range(4):
            complex_ = build_intersection_complex(IdealDescriptor.whole(ring), subs, n)
            assert all(h == 0 for h in homology_dims(complex_)[1:])

    def test_subobject_must_be_contained(self):
        line = DegreeSlice(0, PLANE, [[1, 0]])
        other = DegreeSlice(0, PLANE, [[0, 1]])
        with pytest.raises(ContainmentError, match="Subobject 1"):
            build_intersection_complex(line, [other])

    def test_rank_pivoting_cross_check(self):
        plane = DegreeSlice.full(0, PLANE)
        lines = [DegreeSlice(0, PLANE, [[1, 0]]), DegreeSlice(0, PLANE, [[2, 3]])]
        complex_ = build_intersection_complex(plane, lines)
        assert complex_.rank(1) == complex_.rank(1, pivoting="trailing") == 2


def random_configuration(rng, count):
    """A random subspace M of Q^d and ``count`` random subspaces of M."""
    width = rng.randint(1, 5)
    ambient = tuple((i,) for i in range(width))
    generators = [
        [rng.randint(-3, 3) for _ in range(width)] for _ in range(rng.randint(1, width))
    ]
    whole = DegreeSlice(0, ambient, generators)
    subs = []
    for _ in range(count):
        rows = []
        for _ in range(rng.randint(0, len(generators))):
            weights = [rng.randint(-2, 2) for _ in generators]
            rows.append(
                [sum(c * g[j] for c, g in zip(weights, generators)) for j in range(width)]
            )
        subs.append(DegreeSlice(0, ambient, rows))
    return whole, subs


class TestRandomIntersectionComplexes:
    def test_at_most_two_subobjects_are_exact(self):
        rng = random.Random(21)
        for case in range(100):
            whole, subs = random_configuration(rng, 1 + case % 2)
            homology = homology_dims(build_intersection_complex(whole, subs))
            assert homology[1:] == [0] * len(subs)

    def test_zeroth_homology_is_the_quotient_by_the_sum(self):
        rng = random.Random(22)
        for _ in range(100):
            whole, subs = random_configuration(rng, rng.randint(1, 4))
            complex_ = build_intersection_complex(whole, subs)
            assert homology_dims(complex_)[0] == whole.dim - sum_slices(subs).dim

    def test_euler_characteristic_and_pivoting_agree(self):
        rng = random.Random(23)
        for _ in range(100):
            whole, subs = random_configuration(rng, rng.randint(1, 4))
            complex_ = build_intersection_complex(whole, subs)
            homology = homology_dims(complex_)
            assert all(h >= 0 for h in homology)
            assert euler_characteristic(homology) == euler_characteristic(
                complex_.dims()
            )
            for p in range(complex_.length):
                assert complex_.rank(p) == complex_.rank(p, pivoting="trailing")


class TestKoszulComplex:
    @pytest.mark.parametrize("r", [2, 3])
    def test_regular_sequence_is_acyclic(self, r):
        ring = PolynomialRing(tuple(f"x{i}" for i in range(r)))
        quotient = QuotientRing.polynomial_ring(ring)
        for n in range(5):
            complex_ = build_koszul_complex(quotient, ring.gens(), n)
            homology = homology_dims(complex_)
            assert all(h == 0 for h in homology[1:])
            assert homology[0] == (1 if n == 0 else 0)

    def test_repeated_element_has_first_homology(self):
        ring = PolynomialRing(("x", "y"))
        quotient = QuotientRing.polynomial_ring(ring)
        x = ring.variable("x")
        complex_ = build_koszul_complex(quotient, [x, x], 1)
        assert homology_dims(complex_)[1] == 1

    def test_zero_divisor_breaks_exactness(self):
        ring = PolynomialRing(("x", "y"))
        quotient = QuotientRing(ring, [ring.parse("x*y")])
        complex_ = build_koszul_complex(quotient, [ring.variable("x")], 2)
        assert homology_dims(complex_)[1] == 1

    def test_rejects_zero_elements(self, xyz):
        quotient = QuotientRing.polynomial_ring(xyz)
        with pytest.raises(NonHomogeneousError):
            build_koszul_complex(quotient, [xyz.zero()], 1)
