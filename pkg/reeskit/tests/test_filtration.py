import logging

import pytest

from reeskit.errors import RingMismatchError, ZeroElementError
from reeskit.services.filtration import (
    FiltrationFamily,
    MultiIndex,
    filtration_piece,
    is_zero_divisor,
    multi_piece,
    ord_alpha,
    piece_dimension_via_groebner,
)
from reeskit.services.gradedla import QuotientRing
from reeskit.services.polycore import PolynomialRing, WeightVector


@pytest.fixture
def plane_family():
    """k[x,y] cut by x and y."""
    ring = PolynomialRing(("x", "y"))
    quotient = QuotientRing.polynomial_ring(ring)
    return FiltrationFamily(quotient, ring.gens())


@pytest.fixture
def cubic_family(cubic_threefold):
    ring = cubic_threefold.ambient
    return FiltrationFamily(cubic_threefold, [ring.variable("u"), ring.variable("v")])


class TestMultiIndex:
    def test_truncation_and_step(self):
        m = MultiIndex((-2, 3))
        assert m.truncated == (0, 3)
        assert m.step(0).entries == (-1, 3)
        assert (m + MultiIndex((1, 1))).entries == (-1, 4)


class TestPieces:
    @pytest.mark.parametrize("n", range(5))
    def test_coordinate_cutters(self, plane_family, n):
        for m1 in range(n + 2):
            for m2 in range(n + 2):
                expected = max(0, n - m1 - m2 + 1)
                assert multi_piece(plane_family, (m1, m2), n).dim == expected

    def test_negative_entries_act_as_zero(self, plane_family):
        assert multi_piece(plane_family, (-3, 1), 2).same_space(
            multi_piece(plane_family, (0, 1), 2)
        )

    def test_cubic_piece(self, cubic_family):
        assert multi_piece(cubic_family, (1, 1), 2).dim == 1
        assert multi_piece(cubic_family, (0, 0), 2).dim == 21

    def test_length_mismatch(self, plane_family):
        with pytest.raises(RingMismatchError):
            multi_piece(plane_family, (1,), 1)

    def test_filtration_piece_index(self, plane_family):
        assert filtration_piece(plane_family, 0, 0).unit
        with pytest.raises(IndexError):
            filtration_piece(plane_family, 2, 1)

    @pytest.mark.parametrize("m,n", [(1, 2), (2, 3), (3, 3), (2, 5)])
    def test_groebner_dimension_agrees(self, cubic_family, m, n):
        expected = multi_piece(cubic_family, (m, 0), n).dim
        assert piece_dimension_via_groebner(cubic_family, 0, m, n) == expected


class TestFamilyValidation:
    def test_rejects_cutter_zero_in_quotient(self, cubic_threefold):
        from reeskit import constants

        relation = cubic_threefold.parse(constants.EXAMPLE_41_CUBIC)
        with pytest.raises(ZeroElementError):
            FiltrationFamily(cubic_threefold, [relation])

    def test_rejects_empty_and_constant_cutters(self, xyz):
        ring = QuotientRing.polynomial_ring(xyz)
        with pytest.raises(ValueError, match="at least one cutter"):
            FiltrationFamily(ring, [])
        with pytest.raises(ValueError, match="positive degree"):
            FiltrationFamily(ring, [xyz.one()])

    def test_zero_divisor_warning(self, caplog):
        ring = PolynomialRing(("x", "y"))
        quotient = QuotientRing(ring, [ring.parse("x*y")])
        assert is_zero_divisor(quotient, ring.variable("x"), 2)
        with caplog.at_level(logging.WARNING, logger="reeskit.services.filtration"):
            FiltrationFamily(quotient, [ring.variable("x")])
        assert "zero-divisor" in caplog.text

    def test_non_zero_divisor(self, cubic_threefold):
        assert not is_zero_divisor(cubic_threefold, cubic_threefold.parse("u"), 3)


class TestOrdAlpha:
    @pytest.mark.parametrize(
        "text,alpha,expected",
        [
            ("u", (1, 1), 1),
            ("u*v", (1, 1), 2),
            ("w", (1, 1), 0),
            ("v", (1, 2), 2),
            ("u^3", (1, 1), 3),
            ("u^2*v", (2, 3), 7),
        ],
    )
    def test_values(self, cubic_family, text, alpha, expected):
        f = cubic_family.ring.parse(text)
        result = ord_alpha(cubic_family, f, WeightVector.of(alpha))
        assert result.value == expected
        assert not result.at_boundary

    def test_window_cap_flags_boundary(self, cubic_family):
        f = cubic_family.ring.parse("u^2")
        result = ord_alpha(cubic_family, f, WeightVector.of([1, 1]), window=1)
        assert result.value == 1
        assert result.maximizer == (1, 0)
        assert result.at_boundary

    def test_zero_elements(self, cubic_family):
        from reeskit import constants

        with pytest.raises(ZeroElementError):
            ord_alpha(cubic_family, cubic_family.ring.ambient.zero(), WeightVector.of([1, 1]))
        relation = cubic_family.ring.parse(constants.EXAMPLE_41_CUBIC)
        with pytest.raises(ZeroElementError):
            ord_alpha(cubic_family, relation, WeightVector.of([1, 1]))

    def test_alpha_must_be_positive(self, cubic_family):
        with pytest.raises(ValueError, match="strictly positive"):
            ord_alpha(cubic_family, cubic_family.ring.parse("u"), WeightVector.of([1, 0]))
