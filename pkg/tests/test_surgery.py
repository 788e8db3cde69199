from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from toruslab.src.curves import qp, straight_curve, translate_curve, validate_curve, intersection_count
from toruslab.src.graphs import d0
from toruslab.src.surgery import (
    StripCurve, strip_curve, wedge, leq, less, meets, push_right, build_quasi_path, quasi_path,
    enumerate_bicorns, bicorn_path, path_intersections, perturb_transverse,
)
from toruslab.src.dynamics import TENT as TENT_PROFILE, ShearH, apply_to_curve
from toruslab.src.families import ALPHA, BETA, staircase_curve
from toruslab.src.errors import BudgetTooSmall, NonTransverse, NotIsotopic, OverlappingSegments


HALF = Fraction(1, 2)
FLAT = strip_curve([qp(0, 0)])
TENT = strip_curve([qp(0, 0), qp(HALF, 1)])

levels = st.integers(-3, 3)
sevenths = st.integers(1, 6).map(lambda k: Fraction(k, 7))


class TestOrder:

    def test_flat_curves(self):
        assert leq(FLAT, FLAT.shifted(1))
        assert less(FLAT, FLAT.shifted(1))
        assert not leq(FLAT.shifted(1), FLAT)

    def test_meeting_curves(self):
        level = FLAT.shifted(0)
        assert meets(TENT, level)
        assert leq(level, TENT)
        assert not less(level, TENT)

    @given(levels)
    def test_shift_order(self, k):
        assert leq(TENT, TENT.shifted(k)) == (k >= 0)


class TestWedge:

    def test_same_curve(self):
        assert wedge(TENT, TENT) == TENT

    def test_disjoint_curves(self):
        assert wedge(FLAT, FLAT.shifted(1)) == FLAT.shifted(1)
        assert wedge(FLAT.shifted(1), FLAT) == FLAT.shifted(1)

    def test_upper_envelope(self):
        half = strip_curve([qp(0, HALF)])
        expected = strip_curve([qp(Fraction(1, 4), HALF), qp(HALF, 1), qp(Fraction(3, 4), HALF)])
        assert wedge(TENT, half) == expected
        assert wedge(half, TENT) == expected

    @settings(max_examples=25, deadline=None)
    @given(sevenths, levels)
    def test_algebra(self, y, k):
        other = strip_curve([qp(Fraction(1, 3), y), qp(Fraction(2, 3), y + 1)])
        result = wedge(TENT, other)
        assert leq(TENT, result) and leq(other, result)
        assert wedge(TENT.shifted(k), other.shifted(k)) == result.shifted(k)
        assert not meets(result, result.shifted(1))

    @settings(max_examples=20, deadline=None)
    @given(sevenths, st.integers(1, 2), levels)
    def test_algebra_folded(self, y, amplitude, k):
        graph = validate_curve([qp(0, y), qp(HALF, y + 1)], (1, 0))
        folded = StripCurve.from_torus(apply_to_curve(ShearH(TENT_PROFILE, amplitude), graph))
        other = strip_curve([qp(Fraction(1, 3), y), qp(Fraction(2, 3), y + 1)])
        try:
            result = wedge(folded, other)
            assert result == wedge(other, folded)
        except OverlappingSegments:
            assume(False)
        assert leq(folded, result) and leq(other, result)
        assert wedge(folded.shifted(k), other.shifted(k)) == result.shifted(k)
        assert not meets(result, result.shifted(1))

    def test_push_right(self):
        pushed = push_right(FLAT, Fraction(1, 8))
        assert pushed == strip_curve([qp(0, Fraction(1, 8))])
        assert less(FLAT, pushed)


class TestQuasiPath:

    def test_disjoint(self):
        other = translate_curve(ALPHA, (0, HALF))
        assert quasi_path(ALPHA, other) == [ALPHA, other]

    def test_same_curve(self):
        assert quasi_path(ALPHA, ALPHA) == [ALPHA]

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_staircase(self, n):
        stair = staircase_curve(n)
        path = build_quasi_path(ALPHA, stair)
        assert len(path.curves) - 1 == d0(ALPHA, stair) == n + 1
        assert path.curves[0] == ALPHA and path.curves[-1] == stair
        assert path.ok, path.checks
        assert len(path.witnesses) == n

    def test_classes(self):
        with pytest.raises(NotIsotopic):
            quasi_path(ALPHA, BETA)

    def test_strip_curve_round_trip(self):
        stair = staircase_curve(2)
        assert StripCurve.from_torus(stair).to_torus() == stair


class TestBicorns:

    def test_single_crossing(self):
        assert enumerate_bicorns(ALPHA, BETA) == []
        assert bicorn_path(ALPHA, BETA) == [ALPHA, BETA]

    def test_disjoint(self):
        other = translate_curve(ALPHA, (0, HALF))
        assert bicorn_path(ALPHA, other) == [ALPHA, other]

    def test_two_crossings(self):
        other = straight_curve(1, 2)
        bicorns = enumerate_bicorns(ALPHA, other)
        assert bicorns
        for b in bicorns:
            assert b.curve.closure.as_list() in ([0, 1], [1, 0], [1, 1], [1, -1])
        path = bicorn_path(ALPHA, other)
        assert len(path) == 3
        assert path[0] == ALPHA and path[-1] == other
        assert len(path_intersections(path)) == 2

    def test_needs_transverse(self):
        tent = validate_curve([(0, 0), (HALF, HALF)], (1, 0))
        with pytest.raises(NonTransverse):
            enumerate_bicorns(ALPHA, tent)


class TestPerturb:

    def test_transverse_unchanged(self):
        assert perturb_transverse(ALPHA, BETA, Fraction(1, 64)) == BETA

    def test_touch_removed(self):
        tent = validate_curve([(0, 0), (HALF, HALF)], (1, 0))
        moved = perturb_transverse(ALPHA, tent, Fraction(1, 4))
        report = intersection_count(ALPHA, moved)
        assert report.all_transverse
        assert report.count == 0
        assert moved.closure == tent.closure

    def test_budget(self):
        with pytest.raises(BudgetTooSmall):
            perturb_transverse(ALPHA, BETA, 0)
