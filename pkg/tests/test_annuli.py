from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from toruslab.src.curves import qp, straight_curve, translate_curve, validate_curve, intersection_count
from toruslab.src.annuli import (
    make_chart, project, pieces, below_lift, width, relative_width, curve_width, interior_witness,
)
from toruslab.src.graphs import straight_arc, twist
from toruslab.src.dynamics import apply_to_curve
from toruslab.src.families import ALPHA, BETA, h_pq, staircase_curve, lift_scan_width, find_good_arc
from toruslab.src.errors import NoArc, NotIsotopic


HALF = Fraction(1, 2)
THIRD = Fraction(1, 3)
WAVE = validate_curve([qp(0, -THIRD), qp(Fraction(1, 4), THIRD), qp(HALF, -THIRD), qp(Fraction(3, 4), THIRD)], (1, 0))

quarters = st.integers(0, 3).map(lambda k: Fraction(k, 4))
tops = st.integers(-8, 8).map(lambda k: Fraction(k, 4))


class TestChart:

    def test_alpha(self):
        chart = make_chart(ALPHA)
        assert chart.dual == (0, 1)
        assert chart.normal_core == ALPHA

    def test_beta(self):
        chart = make_chart(BETA)
        h, v = chart.deck, chart.dual
        assert h.p * v[1] - h.q * v[0] == 1
        assert chart.normal_core == ALPHA

    def test_diagonal(self):
        chart = make_chart(straight_curve(1, 1))
        assert chart.dual == (0, 1)
        assert chart.normal_core == ALPHA
        assert chart.denormalize(chart.normal_core) == straight_curve(1, 1)

    def test_boundary_lifts(self):
        lower, upper = make_chart(ALPHA).boundary_lifts
        assert lower == (qp(0, 0), qp(1, 0))
        assert upper == (qp(0, 1), qp(1, 1))


class TestProject:

    def test_crossing_curve(self):
        arcs = project(make_chart(ALPHA), BETA)
        assert len(arcs) == 1
        (arc,) = arcs
        assert arc.essential
        assert arc.vertices == (qp(0, 0), qp(0, 1))

    def test_disjoint_isotopic(self):
        assert project(make_chart(ALPHA), translate_curve(ALPHA, (0, HALF))).is_empty()

    def test_core(self):
        assert project(make_chart(ALPHA), ALPHA).is_empty()

    @pytest.mark.parametrize("p,q", [(1, 1), (2, 3), (3, 5)])
    def test_image_of_alpha(self, p, q):
        image = apply_to_curve(h_pq(p, q), ALPHA)
        assert not project(make_chart(BETA), image).is_empty()
        assert find_good_arc(image, q).found

    @pytest.mark.parametrize("core,curve", [(ALPHA, WAVE), (WAVE, translate_curve(ALPHA, (0, Fraction(1, 5))))])
    def test_inessential_arcs_in_strip(self, core, curve):
        chart = make_chart(core)
        arcs = [a for a in pieces(chart, curve) if not a.essential]
        assert len(arcs) == 4
        for arc in arcs:
            a, b = arc.vertices[0], arc.vertices[1]
            mid = ((a.x + b.x) / 2, (a.y + b.y) / 2)
            assert not below_lift(chart.normal_core, mid, 0)
            assert below_lift(chart.normal_core, mid, 1)

    def test_interior_witness(self):
        chart = make_chart(ALPHA)
        moved = translate_curve(ALPHA, (0, HALF))
        witness = interior_witness(chart, moved)
        assert witness is not None
        assert intersection_count(witness, ALPHA).count == 0
        assert intersection_count(witness, moved).count == 0
        assert interior_witness(chart, BETA) is None


class TestWidth:

    def test_disjoint_arcs(self):
        chart = make_chart(ALPHA)
        assert width(chart, straight_arc(chart, 0, 0), straight_arc(chart, HALF, HALF)) == 0

    def test_crossing_arcs(self):
        chart = make_chart(ALPHA)
        assert width(chart, straight_arc(chart, 0, 0), straight_arc(chart, HALF, -HALF)) == 1

    def test_staircase_arc(self):
        chart = make_chart(ALPHA)
        for q in range(1, 5):
            stairs = straight_arc(chart, 0, q)
            # closed arcs: the endpoints on the boundary count
            assert width(chart, straight_arc(chart, 0, 0), stairs) == q + 1
            assert width(chart, straight_arc(chart, HALF, HALF), stairs) == q

    @settings(max_examples=50, deadline=None)
    @given(quarters, tops, quarters, tops)
    def test_symmetric(self, b0, t0, b1, t1):
        chart = make_chart(ALPHA)
        a, b = straight_arc(chart, b0, t0), straight_arc(chart, b1, t1)
        if a.vertices == b.vertices:
            return
        assert width(chart, a, b) == width(chart, b, a)

    def test_curve_width(self):
        chart = make_chart(ALPHA)
        assert curve_width(chart, BETA, BETA) == 1
        assert curve_width(chart, BETA, translate_curve(BETA, (HALF, 0))) == 0

    @pytest.mark.parametrize("p,q", [(1, 1), (1, 2), (2, 1), (2, 3)])
    def test_curve_width_against_twist(self, p, q):
        chart = make_chart(BETA)
        h = h_pq(p, q)
        ahead = apply_to_curve(h, ALPHA)
        images = [ahead, apply_to_curve(h, ahead), apply_to_curve(h.inverse(), ALPHA)]
        for image in images:
            assert abs(curve_width(chart, ALPHA, image) - twist(chart, ALPHA, image).value) <= 1

    def test_curve_width_without_arcs(self):
        chart = make_chart(ALPHA)
        with pytest.raises(NoArc):
            curve_width(chart, translate_curve(ALPHA, (0, HALF)), BETA)


class TestRelativeWidth:

    def test_trivial(self):
        assert relative_width(ALPHA, translate_curve(ALPHA, (0, HALF))) == 0
        assert relative_width(ALPHA, ALPHA) == 1

    @pytest.mark.parametrize("n", range(1, 6))
    def test_staircase(self, n):
        stair = staircase_curve(n)
        assert relative_width(ALPHA, stair) == n == lift_scan_width(stair)

    def test_different_classes(self):
        with pytest.raises(NotIsotopic):
            relative_width(ALPHA, BETA)
