from fractions import Fraction
from math import gcd

import pytest
from hypothesis import given, settings, assume, strategies as st

from toruslab.src.curves import (
    HomologyClass, qp, validate_curve, homology_class, intersection_count, translates_in_box,
    straight_curve, translate_curve, apply_matrix, reverse_curve, same_support, dual_vector,
)
from toruslab.src.dynamics import ShearV, apply_to_curve
from toruslab.src.families import h_pq
from toruslab.src.formats import curve_from_json, curve_to_json
from toruslab.src.errors import Inessential, NotClosed, OverlappingSegments, SelfIntersecting


ALPHA = straight_curve(1, 0)
BETA = straight_curve(0, 1)

primitive = st.tuples(st.integers(-4, 4), st.integers(-4, 4)).filter(
    lambda v: v != (0, 0) and gcd(abs(v[0]), abs(v[1])) == 1
)
heights = st.fractions(min_value=Fraction(1, 64), max_value=Fraction(63, 64), max_denominator=64)


class TestValidate:

    def test_straight_representatives(self):
        assert ALPHA.vertices == (qp(0, 0),)
        assert ALPHA.closure == HomologyClass(1, 0)
        assert BETA.closure == HomologyClass(0, 1)

    def test_non_primitive_class(self):
        with pytest.raises(Inessential):
            validate_curve([(0, 0), (Fraction(1, 2), Fraction(1, 3)), (1, 0)], (2, 0))

    def test_zero_class(self):
        with pytest.raises(Inessential):
            validate_curve([(0, 0), (Fraction(1, 2), Fraction(1, 3))], (0, 0))

    def test_not_closed(self):
        with pytest.raises(NotClosed):
            validate_curve([(0, 0), (Fraction(1, 2), Fraction(1, 3)), (2, 0)], (1, 0))

    def test_self_crossing(self):
        raw = [(0, 0), (Fraction(1, 2), Fraction(1, 2)), (Fraction(1, 2), Fraction(1, 4)), (Fraction(1, 4), Fraction(1, 2))]
        with pytest.raises(SelfIntersecting):
            validate_curve(raw, (1, 0))

    def test_collinear_vertices_merge(self):
        c = validate_curve([(0, 0), (Fraction(1, 3), 0), (Fraction(2, 3), 0), (1, 0)], (1, 0))
        assert c == ALPHA

    def test_canonical_start(self):
        c = validate_curve([(Fraction(1, 2), 1), (1, Fraction(1, 2)), (Fraction(3, 2), 1)], (1, 0))
        shifted = validate_curve([(Fraction(3, 2), 3), (2, Fraction(5, 2)), (Fraction(5, 2), 3)], (1, 0))
        assert c == shifted
        assert c.vertices[0] == qp(0, Fraction(1, 2))

    def test_serialization(self):
        c = validate_curve([(0, Fraction(1, 3)), (Fraction(1, 2), Fraction(5, 3))], (1, 0))
        assert curve_to_json(c) == {"vertices": [["0", "1/3"], ["1/2", "5/3"]], "closure": [1, 0]}
        assert curve_from_json(curve_to_json(c)) == c


class TestHomology:

    def test_axes(self):
        assert homology_class(ALPHA).as_list() == [1, 0]
        assert homology_class(BETA).as_list() == [0, 1]

    def test_matrix_image(self):
        image = apply_matrix(ALPHA, ((1, 1), (0, 1)))
        assert homology_class(image).as_list() == [1, 0]
        image = apply_matrix(ALPHA, ((1, 0), (1, 1)))
        assert homology_class(image).as_list() == [1, 1]

    def test_reverse(self):
        assert homology_class(reverse_curve(ALPHA)).as_list() == [-1, 0]
        assert same_support(reverse_curve(ALPHA), ALPHA)

    @given(primitive)
    def test_dual_vector(self, h):
        v = dual_vector(HomologyClass(*h))
        assert h[0] * v[1] - h[1] * v[0] == 1

    def test_images_skip_sweep(self, monkeypatch):
        h = h_pq(3, 5)

        def refuse(curve):
            raise AssertionError("self-intersection sweep ran")

        monkeypatch.setattr("toruslab.src.curves._check_simple", refuse)
        assert homology_class(apply_matrix(BETA, ((1, 0), (1, 1)))).as_list() == [0, 1]
        assert same_support(translate_curve(ALPHA, (0, 1)), ALPHA)
        assert homology_class(reverse_curve(BETA)).as_list() == [0, -1]
        image = apply_to_curve(h, ALPHA)
        assert homology_class(apply_to_curve(h, image)).as_list() == [1, 0]
        with pytest.raises(AssertionError):
            validate_curve([(0, Fraction(1, 3))], (1, 0))


class TestIntersection:

    def test_axes_meet_once(self):
        report = intersection_count(ALPHA, BETA)
        assert report.count == 1
        assert report.all_transverse
        assert report.touch_points == ()

    def test_parallel_translate(self):
        assert intersection_count(ALPHA, translate_curve(ALPHA, (0, Fraction(1, 2)))).count == 0

    def test_sheared_alpha(self):
        sheared = apply_to_curve(ShearV(), ALPHA)
        report = intersection_count(sheared, BETA)
        assert report.count == 1
        assert report.all_transverse

    def test_touch_is_reported(self):
        tent = validate_curve([(0, 0), (Fraction(1, 2), Fraction(1, 2))], (1, 0))
        report = intersection_count(ALPHA, tent)
        assert report.count == 1
        assert not report.all_transverse
        assert report.touch_points == (qp(0, 0),)

    def test_shared_segment(self):
        with pytest.raises(OverlappingSegments):
            intersection_count(ALPHA, ALPHA)

    @settings(max_examples=40, deadline=None)
    @given(primitive, primitive)
    def test_straight_curves(self, h1, h2):
        det = h1[0] * h2[1] - h1[1] * h2[0]
        assume(det != 0)
        report = intersection_count(straight_curve(*h1), straight_curve(*h2))
        assert report.count == abs(det)
        assert report.all_transverse

    @settings(max_examples=30, deadline=None)
    @given(primitive, primitive, heights)
    def test_symmetric(self, h1, h2, y):
        assume(h1[0] * h2[1] - h1[1] * h2[0] != 0)
        c1 = straight_curve(*h1)
        c2 = translate_curve(straight_curve(*h2), (Fraction(1, 7), y))
        assert intersection_count(c1, c2).count == intersection_count(c2, c1).count

    @settings(max_examples=30, deadline=None)
    @given(heights)
    def test_disjoint_translates(self, y):
        assert intersection_count(ALPHA, translate_curve(ALPHA, (Fraction(1, 3), y))).count == 0


class TestTranslates:

    def test_alpha_in_unit_box(self):
        paths = translates_in_box(ALPHA, (0, 0, 1, 1))
        assert [p.index for p in paths] == [0, 1]

    def test_beta_in_long_box(self):
        assert len(translates_in_box(BETA, (0, 0, 3, 1))) == 4

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 3), heights)
    def test_brute_force(self, n, y):
        c = validate_curve([(0, y), (Fraction(1, 2), y + n)], (1, 0))
        box = (0, 0, 1, 1)
        paths = translates_in_box(c, box)
        # the lift of c + (0, k) covers heights y + k .. y + k + n
        expected = [k for k in range(-n - 2, 3) if y + k <= 1 and y + k + n >= 0]
        assert sorted(p.offset[1] for p in paths) == expected
