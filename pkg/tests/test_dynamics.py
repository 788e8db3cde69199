from fractions import Fraction

import pytest
import torch
from hypothesis import given, settings, strategies as st

from toruslab.src.curves import qp, same_support
from toruslab.src.dynamics import (
    TENT, SIN2, KnotProfile, make_profile, ShearH, ShearV, Translate, Linear, Morse, ConePush, Compose,
    Power, Inverse, Conjugate, IDENTITY, eval_point, displacement, apply_to_curve, conjugate, rescale,
    realize_affine,
)
from toruslab.src.families import ALPHA, BETA, shear_pair, triangle_candidate, find_good_arc
from toruslab.src.errors import MalformedInput, NonInvertible, NotPLWord


rationals = st.fractions(min_value=-3, max_value=3, max_denominator=32)
points = st.tuples(rationals, rationals)
words = st.sampled_from([
    ShearH(),
    ShearV(TENT, Fraction(-3, 2)),
    Morse(Fraction(1, 8)),
    ConePush((0, 0, Fraction(1, 2), Fraction(1, 2)), (Fraction(1, 4), Fraction(1, 4)), (Fraction(1, 8), Fraction(3, 8))),
    Compose((ShearV(), ShearH())),
    Power(Compose((ShearV(), ShearH())), -2),
    Conjugate(ShearH(), ((2, 1), (1, 1))),
    triangle_candidate().word,
])


class TestProfiles:

    def test_tent(self):
        assert TENT.exact(0) == 0
        assert TENT.exact(Fraction(1, 2)) == 1
        assert TENT.exact(Fraction(5, 4)) == Fraction(1, 2)

    def test_numeric_matches_exact(self):
        t = torch.tensor([0.0, 0.125, 0.5, 0.75, 1.5, -0.25], dtype=torch.float64)
        expected = [float(TENT.exact(Fraction(v).limit_denominator())) for v in t.tolist()]
        assert TENT.numeric(t).tolist() == pytest.approx(expected)

    def test_knots_must_start_at_zero(self):
        with pytest.raises(MalformedInput):
            KnotProfile(((Fraction(1, 4), 0), (Fraction(1, 2), 1)))

    def test_make_profile(self):
        assert make_profile("tent") is TENT
        assert make_profile("sin2") == SIN2
        custom = make_profile({"knots": [["0", "0"], ["1/4", "1"]]})
        assert custom.exact(Fraction(1, 4)) == 1
        with pytest.raises(MalformedInput):
            make_profile("cosine")

    def test_sin2_is_numeric_only(self):
        with pytest.raises(NotPLWord):
            SIN2.exact(Fraction(1, 2))


class TestEval:

    def test_translate(self):
        assert eval_point(Translate((1, 0)), (0, 0)).point == qp(1, 0)

    def test_shear_peak(self):
        result = eval_point(ShearH(), (0, Fraction(1, 2)))
        assert result.exact
        assert result.point == qp(1, Fraction(1, 2))

    def test_smooth_composition(self):
        fs, gs = shear_pair(SIN2)
        result = eval_point(Compose((gs, fs)), (Fraction(1, 4), 0))
        assert not result.exact
        assert result.point == pytest.approx((0.25, 0.5))
        assert result.error_bound > 0

    def test_iterations(self):
        result = eval_point(ShearH(), (0, Fraction(1, 4)), iterations=4)
        assert result.point == qp(2, Fraction(1, 4))
        assert eval_point(ShearH(), result.point, iterations=-4).point == qp(0, Fraction(1, 4))

    def test_numeric_flag(self):
        result = eval_point(ShearH(), (0, Fraction(1, 2)), numeric=True)
        assert not result.exact
        assert result.point == pytest.approx((1.0, 0.5))

    def test_identity_displacement(self):
        assert displacement(IDENTITY, (Fraction(1, 3), Fraction(2, 7))).point == qp(0, 0)

    @given(rationals)
    def test_shear_displacement(self, x):
        assert displacement(ShearH(), (x, Fraction(1, 2))).point == qp(1, 0)

    @settings(max_examples=60, deadline=None)
    @given(words, points)
    def test_inverse(self, word, p):
        assert word.inverse()(word(p)) == qp(*p)
        assert Inverse(word)(word(p)) == qp(*p)

    @settings(max_examples=60, deadline=None)
    @given(words, points)
    def test_commutes_with_lattice(self, word, p):
        moved = word(qp(p[0] + 2, p[1] - 1))
        image = word(p)
        assert moved == qp(image.x + 2, image.y - 1)

    @settings(max_examples=40, deadline=None)
    @given(words, points)
    def test_numeric_agrees(self, word, p):
        exact = word(p)
        approx = word.numeric(torch.tensor([[float(p[0]), float(p[1])]], dtype=torch.float64))
        assert approx[0].tolist() == pytest.approx([float(exact.x), float(exact.y)], abs=1e-9)


class TestGenerators:

    def test_morse_fixed_points(self):
        m = Morse()
        for t in (Fraction(1, 4), Fraction(3, 4)):
            assert m(qp(t, t)) == qp(t, t)
        assert m(qp(0, Fraction(1, 2))) == qp(Fraction(-1, 8), Fraction(5, 8))

    def test_morse_strength(self):
        with pytest.raises(MalformedInput):
            Morse(Fraction(1, 4))

    def test_cone_push(self):
        push = ConePush((0, 0, Fraction(1, 2), Fraction(1, 2)), (Fraction(1, 4), Fraction(1, 4)),
                        (Fraction(1, 8), Fraction(3, 8)))
        assert push(qp(Fraction(1, 4), Fraction(1, 4))) == qp(Fraction(1, 8), Fraction(3, 8))
        assert push(qp(Fraction(5, 4), Fraction(-3, 4))) == qp(Fraction(9, 8), Fraction(-5, 8))
        assert push(qp(Fraction(3, 4), Fraction(3, 4))) == qp(Fraction(3, 4), Fraction(3, 4))
        assert push(qp(0, Fraction(1, 3))) == qp(0, Fraction(1, 3))

    def test_cone_push_outside_square(self):
        with pytest.raises(MalformedInput):
            ConePush((0, 0, Fraction(1, 2), Fraction(1, 2)), (Fraction(3, 4), Fraction(1, 4)), (Fraction(1, 4), Fraction(1, 4)))

    def test_linear(self):
        with pytest.raises(NonInvertible):
            Linear(((2, 0), (0, 1)))
        assert Linear(((1, 1), (0, 1))).inverse() == Linear(((1, -1), (0, 1)))

    def test_conjugate_singular(self):
        with pytest.raises(NonInvertible):
            Conjugate(ShearH(), ((1, 2), (2, 4)))


class TestCurves:

    def test_identity(self):
        assert apply_to_curve(IDENTITY, BETA) == BETA

    def test_rotation(self):
        image = apply_to_curve(Linear(((0, -1), (1, 0))), ALPHA)
        assert same_support(image, BETA)

    @pytest.mark.parametrize("q", [1, 2, 3, 5])
    def test_vertical_shear_power(self, q):
        image = apply_to_curve(Power(ShearV(), q), ALPHA)
        assert image.closure == ALPHA.closure
        good = find_good_arc(image, q)
        assert good.found
        assert good.vertices[-1].y == q

    def test_shear_fixes_alpha(self):
        assert apply_to_curve(ShearH(), ALPHA) == ALPHA

    def test_smooth_word(self):
        with pytest.raises(NotPLWord):
            apply_to_curve(ShearH(SIN2), ALPHA)

    def test_inverse_image(self):
        word = Compose((ShearV(), ShearH(), Morse()))
        image = apply_to_curve(word, BETA)
        assert apply_to_curve(word.inverse(), image) == BETA


class TestCovariance:

    def test_identity_conjugation(self):
        word = ShearH()
        conjugated = conjugate(word, ((1, 0), (0, 1)))
        for p in [(0, 0), (Fraction(1, 3), Fraction(1, 2)), (Fraction(-5, 4), Fraction(7, 3))]:
            assert conjugated(p) == word(p)

    def test_rescale(self):
        scaled = rescale(ShearH(), 2)
        assert scaled(qp(0, Fraction(1, 4))) == qp(Fraction(1, 2), Fraction(1, 4))
        with pytest.raises(MalformedInput):
            rescale(ShearH(), 0)

    def test_affine_realization(self):
        word = Compose((ShearV(), ShearH()))
        realization = realize_affine(word, ((2, 0), (0, 1)), (Fraction(1, 2), 0))
        assert realization.power == 4
        assert realization.conjugator == ((2, 0), (0, 4))
        # (1/4, 1/8) sits over the periodic point (1/2, 1/2), whose displacement is (1, 1)
        p = qp(Fraction(1, 4), Fraction(1, 8))
        assert displacement(realization.word, p).point == qp(Fraction(5, 2), 1)
        assert displacement(realization.word, p, iterations=3).point == qp(Fraction(15, 2), 3)

    def test_affine_singular(self):
        with pytest.raises(NonInvertible):
            realize_affine(ShearH(), ((1, 2), (2, 4)))
