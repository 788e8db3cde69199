import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from toruslab.src.curves import qp
from toruslab.src.dynamics import ShearH, TENT
from toruslab.src.families import ALPHA, BETA, h_pq, triangle_candidate
from toruslab.src.formats import (
    dumps, jsonable, load_json, point_from_json, curve_from_json, curve_to_json, chart_from_json, word_to_json,
    word_from_json, load_word, estimate_to_json,
)
from toruslab.src.rotation import PolygonEstimate
from toruslab.src.plotting import plot_curves, plot_estimate
from toruslab.src.utils import parse_rational
from toruslab.src.errors import MalformedInput, UsageError


rationals = st.fractions(min_value=-2, max_value=2, max_denominator=16)


class TestRationals:

    def test_parse(self):
        assert parse_rational("3/4") == Fraction(3, 4)
        assert parse_rational(" -2 ") == -2
        assert parse_rational(5) == 5

    @pytest.mark.parametrize("text", ["0.5", "1/0", "a/b", True, "1/-2"])
    def test_refused(self, text):
        with pytest.raises(MalformedInput):
            parse_rational(text)

    def test_points(self):
        assert point_from_json("1/2,3") == qp(Fraction(1, 2), 3)
        assert point_from_json(["-1", 2]) == qp(-1, 2)
        with pytest.raises(MalformedInput):
            point_from_json(["1"])


class TestJson:

    def test_dumps_is_deterministic(self):
        assert dumps({"b": 1, "a": [1, 2]}) == '{"a":[1,2],"b":1}'

    def test_jsonable(self):
        assert jsonable({"x": (Fraction(1, 2), 1), 3: None}) == {"x": ["1/2", 1], "3": None}

    def test_missing_file(self, tmp_path):
        with pytest.raises(UsageError):
            load_json(str(tmp_path / "nowhere.json"))

    def test_broken_file(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(MalformedInput):
            load_json(str(path))

    def test_estimate(self):
        estimate = PolygonEstimate([(0.0, 0.0), (1.0 / 3.0, 0.0), (0.0, 1.0)], n=10, grid=8)
        out = estimate_to_json(estimate)
        assert out["hull"][1] == [round(1 / 3, 12), 0.0]
        assert out["mode"] == "upper_sample"
        assert "inner_hull" not in out


class TestCurves:

    def test_missing_keys(self):
        with pytest.raises(MalformedInput):
            curve_from_json({"vertices": [["0", "0"]]})

    def test_closure_must_be_integral(self):
        with pytest.raises(MalformedInput):
            curve_from_json({"vertices": [["0", "0"]], "closure": [1.0, 0]})

    def test_chart(self):
        assert chart_from_json(curve_to_json(BETA)).dual == (-1, 0)
        assert chart_from_json({"core": curve_to_json(ALPHA), "dual": [0, 1]}).dual == (0, 1)
        with pytest.raises(MalformedInput):
            chart_from_json({"core": curve_to_json(ALPHA), "dual": [1, 0]})


class TestWords:

    def test_shear(self):
        word = word_from_json({"kind": "shear_h", "amplitude": "1/2"})
        assert word == ShearH(TENT, Fraction(1, 2))

    def test_examples(self):
        assert word_from_json("example:h_2_2") == h_pq(2, 2)
        assert load_word("example:h_3_5") == h_pq(3, 5)

    @pytest.mark.parametrize("obj", [
        "h_2_2",
        {"kind": "rotate"},
        {"kind": "power", "word": {"kind": "shear_v"}, "exponent": "2"},
        {"kind": "linear", "matrix": [[1, 0]]},
        {"kind": "translate"},
        {"words": []},
    ])
    def test_malformed(self, obj):
        with pytest.raises(MalformedInput):
            word_from_json(obj)

    @settings(max_examples=30, deadline=None)
    @given(rationals, rationals)
    def test_triangle_word_survives_serialization(self, x, y):
        word = triangle_candidate().word
        parsed = word_from_json(json.loads(dumps(word_to_json(word))))
        assert parsed((x, y)) == word((x, y))


class TestPlots:

    def test_estimate_groups(self, tmp_path):
        estimate = PolygonEstimate([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)], n=4, grid=8)
        path = tmp_path / "estimate.svg"
        plot_estimate(estimate, str(path), reference=[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)])
        text = path.read_text()
        assert 'id="hull"' in text
        assert 'id="reference"' in text

    def test_segment_estimate(self, tmp_path):
        estimate = PolygonEstimate([(0.0, 0.0), (1.0, 0.0)], n=4, grid=8)
        path = tmp_path / "segment.svg"
        plot_estimate(estimate, str(path))
        assert 'id="hull"' in path.read_text()

    def test_curves_are_reproducible(self, tmp_path):
        first, second = tmp_path / "a.svg", tmp_path / "b.svg"
        for path in (first, second):
            plot_curves([ALPHA, BETA], str(path), title="axes")
        text = first.read_text()
        assert 'id="curve0"' in text and 'id="curve1"' in text
        assert text == second.read_text()
