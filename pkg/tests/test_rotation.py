import math

import pytest

from toruslab.src.dynamics import TENT, SIN2, Compose, Power, rescale
from toruslab.src.families import h_pq, shear_pair
from toruslab.src.rotation import (
    convex_hull, hausdorff, point_polygon_distance, parse_polygon, best_translate, one_sided_excess,
    rotation_set_estimate, schottky_convergence_experiment,
)
from toruslab.src.errors import MalformedInput


def square(side):
    return [(0.0, 0.0), (side, 0.0), (side, side), (0.0, side)]


def gf(profile=TENT):
    f, g = shear_pair(profile)
    return Compose((g, f))


class TestGeometry:

    def test_hull(self):
        points = [(0, 0), (1, 0), (1, 1), (0, 1), (0.5, 0.5), (0.5, 0)]
        assert convex_hull(points) == square(1.0)
        assert convex_hull(list(reversed(points))) == square(1.0)

    def test_segment_hull(self):
        assert convex_hull([(0, 0), (0.5, 0), (1, 0)]) == [(0.0, 0.0), (1.0, 0.0)]

    def test_distance(self):
        assert point_polygon_distance((0.5, 0.5), square(1.0)) == 0.0
        assert point_polygon_distance((2.0, 0.5), square(1.0)) == pytest.approx(1.0)
        assert hausdorff(square(1.0), square(2.0)) == pytest.approx(math.sqrt(2))
        assert hausdorff(square(1.0), list(reversed(square(1.0)))) == 0.0

    def test_parse_polygon(self):
        assert parse_polygon("0,0;1,0;0,1") == [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]
        for text in ("0,0;1", "a,b", ""):
            with pytest.raises(MalformedInput):
                parse_polygon(text)

    def test_best_translate(self):
        moved = [(x + 0.5, y) for x, y in square(1.0)]
        _, distance = best_translate(moved, square(1.0))
        assert distance == pytest.approx(0.0, abs=1e-9)
        assert one_sided_excess(moved, square(1.0), 0.1) == pytest.approx(0.4)
        assert one_sided_excess(moved, square(1.0), 1.0) == 0.0


class TestEstimate:

    def test_shear(self):
        f, _ = shear_pair(TENT)
        estimate = rotation_set_estimate(f, [5], 8)
        assert hausdorff(estimate.hull_vertices, [(0.0, 0.0), (1.0, 0.0)]) <= 1e-9

    @pytest.mark.parametrize("word,side", [(gf(), 1.0), (h_pq(2, 2), 2.0)])
    def test_tent_squares(self, word, side):
        estimate = rotation_set_estimate(word, [2, 4], 8)
        assert hausdorff(estimate.hull_vertices, square(side)) <= 1e-9
        assert estimate.diagnostics["gaps"] == [pytest.approx(0.0, abs=1e-9)]
        assert estimate.n == 4 and estimate.grid == 8

    def test_smooth_square(self):
        estimate = rotation_set_estimate(gf(SIN2), [20], 64)
        assert hausdorff(estimate.hull_vertices, square(1.0)) <= 0.05 * math.sqrt(2)

    def test_orbit_lower(self):
        estimate = rotation_set_estimate(gf(), [8], 8, mode="orbit_lower", orbit_points=16, seed=3)
        assert estimate.inner_hull
        assert estimate.diagnostics["inner_contained"]

    def test_invalid(self):
        with pytest.raises(MalformedInput):
            rotation_set_estimate(gf(), [4], 1)
        with pytest.raises(MalformedInput):
            rotation_set_estimate(gf(), [0], 8)
        with pytest.raises(MalformedInput):
            rotation_set_estimate(gf(), [4], 8, mode="lower")


class TestCovariance:

    def test_rescale(self):
        estimate = rotation_set_estimate(rescale(gf(), 2), [4], 8)
        assert hausdorff(estimate.hull_vertices, square(0.5)) <= 1e-9

    def test_power(self):
        estimate = rotation_set_estimate(Power(gf(), 2), [4], 8)
        assert hausdorff(estimate.hull_vertices, square(2.0)) <= 1e-9

    def test_inverse(self):
        f, _ = shear_pair(TENT)
        estimate = rotation_set_estimate(f.inverse(), [5], 8)
        assert hausdorff(estimate.hull_vertices, [(-1.0, 0.0), (0.0, 0.0)]) <= 1e-9


@pytest.mark.slow
def test_schottky_experiment():
    f, g = shear_pair(TENT)
    result = schottky_convergence_experiment(f, g, 1, [5, 10, 20], n=40, grid=32, eps=0.1)
    assert [row.m for row in result["rows"]] == [5, 10, 20]
    assert result["nonincreasing"]
    assert result["rows"][-1].excess == 0.0
