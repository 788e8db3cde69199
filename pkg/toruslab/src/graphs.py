from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd, floor
from typing import Dict, List, Optional, Sequence, Tuple

import torch

from .curves import TorusCurve, qp, intersection_count, same_support
from .annuli import AnnulusChart, Projection, StripArc, project, relative_width, width
from .errors import EmptyProjection, MalformedInput, NotAMarking, NotIsotopic
from .utils import get_logger


logger = get_logger(__name__)

TWIST_MODES = ("hausdorff", "diameter", "pointwise")


@dataclass(frozen=True)
class Marking:
    a: TorusCurve
    b: TorusCurve


def make_marking(a: TorusCurve, b: TorusCurve) -> Marking:
    report = intersection_count(a, b)
    if report.count != 1 or not report.all_transverse:
        raise NotAMarking(f"curves meet {report.count} times (transverse={report.all_transverse})")
    return Marking(a, b)


@dataclass(frozen=True)
class Slope:
    r"""
    The rational p/q, reduced with q > 0; infinity is 1/0.
    """
    p: int
    q: int

    def __post_init__(self):
        p, q = self.p, self.q
        if p == 0 and q == 0:
            raise MalformedInput("0/0 is not a slope")
        g = gcd(p, q)
        p, q = p // g, q // g
        if q < 0 or (q == 0 and p < 0):
            p, q = -p, -q
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    def __str__(self):
        return f"{self.p}/{self.q}"


@dataclass(frozen=True)
class TwistValue:
    value: int
    mode: str
    hausdorff: int
    diameter: Optional[int]
    pointwise: int
    certificates: Dict[str, object] = field(default_factory=dict, compare=False)


def fine_adjacent(c1: TorusCurve, c2: TorusCurve) -> bool:
    report = intersection_count(c1, c2)
    return report.count == 0 or (report.count == 1 and report.all_transverse)


def arc_distance(chart: AnnulusChart, a: StripArc, b: StripArc) -> int:
    if a.vertices == b.vertices:
        return 0
    return width(chart, a, b) + 1


def _set_distances(chart, A: Sequence[StripArc], B: Sequence[StripArc], with_diameter: bool = True):
    cache = {}

    def dist(x, y):
        key = (x.vertices, y.vertices) if x.vertices <= y.vertices else (y.vertices, x.vertices)
        if key not in cache:
            cache[key] = arc_distance(chart, x, y)
        return cache[key]

    forward = max(min(dist(a, b) for b in B) for a in A)
    backward = max(min(dist(a, b) for a in A) for b in B)
    pointwise = min(dist(a, b) for a in A for b in B)
    if not with_diameter:
        return max(forward, backward), None, pointwise
    # quadratic in the number of arcs
    union = list({x.vertices: x for x in list(A) + list(B)}.values())
    diameter = max((dist(x, y) for i, x in enumerate(union) for y in union[i + 1:]), default=0)
    return max(forward, backward), diameter, pointwise


def _twist_value(chart, A, B, mode, certificates) -> TwistValue:
    if mode not in TWIST_MODES:
        raise MalformedInput(f"unknown twist mode {mode!r}")
    hausdorff, diameter, pointwise = _set_distances(chart, A.arcs, B.arcs, mode == "diameter")
    values = {"hausdorff": hausdorff, "diameter": diameter, "pointwise": pointwise}
    return TwistValue(values[mode], mode, hausdorff, diameter, pointwise, certificates)


def twist(chart: AnnulusChart, c1: TorusCurve, c2: TorusCurve, mode: str = "hausdorff") -> TwistValue:
    r"""
    Twist number of c1 and c2 in the annulus of `chart`.

    Args:
        mode: which distance between the projections to report as `value`;
              the diameter is only computed in its own mode
    """
    A = project(chart, c1)
    if A.is_empty():
        raise EmptyProjection(1)
    B = project(chart, c2)
    if B.is_empty():
        raise EmptyProjection(2)
    result = _twist_value(chart, A, B, mode, {"arcs": [len(A), len(B)]})
    logger.debug("twist %s: %d (arcs %d, %d)", mode, result.value, len(A), len(B))
    return result


def marking_projection(chart: AnnulusChart, m: Marking) -> Projection:
    arcs = {a.vertices: a for c in (m.a, m.b) for a in project(chart, c)}
    return Projection(tuple(arcs[k] for k in sorted(arcs)))


def marking_twist(chart: AnnulusChart, m1: Marking, m2: Marking, mode: str = "hausdorff") -> TwistValue:
    A = marking_projection(chart, m1)
    B = marking_projection(chart, m2)
    # both curves of a marking cannot miss the same annulus
    if A.is_empty():
        raise EmptyProjection(1, "first marking has empty projection")
    if B.is_empty():
        raise EmptyProjection(2, "second marking has empty projection")
    return _twist_value(chart, A, B, mode, {"arcs": [len(A), len(B)]})


def _require_isotopic(c1: TorusCurve, c2: TorusCurve):
    if c2.closure not in (c1.closure, -c1.closure):
        raise NotIsotopic(f"classes {c1.closure.as_list()} and {c2.closure.as_list()} differ")


def d0(c1: TorusCurve, c2: TorusCurve) -> int:
    r"""
    Distance of c1 and c2 in the graph of curves isotopic to c1: one more than the number
    of lifts of c1 met by a lift of c2 in the cyclic cover.
    """
    _require_isotopic(c1, c2)
    if same_support(c1, c2):
        return 0
    return relative_width(c1, c2) + 1


def cover_degree(c1: TorusCurve, c2: TorusCurve) -> int:
    r"""
    Number of lifts of c1 in the cyclic cover met by one lift of c2; d0 - 1 for distinct curves.
    """
    _require_isotopic(c1, c2)
    if same_support(c1, c2):
        return 0
    return relative_width(c1, c2)


def marking_width_distance(m1: Marking, m2: Marking) -> int:
    _require_isotopic(m1.a, m2.a)
    _require_isotopic(m1.b, m2.b)
    return relative_width(m1.a, m2.a) + relative_width(m1.b, m2.b)


def image_diameter(word, samples: int = 256) -> float:
    r"""
    Euclidean diameter of the image of the unit square under the lift `word`,
    sampled along the boundary of the square.
    """
    t = torch.linspace(0.0, 1.0, samples + 1, dtype=torch.float64)
    zeros, ones = torch.zeros_like(t), torch.ones_like(t)
    boundary = torch.cat([
        torch.stack([t, zeros], dim=1),
        torch.stack([ones, t], dim=1),
        torch.stack([t, ones], dim=1),
        torch.stack([zeros, t], dim=1),
    ])
    image = word.numeric(boundary)
    return float(torch.cdist(image, image).max())


def relative_width_bound(word, marking: Marking, samples: int = 256) -> Dict[str, object]:
    r"""
    Compares the relative widths of the image marking with the diameter of the image of the unit square.
    Widths count the starting lift, so the lower comparison allows one extra lift.
    """
    from .dynamics import apply_to_curve

    wa = relative_width(marking.a, apply_to_curve(word, marking.a))
    wb = relative_width(marking.b, apply_to_curve(word, marking.b))
    diameter = image_diameter(word, samples)
    lower_ok = max(wa, wb) - 1 <= diameter + 1e-9
    upper_ok = diameter <= wa + wb + 4
    return {
        "widths": [wa, wb],
        "diameter": diameter,
        "lower_ok": lower_ok,
        "upper_ok": upper_ok,
        "ok": lower_ok and upper_ok,
    }


# ----------------------------------------------------------------------------
# Farey graph


def farey_adjacent(s1: Slope, s2: Slope) -> bool:
    return abs(s1.p * s2.q - s2.p * s1.q) == 1


def _ext_gcd(a, b):
    if b == 0:
        return a, 1, 0
    g, s, t = _ext_gcd(b, a % b)
    return g, t, s - (a // b) * t


@lru_cache(maxsize=None)
def _from_infinity(p: int, q: int) -> int:
    # every path from infinity to p/q passes floor(p/q) or ceil(p/q)
    if q == 0:
        return 0
    if q == 1:
        return 1
    n = p // q
    r = p - n * q
    # p/q - n = r/q maps to q/r, p/q - (n+1) = (r-q)/q maps to q/(r-q)
    return 1 + min(_from_infinity(q, r), _from_infinity(-q, q - r))


def farey_distance(s1: Slope, s2: Slope) -> int:
    r"""
    Graph distance in the Farey graph. s1 is moved to infinity by an integral unimodular map,
    then the distance from infinity is computed by continued-fraction descent.
    """
    if s1 == s2:
        return 0
    _, s, r = _ext_gcd(s1.p, s1.q)
    # s1.p * s + s1.q * r = 1, so [[s, r], [-q, p]] sends s1 to 1/0
    image = Slope(s * s2.p + r * s2.q, -s1.q * s2.p + s1.p * s2.q)
    return _from_infinity(image.p, image.q)


def farey_slopes(bound: int) -> List[Slope]:
    found = {Slope(1, 0)}
    for q in range(1, bound + 1):
        for p in range(-bound, bound + 1):
            if gcd(p, q) == 1:
                found.add(Slope(p, q))
    return sorted(found, key=lambda s: (s.q, s.p))


@lru_cache(maxsize=8)
def _farey_neighbours(bound: int) -> Dict[Slope, List[Slope]]:
    vertices = farey_slopes(bound)
    neighbours: Dict[Slope, List[Slope]] = {v: [] for v in vertices}
    for i, u in enumerate(vertices):
        for v in vertices[i + 1:]:
            if farey_adjacent(u, v):
                neighbours[u].append(v)
                neighbours[v].append(u)
    return neighbours


def farey_bfs_distances(s1: Slope, bound: int = 24) -> Dict[Slope, int]:
    r"""
    Breadth-first distances from s1 in the Farey graph restricted to slopes with |p|, |q| <= bound.
    """
    neighbours = _farey_neighbours(bound)
    if s1 not in neighbours:
        raise MalformedInput(f"slope {s1} outside the bound {bound}")
    seen = {s1: 0}
    queue = deque([s1])
    while queue:
        u = queue.popleft()
        for v in neighbours[u]:
            if v not in seen:
                seen[v] = seen[u] + 1
                queue.append(v)
    return seen


def farey_bfs(s1: Slope, s2: Slope, bound: int = 24) -> Optional[int]:
    r"""
    Returns None when s2 is unreachable inside the restriction.
    """
    if s2 not in _farey_neighbours(bound):
        raise MalformedInput(f"slope {s2} outside the bound {bound}")
    return farey_bfs_distances(s1, bound).get(s2)


# ----------------------------------------------------------------------------
# straight arcs


def straight_arc(chart: AnnulusChart, bottom, top) -> StripArc:
    r"""
    The essential arc of S_0 from (bottom, 0) to (top, 1), normalized like projected arcs.
    """
    bottom, top = Fraction(bottom), Fraction(top)
    dx = floor(bottom)
    return StripArc((qp(bottom - dx, 0), qp(top - dx, 1)), True, chart)


def arc_graph_bfs(a: Tuple[int, int], b: Tuple[int, int], grid: int = 8, reach: int = 3) -> Optional[int]:
    r"""
    Breadth-first distance in the graph of straight essential arcs of the annulus whose
    endpoints lie on (1/grid)Z, adjacent when they are disjoint.

    Arcs are given as (bottom, top) in units of 1/grid, and top - bottom is limited to `reach` turns.
    """
    def canonical(arc):
        bottom, top = arc
        n = bottom // grid
        return bottom - n * grid, top - n * grid

    def adjacent(u, v):
        d0, d1 = v[0] - u[0], v[1] - u[1]
        lo, hi = min(d0, d1), max(d0, d1)
        return -(-lo // grid) > hi // grid

    start, goal = canonical(a), canonical(b)
    vertices = [
        (x, x + s) for x in range(grid) for s in range(-reach * grid, reach * grid + 1)
    ]
    seen = {start: 0}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        if u == goal:
            return seen[u]
        for v in vertices:
            if v not in seen and adjacent(u, v):
                seen[v] = seen[u] + 1
                queue.append(v)
    return None
