from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import floor, ceil
from typing import List, Optional, Tuple

from .curves import (
    QPoint, HomologyClass, TorusCurve, qp, padd, psub, cross,
    apply_matrix, contacts, departs_left, dual_vector, same_support, segment_intersection,
    intersection_count, reverse_curve,
)
from .errors import CoreOverlap, NoArc, NotIsotopic, OverlappingSegments, SelfIntersecting
from .utils import get_logger


logger = get_logger(__name__)


@lru_cache(maxsize=64)
def _moved(c: TorusCurve, matrix) -> TorusCurve:
    return apply_matrix(c, matrix)


@dataclass(frozen=True)
class AnnulusChart:
    r"""
    The annulus obtained by cutting the torus along `core`.

    Computations run in chart coordinates, where the integer matrix `matrix` sends the deck
    vector u to (1, 0) and the dual v to (0, 1). There the boundary lifts are the lift of the
    normalized core and its translate by (0, 1), and the open strip between them is S_0.
    """
    core: TorusCurve
    deck: HomologyClass
    dual: Tuple[int, int]
    matrix: Tuple[Tuple[int, int], Tuple[int, int]]
    normal_core: TorusCurve

    @property
    def inverse(self):
        (a, b) = (self.deck.p, self.deck.q)
        v1, v2 = self.dual
        return (a, v1), (b, v2)

    def to_chart(self, p) -> QPoint:
        (m11, m12), (m21, m22) = self.matrix
        return QPoint(m11 * p[0] + m12 * p[1], m21 * p[0] + m22 * p[1])

    def to_plane(self, p) -> QPoint:
        (m11, m12), (m21, m22) = self.inverse
        return QPoint(m11 * p[0] + m12 * p[1], m21 * p[0] + m22 * p[1])

    def normalize(self, c: TorusCurve) -> TorusCurve:
        return _moved(c, self.matrix)

    def denormalize(self, c: TorusCurve) -> TorusCurve:
        return _moved(c, self.inverse)

    @property
    def boundary_lifts(self) -> Tuple[Tuple[QPoint, ...], Tuple[QPoint, ...]]:
        r"""One period of each boundary lift, in plane coordinates."""
        lower = tuple(self.to_plane(p) for p in self.normal_core.lift_vertices)
        upper = tuple(padd(p, qp(*self.dual)) for p in lower)
        return lower, upper


@dataclass(frozen=True)
class StripArc:
    r"""
    A piece of a curve inside the closed strip S_0, in chart coordinates.
    Essential arcs run from the lower boundary lift to the upper one.
    """
    vertices: Tuple[QPoint, ...]
    essential: bool
    host: Optional[AnnulusChart] = field(default=None, compare=False, hash=False, repr=False)

    def segments(self):
        return list(zip(self.vertices, self.vertices[1:]))

    def in_plane(self) -> List[QPoint]:
        return [self.host.to_plane(p) for p in self.vertices]


@dataclass(frozen=True)
class Projection:
    arcs: Tuple[StripArc, ...] = ()

    def __len__(self):
        return len(self.arcs)

    def __iter__(self):
        return iter(self.arcs)

    def is_empty(self) -> bool:
        return not self.arcs


def make_chart(core: TorusCurve) -> AnnulusChart:
    u = core.closure
    v = dual_vector(u)
    matrix = ((v[1], -v[0]), (-u.q, u.p))
    normal_core = apply_matrix(core, matrix)
    chart = AnnulusChart(core, u, v, matrix, normal_core)
    logger.debug("chart of class %s with dual %s", u.as_list(), v)
    return chart


def below_lift(core: TorusCurve, p, level: int) -> bool:
    r"""
    True when p lies strictly below the lift core + (0, level) of a (1, 0) curve.
    Parity of upward ray crossings with the half-open rule.
    """
    px, py = p[0], p[1] - level
    xs = [v.x for v in core.lift_vertices]
    crossings = 0
    for n in range(floor(px - max(xs)) - 1, ceil(px - min(xs)) + 2):
        for a, b in core.segments():
            ax, bx = a.x + n, b.x + n
            if (ax <= px < bx) or (bx <= px < ax):
                y = a.y + (px - ax) * (b.y - a.y) / (bx - ax)
                if y > py:
                    crossings += 1
    return crossings % 2 == 1


def _position(contact) -> Fraction:
    return contact.index + contact.param


def _normalize_arc(vertices: List[QPoint], strip: int, essential: bool, chart) -> StripArc:
    shifted = [QPoint(v.x, v.y - strip) for v in vertices]
    dx = floor(shifted[0].x)
    shifted = tuple(QPoint(v.x - dx, v.y) for v in shifted)
    return StripArc(shifted, essential, chart)


def pieces(chart: AnnulusChart, c: TorusCurve) -> List[StripArc]:
    r"""
    Cuts c at every contact with the boundary lifts and brings each piece into S_0.
    Returns [] when c is the core or misses the core entirely.
    """
    nc = chart.normalize(c)
    core = chart.normal_core
    if same_support(nc, core):
        return []
    try:
        found = contacts(nc, core)
    except OverlappingSegments as err:
        raise CoreOverlap(f"curve shares a segment with the core: {err}") from err
    if not found:
        return []
    k = len(nc)
    shift = nc.shift
    arcs = []
    for i, start in enumerate(found):
        last = i + 1 == len(found)
        end = found[0] if last else found[i + 1]
        s_pos = _position(start)
        e_pos = _position(end) + (k if last else 0)
        e_point = padd(end.point, shift) if last else end.point
        l1 = start.offset[1]
        l2 = end.offset[1] + (nc.closure.q if last else 0)
        inner = [nc.vertex(j) for j in range(floor(s_pos) + 1, ceil(e_pos))]
        path = [start.point] + inner + [e_point]
        if l1 != l2:
            if l1 > l2:
                path.reverse()
            arcs.append(_normalize_arc(path, min(l1, l2), True, chart))
            continue
        # the core runs in the +x direction, so its left side is the strip above the lift
        above = departs_left(core, start.other_position, start.other_point, psub(path[1], path[0]))
        strip = l1 if above else l1 - 1
        arcs.append(_normalize_arc(path, strip, False, chart))
    return arcs


@lru_cache(maxsize=64)
def project(chart: AnnulusChart, c: TorusCurve) -> Projection:
    arcs = sorted({a for a in pieces(chart, c) if a.essential}, key=lambda a: a.vertices)
    return Projection(tuple(arcs))


# ----------------------------------------------------------------------------
# widths


def _slab_crossings(sa, sb) -> Optional[Tuple[Fraction, Fraction]]:
    r"""
    x-extent of the Minkowski difference sb - sa on the line y = 0, or None.
    """
    corners = [psub(q, p) for q in sb for p in sa]
    xs = [pt.x for pt in corners if pt.y == 0]
    for i in range(4):
        for j in range(i + 1, 4):
            p, q = corners[i], corners[j]
            if (p.y < 0 < q.y) or (q.y < 0 < p.y):
                xs.append(p.x + (q.x - p.x) * (-p.y) / (q.y - p.y))
    if not xs:
        return None
    return min(xs), max(xs)


class _SlabIndex:
    r"""
    Segments bucketed by their y-extent.
    """

    def __init__(self, segments, size):
        ys = [y for s in segments for y in (s[0].y, s[1].y)]
        self.lo, hi = min(ys), max(ys)
        self.size = size
        self.step = (hi - self.lo) / size if hi > self.lo else Fraction(1)
        self.bins = defaultdict(list)
        for idx, s in enumerate(segments):
            for b in self._bins(min(s[0].y, s[1].y), max(s[0].y, s[1].y)):
                self.bins[b].append(idx)

    def _bins(self, y0, y1):
        first = max(floor((y0 - self.lo) / self.step), 0)
        last = min(floor((y1 - self.lo) / self.step), self.size - 1)
        return range(first, last + 1)

    def query(self, y0, y1):
        seen = set()
        for b in self._bins(y0, y1):
            for idx in self.bins.get(b, ()):
                if idx not in seen:
                    seen.add(idx)
                    yield idx


def _shifted(seg, n):
    return (QPoint(seg[0].x + n, seg[0].y), QPoint(seg[1].x + n, seg[1].y))


def width_offsets(a: StripArc, b: StripArc) -> List[int]:
    r"""
    Every n such that a + (n, 0) meets b.
    """
    seg_a, seg_b = a.segments(), b.segments()
    index = _SlabIndex(seg_b, max(1, min(512, int(len(seg_b) ** 0.5) + 1)))
    check_overlap = a.vertices != b.vertices
    found = set()
    for sa in seg_a:
        y0, y1 = min(sa[0].y, sa[1].y), max(sa[0].y, sa[1].y)
        for idx in index.query(y0, y1):
            sb = seg_b[idx]
            extent = _slab_crossings(sa, sb)
            if extent is None:
                continue
            lo, hi = ceil(extent[0]), floor(extent[1])
            if lo > hi:
                continue
            if check_overlap and cross(psub(sa[1], sa[0]), psub(sb[1], sb[0])) == 0:
                for n in range(lo, hi + 1):
                    hit = segment_intersection(*_shifted(sa, n), sb[0], sb[1])
                    if hit is not None and hit[0] == "overlap":
                        raise OverlappingSegments("arcs share a segment of positive length")
            found.update(range(lo, hi + 1))
    return sorted(found)


def width(chart: AnnulusChart, a: StripArc, b: StripArc) -> int:
    r"""
    Number of deck translates of a met by one lift of b.
    """
    return len(width_offsets(a, b))


def relative_width(d: TorusCurve, d2: TorusCurve) -> int:
    r"""
    Number of distinct lifts of d in the plane met by one lift of d2.
    """
    if d2.closure not in (d.closure, -d.closure):
        raise NotIsotopic(f"classes {d.closure.as_list()} and {d2.closure.as_list()} differ")
    chart = make_chart(d)
    nd2 = chart.normalize(d2)
    if same_support(nd2, chart.normal_core):
        return 1
    levels = {contact.offset[1] for contact in contacts(nd2, chart.normal_core)}
    return len(levels)


def curve_width(chart: AnnulusChart, c1: TorusCurve, c2: TorusCurve) -> int:
    r"""
    Largest width over every pair of pieces of c1 and c2 inside the strip.
    """
    p1, p2 = pieces(chart, c1), pieces(chart, c2)
    if not p1:
        raise NoArc("first curve has no arc in the annulus")
    if not p2:
        raise NoArc("second curve has no arc in the annulus")
    return max(width(chart, a, b) for a in p1 for b in p2)


# ----------------------------------------------------------------------------
# curves inside the open strip


def interior_witness(chart: AnnulusChart, c: TorusCurve, eps=Fraction(1, 8), attempts: int = 24):
    r"""
    A curve in the interior of the annulus disjoint from c, when c has empty projection.
    Returns None if the projection is nonempty.
    """
    from .surgery import StripCurve, push_right, wedge

    if not project(chart, c).is_empty():
        return None
    core = chart.normal_core
    nc = chart.normalize(c)
    base = StripCurve.from_torus(core)
    if not same_support(nc, core):
        found = contacts(nc, core)
        if found:
            if nc.closure.p < 0:
                nc = reverse_curve(nc)
                found = contacts(nc, core)
            level = found[0].offset[1]
            lifted = StripCurve.from_torus(nc, vertical=-level)
            base = wedge(base, lifted)
    eps = Fraction(eps)
    for _ in range(attempts):
        try:
            candidate = push_right(base, eps).to_torus()
        except SelfIntersecting:
            eps /= 2
            continue
        if (intersection_count(candidate, core).count == 0
                and _disjoint(candidate, nc)):
            return chart.denormalize(candidate)
        eps /= 2
    return None


def _disjoint(a: TorusCurve, b: TorusCurve) -> bool:
    if same_support(a, b):
        return False
    try:
        return intersection_count(a, b).count == 0
    except OverlappingSegments:
        return False
