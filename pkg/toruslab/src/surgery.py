from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from math import floor, ceil
from typing import Dict, List, Optional, Tuple

from .curves import (
    QPoint, TorusCurve, padd, psub, pscale, cross, sup_norm, pseudo_angle,
    segment_intersection, segment_param, point_on_segment, merge_collinear,
    contacts, intersection_count, reduce_point, reverse_curve, same_support, validate_curve,
)
from .annuli import AnnulusChart, make_chart, below_lift
from .errors import (
    DomainError, BudgetTooSmall, NoPath, NonTransverse, NotIsotopic, OverlappingSegments, SelfIntersecting,
)
from .graphs import d0
from .utils import get_logger


logger = get_logger(__name__)

DECK = QPoint(Fraction(1), Fraction(0))


@dataclass(frozen=True)
class StripCurve:
    r"""
    An essential curve of the infinite annulus R^2 / <(1, 0)>, stored as one period of its lift.
    T moves it by (0, 1); +infinity is up.
    """
    vertices: Tuple[QPoint, ...]

    def __len__(self):
        return len(self.vertices)

    @property
    def lift_vertices(self) -> Tuple[QPoint, ...]:
        return self.vertices + (padd(self.vertices[0], DECK),)

    def vertex(self, i: int) -> QPoint:
        n, r = divmod(i, len(self.vertices))
        v = self.vertices[r]
        return QPoint(v.x + n, v.y)

    def segments(self):
        lv = self.lift_vertices
        return [(lv[i], lv[i + 1]) for i in range(len(self.vertices))]

    def bbox(self):
        lv = self.lift_vertices
        return (min(v.x for v in lv), min(v.y for v in lv),
                max(v.x for v in lv), max(v.y for v in lv))

    def shifted(self, k: int) -> "StripCurve":
        return StripCurve(tuple(QPoint(v.x, v.y + k) for v in self.vertices))

    def to_torus(self) -> TorusCurve:
        return validate_curve(list(self.vertices), (1, 0))

    @classmethod
    def from_torus(cls, curve: TorusCurve, vertical: int = 0) -> "StripCurve":
        if curve.closure.as_list() == [-1, 0]:
            curve = reverse_curve(curve)
        if curve.closure.as_list() != [1, 0]:
            raise NotIsotopic(f"class {curve.closure.as_list()} is not the annulus core class")
        return strip_curve([QPoint(v.x, v.y + vertical) for v in curve.vertices])


def strip_curve(vertices) -> StripCurve:
    r"""
    Canonical StripCurve: collinear vertices merged, start at the least (x mod 1, y) vertex.
    """
    pts = []
    for v in vertices:
        if not pts or pts[-1] != v:
            pts.append(v)
    while len(pts) > 1 and padd(pts[0], DECK) == pts[-1]:
        pts.pop()
    pts = merge_collinear(pts, DECK)
    if len(pts) == 1:
        return StripCurve((QPoint(Fraction(0), pts[0].y),))
    start = min(range(len(pts)), key=lambda i: (pts[i].x - floor(pts[i].x), pts[i].y))
    rotated = pts[start:] + [padd(v, DECK) for v in pts[:start]]
    dx = floor(rotated[0].x)
    return StripCurve(tuple(QPoint(v.x - dx, v.y) for v in rotated))


# ----------------------------------------------------------------------------
# order predicates


def _period_range(c: StripCurve, x0, x1):
    bx0, _, bx1, _ = c.bbox()
    return range(floor(x0 - bx1) - 1, ceil(x1 - bx0) + 2)


def lift_segments(c: StripCurve, x0, x1):
    r"""Segments of the lift of c whose x-extent meets [x0, x1]."""
    out = []
    for n in _period_range(c, x0, x1):
        for a, b in c.segments():
            a2, b2 = QPoint(a.x + n, a.y), QPoint(b.x + n, b.y)
            if max(a2.x, b2.x) < x0 or min(a2.x, b2.x) > x1:
                continue
            out.append((a2, b2))
    return out


def _boxes_meet(s, r) -> bool:
    return not (max(s[0].x, s[1].x) < min(r[0].x, r[1].x)
                or max(r[0].x, r[1].x) < min(s[0].x, s[1].x)
                or max(s[0].y, s[1].y) < min(r[0].y, r[1].y)
                or max(r[0].y, r[1].y) < min(s[0].y, s[1].y))


def _lerp(a, b, t) -> QPoint:
    return padd(a, pscale(psub(b, a), t))


def _cut_against(c: StripCurve, others: List[StripCurve]):
    r"""
    One period of c split at every point where it meets the lifts of `others`.
    """
    x0, _, x1, _ = c.bbox()
    obstacles = [s for o in others for s in lift_segments(o, x0, x1)]
    out = []
    for a, b in c.segments():
        ts = {Fraction(0), Fraction(1)}
        for r in obstacles:
            if not _boxes_meet((a, b), r):
                continue
            hit = segment_intersection(a, b, r[0], r[1])
            if hit is None:
                continue
            points = [hit[1]] if hit[0] == "point" else list(hit[1])
            ts.update(segment_param(p, a, b) for p in points)
        ts = sorted(ts)
        out.extend((_lerp(a, b, t0), _lerp(a, b, t1)) for t0, t1 in zip(ts, ts[1:]))
    return out


def on_curve(p, c: StripCurve) -> bool:
    return any(point_on_segment(p, a, b) for a, b in lift_segments(c, p.x, p.x))


def meets(a: StripCurve, b: StripCurve) -> bool:
    x0, _, x1, _ = a.bbox()
    others = lift_segments(b, x0, x1)
    for s in a.segments():
        for r in others:
            if _boxes_meet(s, r) and segment_intersection(s[0], s[1], r[0], r[1]) is not None:
                return True
    return False


def leq(a: StripCurve, b: StripCurve) -> bool:
    r"""
    a <= b: b lies in the closure of the component of the complement of a containing +infinity.
    """
    for p, q in _cut_against(b, [a]):
        mid = QPoint((p.x + q.x) / 2, (p.y + q.y) / 2)
        if on_curve(mid, a):
            continue
        if below_lift(a, mid, 0):
            return False
    return True


def less(a: StripCurve, b: StripCurve) -> bool:
    return not meets(a, b) and leq(a, b)


def covered_by(c: StripCurve, others: List[StripCurve]) -> bool:
    r"""True when every point of c lies on one of `others`."""
    for p, q in _cut_against(c, others):
        mid = QPoint((p.x + q.x) / 2, (p.y + q.y) / 2)
        if not any(on_curve(mid, o) for o in others):
            return False
    return True


# ----------------------------------------------------------------------------
# wedge


def _arrangement(a: StripCurve, b: StripCurve, x0, x1):
    r"""
    Planar graph of the lifts of a and b over [x0, x1], split at every crossing.
    """
    segs = [(s, 0) for s in lift_segments(a, x0, x1)] + [(s, 1) for s in lift_segments(b, x0, x1)]
    segs.sort(key=lambda item: min(item[0][0].x, item[0][1].x))
    cuts = [{Fraction(0), Fraction(1)} for _ in segs]
    for i, (s, ci) in enumerate(segs):
        s_hi = max(s[0].x, s[1].x)
        for j in range(i + 1, len(segs)):
            r, cj = segs[j]
            if min(r[0].x, r[1].x) > s_hi:
                break
            if ci == cj or not _boxes_meet(s, r):
                continue
            hit = segment_intersection(s[0], s[1], r[0], r[1])
            if hit is None:
                continue
            if hit[0] == "overlap":
                raise OverlappingSegments("curves share a segment; perturb one of them first")
            cuts[i].add(segment_param(hit[1], s[0], s[1]))
            cuts[j].add(segment_param(hit[1], r[0], r[1]))
    adjacency: Dict[QPoint, set] = defaultdict(set)
    for (s, _), ts in zip(segs, cuts):
        ts = sorted(ts)
        for t0, t1 in zip(ts, ts[1:]):
            p, q = _lerp(s[0], s[1], t0), _lerp(s[0], s[1], t1)
            adjacency[p].add(q)
            adjacency[q].add(p)
    return adjacency


def _trace_upper_face(top: QPoint, adjacency) -> List[QPoint]:
    r"""
    Walks the boundary of the face above `top`, keeping the face on the left, until top + (1, 0).
    """
    target = padd(top, DECK)
    up = pseudo_angle((0, 1))
    nxt = min(adjacency[top], key=lambda q: (up - pseudo_angle(psub(q, top))) % 4)
    path = [top]
    prev, cur = top, nxt
    limit = 2 * sum(len(v) for v in adjacency.values()) + 4
    while cur != target:
        path.append(cur)
        back = pseudo_angle(psub(prev, cur))

        def turn(q):
            offset = (back - pseudo_angle(psub(q, cur))) % 4
            return offset if offset > 0 else 4

        prev, cur = cur, min(adjacency[cur], key=turn)
        limit -= 1
        if limit < 0:
            raise NoPath("upper face trace did not close; arrangement window too small")
    return path


def wedge(a: StripCurve, b: StripCurve) -> StripCurve:
    r"""
    Boundary of the component of the complement of a and b that contains +infinity.
    """
    if a == b:
        return a
    if not meets(a, b):
        return b if leq(a, b) else a
    top = max(a.vertices + b.vertices, key=lambda v: (v.y, -v.x))
    extent = sum(c.bbox()[2] - c.bbox()[0] for c in (a, b))
    adjacency = _arrangement(a, b, top.x - extent - 2, top.x + extent + 3)
    return strip_curve(_trace_upper_face(top, adjacency))


def _unit_normal(d) -> QPoint:
    n = sup_norm(d)
    return QPoint(-d[1] / n, d[0] / n)


def push_right(c: StripCurve, eps) -> StripCurve:
    r"""
    Offsets c towards +infinity by eps along sup-normalized normals, with mitered corners.
    """
    eps = Fraction(eps)
    out = []
    for i in range(len(c)):
        p = c.vertex(i)
        d_in = psub(p, c.vertex(i - 1))
        d_out = psub(c.vertex(i + 1), p)
        a = padd(p, pscale(_unit_normal(d_in), eps))
        b = padd(p, pscale(_unit_normal(d_out), eps))
        denom = cross(d_in, d_out)
        if denom == 0:
            out.append(a)
            continue
        s = cross(psub(b, a), d_out) / denom
        out.append(padd(a, pscale(d_in, s)))
    return strip_curve(out)


# ----------------------------------------------------------------------------
# quasi-paths


def strip_level(core: StripCurve, p) -> int:
    r"""The index m with p in the closed region between core + (0, m) and core + (0, m + 1)."""
    y1 = core.bbox()[3]
    m = floor(p[1] - y1) - 1
    while not below_lift(core, p, m + 1):
        m += 1
    return m


@dataclass
class QuasiPath:
    curves: List[TorusCurve]
    lifts: List[StripCurve]
    witnesses: List[TorusCurve] = field(default_factory=list)
    checks: Dict[str, bool] = field(default_factory=dict)
    push: Optional[Fraction] = None
    chart: Optional[AnnulusChart] = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def _witness(sigma, lower, upper, eps, attempts):
    for _ in range(attempts):
        candidate = push_right(sigma, eps)
        if all(less(lo, candidate) for lo in lower) and all(less(candidate, hi) for hi in upper):
            try:
                return candidate.to_torus(), eps
            except SelfIntersecting:
                pass
        eps /= 2
    raise BudgetTooSmall("no push keeps the witness inside its sandwich")


def build_quasi_path(alpha: TorusCurve, alpha2: TorusCurve, eps=Fraction(1, 16), attempts: int = 24) -> QuasiPath:
    r"""
    Quasi-path from alpha to alpha2 through the curves alpha ^ T^i alpha2 of the cyclic cover.

    Args:
        alpha, alpha2: isotopic curves
        eps: first push tried for the almost-distance witnesses
    """
    if alpha2.closure not in (alpha.closure, -alpha.closure):
        raise NotIsotopic(f"classes {alpha.closure.as_list()} and {alpha2.closure.as_list()} differ")
    n = d0(alpha, alpha2)
    chart = make_chart(alpha)
    base = StripCurve.from_torus(chart.normal_core)
    if n == 0:
        return QuasiPath([alpha], [base], checks={"endpoints": True}, chart=chart)
    other = chart.normalize(alpha2)
    if other.closure.p < 0:
        other = reverse_curve(other)
    levels = sorted({c.offset[1] for c in contacts(other, chart.normal_core)})
    if levels:
        vertical = -1 - levels[-1]
    else:
        vertical = -1 - strip_level(base, other.vertices[0])
    lifted = StripCurve.from_torus(other, vertical)
    sigmas = [wedge(base, lifted.shifted(i)) for i in range(n + 1)]
    T = [s.shifted(1) for s in sigmas]

    checks = {
        "lift_levels": [l + vertical for l in levels] == list(range(-(n - 1), 0)),
        "endpoints": sigmas[0] == base and sigmas[n] == lifted.shifted(n),
        "disjoint_from_T": all(not meets(s, t) for s, t in zip(sigmas, T)),
        "inclusion": all(covered_by(s, [base, lifted.shifted(i)]) for i, s in enumerate(sigmas)),
    }
    if n == 1:
        checks["sandwich"] = less(sigmas[0], sigmas[1]) and less(sigmas[1], T[0])
    else:
        checks["chain_first"] = (leq(sigmas[0], sigmas[1]) and less(sigmas[1], T[0])
                                 and meets(sigmas[0], sigmas[1]))
        checks["chain_middle"] = all(
            leq(sigmas[i], sigmas[i + 1]) and leq(sigmas[i + 1], T[i])
            and meets(sigmas[i + 1], sigmas[i]) and meets(sigmas[i + 1], T[i])
            for i in range(1, n - 1)
        )
        checks["chain_last"] = (less(sigmas[n - 1], sigmas[n]) and leq(sigmas[n], T[n - 1])
                                and meets(sigmas[n], T[n - 1]))
        checks["bounds"] = all(
            leq(base, sigmas[i]) and less(sigmas[i], base.shifted(i))
            and leq(lifted.shifted(i), sigmas[i]) and less(sigmas[i], lifted.shifted(n))
            for i in range(1, n)
        )

    curves = [alpha] + [chart.denormalize(s.to_torus()) for s in sigmas[1:n]] + [alpha2]
    path = QuasiPath(curves, sigmas, checks=checks, chart=chart)
    if n >= 2:
        witnesses, distances_ok = [], True
        push = Fraction(eps)
        for i in range(1, n):
            torus, used = _witness(
                sigmas[i], [base, lifted.shifted(i)], [base.shifted(i), lifted.shifted(n)], push, attempts
            )
            witness = chart.denormalize(torus)
            witnesses.append(witness)
            distances_ok &= d0(alpha, witness) <= i and d0(witness, alpha2) <= n - i
            push = min(push, used)
        path.witnesses = witnesses
        path.push = push
        checks["witnesses"] = distances_ok
    logger.info("quasi-path of length %d, checks %s", n, "passed" if path.ok else "FAILED")
    return path


def quasi_path(alpha: TorusCurve, alpha2: TorusCurve) -> List[TorusCurve]:
    return build_quasi_path(alpha, alpha2).curves


# ----------------------------------------------------------------------------
# bicorns


@dataclass(frozen=True)
class Bicorn:
    a: Tuple[QPoint, ...]
    b: Tuple[QPoint, ...]
    curve: TorusCurve
    a_start: Fraction
    a_length: Fraction


def _point_at(c: TorusCurve, pos) -> QPoint:
    i = floor(pos)
    return _lerp(c.vertex(i), c.vertex(i + 1), pos - i)


def _sub_path(c: TorusCurve, start, stop) -> List[QPoint]:
    r"""Lift of c between two positions, start < stop."""
    inner = [c.vertex(j) for j in range(floor(start) + 1, ceil(stop))]
    return [_point_at(c, start)] + inner + [_point_at(c, stop)]


def _oriented(curve: TorusCurve) -> TorusCurve:
    h = curve.closure
    if h.p < 0 or (h.p == 0 and h.q < 0):
        return reverse_curve(curve)
    return curve


def _require_transverse(c1: TorusCurve, c2: TorusCurve):
    report = intersection_count(c1, c2)
    if not report.all_transverse:
        raise NonTransverse(f"curves touch at {len(report.touch_points)} point(s); perturb first")
    return report


def enumerate_bicorns(c1: TorusCurve, c2: TorusCurve) -> List[Bicorn]:
    r"""
    Every simple essential curve made of one sub-arc of c1 and one sub-arc of c2.
    """
    _require_transverse(c1, c2)
    points = contacts(c1, c2)
    k1, k2 = len(c1), len(c2)
    pos1 = [Fraction(p.index) + p.param for p in points]
    pos2 = [p.other_position for p in points]
    found = {}
    for i in range(len(points)):
        for j in range(len(points)):
            if i == j:
                continue
            # arc of c1 forward from point i to point j
            s1, e1 = pos1[i], pos1[j] if pos1[j] > pos1[i] else pos1[j] + k1
            inside1 = {m for m in range(len(points))
                       if s1 < pos1[m] < e1 or s1 < pos1[m] + k1 < e1}
            for forward in (True, False):
                # arc of c2 from point j back to point i
                if forward:
                    s2 = pos2[j]
                    e2 = pos2[i] if pos2[i] > pos2[j] else pos2[i] + k2
                else:
                    s2 = pos2[i]
                    e2 = pos2[j] if pos2[j] > pos2[i] else pos2[j] + k2
                inside2 = {m for m in range(len(points))
                           if s2 < pos2[m] < e2 or s2 < pos2[m] + k2 < e2}
                if inside1 & inside2:
                    continue
                arc_a = _sub_path(c1, s1, e1)
                arc_b = _sub_path(c2, s2, e2)
                if not forward:
                    arc_b.reverse()
                shift = psub(arc_a[-1], arc_b[0])
                arc_b = [padd(p, shift) for p in arc_b]
                closure = psub(arc_b[-1], arc_a[0])
                if closure.x.denominator != 1 or closure.y.denominator != 1:
                    continue
                if closure.x == 0 and closure.y == 0:
                    continue
                try:
                    curve = validate_curve(arc_a + arc_b[1:], (int(closure.x), int(closure.y)))
                except DomainError as err:
                    logger.debug("discarding bicorn candidate: %s", err)
                    continue
                curve = _oriented(curve)
                if curve not in found:
                    found[curve] = Bicorn(tuple(arc_a), tuple(arc_b), curve, s1 % k1, e1 - s1)
    bicorns = sorted(found.values(), key=lambda b: (-b.a_length, b.a_start))
    logger.debug("%d bicorns from %d intersection points", len(bicorns), len(points))
    return bicorns


def _contains(outer: Bicorn, inner: Bicorn, period) -> bool:
    return (inner.a_start - outer.a_start) % period + inner.a_length <= outer.a_length


def bicorn_path(c1: TorusCurve, c2: TorusCurve) -> List[TorusCurve]:
    r"""
    Path c1, b_1, ..., b_m, c2 through bicorns whose c1-arcs strictly decrease.
    """
    report = _require_transverse(c1, c2)
    if report.count <= 1:
        return [c1, c2]
    bicorns = enumerate_bicorns(c1, c2)
    if not bicorns:
        raise NoPath(f"curves meet {report.count} times but define no bicorn")
    path = [c1]
    k1 = len(c1)
    current = None
    while True:
        options = [b for b in bicorns
                   if current is None or (b.a_length < current.a_length and _contains(current, b, k1))]
        if not options:
            break
        current = options[0]
        path.append(current.curve)
    path.append(c2)
    return path


def path_intersections(path: List[TorusCurve]) -> List[Optional[int]]:
    r"""Intersection counts of consecutive members; None where they share a segment."""
    counts = []
    for a, b in zip(path, path[1:]):
        if same_support(a, b):
            counts.append(None)
            continue
        try:
            counts.append(intersection_count(a, b).count)
        except OverlappingSegments:
            counts.append(None)
    return counts


# ----------------------------------------------------------------------------
# transversality


def _rotated_period(c: TorusCurve, pos) -> List[QPoint]:
    r"""The period of c starting at position pos, without the closing vertex."""
    start = _point_at(c, pos)
    return [start] + [c.vertex(j) for j in range(floor(pos) + 1, ceil(pos + len(c)))]


def _unstick(c1: TorusCurve, c2: TorusCurve, touch, delta) -> Optional[TorusCurve]:
    period = _rotated_period(c2, touch.index + touch.param)
    z = period[0]
    after, before = period[1] if len(period) > 1 else padd(z, c2.shift), psub(period[-1], c2.shift)
    d_f, d_b = psub(after, z), psub(before, z)
    u_f, u_b = pscale(d_f, 1 / sup_norm(d_f)), pscale(d_b, 1 / sup_norm(d_b))
    step_f = min(delta, sup_norm(d_f) / 2)
    step_b = min(delta, sup_norm(d_b) / 2)
    zf = padd(z, pscale(u_f, step_f))
    zb = padd(z, pscale(u_b, step_b))
    bis = padd(u_f, u_b)
    normal = QPoint(-u_f.y, u_f.x)
    directions = [d for d in (bis, pscale(bis, -1), normal, pscale(normal, -1)) if d != (0, 0)]
    before_points = {p for p in intersection_count(c1, c2).points}
    for d in directions:
        m = padd(z, pscale(d, delta))
        raw = [m, zf] + period[1:] + [padd(zb, c2.shift)]
        try:
            candidate = validate_curve(raw, c2.closure)
            report = intersection_count(c1, candidate)
        except (SelfIntersecting, OverlappingSegments):
            continue
        if set(report.points) == before_points - {touch.reduced}:
            return candidate
    return None


@dataclass(frozen=True)
class _Touch:
    index: int
    param: Fraction
    reduced: QPoint


def perturb_transverse(c1: TorusCurve, c2: TorusCurve, budget) -> TorusCurve:
    r"""
    Moves c2 by less than `budget` in sup distance so that it crosses c1 transversely.
    Unstable contacts (c2 staying on one side of c1) are pushed off; crossings are kept.
    """
    budget = Fraction(budget)
    if budget <= 0:
        raise BudgetTooSmall("budget must be positive")
    current = c2
    while True:
        touches = [c for c in contacts(current, c1) if not c.transverse]
        if not touches:
            return current
        touch = touches[0]
        target = _Touch(touch.index, touch.param, reduce_point(touch.point))
        delta = budget / 4
        moved = None
        for _ in range(24):
            moved = _unstick(c1, current, target, delta)
            if moved is not None:
                break
            delta /= 2
        if moved is None:
            raise BudgetTooSmall(f"cannot remove the contact at {target.reduced} within the budget")
        logger.debug("removed contact at %s with push %s", target.reduced, delta)
        current = moved
