from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import floor, ceil, gcd
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

from .errors import NotClosed, SelfIntersecting, Inessential, OverlappingSegments
from .utils import get_logger


logger = get_logger(__name__)


class QPoint(NamedTuple):
    x: Fraction
    y: Fraction


def qp(x, y) -> QPoint:
    return QPoint(Fraction(x), Fraction(y))


ORIGIN = QPoint(Fraction(0), Fraction(0))


def padd(a, b) -> QPoint:
    return QPoint(a[0] + b[0], a[1] + b[1])


def psub(a, b) -> QPoint:
    return QPoint(a[0] - b[0], a[1] - b[1])


def pscale(a, s) -> QPoint:
    return QPoint(a[0] * s, a[1] * s)


def cross(u, v):
    return u[0] * v[1] - u[1] * v[0]


def dot(u, v):
    return u[0] * v[0] + u[1] * v[1]


def sup_norm(u):
    return max(abs(u[0]), abs(u[1]))


def reduce_point(p) -> QPoint:
    return QPoint(p[0] - floor(p[0]), p[1] - floor(p[1]))


def same_direction(u, v) -> bool:
    return cross(u, v) == 0 and dot(u, v) > 0


def pseudo_angle(d) -> Fraction:
    r"""
    Diamond angle in [0, 4): exact and monotone in the true angle of d.
    """
    dx, dy = Fraction(d[0]), Fraction(d[1])
    if dy >= 0:
        if dx >= 0:
            return dy / (dx + dy)
        return 1 - dx / (-dx + dy)
    if dx < 0:
        return 2 - dy / (-dx - dy)
    return 3 + dx / (dx - dy)


def ccw_offset(base, d) -> Fraction:
    r"""
    Counterclockwise pseudo-angle from direction base to direction d, in [0, 4).
    """
    return (pseudo_angle(d) - pseudo_angle(base)) % 4


def point_on_segment(p, a, b) -> bool:
    if cross(psub(b, a), psub(p, a)) != 0:
        return False
    return (min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= p[1] <= max(a[1], b[1]))


def segment_param(p, a, b) -> Fraction:
    d = psub(b, a)
    return dot(psub(p, a), d) / dot(d, d)


def segment_intersection(a0, a1, b0, b1):
    r"""
    Exact intersection of closed segments.
    Returns None, ("point", P) or ("overlap", (P, Q)) with P != Q.
    """
    da = psub(a1, a0)
    db = psub(b1, b0)
    denom = cross(da, db)
    diff = psub(b0, a0)
    if denom != 0:
        t = cross(diff, db) / denom
        s = cross(diff, da) / denom
        if 0 <= t <= 1 and 0 <= s <= 1:
            return ("point", padd(a0, pscale(da, t)))
        return None
    if cross(diff, da) != 0:
        return None
    # collinear: project on da
    length = dot(da, da)
    t0 = dot(psub(b0, a0), da) / length
    t1 = dot(psub(b1, a0), da) / length
    lo, hi = max(Fraction(0), min(t0, t1)), min(Fraction(1), max(t0, t1))
    if lo > hi:
        return None
    if lo == hi:
        return ("point", padd(a0, pscale(da, lo)))
    return ("overlap", (padd(a0, pscale(da, lo)), padd(a0, pscale(da, hi))))


def segment_meets_box(a, b, box) -> bool:
    r"""
    Liang-Barsky clipping of a closed segment against a closed rectangle (x0, y0, x1, y1).
    """
    x0, y0, x1, y1 = box
    t_lo, t_hi = Fraction(0), Fraction(1)
    d = psub(b, a)
    for p, q in ((-d[0], a[0] - x0), (d[0], x1 - a[0]), (-d[1], a[1] - y0), (d[1], y1 - a[1])):
        if p == 0:
            if q < 0:
                return False
            continue
        r = Fraction(q) / p
        if p < 0:
            t_lo = max(t_lo, r)
        else:
            t_hi = min(t_hi, r)
        if t_lo > t_hi:
            return False
    return True


@dataclass(frozen=True)
class HomologyClass:
    p: int
    q: int

    def as_point(self) -> QPoint:
        return qp(self.p, self.q)

    def is_primitive(self) -> bool:
        return (self.p, self.q) != (0, 0) and gcd(abs(self.p), abs(self.q)) == 1

    def __neg__(self):
        return HomologyClass(-self.p, -self.q)

    def as_list(self):
        return [self.p, self.q]


@dataclass(frozen=True)
class TorusCurve:
    r"""
    A closed PL curve on the torus stored as one period of its lift.
    `vertices` holds v_0 ... v_{k-1}; the lift continues with v_0 + closure.
    """
    vertices: Tuple[QPoint, ...]
    closure: HomologyClass

    def __len__(self):
        return len(self.vertices)

    @property
    def shift(self) -> QPoint:
        return self.closure.as_point()

    @property
    def lift_vertices(self) -> Tuple[QPoint, ...]:
        return self.vertices + (padd(self.vertices[0], self.shift),)

    def vertex(self, i: int) -> QPoint:
        n, r = divmod(i, len(self.vertices))
        return padd(self.vertices[r], pscale(self.shift, n))

    def segments(self) -> List[Tuple[QPoint, QPoint]]:
        lv = self.lift_vertices
        return [(lv[i], lv[i + 1]) for i in range(len(self.vertices))]

    def bbox(self):
        lv = self.lift_vertices
        xs = [v.x for v in lv]
        ys = [v.y for v in lv]
        return min(xs), min(ys), max(xs), max(ys)

    def lift_path(self, start: int, stop: int) -> List[QPoint]:
        r"""Vertices of the lift from index start to index stop inclusive."""
        return [self.vertex(i) for i in range(start, stop + 1)]


@dataclass(frozen=True)
class IntersectionReport:
    count: int
    all_transverse: bool
    touch_points: Tuple[QPoint, ...] = ()
    touch_sides: Tuple[str, ...] = ()
    points: Tuple[QPoint, ...] = ()


@dataclass(frozen=True)
class Contact:
    r"""
    A point where c2 meets c1, seen on the period lift of c1.
    `offset` is the integer translate of the lift of c2 passing through `point`.
    """
    point: QPoint
    index: int
    param: Fraction
    offset: Tuple[int, int]
    transverse: bool
    side: Optional[str] = None
    other_point: Optional[QPoint] = None
    other_position: Optional[Fraction] = None


def _as_class(closure) -> HomologyClass:
    if isinstance(closure, HomologyClass):
        return closure
    p, q = closure
    return HomologyClass(int(p), int(q))


def merge_collinear(vertices: List[QPoint], shift: QPoint) -> List[QPoint]:
    r"""
    Drops vertices interior to a straight stretch of the cyclic lift; a reversal raises SelfIntersecting.
    """
    vertices = list(vertices)
    while len(vertices) > 1:
        k = len(vertices)
        keep = []
        for i in range(k):
            prev = vertices[i - 1] if i > 0 else psub(vertices[-1], shift)
            nxt = vertices[i + 1] if i + 1 < k else padd(vertices[0], shift)
            u = psub(vertices[i], prev)
            v = psub(nxt, vertices[i])
            if cross(u, v) != 0:
                keep.append(vertices[i])
            elif dot(u, v) < 0:
                raise SelfIntersecting(f"curve backtracks at vertex {_fmt(vertices[i])}")
        if len(keep) == k:
            break
        vertices = keep or vertices[:1]
        if not keep:
            break
    return vertices


def _straight_base(v: QPoint, h: HomologyClass) -> QPoint:
    # a straight curve is the same set from any of its points; pin it to the x = 0 crossing
    if h.p == 0:
        return QPoint(v.x - floor(v.x), Fraction(0))
    period = Fraction(1, abs(h.p))
    y = v.y - v.x * Fraction(h.q, h.p)
    return QPoint(Fraction(0), y - floor(y / period) * period)


def _canonical_start(vertices: List[QPoint], shift: QPoint) -> List[QPoint]:
    keys = [reduce_point(v) for v in vertices]
    start = min(range(len(vertices)), key=lambda i: (keys[i].x, keys[i].y))
    rotated = vertices[start:] + [padd(v, shift) for v in vertices[:start]]
    base = QPoint(Fraction(floor(rotated[0].x)), Fraction(floor(rotated[0].y)))
    return [psub(v, base) for v in rotated]


def validate_curve(raw: Sequence, closure, check_simple: bool = True) -> TorusCurve:
    r"""
    Builds a canonical TorusCurve from raw lift vertices.

    Args:
        raw: lift vertices, optionally ending with the closing vertex v_0 + closure
        closure: homology class of the curve
        check_simple: run the self-intersection sweep; images of a simple curve under a
                      homeomorphism of the torus may skip it
    """
    h = _as_class(closure)
    if not h.is_primitive():
        raise Inessential(f"closure {h.as_list()} is not a primitive class")
    if len(raw) < 1:
        raise NotClosed("a curve needs at least one vertex")
    shift = h.as_point()
    points = [qp(v[0], v[1]) for v in raw]
    if len(points) >= 2:
        gap = psub(points[-1], points[0])
        if gap == shift:
            points = points[:-1]
        elif gap.x.denominator == 1 and gap.y.denominator == 1 and gap != ORIGIN:
            raise NotClosed(f"last vertex differs from the first by {gap}, closure is {h.as_list()}")
    # drop repeated vertices, including the wrap-around
    deduped = []
    for p in points:
        if not deduped or deduped[-1] != p:
            deduped.append(p)
    while len(deduped) > 1 and padd(deduped[0], shift) == deduped[-1]:
        deduped.pop()
    vertices = merge_collinear(deduped, shift)
    if len(vertices) == 1:
        vertices = [_straight_base(vertices[0], h)]
    vertices = _canonical_start(vertices, shift)
    curve = TorusCurve(tuple(vertices), h)
    if check_simple:
        _check_simple(curve)
    return curve


def homology_class(c: TorusCurve) -> HomologyClass:
    return c.closure


def straight_curve(p: int, q: int, base=(0, 0)) -> TorusCurve:
    return validate_curve([base], (p, q))


def translate_curve(c: TorusCurve, vector) -> TorusCurve:
    v = qp(vector[0], vector[1])
    return validate_curve([padd(p, v) for p in c.vertices], c.closure, check_simple=False)


def reverse_curve(c: TorusCurve) -> TorusCurve:
    lv = list(c.lift_vertices)
    return validate_curve(lv[::-1], -c.closure, check_simple=False)


def apply_matrix(c: TorusCurve, matrix) -> TorusCurve:
    r"""Image of c under an integer matrix of determinant +-1 acting on the plane."""
    (a, b), (cc, d) = matrix
    if a * d - b * cc not in (1, -1):
        raise Inessential("matrix must be invertible over the integers")
    image = [QPoint(a * v.x + b * v.y, cc * v.x + d * v.y) for v in c.vertices]
    h = c.closure
    return validate_curve(image, (a * h.p + b * h.q, cc * h.p + d * h.q), check_simple=False)


def same_support(c1: TorusCurve, c2: TorusCurve) -> bool:
    r"""True when c1 and c2 are the same subset of the torus, orientation ignored."""
    if c1.closure != c2.closure and c1.closure != -c2.closure:
        return False
    other = c2 if c2.closure == c1.closure else reverse_curve(c2)
    return other == c1


def _fmt(p) -> str:
    return f"({p[0]}, {p[1]})"


# ----------------------------------------------------------------------------
# intersection engine: unit pieces reduced into [0,1]^2 and a bucket grid


@dataclass(frozen=True)
class _Piece:
    seg: int
    a: QPoint
    b: QPoint
    offset: Tuple[int, int]


_NEIGHBOURS = tuple((dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1))


def _cut_params(a, b) -> List[Fraction]:
    ts = {Fraction(0), Fraction(1)}
    for axis in (0, 1):
        lo, hi = sorted((a[axis], b[axis]))
        if lo == hi:
            continue
        for m in range(floor(lo) + 1, ceil(hi)):
            ts.add((m - a[axis]) / (b[axis] - a[axis]))
    return sorted(ts)


@lru_cache(maxsize=64)
def unit_pieces(c: TorusCurve) -> Tuple[_Piece, ...]:
    pieces = []
    for i, (a, b) in enumerate(c.segments()):
        d = psub(b, a)
        ts = _cut_params(a, b)
        for t0, t1 in zip(ts, ts[1:]):
            p0 = padd(a, pscale(d, t0))
            p1 = padd(a, pscale(d, t1))
            off = (floor((p0.x + p1.x) / 2), floor((p0.y + p1.y) / 2))
            base = qp(*off)
            pieces.append(_Piece(i, psub(p0, base), psub(p1, base), off))
    return tuple(pieces)


def _bbox(a, b):
    return min(a.x, b.x), min(a.y, b.y), max(a.x, b.x), max(a.y, b.y)


class _PieceGrid:
    r"""
    Buckets of the unit square; a segment is filed under every cell its closure touches.
    """

    def __init__(self, pieces: Sequence[_Piece], size: int):
        self.size = size
        self.cells: Dict[Tuple[int, int], list] = defaultdict(list)
        for idx, piece in enumerate(pieces):
            for z in _NEIGHBOURS:
                a, b = padd(piece.a, z), padd(piece.b, z)
                box = _bbox(a, b)
                if box[2] < 0 or box[3] < 0 or box[0] > 1 or box[1] > 1:
                    continue
                for cell in self._cells(a, b):
                    self.cells[cell].append((idx, z))

    def _clamp(self, v):
        return min(max(floor(v * self.size), 0), self.size - 1)

    def _cells(self, a, b):
        if a.x > b.x:
            a, b = b, a
        lo_col, hi_col = self._clamp(a.x), self._clamp(b.x)
        for ix in range(lo_col, hi_col + 1):
            if a.x == b.x:
                ys = (a.y, b.y)
            else:
                xl = max(a.x, Fraction(ix, self.size))
                xr = min(b.x, Fraction(ix + 1, self.size))
                slope = (b.y - a.y) / (b.x - a.x)
                ys = (a.y + slope * (xl - a.x), a.y + slope * (xr - a.x))
            for iy in range(self._clamp(min(ys)), self._clamp(max(ys)) + 1):
                yield ix, iy

    def candidates(self, a, b):
        seen = set()
        for cell in self._cells(a, b):
            for item in self.cells.get(cell, ()):
                if item not in seen:
                    seen.add(item)
                    yield item


@dataclass(frozen=True)
class _Hit:
    i: int
    j: int
    w: Tuple[int, int]
    point: QPoint
    overlap: Optional[Tuple[QPoint, QPoint]] = None


def _grid_size(n: int) -> int:
    size = 1
    while size * size < n:
        size *= 2
    return min(size, 256)


@lru_cache(maxsize=32)
def _piece_index(c: TorusCurve) -> Tuple[Tuple[_Piece, ...], _PieceGrid]:
    pieces = unit_pieces(c)
    return pieces, _PieceGrid(pieces, _grid_size(len(pieces)))


def _hits(c1: TorusCurve, c2: TorusCurve) -> List[_Hit]:
    r"""
    All meetings of the period lift of c1 with integer translates of the lift of c2.
    Points are reported in the coordinates of the lift of c1.
    """
    pa = unit_pieces(c1)
    pb, grid = _piece_index(c2)
    hits = set()
    for A in pa:
        oa = qp(*A.offset)
        for idx, z in grid.candidates(A.a, A.b):
            B = pb[idx]
            res = segment_intersection(A.a, A.b, padd(B.a, z), padd(B.b, z))
            if res is None:
                continue
            w = (A.offset[0] + z[0] - B.offset[0], A.offset[1] + z[1] - B.offset[1])
            if res[0] == "point":
                hits.add(_Hit(A.seg, B.seg, w, padd(res[1], oa)))
            else:
                p, q = res[1]
                hits.add(_Hit(A.seg, B.seg, w, padd(p, oa), (padd(p, oa), padd(q, oa))))
    return sorted(hits, key=lambda h: (h.i, h.point, h.j, h.w))


def _adjacent(c: TorusCurve, i: int, j: int, w) -> bool:
    k = len(c)
    h = (c.closure.p, c.closure.q)
    if j == (i + 1) % k:
        if w == ((h[0], h[1]) if i + 1 == k else (0, 0)):
            return True
    if i == (j + 1) % k:
        if w == ((-h[0], -h[1]) if j + 1 == k else (0, 0)):
            return True
    return False


def _check_simple(c: TorusCurve):
    segs = c.segments()
    for hit in _hits(c, c):
        if hit.i == hit.j and hit.w == (0, 0):
            continue
        if hit.overlap is None and _adjacent(c, hit.i, hit.j, hit.w):
            a, b = segs[hit.i]
            if hit.point in (a, b):
                continue
        raise SelfIntersecting(f"curve meets itself at {_fmt(reduce_point(hit.point))}")


def _germ(c: TorusCurve, i: int, p: QPoint):
    r"""
    Backward and forward directions of c at p, where p lies on lift segment i.
    """
    a, b = c.vertex(i), c.vertex(i + 1)
    if p == a:
        return psub(c.vertex(i - 1), a), psub(b, a)
    if p == b:
        return psub(a, b), psub(c.vertex(i + 2), b)
    return psub(a, b), psub(b, a)


def _on_right(back, fwd, d) -> bool:
    r"""
    True when direction d points into the side of positive determinant with the forward tangent.
    """
    return 0 < ccw_offset(fwd, d) < ccw_offset(fwd, back)


def classify_germs(germ1, germ2):
    r"""
    Returns (transverse, side) for the local pictures of two curves at a common point.
    side is the side of the first curve on which the second stays ("right"/"left") for touches.
    """
    back1, fwd1 = germ1
    for d in germ2:
        if same_direction(d, back1) or same_direction(d, fwd1):
            raise OverlappingSegments("curves share a segment of positive length")
    r_back = _on_right(back1, fwd1, germ2[0])
    r_fwd = _on_right(back1, fwd1, germ2[1])
    if r_back != r_fwd:
        return True, None
    return False, "right" if r_back else "left"


def departs_left(c: TorusCurve, position: Fraction, p: QPoint, d) -> bool:
    r"""
    True when direction d, leaving the point p at lift position `position` of c, points into
    the side of positive determinant with the forward tangent of c.
    """
    back, fwd = _germ(c, floor(position), p)
    return _on_right(back, fwd, d)


def contacts(c1: TorusCurve, c2: TorusCurve) -> List[Contact]:
    r"""
    Contact points of c2 with c1 along one period of the lift of c1, in curve order.
    """
    segs = c1.segments()
    k = len(c1)
    shift = c1.closure
    found: Dict[Tuple[int, Fraction], Contact] = {}
    for hit in _hits(c1, c2):
        if hit.overlap is not None:
            raise OverlappingSegments(
                f"curves share the segment {_fmt(hit.overlap[0])}-{_fmt(hit.overlap[1])}")
        i, p, w = hit.i, hit.point, hit.w
        a, b = segs[i]
        t = segment_param(p, a, b)
        if t == 1:
            i, t = i + 1, Fraction(0)
            if i == k:
                i = 0
                p = psub(p, shift.as_point())
                w = (w[0] - shift.p, w[1] - shift.q)
        key = (i, t)
        if key in found:
            continue
        q = psub(p, qp(*w))
        j = hit.j
        t2 = segment_param(q, c2.vertex(j), c2.vertex(j + 1))
        transverse, side = classify_germs(_germ(c1, i, p), _germ(c2, j, q))
        if t2 == 1:
            j, t2 = j + 1, Fraction(0)
            if j == len(c2):
                j = 0
                q = psub(q, c2.shift)
        found[key] = Contact(p, i, t, w, transverse, side, q, j + t2)
    return [found[key] for key in sorted(found)]


def intersection_count(c1: TorusCurve, c2: TorusCurve) -> IntersectionReport:
    r"""
    Exact number of intersection points of c1 and c2 on the torus, with transversality.
    """
    points = {}
    for contact in contacts(c1, c2):
        key = reduce_point(contact.point)
        points.setdefault(key, contact)
    touches = sorted((p, c.side) for p, c in points.items() if not c.transverse)
    report = IntersectionReport(
        count=len(points),
        all_transverse=not touches,
        touch_points=tuple(p for p, _ in touches),
        touch_sides=tuple(s for _, s in touches),
        points=tuple(sorted(points)),
    )
    logger.debug("intersection count %d (transverse=%s)", report.count, report.all_transverse)
    return report


# ----------------------------------------------------------------------------
# translates


@dataclass(frozen=True)
class LiftedPath:
    r"""A finite stretch of the translate c + t * dual, covering everything that meets a box."""
    index: int
    offset: Tuple[int, int]
    vertices: Tuple[QPoint, ...]


def dual_vector(h: HomologyClass) -> Tuple[int, int]:
    r"""
    Lattice vector v with det(h, v) = 1 of minimal sup norm; ties broken by (|v1|, |v2|, v1, v2).
    """
    a, b = h.p, h.q
    # extended Euclid gives one solution of a*y - b*x = 1
    g, s, t = _ext_gcd(a, -b)
    if g < 0:
        g, s, t = -g, -s, -t
    y0, x0 = s, t
    # all solutions: (x0 + n a, y0 + n b); scan near the minimum of the sup norm
    best = None
    norm = max(abs(a), abs(b))
    centre = 0
    if norm:
        centre = -round(Fraction(x0 * a + y0 * b, a * a + b * b))
    for n in range(centre - 3, centre + 4):
        v = (x0 + n * a, y0 + n * b)
        key = (max(abs(v[0]), abs(v[1])), abs(v[0]), abs(v[1]), v[0], v[1])
        if best is None or key < best[0]:
            best = (key, v)
    return best[1]


def _ext_gcd(a, b):
    if b == 0:
        return a, 1, 0
    g, s, t = _ext_gcd(b, a % b)
    return g, t, s - (a // b) * t


def translates_in_box(c: TorusCurve, box) -> List[LiftedPath]:
    r"""
    Every translate of the lift of c meeting the closed box (x0, y0, x1, y1).
    Translates are indexed by det(h, w); the representative offset is index * dual.
    """
    x0, y0, x1, y1 = (Fraction(v) for v in box)
    bx0, by0, bx1, by1 = c.bbox()
    v = dual_vector(c.closure)
    h = c.closure
    k = len(c)
    segs = c.segments()
    meeting: Dict[int, List[int]] = defaultdict(list)
    for wx in range(floor(x0 - bx1), ceil(x1 - bx0) + 1):
        for wy in range(floor(y0 - by1), ceil(y1 - by0) + 1):
            shift = qp(wx, wy)
            hit = [i for i, (a, b) in enumerate(segs)
                   if segment_meets_box(padd(a, shift), padd(b, shift), (x0, y0, x1, y1))]
            if not hit:
                continue
            index = h.p * wy - h.q * wx
            # w = n h + index v
            rest = (wx - index * v[0], wy - index * v[1])
            n = rest[0] // h.p if h.p else rest[1] // h.q
            meeting[index].extend(n * k + i for i in hit)
    paths = []
    for index in sorted(meeting):
        lo, hi = min(meeting[index]), max(meeting[index])
        off = qp(index * v[0], index * v[1])
        verts = tuple(padd(c.vertex(i), off) for i in range(lo, hi + 2))
        paths.append(LiftedPath(index, (index * v[0], index * v[1]), verts))
    return paths
