from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, floor
from typing import Dict, List, Optional, Sequence, Tuple

import regex
import torch

from .curves import (
    QPoint, TorusCurve, qp, padd, psub, pscale, point_on_segment, segment_meets_box, straight_curve, validate_curve,
)
from .annuli import make_chart, project
from .graphs import fine_adjacent, twist
from .dynamics import (
    TENT, SIN2, KnotProfile, Profile, Word, ShearH, ShearV, Translate, Morse, ConePush,
    Compose, Conjugate, Power, apply_to_curve, realize_affine, _line_params, _matmul, _rational_inverse,
)
from .rotation import convex_hull, hausdorff, rotation_set_estimate, unit_grid
from .errors import ConditionFailed, MalformedInput
from .utils import get_logger


logger = get_logger(__name__)

HALF = Fraction(1, 2)
ALPHA = straight_curve(1, 0)
BETA = straight_curve(0, 1)


# ----------------------------------------------------------------------------
# example table


def shear_pair(profile: Profile = TENT) -> Tuple[Word, Word]:
    r"""The horizontal and vertical shears f, g with the given profile."""
    return ShearH(profile), ShearV(profile)


def h_pq(p: int, q: int, profile: Profile = TENT) -> Word:
    r"""h = g^q f^p."""
    f, g = shear_pair(profile)
    return Compose((Power(g, q), Power(f, p)))


def h_pqpq(p: int, q: int, p2: int, q2: int, profile: Profile = TENT) -> Word:
    r"""h = g^q2 f^p2 g^q f^p; its rotation set is [0, p + p2] x [0, q + q2]."""
    f, g = shear_pair(profile)
    return Compose((Power(g, q2), Power(f, p2), Power(g, q), Power(f, p)))


CONJUGATOR = Translate(qp(HALF, HALF))


def square_conjugator(profile: Profile = TENT) -> Word:
    r"""
    S = f^-1 T with T the translation by (1/2, 1/2). T conjugates f to T_(1,0) f^-1 and g to T_(0,1) g^-1,
    so T (g f) T^-1 = T_(1,1) (f g)^-1 and S (g f) S^-1 = T_(1,1) (g f)^-1.
    """
    f, _ = shear_pair(profile)
    return Compose((f.inverse(), CONJUGATOR))

EXAMPLE = regex.compile(r"^h_(\d+)_(\d+)(?:_(\d+)_(\d+))?(_sin2)?$")


def make_examples() -> Dict[str, Word]:
    f, g = shear_pair(TENT)
    fs, gs = shear_pair(SIN2)
    return {
        "f": f,
        "g": g,
        "f_sin2": fs,
        "g_sin2": gs,
        "h": Compose((g, f)),
        "h_sin2": Compose((gs, fs)),
        "T": CONJUGATOR,
        "S": square_conjugator(TENT),
        "triangle": triangle_candidate().word,
    }


def example_word(name: str) -> Word:
    r"""
    Named examples: the table of make_examples, plus h_P_Q and h_P_Q_P2_Q2 with an optional _sin2 suffix.
    """
    table = make_examples()
    if name in table:
        return table[name]
    match = EXAMPLE.match(name)
    if match is None:
        raise MalformedInput(f"unknown example {name!r}; known: {', '.join(sorted(table))}, h_P_Q, h_P_Q_P2_Q2")
    profile = SIN2 if match.group(5) else TENT
    p, q = int(match.group(1)), int(match.group(2))
    if match.group(3) is None:
        return h_pq(p, q, profile)
    return h_pqpq(p, q, int(match.group(3)), int(match.group(4)), profile)


# ----------------------------------------------------------------------------
# parallelograms


@dataclass
class ParallelogramRealization:
    r"""
    `word` realizes the parallelogram; conjugator o word o conjugator^-1 = T_shift o word^-1.
    """
    word: Word
    conjugator: Word
    shift: QPoint
    matrix: Tuple[Tuple[Fraction, Fraction], Tuple[Fraction, Fraction]]
    vector: QPoint
    power: int

    def check_conjugacy(self, points: Sequence) -> bool:
        inverse = self.word.inverse()
        back = self.conjugator.inverse()
        for p in points:
            lhs = self.conjugator(self.word(back(p)))
            rhs = padd(inverse(p), self.shift)
            if lhs != rhs:
                logger.warning("conjugacy fails at %s: %s != %s", p, lhs, rhs)
                return False
        return True


def parallelogram_realization(vertices: Sequence, profile: Profile = TENT) -> ParallelogramRealization:
    r"""
    A word whose rotation set is the rational parallelogram with the given vertices, in cyclic order.
    """
    if len(vertices) != 4:
        raise MalformedInput(f"a parallelogram has four vertices, got {len(vertices)}")
    p0, p1, p2, p3 = (qp(*v) for v in vertices)
    if padd(p0, p2) != padd(p1, p3):
        raise MalformedInput("vertices do not form a parallelogram")
    e1, e2 = psub(p1, p0), psub(p3, p0)
    matrix = ((e1.x, e2.x), (e1.y, e2.y))
    f, g = shear_pair(profile)
    realization = realize_affine(Compose((g, f)), matrix, p0)
    inv = _rational_inverse(realization.conjugator)
    n = realization.power
    # C^-1 S C commutes with T_p0 since C p0 is integral
    conjugator = Conjugate(square_conjugator(profile), realization.conjugator)
    shift = padd(pscale(p0, 2), _matmul(inv, (n, n)))
    return ParallelogramRealization(realization.word, conjugator, shift, matrix, p0, n)


# ----------------------------------------------------------------------------
# triangle


QUARTERS = {
    "H": (Fraction(0), HALF, HALF, Fraction(1)),
    "A": (HALF, HALF, Fraction(1), Fraction(1)),
    "R": (Fraction(0), Fraction(0), HALF, HALF),
    "V": (HALF, Fraction(0), Fraction(1), HALF),
}

# allowed targets of H and V, as (square, translate)
TARGETS = {
    "H": [("A", (-1, 0)), ("H", (0, 0)), ("A", (0, 0)), ("V", (0, 1)), ("H", (1, 0))],
    "V": [("A", (0, -1)), ("V", (0, 0)), ("A", (0, 0)), ("V", (0, 1)), ("H", (1, 0))],
}

TRIANGLE = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]


@dataclass
class TriangleCandidate:
    word: Word
    fixed_h: QPoint
    fixed_v: QPoint


def triangle_candidate() -> TriangleCandidate:
    r"""
    A piecewise-linear map with attractor A, repeller R, H pushed right and V pushed up.
    Built as F o P_V o P_H, where P_H, P_V move one point inside H, V so that it becomes
    a fixed point of the torus map with displacement (1, 0), resp. (0, 1).
    """
    gate = KnotProfile(((0, 1), (HALF, 1), (Fraction(5, 8), 0), (Fraction(7, 8), 0)))
    bump = KnotProfile(((0, 0), (Fraction(9, 16), 0), (Fraction(19, 32), 1), (Fraction(5, 8), 0)))
    squeeze = Morse(Fraction(1, 8))
    g1, g2 = ShearV(gate, Fraction(-1, 16)), ShearH(gate, Fraction(-1, 16))
    b1, b2 = ShearH(bump, HALF), ShearV(bump, HALF)
    z, zv = qp(Fraction(1, 64), Fraction(19, 32)), qp(Fraction(19, 32), Fraction(1, 32))
    push_h = ConePush(QUARTERS["H"], z, qp(Fraction(7, 16), Fraction(17, 32)))
    push_v = ConePush(QUARTERS["V"], zv, qp(Fraction(17, 32), Fraction(7, 16)))
    word = Compose((b2, g2, b1, g1, squeeze, push_v, push_h))
    return TriangleCandidate(word, z, zv)


def _square_path(square) -> List[QPoint]:
    x0, y0, x1, y1 = square
    return [qp(x0, y0), qp(x1, y0), qp(x1, y1), qp(x0, y1)]


def image_boundary(word: Word, square) -> List[QPoint]:
    r"""Exact image of the boundary of a square under a piecewise-linear word."""
    path, _ = word.transport(_square_path(square), qp(0, 0))
    return path


def _strictly_inside(p, box) -> bool:
    x0, y0, x1, y1 = box
    return x0 < p.x < x1 and y0 < p.y < y1


def _in_box(p, box) -> bool:
    x0, y0, x1, y1 = box
    return x0 <= p.x <= x1 and y0 <= p.y <= y1


def _translated(square, t) -> Tuple[Fraction, ...]:
    x0, y0, x1, y1 = square
    return x0 + t[0], y0 + t[1], x1 + t[0], y1 + t[1]


def _inside_polygon(p, polygon) -> bool:
    r"""Even-odd rule, exact; p is assumed off the boundary."""
    inside = False
    k = len(polygon)
    for i in range(k):
        a, b = polygon[i], polygon[(i + 1) % k]
        if (a.y > p.y) != (b.y > p.y):
            x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y)
            if x > p.x:
                inside = not inside
    return inside


def _polyline_in_union(polygon, boxes) -> bool:
    r"""
    Every edge of the closed polygon lies in the union of boxes on the half-integer grid.
    Edges are cut on the lines x, y in Z/2; each piece then lies in one closed cell.
    """
    halves = (Fraction(0), HALF)
    k = len(polygon)
    for i in range(k):
        a, b = polygon[i], polygon[(i + 1) % k]
        params = sorted(set([Fraction(0), Fraction(1)] + _line_params(a.x, b.x, halves) + _line_params(a.y, b.y, halves)))
        for t0, t1 in zip(params, params[1:]):
            mid = padd(a, pscale(psub(b, a), (t0 + t1) / 2))
            if not any(_in_box(mid, box) for box in boxes):
                return False
        if not any(_in_box(a, box) for box in boxes):
            return False
    return True


def _region_meets_box(polygon, box) -> bool:
    k = len(polygon)
    if any(segment_meets_box(polygon[i], polygon[(i + 1) % k], box) for i in range(k)):
        return True
    x0, y0, x1, y1 = box
    return _inside_polygon(qp((x0 + x1) / 2, (y0 + y1) / 2), polygon)


def verify_triangle_conditions(
    word: Word,
    fixed_h: Optional[QPoint] = None,
    fixed_v: Optional[QPoint] = None,
    n: int = 1000,
    grid: int = 64,
    tolerance: float = 0.05,
    threads: int = 0,
) -> Dict[str, object]:
    r"""
    Checks the attractor, repeller and transition conditions of the four quarter squares,
    the fixed points with displacement (1, 0) in H and (0, 1) in V, and compares the rotation
    set estimate with the triangle (0,0), (1,0), (0,1).

    Returns:
        the report, when every condition holds
    Raises:
        ConditionFailed with the failed names and the report otherwise
    """
    report: Dict[str, object] = {}
    conditions: Dict[str, bool] = {}
    exact = word.is_pl

    if exact:
        image_a = image_boundary(word, QUARTERS["A"])
        conditions["attractor"] = all(_strictly_inside(p, QUARTERS["A"]) for p in image_a)
        preimage_r = image_boundary(word.inverse(), QUARTERS["R"])
        conditions["repeller"] = all(_strictly_inside(p, QUARTERS["R"]) for p in preimage_r)
        for name in ("H", "V"):
            image = image_boundary(word, QUARTERS[name])
            boxes = [_translated(QUARTERS[s], t) for s, t in TARGETS[name]]
            conditions[f"transition_{name}_inside"] = _polyline_in_union(image, boxes)
            conditions[f"transition_{name}_meets"] = all(_region_meets_box(image, box) for box in boxes)
    else:
        conditions.update(_numeric_conditions(word, grid))

    for label, point, vector, square in (
        ("fixed_h", fixed_h, (1, 0), "H"),
        ("fixed_v", fixed_v, (0, 1), "V"),
    ):
        if point is None:
            point, residual = _search_fixed_point(word, QUARTERS[square], vector, grid)
            conditions[label] = residual < 1e-9
            report[label] = {"point": [float(point[0]), float(point[1])], "residual": residual}
            continue
        inside = _in_box(qp(*point), QUARTERS[square])
        if exact:
            moved = psub(word(point), qp(*point))
            conditions[label] = inside and moved == qp(*vector)
        else:
            residual = _displacement_residual(word, point, vector)
            conditions[label] = inside and residual < 1e-9
        report[label] = {"point": [str(point[0]), str(point[1])], "vector": list(vector)}

    # the fixed points realize (1, 0) and (0, 1); grid orbits fill the rest
    estimate = rotation_set_estimate(word, [n], grid, threads=threads)
    witnesses = [tuple(float(v) for v in vector) for vector in ((1, 0), (0, 1))
                 if conditions.get("fixed_h" if vector == (1, 0) else "fixed_v")]
    hull = convex_hull(estimate.hull_vertices + witnesses)
    gap = hausdorff(hull, TRIANGLE)
    conditions["rotation_set"] = gap <= tolerance
    report.update({"conditions": conditions, "hull": hull, "hausdorff": gap, "n": n, "grid": grid})
    failed = [name for name, ok in conditions.items() if not ok]
    logger.info("triangle conditions: %s", "all passed" if not failed else ", ".join(failed))
    if failed:
        raise ConditionFailed(failed, report)
    return report


def _displacement_residual(word: Word, point, vector) -> float:
    xy = torch.tensor([[float(point[0]), float(point[1])]], dtype=torch.float64)
    moved = word.numeric(xy) - xy
    target = torch.tensor([[float(vector[0]), float(vector[1])]], dtype=torch.float64)
    return float((moved - target).abs().max())


def _search_fixed_point(word: Word, square, vector, grid: int):
    x0, y0, x1, y1 = (float(v) for v in square)
    xy = unit_grid(grid)
    xy = torch.stack([x0 + (x1 - x0) * xy[:, 0], y0 + (y1 - y0) * xy[:, 1]], dim=1)
    target = torch.tensor([float(vector[0]), float(vector[1])], dtype=torch.float64)
    residual = (word.numeric(xy) - xy - target).abs().max(dim=1).values
    best = int(residual.argmin())
    return (float(xy[best, 0]), float(xy[best, 1])), float(residual[best])


def _numeric_conditions(word: Word, grid: int) -> Dict[str, bool]:
    def sample(square):
        x0, y0, x1, y1 = (float(v) for v in square)
        xy = unit_grid(grid)
        return torch.stack([x0 + (x1 - x0) * xy[:, 0], y0 + (y1 - y0) * xy[:, 1]], dim=1)

    def inside(points, box, strict=True):
        x0, y0, x1, y1 = (float(v) for v in box)
        if strict:
            return (points[:, 0] > x0) & (points[:, 0] < x1) & (points[:, 1] > y0) & (points[:, 1] < y1)
        return (points[:, 0] >= x0) & (points[:, 0] <= x1) & (points[:, 1] >= y0) & (points[:, 1] <= y1)

    found = {
        "attractor": bool(inside(word.numeric(sample(QUARTERS["A"])), QUARTERS["A"]).all()),
        "repeller": bool(inside(word.inverse().numeric(sample(QUARTERS["R"])), QUARTERS["R"]).all()),
    }
    for name in ("H", "V"):
        image = word.numeric(sample(QUARTERS[name]))
        boxes = [_translated(QUARTERS[s], t) for s, t in TARGETS[name]]
        hits = [inside(image, box, strict=False) for box in boxes]
        covered = torch.stack(hits).any(dim=0)
        found[f"transition_{name}_inside"] = bool(covered.all())
        found[f"transition_{name}_meets"] = all(bool(h.any()) for h in hits)
    return found


# ----------------------------------------------------------------------------
# good arcs


@dataclass
class GoodArc:
    r"""
    A sub-arc of a lift starting at the origin; `vertices` ends on the far side of the rectangle.
    """
    found: bool
    direction: int = 0
    vertices: List[QPoint] = field(default_factory=list)


def _locate_origin(c: TorusCurve):
    r"""(segment index, translate) with the origin on that segment of the translated lift."""
    origin = qp(0, 0)
    for i, (a, b) in enumerate(c.segments()):
        for wx in range(int(-max(a.x, b.x)) - 1, int(-min(a.x, b.x)) + 2):
            for wy in range(int(-max(a.y, b.y)) - 1, int(-min(a.y, b.y)) + 2):
                w = qp(wx, wy)
                if point_on_segment(origin, padd(a, w), padd(b, w)):
                    return i, w
    return None


def _walk(c: TorusCurve, direction: int):
    r"""Vertices of the translated lift from the origin onwards, in one direction."""
    located = _locate_origin(c)
    if located is None:
        return
    i, w = located
    origin = qp(0, 0)
    yield origin
    if direction > 0:
        j = i + 1
    else:
        j = i - 1 if padd(c.vertex(i), w) == origin else i
    while True:
        v = padd(c.vertex(j), w)
        if v != origin:
            yield v
        j += direction


def _exit(p, q, x1, y1):
    r"""
    First parameter in [0, 1] where the segment from a point of the open box (0, 0, x1, y1)
    reaches its boundary, with the sides reached; None if q stays inside.
    """
    d = psub(q, p)
    candidates = []
    if d.x < 0:
        candidates.append(((0 - p.x) / d.x, "left"))
    if d.x > 0:
        candidates.append(((x1 - p.x) / d.x, "right"))
    if d.y < 0:
        candidates.append(((0 - p.y) / d.y, "bottom"))
    if d.y > 0:
        candidates.append(((y1 - p.y) / d.y, "top"))
    if not candidates:
        return None
    t = min(c[0] for c in candidates)
    if t > 1:
        return None
    return t, {side for s, side in candidates if s == t}


def find_good_arc(c: TorusCurve, size: int, axis: str = "beta", limit: int = 4096) -> GoodArc:
    r"""
    Looks for a good arc of the given size on the lift of c through the origin.

    A good beta-arc of size k starts at (0, 0), ends on the top side of [0, 1] x [0, k] and is
    otherwise in the interior; good alpha-arcs swap the coordinates.
    """
    if axis not in ("alpha", "beta"):
        raise MalformedInput(f"axis must be alpha or beta, got {axis!r}")
    swap = axis == "alpha"
    goal = "top"
    for direction in (1, -1):
        path, previous = [], None
        for steps, v in enumerate(_walk(c, direction)):
            if steps > limit:
                break
            v = qp(v.y, v.x) if swap else v
            if previous is None:
                previous = v
                path.append(v)
                continue
            d = psub(v, previous)
            if len(path) == 1 and not (d.x > 0 and d.y > 0):
                break
            hit = _exit(previous, v, 1, size)
            if hit is None:
                path.append(v)
                previous = v
                continue
            t, sides = hit
            if goal in sides:
                end = padd(previous, pscale(d, t))
                path.append(end)
                if swap:
                    path = [qp(p.y, p.x) for p in path]
                return GoodArc(True, direction, path)
            break
    return GoodArc(False)


def v_curve_arc(c: TorusCurve, q: int, limit: int = 4096) -> GoodArc:
    r"""
    An arc of the lift through the origin inside [0, 1] x [0, q + 1] that reaches the right side,
    whose initial part is a good beta-arc of size q.
    """
    box = (Fraction(0), Fraction(0), Fraction(1), Fraction(q + 1))
    good = find_good_arc(c, q, "beta", limit)
    if not good.found:
        return GoodArc(False)
    path, previous = [], None
    for steps, v in enumerate(_walk(c, good.direction)):
        if steps > limit:
            break
        if previous is None:
            previous = v
            path.append(v)
            continue
        d = psub(v, previous)
        if d.x > 0 and v.x >= 1:
            t = (1 - previous.x) / d.x
            end = padd(previous, pscale(d, t))
            if not _in_box(end, box):
                break
            path.append(end)
            return GoodArc(True, good.direction, path)
        if not _in_box(v, box):
            break
        path.append(v)
        previous = v
    return GoodArc(False)


# ----------------------------------------------------------------------------
# axis of h_{p,q}


@dataclass
class AxisCertificate:
    p: int
    q: int
    n: int
    path: List[TorusCurve]
    adjacency_ok: bool
    twist_lower_bounds: List[Dict[str, object]]
    explicit_twist: int
    inverse_twist: int
    distinct_ok: Optional[bool]
    conditional: Dict[str, object]

    @property
    def ok(self) -> bool:
        return (self.adjacency_ok and all(t["ok"] for t in self.twist_lower_bounds)
                and self.explicit_twist == self.q + 2 and self.inverse_twist == 2
                and self.distinct_ok is not False)


def axis_certificate(p: int, q: int, n: int, bgit_threshold: int = 0) -> AxisCertificate:
    r"""
    Certificate for the quasi-axis (alpha, beta, h alpha, h beta, ..., h^n alpha) of h = g^q f^p.

    Twists in the annuli of h^k beta and h^k alpha are computed after moving the annulus back
    to beta, resp. alpha, by h^-k.
    """
    if min(p, q, n) < 1:
        raise MalformedInput(f"p, q and n must be positive, got {p}, {q}, {n}")
    h = h_pq(p, q)
    steps = {1: h, -1: h.inverse()}
    orbits = {}

    def iterate(c, k):
        if k == 0:
            return c
        key = (c, k)
        if key not in orbits:
            step = 1 if k > 0 else -1
            orbits[key] = apply_to_curve(steps[step], iterate(c, k - step))
        return orbits[key]

    path = [ALPHA, BETA]
    for k in range(1, n):
        path += [iterate(ALPHA, k), iterate(BETA, k)]
    path.append(iterate(ALPHA, n))
    adjacency_ok = all(fine_adjacent(a, b) for a, b in zip(path, path[1:]))

    alpha_chart, beta_chart = make_chart(ALPHA), make_chart(BETA)
    bounds = []
    for k in range(n):
        value = twist(beta_chart, iterate(ALPHA, -k), iterate(ALPHA, n - k)).value
        bounds.append({"annulus": f"h^{k} beta", "value": value, "bound": q, "ok": value >= q})
    for k in range(1, n):
        value = twist(alpha_chart, iterate(ALPHA, -k), iterate(ALPHA, n - k)).value
        bounds.append({"annulus": f"h^{k} alpha", "value": value, "bound": p, "ok": value >= p})
    explicit = twist(beta_chart, ALPHA, iterate(ALPHA, n)).value
    inverse = twist(beta_chart, ALPHA, iterate(ALPHA, -n)).value

    distinct_ok = None
    if q > 2:
        distinct_ok = True
        missing_alpha = [c for c in path if project(alpha_chart, c).is_empty()]
        for k in range(1, n + 1):
            chart_k = make_chart(iterate(ALPHA, k))
            if any(project(chart_k, c).is_empty() for c in missing_alpha):
                distinct_ok = False

    applies = p > bgit_threshold and q > bgit_threshold
    conditional = {
        "threshold": bgit_threshold,
        "applies": applies,
        "distance_upper": 2 * n,
        "translation_length_upper": 2,
        "distance": 2 * n if applies else None,
        "translation_length": 2 if applies else None,
    }
    certificate = AxisCertificate(p, q, n, path, adjacency_ok, bounds, explicit, inverse, distinct_ok, conditional)
    logger.info("axis certificate for h_{%d,%d}, n=%d: %s", p, q, n, "ok" if certificate.ok else "FAILED")
    return certificate


# ----------------------------------------------------------------------------
# staircases


def staircase_curve(n: int) -> TorusCurve:
    r"""
    A curve isotopic to alpha whose lift meets exactly n lifts of alpha: a tent from height 1/2
    up to n + 1/2.
    """
    if n < 0:
        raise MalformedInput(f"staircase height must be nonnegative, got {n}")
    if n == 0:
        return straight_curve(1, 0, (0, HALF))
    return validate_curve([qp(0, HALF), qp(HALF, n + HALF)], (1, 0))


def lift_scan_width(c: TorusCurve) -> int:
    r"""Lifts of alpha met by one lift of c, read off the height range of one period."""
    _, y0, _, y1 = c.bbox()
    return len(range(ceil(y0), floor(y1) + 1))
