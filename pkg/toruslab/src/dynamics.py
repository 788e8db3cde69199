import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import floor, ceil
from typing import List, Optional, Sequence, Tuple

import torch

from .curves import (
    QPoint, TorusCurve, qp, padd, psub, pscale, segment_intersection, segment_param, validate_curve,
)
from .errors import MalformedInput, NonInvertible, NotPLWord
from .utils import frac_str, get_logger, parse_rational


logger = get_logger(__name__)

DOUBLE_EPS = 2.0 ** -52


# ----------------------------------------------------------------------------
# profiles of the shears


class Profile:
    r"""
    A 1-periodic function R -> R used by the shears.
    """
    is_pl = True

    def exact(self, t) -> Fraction:
        raise NotImplementedError

    def numeric(self, t: torch.Tensor) -> torch.Tensor:
        raise NotImplementedError

    def breaks(self) -> Tuple[Fraction, ...]:
        raise NotImplementedError

    def as_json(self):
        raise NotImplementedError


@dataclass(frozen=True)
class KnotProfile(Profile):
    r"""
    Periodic piecewise-linear profile through the knots (t, value), 0 = t_0 < ... < t_k < 1.
    """
    knots: Tuple[Tuple[Fraction, Fraction], ...]
    label: Optional[str] = None

    def __post_init__(self):
        knots = tuple((Fraction(t), Fraction(v)) for t, v in self.knots)
        if not knots or knots[0][0] != 0:
            raise MalformedInput("profile knots must start at t = 0")
        ts = [t for t, _ in knots]
        if any(a >= b for a, b in zip(ts, ts[1:])) or ts[-1] >= 1:
            raise MalformedInput("profile knots must increase inside [0, 1)")
        object.__setattr__(self, "knots", knots)

    @property
    def closed(self):
        return self.knots + ((Fraction(1), self.knots[0][1]),)

    def exact(self, t) -> Fraction:
        t = Fraction(t)
        s = t - floor(t)
        closed = self.closed
        for (t0, v0), (t1, v1) in zip(closed, closed[1:]):
            if t0 <= s < t1:
                return v0 + (v1 - v0) * (s - t0) / (t1 - t0)
        raise AssertionError("unreachable")

    def numeric(self, t: torch.Tensor) -> torch.Tensor:
        closed = self.closed
        ts = torch.tensor([float(a) for a, _ in closed], dtype=torch.float64)
        vs = torch.tensor([float(b) for _, b in closed], dtype=torch.float64)
        s = t - torch.floor(t)
        idx = torch.bucketize(s, ts[1:], right=True).clamp(max=len(closed) - 2)
        slope = (vs[1:] - vs[:-1]) / (ts[1:] - ts[:-1])
        return vs[idx] + slope[idx] * (s - ts[idx])

    def breaks(self) -> Tuple[Fraction, ...]:
        return tuple(t for t, _ in self.knots)

    def as_json(self):
        if self.label is not None:
            return self.label
        return {"knots": [[frac_str(t), frac_str(v)] for t, v in self.knots]}


class Sin2Profile(Profile):
    r"""
    t -> sin^2(pi t), evaluated in double precision only.
    """
    is_pl = False

    def exact(self, t):
        raise NotPLWord("the sin2 profile has no exact evaluation")

    def numeric(self, t: torch.Tensor) -> torch.Tensor:
        return torch.sin(math.pi * t) ** 2

    def breaks(self):
        raise NotPLWord("the sin2 profile is not piecewise linear")

    def as_json(self):
        return "sin2"

    def __eq__(self, other):
        return isinstance(other, Sin2Profile)

    def __hash__(self):
        return hash("sin2")


TENT = KnotProfile(((0, 0), (Fraction(1, 2), 1)), "tent")
SIN2 = Sin2Profile()


def make_profile(spec) -> Profile:
    if spec == "tent":
        return TENT
    if spec == "sin2":
        return SIN2
    if isinstance(spec, dict) and "knots" in spec:
        return KnotProfile(tuple((parse_rational(t), parse_rational(v)) for t, v in spec["knots"]))
    raise MalformedInput(f"unknown profile {spec!r}")


# ----------------------------------------------------------------------------
# helpers


def _lerp(a, b, t) -> QPoint:
    return padd(a, pscale(psub(b, a), t))


def _line_params(a0, a1, positions) -> List[Fraction]:
    r"""
    Parameters in (0, 1) where the coordinate running from a0 to a1 crosses k + s, s in positions.
    """
    if a0 == a1:
        return []
    lo, hi = min(a0, a1), max(a0, a1)
    found = []
    for k in range(floor(lo) - 1, ceil(hi) + 1):
        for s in positions:
            target = k + s
            if lo < target < hi:
                found.append((target - a0) / (a1 - a0))
    return found


def _subdivide(path: List[QPoint], shift: QPoint, cuts) -> List[QPoint]:
    closed = list(path) + [padd(path[0], shift)]
    out = []
    for a, b in zip(closed, closed[1:]):
        out.append(a)
        for t in sorted(set(cuts(a, b))):
            out.append(_lerp(a, b, t))
    return out


def _matmul(m, p) -> QPoint:
    (a, b), (c, d) = m
    return QPoint(a * p[0] + b * p[1], c * p[0] + d * p[1])


def _det(m):
    (a, b), (c, d) = m
    return a * d - b * c


def _int_matrix(m) -> Tuple[Tuple[int, int], Tuple[int, int]]:
    try:
        (a, b), (c, d) = m
        return (int(a), int(b)), (int(c), int(d))
    except (TypeError, ValueError) as err:
        raise MalformedInput(f"not a 2x2 integer matrix: {m!r}") from err


def _rational_inverse(m):
    (a, b), (c, d) = m
    det = Fraction(_det(m))
    return (d / det, -b / det), (-c / det, a / det)


def _apply_tensor(m, xy: torch.Tensor) -> torch.Tensor:
    mat = torch.tensor([[float(v) for v in row] for row in m], dtype=torch.float64)
    return xy @ mat.T


# ----------------------------------------------------------------------------
# words


class Word:
    r"""
    A lift to the plane of a torus homeomorphism isotopic to the identity (or of an integer
    linear map), commuting with integer translations.
    """
    kind = "word"

    @property
    def is_pl(self) -> bool:
        return True

    @property
    def size(self) -> int:
        r"""Number of generator applications in one evaluation."""
        return 1

    def __call__(self, p) -> QPoint:
        raise NotImplementedError

    def numeric(self, xy: torch.Tensor) -> torch.Tensor:
        raise NotImplementedError

    def inverse(self) -> "Word":
        raise NotImplementedError

    def transport(self, path: List[QPoint], shift: QPoint):
        r"""Image of the periodic polyline (path, shift); segments are cut where the map bends."""
        if not self.is_pl:
            raise NotPLWord(f"{self.kind} is not piecewise linear")
        refined = _subdivide(path, shift, self.cuts)
        return [self(v) for v in refined], shift

    def cuts(self, a, b) -> List[Fraction]:
        return []

    def as_json(self):
        raise NotImplementedError


@dataclass(frozen=True)
class ShearH(Word):
    r"""(x, y) -> (x + amplitude * profile(y), y)"""
    profile: Profile = TENT
    amplitude: Fraction = Fraction(1)
    kind = "shear_h"

    def __post_init__(self):
        object.__setattr__(self, "amplitude", Fraction(self.amplitude))

    @property
    def is_pl(self):
        return self.profile.is_pl

    def __call__(self, p) -> QPoint:
        x, y = Fraction(p[0]), Fraction(p[1])
        return QPoint(x + self.amplitude * self.profile.exact(y), y)

    def numeric(self, xy):
        x, y = xy[:, 0], xy[:, 1]
        return torch.stack([x + float(self.amplitude) * self.profile.numeric(y), y], dim=1)

    def inverse(self):
        return ShearH(self.profile, -self.amplitude)

    def cuts(self, a, b):
        return _line_params(a[1], b[1], self.profile.breaks())

    def as_json(self):
        return {"kind": self.kind, "profile": self.profile.as_json(), "amplitude": frac_str(self.amplitude)}


@dataclass(frozen=True)
class ShearV(Word):
    r"""(x, y) -> (x, y + amplitude * profile(x))"""
    profile: Profile = TENT
    amplitude: Fraction = Fraction(1)
    kind = "shear_v"

    def __post_init__(self):
        object.__setattr__(self, "amplitude", Fraction(self.amplitude))

    @property
    def is_pl(self):
        return self.profile.is_pl

    def __call__(self, p) -> QPoint:
        x, y = Fraction(p[0]), Fraction(p[1])
        return QPoint(x, y + self.amplitude * self.profile.exact(x))

    def numeric(self, xy):
        x, y = xy[:, 0], xy[:, 1]
        return torch.stack([x, y + float(self.amplitude) * self.profile.numeric(x)], dim=1)

    def inverse(self):
        return ShearV(self.profile, -self.amplitude)

    def cuts(self, a, b):
        return _line_params(a[0], b[0], self.profile.breaks())

    def as_json(self):
        return {"kind": self.kind, "profile": self.profile.as_json(), "amplitude": frac_str(self.amplitude)}


@dataclass(frozen=True)
class Translate(Word):
    vector: QPoint = QPoint(Fraction(0), Fraction(0))
    kind = "translate"

    def __post_init__(self):
        object.__setattr__(self, "vector", qp(*self.vector))

    def __call__(self, p) -> QPoint:
        return padd(qp(*p), self.vector)

    def numeric(self, xy):
        v = torch.tensor([float(self.vector[0]), float(self.vector[1])], dtype=torch.float64)
        return xy + v

    def inverse(self):
        return Translate(QPoint(-self.vector[0], -self.vector[1]))

    def as_json(self):
        return {"kind": self.kind, "vector": [frac_str(self.vector[0]), frac_str(self.vector[1])]}


@dataclass(frozen=True)
class Linear(Word):
    r"""An integer matrix of determinant +-1 acting on the plane."""
    matrix: Tuple[Tuple[int, int], Tuple[int, int]] = ((1, 0), (0, 1))
    kind = "linear"

    def __post_init__(self):
        matrix = _int_matrix(self.matrix)
        if _det(matrix) not in (1, -1):
            raise NonInvertible(f"matrix {matrix} has determinant {_det(matrix)}, expected +-1")
        object.__setattr__(self, "matrix", matrix)

    def __call__(self, p) -> QPoint:
        return _matmul(self.matrix, qp(*p))

    def numeric(self, xy):
        return _apply_tensor(self.matrix, xy)

    def inverse(self):
        (a, b), (c, d) = self.matrix
        det = _det(self.matrix)
        return Linear(((d * det, -b * det), (-c * det, a * det)))

    def transport(self, path, shift):
        return [self(v) for v in path], self(shift)

    def as_json(self):
        return {"kind": self.kind, "matrix": [list(row) for row in self.matrix]}


@dataclass(frozen=True)
class Morse(Word):
    r"""
    Product of two copies of the circle map t -> t + c (2 tent(t) - 1): repelling fixed point
    at 1/4 and attracting one at 3/4 in each coordinate. Valid for 0 <= c < 1/4.
    """
    strength: Fraction = Fraction(1, 8)
    inverted: bool = False
    kind = "morse"

    def __post_init__(self):
        c = Fraction(self.strength)
        if not 0 <= c < Fraction(1, 4):
            raise MalformedInput(f"morse strength {c} outside [0, 1/4)")
        object.__setattr__(self, "strength", c)

    def _forward(self, t):
        return t + self.strength * (2 * TENT.exact(t) - 1)

    def _backward(self, s):
        c = self.strength
        n = floor(s + c)
        s = s - n
        if s <= Fraction(1, 2) + c:
            t = (s + c) / (1 + 4 * c)
        else:
            t = (s - 3 * c) / (1 - 4 * c)
        return t + n

    def _circle(self, t):
        return self._backward(t) if self.inverted else self._forward(t)

    def __call__(self, p) -> QPoint:
        return QPoint(self._circle(Fraction(p[0])), self._circle(Fraction(p[1])))

    def _circle_numeric(self, t):
        c = float(self.strength)
        if not self.inverted:
            return t + c * (2 * TENT.numeric(t) - 1)
        n = torch.floor(t + c)
        s = t - n
        low = (s + c) / (1 + 4 * c)
        high = (s - 3 * c) / (1 - 4 * c)
        return torch.where(s <= 0.5 + c, low, high) + n

    def numeric(self, xy):
        return torch.stack([self._circle_numeric(xy[:, 0]), self._circle_numeric(xy[:, 1])], dim=1)

    def inverse(self):
        return Morse(self.strength, not self.inverted)

    def cuts(self, a, b):
        c = self.strength
        positions = (-c, Fraction(1, 2) + c) if self.inverted else (Fraction(0), Fraction(1, 2))
        return _line_params(a[0], b[0], positions) + _line_params(a[1], b[1], positions)

    def as_json(self):
        return {"kind": self.kind, "strength": frac_str(self.strength), "inverted": self.inverted}


@dataclass(frozen=True)
class ConePush(Word):
    r"""
    Moves `source` to `target` inside the closed square (x0, y0, x1, y1) of [0, 1]^2, coning
    each edge of the square from the moved point. Identity outside the square and its translates.
    """
    square: Tuple[Fraction, Fraction, Fraction, Fraction] = (Fraction(0), Fraction(0), Fraction(1), Fraction(1))
    source: QPoint = QPoint(Fraction(1, 2), Fraction(1, 2))
    target: QPoint = QPoint(Fraction(1, 2), Fraction(1, 2))
    kind = "cone_push"

    def __post_init__(self):
        x0, y0, x1, y1 = (Fraction(v) for v in self.square)
        if not (0 <= x0 < x1 <= 1 and 0 <= y0 < y1 <= 1):
            raise MalformedInput(f"cone push square {self.square} must lie in [0, 1]^2")
        source, target = qp(*self.source), qp(*self.target)
        for p in (source, target):
            if not (x0 < p.x < x1 and y0 < p.y < y1):
                raise MalformedInput(f"cone push point {p} must lie inside the square")
        object.__setattr__(self, "square", (x0, y0, x1, y1))
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)

    @property
    def corners(self) -> List[QPoint]:
        x0, y0, x1, y1 = self.square
        return [qp(x0, y0), qp(x1, y0), qp(x1, y1), qp(x0, y1)]

    def _inside(self, p) -> bool:
        x0, y0, x1, y1 = self.square
        return x0 <= p.x <= x1 and y0 <= p.y <= y1

    def __call__(self, p) -> QPoint:
        p = qp(*p)
        n = QPoint(Fraction(floor(p.x)), Fraction(floor(p.y)))
        local = psub(p, n)
        if not self._inside(local):
            return p
        corners = self.corners
        z, w = self.source, self.target
        for i in range(4):
            a, b = corners[i], corners[(i + 1) % 4]
            weights = _barycentric(local, z, a, b)
            if weights is not None:
                lz, la, lb = weights
                image = padd(padd(pscale(w, lz), pscale(a, la)), pscale(b, lb))
                return padd(image, n)
        raise AssertionError("point of the square outside every cone triangle")

    def numeric(self, xy):
        n = torch.floor(xy)
        local = xy - n
        x0, y0, x1, y1 = (float(v) for v in self.square)
        inside = (local[:, 0] >= x0) & (local[:, 0] <= x1) & (local[:, 1] >= y0) & (local[:, 1] <= y1)
        out = local.clone()
        z = torch.tensor([float(self.source.x), float(self.source.y)], dtype=torch.float64)
        w = torch.tensor([float(self.target.x), float(self.target.y)], dtype=torch.float64)
        done = ~inside
        corners = [torch.tensor([float(c.x), float(c.y)], dtype=torch.float64) for c in self.corners]
        for i in range(4):
            a, b = corners[i], corners[(i + 1) % 4]
            det = (a[0] - z[0]) * (b[1] - z[1]) - (a[1] - z[1]) * (b[0] - z[0])
            rel = local - z
            la = (rel[:, 0] * (b[1] - z[1]) - rel[:, 1] * (b[0] - z[0])) / det
            lb = ((a[0] - z[0]) * rel[:, 1] - (a[1] - z[1]) * rel[:, 0]) / det
            lz = 1 - la - lb
            hit = (~done) & (la >= -1e-12) & (lb >= -1e-12) & (lz >= -1e-12)
            image = lz[:, None] * w + la[:, None] * a + lb[:, None] * b
            out = torch.where(hit[:, None], image, out)
            done = done | hit
        return out + n

    def inverse(self):
        return ConePush(self.square, self.target, self.source)

    def cuts(self, a, b):
        lo_x, hi_x = min(a.x, b.x), max(a.x, b.x)
        lo_y, hi_y = min(a.y, b.y), max(a.y, b.y)
        corners = self.corners
        pieces = [(corners[i], corners[(i + 1) % 4]) for i in range(4)]
        pieces += [(self.source, c) for c in corners]
        found = []
        for nx in range(floor(lo_x) - 1, floor(hi_x) + 1):
            for ny in range(floor(lo_y) - 1, floor(hi_y) + 1):
                n = qp(nx, ny)
                for s0, s1 in pieces:
                    hit = segment_intersection(a, b, padd(s0, n), padd(s1, n))
                    if hit is None:
                        continue
                    points = hit[1] if hit[0] == "overlap" else (hit[1],)
                    found.extend(segment_param(p, a, b) for p in points)
        return [t for t in found if 0 < t < 1]

    def as_json(self):
        return {
            "kind": self.kind,
            "square": [frac_str(v) for v in self.square],
            "source": [frac_str(v) for v in self.source],
            "target": [frac_str(v) for v in self.target],
        }


def _barycentric(p, z, a, b):
    r"""Weights of p on the triangle (z, a, b), or None if p lies outside."""
    det = (a.x - z.x) * (b.y - z.y) - (a.y - z.y) * (b.x - z.x)
    rel = psub(p, z)
    la = (rel.x * (b.y - z.y) - rel.y * (b.x - z.x)) / det
    lb = ((a.x - z.x) * rel.y - (a.y - z.y) * rel.x) / det
    lz = 1 - la - lb
    if la < 0 or lb < 0 or lz < 0:
        return None
    return lz, la, lb


# ----------------------------------------------------------------------------
# combinators


@dataclass(frozen=True)
class Compose(Word):
    r"""
    words[0] o words[1] o ... : the last word is applied first.
    """
    words: Tuple[Word, ...] = ()
    kind = "compose"

    @property
    def is_pl(self):
        return all(w.is_pl for w in self.words)

    @property
    def size(self):
        return sum(w.size for w in self.words)

    def __call__(self, p) -> QPoint:
        p = qp(*p)
        for w in reversed(self.words):
            p = w(p)
        return p

    def numeric(self, xy):
        for w in reversed(self.words):
            xy = w.numeric(xy)
        return xy

    def inverse(self):
        return Compose(tuple(w.inverse() for w in reversed(self.words)))

    def transport(self, path, shift):
        for w in reversed(self.words):
            path, shift = w.transport(path, shift)
        return path, shift

    def as_json(self):
        return {"kind": self.kind, "words": [w.as_json() for w in self.words]}


@dataclass(frozen=True)
class Power(Word):
    word: Word = field(default_factory=Compose)
    exponent: int = 1
    kind = "power"

    @property
    def is_pl(self):
        return self.word.is_pl

    @property
    def size(self):
        return abs(self.exponent) * self.word.size

    @property
    def step(self) -> Word:
        return self.word if self.exponent >= 0 else self.word.inverse()

    def __call__(self, p) -> QPoint:
        p, step = qp(*p), self.step
        for _ in range(abs(self.exponent)):
            p = step(p)
        return p

    def numeric(self, xy):
        step = self.step
        for _ in range(abs(self.exponent)):
            xy = step.numeric(xy)
        return xy

    def inverse(self):
        return Power(self.word, -self.exponent)

    def transport(self, path, shift):
        step = self.step
        for _ in range(abs(self.exponent)):
            path, shift = step.transport(path, shift)
        return path, shift

    def as_json(self):
        return {"kind": self.kind, "word": self.word.as_json(), "exponent": self.exponent}


@dataclass(frozen=True)
class Inverse(Word):
    word: Word = field(default_factory=Compose)
    kind = "inverse"

    @property
    def body(self) -> Word:
        return self.word.inverse()

    @property
    def is_pl(self):
        return self.word.is_pl

    @property
    def size(self):
        return self.word.size

    def __call__(self, p):
        return self.body(p)

    def numeric(self, xy):
        return self.body.numeric(xy)

    def inverse(self):
        return self.word

    def transport(self, path, shift):
        return self.body.transport(path, shift)

    def as_json(self):
        return {"kind": self.kind, "word": self.word.as_json()}


@dataclass(frozen=True)
class Conjugate(Word):
    r"""
    x -> C^-1 word(C x) for an integer matrix C with nonzero determinant.
    Its rotation set is C^-1 times the rotation set of `word`.
    """
    word: Word = field(default_factory=Compose)
    matrix: Tuple[Tuple[int, int], Tuple[int, int]] = ((1, 0), (0, 1))
    kind = "conjugate"

    def __post_init__(self):
        matrix = _int_matrix(self.matrix)
        if _det(matrix) == 0:
            raise NonInvertible(f"matrix {matrix} is singular")
        object.__setattr__(self, "matrix", matrix)

    @property
    def inverse_matrix(self):
        return _rational_inverse(self.matrix)

    @property
    def is_pl(self):
        return self.word.is_pl

    @property
    def size(self):
        return self.word.size + 2

    def __call__(self, p) -> QPoint:
        return _matmul(self.inverse_matrix, self.word(_matmul(self.matrix, qp(*p))))

    def numeric(self, xy):
        return _apply_tensor(self.inverse_matrix, self.word.numeric(_apply_tensor(self.matrix, xy)))

    def inverse(self):
        return Conjugate(self.word.inverse(), self.matrix)

    def transport(self, path, shift):
        inv = self.inverse_matrix
        path = [_matmul(self.matrix, v) for v in path]
        path, moved = self.word.transport(path, _matmul(self.matrix, shift))
        return [_matmul(inv, v) for v in path], _matmul(inv, moved)

    def as_json(self):
        return {"kind": self.kind, "word": self.word.as_json(), "matrix": [list(row) for row in self.matrix]}


IDENTITY = Compose(())


def compose(*words: Word) -> Word:
    return Compose(tuple(words))


def power(word: Word, n: int) -> Word:
    return Power(word, n)


# ----------------------------------------------------------------------------
# evaluation


@dataclass(frozen=True)
class EvalResult:
    point: Tuple
    exact: bool
    error_bound: float = 0.0


def eval_point(word: Word, p, iterations: int = 1, numeric: bool = False) -> EvalResult:
    r"""
    Image of p under `iterations` applications of word.
    Exact for piecewise-linear words on rational input; otherwise float64 with an error estimate
    of one rounding per generator application.
    """
    if iterations < 0:
        return eval_point(word.inverse(), p, -iterations, numeric)
    if word.is_pl and not numeric:
        point = qp(*p)
        for _ in range(iterations):
            point = word(point)
        return EvalResult(point, True)
    xy = torch.tensor([[float(p[0]), float(p[1])]], dtype=torch.float64)
    error = 0.0
    for _ in range(iterations):
        xy = word.numeric(xy)
        error += word.size * DOUBLE_EPS * (1.0 + float(xy.abs().max()))
    return EvalResult((float(xy[0, 0]), float(xy[0, 1])), False, error)


def displacement(word: Word, p, iterations: int = 1, numeric: bool = False) -> EvalResult:
    r"""
    D(f^n)(p) = f^n(p) - p, accumulated along the orbit.
    """
    result = eval_point(word, p, iterations, numeric)
    if result.exact:
        return EvalResult(psub(result.point, qp(*p)), True)
    point = (result.point[0] - float(p[0]), result.point[1] - float(p[1]))
    return EvalResult(point, False, result.error_bound)


def orbit_displacements(word: Word, xy: torch.Tensor, iterations: int) -> torch.Tensor:
    r"""
    (1/n) D(f^n) at every row of xy, in float64.
    """
    start = xy.clone()
    for _ in range(iterations):
        xy = word.numeric(xy)
    return (xy - start) / iterations


def apply_to_curve(word: Word, c: TorusCurve) -> TorusCurve:
    r"""
    Exact image of c; every segment is cut where the word stops being affine.
    """
    if not word.is_pl:
        raise NotPLWord("curve transport needs a piecewise-linear word")
    path, shift = word.transport(list(c.vertices), c.closure.as_point())
    if shift.x.denominator != 1 or shift.y.denominator != 1:
        raise NonInvertible(f"image closure {shift} is not a lattice vector")
    # every word is a homeomorphism of the torus, so the image of a simple curve is simple
    return validate_curve(path, (int(shift.x), int(shift.y)), check_simple=False)


# ----------------------------------------------------------------------------
# covariance


def conjugate(word: Word, matrix) -> Word:
    r"""
    C^-1 f C for an integer matrix C invertible over Q; the rotation set becomes C^-1 Rot(f).
    """
    return Conjugate(word, matrix)


def rescale(word: Word, m: int) -> Word:
    r"""
    x -> f(m x) / m, whose rotation set is Rot(f) / m.
    """
    if m < 1:
        raise MalformedInput(f"rescaling factor must be positive, got {m}")
    return Conjugate(word, ((m, 0), (0, m)))


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


@dataclass(frozen=True)
class AffineRealization:
    word: Word
    power: int
    conjugator: Tuple[Tuple[int, int], Tuple[int, int]]
    translation: QPoint


def realize_affine(word: Word, matrix: Sequence[Sequence], vector=(0, 0)) -> AffineRealization:
    r"""
    A word whose rotation set is M Rot(f) + v for a rational invertible M and a rational v.

    With M = N / d, p = |det N| and B = p M^-1 (an integer matrix), the result is
    T_v o (mB)^-1 f^(pm) (mB), where m clears the denominators of B v so that the
    conjugated power commutes with T_v.
    """
    entries = [[Fraction(v) for v in row] for row in matrix]
    d = 1
    for row in entries:
        for v in row:
            d = _lcm(d, v.denominator)
    N = tuple(tuple(int(v * d) for v in row) for row in entries)
    det_n = _det(N)
    if det_n == 0:
        raise NonInvertible(f"matrix {matrix} is singular")
    p = abs(det_n)
    (a, b), (c, e) = N
    scale = Fraction(p * d, det_n)
    B = tuple(tuple(int(scale * v) for v in row) for row in ((e, -b), (-c, a)))
    v = qp(*vector)
    bv = _matmul(B, v)
    m = _lcm(bv.x.denominator, bv.y.denominator)
    conjugator = tuple(tuple(m * x for x in row) for row in B)
    body = Conjugate(Power(word, p * m), conjugator)
    result = Compose((Translate(v), body)) if v != qp(0, 0) else body
    logger.debug("affine realization with power %d and conjugator %s", p * m, conjugator)
    return AffineRealization(result, p * m, conjugator, v)
