import json
import os
from typing import Dict, List

from .curves import QPoint, TorusCurve, IntersectionReport, validate_curve
from .annuli import AnnulusChart, Projection, StripArc, make_chart
from .graphs import Marking, TwistValue, make_marking
from .surgery import StripCurve
from .dynamics import (
    Word, ShearH, ShearV, Translate, Linear, Morse, ConePush, Compose, Power, Inverse, Conjugate,
    make_profile,
)
from .rotation import PolygonEstimate
from .errors import MalformedInput, UsageError
from .utils import frac_str, parse_rational, get_logger


logger = get_logger(__name__)


def dumps(obj) -> str:
    r"""Deterministic JSON: sorted keys, no whitespace variation."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def load_json(path: str):
    if not os.path.isfile(path):
        raise UsageError(f"no such file: {path}")
    with open(path, encoding="utf-8") as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as err:
            raise MalformedInput(f"{path}: {err}") from err


def write_json(path: str, obj):
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps(obj))
        f.write("\n")


def point_to_json(p) -> List[str]:
    return [frac_str(p[0]), frac_str(p[1])]


def point_from_json(obj) -> QPoint:
    if isinstance(obj, str):
        obj = obj.split(",")
    if not isinstance(obj, (list, tuple)) or len(obj) != 2:
        raise MalformedInput(f"not a point: {obj!r}")
    return QPoint(parse_rational(obj[0]), parse_rational(obj[1]))


def _require(obj, *keys):
    if not isinstance(obj, dict):
        raise MalformedInput(f"expected an object, got {type(obj).__name__}")
    missing = [k for k in keys if k not in obj]
    if missing:
        raise MalformedInput(f"missing keys: {', '.join(missing)}")


# ----------------------------------------------------------------------------
# curves, markings, charts


def curve_to_json(c: TorusCurve) -> Dict[str, object]:
    return {"vertices": [point_to_json(v) for v in c.vertices], "closure": c.closure.as_list()}


def curve_from_json(obj) -> TorusCurve:
    _require(obj, "vertices", "closure")
    closure = obj["closure"]
    if not isinstance(closure, list) or len(closure) != 2 or not all(isinstance(v, int) for v in closure):
        raise MalformedInput(f"closure must be two integers, got {closure!r}")
    return validate_curve([point_from_json(v) for v in obj["vertices"]], tuple(closure))


def load_curve(path: str) -> TorusCurve:
    return curve_from_json(load_json(path))


def marking_to_json(m: Marking) -> Dict[str, object]:
    return {"a": curve_to_json(m.a), "b": curve_to_json(m.b)}


def marking_from_json(obj) -> Marking:
    _require(obj, "a", "b")
    return make_marking(curve_from_json(obj["a"]), curve_from_json(obj["b"]))


def load_marking(path: str) -> Marking:
    return marking_from_json(load_json(path))


def chart_to_json(chart: AnnulusChart) -> Dict[str, object]:
    return {"core": curve_to_json(chart.core), "dual": list(chart.dual)}


def chart_from_json(obj) -> AnnulusChart:
    r"""
    Accepts a serialized chart or a bare curve; a stored dual vector must match the computed one.
    """
    if isinstance(obj, dict) and "core" in obj:
        chart = make_chart(curve_from_json(obj["core"]))
        if "dual" in obj and list(obj["dual"]) != list(chart.dual):
            raise MalformedInput(f"dual {obj['dual']} differs from {list(chart.dual)}")
        return chart
    return make_chart(curve_from_json(obj))


def load_chart(path: str) -> AnnulusChart:
    return chart_from_json(load_json(path))


def report_to_json(report: IntersectionReport) -> Dict[str, object]:
    return {
        "count": report.count,
        "transverse": report.all_transverse,
        "points": [point_to_json(p) for p in report.points],
        "touch_points": [point_to_json(p) for p in report.touch_points],
        "touch_sides": list(report.touch_sides),
    }


def arc_to_json(arc: StripArc) -> Dict[str, object]:
    return {"vertices": [point_to_json(v) for v in arc.vertices], "essential": arc.essential}


def projection_to_json(projection: Projection) -> Dict[str, object]:
    return {"arcs": [arc_to_json(a) for a in projection.arcs], "empty": projection.is_empty()}


def strip_curve_to_json(c: StripCurve) -> Dict[str, object]:
    return {"vertices": [point_to_json(v) for v in c.vertices], "deck": ["0", "1"]}


def twist_to_json(t: TwistValue) -> Dict[str, object]:
    return {
        "value": t.value,
        "mode": t.mode,
        "certificates": dict(t.certificates, hausdorff=t.hausdorff, diameter=t.diameter, pointwise=t.pointwise),
    }


# ----------------------------------------------------------------------------
# maps


def word_to_json(word: Word):
    return word.as_json()


def _matrix(obj):
    if not isinstance(obj, list) or len(obj) != 2 or any(not isinstance(r, list) or len(r) != 2 for r in obj):
        raise MalformedInput(f"not a 2x2 matrix: {obj!r}")
    return tuple(tuple(r) for r in obj)


def word_from_json(obj) -> Word:
    r"""
    Parses a map expression tree. A string "example:<name>" names an entry of the example table.
    """
    if isinstance(obj, str):
        if obj.startswith("example:"):
            from .families import example_word

            return example_word(obj[len("example:"):])
        raise MalformedInput(f"unknown map {obj!r}")
    _require(obj, "kind")
    kind = obj["kind"]
    if kind in ("shear_h", "shear_v"):
        profile = make_profile(obj.get("profile", "tent"))
        amplitude = parse_rational(obj.get("amplitude", 1))
        return (ShearH if kind == "shear_h" else ShearV)(profile, amplitude)
    if kind == "translate":
        _require(obj, "vector")
        return Translate(point_from_json(obj["vector"]))
    if kind == "linear":
        _require(obj, "matrix")
        return Linear(_matrix(obj["matrix"]))
    if kind == "morse":
        return Morse(parse_rational(obj.get("strength", "1/8")), bool(obj.get("inverted", False)))
    if kind == "cone_push":
        _require(obj, "square", "source", "target")
        square = tuple(parse_rational(v) for v in obj["square"])
        if len(square) != 4:
            raise MalformedInput(f"square needs four coordinates, got {obj['square']!r}")
        return ConePush(square, point_from_json(obj["source"]), point_from_json(obj["target"]))
    if kind == "compose":
        _require(obj, "words")
        return Compose(tuple(word_from_json(w) for w in obj["words"]))
    if kind == "power":
        _require(obj, "word", "exponent")
        if not isinstance(obj["exponent"], int):
            raise MalformedInput(f"exponent must be an integer, got {obj['exponent']!r}")
        return Power(word_from_json(obj["word"]), obj["exponent"])
    if kind == "inverse":
        _require(obj, "word")
        return Inverse(word_from_json(obj["word"]))
    if kind == "conjugate":
        _require(obj, "word", "matrix")
        return Conjugate(word_from_json(obj["word"]), _matrix(obj["matrix"]))
    raise MalformedInput(f"unknown map kind {kind!r}")


def load_word(source: str) -> Word:
    r"""A map file, or example:<name> directly."""
    if source.startswith("example:"):
        return word_from_json(source)
    return word_from_json(load_json(source))


# ----------------------------------------------------------------------------
# estimates


def estimate_to_json(estimate: PolygonEstimate) -> Dict[str, object]:
    out = {
        "hull": [[round(x, 12), round(y, 12)] for x, y in estimate.hull_vertices],
        "n": estimate.n,
        "grid": estimate.grid,
        "mode": estimate.mode,
        "diagnostics": estimate.diagnostics,
    }
    if estimate.inner_hull:
        out["inner_hull"] = [[round(x, 12), round(y, 12)] for x, y in estimate.inner_hull]
    return out


def jsonable(obj):
    r"""Plain JSON values; anything else (fractions, points) becomes its string."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (bool, int, float, str)) or obj is None:
        return obj
    return str(obj)
