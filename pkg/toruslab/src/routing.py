import os
import sys
from typing import List, Optional

import regex
import torch

from .args import COMMANDS, DEFAULTS, get_command_args
from .curves import intersection_count
from .annuli import curve_width, make_chart, project, relative_width
from .graphs import (
    Slope, cover_degree, d0, farey_adjacent, farey_bfs, farey_distance, marking_twist, marking_width_distance,
    relative_width_bound, twist,
)
from .surgery import StripCurve, bicorn_path, build_quasi_path, enumerate_bicorns, path_intersections, \
    perturb_transverse, wedge
from .dynamics import displacement, eval_point
from .rotation import hausdorff, parse_polygon, rotation_set_estimate, schottky_convergence_experiment
from .families import axis_certificate, shear_pair, triangle_candidate, verify_triangle_conditions
from .formats import (
    curve_to_json, dumps, estimate_to_json, jsonable, load_chart, load_curve, load_marking, load_word,
    point_from_json, point_to_json, projection_to_json, report_to_json, strip_curve_to_json, twist_to_json,
    write_json,
)
from .plotting import plot_curves, plot_estimate
from .suite import SuiteConfig, verify_suite
from .errors import ConditionFailed, DomainError, SelfIntersecting, ToruslabError, UsageError
from .utils import get_logger, parse_rational, reset_logging, resolve_seed, resolve_threads, set_log_level


logger = get_logger(__name__)

SLOPE = regex.compile(r"^\s*([+-]?\d+)\s*/\s*([+-]?\d+)\s*$")
CURVE_SVG = ("intersect", "wedge", "quasipath", "bicorns", "perturb")


def _inputs(positional: List[str], count: int, usage: str) -> List[str]:
    if len(positional) != count:
        raise UsageError(f"expected {count} input(s): {usage}")
    return positional


def _require_annulus(args) -> str:
    if not args.annulus:
        raise UsageError("--annulus <core.curve> is required")
    return args.annulus


def parse_slope(text: str) -> Slope:
    match = SLOPE.match(text)
    if match is None:
        raise UsageError(f"not a slope: {text!r}, expected p/q")
    return Slope(int(match.group(1)), int(match.group(2)))


# ----------------------------------------------------------------------------
# commands


def curve_validate(common, args, positional):
    (path,) = _inputs(positional, 1, "curve-validate <curve>")
    curve = load_curve(path)
    return dict(curve_to_json(curve), valid=True, segments=len(curve))


def intersect(common, args, positional):
    a, b = (load_curve(p) for p in _inputs(positional, 2, "intersect <curve> <curve>"))
    return report_to_json(intersection_count(a, b)), [a, b]


def project_cmd(common, args, positional):
    (path,) = _inputs(positional, 1, "project --annulus <core> <curve>")
    chart = load_chart(_require_annulus(args))
    return projection_to_json(project(chart, load_curve(path)))


def width_cmd(common, args, positional):
    a, b = (load_curve(p) for p in _inputs(positional, 2, "width [--annulus <core>] <curve> <curve>"))
    if args.relative:
        return {"value": relative_width(a, b), "mode": "relative", "certificates": {}}
    chart = load_chart(_require_annulus(args))
    return {"value": curve_width(chart, a, b), "mode": "annulus", "certificates": {}}


def twist_cmd(common, args, positional):
    first, second = _inputs(positional, 2, "twist --annulus <core> <curve|marking> <curve|marking>")
    chart = load_chart(_require_annulus(args))
    if args.markings:
        return twist_to_json(marking_twist(chart, load_marking(first), load_marking(second), args.mode))
    return twist_to_json(twist(chart, load_curve(first), load_curve(second), args.mode))


def d0_cmd(common, args, positional):
    a, b = (load_curve(p) for p in _inputs(positional, 2, "d0 <curve> <curve>"))
    return {"value": d0(a, b), "mode": "d0", "certificates": {"cover_degree": cover_degree(a, b)}}


def dw_cmd(common, args, positional):
    m1, m2 = (load_marking(p) for p in _inputs(positional, 2, "dw <marking> <marking>"))
    result = {"value": marking_width_distance(m1, m2), "mode": "width", "certificates": {}}
    if args.check_bound:
        if not args.map:
            raise UsageError("--check_bound needs --map <map>")
        result["certificates"]["bound"] = relative_width_bound(load_word(args.map), m1)
    return result


def farey_cmd(common, args, positional):
    s1, s2 = (parse_slope(p) for p in _inputs(positional, 2, "farey <p/q> <r/s>"))
    certificates = {"adjacent": farey_adjacent(s1, s2)}
    if args.bfs_check:
        bound = max(24, abs(s1.p), s1.q, abs(s2.p), s2.q)
        certificates["bfs"] = farey_bfs(s1, s2, bound)
    return {"value": farey_distance(s1, s2), "mode": "farey", "certificates": certificates}


def wedge_cmd(common, args, positional):
    a, b = (load_curve(p) for p in _inputs(positional, 2, "wedge <curve> <curve>"))
    chart = make_chart(a)
    lower = StripCurve.from_torus(chart.normal_core)
    upper = StripCurve.from_torus(chart.normalize(b)).shifted(args.shift)
    result = wedge(lower, upper)
    try:
        torus = chart.denormalize(result.to_torus())
    except SelfIntersecting:
        torus = None
    out = {"strip": strip_curve_to_json(result), "curve": curve_to_json(torus) if torus else None}
    return out, [a, b] + ([torus] if torus else [])


def quasipath_cmd(common, args, positional):
    a, b = (load_curve(p) for p in _inputs(positional, 2, "quasipath <curve> <curve>"))
    path = build_quasi_path(a, b)
    certificate = {
        "length": len(path.curves) - 1,
        "checks": path.checks,
        "push": str(path.push) if path.push is not None else None,
        "witnesses": [curve_to_json(w) for w in path.witnesses],
    }
    if common.out and common.format == "json":
        os.makedirs(common.out, exist_ok=True)
        for i, c in enumerate(path.curves):
            write_json(os.path.join(common.out, f"sigma_{i}.curve"), curve_to_json(c))
        write_json(os.path.join(common.out, "certificate.json"), certificate)
    out = dict(certificate, curves=[curve_to_json(c) for c in path.curves])
    return out, path.curves


def bicorns_cmd(common, args, positional):
    a, b = (load_curve(p) for p in _inputs(positional, 2, "bicorns <curve> <curve>"))
    if args.path:
        path = bicorn_path(a, b)
        return {"curves": [curve_to_json(c) for c in path], "intersections": path_intersections(path)}, path
    found = enumerate_bicorns(a, b)
    out = {
        "count": len(found),
        "bicorns": [
            {"curve": curve_to_json(x.curve), "a": [point_to_json(v) for v in x.a], "b": [point_to_json(v) for v in x.b]}
            for x in found
        ],
    }
    return out, [a, b] + [x.curve for x in found]


def perturb_cmd(common, args, positional):
    a, b = (load_curve(p) for p in _inputs(positional, 2, "perturb <fixed curve> <moved curve>"))
    moved = perturb_transverse(a, b, parse_rational(args.budget))
    report = intersection_count(a, moved)
    return dict(curve_to_json(moved), transverse=report.all_transverse, count=report.count), [a, moved]


def eval_cmd(common, args, positional):
    (source,) = _inputs(positional, 1, "eval <map> --point x,y")
    word = load_word(source)
    point = point_from_json(args.point)
    image = eval_point(word, point, args.iterations, args.numeric)
    moved = displacement(word, point, args.iterations, args.numeric)

    def encode(p):
        return point_to_json(p) if image.exact else [float(p[0]), float(p[1])]

    return {"point": encode(image.point), "displacement": encode(moved.point), "exact": image.exact,
            "error_bound": image.error_bound}


def rotset_cmd(common, args, positional):
    (source,) = _inputs(positional, 1, "rotset <map>")
    word = load_word(source)
    estimate = rotation_set_estimate(word, args.n_schedule, args.grid, args.estimate_mode, args.orbit_points,
                                     resolve_seed(common.seed), common.threads, common.quiet)
    out = estimate_to_json(estimate)
    reference = parse_polygon(args.reference) if args.reference else None
    if reference:
        out["reference"] = [list(p) for p in reference]
        out["hausdorff"] = hausdorff(estimate.hull_vertices, reference)
    if common.format == "svg":
        plot_estimate(estimate, _svg_path(common), reference)
    return out


def axis_cert_cmd(common, args, positional):
    _inputs(positional, 0, "axis-cert --p P --q Q --n N")
    certificate = axis_certificate(args.p, args.q, args.n, args.bgit_threshold)
    if common.out:
        write_json(common.out, {"path": [curve_to_json(c) for c in certificate.path]})
    return {
        "p": certificate.p,
        "q": certificate.q,
        "n": certificate.n,
        "path_length": len(certificate.path) - 1,
        "adjacency_ok": certificate.adjacency_ok,
        "twist_lower_bounds": certificate.twist_lower_bounds,
        "explicit_twist": certificate.explicit_twist,
        "inverse_twist": certificate.inverse_twist,
        "distinct_ok": certificate.distinct_ok,
        "conditional": certificate.conditional,
        "ok": certificate.ok,
    }


def triangle_cmd(common, args, positional):
    if positional:
        (source,) = _inputs(positional, 1, "triangle-check [<map>]")
        word, fixed_h, fixed_v = load_word(source), None, None
    else:
        candidate = triangle_candidate()
        word, fixed_h, fixed_v = candidate.word, candidate.fixed_h, candidate.fixed_v
    report = verify_triangle_conditions(word, fixed_h, fixed_v, args.n, args.grid, args.tolerance, common.threads)
    return {"conditions": report["conditions"], "hausdorff": report["hausdorff"],
            "hull": [list(p) for p in report["hull"]], "fixed_h": report["fixed_h"], "fixed_v": report["fixed_v"]}


def schottky_cmd(common, args, positional):
    if positional:
        f, g = (load_word(p) for p in _inputs(positional, 2, "schottky [<f> <g>]"))
    else:
        f, g = shear_pair()
    result = schottky_convergence_experiment(f, g, args.k, args.m_schedule, args.n, args.grid, args.eps,
                                             common.threads, common.quiet)
    result["rows"] = [
        {"m": r.m, "hausdorff": r.hausdorff, "translate": list(r.translate),
         "translated_distance": r.translated_distance, "excess": r.excess, "hull": [list(p) for p in r.hull]}
        for r in result["rows"]
    ]
    result["reference"] = [list(p) for p in result["reference"]]
    return result


def verify_suite_cmd(common, args, positional):
    _inputs(positional, 0, "verify-suite [--filter PATTERN]")
    config = SuiteConfig(seed=resolve_seed(common.seed), fast=args.fast, threads=common.threads)
    report = verify_suite(args.filter, config, common.quiet)
    return report.as_json()


HANDLERS = {
    "curve-validate": curve_validate,
    "intersect": intersect,
    "project": project_cmd,
    "width": width_cmd,
    "twist": twist_cmd,
    "d0": d0_cmd,
    "dw": dw_cmd,
    "farey": farey_cmd,
    "wedge": wedge_cmd,
    "quasipath": quasipath_cmd,
    "bicorns": bicorns_cmd,
    "perturb": perturb_cmd,
    "eval": eval_cmd,
    "rotset": rotset_cmd,
    "axis-cert": axis_cert_cmd,
    "triangle-check": triangle_cmd,
    "schottky": schottky_cmd,
    "verify-suite": verify_suite_cmd,
}


def _svg_path(common) -> str:
    if not common.out:
        raise UsageError("--format svg needs --out <file.svg>")
    return common.out


def _usage() -> str:
    return (
        "usage: run.py <command> [inputs] [options]\ncommands: " + ", ".join(COMMANDS)
        + "\nboolean flags take an optional value, so put them after the inputs"
    )


def dispatch(command: str, argv: List[str]):
    r"""
    Runs one command and returns its JSON-ready result.
    """
    if command not in HANDLERS:
        raise UsageError(f"unknown command {command!r}\n{_usage()}")
    try:
        common, args, positional = get_command_args(command, argv)
    except SystemExit as err:
        if err.code in (0, None):
            raise
        raise UsageError(f"bad arguments for {command}") from err
    unknown = [p for p in positional if p.startswith("--")]
    if unknown:
        raise UsageError(f"unknown option(s) for {command}: {' '.join(unknown)}")
    if common.explain_defaults:
        return DEFAULTS
    if common.format not in ("json", "svg"):
        raise UsageError(f"--format must be json or svg, got {common.format!r}")
    set_log_level(common.log_level)
    common.threads = resolve_threads(common.threads)
    torch.manual_seed(resolve_seed(common.seed))
    result = HANDLERS[command](common, args, positional)
    if isinstance(result, tuple):
        result, curves = result
        if common.format == "svg" and command in CURVE_SVG:
            plot_curves(curves, _svg_path(common), title=command)
    return result


def run(argv: Optional[List[str]] = None) -> int:
    r"""
    Entry point. Prints the JSON result on stdout and returns the exit code:
    0 on success, 1 on usage errors, 2 on domain errors and failed suite checks.
    """
    reset_logging()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        print(_usage(), file=sys.stderr)
        return 0 if argv else 1
    command, rest = argv[0], argv[1:]
    try:
        result = dispatch(command, rest)
    except ConditionFailed as err:
        logger.error("%s: %s", command, err)
        print(dumps({"error": type(err).__name__, "message": str(err), "failed": err.failed,
                     "report": jsonable(err.report)}))
        return err.exit_code
    except DomainError as err:
        logger.error("%s: %s", command, err)
        print(dumps({"error": type(err).__name__, "message": str(err)}))
        return err.exit_code
    except ToruslabError as err:
        print(str(err), file=sys.stderr)
        return err.exit_code
    print(dumps(jsonable(result)))
    if command == "verify-suite" and not result["passed"]:
        return 2
    return 0

