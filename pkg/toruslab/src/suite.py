import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional

import regex
import torch
from tqdm import tqdm

from .curves import TorusCurve, qp, straight_curve, translate_curve, validate_curve
from .annuli import make_chart
from .graphs import (
    arc_distance, arc_graph_bfs, d0, farey_bfs_distances, farey_distance, farey_slopes, fine_adjacent,
    make_marking, marking_twist, straight_arc, twist, width,
)
from .surgery import StripCurve, build_quasi_path, leq, meets, strip_curve, wedge
from .dynamics import (
    TENT, SIN2, ShearH, ShearV, Linear, Compose, Power, apply_to_curve, rescale,
)
from .rotation import hausdorff, rotation_set_estimate, schottky_convergence_experiment
from .families import (
    ALPHA, BETA, CONJUGATOR, h_pq, shear_pair, square_conjugator, parallelogram_realization, triangle_candidate,
    verify_triangle_conditions, axis_certificate, staircase_curve, lift_scan_width,
)
from .errors import ConditionFailed, DomainError, OverlappingSegments
from .formats import jsonable
from .utils import LoggerHandler, get_logger


logger = get_logger(__name__)

PQ = [(3, 3), (3, 5), (5, 3)]


@dataclass
class CheckResult:
    name: str
    anchor: str
    expected: object
    observed: object
    passed: bool
    runtime: float
    log: str = ""


@dataclass
class SuiteReport:
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_json(self):
        return {
            "passed": self.passed,
            "checks": [
                {
                    "name": c.name,
                    "anchor": c.anchor,
                    "expected": c.expected,
                    "observed": c.observed,
                    "passed": c.passed,
                    "runtime": round(c.runtime, 3),
                    **({"log": c.log} if c.log else {}),
                }
                for c in self.checks
            ],
        }


@dataclass
class SuiteConfig:
    seed: int = 0
    fast: bool = False
    threads: int = 0

    @property
    def twist_n(self):
        return [1, 2] if self.fast else [1, 2, 3]

    @property
    def iterations(self):
        return 200 if self.fast else 1000

    @property
    def samples(self):
        return 40 if self.fast else 200


# ----------------------------------------------------------------------------
# random instances


def _generator(seed: int) -> torch.Generator:
    return torch.Generator().manual_seed(seed)


def _randint(gen, lo: int, hi: int) -> int:
    return int(torch.randint(lo, hi + 1, (1,), generator=gen))


def _off_lattice(gen, lo: int, hi: int, den: int) -> Fraction:
    r"""A random k / den in [lo, hi], never an integer."""
    while True:
        k = _randint(gen, lo * den, hi * den)
        if k % den:
            return Fraction(k, den)


def random_graph_curve(gen, height: int = 2, den: int = 7) -> TorusCurve:
    r"""An x-monotone curve isotopic to alpha, with vertices off the integer lattice."""
    knots = _randint(gen, 2, 4)
    return validate_curve(
        [qp(Fraction(k, knots), _off_lattice(gen, -height, height, den)) for k in range(knots)], (1, 0)
    )


def random_strip_curve(gen, phase: Fraction, height: int = 2, den: int = 5) -> StripCurve:
    knots = _randint(gen, 2, 4)
    return strip_curve(
        [qp(Fraction(k, knots) + phase, _off_lattice(gen, -height, height, den)) for k in range(knots)]
    )


def random_folded_curve(gen, height: int = 2, den: int = 7) -> TorusCurve:
    r"""A graph curve pushed through a horizontal tent shear, so it doubles back in x."""
    fold = ShearH(TENT, _randint(gen, 1, 2))
    return apply_to_curve(fold, random_graph_curve(gen, height, den))


def random_folded_strip_curve(gen, phase: Fraction, height: int = 2, den: int = 5) -> StripCurve:
    folded = random_folded_curve(gen, height, den)
    return StripCurve.from_torus(translate_curve(folded, (phase, 0)))


# ----------------------------------------------------------------------------
# checks


def _result(expected, observed, passed):
    return {"expected": expected, "observed": observed, "passed": bool(passed)}


def check_twist_exact(config: SuiteConfig):
    observed, ok = {}, True
    chart = make_chart(BETA)
    for p, q in PQ:
        h = h_pq(p, q)
        h_inv = h.inverse()
        ahead, behind = ALPHA, ALPHA
        for n in range(1, max(config.twist_n) + 1):
            ahead, behind = apply_to_curve(h, ahead), apply_to_curve(h_inv, behind)
            if n not in config.twist_n:
                continue
            forward = twist(chart, ALPHA, ahead).value
            backward = twist(chart, ALPHA, behind).value
            logger.info("h_{%d,%d}^%d alpha: %d vertices", p, q, n, len(ahead))
            observed[f"{p},{q},{n}"] = [forward, backward]
            ok &= forward == q + 2 and backward == 2
    return _result("[q + 2, 2] for every (p, q, n)", observed, ok)


def check_axis_certificate(config: SuiteConfig):
    observed, ok = {}, True
    for p, q in PQ:
        for n in config.twist_n:
            certificate = axis_certificate(p, q, n)
            observed[f"{p},{q},{n}"] = {
                "adjacency": certificate.adjacency_ok,
                "min_twist": min(t["value"] for t in certificate.twist_lower_bounds),
                "path_edges": len(certificate.path) - 1,
            }
            ok &= certificate.ok and len(certificate.path) - 1 == 2 * n
    return _result("adjacent path of 2n edges, twists >= q (resp. p)", observed, ok)


def _square(side: float):
    return [(0.0, 0.0), (side, 0.0), (side, side), (0.0, side)]


def check_rotation_squares(config: SuiteConfig):
    observed, ok = {}, True
    cases = {
        "gf_tent": (Compose(tuple(reversed(shear_pair(TENT)))), 1.0),
        "gf_sin2": (Compose(tuple(reversed(shear_pair(SIN2)))), 1.0),
        "h22_tent": (h_pq(2, 2, TENT), 2.0),
        "h22_sin2": (h_pq(2, 2, SIN2), 2.0),
    }
    for name, (word, side) in cases.items():
        estimate = rotation_set_estimate(word, [config.iterations], 64, threads=config.threads)
        gap = hausdorff(estimate.hull_vertices, _square(side))
        observed[name] = round(gap, 6)
        ok &= gap <= 0.05 * side * 2 ** 0.5
    return _result("Hausdorff <= 0.05 diam to [0,1]^2, [0,2]^2", observed, ok)


def check_shear_oracle(config: SuiteConfig):
    f, _ = shear_pair(TENT)
    estimate = rotation_set_estimate(f, [config.iterations], 64, threads=config.threads)
    gap = hausdorff(estimate.hull_vertices, [(0.0, 0.0), (1.0, 0.0)])
    return _result("<= 1/64 from [0,1] x {0}", round(gap, 9), gap <= 1 / 64)


def check_covariance(config: SuiteConfig):
    f, g = shear_pair(TENT)
    h = Compose((g, f))
    n, grid = config.iterations, 64
    tolerance = 2 * 0.05 * 2 ** 0.5

    def estimate(word):
        return rotation_set_estimate(word, [n], grid, threads=config.threads).hull_vertices

    base = estimate(h)
    observed, ok = {}, True
    for m in (2, 3):
        gap = hausdorff(estimate(rescale(h, m)), [(x / m, y / m) for x, y in base])
        observed[f"rescale_{m}"] = round(gap, 6)
        ok &= gap <= tolerance
    for k in (2, 3):
        gap = hausdorff(estimate(Power(h, k)), [(x * k, y * k) for x, y in base])
        observed[f"power_{k}"] = round(gap, 6)
        ok &= gap <= tolerance
    gap = hausdorff(estimate(f.inverse()), [(-x, -y) for x, y in estimate(f)])
    observed["inverse"] = round(gap, 6)
    ok &= gap <= tolerance
    return _result(f"every gap <= {tolerance:.4f}", observed, ok)


def check_parallelogram_conjugacy(config: SuiteConfig):
    gen = _generator(config.seed)
    points = [qp(Fraction(_randint(gen, -64, 64), _randint(gen, 1, 16)),
                 Fraction(_randint(gen, -64, 64), _randint(gen, 1, 16))) for _ in range(100)]
    f, g = shear_pair(TENT)
    word = Compose((g, f))
    inverse = word.inverse()

    def mismatches(conjugator):
        back = conjugator.inverse()
        return sum(conjugator(word(back(p))) != qp(inverse(p).x + 1, inverse(p).y + 1) for p in points)

    # T alone lands on T_(1,1) (f g)^-1; only S = f^-1 T closes the identity
    observed = {"mismatches": mismatches(square_conjugator(TENT)), "translation_only": mismatches(CONJUGATOR)}
    realization = parallelogram_realization([(0, 0), (2, 1), (3, 3), (1, 2)])
    general = realization.check_conjugacy(points[:20])
    observed["general"] = general
    return _result({"mismatches": 0, "general": True}, observed, observed["mismatches"] == 0 and general)


def check_arc_distance(config: SuiteConfig):
    chart = make_chart(ALPHA)
    compared, mismatches = 0, []
    quarters = range(0, 4)
    for b0 in quarters:
        for t0 in range(b0 - 8, b0 + 9, 2):
            for b1 in quarters:
                for t1 in range(b1 - 8, b1 + 9, 3):
                    a = straight_arc(chart, Fraction(b0, 4), Fraction(t0, 4))
                    b = straight_arc(chart, Fraction(b1, 4), Fraction(t1, 4))
                    if a.vertices != b.vertices and width(chart, a, b) > 3:
                        continue
                    oracle = arc_graph_bfs((2 * b0, 2 * t0), (2 * b1, 2 * t1), grid=8, reach=3)
                    value = arc_distance(chart, a, b)
                    compared += 1
                    if value != oracle:
                        mismatches.append([str(a.vertices), str(b.vertices), value, oracle])
    return _result({"mismatches": 0}, {"compared": compared, "mismatches": mismatches[:5]}, not mismatches)


def check_d0_staircase(config: SuiteConfig):
    observed, ok = {}, True
    for n in range(0, 6):
        stair = staircase_curve(n)
        value, oracle = d0(ALPHA, stair), lift_scan_width(stair) + 1
        observed[str(n)] = [value, oracle]
        ok &= value == oracle == n + 1
    return _result("n + 1", observed, ok)


def check_farey(config: SuiteConfig):
    slopes = farey_slopes(12)
    compared, mismatches = 0, []
    for s1 in slopes:
        distances = farey_bfs_distances(s1, 24)
        for s2 in slopes:
            compared += 1
            if farey_distance(s1, s2) != distances.get(s2):
                mismatches.append([str(s1), str(s2)])
    return _result({"mismatches": 0}, {"compared": compared, "mismatches": mismatches[:5]}, not mismatches)


def check_wedge_algebra(config: SuiteConfig):
    gen = _generator(config.seed + 1)
    counts = {"pairs": 0, "skipped": 0, "failures": 0}
    for i in range(config.samples):
        make = random_folded_strip_curve if i % 2 else random_strip_curve
        a = make(gen, Fraction(0))
        b = make(gen, Fraction(1, 3))
        c = make(gen, Fraction(1, 7))
        try:
            ab = wedge(a, b)
            bigger = wedge(a, c)
            holds = [
                ab == wedge(b, a),
                leq(a, ab) and leq(b, ab),
                leq(ab, wedge(bigger, b)),
                wedge(a.shifted(1), b.shifted(1)) == ab.shifted(1),
                not meets(ab, ab.shifted(1)),
            ]
        except OverlappingSegments:
            counts["skipped"] += 1
            continue
        counts["pairs"] += 1
        counts["failures"] += not all(holds)
    return _result({"failures": 0}, counts, counts["failures"] == 0 and counts["pairs"] > 0)


def check_quasi_path(config: SuiteConfig):
    gen = _generator(config.seed + 2)
    others = [staircase_curve(n) for n in range(1, 5)]
    others += [random_graph_curve(gen) for _ in range(max(4, config.samples // 20))]
    others += [random_folded_curve(gen) for _ in range(max(2, config.samples // 40))]
    observed = []
    for other in others:
        path = build_quasi_path(ALPHA, other)
        n = d0(ALPHA, other)
        observed.append({"d0": n, "length": len(path.curves) - 1, "checks": path.checks})
    ok = all(o["length"] == o["d0"] and all(o["checks"].values()) for o in observed)
    return _result("length = d0 and every order check", observed, ok)


def check_twist_axioms(config: SuiteConfig):
    gen = _generator(config.seed + 3)
    chart = make_chart(BETA)
    words = [ShearV(TENT), Linear(((1, 0), (1, 1))), ShearH(TENT)]
    images = [make_chart(apply_to_curve(w, BETA)) for w in words]
    # offset 1/11 keeps every random segment off the core
    diagonal = make_chart(straight_curve(1, 1, (0, Fraction(1, 11))))
    counts = {"triangle": 0, "lipschitz": 0, "invariance": 0, "markings": 0, "skipped": 0, "failures": 0}
    for i in range(config.samples):
        a, c = random_graph_curve(gen), random_graph_curve(gen)
        b = random_folded_curve(gen) if i % 2 else random_graph_curve(gen)
        try:
            ab, bc, ac = (twist(chart, x, y).value for x, y in ((a, b), (b, c), (a, c)))
            counts["triangle"] += 1
            counts["failures"] += ac > ab + bc
            shifted = translate_curve(a, (0, Fraction(_randint(gen, 1, 10), 11)))
            if fine_adjacent(a, shifted):
                counts["lipschitz"] += 1
                counts["failures"] += twist(chart, a, shifted).value > 2
            k = i % len(words)
            moved = twist(images[k], apply_to_curve(words[k], a), apply_to_curve(words[k], b)).value
            counts["invariance"] += 1
            counts["failures"] += moved != ab
        except OverlappingSegments:
            counts["skipped"] += 1
            continue
        # graph curves cross each vertical once; two disjoint verticals are an elementary move
        first = _randint(gen, 1, 11)
        verticals = [translate_curve(BETA, (Fraction(j, 13), 0)) for j in (first, first + 1, _randint(gen, 1, 12))]
        m, step = make_marking(a, verticals[0]), make_marking(a, verticals[1])
        reference = make_marking(c, verticals[2])
        counts["markings"] += 1
        counts["failures"] += marking_twist(diagonal, m, step).value > 2
        gap = marking_twist(diagonal, m, reference).value - marking_twist(diagonal, step, reference).value
        counts["failures"] += abs(gap) > 2
    return _result({"failures": 0}, counts, counts["failures"] == 0)


def check_triangle(config: SuiteConfig):
    candidate = triangle_candidate()
    try:
        report = verify_triangle_conditions(candidate.word, candidate.fixed_h, candidate.fixed_v,
                                            n=config.iterations, grid=64, threads=config.threads)
    except ConditionFailed as err:
        return _result("every condition", {"failed": err.failed, "report": jsonable(err.report)}, False)
    return _result("every condition", {"hausdorff": round(report["hausdorff"], 6),
                                       "conditions": report["conditions"]}, True)


def check_schottky(config: SuiteConfig):
    f, g = shear_pair(TENT)
    result = schottky_convergence_experiment(f, g, 1, [5, 10, 20], n=config.iterations // 5, grid=32,
                                             eps=0.1, threads=config.threads)
    excesses = [round(row.excess, 6) for row in result["rows"]]
    ok = result["nonincreasing"] and excesses[-1] <= 0.1
    return _result("nonincreasing, <= 0.1 at m = 20", excesses, ok)


@dataclass
class Check:
    name: str
    anchor: str
    run: Callable[[SuiteConfig], Dict[str, object]]


CHECKS = [
    Check("twist_exact", "twist of alpha and h^n alpha in the annulus of beta", check_twist_exact),
    Check("twist_axis_certificate", "translation length at most 2 along the quasi-axis", check_axis_certificate),
    Check("rotset_squares", "rotation sets of g f and h_{n,n}", check_rotation_squares),
    Check("rotset_shear_oracle", "rotation set of a single shear", check_shear_oracle),
    Check("covariance", "rescaling, powers and inversion of rotation sets", check_covariance),
    Check("parallelogram_conjugacy", "the square realizer is conjugate to its inverse", check_parallelogram_conjugacy),
    Check("arc_distance_bfs", "arc graph distance is width plus one", check_arc_distance),
    Check("d0_staircase", "d0 counts the lifts met", check_d0_staircase),
    Check("farey_bfs", "Farey distance by continued fractions", check_farey),
    Check("wedge_algebra", "algebra of the wedge", check_wedge_algebra),
    Check("quasi_path", "quasi-paths through wedges", check_quasi_path),
    Check("twist_axioms", "triangle inequality, edge bound, invariance of twists", check_twist_axioms),
    Check("triangle", "a homeomorphism with triangular rotation set", check_triangle),
    Check("schottky", "rescaled rotation sets of f g^m", check_schottky),
]


def _capture() -> LoggerHandler:
    handler = LoggerHandler()
    handler.setFormatter(logging.Formatter("%(levelname)s - %(name)s - %(message)s"))
    for name, item in logging.root.manager.loggerDict.items():
        if isinstance(item, logging.Logger) and "src" in name.split("."):
            item.addHandler(handler)
    return handler


def _release(handler: LoggerHandler):
    for item in logging.root.manager.loggerDict.values():
        if isinstance(item, logging.Logger) and handler in item.handlers:
            item.removeHandler(handler)


def verify_suite(pattern: Optional[str] = None, config: Optional[SuiteConfig] = None,
                 quiet: bool = True) -> SuiteReport:
    r"""
    Runs every check whose name matches `pattern`; a check that raises counts as failed.
    """
    config = config or SuiteConfig()
    selected = [c for c in CHECKS if pattern is None or regex.search(pattern, c.name)]
    report = SuiteReport()
    handler = _capture()
    try:
        for check in tqdm(selected, desc="verify-suite", disable=quiet):
            handler.reset()
            start = time.perf_counter()
            try:
                outcome = check.run(config)
            except DomainError as err:
                outcome = _result("no error", f"{type(err).__name__}: {err}", False)
            runtime = time.perf_counter() - start
            result = CheckResult(check.name, check.anchor, jsonable(outcome["expected"]),
                                 jsonable(outcome["observed"]), outcome["passed"], runtime)
            if not result.passed:
                result.log = handler.log
            report.checks.append(result)
            logger.info("%s: %s (%.2fs)", check.name, "pass" if result.passed else "FAIL", runtime)
    finally:
        _release(handler)
    return report
