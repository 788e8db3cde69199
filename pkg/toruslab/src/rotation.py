import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import torch
from tqdm import tqdm

from .dynamics import Word, Compose, Power, orbit_displacements
from .errors import MalformedInput
from .utils import get_logger, resolve_threads


logger = get_logger(__name__)

Point = Tuple[float, float]


@dataclass
class PolygonEstimate:
    r"""
    Convex hull of sampled mean displacements (1/n) D(f^n), counterclockwise.
    """
    hull_vertices: List[Point]
    n: int
    grid: int
    mode: str = "upper_sample"
    diagnostics: Dict[str, object] = field(default_factory=dict)
    inner_hull: List[Point] = field(default_factory=list)


# ----------------------------------------------------------------------------
# planar convex geometry in floats


def _turn(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points: Sequence[Point]) -> List[Point]:
    r"""
    Andrew's monotone chain. Collinear points are dropped; the result is counterclockwise
    and independent of the input order.
    """
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if len(pts) <= 2:
        return pts
    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and _turn(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and _turn(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _segment_distance(p, a, b) -> float:
    dx, dy = b[0] - a[0], b[1] - a[1]
    length = dx * dx + dy * dy
    if length == 0:
        return math.hypot(p[0] - a[0], p[1] - a[1])
    t = max(0.0, min(1.0, ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / length))
    return math.hypot(p[0] - a[0] - t * dx, p[1] - a[1] - t * dy)


def point_polygon_distance(p: Point, polygon: Sequence[Point]) -> float:
    r"""
    Distance from p to the closed convex region of a counterclockwise polygon.
    """
    if not polygon:
        raise MalformedInput("empty polygon")
    if len(polygon) == 1:
        return math.hypot(p[0] - polygon[0][0], p[1] - polygon[0][1])
    if len(polygon) >= 3 and all(
        _turn(polygon[i], polygon[(i + 1) % len(polygon)], p) >= 0 for i in range(len(polygon))
    ):
        return 0.0
    edges = [(polygon[i], polygon[(i + 1) % len(polygon)]) for i in range(len(polygon))]
    return min(_segment_distance(p, a, b) for a, b in edges)


def directed_hausdorff(A: Sequence[Point], B: Sequence[Point]) -> float:
    return max(point_polygon_distance(a, B) for a in A)


def hausdorff(A: Sequence[Point], B: Sequence[Point]) -> float:
    r"""Hausdorff distance between the convex regions spanned by A and B."""
    A, B = convex_hull(A), convex_hull(B)
    return max(directed_hausdorff(A, B), directed_hausdorff(B, A))


def scale_polygon(polygon: Sequence[Point], s: float) -> List[Point]:
    return convex_hull([(x * s, y * s) for x, y in polygon])


def translate_polygon(polygon: Sequence[Point], t: Point) -> List[Point]:
    return [(x + t[0], y + t[1]) for x, y in polygon]


def parse_polygon(text: str) -> List[Point]:
    r"""Reads 'x,y;x,y;...'."""
    try:
        points = [tuple(float(v) for v in chunk.split(",")) for chunk in text.split(";") if chunk.strip()]
    except ValueError as err:
        raise MalformedInput(f"bad polygon {text!r}") from err
    if not points or any(len(p) != 2 for p in points):
        raise MalformedInput(f"bad polygon {text!r}")
    return convex_hull(points)


# ----------------------------------------------------------------------------
# estimator


def unit_grid(grid: int) -> torch.Tensor:
    r"""The periodic grid k / grid, 0 <= k < grid, in both coordinates."""
    ticks = torch.arange(grid, dtype=torch.float64) / grid
    xs, ys = torch.meshgrid(ticks, ticks, indexing="ij")
    return torch.stack([xs.reshape(-1), ys.reshape(-1)], dim=1)


def sampling_modulus(values: torch.Tensor, grid: int) -> float:
    r"""
    Largest jump of the sampled displacement between neighbouring grid points.
    """
    samples = values.reshape(grid, grid, 2)
    jumps = [
        (samples[1:, :, :] - samples[:-1, :, :]).norm(dim=2).max(),
        (samples[:, 1:, :] - samples[:, :-1, :]).norm(dim=2).max(),
    ]
    return float(max(jumps))


def rotation_set_estimate(
    word: Word,
    n_schedule: Sequence[int],
    grid: int,
    mode: str = "upper_sample",
    orbit_points: int = 64,
    seed: int = 0,
    threads: int = 0,
    quiet: bool = True,
) -> PolygonEstimate:
    r"""
    Convex hull of (1/n) D(f^n) over the periodic grid of the unit square, for every n of the schedule.

    Args:
        mode: upper_sample, or orbit_lower to also average long orbits from random seeds
        orbit_points: number of random seeds for orbit_lower
    Returns:
        the estimate at the last n, with the Hausdorff gaps between consecutive n
    """
    if grid < 2:
        raise MalformedInput(f"grid must be at least 2, got {grid}")
    if not n_schedule or min(n_schedule) < 1:
        raise MalformedInput(f"iterate counts must be positive, got {list(n_schedule)}")
    if mode not in ("upper_sample", "orbit_lower"):
        raise MalformedInput(f"unknown estimate mode {mode!r}")
    torch.set_num_threads(resolve_threads(threads))
    xy = unit_grid(grid)
    hulls, gaps, moduli = [], [], []
    for n in tqdm(list(n_schedule), desc="rotation set", disable=quiet):
        values = orbit_displacements(word, xy, n)
        hull = convex_hull(values.tolist())
        if hulls:
            gaps.append(hausdorff(hulls[-1], hull))
        hulls.append(hull)
        moduli.append(sampling_modulus(values, grid))
        logger.debug("n=%d: hull with %d vertices", n, len(hull))
    estimate = PolygonEstimate(
        hull_vertices=hulls[-1],
        n=n_schedule[-1],
        grid=grid,
        mode=mode,
        diagnostics={"schedule": list(n_schedule), "gaps": gaps, "modulus": moduli[-1]},
    )
    if mode == "orbit_lower":
        generator = torch.Generator().manual_seed(seed)
        seeds = torch.rand((orbit_points, 2), generator=generator, dtype=torch.float64)
        inner = orbit_displacements(word, seeds, n_schedule[-1])
        estimate.inner_hull = convex_hull(inner.tolist())
        excess = max(point_polygon_distance(p, estimate.hull_vertices) for p in inner.tolist())
        estimate.diagnostics["inner_excess"] = excess
        estimate.diagnostics["inner_contained"] = excess <= moduli[-1] + 1e-9
    logger.info("rotation set estimate: %d vertices at n=%d, grid %d", len(estimate.hull_vertices), estimate.n, grid)
    return estimate


# ----------------------------------------------------------------------------
# projective convergence experiment


def one_sided_excess(points: Sequence[Point], region: Sequence[Point], eps: float) -> float:
    r"""
    How far the points leave the eps-neighbourhood of the convex region.
    """
    return max(0.0, max(point_polygon_distance(p, region) for p in points) - eps)


def best_translate(points: Sequence[Point], region: Sequence[Point], rounds: int = 40) -> Tuple[Point, float]:
    r"""
    Translate t minimizing the directed Hausdorff distance from points + t to the region.
    The objective is convex in t; a shrinking pattern search is enough.
    """
    def objective(t):
        return max(point_polygon_distance((x + t[0], y + t[1]), region) for x, y in points)

    best = (0.0, 0.0)
    value = objective(best)
    step = 1.0
    for _ in range(rounds):
        improved = False
        for dx, dy in ((step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step),
                       (step, step), (step, -step), (-step, step), (-step, -step)):
            candidate = (best[0] + dx, best[1] + dy)
            score = objective(candidate)
            if score < value - 1e-15:
                best, value, improved = candidate, score, True
        if not improved:
            step /= 2
    return best, value


@dataclass
class SchottkyRow:
    m: int
    hausdorff: float
    translate: Point
    translated_distance: float
    excess: float
    hull: List[Point]


def schottky_convergence_experiment(
    f: Word,
    g: Word,
    k: int,
    m_schedule: Sequence[int],
    n: int = 200,
    grid: int = 32,
    eps: float = 0.1,
    threads: int = 0,
    quiet: bool = True,
) -> Dict[str, object]:
    r"""
    Compares (1/m) Rot(f^k g^m) with Rot(g), both estimated, for every m of the schedule.
    Only the one-sided inclusion is measured; no two-sided convergence is asserted.
    """
    reference = rotation_set_estimate(g, [n], grid, threads=threads).hull_vertices
    rows = []
    for m in tqdm(list(m_schedule), desc="schottky", disable=quiet):
        word = Compose((Power(f, k), Power(g, m)))
        hull = scale_polygon(rotation_set_estimate(word, [n], grid, threads=threads).hull_vertices, 1.0 / m)
        t, distance = best_translate(hull, reference)
        rows.append(SchottkyRow(
            m=m,
            hausdorff=hausdorff(hull, reference),
            translate=t,
            translated_distance=distance,
            excess=one_sided_excess(translate_polygon(hull, t), reference, eps),
            hull=hull,
        ))
        logger.info("m=%d: excess %.4f, directed distance after translate %.4f", m, rows[-1].excess, distance)
    excesses = [row.excess for row in rows]
    return {
        "k": k,
        "n": n,
        "grid": grid,
        "eps": eps,
        "reference": reference,
        "rows": rows,
        "nonincreasing": all(a >= b - 1e-9 for a, b in zip(excesses, excesses[1:])),
    }
