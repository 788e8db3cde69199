from typing import List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
from matplotlib.patches import Polygon

from .curves import TorusCurve
from .rotation import PolygonEstimate
from .utils import get_logger


logger = get_logger(__name__)

# stable ids and no timestamp, so repeated runs give identical files
matplotlib.rcParams["svg.hashsalt"] = "toruslab"
SVG_METADATA = {"Date": None}


def _lattice(ax, xs: Sequence[float], ys: Sequence[float]):
    lo_x, hi_x = int(min(xs)) - 1, int(max(xs)) + 2
    lo_y, hi_y = int(min(ys)) - 1, int(max(ys)) + 2
    for x in range(lo_x, hi_x + 1):
        ax.axvline(x, color="0.85", linewidth=0.5, gid="lattice")
    for y in range(lo_y, hi_y + 1):
        ax.axhline(y, color="0.85", linewidth=0.5, gid="lattice")
    ax.axhline(0, color="0.4", linewidth=0.8, gid="axes")
    ax.axvline(0, color="0.4", linewidth=0.8, gid="axes")
    pad = 0.25
    ax.set_xlim(min(xs) - pad, max(xs) + pad)
    ax.set_ylim(min(ys) - pad, max(ys) + pad)
    ax.set_aspect("equal")


def plot_estimate(estimate: PolygonEstimate, path: str, reference: Optional[List] = None, title: str = ""):
    r"""
    Writes the hull and, if given, the reference polygon as separately labeled SVG groups.
    """
    fig, ax = plt.subplots(figsize=(5, 5))
    hull = estimate.hull_vertices
    points = list(hull) + list(reference or [])
    if len(hull) >= 3:
        ax.add_patch(Polygon(hull, closed=True, facecolor="tab:blue", alpha=0.35,
                             edgecolor="tab:blue", gid="hull", label="estimate"))
    else:
        ax.plot([p[0] for p in hull], [p[1] for p in hull], color="tab:blue", marker="o", gid="hull",
                label="estimate")
    if reference:
        ax.add_patch(Polygon(reference, closed=True, fill=False, edgecolor="tab:red", linestyle="--",
                             gid="reference", label="reference"))
    _lattice(ax, [p[0] for p in points], [p[1] for p in points])
    ax.set_title(title or f"rotation set estimate, n={estimate.n}, grid={estimate.grid}")
    ax.legend(loc="upper right")
    fig.savefig(path, format="svg", metadata=SVG_METADATA)
    plt.close(fig)
    logger.info("wrote %s", path)


def plot_curves(curves: Sequence[TorusCurve], path: str, periods: int = 1, title: str = ""):
    r"""
    Draws `periods` periods of the lift of each curve, one group per curve.
    """
    fig, ax = plt.subplots(figsize=(5, 5))
    xs, ys = [0.0, 1.0], [0.0, 1.0]
    for i, c in enumerate(curves):
        lift = [c.vertex(j) for j in range(periods * len(c.vertices) + 1)]
        px, py = [float(v.x) for v in lift], [float(v.y) for v in lift]
        ax.plot(px, py, linewidth=1.2, gid=f"curve{i}", label=f"curve {i}")
        xs += px
        ys += py
    _lattice(ax, xs, ys)
    if title:
        ax.set_title(title)
    ax.legend(loc="upper right")
    fig.savefig(path, format="svg", metadata=SVG_METADATA)
    plt.close(fig)
    logger.info("wrote %s", path)
