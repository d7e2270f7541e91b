"""SVG renderings of covering levels: enclosure geometry plus sample points.

2-D systems draw the level-n enclosure circles and a deterministic point
sample; 1-D systems draw stacked interval bars for every level up to n.
Output is byte-stable across runs: the SVG hash salt is pinned and the date
metadata is suppressed, so figures can be checksummed in regression tests.
"""

from __future__ import annotations

import matplotlib
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure
from matplotlib.patches import Circle, Rectangle

from . import words as wd
from .attractor import IFSystem, build_level, level_points
from .errors import RenderError

matplotlib.rcParams["svg.hashsalt"] = "selfsim"

_POINT_COLOR = "#1a1a2e"
_LEVEL_COLOR = "#4361ee"


def render_levels(ifs: IFSystem, n: int, path: str, budget: int = wd.DEFAULT_BUDGET) -> str:
    """Write one SVG for level n (1-D: all levels 1..n); returns the path."""
    if ifs.dim > 2:
        raise RenderError(f"rendering supports d <= 2, got d = {ifs.dim}")
    if n < 1:
        raise RenderError("level must be >= 1")
    wd.level_size(ifs.k, n, budget)
    fig = Figure(figsize=(7.0, 5.0))
    FigureCanvasSVG(fig)
    ax = fig.add_subplot(1, 1, 1)
    if ifs.dim == 1:
        _render_1d(ifs, n, ax, budget)
    else:
        _render_2d(ifs, n, ax, budget)
    title = ifs.label or "ifs"
    ax.set_title(f"{title}: level {n}")
    fig.savefig(path, format="svg", metadata={"Date": None})
    return path


def _render_1d(ifs: IFSystem, n: int, ax, budget: int) -> None:
    for level in range(1, n + 1):
        pieces = build_level(ifs, level, budget).pieces
        for idx, piece in enumerate(pieces):
            center = float(piece.enclosure.center[0])
            radius = piece.enclosure.radius
            bar = Rectangle(
                (center - radius, level - 0.35),
                2.0 * radius,
                0.7,
                facecolor=_LEVEL_COLOR,
                edgecolor="none",
                alpha=0.55,
                gid=f"interval-L{level}-{idx}",
            )
            ax.add_patch(bar)
    depth = _sample_depth(ifs, n, budget)
    pts = level_points(ifs, depth, budget=budget)
    ax.plot(
        pts[:, 0],
        [0.3] * len(pts),
        linestyle="none",
        marker=".",
        markersize=1.5,
        color=_POINT_COLOR,
        gid="sample-points",
    )
    ax.set_ylim(0, n + 1)
    ax.set_ylabel("level")
    ax.set_yticks(list(range(1, n + 1)))


def _render_2d(ifs: IFSystem, n: int, ax, budget: int) -> None:
    pieces = build_level(ifs, n, budget).pieces
    for idx, piece in enumerate(pieces):
        circ = Circle(
            tuple(float(v) for v in piece.enclosure.center),
            piece.enclosure.radius,
            facecolor="none",
            edgecolor=_LEVEL_COLOR,
            linewidth=0.6,
            gid=f"enclosure-L{n}-{idx}",
        )
        ax.add_patch(circ)
    depth = _sample_depth(ifs, n, budget)
    pts = level_points(ifs, depth, budget=budget)
    ax.plot(
        pts[:, 0],
        pts[:, 1],
        linestyle="none",
        marker=".",
        markersize=1.0,
        color=_POINT_COLOR,
        gid="sample-points",
    )
    ax.set_aspect("equal")
    ball = ifs.root_ball
    pad = 0.08 * ball.radius
    ax.set_xlim(ball.center[0] - ball.radius - pad, ball.center[0] + ball.radius + pad)
    ax.set_ylim(ball.center[1] - ball.radius - pad, ball.center[1] + ball.radius + pad)


def _sample_depth(ifs: IFSystem, n: int, budget: int) -> int:
    depth = n + 2
    cap = min(budget, 30_000)
    while depth > 1 and ifs.k**depth > cap:
        depth -= 1
    return depth
