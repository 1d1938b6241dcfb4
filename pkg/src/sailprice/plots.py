"""SVG figures: scatter with trend line, bar chart, residual plot and grouped comparisons.

Output is byte-deterministic for identical specs: fixed hash salt, text kept as
``<text>`` elements, no creation date. Artists carry stable ids (``plot-area``,
``series-<i>``, ``series-<i>-bar-<j>``, ``trend-line``, ``zero-line``) so tests
can read coordinates back out of the document.
"""

from dataclasses import dataclass
from enum import Enum
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.ticker import MaxNLocator  # noqa: E402

from .errors import IoError, NonFiniteData  # noqa: E402

WIDTH_UNITS = 800
HEIGHT_UNITS = 600
PADDING = 0.05
MAX_TICKS = 10

_RC = {
    "svg.hashsalt": "sailprice",
    "svg.fonttype": "none",
    "font.family": "DejaVu Sans",
    "font.size": 11,
    "axes.titlesize": 13,
    "path.simplify": False,
}
_COLORS = ("#1f4e79", "#c0504d", "#4f8a3c", "#8064a2", "#f79646", "#4bacc6")


class FigureKind(str, Enum):
    SCATTER_TREND = "ScatterTrend"
    BAR = "Bar"
    RESIDUAL = "Residual"
    GROUPED_COMPARISON = "GroupedComparison"


@dataclass(frozen=True)
class Series:
    name: str
    points: tuple  # (x, y) pairs, or (category, value) for bar charts


@dataclass(frozen=True)
class FigureSpec:
    kind: FigureKind
    title: str
    x_label: str
    y_label: str
    series: tuple
    output_path: str

    def validate(self):
        if not self.series or not any(len(s.points) for s in self.series):
            raise NonFiniteData(f"figure {self.title!r} has no data")
        for s in self.series:
            for pt in s.points:
                values = pt[1:] if FigureKind(self.kind) is FigureKind.BAR else pt
                if not all(math.isfinite(float(v)) for v in values):
                    raise NonFiniteData(f"non-finite value in series {s.name!r}: {pt!r}")


def padded_range(values):
    """[lo, hi] widened by 5% of the span on each side."""
    lo, hi = min(values), max(values)
    span = hi - lo
    if span == 0:
        span = abs(lo) or 1.0
        return lo - 0.5 * span, hi + 0.5 * span
    return lo - PADDING * span, hi + PADDING * span


def least_squares_line(points):
    n = len(points)
    mx = sum(p[0] for p in points) / n
    my = sum(p[1] for p in points) / n
    sxx = sum((p[0] - mx) ** 2 for p in points)
    if sxx == 0:
        return 0.0, my
    slope = sum((p[0] - mx) * (p[1] - my) for p in points) / sxx
    return slope, my - slope * mx


def _new_axes(spec):
    fig = plt.figure(figsize=(WIDTH_UNITS / 72.0, HEIGHT_UNITS / 72.0), dpi=72)
    ax = fig.add_axes((0.12, 0.11, 0.83, 0.8))
    ax.patch.set_gid("plot-area")
    ax.set_title(spec.title)
    ax.set_xlabel(spec.x_label)
    ax.set_ylabel(spec.y_label)
    ax.xaxis.set_major_locator(MaxNLocator(nbins=MAX_TICKS, steps=[1, 2, 2.5, 5, 10]))
    ax.yaxis.set_major_locator(MaxNLocator(nbins=MAX_TICKS, steps=[1, 2, 2.5, 5, 10]))
    ax.grid(True, color="#dddddd", linewidth=0.6)
    ax.set_axisbelow(True)
    return fig, ax


def _xy_figure(spec, ax):
    xs = [float(p[0]) for s in spec.series for p in s.points]
    ys = [float(p[1]) for s in spec.series for p in s.points]
    kind = FigureKind(spec.kind)
    if kind is FigureKind.RESIDUAL:
        ys.append(0.0)
    xlo, xhi = padded_range(xs)
    ylo, yhi = padded_range(ys)
    for i, s in enumerate(spec.series):
        if not s.points:
            continue
        sx = [float(p[0]) for p in s.points]
        sy = [float(p[1]) for p in s.points]
        color = _COLORS[i % len(_COLORS)]
        if kind is FigureKind.GROUPED_COMPARISON:
            ax.plot(sx, sy, marker="o", markersize=3, linewidth=0.8, color=color,
                    label=s.name, gid=f"series-{i}")
        else:
            ax.scatter(sx, sy, s=9, color=color, alpha=0.7, linewidths=0,
                       label=s.name, gid=f"series-{i}")
    if kind is FigureKind.SCATTER_TREND:
        pts = [(float(p[0]), float(p[1])) for s in spec.series for p in s.points]
        slope, intercept = least_squares_line(pts)
        lo, hi = min(xs), max(xs)
        ax.plot([lo, hi], [intercept + slope * lo, intercept + slope * hi], color="#222222",
                linewidth=1.4, label=f"trend: y = {slope:.6g} x + {intercept:.6g}", gid="trend-line")
    if kind is FigureKind.RESIDUAL:
        ax.axhline(0.0, color="#222222", linewidth=1.0, gid="zero-line")
    ax.set_xlim(xlo, xhi)
    ax.set_ylim(ylo, yhi)
    if len(spec.series) > 1 or kind is FigureKind.SCATTER_TREND:
        ax.legend(loc="best", fontsize=9, frameon=False)


def _bar_figure(spec, ax):
    categories = []
    for s in spec.series:
        for cat, _ in s.points:
            if cat not in categories:
                categories.append(cat)
    k = len(spec.series)
    width = 0.8 / k
    values = [0.0]
    for i, s in enumerate(spec.series):
        lookup = {c: float(v) for c, v in s.points}
        xs = [j - 0.4 + width * (i + 0.5) for j, c in enumerate(categories) if c in lookup]
        hs = [lookup[c] for c in categories if c in lookup]
        values += hs
        bars = ax.bar(xs, hs, width=width * 0.9, color=_COLORS[i % len(_COLORS)], label=s.name)
        for j, patch in enumerate(bars.patches):
            patch.set_gid(f"series-{i}-bar-{j}")
    ax.set_xticks(range(len(categories)))
    ax.set_xticklabels([str(c) for c in categories])
    ax.set_xlim(-0.6, len(categories) - 0.4)
    ax.set_ylim(*padded_range(values))
    if k > 1:
        ax.legend(loc="best", fontsize=9, frameon=False)


def render_svg(spec: FigureSpec):
    """Write ``spec`` as a standalone SVG 1.1 document; returns the output path."""
    spec.validate()
    path = Path(spec.output_path)
    with plt.rc_context(_RC):
        fig, ax = _new_axes(spec)
        try:
            if FigureKind(spec.kind) is FigureKind.BAR:
                _bar_figure(spec, ax)
            else:
                _xy_figure(spec, ax)
            try:
                path.parent.mkdir(parents=True, exist_ok=True)
                fig.savefig(path, format="svg", metadata={"Date": None, "Creator": "sailprice"})
            except OSError as exc:
                raise IoError(f"cannot write figure {path}: {exc}") from exc
        finally:
            plt.close(fig)
    return path
