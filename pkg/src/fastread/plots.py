"""Static recall-curve emitter: SVG for eyes, CSV for machines.

A recall curve plots relevant studies found against studies reviewed, one
polyline per simulated run.  Both renderings are plain deterministic
strings: the same results produce byte-identical files on every platform,
so plots can be diffed and cached like any other build artifact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .evaluate import SimulationResult

WIDTH = 800
HEIGHT = 500
MARGIN_LEFT = 70
MARGIN_RIGHT = 170
MARGIN_TOP = 40
MARGIN_BOTTOM = 55

PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
    "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f",
)


@dataclass(frozen=True)
class CurveSeries:
    """One run's recall curve plus the identifiers that name it."""

    treatment: str
    seed: int
    points: tuple[tuple[int, int], ...]

    @property
    def label(self) -> str:
        return f"{self.treatment} (seed {self.seed})"


def series_from_results(results) -> list[CurveSeries]:
    """Turn simulation results into plottable series, input order kept."""
    series = []
    for result in results:
        if not isinstance(result, SimulationResult):
            raise TypeError(f"expected SimulationResult, got {type(result).__name__}")
        series.append(
            CurveSeries(
                treatment=str(result.treatment),
                seed=result.seed,
                points=result.trajectory,
            )
        )
    return series


def render_csv(series: list[CurveSeries]) -> str:
    """Long-format curve table: one row per trajectory point."""
    if not series:
        raise ValueError("nothing to plot")
    lines = ["treatment,seed,reviewed,found"]
    for one in series:
        for reviewed, found in one.points:
            lines.append(f"{one.treatment},{one.seed},{reviewed},{found}")
    return "\n".join(lines) + "\n"


def nice_ticks(upper: int, count: int = 5) -> list[int]:
    """Round tick positions from 0 up to at least ``upper``.

    The step is the smallest 1/2/5 x 10^k value that covers ``upper`` in at
    most ``count`` steps, so axes stay readable at any scale.
    """
    if upper <= 0:
        return [0, 1]
    raw_step = max(upper / count, 1)
    magnitude = 10 ** math.floor(math.log10(raw_step))
    for factor in (1, 2, 5, 10):
        step = factor * magnitude
        if step * count >= upper:
            break
    top = int(math.ceil(upper / step)) * step
    return [int(step * i) for i in range(int(top / step) + 1)]


def _scale(value: float, upper: float, pixels: float) -> float:
    return value / upper * pixels if upper else 0.0


def _fmt(value: float) -> str:
    return f"{value:.2f}".rstrip("0").rstrip(".")


def render_svg(series: list[CurveSeries], title: str = "Recall curve") -> str:
    """Render all series as one SVG chart with axes and a legend.

    X is studies reviewed, Y is relevant studies found.  Colors cycle per
    distinct treatment in first-appearance order, so runs of the same
    treatment share a color.
    """
    if not series:
        raise ValueError("nothing to plot")
    x_max = max(point[0] for one in series for point in one.points)
    y_max = max(point[1] for one in series for point in one.points)
    x_ticks = nice_ticks(x_max)
    y_ticks = nice_ticks(y_max)
    x_top, y_top = x_ticks[-1], y_ticks[-1]
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def px(value: float) -> float:
        return MARGIN_LEFT + _scale(value, x_top, plot_w)

    def py(value: float) -> float:
        return HEIGHT - MARGIN_BOTTOM - _scale(value, y_top, plot_h)

    colors = {}
    for one in series:
        if one.treatment not in colors:
            colors[one.treatment] = PALETTE[len(colors) % len(PALETTE)]

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{MARGIN_LEFT + plot_w / 2:g}" y="24" text-anchor="middle" '
        f'font-size="16">{title}</text>',
    ]
    for tick in x_ticks:
        x = _fmt(px(tick))
        parts.append(
            f'<line x1="{x}" y1="{MARGIN_TOP}" x2="{x}" '
            f'y2="{HEIGHT - MARGIN_BOTTOM}" stroke="#ddd"/>'
        )
        parts.append(
            f'<text x="{x}" y="{HEIGHT - MARGIN_BOTTOM + 18}" text-anchor="middle" '
            f'font-size="11">{tick}</text>'
        )
    for tick in y_ticks:
        y = _fmt(py(tick))
        parts.append(
            f'<line x1="{MARGIN_LEFT}" y1="{y}" x2="{WIDTH - MARGIN_RIGHT}" '
            f'y2="{y}" stroke="#ddd"/>'
        )
        parts.append(
            f'<text x="{MARGIN_LEFT - 8}" y="{y}" text-anchor="end" '
            f'dominant-baseline="middle" font-size="11">{tick}</text>'
        )
    parts.append(
        f'<line x1="{MARGIN_LEFT}" y1="{HEIGHT - MARGIN_BOTTOM}" '
        f'x2="{WIDTH - MARGIN_RIGHT}" y2="{HEIGHT - MARGIN_BOTTOM}" stroke="black"/>'
    )
    parts.append(
        f'<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" '
        f'x2="{MARGIN_LEFT}" y2="{HEIGHT - MARGIN_BOTTOM}" stroke="black"/>'
    )
    parts.append(
        f'<text x="{MARGIN_LEFT + plot_w / 2:g}" y="{HEIGHT - 14}" '
        f'text-anchor="middle" font-size="13">Studies reviewed</text>'
    )
    parts.append(
        f'<text x="20" y="{MARGIN_TOP + plot_h / 2:g}" text-anchor="middle" '
        f'font-size="13" transform="rotate(-90 20 {MARGIN_TOP + plot_h / 2:g})">'
        f"Relevant studies found</text>"
    )
    for one in series:
        coords = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in one.points)
        parts.append(
            f'<polyline points="{coords}" fill="none" '
            f'stroke="{colors[one.treatment]}" stroke-width="1.5"/>'
        )
    legend_x = WIDTH - MARGIN_RIGHT + 16
    for row, (treatment, color) in enumerate(colors.items()):
        y = MARGIN_TOP + 14 + row * 20
        parts.append(
            f'<line x1="{legend_x}" y1="{y}" x2="{legend_x + 24}" y2="{y}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{legend_x + 30}" y="{y + 4}" font-size="12">{treatment}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_plot(results, out_base, title: str = "Recall curve") -> tuple[Path, Path]:
    """Write <out_base>.svg and <out_base>.csv; returns both paths."""
    series = series_from_results(results)
    base = Path(out_base)
    base.parent.mkdir(parents=True, exist_ok=True)
    svg_path = base.with_suffix(".svg")
    csv_path = base.with_suffix(".csv")
    svg_path.write_text(render_svg(series, title=title), encoding="utf-8")
    csv_path.write_text(render_csv(series), encoding="utf-8")
    return svg_path, csv_path
