"""Tiny dependency-free SVG line plots.

Just enough for the CLI's --svg flag: multi-series polylines, linear or
log axes, decade ticks, a legend.  Output is deterministic so plots can
be golden-tested like the CSVs.
"""

import math
from html import escape
from typing import Sequence, Tuple

_PALETTE = ("#1f6fb2", "#c84b27", "#3a8f4d", "#7a4fa3", "#b2861f", "#444444")
_MARGIN_LEFT = 72.0
_MARGIN_RIGHT = 18.0
_MARGIN_TOP = 34.0
_MARGIN_BOTTOM = 52.0


def _clean(xs, ys, log_x: bool, log_y: bool):
    pairs = []
    for x, y in zip(xs, ys):
        x, y = float(x), float(y)
        if not (math.isfinite(x) and math.isfinite(y)):
            continue
        if (log_x and x <= 0.0) or (log_y and y <= 0.0):
            continue
        pairs.append((x, y))
    return pairs


def _axis_range(values, log: bool) -> Tuple[float, float]:
    lo, hi = min(values), max(values)
    if log:
        lo, hi = math.log10(lo), math.log10(hi)
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    return lo, hi


def _ticks(lo: float, hi: float, log: bool):
    if log:
        first, last = math.ceil(lo - 1e-9), math.floor(hi + 1e-9)
        decades = list(range(first, last + 1))
        if not decades:
            decades = [first]
        step = max(1, math.ceil(len(decades) / 8))
        return [(d, f"1e{d:d}") for d in decades[::step]]
    span = hi - lo
    return [(lo + span * i / 4.0, f"{lo + span * i / 4.0:.4g}") for i in range(5)]


def line_plot(
    path,
    series: Sequence[Tuple[str, Sequence[float], Sequence[float]]],
    *,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    log_x: bool = False,
    log_y: bool = False,
    width: int = 640,
    height: int = 440,
) -> None:
    """Write an SVG line plot of (label, xs, ys) series to a path or handle."""
    cleaned = [(label, _clean(xs, ys, log_x, log_y)) for label, xs, ys in series]
    cleaned = [(label, pts) for label, pts in cleaned if pts]
    if not cleaned:
        raise ValueError("no plottable points (after removing nonfinite/nonpositive)")

    all_x = [p[0] for _, pts in cleaned for p in pts]
    all_y = [p[1] for _, pts in cleaned for p in pts]
    x_lo, x_hi = _axis_range(all_x, log_x)
    y_lo, y_hi = _axis_range(all_y, log_y)
    plot_w = width - _MARGIN_LEFT - _MARGIN_RIGHT
    plot_h = height - _MARGIN_TOP - _MARGIN_BOTTOM

    def px(x: float) -> float:
        v = math.log10(x) if log_x else x
        return _MARGIN_LEFT + plot_w * (v - x_lo) / (x_hi - x_lo)

    def py(y: float) -> float:
        v = math.log10(y) if log_y else y
        return _MARGIN_TOP + plot_h * (1.0 - (v - y_lo) / (y_hi - y_lo))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{_MARGIN_LEFT:.1f}" y="{_MARGIN_TOP:.1f}" width="{plot_w:.1f}" '
        f'height="{plot_h:.1f}" fill="none" stroke="#999"/>',
    ]
    if title:
        parts.append(
            f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" '
            f'font-size="14">{escape(title)}</text>'
        )

    for value, label in _ticks(x_lo, x_hi, log_x):
        x = _MARGIN_LEFT + plot_w * (value - x_lo) / (x_hi - x_lo)
        y0 = _MARGIN_TOP + plot_h
        parts.append(f'<line x1="{x:.1f}" y1="{y0:.1f}" x2="{x:.1f}" y2="{y0 + 5:.1f}" stroke="#333"/>')
        parts.append(f'<text x="{x:.1f}" y="{y0 + 18:.1f}" text-anchor="middle">{escape(label)}</text>')
    for value, label in _ticks(y_lo, y_hi, log_y):
        y = _MARGIN_TOP + plot_h * (1.0 - (value - y_lo) / (y_hi - y_lo))
        parts.append(f'<line x1="{_MARGIN_LEFT - 5:.1f}" y1="{y:.1f}" x2="{_MARGIN_LEFT:.1f}" y2="{y:.1f}" stroke="#333"/>')
        parts.append(f'<text x="{_MARGIN_LEFT - 8:.1f}" y="{y + 4:.1f}" text-anchor="end">{escape(label)}</text>')
    if xlabel:
        parts.append(
            f'<text x="{_MARGIN_LEFT + plot_w / 2:.1f}" y="{height - 12:.1f}" '
            f'text-anchor="middle">{escape(xlabel)}</text>'
        )
    if ylabel:
        y_mid = _MARGIN_TOP + plot_h / 2
        parts.append(
            f'<text x="16" y="{y_mid:.1f}" text-anchor="middle" '
            f'transform="rotate(-90 16 {y_mid:.1f})">{escape(ylabel)}</text>'
        )

    for i, (label, pts) in enumerate(cleaned):
        color = _PALETTE[i % len(_PALETTE)]
        coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in pts)
        parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        legend_y = _MARGIN_TOP + 14 + 16 * i
        legend_x = width - _MARGIN_RIGHT - 150
        parts.append(
            f'<line x1="{legend_x:.1f}" y1="{legend_y - 4:.1f}" x2="{legend_x + 22:.1f}" '
            f'y2="{legend_y - 4:.1f}" stroke="{color}" stroke-width="2"/>'
        )
        parts.append(f'<text x="{legend_x + 28:.1f}" y="{legend_y:.1f}">{escape(label)}</text>')

    parts.append("</svg>")
    text = "\n".join(parts) + "\n"
    if hasattr(path, "write"):
        path.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)
