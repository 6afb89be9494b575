"""Minimal native SVG line plots with optional log axes."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

from .errors import InputError

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 160, 30, 50


def _tf(v: float, log: bool) -> float:
    return math.log10(v) if log else v


def line_plot(series: dict, title: str = "", xlabel: str = "", ylabel: str = "",
              logx: bool = True, logy: bool = True) -> str:
    """SVG text with one polyline per ``name -> (xs, ys)``; non-plottable points are dropped."""
    pts = {}
    for name, (xs, ys) in series.items():
        keep = [(_tf(x, logx), _tf(y, logy)) for x, y in zip(xs, ys)
                if x is not None and y is not None and math.isfinite(x) and math.isfinite(y)
                and (x > 0 or not logx) and (y > 0 or not logy)]
        if keep:
            pts[name] = keep
    if not pts:
        raise InputError("nothing to plot")
    allx = [p[0] for v in pts.values() for p in v]
    ally = [p[1] for v in pts.values() for p in v]
    x0, x1 = min(allx), max(allx)
    y0, y1 = min(ally), max(ally)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def sx(v):
        return LEFT + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return TOP + ph - (v - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'font-family="sans-serif" font-size="12">',
           f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
           f'<text x="{WIDTH / 2:.1f}" y="18" text-anchor="middle">{escape(title)}</text>',
           f'<text x="{LEFT + pw / 2:.1f}" y="{HEIGHT - 10}" text-anchor="middle">{escape(xlabel)}</text>',
           f'<text x="15" y="{TOP + ph / 2:.1f}" transform="rotate(-90 15 {TOP + ph / 2:.1f})" '
           f'text-anchor="middle">{escape(ylabel)}</text>']
    for v, axis in ((x0, "x"), (x1, "x"), (y0, "y"), (y1, "y")):
        label = f"1e{v:.2g}" if (logx if axis == "x" else logy) else f"{v:.3g}"
        if axis == "x":
            out.append(f'<text x="{sx(v):.1f}" y="{TOP + ph + 16}" text-anchor="middle">{label}</text>')
        else:
            out.append(f'<text x="{LEFT - 6}" y="{sy(v) + 4:.1f}" text-anchor="end">{label}</text>')
    for i, (name, p) in enumerate(pts.items()):
        color = COLORS[i % len(COLORS)]
        coords = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in p)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{coords}"/>')
        ly = TOP + 14 + 18 * i
        out.append(f'<line x1="{WIDTH - RIGHT + 10}" y1="{ly}" x2="{WIDTH - RIGHT + 30}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{WIDTH - RIGHT + 36}" y="{ly + 4}">{escape(str(name))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
