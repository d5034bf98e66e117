"""Minimal self-contained SVG line and scatter plots."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

__all__ = ["Series", "svg_plot"]

_COLORS = ("#1f4e99", "#c2410c", "#15803d", "#7e22ce", "#b91c1c", "#0f766e")


class Series:
    """One data set: ``style`` is ``"line"``, ``"points"`` or ``"both"``."""

    def __init__(self, x, y, label="", style="both"):
        self.x = [float(v) for v in x]
        self.y = [float(v) for v in y]
        self.label = label
        self.style = style


def _ticks(lo, hi, n=5):
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-9 * step:
        out.append(round(v, 12))
        v += step
    return out


def _fmt(v):
    return f"{v:.4g}"


def svg_plot(series, title="", xlabel="", ylabel="", logy=False, width=640, height=420) -> str:
    """Render series on shared axes and return the SVG document as text."""
    ml, mr, mt, mb = 70, 20, 36, 50
    pw, ph = width - ml - mr, height - mt - mb
    xs = [v for s in series for v in s.x]
    ys = [v for s in series for v in s.y if not logy or v > 0]
    x0, x1 = min(xs), max(xs)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if logy:
        y0, y1 = math.floor(math.log10(min(ys))), math.ceil(math.log10(max(ys)))
        if y1 == y0:
            y1 += 1
    else:
        y0, y1 = min(ys), max(ys)
        pad = 0.05 * (y1 - y0 or abs(y1) or 1)
        y0, y1 = y0 - pad, y1 + pad

    def px(x):
        return ml + (x - x0) / (x1 - x0) * pw

    def py(y):
        v = math.log10(y) if logy else y
        return mt + ph - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{px(t):.2f}" y1="{mt + ph}" x2="{px(t):.2f}" y2="{mt + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px(t):.2f}" y="{mt + ph + 18}" text-anchor="middle">{_fmt(t)}</text>')
    yt = range(int(y0), int(y1) + 1) if logy else _ticks(y0, y1)
    for t in yt:
        yy = mt + ph - (t - y0) / (y1 - y0) * ph
        label = f"1e{t}" if logy else _fmt(t)
        out.append(f'<line x1="{ml - 5}" y1="{yy:.2f}" x2="{ml}" y2="{yy:.2f}" stroke="black"/>')
        out.append(f'<text x="{ml - 8}" y="{yy + 4:.2f}" text-anchor="end">{label}</text>')
    for i, s in enumerate(series):
        c = _COLORS[i % len(_COLORS)]
        pts = [(px(x), py(y)) for x, y in zip(s.x, s.y) if not logy or y > 0]
        if s.style in ("line", "both") and len(pts) > 1:
            d = " ".join(f"{a:.2f},{b:.2f}" for a, b in pts)
            out.append(f'<polyline points="{d}" fill="none" stroke="{c}" stroke-width="1.5"/>')
        if s.style in ("points", "both"):
            out.extend(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="2.5" fill="{c}"/>' for a, b in pts)
        if s.label:
            ly = mt + 16 + 16 * i
            out.append(f'<line x1="{ml + 10}" y1="{ly - 4}" x2="{ml + 28}" y2="{ly - 4}" stroke="{c}" stroke-width="2"/>')
            out.append(f'<text x="{ml + 34}" y="{ly}">{escape(s.label)}</text>')
    out.append(f'<text x="{width / 2}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>')
    out.append(f'<text x="{ml + pw / 2}" y="{height - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(
        f'<text x="16" y="{mt + ph / 2}" text-anchor="middle" transform="rotate(-90 16 {mt + ph / 2})">'
        f"{escape(ylabel)}</text>"
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"
