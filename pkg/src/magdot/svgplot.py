"""Hand-rolled SVG line plots: axes, ticks, legend, polylines.

Keeps figure reproduction free of plotting-library dependencies; output is
deterministic text, so identical runs give identical files.
"""

from __future__ import annotations

import math

__all__ = ["line_plot_svg"]

_PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
    "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2",
)

_W, _H = 860, 560
_ML, _MR, _MT, _MB = 70, 160, 40, 55


def _ticks(lo: float, hi: float, n: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(n - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if mag * mult >= raw:
            step = mag * mult
            break
    start = math.ceil(lo / step) * step
    out = []
    x = start
    while x <= hi + 1e-12 * abs(hi):
        out.append(0.0 if abs(x) < 1e-15 else x)
        x += step
    return out


def line_plot_svg(path: str, curves, title: str = "",
                  xlabel: str = "", ylabel: str = "") -> None:
    """Write a polyline plot: curves is a list of (label, xs, ys)."""
    xs_all = [x for _, xs, _ in curves for x in xs]
    ys_all = [y for _, _, ys in curves for y in ys]
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    if y_lo > 0:
        y_lo = 0.0
    pad = 0.04 * (y_hi - y_lo or 1.0)
    y_hi += pad
    pw = _W - _ML - _MR
    ph = _H - _MT - _MB

    def px(x):
        return _ML + pw * (x - x_lo) / (x_hi - x_lo)

    def py(y):
        return _MT + ph * (1.0 - (y - y_lo) / (y_hi - y_lo))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" fill="none" '
        'stroke="black" stroke-width="1"/>',
    ]
    for xt in _ticks(x_lo, x_hi):
        xp = px(xt)
        parts.append(f'<line x1="{xp:.2f}" y1="{_MT + ph}" x2="{xp:.2f}" '
                     f'y2="{_MT + ph + 5}" stroke="black"/>')
        parts.append(f'<text x="{xp:.2f}" y="{_MT + ph + 20}" font-size="12" '
                     f'text-anchor="middle">{xt:.3g}</text>')
    for yt in _ticks(y_lo, y_hi):
        yp = py(yt)
        parts.append(f'<line x1="{_ML - 5}" y1="{yp:.2f}" x2="{_ML}" '
                     f'y2="{yp:.2f}" stroke="black"/>')
        parts.append(f'<text x="{_ML - 9}" y="{yp + 4:.2f}" font-size="12" '
                     f'text-anchor="end">{yt:.3g}</text>')
    if title:
        parts.append(f'<text x="{_ML + pw / 2}" y="{_MT - 14}" font-size="15" '
                     f'text-anchor="middle">{title}</text>')
    if xlabel:
        parts.append(f'<text x="{_ML + pw / 2}" y="{_H - 14}" font-size="13" '
                     f'text-anchor="middle">{xlabel}</text>')
    if ylabel:
        parts.append(f'<text x="18" y="{_MT + ph / 2}" font-size="13" '
                     f'text-anchor="middle" transform="rotate(-90 18 '
                     f'{_MT + ph / 2})">{ylabel}</text>')
    for i, (label, xs, ys) in enumerate(curves):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     'stroke-width="1.5"/>')
        ly = _MT + 16 + 18 * i
        lx = _ML + pw + 12
        parts.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" '
                     f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{lx + 28}" y="{ly}" font-size="12">{label}</text>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
