"""
Minimal self-contained SVG rendering of periodogram matrices.

Heatmap colours run along a fixed five-stop ramp from dark blue (smallest
value) through teal and green to yellow (largest), interpolated linearly in
RGB; perceived brightness increases monotonically along the ramp. A constant
matrix maps every cell to the first stop.
"""
from __future__ import annotations

from html import escape

import numpy as np

from .core import PeriodogramMatrix

__all__ = ["COLOR_STOPS", "color_for", "line_svg", "heatmap_svg", "plot_data_csv"]

COLOR_STOPS = np.array([
    [0x26, 0x1a, 0x5c], [0x2c, 0x5f, 0x8a], [0x21, 0x91, 0x8c],
    [0x6c, 0xc2, 0x4a], [0xfd, 0xe7, 0x25]], dtype=float)

_W, _H = 640, 400
_LEFT, _RIGHT, _TOP, _BOTTOM = 70, 20, 20, 50
_LINE_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                "#8c564b", "#e377c2", "#17becf"]


def color_for(t) -> str:
    """Hex colour for ``t`` in [0, 1] on the ramp."""
    t = float(np.clip(t, 0.0, 1.0)) * (len(COLOR_STOPS) - 1)
    i = min(int(t), len(COLOR_STOPS) - 2)
    rgb = COLOR_STOPS[i] + (t - i) * (COLOR_STOPS[i + 1] - COLOR_STOPS[i])
    return "#" + "".join(f"{int(round(c)):02x}" for c in rgb)


def _frame(title, xlabel, ylabel, body, ticks):
    pw, ph = _W - _LEFT - _RIGHT, _H - _TOP - _BOTTOM
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f"<title>{escape(title)}</title>",
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        *body,
        f'<rect x="{_LEFT}" y="{_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        *ticks,
        f'<text x="{_LEFT + pw / 2:.1f}" y="{_H - 10}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="15" y="{_TOP + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 15 {_TOP + ph / 2:.1f})">{escape(ylabel)}</text>',
        "</svg>",
    ]
    return "\n".join(parts) + "\n"


def _xticks(fmin, fmax):
    pw, ph = _W - _LEFT - _RIGHT, _H - _TOP - _BOTTOM
    out = []
    for f in np.linspace(fmin, fmax, 6):
        x = _LEFT + (f - fmin) / (fmax - fmin or 1) * pw
        out.append(f'<line x1="{x:.1f}" y1="{_TOP + ph}" x2="{x:.1f}" y2="{_TOP + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{x:.1f}" y="{_TOP + ph + 18}" text-anchor="middle">{f:.3g}</text>')
    return out


def _yticks(vmin, vmax):
    ph = _H - _TOP - _BOTTOM
    out = []
    for v in np.linspace(vmin, vmax, 5):
        y = _TOP + ph - (v - vmin) / (vmax - vmin or 1) * ph
        out.append(f'<line x1="{_LEFT - 4}" y1="{y:.1f}" x2="{_LEFT}" y2="{y:.1f}" stroke="black"/>')
        out.append(f'<text x="{_LEFT - 6}" y="{y + 4:.1f}" text-anchor="end">{v:.3g}</text>')
    return out


def line_svg(pm: PeriodogramMatrix, rows=None, title="periodogram") -> str:
    """Overlay the selected rows (all by default) as polylines, one point per
    Fourier frequency."""
    rows = range(pm.levels.size) if rows is None else rows
    f = pm.freqs
    sel = pm.ordinates[list(rows)]
    vmin, vmax = 0.0, float(sel.max()) if sel.size else 1.0
    vmax = vmax if vmax > vmin else vmin + 1.0
    fmin, fmax = float(f[0]), float(f[-1])
    pw, ph = _W - _LEFT - _RIGHT, _H - _TOP - _BOTTOM
    body = []
    for k, (i, vals) in enumerate(zip(rows, sel)):
        xs = _LEFT + (f - fmin) / (fmax - fmin or 1) * pw
        ys = _TOP + ph - (vals - vmin) / (vmax - vmin) * ph
        pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
        color = _LINE_COLORS[k % len(_LINE_COLORS)]
        body.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                    f'data-level="{pm.levels[i]:.6g}" points="{pts}"/>')
        body.append(f'<text x="{_W - _RIGHT - 5}" y="{_TOP + 15 + 14 * k}" text-anchor="end" '
                    f'fill="{color}">level {pm.levels[i]:.3g}</text>')
    return _frame(title, "f (cycles per unit time)", "ordinate", body,
                  _xticks(fmin, fmax) + _yticks(vmin, vmax))


def heatmap_svg(pm: PeriodogramMatrix, title="periodogram") -> str:
    """One rectangle per (level, frequency) cell; low levels at the bottom."""
    L, K = pm.ordinates.shape
    vmin, vmax = float(pm.ordinates.min()), float(pm.ordinates.max())
    span = vmax - vmin
    pw, ph = _W - _LEFT - _RIGHT, _H - _TOP - _BOTTOM
    cw, ch = pw / K, ph / L
    body = []
    for i in range(L):
        y = _TOP + ph - (i + 1) * ch
        for j in range(K):
            t = (pm.ordinates[i, j] - vmin) / span if span > 0 else 0.0
            body.append(f'<rect x="{_LEFT + j * cw:.2f}" y="{y:.2f}" width="{cw + 0.05:.2f}" '
                        f'height="{ch + 0.05:.2f}" fill="{color_for(t)}"/>')
    ticks = []
    fmin, fmax = float(pm.freqs[0]), float(pm.freqs[-1])
    ticks += _xticks(fmin, fmax)
    for i in np.unique(np.linspace(0, L - 1, min(L, 5)).round().astype(int)):
        y = _TOP + ph - (i + 0.5) * ch
        ticks.append(f'<text x="{_LEFT - 6}" y="{y + 4:.1f}" text-anchor="end">{pm.levels[i]:.3g}</text>')
    return _frame(title, "f (cycles per unit time)", "level", body, ticks)


def plot_data_csv(pm: PeriodogramMatrix, rows=None) -> str:
    """Long-format ``level,f,value`` table of what was drawn."""
    from .fileio import fmt
    rows = range(pm.levels.size) if rows is None else rows
    lines = ["level,f,value"]
    for i in rows:
        for f, v in zip(pm.freqs, pm.ordinates[i]):
            lines.append(f"{fmt(pm.levels[i])},{fmt(f)},{fmt(v)}")
    return "\n".join(lines) + "\n"
