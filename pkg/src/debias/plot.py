"""Tiny dependency-free SVG scatter plot (estimate against cost, one colour per method)."""
from __future__ import annotations

from typing import Mapping, Optional

import numpy as np

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
_W, _H, _PAD = 640, 420, 60


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    return list(np.linspace(lo, hi, n))


def scatter_svg(
    series: Mapping[str, tuple],
    xlabel: str = "cost",
    ylabel: str = "estimate",
    hline: Optional[float] = None,
    vline: Optional[float] = None,
    log_x: bool = False,
) -> str:
    """Render ``{name: (x, y)}`` as an SVG document string."""
    xs = np.concatenate([np.asarray(v[0], float) for v in series.values()] or [np.zeros(1)])
    ys = np.concatenate([np.asarray(v[1], float) for v in series.values()] or [np.zeros(1)])
    ok = np.isfinite(xs) & np.isfinite(ys)
    if log_x:
        ok &= xs > 0
    xs, ys = xs[ok], ys[ok]
    tx = np.log10 if log_x else (lambda a: np.asarray(a, float))
    extra_y = [hline] if hline is not None else []
    extra_x = [vline] if vline is not None else []
    x_all = tx(np.concatenate([xs, extra_x])) if xs.size or extra_x else np.zeros(1)
    y_all = np.concatenate([ys, extra_y]) if ys.size or extra_y else np.zeros(1)
    x_lo, x_hi = float(x_all.min()), float(x_all.max())
    y_lo, y_hi = float(y_all.min()), float(y_all.max())
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 1, x_hi + 1
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 1, y_hi + 1

    def px(x):
        return _PAD + (tx(x) - x_lo) / (x_hi - x_lo) * (_W - 2 * _PAD)

    def py(y):
        return _H - _PAD - (np.asarray(y, float) - y_lo) / (y_hi - y_lo) * (_H - 2 * _PAD)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" font-family="sans-serif" font-size="11">',
           f'<rect width="{_W}" height="{_H}" fill="white"/>',
           f'<line x1="{_PAD}" y1="{_H - _PAD}" x2="{_W - _PAD}" y2="{_H - _PAD}" stroke="black"/>',
           f'<line x1="{_PAD}" y1="{_PAD}" x2="{_PAD}" y2="{_H - _PAD}" stroke="black"/>']
    for t in _ticks(x_lo, x_hi):
        x = _PAD + (t - x_lo) / (x_hi - x_lo) * (_W - 2 * _PAD)
        label = f"{10 ** t:.3g}" if log_x else f"{t:.3g}"
        out.append(f'<text x="{x:.1f}" y="{_H - _PAD + 15}" text-anchor="middle">{label}</text>')
    for t in _ticks(y_lo, y_hi):
        y = float(py(t))
        out.append(f'<text x="{_PAD - 6}" y="{y + 4:.1f}" text-anchor="end">{t:.3g}</text>')
    out.append(f'<text x="{_W / 2}" y="{_H - 15}" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="15" y="{_H / 2}" text-anchor="middle" transform="rotate(-90 15 {_H / 2})">{ylabel}</text>')
    if hline is not None:
        y = float(py(hline))
        out.append(f'<line x1="{_PAD}" y1="{y:.1f}" x2="{_W - _PAD}" y2="{y:.1f}" stroke="gray" stroke-dasharray="4 3"/>')
    if vline is not None and (not log_x or vline > 0):
        x = float(px(vline))
        out.append(f'<line x1="{x:.1f}" y1="{_PAD}" x2="{x:.1f}" y2="{_H - _PAD}" stroke="gray" stroke-dasharray="4 3"/>')

    for idx, (name, (sx, sy)) in enumerate(series.items()):
        colour = _PALETTE[idx % len(_PALETTE)]
        sx, sy = np.asarray(sx, float), np.asarray(sy, float)
        keep = np.isfinite(sx) & np.isfinite(sy) & ((sx > 0) if log_x else True)
        for x, y in zip(px(sx[keep]), py(sy[keep])):
            out.append(f'<circle cx="{x:.1f}" cy="{y:.1f}" r="2.2" fill="{colour}" fill-opacity="0.6"/>')
        out.append(f'<text x="{_W - _PAD + 5}" y="{_PAD + 14 * idx}" fill="{colour}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_scatter_svg(path, series, **kw) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(scatter_svg(series, **kw))
