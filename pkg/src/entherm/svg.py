"""Minimal static SVG line/marker charts (no plotting library needed)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from html import escape
from pathlib import Path

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


@dataclass
class Series:
    x: np.ndarray
    y: np.ndarray
    label: str = ""
    marker: bool = False  # markers instead of a polyline
    color: str | None = None


def _finite(s: Series, logx: bool):
    x = np.asarray(s.x, float)
    y = np.asarray(s.y, float)
    keep = np.isfinite(x) & np.isfinite(y)
    if logx:
        keep &= x > 0
    return x[keep], y[keep]


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=mag * 10)
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


def render(series, title="", xlabel="", ylabel="", logx=False, width=640, height=420) -> str:
    left, right, top, bottom = 70, 20, 40, 55
    pw, ph = width - left - right, height - top - bottom
    data = [_finite(s, logx) for s in series]
    xs = np.concatenate([d[0] for d in data]) if data else np.array([])
    ys = np.concatenate([d[1] for d in data]) if data else np.array([])
    if logx and xs.size:
        xs = np.log10(xs)
    x0, x1 = (float(xs.min()), float(xs.max())) if xs.size else (0.0, 1.0)
    y0, y1 = (float(ys.min()), float(ys.max())) if ys.size else (0.0, 1.0)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.04 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + (1 - (y - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<text x="{left + pw / 2:.1f}" y="{height - 12}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {top + ph / 2:.1f})">{escape(ylabel)}</text>',
    ]
    for t in _nice_ticks(x0, x1):
        label = f"{10 ** t:g}" if logx else f"{t:g}"
        out.append(f'<line x1="{px(t):.2f}" y1="{top + ph}" x2="{px(t):.2f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px(t):.2f}" y="{top + ph + 18}" text-anchor="middle">{label}</text>')
    for t in _nice_ticks(y0, y1):
        out.append(f'<line x1="{left - 5}" y1="{py(t):.2f}" x2="{left}" y2="{py(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{py(t) + 4:.2f}" text-anchor="end">{t:g}</text>')

    for k, (s, (x, y)) in enumerate(zip(series, data)):
        color = s.color or PALETTE[k % len(PALETTE)]
        if logx:
            x = np.log10(x)
        if s.marker:
            for a, b in zip(x, y):
                out.append(f'<circle cx="{px(a):.2f}" cy="{py(b):.2f}" r="2.5" fill="none" stroke="{color}"/>')
        elif x.size:
            pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        if s.label:
            ly = top + 16 + 16 * k
            out.append(f'<text x="{left + pw - 8}" y="{ly}" text-anchor="end" fill="{color}">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def save(path: str | Path, svg: str) -> Path:
    path = Path(path)
    path.write_text(svg)
    return path
