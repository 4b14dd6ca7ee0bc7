"""Minimal SVG line and bar charts with no plotting dependency."""

from __future__ import annotations

from html import escape

import numpy as np

WIDTH, HEIGHT = 720, 440
MARGIN = dict(left=84, right=170, top=40, bottom=56)
COLORS = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
    "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22",
)
MAX_POINTS = 1500


def _ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    if hi <= lo:
        hi = lo + 1.0
    return np.linspace(lo, hi, n)


def _fmt(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-2:
        return f"{v:.2e}"
    return f"{v:.4g}"


class _Frame:
    def __init__(self, xlim, ylim):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        if self.x1 <= self.x0:
            self.x1 = self.x0 + 1.0
        if self.y1 <= self.y0:
            self.y1 = self.y0 + 1.0
        self.pw = WIDTH - MARGIN["left"] - MARGIN["right"]
        self.ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(self, x):
        return MARGIN["left"] + (np.asarray(x) - self.x0) / (self.x1 - self.x0) * self.pw

    def py(self, y):
        return MARGIN["top"] + (1 - (np.asarray(y) - self.y0) / (self.y1 - self.y0)) * self.ph


def _axes(frame: _Frame, title: str, xlabel: str, ylabel: str) -> list[str]:
    L, T = MARGIN["left"], MARGIN["top"]
    out = [
        f'<rect x="{L}" y="{T}" width="{frame.pw}" height="{frame.ph}" '
        'fill="none" stroke="#333" stroke-width="1"/>',
        f'<text x="{L + frame.pw / 2:.1f}" y="22" text-anchor="middle" '
        f'font-size="15">{escape(title)}</text>',
        f'<text x="{L + frame.pw / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle" '
        f'font-size="13">{escape(xlabel)}</text>',
        f'<text x="18" y="{T + frame.ph / 2:.1f}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 18 {T + frame.ph / 2:.1f})">{escape(ylabel)}</text>',
    ]
    for xv in _ticks(frame.x0, frame.x1):
        x = frame.px(xv)
        out.append(f'<line x1="{x:.1f}" y1="{T + frame.ph}" x2="{x:.1f}" '
                   f'y2="{T + frame.ph + 5}" stroke="#333"/>')
        out.append(f'<text x="{x:.1f}" y="{T + frame.ph + 19}" text-anchor="middle" '
                   f'font-size="11">{_fmt(xv)}</text>')
    for yv in _ticks(frame.y0, frame.y1):
        y = frame.py(yv)
        out.append(f'<line x1="{L - 5}" y1="{y:.1f}" x2="{L}" y2="{y:.1f}" stroke="#333"/>')
        out.append(f'<text x="{L - 8}" y="{y + 4:.1f}" text-anchor="end" '
                   f'font-size="11">{_fmt(yv)}</text>')
    return out


def _document(body: list[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">\n'
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>\n'
    )
    return head + "\n".join(body) + "\n</svg>\n"


def _thin(x: np.ndarray, y: np.ndarray):
    if x.size <= MAX_POINTS:
        return x, y
    idx = np.unique(np.linspace(0, x.size - 1, MAX_POINTS).astype(int))
    return x[idx], y[idx]


def line_chart(series, title="", xlabel="t (days)", ylabel="R(t)") -> str:
    """``series`` is a list of ``(label, x, y)`` or ``(label, x, y, style)``;
    ``style`` may be ``"dashed"``. Axes span the data extents.
    """
    xs = [np.asarray(s[1], float) for s in series]
    ys = [np.asarray(s[2], float) for s in series]
    xlim = (min(x.min() for x in xs), max(x.max() for x in xs))
    ylim = (min(0.0, min(y.min() for y in ys)), max(y.max() for y in ys))
    frame = _Frame(xlim, ylim)
    body = _axes(frame, title, xlabel, ylabel)
    for i, s in enumerate(series):
        label, style = s[0], (s[3] if len(s) > 3 else "solid")
        color = "#000000" if style == "dashed" else COLORS[i % len(COLORS)]
        x, y = _thin(xs[i], ys[i])
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(frame.px(x), frame.py(y)))
        dash = ' stroke-dasharray="6 4"' if style == "dashed" else ""
        body.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} '
                    f'points="{pts}"/>')
        ly = MARGIN["top"] + 14 + 18 * i
        lx = WIDTH - MARGIN["right"] + 12
        body.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 22}" y2="{ly}" stroke="{color}" '
                    f'stroke-width="2"{dash}/>')
        body.append(f'<text x="{lx + 28}" y="{ly + 4}" font-size="11">{escape(label)}</text>')
    return _document(body)


def bar_chart(edges, mass, title="", xlabel="R", ylabel="mass", marker=None) -> str:
    """Histogram bars over ``edges``; optional vertical ``marker = (label, x)``."""
    edges = np.asarray(edges, float)
    mass = np.asarray(mass, float)
    frame = _Frame((edges[0], edges[-1]), (0.0, float(mass.max()) * 1.05 or 1.0))
    body = _axes(frame, title, xlabel, ylabel)
    base = frame.py(0.0)
    for lo, hi, m in zip(edges[:-1], edges[1:], mass):
        if m <= 0:
            continue
        x0, x1, top = frame.px(lo), frame.px(hi), frame.py(m)
        body.append(f'<rect x="{x0:.2f}" y="{top:.2f}" width="{max(x1 - x0 - 0.5, 0.5):.2f}" '
                    f'height="{base - top:.2f}" fill="{COLORS[0]}"/>')
    if marker is not None:
        label, xv = marker
        x = frame.px(xv)
        body.append(f'<line x1="{x:.2f}" y1="{MARGIN["top"]}" x2="{x:.2f}" y2="{base:.2f}" '
                    'stroke="#d62728" stroke-dasharray="5 3"/>')
        body.append(f'<text x="{WIDTH - MARGIN["right"] + 12}" y="{MARGIN["top"] + 14}" '
                    f'font-size="11" fill="#d62728">{escape(label)}</text>')
    return _document(body)
