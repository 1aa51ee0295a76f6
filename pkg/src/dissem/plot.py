"""Minimal standalone SVG scatter plots: simulation markers plus analytic lines."""

from __future__ import annotations

import math
from collections import defaultdict
from pathlib import Path
from xml.sax.saxutils import escape

METRICS = {
    "pn": "P_n",
    "pm": "P_m",
    "zd": "Z_D,GCC_G",
    "pt": "P_t",
}
_PARAM_LABEL = {"poisson": "z", "powerlaw": "tau"}
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")
_MARKERS = ("circle", "square", "diamond", "triangle")

W, H = 640, 440
LEFT, RIGHT, TOP, BOTTOM = 70, 150, 30, 55


def _span(values):
    lo, hi = min(values), max(values)
    if hi == lo:
        pad = abs(lo) * 0.1 or 1.0
        return lo - pad, hi + pad
    pad = (hi - lo) * 0.05
    return lo - pad, hi + pad


def _ticks(lo, hi, count=6):
    step = (hi - lo) / (count - 1)
    mag = 10 ** math.floor(math.log10(step))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= step), default=step)
    first = math.ceil(lo / step) * step
    out, t = [], first
    while t <= hi + 1e-12 * abs(hi):
        out.append(round(t, 12))
        t += step
    return out


def _marker(kind, x, y, color):
    r = 4
    if kind == "circle":
        return f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r}" fill="{color}"/>'
    if kind == "square":
        return f'<rect x="{x - r:.2f}" y="{y - r:.2f}" width="{2 * r}" height="{2 * r}" fill="{color}"/>'
    if kind == "diamond":
        pts = f"{x:.2f},{y - r - 1:.2f} {x + r + 1:.2f},{y:.2f} {x:.2f},{y + r + 1:.2f} {x - r - 1:.2f},{y:.2f}"
    else:
        pts = f"{x:.2f},{y - r - 1:.2f} {x + r + 1:.2f},{y + r:.2f} {x - r - 1:.2f},{y + r:.2f}"
    return f'<polygon points="{pts}" fill="{color}"/>'


def _num(v):
    return None if v is None or (isinstance(v, float) and math.isnan(v)) else float(v)


def render_svg(rows, metric: str) -> str:
    if metric not in METRICS:
        raise ValueError(f"unsupported metric {metric!r}; choose from {', '.join(METRICS)}")
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to plot")
    models = {r.model for r in rows}
    if len(models) != 1:
        raise ValueError(f"rows mix model families: {sorted(models)}")
    model = models.pop()

    series = defaultdict(list)  # (heuristic, alpha) -> [(param, sim, se, analytic)]
    for r in rows:
        sim = _num(getattr(r, metric))
        se = _num(getattr(r, metric + "_se")) or 0.0
        series[(r.heuristic, r.alpha)].append((r.param, sim, se, _num(getattr(r, metric + "_analytic"))))
    for pts in series.values():
        pts.sort()

    xs = [p[0] for pts in series.values() for p in pts]
    ys = [v for pts in series.values() for p in pts for v in (p[1], p[3]) if v is not None]
    if not ys:
        ys = [0.0]
    x0, x1 = _span(xs)
    y0, y1 = _span(ys)
    pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM

    def sx(x):
        return LEFT + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return TOP + (1.0 - (y - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" '
        'font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        X = sx(t)
        out.append(f'<line x1="{X:.2f}" y1="{TOP + ph}" x2="{X:.2f}" y2="{TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X:.2f}" y="{TOP + ph + 18}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y0, y1):
        Y = sy(t)
        out.append(f'<line x1="{LEFT - 5}" y1="{Y:.2f}" x2="{LEFT}" y2="{Y:.2f}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 8}" y="{Y + 4:.2f}" text-anchor="end">{t:g}</text>')
    out.append(f'<text x="{LEFT + pw / 2}" y="{H - 12}" text-anchor="middle">'
               f'{_PARAM_LABEL.get(model, "param")}</text>')
    out.append(f'<text x="18" y="{TOP + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 18 {TOP + ph / 2})">{escape(METRICS[metric])}</text>')

    heuristics = sorted({h for h, _ in series})
    for i, key in enumerate(sorted(series)):
        h, alpha = key
        color = _COLORS[i % len(_COLORS)]
        shape = _MARKERS[heuristics.index(h) % len(_MARKERS)]
        pts = series[key]
        line = [(sx(p[0]), sy(p[3])) for p in pts if p[3] is not None]
        if len(line) >= 2:
            path = " ".join(f"{x:.2f},{y:.2f}" for x, y in line)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for param, sim, se, _ in pts:
            if sim is None:
                continue
            X, Y = sx(param), sy(sim)
            if se > 0:
                out.append(f'<line x1="{X:.2f}" y1="{sy(sim - se):.2f}" x2="{X:.2f}" '
                           f'y2="{sy(sim + se):.2f}" stroke="{color}"/>')
            out.append(_marker(shape, X, Y, color))
        ly = TOP + 10 + 18 * i
        out.append(_marker(shape, W - RIGHT + 18, ly, color))
        out.append(f'<text x="{W - RIGHT + 28}" y="{ly + 4}">{escape(h)} a={alpha:g}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(rows, metric: str, path) -> Path:
    """Write one SVG for ``metric`` (pn, pm, zd or pt)."""
    path = Path(path)
    path.write_text(render_svg(rows, metric), encoding="utf-8")
    return path
