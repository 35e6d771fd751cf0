"""Minimal standalone SVG 1.1 line plots (polyline + axes), no plotting dependency."""
from xml.sax.saxutils import escape

import numpy as np

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf")


def _ticks(lo, hi, n=5):
    return np.linspace(lo, hi, n)


def line_plot(series, title="", xlabel="", ylabel="", width=640, height=400, logy=False):
    """series: list of (label, x, y).  Returns the SVG document as a string."""
    ml, mr, mt, mb = 70, 20, 30, 50
    pw, ph = width - ml - mr, height - mt - mb
    xs = np.concatenate([np.asarray(s[1], float) for s in series]) if series else np.array([0, 1.0])
    ys = np.concatenate([np.asarray(s[2], float) for s in series]) if series else np.array([0, 1.0])
    if logy:
        ys = np.log10(np.maximum(np.abs(ys), 1e-300))
    x0, x1 = float(np.min(xs)), float(np.max(xs))
    y0, y1 = float(np.min(ys)), float(np.max(ys))
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    sx = lambda v: ml + (v - x0) / (x1 - x0) * pw
    sy = lambda v: mt + ph - (v - y0) / (y1 - y0) * ph
    out = [f'<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for v in _ticks(x0, x1):
        out.append(f'<text x="{sx(v):.1f}" y="{mt + ph + 16}" font-size="11" '
                   f'text-anchor="middle">{v:.3g}</text>')
    for v in _ticks(y0, y1):
        lab = f"1e{v:.2g}" if logy else f"{v:.3g}"
        out.append(f'<text x="{ml - 6}" y="{sy(v) + 4:.1f}" font-size="11" '
                   f'text-anchor="end">{lab}</text>')
    out.append(f'<text x="{ml + pw / 2}" y="{height - 10}" font-size="13" '
               f'text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{mt + ph / 2}" font-size="13" text-anchor="middle" '
               f'transform="rotate(-90 16 {mt + ph / 2})">{escape(ylabel)}</text>')
    out.append(f'<text x="{ml + pw / 2}" y="18" font-size="14" '
               f'text-anchor="middle">{escape(title)}</text>')
    for n, (label, x, y) in enumerate(series):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        if logy:
            y = np.log10(np.maximum(np.abs(y), 1e-300))
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
        c = COLORS[n % len(COLORS)]
        out.append(f'<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{ml + 8}" y="{mt + 16 + 14 * n}" font-size="11" '
                   f'fill="{c}">{escape(str(label))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write(path, *args, **kw):
    with open(path, "w") as fh:
        fh.write(line_plot(*args, **kw))
