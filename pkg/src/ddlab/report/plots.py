"""Dependency-free SVG line plots and heatmaps for sweep results.

Output is deterministic: the only line that varies between package versions
is the ``<!-- generator: ddlab X.Y.Z -->`` comment right after the XML
declaration.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

from ..exceptions import InputError

# Perceptually ordered anchors (viridis endpoints and a few stops).
_CMAP = (
    (0.00, (68, 1, 84)),
    (0.25, (59, 82, 139)),
    (0.50, (33, 145, 140)),
    (0.75, (94, 201, 98)),
    (1.00, (253, 231, 37)),
)
_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")

_LABELS = {
    "n_features": "model size D",
    "n_samples": "train samples n",
    "noise": "label noise p",
    "steps": "GD steps t",
    "ridge_lambda": "ridge lambda",
}


def generator_comment() -> str:
    from .. import __version__

    return f"<!-- generator: ddlab {__version__} -->"


def color_for(t: float) -> str:
    """Map ``t`` in ``[0, 1]`` to a hex colour on the heatmap scale."""
    t = min(max(float(t), 0.0), 1.0)
    for (t0, c0), (t1, c1) in zip(_CMAP, _CMAP[1:]):
        if t <= t1:
            w = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
            rgb = [round(a + w * (b - a)) for a, b in zip(c0, c1)]
            return "#%02x%02x%02x" % tuple(rgb)
    return "#%02x%02x%02x" % _CMAP[-1][1]


def _num(v) -> str:
    return f"{v:.2f}"


def _tick(v) -> str:
    if v == int(v) and abs(v) < 1e6:
        return str(int(v))
    return f"{v:.3g}"


def _nice_step(span, k):
    raw = span / max(k, 1)
    mag = 10 ** math.floor(math.log10(raw))
    for m in (1, 2, 2.5, 5, 10):
        if m * mag >= raw:
            return m * mag
    return 10 * mag


class _Scale:
    def __init__(self, lo, hi, a, b, log=False):
        if log:
            lo, hi = math.log10(lo), math.log10(hi)
        if hi == lo:
            lo, hi = lo - 0.5, hi + 0.5
        self.lo, self.hi, self.a, self.b, self.log = lo, hi, a, b, log

    def __call__(self, v):
        if self.log:
            v = math.log10(v)
        return self.a + (v - self.lo) / (self.hi - self.lo) * (self.b - self.a)

    def ticks(self, k=5):
        eps = 1e-9 * max(1.0, abs(self.hi - self.lo))
        if self.log:
            lo, hi = math.floor(self.lo), math.ceil(self.hi)
            mults = (1, 2, 5) if self.hi - self.lo < 3 else (1,)
            vals = [m * 10.0**e for e in range(lo, hi + 1) for m in mults]
            return [v for v in vals if self.lo - eps <= math.log10(v) <= self.hi + eps]
        step = _nice_step(self.hi - self.lo, k)
        first = math.ceil(self.lo / step - 1e-9) * step
        return [round(v, 12) for v in np.arange(first, self.hi + eps, step)]


def _open(width, height, title):
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        generator_comment(),
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white" class="background"/>',
        f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
    ]


def render_line(result, x_axis=None, series_by=None, style=None) -> str:
    """Line plot of a metric against one sweep axis.

    Parameters
    ----------
    result : SweepResult
    x_axis : str, optional
        Coordinate on the x-axis; defaults to the result's last axis.
    series_by : str, optional
        Coordinate that splits cells into series (one polyline each).
        Defaults to the other axis of a grid result, else a single series.
    style : dict, optional
        ``metric`` (default ``"test_mse"``), ``log_x`` (default ``True``),
        ``log_y`` (``"auto"``: log when all values are positive and span more
        than two decades), ``width``, ``height``, ``title``, ``threshold``
        (default ``True``: dashed line at ``D = n``).

    Returns
    -------
    str
        SVG document.
    """
    style = dict(style or {})
    if not result.cells:
        raise InputError("cannot plot an empty result")
    metric = style.get("metric", "test_mse")
    x_axis = x_axis or result.axes[-1]
    if series_by is None and len(result.axes) > 1:
        series_by = next(a for a in result.axes if a != x_axis)
    for name in (x_axis, series_by):
        if name is not None and name not in result.cells[0].coords:
            raise InputError(f"unknown coordinate {name!r}")
    if any(metric not in c.replicates[0] for c in result.cells):
        raise InputError(f"metric {metric!r} missing from result")

    groups = {}
    for c in result.cells:
        key = c.coords[series_by] if series_by else None
        groups.setdefault(key, []).append((c.coords[x_axis], c.mean(metric), c.std(metric), c))
    for pts in groups.values():
        pts.sort(key=lambda t: t[0])

    xs = [p[0] for pts in groups.values() for p in pts]
    lows = [p[1] - p[2] for pts in groups.values() for p in pts]
    highs = [p[1] + p[2] for pts in groups.values() for p in pts]
    means = [p[1] for pts in groups.values() for p in pts]

    log_x = bool(style.get("log_x", True)) and min(xs) > 0
    log_y = style.get("log_y", "auto")
    if log_y == "auto":
        log_y = min(means) > 0 and max(means) / min(means) > 100
    log_y = bool(log_y) and min(means) > 0
    if log_y:
        floor = min(means) / 10
        lows = [max(v, floor) for v in lows]
    y_lo, y_hi = min(lows), max(highs)
    if not log_y:
        y_lo = min(y_lo, 0.0)

    width, height = int(style.get("width", 640)), int(style.get("height", 400))
    left, right, top, bottom = 70, width - 130, 30, height - 45
    sx = _Scale(min(xs), max(xs), left, right, log_x)
    sy = _Scale(y_lo, y_hi, bottom, top, log_y)
    title = style.get("title", f"{result.kind} sweep: {metric}")
    out = _open(width, height, title)

    # axes and ticks
    out.append(f'<g class="axes" stroke="black" fill="none">'
               f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}"/>'
               f'<line x1="{left}" y1="{bottom}" x2="{left}" y2="{top}"/></g>')
    out.append('<g class="ticks">')
    for v in sx.ticks():
        x = sx(v)
        out.append(f'<line x1="{_num(x)}" y1="{bottom}" x2="{_num(x)}" y2="{bottom + 4}" stroke="black"/>'
                   f'<text x="{_num(x)}" y="{bottom + 16}" text-anchor="middle">{_tick(v)}</text>')
    for v in sy.ticks():
        y = sy(v)
        out.append(f'<line x1="{left - 4}" y1="{_num(y)}" x2="{left}" y2="{_num(y)}" stroke="black"/>'
                   f'<text x="{left - 6}" y="{_num(y + 4)}" text-anchor="end">{_tick(v)}</text>')
    out.append("</g>")
    out.append(f'<text x="{(left + right) / 2:.1f}" y="{height - 10}" text-anchor="middle">'
               f'{escape(_LABELS.get(x_axis, x_axis))}{" (log)" if log_x else ""}</text>')
    out.append(f'<text x="16" y="{(top + bottom) / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {(top + bottom) / 2:.1f})">'
               f'{escape(metric)}{" (log)" if log_y else ""}</text>')

    def clamp_y(v):
        return sy(max(v, 10**sy.lo) if log_y else v)

    for i, (key, pts) in enumerate(sorted(groups.items(), key=lambda kv: (kv[0] is None, kv[0]))):
        color = _PALETTE[i % len(_PALETTE)]
        label = "mean" if key is None else f"{series_by}={_tick(key)}"
        if any(len(p[3].replicates) > 1 for p in pts):
            upper = [f"{_num(sx(p[0]))},{_num(clamp_y(p[1] + p[2]))}" for p in pts]
            lower = [f"{_num(sx(p[0]))},{_num(clamp_y(p[1] - p[2]))}" for p in reversed(pts)]
            out.append(f'<polygon class="band" points="{" ".join(upper + lower)}" '
                       f'fill="{color}" fill-opacity="0.18" stroke="none"/>')
        vertices = " ".join(f"{_num(sx(p[0]))},{_num(sy(p[1]))}" for p in pts)
        out.append(f'<polyline class="series" points="{vertices}" fill="none" stroke="{color}" '
                   f'stroke-width="1.8"><title>{escape(label)}</title></polyline>')
        ly = top + 14 * (i + 1)
        out.append(f'<g class="legend"><line x1="{right + 10}" y1="{ly - 4}" x2="{right + 28}" '
                   f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>'
                   f'<text x="{right + 32}" y="{ly}">{escape(label)}</text></g>')

        if style.get("threshold", True):
            thr = _threshold(x_axis, series_by, key, pts)
            if thr is not None and min(xs) <= thr <= max(xs):
                x = sx(thr)
                out.append(f'<line class="threshold" x1="{_num(x)}" y1="{top}" x2="{_num(x)}" '
                           f'y2="{bottom}" stroke="{color}" stroke-dasharray="4 3"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _threshold(x_axis, series_by, key, pts):
    """x position where ``D = n`` for this series, if both are defined."""
    pair = {"n_features": "n_samples", "n_samples": "n_features"}
    other = pair.get(x_axis)
    if other is None:
        return None
    if series_by == other:
        return key
    vals = {p[3].coords.get(other) for p in pts}
    if len(vals) == 1 and None not in vals:
        return vals.pop()
    return None


def render_heatmap(result, metric="test_mse", style=None) -> str:
    """Heatmap of a ``grid`` result: rows are sample sizes, columns feature
    counts. Colours use a log scale when all values are positive; the cell
    holding the largest value gets the top colour of the scale. The ``n = D``
    diagonal is drawn in index space with log interpolation between columns.
    """
    style = dict(style or {})
    if tuple(result.axes) != ("n_samples", "n_features"):
        raise InputError(f"heatmap needs a grid result over (n_samples, n_features), got axes {result.axes}")
    if not result.cells:
        raise InputError("cannot plot an empty result")
    ns = sorted({c.coords["n_samples"] for c in result.cells})
    ds = sorted({c.coords["n_features"] for c in result.cells})
    values = {(c.coords["n_samples"], c.coords["n_features"]): c.mean(metric) for c in result.cells}
    arr = np.array(list(values.values()), dtype=float)
    log = bool(style.get("log", True)) and np.all(arr > 0)
    t_vals = np.log10(arr) if log else arr
    lo, hi = float(t_vals.min()), float(t_vals.max())

    def t_of(v):
        tv = math.log10(v) if log else v
        return 1.0 if hi == lo else (tv - lo) / (hi - lo)

    width, height = int(style.get("width", 640)), int(style.get("height", 420))
    left, right, top, bottom = 70, width - 110, 30, height - 45
    cw, ch = (right - left) / len(ds), (bottom - top) / len(ns)
    out = _open(width, height, style.get("title", f"grid: {metric}"))

    out.append('<g class="cells">')
    for i, n in enumerate(ns):
        for j, D in enumerate(ds):
            if (n, D) not in values:
                continue
            v = values[(n, D)]
            x, y = left + j * cw, bottom - (i + 1) * ch
            out.append(f'<rect class="cell" x="{_num(x)}" y="{_num(y)}" width="{_num(cw)}" '
                       f'height="{_num(ch)}" fill="{color_for(t_of(v))}">'
                       f'<title>n={n} D={D} {metric}={v:.6g}</title></rect>')
    out.append("</g>")

    # n = D diagonal: fractional column index where D equals each row's n
    logd = np.log10(ds)
    pts = []
    for i, n in enumerate(ns):
        if not ds[0] <= n <= ds[-1]:
            continue
        jf = float(np.interp(math.log10(n), logd, np.arange(len(ds)))) if len(ds) > 1 else 0.0
        pts.append(f"{_num(left + (jf + 0.5) * cw)},{_num(bottom - (i + 0.5) * ch)}")
    if pts:
        out.append(f'<polyline class="diagonal" points="{" ".join(pts)}" fill="none" '
                   f'stroke="white" stroke-width="1.5" stroke-dasharray="5 3"/>')

    out.append('<g class="ticks">')
    for j, D in enumerate(ds):
        out.append(f'<text x="{_num(left + (j + 0.5) * cw)}" y="{bottom + 14}" '
                   f'text-anchor="middle" font-size="9">{D}</text>')
    for i, n in enumerate(ns):
        out.append(f'<text x="{left - 6}" y="{_num(bottom - (i + 0.5) * ch + 4)}" text-anchor="end">{n}</text>')
    out.append("</g>")
    out.append(f'<text x="{(left + right) / 2:.1f}" y="{height - 10}" text-anchor="middle">model size D</text>')
    out.append(f'<text x="16" y="{(top + bottom) / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {(top + bottom) / 2:.1f})">train samples n</text>')

    # legend: stepped colour bar, min at bottom, max at top
    lx, steps = right + 20, 32
    bar_h = (bottom - top) / steps
    out.append('<g class="legend">')
    for k in range(steps):
        t = k / (steps - 1)
        y = bottom - (k + 1) * bar_h
        out.append(f'<rect x="{lx}" y="{_num(y)}" width="16" height="{_num(bar_h + 0.5)}" fill="{color_for(t)}"/>')
    vmin, vmax = float(arr.min()), float(arr.max())
    out.append(f'<text x="{lx + 20}" y="{top + 8}">{vmax:.3g}</text>')
    out.append(f'<text x="{lx + 20}" y="{bottom}">{vmin:.3g}</text>')
    out.append(f'<text x="{lx}" y="{top - 6}">{escape(metric)}{" (log)" if log else ""}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
