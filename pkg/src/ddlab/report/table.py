"""Fixed-width text summaries of sweep results."""

from __future__ import annotations

from ..sweep import BASE_METRICS, COORDS, locate_peak

TABLE_COLUMNS = COORDS + ("reps",) + tuple(f"{m}_{s}" for m in BASE_METRICS for s in ("mean", "std"))


def _cell_text(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def summary_rows(result):
    rows = []
    for c in result.cells:
        row = [_cell_text(c.coords.get(k)) for k in COORDS] + [str(len(c.replicates))]
        for m in BASE_METRICS:
            present = all(r.get(m) is not None for r in c.replicates)
            row += [_cell_text(c.mean(m)), _cell_text(c.std(m))] if present else ["-", "-"]
        rows.append(row)
    return rows


def _peaks(result, metric):
    """One ``(label, Peak)`` per curve along the result's last axis."""
    x_axis = result.axes[-1]
    if len(result.axes) == 1:
        curves = [("", result.curve(x_axis, metric))]
    else:
        outer = result.axes[0]
        keys = sorted({c.coords[outer] for c in result.cells})
        curves = [(f"{outer}={k} ", result.curve(x_axis, metric, **{outer: k})) for k in keys]
    out = []
    for label, curve in curves:
        peak = locate_peak(curve)
        if peak is not None:
            out.append((label, x_axis, peak))
    return out


def summary_table(result, metric="test_mse") -> str:
    """Text table with one row per cell and one ``peak`` line per curve on
    which :func:`ddlab.sweep.locate_peak` fires for ``metric``."""
    rows = summary_rows(result)
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(TABLE_COLUMNS)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(TABLE_COLUMNS, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in rows]
    for label, x_axis, peak in _peaks(result, metric):
        lines.append(f"peak: {label}{metric} max at {x_axis}={_cell_text(peak.x)} "
                     f"(smoothed {peak.height:.6g})")
    return "\n".join(lines) + "\n"
