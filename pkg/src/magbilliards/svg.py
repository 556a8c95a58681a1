"""Standalone SVG emission for curves and orbit portraits."""

from __future__ import annotations

import numpy as np

from .errors import EmptyPlot

_PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def export_svg(path: str, polylines=(), point_groups=(), size: int = 720) -> str:
    """Write curves (as paths) and point groups (as circle markers).

    ``polylines`` is an iterable of (name, (n, 2) array, closed) and
    ``point_groups`` of (name, (n, 2) array).  The viewBox fits the data
    bounds plus a 5% margin; the y-axis is flipped for display.  Raises
    EmptyPlot when there is no geometry.
    """
    polylines = [
        (name, np.asarray(pts, dtype=float), bool(closed))
        for name, pts, closed in polylines
        if len(pts)
    ]
    point_groups = [
        (name, np.asarray(pts, dtype=float)) for name, pts in point_groups if len(pts)
    ]
    if not polylines and not point_groups:
        raise EmptyPlot("no polylines or points to draw")

    allpts = np.vstack([p for _, p, _ in polylines] + [p for _, p in point_groups])
    lo = allpts.min(axis=0)
    hi = allpts.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    margin = 0.05 * float(span.max())
    x0, y0 = lo - margin
    w, h = (hi - lo) + 2 * margin
    scale = float(max(w, h))
    stroke = 0.002 * scale
    dot = 0.003 * scale

    # flip y: emit (x, -y) and shift the viewBox accordingly
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="{_fmt(x0)} {_fmt(-(y0 + h))} {_fmt(w)} {_fmt(h)}">',
    ]
    for k, (name, pts, closed) in enumerate(polylines):
        color = _PALETTE[k % len(_PALETTE)]
        d = "M " + " L ".join(f"{_fmt(p[0])},{_fmt(-p[1])}" for p in pts)
        if closed:
            d += " Z"
        lines.append(
            f'  <path id="{name}" d="{d}" fill="none" stroke="{color}" '
            f'stroke-width="{_fmt(stroke)}"/>'
        )
    for k, (name, pts) in enumerate(point_groups):
        color = _PALETTE[k % len(_PALETTE)]
        lines.append(f'  <g id="{name}" fill="{color}">')
        for p in pts:
            lines.append(
                f'    <circle cx="{_fmt(p[0])}" cy="{_fmt(-p[1])}" r="{_fmt(dot)}"/>'
            )
        lines.append("  </g>")
    lines.append("</svg>")
    text = "\n".join(lines) + "\n"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return path
