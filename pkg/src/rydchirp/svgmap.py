"""Native SVG heat maps for sweep results.

Plain rect-grid rendering with a linear color ramp; no plotting library.
Output is deterministic: identical inputs give byte-identical SVG.
"""
from __future__ import annotations

import json
import math

import numpy as np

# viridis-like ramp, linearly interpolated
_RAMP = (
    (0.267, 0.005, 0.329),
    (0.283, 0.141, 0.458),
    (0.254, 0.265, 0.530),
    (0.207, 0.372, 0.553),
    (0.164, 0.471, 0.558),
    (0.128, 0.567, 0.551),
    (0.135, 0.659, 0.518),
    (0.267, 0.749, 0.441),
    (0.478, 0.821, 0.318),
    (0.741, 0.873, 0.150),
    (0.993, 0.906, 0.144),
)
_NAN_COLOR = "#b0b0b0"


def _color(x: float) -> str:
    if math.isnan(x):
        return _NAN_COLOR
    x = min(max(x, 0.0), 1.0)
    pos = x * (len(_RAMP) - 1)
    lo = int(pos)
    hi = min(lo + 1, len(_RAMP) - 1)
    frac = pos - lo
    rgb = tuple(_RAMP[lo][c] + frac * (_RAMP[hi][c] - _RAMP[lo][c]) for c in range(3))
    return "#{:02x}{:02x}{:02x}".format(*(round(255 * v) for v in rgb))


def render_heatmap(path, x_values, y_values, values, *, title: str,
                   x_label: str, y_label: str, value_label: str,
                   vmin: float | None = None, vmax: float | None = None,
                   contours: list[np.ndarray] | None = None,
                   metadata: dict | None = None) -> None:
    """Write an SVG heat map of ``values[i, j]`` at (x_values[i], y_values[j]).

    The color scale is linear between ``vmin`` and ``vmax`` (data range by
    default); NaN cells are grey.  ``contours`` polylines are drawn in data
    coordinates; ``metadata`` is embedded verbatim in a <metadata> element.
    """
    x_values = np.asarray(x_values, dtype=float)
    y_values = np.asarray(y_values, dtype=float)
    values = np.asarray(values, dtype=float)
    nx, ny = len(x_values), len(y_values)
    if values.shape != (nx, ny):
        raise ValueError(f"values must be ({nx}, {ny}), got {values.shape}")

    finite = values[np.isfinite(values)]
    lo = vmin if vmin is not None else (float(finite.min()) if finite.size else 0.0)
    hi = vmax if vmax is not None else (float(finite.max()) if finite.size else 1.0)
    span = hi - lo if hi > lo else 1.0

    plot_w, plot_h = 480.0, 480.0
    margin_l, margin_t, margin_b = 70.0, 40.0, 55.0
    bar_w, bar_gap = 18.0, 30.0
    width = margin_l + plot_w + bar_gap + bar_w + 70.0
    height = margin_t + plot_h + margin_b

    # cell sizes; x runs left->right over x_values order, y bottom->top
    cw = plot_w / nx
    ch = plot_h / ny

    def px(i: float) -> float:
        return margin_l + i * cw

    def py(j: float) -> float:
        return margin_t + plot_h - (j + 1) * ch

    out = []
    out.append('<?xml version="1.0" encoding="UTF-8"?>')
    out.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
               f'height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}">')
    if metadata:
        out.append("<metadata>" + json.dumps(metadata, sort_keys=True) + "</metadata>")
    out.append(f'<rect width="{width:.0f}" height="{height:.0f}" fill="white"/>')
    out.append(f'<text x="{margin_l + plot_w / 2:.1f}" y="24" text-anchor="middle" '
               f'font-family="sans-serif" font-size="15">{title}</text>')

    for i in range(nx):
        for j in range(ny):
            c = _color((values[i, j] - lo) / span if not math.isnan(values[i, j]) else math.nan)
            out.append(f'<rect x="{px(i):.2f}" y="{py(j):.2f}" width="{cw + 0.5:.2f}" '
                       f'height="{ch + 0.5:.2f}" fill="{c}"/>')

    def frac_index(v: float, axis: np.ndarray) -> float:
        if axis[0] <= axis[-1]:
            return float(np.interp(v, axis, np.arange(len(axis))))
        return float(np.interp(v, axis[::-1], np.arange(len(axis))[::-1]))

    if contours:
        for line in contours:
            pts = []
            for a, b in line:
                xp = margin_l + (frac_index(a, x_values) + 0.5) * cw
                yp = margin_t + plot_h - (frac_index(b, y_values) + 0.5) * ch
                pts.append(f"{xp:.2f},{yp:.2f}")
            if len(pts) >= 2:
                out.append('<polyline points="' + " ".join(pts)
                           + '" fill="none" stroke="black" stroke-width="1.5"/>')

    # axes: min / mid / max ticks
    def fmt(v: float) -> str:
        return f"{v:.6g}"

    out.append(f'<rect x="{margin_l:.1f}" y="{margin_t:.1f}" width="{plot_w:.1f}" '
               f'height="{plot_h:.1f}" fill="none" stroke="black" stroke-width="1"/>')
    for frac in (0.0, 0.5, 1.0):
        xv = x_values[0] + frac * (x_values[-1] - x_values[0])
        xp = margin_l + frac * plot_w
        out.append(f'<text x="{xp:.1f}" y="{margin_t + plot_h + 18:.1f}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="11">{fmt(xv)}</text>')
        yv = y_values[0] + frac * (y_values[-1] - y_values[0])
        yp = margin_t + plot_h - frac * plot_h
        out.append(f'<text x="{margin_l - 8:.1f}" y="{yp + 4:.1f}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="11">{fmt(yv)}</text>')
    out.append(f'<text x="{margin_l + plot_w / 2:.1f}" y="{height - 14:.1f}" '
               f'text-anchor="middle" font-family="sans-serif" font-size="13">{x_label}</text>')
    out.append(f'<text x="18" y="{margin_t + plot_h / 2:.1f}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="13" '
               f'transform="rotate(-90 18 {margin_t + plot_h / 2:.1f})">{y_label}</text>')

    # color bar
    bar_x = margin_l + plot_w + bar_gap
    nseg = 64
    seg_h = plot_h / nseg
    for s in range(nseg):
        frac = (s + 0.5) / nseg
        yb = margin_t + plot_h - (s + 1) * seg_h
        out.append(f'<rect x="{bar_x:.1f}" y="{yb:.2f}" width="{bar_w:.1f}" '
                   f'height="{seg_h + 0.5:.2f}" fill="{_color(frac)}"/>')
    out.append(f'<rect x="{bar_x:.1f}" y="{margin_t:.1f}" width="{bar_w:.1f}" '
               f'height="{plot_h:.1f}" fill="none" stroke="black" stroke-width="1"/>')
    for frac, val in ((0.0, lo), (0.5, lo + span / 2), (1.0, hi)):
        yb = margin_t + plot_h - frac * plot_h
        out.append(f'<text x="{bar_x + bar_w + 6:.1f}" y="{yb + 4:.1f}" '
                   f'font-family="sans-serif" font-size="11">{fmt(val)}</text>')
    out.append(f'<text x="{bar_x + bar_w / 2:.1f}" y="{margin_t - 8:.1f}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="12">{value_label}</text>')
    out.append("</svg>")

    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")
