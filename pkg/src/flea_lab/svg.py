"""Minimal SVG rendering for run artifacts (line plots and heatmaps).

Writing the XML directly keeps plotting out of the runtime dependency set;
the output is deliberately plain: one axes box, linear ticks, polyline
series or a rect-per-cell heatmap with a small built-in colormap.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

__all__ = ["line_plot", "heatmap"]

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 64, 16, 34, 46

# Five-stop approximation of a perceptually ordered dark-to-light map.
_CMAP = (
    (0.267, 0.005, 0.329),
    (0.229, 0.322, 0.546),
    (0.128, 0.567, 0.551),
    (0.369, 0.789, 0.383),
    (0.993, 0.906, 0.144),
)


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if not math.isfinite(lo) or not math.isfinite(hi) or lo == hi:
        return [lo]
    return list(np.linspace(lo, hi, n))


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _header(width: int, height: int, title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">'
        f"{_esc(title)}</text>",
    ]


def _axes(
    width: int,
    height: int,
    x_lo: float,
    x_hi: float,
    y_lo: float,
    y_hi: float,
    x_label: str,
    y_label: str,
) -> tuple[list[str], float, float, float, float]:
    """Axes box with tick marks; returns the fragment and the data->pixel map."""
    px0, px1 = _MARGIN_L, width - _MARGIN_R
    py0, py1 = height - _MARGIN_B, _MARGIN_T
    sx = (px1 - px0) / (x_hi - x_lo) if x_hi != x_lo else 1.0
    sy = (py1 - py0) / (y_hi - y_lo) if y_hi != y_lo else 1.0
    frag = [
        f'<rect x="{px0}" y="{py1}" width="{px1 - px0}" height="{py0 - py1}" '
        f'fill="none" stroke="black"/>'
    ]
    for xv in _ticks(x_lo, x_hi):
        px = px0 + (xv - x_lo) * sx
        frag.append(f'<line x1="{px:.1f}" y1="{py0}" x2="{px:.1f}" y2="{py0 + 5}" stroke="black"/>')
        frag.append(
            f'<text x="{px:.1f}" y="{py0 + 18}" text-anchor="middle">{_fmt(xv)}</text>'
        )
    for yv in _ticks(y_lo, y_hi):
        py = py0 + (yv - y_lo) * sy
        frag.append(f'<line x1="{px0 - 5}" y1="{py:.1f}" x2="{px0}" y2="{py:.1f}" stroke="black"/>')
        frag.append(
            f'<text x="{px0 - 8}" y="{py + 4:.1f}" text-anchor="end">{_fmt(yv)}</text>'
        )
    frag.append(
        f'<text x="{(px0 + px1) / 2:.1f}" y="{py0 + 36}" text-anchor="middle">'
        f"{_esc(x_label)}</text>"
    )
    frag.append(
        f'<text x="16" y="{(py0 + py1) / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {(py0 + py1) / 2:.1f})">{_esc(y_label)}</text>'
    )
    return frag, px0, py0, sx, sy


def line_plot(
    path: str | Path,
    series: list[tuple[np.ndarray, np.ndarray, str]],
    title: str = "",
    x_label: str = "x",
    y_label: str = "y",
    width: int = 720,
    height: int = 480,
    log_y: bool = False,
) -> Path:
    """Write a multi-series line plot; each series is (xs, ys, label)."""
    path = Path(path)
    prepared = []
    for xs, ys, label in series:
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if log_y:
            ys = np.log10(np.maximum(ys, 1e-300))
        keep = np.isfinite(xs) & np.isfinite(ys)
        prepared.append((xs[keep], ys[keep], label))
    all_x = np.concatenate([s[0] for s in prepared]) if prepared else np.array([0.0])
    all_y = np.concatenate([s[1] for s in prepared]) if prepared else np.array([0.0])
    x_lo, x_hi = float(np.min(all_x)), float(np.max(all_x))
    y_lo, y_hi = float(np.min(all_y)), float(np.max(all_y))
    if y_lo == y_hi:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    parts = _header(width, height, title)
    y_name = f"log10({y_label})" if log_y else y_label
    frag, px0, py0, sx, sy = _axes(width, height, x_lo, x_hi, y_lo, y_hi, x_label, y_name)
    parts += frag
    for i, (xs, ys, label) in enumerate(prepared):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(
            f"{px0 + (x - x_lo) * sx:.2f},{py0 + (y - y_lo) * sy:.2f}"
            for x, y in zip(xs, ys)
        )
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        if label:
            ly = _MARGIN_T + 16 * (i + 1)
            parts.append(
                f'<line x1="{width - 150}" y1="{ly - 4}" x2="{width - 130}" y2="{ly - 4}" '
                f'stroke="{color}" stroke-width="2"/>'
            )
            parts.append(f'<text x="{width - 124}" y="{ly}">{_esc(label)}</text>')
    parts.append("</svg>")
    path.write_text("\n".join(parts))
    return path


def _cmap_hex(v: float) -> str:
    """Map v in [0, 1] through the built-in colormap to a hex color."""
    v = min(1.0, max(0.0, v))
    pos = v * (len(_CMAP) - 1)
    i = min(int(pos), len(_CMAP) - 2)
    f = pos - i
    rgb = tuple(
        int(round(255 * ((1.0 - f) * _CMAP[i][k] + f * _CMAP[i + 1][k]))) for k in range(3)
    )
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def heatmap(
    path: str | Path,
    x_axis: np.ndarray,
    y_axis: np.ndarray,
    values: np.ndarray,
    title: str = "",
    x_label: str = "x",
    y_label: str = "y",
    width: int = 720,
    height: int = 560,
) -> Path:
    """Write a heatmap of values[i_y, i_x] over the two axes."""
    path = Path(path)
    x_axis = np.asarray(x_axis, dtype=float)
    y_axis = np.asarray(y_axis, dtype=float)
    values = np.asarray(values, dtype=float)
    if values.shape != (y_axis.size, x_axis.size):
        raise ValueError(
            f"values shape {values.shape} does not match (n_y={y_axis.size}, n_x={x_axis.size})"
        )
    v_lo, v_hi = float(np.min(values)), float(np.max(values))
    span = v_hi - v_lo if v_hi > v_lo else 1.0

    x_lo, x_hi = float(x_axis[0]), float(x_axis[-1])
    y_lo, y_hi = float(y_axis[0]), float(y_axis[-1])
    parts = _header(width, height, title)
    frag, px0, py0, sx, sy = _axes(width, height, x_lo, x_hi, y_lo, y_hi, x_label, y_label)
    cell_w = abs(sx) * (x_axis[1] - x_axis[0]) if x_axis.size > 1 else 4.0
    cell_h = abs(sy) * (y_axis[1] - y_axis[0]) if y_axis.size > 1 else 4.0
    for iy, yv in enumerate(y_axis):
        py = py0 + (yv - y_lo) * sy
        row = []
        for ix, xv in enumerate(x_axis):
            px = px0 + (xv - x_lo) * sx
            color = _cmap_hex((values[iy, ix] - v_lo) / span)
            row.append(
                f'<rect x="{px - cell_w / 2:.2f}" y="{py - cell_h / 2:.2f}" '
                f'width="{cell_w:.2f}" height="{cell_h:.2f}" fill="{color}"/>'
            )
        parts.append("".join(row))
    parts += frag  # draw the axes box above the cells
    parts.append("</svg>")
    path.write_text("\n".join(parts))
    return path
