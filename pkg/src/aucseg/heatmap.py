"""Self-contained SVG heatmaps for matrix reports.

No plotting dependency: the SVG is assembled directly so the output is a
single deterministic file. Cells use a white-to-blue sequential scale
over the finite values; NaN cells (crosses with no pairs) render gray.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

from .formatting import sig3

CELL = 64
EMPTY_FILL = "#cccccc"
LOW = (255, 255, 255)
HIGH = (8, 48, 107)


def _fill(value, lo, hi):
    if math.isnan(value):
        return EMPTY_FILL, "#333333"
    t = 0.5 if hi == lo else (value - lo) / (hi - lo)
    r, g, b = (round(a + t * (z - a)) for a, z in zip(LOW, HIGH))
    text = "#ffffff" if t > 0.55 else "#1a1a1a"
    return f"#{r:02x}{g:02x}{b:02x}", text


def heatmap_svg(values, row_labels, col_labels, row_axis="", col_axis="",
                title=""):
    """Render a 2-D array as an annotated SVG heatmap string."""
    values = np.asarray(values, dtype=np.float64)
    rows, cols = values.shape
    finite = values[np.isfinite(values)]
    lo = float(finite.min()) if finite.size else 0.0
    hi = float(finite.max()) if finite.size else 1.0

    left = 18 + 8 * max((len(str(l)) for l in row_labels), default=1)
    top = 46 + 8 * 2
    width = left + cols * CELL + 12
    height = top + rows * CELL + 30

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" font-family="Helvetica, Arial, sans-serif">',
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    if title:
        parts.append(
            f'<text x="{width / 2:.0f}" y="20" font-size="14" '
            f'text-anchor="middle">{escape(title)}</text>'
        )
    if col_axis:
        parts.append(
            f'<text x="{left + cols * CELL / 2:.0f}" y="38" font-size="11" '
            f'text-anchor="middle" fill="#555555">{escape(str(col_axis))}</text>'
        )
    if row_axis:
        cy = top + rows * CELL / 2
        parts.append(
            f'<text x="12" y="{cy:.0f}" font-size="11" text-anchor="middle" '
            f'fill="#555555" transform="rotate(-90 12 {cy:.0f})">'
            f'{escape(str(row_axis))}</text>'
        )
    for j, label in enumerate(col_labels):
        x = left + j * CELL + CELL / 2
        parts.append(
            f'<text x="{x:.0f}" y="{top - 6}" font-size="11" '
            f'text-anchor="middle">{escape(str(label))}</text>'
        )
    for i, label in enumerate(row_labels):
        y = top + i * CELL + CELL / 2 + 4
        parts.append(
            f'<text x="{left - 6}" y="{y:.0f}" font-size="11" '
            f'text-anchor="end">{escape(str(label))}</text>'
        )
    for i in range(rows):
        for j in range(cols):
            value = float(values[i, j])
            fill, text_fill = _fill(value, lo, hi)
            x = left + j * CELL
            y = top + i * CELL
            parts.append(
                f'<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" '
                f'fill="{fill}" stroke="#ffffff"/>'
            )
            label = "-" if math.isnan(value) else sig3(value)
            parts.append(
                f'<text x="{x + CELL / 2:.0f}" y="{y + CELL / 2 + 4:.0f}" '
                f'font-size="12" text-anchor="middle" fill="{text_fill}">'
                f'{escape(label)}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
