"""Small helpers for rendering numbers and JSON-safe structures.

Machine outputs keep the shortest round-trip float representation; human
tables show 3 significant digits.
"""

import math

import numpy as np


def sig3(x):
    """Format a float with 3 significant digits; NaN renders as '-'."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "-"
    return f"{x:.3g}"


def jsonify(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats.

    NaN and infinities become None so the result is valid strict JSON.
    """
    if isinstance(obj, dict):
        return {key: jsonify(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonify(value) for value in obj]
    if isinstance(obj, np.ndarray):
        return [jsonify(value) for value in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        return value if math.isfinite(value) else None
    if isinstance(obj, (np.integer, int)) and not isinstance(obj, bool):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def align_table(rows, header=None, right=()):
    """Render rows of strings as an aligned text table.

    ``right`` lists column indices to right-align (numbers, typically).
    """
    rows = [list(map(str, row)) for row in rows]
    if header is not None:
        rows = [list(map(str, header))] + rows
    if not rows:
        return ""
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = []
    for k, row in enumerate(rows):
        cells = []
        for i, cell in enumerate(row):
            cells.append(cell.rjust(widths[i]) if i in right else cell.ljust(widths[i]))
        lines.append("  ".join(cells).rstrip())
        if header is not None and k == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)
