"""Canonical report documents and flat grid files.

Reports are JSON objects whose key order is fixed by construction, so two
runs with the same configuration produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np


def plain(obj):
    """Recursively convert numpy scalars/arrays and tuples to JSON types."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps(document):
    return json.dumps(plain(document), indent=2, allow_nan=False) + "\n"


def grid_csv(nodes, values, names=None):
    nodes = np.asarray(nodes, dtype=float)
    names = names or [f"x{i}" for i in range(1, nodes.shape[1] + 1)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([*names, "value"])
    for node, v in zip(nodes, values):
        w.writerow([repr(float(c)) for c in node] + [repr(float(v))])
    return buf.getvalue()


def table_csv(header, columns):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in zip(*columns):
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()
