"""Observed datasets and CSV ingestion."""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass

import numpy as np

from .exceptions import InputError


@dataclass(frozen=True)
class Dataset:
    """Factor settings ``X`` (natural units, strictly positive) and responses ``y``.

    Rows are 1-based in error messages to match the data file.
    """

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        y = np.array(self.y, dtype=float).ravel()
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.shape[0] != y.shape[0]:
            raise InputError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
        if X.shape[0] == 0:
            raise InputError("dataset is empty")
        bad = np.argwhere(~(X > 0))
        if bad.size:
            row, col = bad[0]
            raise InputError(f"x{col + 1} must be positive (row {row + 1})")
        bad_y = np.flatnonzero(~(y > 0))
        if bad_y.size:
            raise InputError(f"y must be positive (row {bad_y[0] + 1})")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n_rows(self):
        return self.X.shape[0]

    @property
    def k(self):
        return self.X.shape[1]

    def take(self, indices):
        indices = np.asarray(indices, dtype=int)
        return Dataset(self.X[indices], self.y[indices])


_FACTOR = re.compile(r"^x(\d+)$")


def ingest_csv(path, response="y"):
    """Read columns ``x1..xk`` and the response column (case-insensitive).

    Extra columns are ignored, so a file holding several responses can be
    fitted one response at a time.
    """
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot open {path}: {exc.strerror}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: file is empty") from None
        header = [h.strip().lower() for h in header]
        factors = {}
        for pos, name in enumerate(header):
            m = _FACTOR.match(name)
            if m:
                factors[int(m.group(1))] = pos
        if not factors:
            raise InputError(f"{path}: no x1..xk columns in header {header}")
        k = max(factors)
        missing = [f"x{i}" for i in range(1, k + 1) if i not in factors]
        if response.lower() not in header:
            missing.append(response)
        if missing:
            raise InputError(f"{path}: missing column(s) {', '.join(missing)}")
        cols = [factors[i] for i in range(1, k + 1)] + [header.index(response.lower())]
        names = [f"x{i}" for i in range(1, k + 1)] + [response]

        values = []
        for rownum, rec in enumerate(reader, start=1):
            if not rec or all(not f.strip() for f in rec):
                continue
            parsed = []
            for name, pos in zip(names, cols):
                raw = rec[pos].strip() if pos < len(rec) else ""
                try:
                    parsed.append(float(raw))
                except ValueError:
                    raise InputError(
                        f"{name} is not a number: {raw!r} (row {rownum})"
                    ) from None
            values.append(parsed)
    if not values:
        raise InputError(f"{path}: no data rows")
    arr = np.array(values)
    return Dataset(arr[:, :k], arr[:, k])
