"""Ordinary least squares and the prediction-variance function."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import InputError, RankDeficiencyError
from .terms import as_model, model_matrix

RANK_RTOL = 1e-10


@dataclass(frozen=True)
class LinearFit:
    coefficients: np.ndarray
    sigma2_hat: float
    xtx_inverse: np.ndarray
    residuals: np.ndarray

    @property
    def n_obs(self):
        return self.residuals.shape[0]

    @property
    def sse(self):
        return float(self.residuals @ self.residuals)


def check_full_rank(X, what="model matrix"):
    """Raise RankDeficiencyError unless ``X`` has full column rank.

    Singular values below ``RANK_RTOL`` times the largest are treated as zero.
    Dependent columns are identified from a column-pivoted QR.
    """
    X = np.asarray(X, dtype=float)
    p = X.shape[1]
    s = np.linalg.svd(X, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        raise RankDeficiencyError(f"{what} is identically zero", 0, range(p))
    rank = int(np.sum(s > RANK_RTOL * s[0]))
    if rank < p:
        _, _, piv = scipy.linalg.qr(X, mode="economic", pivoting=True)
        dependent = sorted(int(c) for c in piv[rank:])
        raise RankDeficiencyError(
            f"{what} has rank {rank} < {p} columns; dependent columns {dependent}",
            rank,
            dependent,
        )
    return s


def lstsq_qr(X, y):
    """Least-squares solve via thin QR; ``X`` must already be full rank."""
    Q, R = np.linalg.qr(X)
    return scipy.linalg.solve_triangular(R, Q.T @ y)


def xtx_inverse(X):
    """(X'X)^-1 from the SVD of X, symmetrised."""
    check_full_rank(X)
    _, s, vt = np.linalg.svd(np.asarray(X, dtype=float), full_matrices=False)
    inv = (vt.T / s**2) @ vt
    return 0.5 * (inv + inv.T)


def ols_fit(X, y):
    """Fit ``y = X b + e`` by least squares.

    Raises
    ------
    InputError
        Shape mismatch or fewer rows than columns.
    RankDeficiencyError
        ``X`` lacks full column rank.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise InputError(f"X has shape {X.shape} but y has length {y.shape[0]}")
    n, p = X.shape
    if n <= p:
        raise InputError(f"underdetermined system: {n} rows for {p} columns")
    check_full_rank(X)
    coef = lstsq_qr(X, y)
    resid = y - X @ coef
    return LinearFit(
        coefficients=coef,
        sigma2_hat=float(resid @ resid) / (n - p),
        xtx_inverse=xtx_inverse(X),
        residuals=resid,
    )


def coef_covariance(fit):
    return fit.sigma2_hat * fit.xtx_inverse


def prediction_variance(design, model, x):
    """Unit-variance prediction variance ``f(x)' (X'X)^-1 f(x)``.

    ``x`` may be a single point of length k or an (m, k) array; the result is
    a float or an array of length m accordingly. Multiply by the error
    variance (known or estimated) to get Var[y_hat(x)].
    """
    rows = np.asarray(getattr(design, "rows", design), dtype=float)
    k = rows.shape[1]
    spec = as_model(model, k)
    inv = xtx_inverse(model_matrix(rows, spec))
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = pts.reshape(-1, k) if pts.size else pts.reshape(0, k)
    if pts.shape[1] != k:
        raise InputError(f"point has {pts.shape[1]} coordinates, design has {k}")
    F = model_matrix(pts, spec)
    v = np.einsum("ij,jk,ik->i", F, inv, F)
    return float(v[0]) if single else v


@dataclass(frozen=True)
class SurfaceGrid:
    """Values at the nodes of a rectangular grid, row-major (first axis slowest)."""

    nodes: np.ndarray
    values: np.ndarray
    shape: tuple[int, ...]


def grid_axis(start, stop, step):
    """Inclusive arithmetic sequence from ``start`` to ``stop``."""
    if step <= 0:
        raise InputError("grid step must be positive")
    if stop < start:
        raise InputError("grid stop must not be below start")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


def grid_nodes(axes):
    """Cartesian product of per-axis ``(start, stop, step)`` triples."""
    if not axes:
        raise InputError("grid needs at least one axis")
    ticks = [grid_axis(*a) for a in axes]
    nodes = np.array(list(itertools.product(*ticks)), dtype=float)
    return nodes, tuple(len(t) for t in ticks)


def variance_surface_grid(design, model, axes):
    nodes, shape = grid_nodes(axes)
    return SurfaceGrid(nodes, prediction_variance(design, model, nodes), shape)
