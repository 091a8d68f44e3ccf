"""Factorial and central composite designs and their variance properties.

All coordinates here are coded units. The property checks combine the
moment conditions of a second-order design (``b**2 == N*c`` for
orthogonality, ``d == 2*c`` for rotatability) with a direct numerical probe
of the prediction variance on spheres about the design centre.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InputError
from .linear import check_full_rank, prediction_variance
from .terms import as_model, model_matrix

CUBE, AXIAL, CENTER = "cube", "axial", "center"
KINDS = (CUBE, AXIAL, CENTER)

MOMENT_RTOL = 1e-9
ROTATABILITY_TOL = 1e-8
UNIFORM_PRECISION_RTOL = 0.05
PROBE_POINTS = 360


@dataclass(frozen=True)
class Design:
    """Coded design matrix with a point-kind tag per row."""

    k: int
    rows: np.ndarray
    kinds: tuple[str, ...]

    def __post_init__(self):
        rows = np.array(self.rows, dtype=float)
        if rows.ndim == 1:
            rows = rows.reshape(-1, self.k)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "kinds", tuple(self.kinds))
        rows.setflags(write=False)
        if self.k < 1:
            raise InputError("factor count k must be >= 1")
        if rows.shape[1] != self.k:
            raise InputError(f"rows have {rows.shape[1]} coordinates, expected {self.k}")
        if len(self.kinds) != rows.shape[0]:
            raise InputError("need exactly one kind tag per row")
        for i, (row, kind) in enumerate(zip(rows, self.kinds)):
            if kind not in KINDS:
                raise InputError(f"row {i}: unknown kind {kind!r}")
            if kind == CENTER and np.any(row != 0):
                raise InputError(f"row {i}: center rows must be all zeros")
            if kind == AXIAL and np.count_nonzero(row) != 1:
                raise InputError(f"row {i}: axial rows have exactly one nonzero coordinate")

    @property
    def n_runs(self):
        return self.rows.shape[0]

    def count(self, kind):
        return sum(1 for t in self.kinds if t == kind)

    def permuted(self, order):
        order = np.asarray(order)
        return Design(self.k, self.rows[order], tuple(self.kinds[i] for i in order))


@dataclass(frozen=True)
class DesignMoments:
    N: int
    b: float
    c: float
    d: float

    @property
    def fourth(self):
        return self.c + self.d


@dataclass(frozen=True)
class PropertyReport:
    property: str
    holds: bool
    evidence: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    reason: str = ""


def full_factorial(levels):
    """Every combination of the per-factor ``levels``; all rows tagged cube."""
    levels = [list(lv) for lv in levels]
    if not levels:
        raise InputError("need at least one factor")
    for i, lv in enumerate(levels, start=1):
        if len(set(lv)) < 2:
            raise InputError(f"factor {i} needs at least 2 distinct levels")
    rows = np.array(list(itertools.product(*levels)), dtype=float)
    return Design(len(levels), rows, (CUBE,) * len(rows))


def rotatable_alpha(k):
    """Axial distance ``(2**k) ** (1/4)`` that makes a CCD rotatable."""
    return float((2.0**k) ** 0.25)


def ccd(k, n0=0, alpha="rotatable"):
    """Central composite design: 2**k cube, 2k axial and ``n0`` center runs.

    ``alpha`` is either ``"rotatable"`` or a positive axial distance.
    """
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise InputError(f"k must be a positive integer, got {k!r}")
    if n0 < 0:
        raise InputError("n0 must be >= 0")
    if isinstance(alpha, str):
        if alpha != "rotatable":
            raise InputError(f"unknown alpha mode {alpha!r}")
        alpha = rotatable_alpha(k)
    alpha = float(alpha)
    if not alpha > 0:
        raise InputError("alpha must be positive")
    cube = np.array(list(itertools.product((-1.0, 1.0), repeat=k)))
    axial = np.zeros((2 * k, k))
    for i in range(k):
        axial[2 * i, i] = -alpha
        axial[2 * i + 1, i] = alpha
    rows = np.vstack([cube, axial, np.zeros((int(n0), k))])
    kinds = (CUBE,) * len(cube) + (AXIAL,) * (2 * k) + (CENTER,) * int(n0)
    return Design(int(k), rows, kinds)


def _agree(values):
    values = np.asarray(values, dtype=float)
    scale = max(float(np.max(np.abs(values))), 1.0)
    return float(np.ptp(values)) <= MOMENT_RTOL * scale


def design_moments(design):
    """Pure second, mixed and fourth moment sums of a moment-balanced design.

    For ``k == 1`` there is no mixed moment; ``c`` is reported as 0 and ``d``
    carries the whole fourth-power sum.
    """
    x = np.asarray(design.rows, dtype=float)
    if x.shape[0] == 0:
        raise InputError("design is empty")
    second = np.sum(x**2, axis=0)
    fourth = np.sum(x**4, axis=0)
    if not (_agree(second) and _agree(fourth)):
        raise InputError("design is not moment-balanced: column moments differ")
    k = x.shape[1]
    if k > 1:
        mixed = [np.sum(x[:, i] ** 2 * x[:, j] ** 2) for i, j in itertools.combinations(range(k), 2)]
        if not _agree(mixed):
            raise InputError("design is not moment-balanced: mixed moments differ")
        c = float(np.mean(mixed))
    else:
        c = 0.0
    b = float(np.mean(second))
    return DesignMoments(N=x.shape[0], b=b, c=c, d=float(np.mean(fourth)) - c)


def check_orthogonality(design, order=2):
    """Orthogonality of a design for a first- or second-order polynomial.

    First order tests X'X for literal diagonality. Second order tests the
    moment condition ``b**2 == N*c``; an intercept always correlates with the
    pure quadratic columns so literal diagonality is out of reach there.
    """
    if order == 1:
        X = model_matrix(design, 1)
        xtx = X.T @ X
        diag = np.abs(np.diag(xtx))
        off = np.abs(xtx - np.diag(np.diag(xtx)))
        limit = MOMENT_RTOL * float(diag.max())
        worst = float(off.max())
        return PropertyReport(
            "orthogonal",
            worst < limit,
            {"max_off_diagonal": worst},
            {"max_off_diagonal": limit},
        )
    if order != 2:
        raise InputError(f"order must be 1 or 2, got {order!r}")
    m = design_moments(design)
    gap = abs(m.b**2 - m.N * m.c)
    limit = MOMENT_RTOL * m.N * m.c
    return PropertyReport(
        "orthogonal",
        m.c > 0 and gap < limit,
        {"b_squared_minus_Nc": gap, "b": m.b, "c": m.c, "N": m.N},
        {"b_squared_minus_Nc": limit},
    )


def sphere_points(k, radius, n_points=PROBE_POINTS):
    """Deterministic probe points on the sphere of ``radius`` in k dimensions.

    Equally spaced angles for k=2, a Fibonacci lattice for k=3, seeded
    normalised Gaussian directions above that, and the pair +-radius for k=1.
    """
    if k == 1:
        return np.array([[-radius], [radius]], dtype=float)
    if k == 2:
        t = 2.0 * np.pi * np.arange(n_points) / n_points
        return radius * np.column_stack([np.cos(t), np.sin(t)])
    if k == 3:
        i = np.arange(n_points) + 0.5
        z = 1.0 - 2.0 * i / n_points
        phi = np.pi * (3.0 - np.sqrt(5.0)) * i
        s = np.sqrt(1.0 - z**2)
        return radius * np.column_stack([s * np.cos(phi), s * np.sin(phi), z])
    g = np.random.default_rng(20240611 + k).standard_normal((n_points, k))
    return radius * g / np.linalg.norm(g, axis=1, keepdims=True)


def probe_spread(rows, model, points):
    """Relative spread ``(max - min) / mean`` of unit prediction variance."""
    v = prediction_variance(rows, model, points)
    return float(np.ptp(v) / np.mean(v))


def _axial_distance(design):
    x = np.asarray(design.rows)
    kinds = getattr(design, "kinds", ())
    axial = [i for i, t in enumerate(kinds) if t == AXIAL]
    if axial:
        return float(np.max(np.abs(x[axial])))
    return float(np.max(np.linalg.norm(x, axis=1)))


def check_rotatability(design, order=2, radii=None, n_points=PROBE_POINTS):
    """Rotatability via ``|d - 2c|`` (second order) and a variance probe.

    The probe evaluates the unit prediction variance at ``n_points`` points on
    each sphere in ``radii`` (default 0.5, 1 and the axial distance) and
    requires the relative spread to stay below 1e-8.
    """
    x = np.asarray(design.rows, dtype=float)
    spec = as_model(order, x.shape[1])
    check_full_rank(model_matrix(x, spec))
    if radii is None:
        radii = (0.5, 1.0, _axial_distance(design))
    evidence, tol = {}, {}
    if order == 2 and x.shape[1] > 1:
        m = design_moments(design)
        evidence["d_minus_2c"] = abs(m.d - 2.0 * m.c)
        tol["d_minus_2c"] = MOMENT_RTOL
    for r in radii:
        key = f"spread_r{r:.6g}"
        evidence[key] = probe_spread(x, spec, sphere_points(x.shape[1], r, n_points))
        tol[key] = ROTATABILITY_TOL
    holds = all(evidence[key] < tol[key] for key in tol)
    return PropertyReport("rotatable", holds, evidence, tol)


def check_uniform_precision(design, order=2):
    """Compare the prediction variance at the centre with that at unit distance.

    Unit distance is measured in standardized coordinates, scaled so each
    factor column has mean square one, i.e. coded radius ``sqrt(b/N)``.
    Holds when the gap is within 5% of the centre variance.
    """
    rot = check_rotatability(design, order)
    if not rot.holds:
        return PropertyReport(
            "uniform_precision", False, {}, {}, reason="design is not rotatable"
        )
    x = np.asarray(design.rows, dtype=float)
    k = x.shape[1]
    unit = float(np.sqrt(np.mean(np.sum(x**2, axis=0)) / x.shape[0]))
    v0 = prediction_variance(x, order, np.zeros(k))
    v1 = prediction_variance(x, order, np.eye(k)[0] * unit)
    gap = abs(v0 - v1)
    limit = UNIFORM_PRECISION_RTOL * v0
    return PropertyReport(
        "uniform_precision",
        gap <= limit,
        {
            "variance_gap": gap,
            "var_center": v0,
            "var_unit_radius": v1,
            "unit_radius_coded": unit,
        },
        {"variance_gap": limit},
    )
