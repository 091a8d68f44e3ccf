"""Inverse polynomial models ``y = 1 / eta(x, theta)``.

``eta`` is linear in the coefficients: ``eta = sum_t theta_t * m_t(x)`` with
``m_t`` a signed-exponent monomial. Term labels follow the two-factor
convention ``"ij"``: ``"11"`` is the constant, ``"01"`` multiplies ``1/x1``,
``"10"`` multiplies ``1/x2`` and ``"00"`` multiplies ``1/(x1*x2)``. The
second-order family adds ``"02"`` on ``x2/x1`` and ``"20"`` on ``x1/x2``.

Note the first-order attachment (``"01"`` with ``1/x1``) is canonical here;
some write-ups of the same model swap ``"01"`` and ``"10"``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InputError, SingularityError
from .linear import ols_fit
from .terms import ModelSpec, Term, model_matrix

FIRST_ORDER_TERMS = (
    Term("11", (0, 0)),
    Term("01", (-1, 0)),
    Term("10", (0, -1)),
    Term("00", (-1, -1)),
)
SECOND_ORDER_EXTRA = (
    Term("02", (-1, 1)),
    Term("20", (1, -1)),
)


def ipm_first_order(k=2):
    if k != 2:
        raise InputError("the labelled IPM families are defined for k=2 only")
    return ModelSpec(2, FIRST_ORDER_TERMS)


def ipm_second_order(k=2):
    if k != 2:
        raise InputError("the labelled IPM families are defined for k=2 only")
    return ModelSpec(2, FIRST_ORDER_TERMS + SECOND_ORDER_EXTRA)


def ipm_terms(labels):
    """Two-factor IPM restricted to ``labels`` (any subset of the six terms)."""
    return ipm_second_order().subset(list(labels))


def resolve_model(name):
    """Map ``"ipm1"``, ``"ipm2"`` or a comma-separated label list to a spec."""
    if isinstance(name, ModelSpec):
        return name
    if name == "ipm1":
        return ipm_first_order()
    if name == "ipm2":
        return ipm_second_order()
    labels = [s.strip() for s in str(name).split(",") if s.strip()]
    if not labels:
        raise InputError(f"cannot interpret model {name!r}")
    return ipm_terms(labels)


@dataclass(frozen=True)
class ParamVector:
    """Coefficients keyed by term label, in model order."""

    labels: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).ravel()
        object.__setattr__(self, "labels", tuple(self.labels))
        if vals.shape[0] != len(self.labels):
            raise InputError(f"{len(self.labels)} labels but {vals.shape[0]} values")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def for_model(cls, model, values):
        if isinstance(values, dict):
            missing = set(model.labels) ^ set(values)
            if missing:
                raise InputError(f"parameter keys differ from model terms: {sorted(missing)}")
            values = [values[lab] for lab in model.labels]
        return cls(model.labels, values)

    def as_dict(self):
        return {lab: float(v) for lab, v in zip(self.labels, self.values)}

    def __getitem__(self, label):
        return float(self.values[self.labels.index(label)])

    def __len__(self):
        return len(self.labels)


def _theta_array(model, theta):
    if isinstance(theta, ParamVector):
        if theta.labels != model.labels:
            raise InputError(f"parameter labels {theta.labels} do not match model {model.labels}")
        return theta.values
    if isinstance(theta, dict):
        return ParamVector.for_model(model, theta).values
    arr = np.asarray(theta, dtype=float).ravel()
    if arr.shape[0] != model.n_terms:
        raise InputError(f"expected {model.n_terms} parameters, got {arr.shape[0]}")
    return arr


def _points(x, k):
    pts = np.asarray(x, dtype=float)
    return pts.reshape(-1, k), pts.ndim == 1


def eta_floor(theta_values):
    return 1e-12 * (1.0 + float(np.sum(np.abs(theta_values))))


def eval_linear_predictor(model, theta, x):
    """``eta`` at one point (returns float) or at each row of ``x``."""
    th = _theta_array(model, theta)
    pts, single = _points(x, model.k)
    eta = model_matrix(pts, model) @ th
    return float(eta[0]) if single else eta


def _checked_eta(model, th, pts):
    M = model_matrix(pts, model)
    eta = M @ th
    floor = eta_floor(th)
    near = np.abs(eta) < floor
    if near.any():
        i = int(np.flatnonzero(near)[0])
        raise SingularityError(
            f"linear predictor {eta[i]:.3g} at point {i} is below the floor {floor:.3g}"
        )
    return M, eta


def eval_response(model, theta, x):
    """``y = 1/eta``; raises SingularityError when ``|eta|`` is at the pole."""
    th = _theta_array(model, theta)
    pts, single = _points(x, model.k)
    _, eta = _checked_eta(model, th, pts)
    y = 1.0 / eta
    return float(y[0]) if single else y


def jacobian(model, theta, x):
    """Derivatives ``dy/dtheta_t = -m_t(x) / eta(x)**2``, shape (n, n_terms)."""
    th = _theta_array(model, theta)
    pts, _ = _points(x, model.k)
    M, eta = _checked_eta(model, th, pts)
    return -M / eta[:, None] ** 2


def reciprocal_ols_start(model, X, y):
    """Starting values from regressing ``1/y`` on the term monomials."""
    y = np.asarray(y, dtype=float).ravel()
    if np.any(y <= 0):
        i = int(np.flatnonzero(y <= 0)[0])
        raise InputError(f"response must be positive for a reciprocal start (row {i + 1})")
    fit = ols_fit(model_matrix(X, model), 1.0 / y)
    return ParamVector(model.labels, fit.coefficients)
