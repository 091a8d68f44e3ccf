"""Monomial term sets and model-matrix expansion.

A model is an ordered set of terms. Each term is a monomial
``x1**e1 * ... * xk**ek`` with integer (possibly negative) exponents, so the
same machinery expands ordinary polynomial models for design analysis and
inverse polynomial predictors for the nonlinear fits.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .exceptions import InputError, SingularityError


@dataclass(frozen=True)
class Term:
    label: str
    exponents: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(int(e) for e in self.exponents))

    @property
    def has_inverse(self):
        return any(e < 0 for e in self.exponents)


@dataclass(frozen=True)
class ModelSpec:
    """Ordered collection of monomial terms over ``k`` factors."""

    k: int
    terms: tuple[Term, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.k < 1:
            raise InputError("k must be a positive integer")
        labels = [t.label for t in self.terms]
        if len(set(labels)) != len(labels):
            raise InputError(f"duplicate term labels in {labels}")
        for t in self.terms:
            if len(t.exponents) != self.k:
                raise InputError(
                    f"term {t.label!r} has {len(t.exponents)} exponents, expected {self.k}"
                )

    @property
    def labels(self):
        return tuple(t.label for t in self.terms)

    @property
    def n_terms(self):
        return len(self.terms)

    @property
    def exponent_matrix(self):
        """(n_terms, k) integer array of exponents."""
        return np.array([t.exponents for t in self.terms], dtype=int).reshape(
            self.n_terms, self.k
        )

    def subset(self, labels):
        """Return a new spec holding only ``labels``, in the given order."""
        lookup = {t.label: t for t in self.terms}
        missing = [lab for lab in labels if lab not in lookup]
        if missing:
            raise InputError(f"unknown term labels {missing}; available {list(lookup)}")
        return ModelSpec(self.k, tuple(lookup[lab] for lab in labels))


def _monomial_label(exponents):
    parts = []
    for i, e in enumerate(exponents, start=1):
        if e == 1:
            parts.append(f"x{i}")
        elif e != 0:
            parts.append(f"x{i}^{e}")
    return "*".join(parts) if parts else "1"


def polynomial_model(k, order):
    """Full polynomial of degree ``order`` (1 or 2) in ``k`` factors.

    Term order is intercept, linear terms, two-factor interactions, then pure
    quadratics, e.g. ``(1, x1, x2, x1*x2, x1^2, x2^2)`` for ``k=2``.
    """
    if order not in (1, 2):
        raise InputError(f"polynomial order must be 1 or 2, got {order!r}")
    if k < 1:
        raise InputError("k must be a positive integer")
    eye = np.eye(k, dtype=int)
    exps = [np.zeros(k, dtype=int)] + [eye[i] for i in range(k)]
    if order == 2:
        exps += [eye[i] + eye[j] for i, j in itertools.combinations(range(k), 2)]
        exps += [2 * eye[i] for i in range(k)]
    return ModelSpec(k, tuple(Term(_monomial_label(e), tuple(e)) for e in exps))


def as_model(model, k):
    """Coerce a polynomial order or a ModelSpec to a ModelSpec over ``k`` factors."""
    if isinstance(model, ModelSpec):
        if model.k != k:
            raise InputError(f"model has k={model.k} but data has {k} factors")
        return model
    return polynomial_model(k, model)


def model_matrix(rows, model):
    """Evaluate every term of ``model`` at every row.

    Parameters
    ----------
    rows : array_like, shape (n, k)
        Coordinates, one point per row. A ``Design`` is accepted as well.
    model : int or ModelSpec
        Polynomial order (1 or 2) or an explicit term set.

    Returns
    -------
    ndarray, shape (n, n_terms)

    Raises
    ------
    SingularityError
        If a zero coordinate would be raised to a negative power.
    """
    x = np.asarray(getattr(rows, "rows", rows), dtype=float)
    if x.ndim == 1:
        x = x.reshape(1, -1)
    if x.ndim != 2:
        raise InputError("rows must be a 2-d array of coordinates")
    spec = as_model(model, x.shape[1])
    expo = spec.exponent_matrix
    negative = (expo < 0).any(axis=0)
    if negative.any():
        bad = (x[:, negative] == 0).any(axis=1)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise SingularityError(
                f"row {i} has a zero coordinate raised to a negative power"
            )
    out = np.ones((x.shape[0], spec.n_terms))
    for j in range(spec.k):
        col = x[:, j]
        for t in range(spec.n_terms):
            e = expo[t, j]
            if e != 0:
                out[:, t] *= col**e if e > 0 else 1.0 / col ** (-e)
    return out
