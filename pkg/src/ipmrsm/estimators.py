"""scikit-learn compatible wrappers around the model expansion and the solver."""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.exceptions import ConvergenceWarning
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .dataset import Dataset
from .model import ParamVector, eval_linear_predictor, eval_response, reciprocal_ols_start, resolve_model
from .solver import SolverConfig, asymptotic_ci, gauss_newton, refit_from_solution
from .terms import as_model, model_matrix


class MonomialFeatures(TransformerMixin, BaseEstimator):
    """Expand X into the columns of a polynomial order or an explicit ModelSpec."""

    def __init__(self, model=2):
        self.model = model

    def fit(self, X, y=None):
        X = check_array(X)
        self.n_features_in_ = X.shape[1]
        self.model_ = as_model(self.model, X.shape[1])
        return self

    def transform(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return model_matrix(X, self.model_)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "model_")
        return np.array(self.model_.labels, dtype=object)


class InversePolynomialRegressor(RegressorMixin, BaseEstimator):
    """Inverse polynomial regression ``y = 1 / (sum_t theta_t m_t(x))``.

    Parameters
    ----------
    terms : str or ModelSpec, default="ipm1"
        ``"ipm1"``, ``"ipm2"``, a comma-separated label subset such as
        ``"11,01,10,00,20"``, or an explicit ModelSpec.
    delta, max_iterations, step_halving, halving_limit
        Gauss-Newton settings, see :class:`SolverConfig`.
    theta0 : array_like or dict, optional
        Starting coefficients. Defaults to a reciprocal OLS start.

    Attributes
    ----------
    coef_ : ndarray of shape (n_terms,)
    theta_ : ParamVector
    fit_result_ : FitResult
    n_iter_ : int
    converged_ : bool
    """

    def __init__(
        self,
        terms="ipm1",
        delta=1e-6,
        max_iterations=50,
        step_halving=True,
        halving_limit=10,
        theta0=None,
    ):
        self.terms = terms
        self.delta = delta
        self.max_iterations = max_iterations
        self.step_halving = step_halving
        self.halving_limit = halving_limit
        self.theta0 = theta0

    def _config(self):
        return SolverConfig(
            delta=self.delta,
            max_iterations=self.max_iterations,
            step_halving=self.step_halving,
            halving_limit=self.halving_limit,
        )

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        data = Dataset(X, y)
        model = resolve_model(self.terms)
        if model.k != X.shape[1]:
            raise ValueError(f"model expects {model.k} factors, X has {X.shape[1]}")
        start = (
            reciprocal_ols_start(model, data.X, data.y)
            if self.theta0 is None
            else self.theta0
        )
        result = gauss_newton(model, data.X, data.y, start, self._config())
        if not result.converged:
            warnings.warn(
                f"Gauss-Newton stopped after {result.iterations} iterations without "
                f"meeting delta={self.delta}",
                ConvergenceWarning,
            )
        self.model_ = model
        self.n_features_in_ = X.shape[1]
        self.fit_result_ = result
        self.theta_ = result.theta_hat
        self.coef_ = np.array(result.theta_hat.values)
        self.n_iter_ = result.iterations
        self.converged_ = result.converged
        return self

    def _check_X(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X

    def predict(self, X):
        X = self._check_X(X)
        return eval_response(self.model_, self.theta_, X)

    def decision_function(self, X):
        """Linear predictor ``eta`` (the reciprocal of the prediction)."""
        X = self._check_X(X)
        return eval_linear_predictor(self.model_, self.theta_, X)

    def confidence_intervals(self, level=0.95):
        check_is_fitted(self, "coef_")
        return asymptotic_ci(self.fit_result_, level)

    def refit(self, X, y):
        """Restart at the fitted coefficients; see :func:`refit_from_solution`."""
        check_is_fitted(self, "coef_")
        X, y = check_X_y(X, y, y_numeric=True)
        return refit_from_solution(self.model_, X, y, self.fit_result_, self._config())

    @classmethod
    def from_coefficients(cls, theta, terms="ipm1"):
        """Build a fitted-looking regressor from known coefficients (no data)."""
        est = cls(terms=terms)
        est.model_ = resolve_model(terms)
        if isinstance(theta, dict):
            est.theta_ = ParamVector.for_model(est.model_, theta)
        else:
            est.theta_ = ParamVector(est.model_.labels, theta)
        est.coef_ = np.array(est.theta_.values)
        est.n_features_in_ = est.model_.k
        return est
