"""Gauss-Newton least squares for inverse polynomial models.

Each iteration linearises ``y = 1/eta(x, theta)`` around the current
estimate and solves the linear least-squares problem ``r = Z step`` with a
thin QR of the Jacobian ``Z``. Iteration stops once the proposed step moves
every parameter by less than ``delta`` relative to its current value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .exceptions import (
    ConvergenceError,
    InputError,
    SingularityError,
)
from .linear import check_full_rank, lstsq_qr, xtx_inverse
from .model import ParamVector, _checked_eta, _theta_array, eval_response, jacobian

DENOMINATOR_GUARD = 1e-10
REFIT_SSE_RTOL = 1e-10
# SSE increases below this relative size are rounding, not ascent
SSE_ROUNDING = 8 * np.finfo(float).eps


@dataclass(frozen=True)
class SolverConfig:
    delta: float = 1e-6
    max_iterations: int = 50
    step_halving: bool = True
    halving_limit: int = 10

    def __post_init__(self):
        if not self.delta > 0:
            raise InputError("delta must be positive")
        if int(self.max_iterations) < 1:
            raise InputError("max_iterations must be >= 1")
        if int(self.halving_limit) < 1:
            raise InputError("halving_limit must be >= 1")


@dataclass(frozen=True)
class FitResult:
    """Outcome of a Gauss-Newton run.

    ``sse_trace`` holds the SSE at the start point followed by one entry per
    accepted step; its last entry is always the SSE at ``theta_hat``.
    ``change_trace`` holds the guarded relative change of every proposed
    full step, including the final one that satisfied (or failed) the test.
    """

    theta_hat: ParamVector
    sse: float
    sse_trace: tuple
    change_trace: tuple
    iterations: int
    converged: bool
    achieved_tolerance: float
    covariance: np.ndarray
    n_obs: int

    @property
    def n_params(self):
        return len(self.theta_hat)

    @property
    def sigma2_hat(self):
        dof = self.n_obs - self.n_params
        return self.sse / dof if dof > 0 else float("nan")


class NonStationaryError(ConvergenceError):
    """A refit from a reported solution moved away from it."""

    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


def sse(model, theta, X, y):
    """Sum of squared residuals ``sum (y - 1/eta)**2``."""
    r = np.asarray(y, dtype=float).ravel() - eval_response(model, theta, np.asarray(X, dtype=float))
    return float(r @ r)


def relative_change(theta_prev, theta_next):
    """Largest ``|delta theta| / max(|theta_prev|, 1e-10)`` over parameters."""
    prev = np.asarray(getattr(theta_prev, "values", theta_prev), dtype=float)
    nxt = np.asarray(getattr(theta_next, "values", theta_next), dtype=float)
    if prev.shape != nxt.shape:
        raise InputError("parameter vectors differ in length")
    if prev.size == 0:
        return 0.0
    denom = np.maximum(np.abs(prev), DENOMINATOR_GUARD)
    return float(np.max(np.abs(nxt - prev) / denom))


def convergence_check(theta_prev, theta_next, delta):
    if isinstance(theta_prev, ParamVector) and isinstance(theta_next, ParamVector):
        if theta_prev.labels != theta_next.labels:
            raise InputError("parameter vectors have different labels")
    return relative_change(theta_prev, theta_next) < delta


def _sse_or_inf(model, th, X, y):
    try:
        return sse(model, th, X, y)
    except SingularityError:
        return np.inf


def _covariance(model, th, X, sse_value, n):
    p = th.shape[0]
    if n <= p:
        return np.full((p, p), np.nan)
    Z = jacobian(model, th, X)
    return sse_value / (n - p) * xtx_inverse(Z)


def gauss_newton(model, X, y, theta0, config=None):
    """Minimise the SSE of an inverse polynomial model by Gauss-Newton.

    Parameters
    ----------
    model : ModelSpec
    X : array_like, shape (n, k)
    y : array_like, shape (n,)
    theta0 : ParamVector, dict or array_like
        Starting coefficients; must give a finite model on every row.
    config : SolverConfig, optional

    Returns
    -------
    FitResult
        ``converged`` is False when ``max_iterations`` is exhausted or step
        halving cannot find a non-increasing SSE; the result is still usable.

    Raises
    ------
    RankDeficiencyError
        Jacobian without full column rank.
    SingularityError
        Start point at a pole, or every halved trial point hits one.
    """
    config = config or SolverConfig()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    th = np.array(_theta_array(model, theta0), dtype=float)
    n, p = y.shape[0], th.shape[0]
    if X.shape[0] != n:
        raise InputError(f"X has {X.shape[0]} rows but y has {n}")
    if n < p:
        raise InputError(f"{n} observations cannot determine {p} parameters")

    current = sse(model, th, X, y)
    trace = [current]
    changes = []
    iterations = 0
    converged = False
    achieved = float("nan")

    while True:
        M, eta = _checked_eta(model, th, X)
        Z = -M / eta[:, None] ** 2
        check_full_rank(Z, "Jacobian")
        r = y - 1.0 / eta
        step = lstsq_qr(Z, r)
        change = relative_change(th, th + step)
        changes.append(change)
        achieved = change
        if change < config.delta:
            converged = True
            if iterations > 0:
                # fold in the final sub-tolerance correction
                polished = th + step
                s = _sse_or_inf(model, polished, X, y)
                if s <= current:
                    th, current = polished, s
                    trace[-1] = current
            break
        if iterations >= config.max_iterations:
            break

        scale = 1.0
        trial = th + step
        s_trial = _sse_or_inf(model, trial, X, y)
        ceiling = current * (1.0 + SSE_ROUNDING)
        if config.step_halving:
            halvings = 0
            while not s_trial <= ceiling and halvings < config.halving_limit:
                scale *= 0.5
                halvings += 1
                trial = th + scale * step
                s_trial = _sse_or_inf(model, trial, X, y)
            if not s_trial <= ceiling:
                if np.isinf(s_trial):
                    raise SingularityError(
                        f"trial points hit a pole after {halvings} step halvings"
                    )
                break
        elif np.isinf(s_trial):
            raise SingularityError("Gauss-Newton step landed on a pole of the model")

        th, current = trial, s_trial
        iterations += 1
        trace.append(current)

    return FitResult(
        theta_hat=ParamVector(model.labels, th),
        sse=current,
        sse_trace=tuple(trace),
        change_trace=tuple(changes),
        iterations=iterations,
        converged=converged,
        achieved_tolerance=achieved,
        covariance=_covariance(model, th, X, current, n),
        n_obs=n,
    )


def refit_from_solution(model, X, y, fit, config=None):
    """Restart the solver at ``fit.theta_hat`` and confirm nothing moves.

    A genuine stationary point converges in zero accepted steps with the same
    SSE. Raises NonStationaryError (carrying the refit) otherwise.
    """
    config = config or SolverConfig()
    if not fit.converged:
        raise InputError("refit needs a converged fit")
    again = gauss_newton(model, X, y, fit.theta_hat, config)
    y = np.asarray(y, dtype=float)
    floor = np.finfo(float).eps ** 2 * (1.0 + float(y @ y))
    sse_ok = abs(again.sse - fit.sse) <= REFIT_SSE_RTOL * max(fit.sse, floor)
    moved = relative_change(fit.theta_hat, again.theta_hat)
    if again.iterations != 0 or not sse_ok or moved >= config.delta:
        raise NonStationaryError(
            f"refit took {again.iterations} iterations, SSE {fit.sse:.6g} -> "
            f"{again.sse:.6g}, parameter change {moved:.3g}",
            again,
        )
    return again


def asymptotic_ci(fit, level=0.95):
    """Normal-theory intervals ``theta_t +- z * sqrt(cov_tt)`` keyed by label."""
    if not 0 < level < 1:
        raise InputError("level must lie in (0, 1)")
    if not fit.converged:
        raise InputError("intervals need a converged fit")
    var = np.diag(fit.covariance)
    if np.any(var < 0):
        raise ArithmeticError(f"negative variance on the covariance diagonal: {var}")
    z = norm.ppf(0.5 * (1.0 + level))
    half = z * np.sqrt(var)
    theta = fit.theta_hat.values
    return {
        lab: (float(t - h), float(t + h))
        for lab, t, h in zip(fit.theta_hat.labels, theta, half)
    }
