"""Residual diagnostics and the Shapiro-Wilk test (Royston's approximation)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.stats import norm

from .exceptions import InputError
from .model import eval_response

NORMALITY_ALPHA = 0.05

# Royston (1992, 1995) polynomial coefficients, increasing powers.
_C1 = (0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056)
_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_C3 = (0.5440, -0.39978, 0.025054, -6.714e-4)
_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_C6 = (-0.4803, -0.082676, 0.0030302)
_G = (-2.273, 0.459)


@dataclass(frozen=True)
class NormalityReport:
    W: float
    p_value: float
    n: int


@dataclass(frozen=True)
class AdequacyReport:
    sse: float
    residuals: np.ndarray
    standardized: np.ndarray
    normality: NormalityReport | None
    verdict: str
    alpha: float = NORMALITY_ALPHA

    @property
    def degenerate(self):
        return self.normality is None


def residuals(model, theta, X, y):
    """``y - y_hat``; nothing forces these to sum to zero for a nonlinear fit."""
    return np.asarray(y, dtype=float).ravel() - eval_response(model, theta, np.asarray(X, float))


def standardized_residuals(model, fit, X, y):
    """Residuals divided by ``s = sqrt(SSE / (n - p))``; all zeros if ``s == 0``."""
    r = residuals(model, fit.theta_hat, X, y)
    n, p = r.shape[0], len(fit.theta_hat)
    if n <= p:
        raise InputError(f"need more observations ({n}) than parameters ({p})")
    s = np.sqrt(float(r @ r) / (n - p))
    if s == 0.0:
        return np.zeros_like(r)
    return r / s


def shapiro_coefficients(n):
    """Half-vector of Shapiro-Wilk weights for the ``n//2`` extreme pairs."""
    m = norm.ppf((np.arange(1, n + 1) - 0.375) / (n + 0.25))
    if n == 3:
        return np.array([np.sqrt(0.5)])
    half = n // 2
    summ2 = float(m @ m)
    ssumm2 = np.sqrt(summ2)
    rsn = 1.0 / np.sqrt(n)
    a = -m[:half] / ssumm2
    a1 = P.polyval(rsn, _C1) - m[0] / ssumm2
    if n > 5:
        a2 = P.polyval(rsn, _C2) - m[1] / ssumm2
        fac = np.sqrt((summ2 - 2 * m[0] ** 2 - 2 * m[1] ** 2) / (1 - 2 * a1**2 - 2 * a2**2))
        a = -m[:half] / fac
        a[0], a[1] = a1, a2
    else:
        fac = np.sqrt((summ2 - 2 * m[0] ** 2) / (1 - 2 * a1**2))
        a = -m[:half] / fac
        a[0] = a1
    return a


def _w_pvalue(w, n):
    if n == 3:
        p = 6.0 / np.pi * (np.arcsin(np.sqrt(w)) - np.arcsin(np.sqrt(0.75)))
        return float(max(p, 0.0))
    w1 = np.log(1.0 - w) if w < 1.0 else -np.inf
    if n <= 11:
        gamma = P.polyval(n, _G)
        if w1 >= gamma:
            return 1e-99
        w1 = -np.log(gamma - w1)
        mu = P.polyval(n, _C3)
        sigma = np.exp(P.polyval(n, _C4))
    else:
        ln = np.log(n)
        mu = P.polyval(ln, _C5)
        sigma = np.exp(P.polyval(ln, _C6))
    if np.isinf(w1):
        return 1.0
    return float(norm.sf((w1 - mu) / sigma))


def shapiro_wilk(values):
    """Shapiro-Wilk W and its p-value for 3 <= n <= 5000."""
    x = np.sort(np.asarray(values, dtype=float).ravel())
    n = x.shape[0]
    if not 3 <= n <= 5000:
        raise InputError(f"Shapiro-Wilk needs 3 <= n <= 5000, got n={n}")
    centered = x - x.mean()
    ssq = float(centered @ centered)
    if ssq <= 0.0 or x[-1] == x[0]:
        raise InputError("Shapiro-Wilk is undefined for a sample with zero variance")
    a = shapiro_coefficients(n)
    half = a.shape[0]
    num = float(a @ (x[::-1][:half] - x[:half]))
    w = min(num * num / ssq, 1.0)
    return NormalityReport(W=w, p_value=_w_pvalue(w, n), n=n)


def adequacy_report(model, fit, X, y, alpha=NORMALITY_ALPHA):
    """SSE, residuals and a normality verdict on the standardized residuals.

    The verdict is ``"degenerate residuals"`` (test skipped) when the
    residual RMS is negligible next to the response scale.
    """
    if not fit.converged:
        raise InputError("adequacy report needs a converged fit")
    y = np.asarray(y, dtype=float).ravel()
    r = residuals(model, fit.theta_hat, X, y)
    std = standardized_residuals(model, fit, X, y)
    sse = float(r @ r)
    scale = float(np.sqrt(np.mean(y**2)))
    if np.sqrt(sse / r.shape[0]) <= 1e-10 * scale or np.ptp(r) == 0.0:
        return AdequacyReport(sse, r, std, None, "degenerate residuals", alpha)
    report = shapiro_wilk(std)
    verdict = "rejected" if report.p_value < alpha else "not rejected"
    return AdequacyReport(sse, r, std, report, verdict, alpha)


def normal_scores(n):
    """Expected-normal-order approximations used for Q-Q tables."""
    return norm.ppf((np.arange(1, n + 1) - 0.375) / (n + 0.25))
