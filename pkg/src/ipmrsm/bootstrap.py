"""Case-resampling bootstrap for inverse polynomial fits.

Replicate ``b`` draws its resample from a generator spawned from the master
seed at index ``b``, so results do not depend on how many workers run or in
what order they finish.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .exceptions import ConvergenceError, InputError, RSMError
from .model import ParamVector, reciprocal_ols_start
from .solver import SolverConfig, gauss_newton

MAX_FAILURE_RATE = 0.05


@dataclass(frozen=True)
class BootstrapResult:
    B: int
    seed: int
    level: float
    observed: ParamVector
    estimates: np.ndarray
    intervals: dict
    bias: np.ndarray
    failures: int

    @property
    def labels(self):
        return self.observed.labels

    @property
    def mean(self):
        return self.estimates.mean(axis=0)

    @property
    def std_error(self):
        return self.estimates.std(axis=0, ddof=1)


def resample_cases(data, rng):
    """Draw ``n`` rows uniformly with replacement from ``data``."""
    n = data.n_rows
    return data.take(rng.integers(0, n, size=n))


def replicate_generators(seed, B):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(B)]


def percentile_ci(samples, level=0.95):
    """Order-statistic interval at 1-based ranks ``ceil(a/2 m)``, ``ceil((1-a/2) m)``.

    ``a = 1 - level`` and ``m`` is the sample count; ranks are clamped to
    ``[1, m]``.
    """
    s = np.sort(np.asarray(samples, dtype=float).ravel())
    m = s.shape[0]
    if m < 2:
        raise InputError("percentile interval needs at least 2 samples")
    if not 0 < level < 1:
        raise InputError("level must lie in (0, 1)")
    tail = (1.0 - level) / 2.0
    # absorb float error in products such as 0.975 * 40
    lo = math.ceil(tail * m - 1e-9)
    hi = math.ceil((1.0 - tail) * m - 1e-9)
    lo = min(max(lo, 1), m)
    hi = min(max(hi, 1), m)
    return float(s[lo - 1]), float(s[hi - 1])


def bias(estimates, observed):
    est = np.atleast_2d(np.asarray(estimates, dtype=float))
    if est.shape[0] == 0:
        raise InputError("no replicate estimates")
    obs = np.asarray(getattr(observed, "values", observed), dtype=float)
    return (est - obs).mean(axis=0)


def _fit_replicate(model, sample, start, config):
    try:
        fit = gauss_newton(model, sample.X, sample.y, start, config)
        if fit.converged:
            return fit.theta_hat.values
    except RSMError:
        pass
    try:
        fit = gauss_newton(
            model, sample.X, sample.y, reciprocal_ols_start(model, sample.X, sample.y), config
        )
    except RSMError:
        return None
    return fit.theta_hat.values if fit.converged else None


def _run_block(model, data, start, config, seed, B, indices):
    gens = np.random.SeedSequence(seed).spawn(B)
    out = []
    for b in indices:
        sample = resample_cases(data, np.random.default_rng(gens[b]))
        out.append(_fit_replicate(model, sample, start, config))
    return out


def bootstrap_fit(
    model,
    data,
    B=1000,
    config=None,
    seed=None,
    level=0.95,
    n_jobs=1,
    observed=None,
):
    """Refit ``model`` on ``B`` case resamples of ``data``.

    Each replicate starts from the observed-sample estimate and falls back to
    a reciprocal OLS start if that fails. Replicates that still fail are
    dropped and counted; more than 5% failures is an error.

    Parameters
    ----------
    model : ModelSpec
    data : Dataset
    B : int
        Number of replicates.
    config : SolverConfig, optional
    seed : int, optional
        Master seed; drawn from OS entropy when omitted (see ``result.seed``).
    level : float
        Coverage of the percentile intervals.
    n_jobs : int
        Worker processes. Results are identical for any value.
    observed : FitResult, optional
        Observed-sample fit; computed from a reciprocal OLS start if omitted.
    """
    config = config or SolverConfig()
    if B < 2:
        raise InputError("B must be at least 2")
    if seed is None:
        seed = int(np.random.SeedSequence().entropy % 2**64)
    if observed is None:
        observed = gauss_newton(
            model, data.X, data.y, reciprocal_ols_start(model, data.X, data.y), config
        )
    if not observed.converged:
        raise ConvergenceError("observed-sample fit did not converge")
    start = observed.theta_hat

    if n_jobs <= 1:
        results = _run_block(model, data, start, config, seed, B, range(B))
    else:
        blocks = [list(range(B))[i::n_jobs] for i in range(n_jobs)]
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            futures = [
                pool.submit(_run_block, model, data, start, config, seed, B, blk)
                for blk in blocks
            ]
            results = [None] * B
            for blk, fut in zip(blocks, futures):
                for b, est in zip(blk, fut.result()):
                    results[b] = est

    kept = [r for r in results if r is not None]
    failures = B - len(kept)
    if failures > MAX_FAILURE_RATE * B:
        raise ConvergenceError(
            f"{failures} of {B} bootstrap replicates failed ({failures / B:.1%} > 5%)"
        )
    if len(kept) < 2:
        raise ConvergenceError("fewer than 2 bootstrap replicates succeeded")
    est = np.vstack(kept)
    intervals = {
        lab: percentile_ci(est[:, j], level) for j, lab in enumerate(start.labels)
    }
    return BootstrapResult(
        B=B,
        seed=int(seed),
        level=level,
        observed=start,
        estimates=est,
        intervals=intervals,
        bias=bias(est, start),
        failures=failures,
    )
