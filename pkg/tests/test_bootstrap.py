import inspect

import numpy as np
import pytest

from ipmrsm import Dataset, bootstrap_fit, gauss_newton, ipm_first_order, percentile_ci, resample_cases
from ipmrsm.bootstrap import bias
from ipmrsm.exceptions import ConvergenceError, InputError

from conftest import YIELD_FIRST
from oracles import noisy_first_order


class TestResample:
    def test_single_row(self):
        d = Dataset([[1.0, 2.0]], [3.0])
        out = resample_cases(d, np.random.default_rng(0))
        assert out.X.tolist() == [[1.0, 2.0]] and out.y.tolist() == [3.0]

    def test_membership(self, noiseless):
        X, y = noiseless
        d = Dataset(X, y)
        out = resample_cases(d, np.random.default_rng(1))
        assert out.n_rows == d.n_rows
        originals = {(tuple(x), v) for x, v in zip(X, y)}
        assert all((tuple(x), v) in originals for x, v in zip(out.X, out.y))

    def test_same_seed_same_sample(self, noiseless):
        d = Dataset(*noiseless)
        a = resample_cases(d, np.random.default_rng(42))
        b = resample_cases(d, np.random.default_rng(42))
        np.testing.assert_array_equal(a.X, b.X)
        np.testing.assert_array_equal(a.y, b.y)


class TestPercentile:
    def test_thousand(self):
        assert percentile_ci(np.arange(1, 1001), 0.95) == (25, 975)

    def test_constant(self):
        assert percentile_ci([2.5] * 10) == (2.5, 2.5)

    def test_forty(self):
        # ceil(0.025 * 40) = 1, ceil(0.975 * 40) = 39
        assert percentile_ci(np.arange(1, 41), 0.95) == (1, 39)

    def test_unsorted_input(self):
        rng = np.random.default_rng(0)
        assert percentile_ci(rng.permutation(np.arange(1, 1001))) == (25, 975)

    def test_too_few(self):
        with pytest.raises(InputError):
            percentile_ci([1.0])


class TestBias:
    def test_zero(self):
        assert bias([[1.0, 2.0], [3.0, 4.0]], [2.0, 3.0]).tolist() == [0.0, 0.0]

    def test_table_difference(self):
        assert bias([[0.356039089]], [0.349449160])[0] == pytest.approx(0.00659, abs=1e-5)

    def test_single_replicate(self):
        assert bias([[5.0, 1.0]], [2.0, 2.0]).tolist() == [3.0, -1.0]


class TestBootstrapFit:
    def test_default_B(self):
        assert inspect.signature(bootstrap_fit).parameters["B"].default == 1000

    def test_perfect_fit_is_degenerate(self, noiseless, first_model):
        d = Dataset(*noiseless)
        observed = gauss_newton(first_model, d.X, d.y, YIELD_FIRST)
        res = bootstrap_fit(first_model, d, B=60, seed=3, observed=observed)
        assert res.failures == 0
        assert np.all(res.bias == 0.0)
        for lab, (lo, hi) in res.intervals.items():
            assert lo == hi == observed.theta_hat[lab]

    def test_result_shapes(self):
        m = ipm_first_order()
        d = Dataset(*noisy_first_order(YIELD_FIRST, 1, 0))
        res = bootstrap_fit(m, d, B=80, seed=11)
        assert res.estimates.shape == (80 - res.failures, 4)
        med = np.median(res.estimates, axis=0)
        for j, lab in enumerate(res.labels):
            lo, hi = res.intervals[lab]
            assert lo <= med[j] <= hi

    def test_seed_determinism_across_workers(self):
        m = ipm_first_order()
        d = Dataset(*noisy_first_order(YIELD_FIRST, 1, 1))
        a = bootstrap_fit(m, d, B=40, seed=7, n_jobs=1)
        b = bootstrap_fit(m, d, B=40, seed=7, n_jobs=3)
        np.testing.assert_array_equal(a.estimates, b.estimates)
        assert a.intervals == b.intervals

    def test_seed_drawn_when_missing(self):
        m = ipm_first_order()
        d = Dataset(*noisy_first_order(YIELD_FIRST, 1, 2))
        res = bootstrap_fit(m, d, B=10)
        again = bootstrap_fit(m, d, B=10, seed=res.seed)
        np.testing.assert_array_equal(res.estimates, again.estimates)

    def test_failure_rate_error(self):
        # five rows for four parameters: many resamples lose rank
        m = ipm_first_order()
        X = np.array([[1, 1], [1, 2], [2, 1], [2, 2], [3, 3]], dtype=float)
        y = np.array([7.0, 4.2, 6.9, 4.0, 3.6])
        with pytest.raises(ConvergenceError, match="failed"):
            bootstrap_fit(m, Dataset(X, y), B=50, seed=0)
