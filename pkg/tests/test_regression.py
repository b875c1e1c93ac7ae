"""Tests for per-regime OLS, the profile criterion, and plug-in covariance."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from segreg._kernels import group_ssr_by_label
from segreg.data_model import SimulationConfig, simulate_four_regime
from segreg.errors import SolverError
from segreg.partition import Gamma, assign
from segreg.regression import beta_covariance, criterion, fit_regimes, ols


def _rng(seed=0):
    return np.random.default_rng(seed)


class TestOls:
    def test_matches_normal_equations(self):
        rng = _rng(3)
        x = rng.normal(size=(40, 3))
        y = rng.normal(size=40)
        fit = ols(x, y)
        beta_ne = np.linalg.solve(x.T @ x, x.T @ y)
        np.testing.assert_allclose(fit.beta, beta_ne, atol=1e-10)
        resid = y - x @ beta_ne
        assert fit.ssr == pytest.approx(resid @ resid, abs=1e-10)
        assert fit.rank == 3
        assert fit.n == 40

    def test_exact_fit_has_zero_ssr(self):
        rng = _rng(4)
        x = rng.normal(size=(25, 2))
        beta = np.array([1.5, -2.0])
        fit = ols(x, x @ beta)
        assert fit.ssr == pytest.approx(0.0, abs=1e-18)
        np.testing.assert_allclose(fit.beta, beta, atol=1e-12)

    def test_empty_regime(self):
        fit = ols(np.empty((0, 3)), np.empty(0))
        assert fit.beta is None
        assert not fit.beta_defined
        assert fit.ssr == 0.0
        assert fit.n == 0
        assert fit.rank == 0

    def test_underdetermined_interpolates(self):
        # Fewer rows than columns with independent rows: minimum-norm
        # solution passes through every point.
        rng = _rng(5)
        x = rng.normal(size=(2, 4))
        y = rng.normal(size=2)
        fit = ols(x, y)
        assert fit.rank == 2
        assert fit.ssr == pytest.approx(0.0, abs=1e-18)
        np.testing.assert_allclose(x @ fit.beta, y, atol=1e-10)

    def test_collinear_columns_flagged(self):
        rng = _rng(6)
        base = rng.normal(size=(30, 2))
        x = np.column_stack([base, base[:, 0] + base[:, 1]])
        y = rng.normal(size=30)
        fit = ols(x, y)
        assert fit.rank == 2
        # SSR still equals the projection residual onto the column space.
        q, _ = np.linalg.qr(base)
        resid = y - q @ (q.T @ y)
        assert fit.ssr == pytest.approx(resid @ resid, abs=1e-9)


class TestCriterion:
    def _dataset(self, seed=11, t=120):
        cfg = SimulationConfig(n_obs=t, design="iid", seed=seed)
        ds, _ = simulate_four_regime(cfg)
        return ds

    def test_matches_direct_sum_oracle(self):
        ds = self._dataset()
        g1 = Gamma(np.array([1.0, -0.8, 0.2]))
        g2 = Gamma(np.array([1.0, 0.5, 0.1]))
        q1 = ds.z1 @ g1.coef
        q2 = ds.z2 @ g2.coef
        labels = np.select(
            [(q1 > 0) & (q2 > 0), (q1 <= 0) & (q2 > 0), (q1 <= 0) & (q2 <= 0)],
            [1, 2, 3],
            default=4,
        )
        expected = 0.0
        for k in range(1, 5):
            mask = labels == k
            if not mask.any():
                continue
            beta, _, _, _ = np.linalg.lstsq(ds.x[mask], ds.y[mask], rcond=None)
            r = ds.y[mask] - ds.x[mask] @ beta
            expected += r @ r
        assert criterion(ds, g1, g2) == pytest.approx(expected, rel=1e-12)

    def test_agrees_with_search_kernel_ssr(self):
        # The lstsq route and the incremental Gram/LDL route must agree.
        ds = self._dataset(seed=12)
        g1 = Gamma(np.array([1.0, 0.3, -0.4]))
        g2 = Gamma(np.array([1.0, -1.2, 0.6]))
        a = assign(ds, g1, g2)
        kernel_total = group_ssr_by_label(a.labels.astype(np.int64), 5, ds.x, ds.y)
        total, fits = fit_regimes(ds, a)
        assert total == pytest.approx(kernel_total, rel=1e-9)
        for k in range(1, 5):
            only_k = np.where(a.labels == k, 0, -1).astype(np.int64)
            kernel_k = group_ssr_by_label(only_k, 1, ds.x, ds.y)
            assert fits[k].ssr == pytest.approx(kernel_k, rel=1e-9, abs=1e-9)

    def test_row_permutation_invariant(self):
        ds = self._dataset(seed=13)
        g1 = Gamma(np.array([1.0, -1.0, 0.0]))
        g2 = Gamma(np.array([1.0, 1.0, 0.0]))
        base = criterion(ds, g1, g2)
        perm = _rng(0).permutation(ds.n_obs)
        assert criterion(ds.take(perm), g1, g2) == pytest.approx(base, rel=1e-12)

    def test_empty_regimes_contribute_zero(self):
        ds = self._dataset(seed=14, t=60)
        # Push the boundary constant far enough that q1 > 0 and q2 > 0
        # everywhere: regime 1 absorbs the whole sample.
        fit_all, _, _, _ = np.linalg.lstsq(ds.x, ds.y, rcond=None)
        r = ds.y - ds.x @ fit_all
        shift = float(np.abs(ds.z1[:, 1:]).sum(axis=1).max() * 10 + 1)
        gpos = Gamma(np.array([1.0, 0.0, shift]))
        total, fits = fit_regimes(ds, assign(ds, gpos, gpos))
        assert fits[1].n == ds.n_obs
        for k in (2, 3, 4):
            assert fits[k].n == 0
            assert fits[k].ssr == 0.0
            assert not fits[k].beta_defined
        assert total == pytest.approx(float(r @ r), rel=1e-10)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32 - 1))
    def test_refining_a_partition_never_increases_ssr(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(8, 40))
        x = rng.normal(size=(n, 2))
        y = rng.normal(size=n)
        split = rng.integers(0, 2, size=n).astype(bool)
        pooled = ols(x, y).ssr
        parts = ols(x[split], y[split]).ssr + ols(x[~split], y[~split]).ssr
        assert parts <= pooled + 1e-8 * max(1.0, pooled)


class TestBetaCovariance:
    def _fitted(self, seed=21, t=400):
        cfg = SimulationConfig(n_obs=t, design="iid", seed=seed)
        ds, truth = simulate_four_regime(cfg)
        a = assign(ds, Gamma(np.array(truth.gammas[0])), Gamma(np.array(truth.gammas[1])))
        _, fits = fit_regimes(ds, a)
        betas = {k: fits[k].beta for k in range(1, 5)}
        return ds, a, betas

    def test_matches_sandwich_oracle(self):
        ds, a, betas = self._fitted()
        covs = beta_covariance(ds, a, betas)
        t = ds.n_obs
        for k in range(1, 5):
            mask = a.labels == k
            xk, yk = ds.x[mask], ds.y[mask]
            e = yk - xk @ betas[k]
            b = xk.T @ xk / t
            meat = xk.T @ (xk * e[:, None] ** 2) / t
            binv = np.linalg.inv(b)
            np.testing.assert_allclose(covs[k], binv @ meat @ binv / t,
                                       rtol=1e-10, atol=1e-14)

    def test_symmetric_and_psd(self):
        ds, a, betas = self._fitted(seed=22)
        for cov in beta_covariance(ds, a, betas).values():
            np.testing.assert_allclose(cov, cov.T, atol=1e-14)
            eigvals = np.linalg.eigvalsh(cov)
            assert eigvals.min() >= -1e-12

    def test_homoskedastic_close_to_classical(self):
        # With constant noise variance the sandwich should approximate the
        # classical covariance within sampling error.
        rng = _rng(23)
        n, p = 4000, 3
        x = np.column_stack([rng.normal(size=(n, p - 1)), np.ones(n)])
        beta = np.array([1.0, -0.5, 2.0])
        sigma = 0.7
        y = x @ beta + sigma * rng.normal(size=n)
        fit = ols(x, y)

        class _A:  # minimal assignment stand-in
            labels = np.ones(n, dtype=np.int64)

        from segreg.data_model import Dataset

        ds = Dataset(y=y, x=x, z1=np.ones((n, 1)), z2=np.ones((n, 1)))
        cov = beta_covariance(ds, _A(), {1: fit.beta})[1]
        resid = y - x @ fit.beta
        s2 = resid @ resid / n
        classical = s2 * np.linalg.inv(x.T @ x)
        np.testing.assert_allclose(np.diag(cov), np.diag(classical), rtol=0.15)

    def test_zero_residuals_give_zero_covariance(self):
        rng = _rng(24)
        n = 50
        x = np.column_stack([rng.normal(size=(n, 2)), np.ones(n)])
        beta = np.array([2.0, -1.0, 0.5])
        from segreg.data_model import Dataset

        ds = Dataset(y=x @ beta, x=x, z1=np.ones((n, 1)), z2=np.ones((n, 1)))

        class _A:
            labels = np.ones(n, dtype=np.int64)

        cov = beta_covariance(ds, _A(), {1: beta})[1]
        np.testing.assert_allclose(cov, 0.0, atol=1e-18)

    def test_tiny_regime_raises(self):
        rng = _rng(25)
        n = 40
        x = np.column_stack([rng.normal(size=(n, 2)), np.ones(n)])
        from segreg.data_model import Dataset

        ds = Dataset(y=rng.normal(size=n), x=x, z1=np.ones((n, 1)),
                     z2=np.ones((n, 1)))
        labels = np.ones(n, dtype=np.int64)
        labels[0] = 2  # regime 2 has a single observation, p = 3

        class _A:
            pass

        a = _A()
        a.labels = labels
        with pytest.raises(SolverError, match="regime 2"):
            beta_covariance(ds, a, {1: np.zeros(3), 2: np.zeros(3)})

    def test_empty_regime_raises(self):
        ds, a, betas = self._fitted(seed=26, t=100)
        labels = np.where(a.labels == 4, 1, a.labels)

        class _A:
            pass

        b = _A()
        b.labels = labels
        with pytest.raises(SolverError, match="regime 4"):
            beta_covariance(ds, b, {4: np.zeros(ds.p)})
