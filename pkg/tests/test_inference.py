"""Tests for the smoothed regression bootstrap and its baselines."""

import math
from types import SimpleNamespace

import numpy as np
import pytest

from segreg.data_model import Dataset, SimulationConfig, simulate_four_regime
from segreg.errors import ConfigError, DataError
from segreg.estimator import SolverConfig, fit_bcd
from segreg.inference import (
    BandwidthConfig,
    build_sampler,
    default_directions,
    fitted_values,
    plugin_beta_intervals,
    resample,
    residuals,
    smoothed_bootstrap,
    wild_bootstrap,
)

_FAST_BW = BandwidthConfig(b_x=0.8, b_z=0.8)


def _sim_fit(seed=0, t=200, n_starts=6, **kw):
    cfg = SimulationConfig(n_obs=t, seed=seed, **kw)
    ds, truth = simulate_four_regime(cfg)
    fit = fit_bcd(ds, SolverConfig(n_starts=n_starts))
    return ds, truth, fit


@pytest.fixture(scope="module")
def base():
    ds, truth, fit = _sim_fit(seed=42, t=200)
    return SimpleNamespace(ds=ds, truth=truth, fit=fit)


class TestSampler:
    def test_constant_variance_recovered(self):
        # homoskedastic noise: the local-linear surface should be flat at
        # the true sigma^2, uniformly over the support
        ds, _, fit = _sim_fit(seed=1, t=1000, n_starts=4,
                              heteroskedastic=False, noise_scale=1.5)
        sampler = build_sampler(ds, fit)
        rel = np.abs(sampler.sigma2 - 1.5 ** 2) / 1.5 ** 2
        assert rel.max() < 0.15

    def test_noiseless_refused(self):
        ds, _, fit = _sim_fit(seed=2, t=120, noise_scale=0.0)
        with pytest.raises(DataError, match="numerically zero"):
            build_sampler(ds, fit)

    def test_residual_pool_centered(self, base):
        sampler = build_sampler(base.ds, base.fit, _FAST_BW)
        assert abs(sampler.e_pool.mean()) < 1e-12

    def test_variance_floor_enforced(self, base):
        sampler = build_sampler(base.ds, base.fit, _FAST_BW)
        assert sampler.sigma2_floor > 0
        assert (sampler.sigma2 >= sampler.sigma2_floor).all()
        probe = sampler.sigma2_at(base.ds.x[:5], base.ds.z1[:5],
                                  base.ds.z2[:5])
        assert (probe >= sampler.sigma2_floor).all()

    def test_bandwidth_validation(self):
        with pytest.raises(ConfigError, match="b_x"):
            BandwidthConfig(b_x=0.0, b_z=1.0)
        with pytest.raises(ConfigError, match="h_z"):
            BandwidthConfig(h_z=-0.1)
        with pytest.raises(ConfigError, match="cv_multipliers"):
            BandwidthConfig(cv_multipliers=())

    def test_cross_validation_picks_from_grid(self, base):
        sampler = build_sampler(base.ds, base.fit,
                                BandwidthConfig(cv_multipliers=(0.75, 1.5)))
        assert sampler.cv_score is not None
        w_sd = sampler.w.std(axis=0, ddof=1)
        rot = w_sd * base.ds.n_obs ** (-1.0 / (4.0 + sampler.w.shape[1]))
        ratio = sampler.b / rot
        assert set(np.round(ratio, 6)) <= {0.75, 1.5}


class TestResample:
    def test_zero_h_returns_original_rows(self, base):
        bw = BandwidthConfig(b_x=0.8, b_z=0.8, h_x=0.0, h_z=0.0)
        sampler = build_sampler(base.ds, base.fit, bw)
        star = resample(sampler, base.fit, seed=7)
        for new, old in ((star.x, base.ds.x), (star.z1, base.ds.z1),
                         (star.z2, base.ds.z2)):
            hits = (new[:, None, :] == old[None, :, :]).all(axis=2).any(axis=1)
            assert hits.all()

    def test_response_rebuilt_from_pool(self, base):
        # y* must decompose exactly into surface + sigma~ * (pool value)
        bw = BandwidthConfig(b_x=0.8, b_z=0.8, h_x=0.0, h_z=0.0)
        sampler = build_sampler(base.ds, base.fit, bw)
        star = resample(sampler, base.fit, seed=8)
        from segreg.partition import RegimeAssignment

        side1 = (base.fit.gamma1.value(star.z1) > 0).astype(np.uint8)
        side2 = (base.fit.gamma2.value(star.z2) > 0).astype(np.uint8)
        labels = RegimeAssignment.from_sides(side1, side2).labels
        surface = np.zeros(star.n_obs)
        for k in (1, 2, 3, 4):
            rows = labels == k
            surface[rows] = star.x[rows] @ base.fit.betas[k]
        implied = (star.y - surface) / np.sqrt(
            sampler.sigma2_at(star.x, star.z1, star.z2))
        dist = np.abs(implied[:, None] - sampler.e_pool[None, :]).min(axis=1)
        assert dist.max() < 1e-9

    def test_constant_columns_never_perturbed(self, base):
        sampler = build_sampler(base.ds, base.fit, _FAST_BW)
        star = resample(sampler, base.fit, seed=9)
        assert (star.x[:, -1] == 1.0).all()
        assert (star.z1[:, -1] == 1.0).all()
        assert (star.z2[:, -1] == 1.0).all()

    def test_mean_preserved_over_many_draws(self, base):
        sampler = build_sampler(base.ds, base.fit, _FAST_BW)
        total = np.zeros(base.ds.x.shape[1])
        draws = 400
        for j in range(draws):
            star = resample(sampler, base.fit,
                            np.random.default_rng((10, j)))
            total += star.x.mean(axis=0)
        diff = np.abs(total / draws - base.ds.x.mean(axis=0))
        assert diff.max() < 0.02

    def test_same_seed_same_dataset(self, base):
        sampler = build_sampler(base.ds, base.fit, _FAST_BW)
        a = resample(sampler, base.fit, seed=11)
        b = resample(sampler, base.fit, seed=11)
        assert np.array_equal(a.y, b.y) and np.array_equal(a.x, b.x)


class TestSmoothedBootstrap:
    def test_seed_reproducibility(self, base):
        kw = dict(b=8, n=10, seed=3, bw=_FAST_BW,
                  config=SolverConfig(n_starts=2))
        run1 = smoothed_bootstrap(base.ds, base.fit, **kw)
        run2 = smoothed_bootstrap(base.ds, base.fit, **kw)
        assert np.array_equal(run1.gamma_star, run2.gamma_star)
        assert np.array_equal(run1.beta_star, run2.beta_star)
        assert run1.to_dict() == run2.to_dict()

    def test_single_replicate_degenerate(self, base):
        run = smoothed_bootstrap(base.ds, base.fit, b=1, n=5, seed=4,
                                 bw=_FAST_BW,
                                 config=SolverConfig(n_starts=2))
        assert run.degenerate
        d = run.directions[0]
        lo, hi = run.gamma_interval(d)
        assert hi == pytest.approx(lo)

    def test_intervals_monotone_in_alpha(self, base):
        run = smoothed_bootstrap(base.ds, base.fit, b=40, n=10, seed=5,
                                 bw=_FAST_BW,
                                 config=SolverConfig(n_starts=2))
        for d in run.directions:
            lo_wide, hi_wide = run.gamma_interval(d, alpha=0.05)
            lo_narrow, hi_narrow = run.gamma_interval(d, alpha=0.30)
            assert lo_wide <= lo_narrow <= hi_narrow <= hi_wide
        lo_w, hi_w = run.beta_interval(1, 0, alpha=0.05)
        lo_n, hi_n = run.beta_interval(1, 0, alpha=0.30)
        assert lo_w <= lo_n <= hi_n <= hi_w

    def test_argument_validation(self, base):
        with pytest.raises(ConfigError, match="replicate"):
            smoothed_bootstrap(base.ds, base.fit, b=0)
        with pytest.raises(ConfigError, match="alpha"):
            smoothed_bootstrap(base.ds, base.fit, b=5, alpha=1.5)
        with pytest.raises(ConfigError, match="directions"):
            smoothed_bootstrap(base.ds, base.fit, b=5,
                               directions=np.ones((1, 3)))

    def test_default_directions_shape(self):
        d = default_directions(4)
        assert d.shape == (5, 4)
        assert np.array_equal(d[:4], np.eye(4))
        assert np.array_equal(d[4], np.full(4, 0.5))

    def test_run_serialization(self, base):
        import json

        run = smoothed_bootstrap(base.ds, base.fit, b=6, n=5, seed=6,
                                 bw=_FAST_BW,
                                 config=SolverConfig(n_starts=2))
        blob = json.loads(json.dumps(run.to_dict()))
        assert blob["kind"] == "smoothed"
        assert blob["replicates_used"] + blob["replicates_failed"] == 6
        assert len(blob["intervals"]["gamma"]) == 5
        assert len(blob["intervals"]["beta"]) == 4 * base.ds.x.shape[1]
        rows = run.replicate_rows()
        assert len(rows) == run.n_used
        assert set(rows[0]) > {"replicate", "gamma_1", "beta_1_0"}


class TestWildBootstrap:
    def test_multiplier_is_two_point(self, base):
        surface = fitted_values(base.ds, base.fit)
        resid = base.ds.y - surface
        lo = -(math.sqrt(5) - 1) / 2
        hi = (math.sqrt(5) + 1) / 2
        # exact moments of the two-point law
        p = (math.sqrt(5) + 1) / (2 * math.sqrt(5))
        assert lo * p + hi * (1 - p) == pytest.approx(0.0, abs=1e-15)
        assert lo ** 2 * p + hi ** 2 * (1 - p) == pytest.approx(1.0)
        from segreg.inference import _WILD_STREAM
        from segreg.data_model import derive_rng

        rng = derive_rng(21, _WILD_STREAM, 0)
        mult = np.where(rng.random(base.ds.n_obs) < p, lo, hi)
        y_star = surface + mult * resid
        ratio = (y_star - surface)[np.abs(resid) > 1e-8]
        scaled = ratio / resid[np.abs(resid) > 1e-8]
        close = (np.abs(scaled - lo) < 1e-9) | (np.abs(scaled - hi) < 1e-9)
        assert close.all()
        assert abs(np.mean(np.abs(scaled - lo) < 1e-9) - p) < 0.12

    def test_seed_reproducibility(self, base):
        kw = dict(b=6, seed=13, config=SolverConfig(n_starts=2))
        run1 = wild_bootstrap(base.ds, base.fit, **kw)
        run2 = wild_bootstrap(base.ds, base.fit, **kw)
        assert np.array_equal(run1.gamma_star, run2.gamma_star)
        assert run1.to_dict() == run2.to_dict()

    def test_covariates_fixed(self, base):
        run = wild_bootstrap(base.ds, base.fit, b=3, seed=14,
                             config=SolverConfig(n_starts=2))
        assert run.kind == "wild"
        # covariates never change, so the warm start is the base pattern
        # and gamma draws stay inside the solution box
        assert np.isfinite(run.gamma_star).all()

    def test_width_close_to_plugin_at_large_t(self):
        ds, _, fit = _sim_fit(seed=15, t=800, n_starts=4)
        run = wild_bootstrap(ds, fit, b=60, seed=15,
                             config=SolverConfig(n_starts=1))
        plug = plugin_beta_intervals(ds, fit)
        ratios = []
        for k in (1, 2, 3, 4):
            for i in range(ds.x.shape[1]):
                lo_w, hi_w = run.beta_interval(k, i)
                lo_p, hi_p = plug[f"beta_{k}_{i}"]
                if hi_p > lo_p:
                    ratios.append((hi_w - lo_w) / (hi_p - lo_p))
        med = float(np.median(ratios))
        assert 0.7 <= med <= 1.3


class TestPluginIntervals:
    def test_symmetric_and_positive_width(self, base):
        plug = plugin_beta_intervals(base.ds, base.fit)
        for k in (1, 2, 3, 4):
            for i in range(base.ds.x.shape[1]):
                lo, hi = plug[f"beta_{k}_{i}"]
                mid = 0.5 * (lo + hi)
                assert hi > lo
                assert mid == pytest.approx(
                    float(base.fit.betas[k][i]), abs=1e-10)

    def test_alpha_monotone(self, base):
        wide = plugin_beta_intervals(base.ds, base.fit, alpha=0.05)
        narrow = plugin_beta_intervals(base.ds, base.fit, alpha=0.30)
        for key, (lo_w, hi_w) in wide.items():
            lo_n, hi_n = narrow[key]
            assert lo_w < lo_n < hi_n < hi_w


class TestAlignment:
    def test_swapped_replicate_realigned(self, base):
        fit = base.fit
        swapped = SimpleNamespace(
            gamma1=fit.gamma2, gamma2=fit.gamma1,
            betas={1: fit.betas[1], 2: fit.betas[4],
                   3: fit.betas[3], 4: fit.betas[2]})
        from segreg.inference import _align_to_base, _stacked_free

        g_free, betas = _align_to_base(fit, swapped)
        expect = _stacked_free(fit.gamma1.coef, fit.gamma2.coef)
        assert np.allclose(g_free, expect)
        for k in (1, 2, 3, 4):
            assert np.allclose(betas[k - 1], fit.betas[k])


class TestWarmStarts:
    def test_extra_start_validation(self, base):
        with pytest.raises(ConfigError, match="warm-start"):
            fit_bcd(base.ds, SolverConfig(n_starts=1),
                    extra_starts=(np.zeros(3, dtype=np.uint8),))

    def test_warm_start_never_hurts(self, base):
        cold = fit_bcd(base.ds, SolverConfig(n_starts=1))
        warm_side = base.fit.assignment.side2
        warm = fit_bcd(base.ds, SolverConfig(n_starts=1),
                       extra_starts=(warm_side,))
        assert warm.ssr <= cold.ssr + 1e-9
        assert warm.ssr <= base.fit.ssr + 1e-9


class TestIntervalScaling:
    def test_widths_shrink_like_one_over_t(self):
        # boundary estimates converge at rate T, so doubling the sample
        # should roughly halve the interval widths
        widths = {}
        for t in (400, 800):
            ds, _, fit = _sim_fit(seed=31, t=t, n_starts=4)
            run = smoothed_bootstrap(ds, fit, b=40, n=10, seed=31,
                                     bw=_FAST_BW,
                                     config=SolverConfig(n_starts=1))
            per_dir = [np.diff(run.gamma_interval(d))[0]
                       for d in run.directions]
            widths[t] = float(np.median(per_dir))
        assert 0.3 <= widths[800] / widths[400] <= 0.7
