"""Tests for backward regime merging, selection, and discrepancy metrics."""

import json
import math
from types import SimpleNamespace

import numpy as np
import pytest

from segreg.data_model import SimulationConfig, simulate_degenerate, simulate_four_regime
from segreg.errors import ConfigError
from segreg.estimator import SolverConfig, fit_bcd, fit_exact_enum
from segreg.model_selection import (
    RegionModel,
    SelectionPath,
    backward_path,
    beta_distance,
    boundary_error,
    evaluate,
    merge_increment,
    partition_distance,
    regions_adjacent,
    select_k,
)
from segreg.partition import Gamma
from segreg.regression import fit_regimes, ols


def _four_regime(seed, t, noise=1.0, design="iid", psi=0.0):
    cfg = SimulationConfig(n_obs=t, design=design, psi=psi, seed=seed,
                           noise_scale=noise)
    return simulate_four_regime(cfg)


def _labels_fit(ds, labels):
    """Minimal stand-in for a fitted model with a prescribed partition."""
    assignment = SimpleNamespace(labels=np.asarray(labels, dtype=np.int64))
    total, fits = fit_regimes(ds, assignment)
    return SimpleNamespace(
        assignment=assignment,
        fits=fits,
        betas={k: fits[k].beta for k in (1, 2, 3, 4)},
        ssr=total,
    )


class TestAdjacency:
    def test_quadrant_neighbours(self):
        pairs = [(a, b) for a in range(1, 5) for b in range(a + 1, 5)]
        expected = {(1, 2): True, (1, 3): False, (1, 4): True,
                    (2, 3): True, (2, 4): False, (3, 4): True}
        for a, b in pairs:
            assert regions_adjacent(frozenset({a}), frozenset({b})) == expected[(a, b)]

    def test_merged_region_inherits_neighbours(self):
        assert regions_adjacent(frozenset({1, 2}), frozenset({3}))
        assert regions_adjacent(frozenset({1, 2}), frozenset({4}))
        assert not regions_adjacent(frozenset({1}), frozenset({3}))


class TestMergeIncrement:
    def test_matches_pooled_refit(self):
        ds, _ = _four_regime(3, 160)
        fit = fit_bcd(ds, SolverConfig(n_starts=4))
        path = backward_path(ds, fit)
        model = path.models[4]
        for i, h in [(0, 1), (1, 2), (2, 3), (0, 3)]:
            mask = (model.labels == i) | (model.labels == h)
            pooled = ols(ds.x[mask], ds.y[mask]).ssr
            expected = pooled - model.region_ssrs[i] - model.region_ssrs[h]
            assert merge_increment(ds, model, i, h) == pytest.approx(expected)

    def test_rejects_diagonal_pair(self):
        ds, _ = _four_regime(4, 120)
        fit = fit_bcd(ds, SolverConfig(n_starts=4))
        model = backward_path(ds, fit).models[4]
        with pytest.raises(ConfigError, match="not adjacent"):
            merge_increment(ds, model, 0, 2)
        with pytest.raises(ConfigError, match="invalid region pair"):
            merge_increment(ds, model, 1, 1)

    def test_pooling_identical_coefficients_costs_little(self):
        # two regions generated by the same beta: the pooled fit gives up
        # only noise-level SSR, while pooling distinct regimes costs O(T)
        ds, _ = simulate_degenerate(
            SimulationConfig(n_obs=300, layout="three_wedge", seed=11))
        fit = fit_bcd(ds, SolverConfig(n_starts=6))
        model = backward_path(ds, fit).models[4]
        same = merge_increment(ds, model, 2, 3)
        different = min(merge_increment(ds, model, 0, 1),
                        merge_increment(ds, model, 0, 3),
                        merge_increment(ds, model, 1, 2))
        assert same < 0.15 * different


class TestBackwardPath:
    def test_ssr_sequence_monotone_and_consistent(self):
        ds, _ = _four_regime(7, 200)
        fit = fit_bcd(ds, SolverConfig(n_starts=6))
        path = backward_path(ds, fit)
        assert path.ssr_by_k[4] == pytest.approx(fit.ssr)
        for rec in path.merges:
            assert rec.increment >= -1e-9
            assert path.ssr_by_k[rec.k_before - 1] == pytest.approx(
                path.ssr_by_k[rec.k_before] + rec.increment, abs=1e-8)
        assert (path.ssr_by_k[1] >= path.ssr_by_k[2] - 1e-9
                and path.ssr_by_k[2] >= path.ssr_by_k[3] - 1e-9
                and path.ssr_by_k[3] >= path.ssr_by_k[4] - 1e-9)

    def test_final_model_is_global_ols(self):
        ds, _ = _four_regime(8, 150)
        fit = fit_bcd(ds, SolverConfig(n_starts=4))
        path = backward_path(ds, fit)
        assert path.models[1].regions == (frozenset({1, 2, 3, 4}),)
        assert path.models[1].ssr == pytest.approx(ols(ds.x, ds.y).ssr, abs=1e-8)

    def test_regions_partition_quadrants_at_every_k(self):
        ds, _ = _four_regime(9, 180)
        fit = fit_bcd(ds, SolverConfig(n_starts=4))
        path = backward_path(ds, fit)
        quadrants = fit.assignment.labels
        for k, model in path.models.items():
            assert model.k == k
            merged = sorted(q for region in model.regions for q in region)
            assert merged == [1, 2, 3, 4]
            # each row's label points at the region holding its quadrant
            for idx, region in enumerate(model.regions):
                rows = model.labels == idx
                assert set(quadrants[rows]) <= region
            assert model.counts().sum() == ds.n_obs

    def test_empty_region_merges_first_at_zero_cost(self):
        ds, _ = _four_regime(10, 90)
        # force an empty quadrant by relabelling its rows into a neighbour
        labels = np.where(ds.z1[:, 0] > 0,
                          np.where(ds.z2[:, 0] > 0, 1, 1),
                          np.where(ds.z2[:, 0] > 0, 2, 3))
        fit = _labels_fit(ds, labels)
        path = backward_path(ds, fit)
        first = path.merges[0]
        assert first.increment == 0.0
        merged = path.models[3].regions
        assert frozenset({1, 4}) in merged or frozenset({3, 4}) in merged
        # the zero-cost step cannot hide a real SSR change
        assert path.ssr_by_k[3] == pytest.approx(path.ssr_by_k[4])

    def test_wedge_truth_merges_matching_pair_first(self):
        ds, _ = simulate_degenerate(
            SimulationConfig(n_obs=300, layout="three_wedge", seed=12))
        fit = fit_bcd(ds, SolverConfig(n_starts=6))
        path = backward_path(ds, fit)
        assert frozenset({3, 4}) in path.models[3].regions


class TestSelectK:
    def _path(self, ssr_by_k, t=100):
        return SelectionPath(n_obs=t, ssr_by_k=ssr_by_k, merges=(), models={})

    def test_zero_penalty_keeps_finest_model(self):
        path = self._path({4: 10.0, 3: 20.0, 2: 40.0, 1: 80.0})
        assert select_k(path, 0.0) == 4

    def test_huge_penalty_collapses_to_one(self):
        path = self._path({4: 10.0, 3: 20.0, 2: 40.0, 1: 80.0})
        assert select_k(path, 1e9) == 1

    def test_hand_computed_interior_choice(self):
        t = 100
        ssr = {4: 10.0, 3: 10.5, 2: 30.0, 1: 200.0}
        lam = 30.0
        path = self._path(ssr, t)
        ics = {k: math.log(ssr[k] / t) + lam * k / t for k in (1, 2, 3, 4)}
        expected = min(sorted(ics), key=lambda k: ics[k])
        assert select_k(path, lam) == expected == 3

    def test_exact_ties_pick_smaller_k(self):
        path = self._path({4: 5.0, 3: 5.0, 2: 5.0, 1: 9.0})
        assert select_k(path, 0.0) == 2

    def test_zero_ssr_short_circuits(self):
        assert select_k(self._path({4: 0.0, 3: 0.5, 2: 1.0, 1: 2.0})) == 4
        assert select_k(self._path({4: 0.0, 3: 0.0, 2: 1.0, 1: 2.0})) == 3
        assert select_k(self._path({4: 0.0, 3: 0.0, 2: 0.0, 1: 0.0})) == 1

    def test_default_penalty_recorded_on_path(self):
        ds, _ = _four_regime(13, 120)
        fit = fit_bcd(ds, SolverConfig(n_starts=4))
        path = backward_path(ds, fit)
        assert path.lambda_t == pytest.approx(5.0 * math.log(ds.n_obs))
        assert path.k_hat == select_k(path, path.lambda_t)

    def test_noiseless_four_regime_selects_four(self):
        ds, _ = _four_regime(14, 120, noise=0.0)
        fit = fit_bcd(ds, SolverConfig(n_starts=8))
        path = backward_path(ds, fit)
        assert path.ssr_by_k[4] <= 1e-10
        assert path.ssr_by_k[3] > 1.0
        assert path.k_hat == 4

    def test_noiseless_single_regime_selects_one(self):
        ds, _ = simulate_degenerate(
            SimulationConfig(n_obs=120, layout="one_global", seed=15,
                             noise_scale=0.0))
        fit = fit_bcd(ds, SolverConfig(n_starts=4))
        path = backward_path(ds, fit)
        assert path.k_hat == 1

    def test_three_band_truth_selected_at_default_penalty(self):
        ds, _ = simulate_degenerate(
            SimulationConfig(n_obs=400, layout="three_bands", seed=16))
        fit = fit_bcd(ds, SolverConfig(n_starts=6))
        path = backward_path(ds, fit)
        assert path.k_hat == 3


class TestMetrics:
    def test_partition_distance_hand_example(self):
        true_labels = np.array([0, 0, 1, 1])
        est_labels = np.array([0, 1, 1, 1])
        assert partition_distance(true_labels, est_labels, 2, 2) == pytest.approx(0.5)

    def test_partition_distance_zero_iff_relabelling(self):
        rng = np.random.default_rng(0)
        true_labels = rng.integers(0, 4, size=200)
        perm = np.array([2, 0, 3, 1])
        assert partition_distance(true_labels, perm[true_labels], 4, 4) == 0.0

    def test_beta_distance_hand_example(self):
        true_betas = np.array([[1.0, 0.0], [0.0, 1.0]])
        est = [np.array([1.1, 0.0]), None, np.array([0.0, 0.5])]
        assert beta_distance(true_betas, est) == pytest.approx(0.6)

    def test_boundary_error_identity_and_swap(self):
        _, truth = _four_regime(17, 80)
        g1 = Gamma(np.asarray(truth.gammas[0], dtype=float))
        g2 = Gamma(np.asarray(truth.gammas[1], dtype=float))
        betas = {k: np.asarray(truth.betas[k - 1], dtype=float)
                 for k in (1, 2, 3, 4)}
        exact = SimpleNamespace(gamma1=g1, gamma2=g2, betas=betas)
        assert boundary_error(truth, exact) == (0.0, 0.0)
        swapped = SimpleNamespace(
            gamma1=g2, gamma2=g1,
            betas={1: betas[1], 2: betas[4], 3: betas[3], 4: betas[2]})
        gamma_err, beta_err = boundary_error(truth, swapped)
        assert gamma_err == 0.0 and beta_err == 0.0
        off = SimpleNamespace(
            gamma1=Gamma(g1.coef + np.array([0.0, 0.3, 0.0])),
            gamma2=g2, betas=betas)
        gamma_err, beta_err = boundary_error(truth, off)
        assert gamma_err == pytest.approx(0.3)
        assert beta_err == 0.0

    def test_noiseless_fit_evaluates_clean(self):
        ds, truth = _four_regime(18, 60, noise=0.0)
        fit = fit_exact_enum(ds)
        metrics = evaluate(truth, fit)
        assert metrics["d_regime"] == 0.0
        assert metrics["d_beta"] == pytest.approx(0.0, abs=1e-6)
        assert metrics["beta_err"] == pytest.approx(0.0, abs=1e-6)
        assert metrics["gamma_err"] < 0.75

    def test_region_model_evaluation_ignores_region_order(self):
        ds, truth = simulate_degenerate(
            SimulationConfig(n_obs=250, layout="three_bands", seed=19))
        fit = fit_bcd(ds, SolverConfig(n_starts=6))
        path = backward_path(ds, fit)
        model = path.models[3]
        base = evaluate(truth, model)
        order = np.array([2, 0, 1])
        reordered = RegionModel(
            regions=tuple(model.regions[i] for i in order),
            betas=tuple(model.betas[i] for i in order),
            region_ssrs=tuple(model.region_ssrs[i] for i in order),
            labels=np.argsort(order)[model.labels],
            ssr=model.ssr,
        )
        perm = evaluate(truth, reordered)
        assert perm["d_regime"] == pytest.approx(base["d_regime"])
        assert perm["d_beta"] == pytest.approx(base["d_beta"])

    def test_degenerate_truth_gets_no_boundary_errors(self):
        ds, truth = simulate_degenerate(
            SimulationConfig(n_obs=120, layout="two_quadrant", seed=20))
        fit = fit_bcd(ds, SolverConfig(n_starts=4))
        metrics = evaluate(truth, fit)
        assert "gamma_err" not in metrics
        with pytest.raises(ConfigError, match="four-regime"):
            boundary_error(truth, fit)


class TestSerialization:
    def test_path_round_trips_through_json(self):
        ds, _ = _four_regime(21, 100)
        fit = fit_bcd(ds, SolverConfig(n_starts=4))
        path = backward_path(ds, fit)
        blob = json.dumps(path.to_dict())
        back = json.loads(blob)
        assert back["k_hat"] == path.k_hat
        assert set(back["models"]) == {"1", "2", "3", "4"}
        assert back["models"]["1"]["regions"] == [[1, 2, 3, 4]]
        for k in (1, 2, 3, 4):
            assert back["ssr_by_k"][str(k)] == pytest.approx(path.ssr_by_k[k])
        assert [m["k_before"] for m in back["merges"]] == [4, 3, 2]
