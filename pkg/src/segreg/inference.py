"""Bootstrap confidence intervals for boundary and slope coefficients.

The main tool is a smoothed regression bootstrap: covariate rows are
redrawn from a kernel-smoothed empirical distribution (a location mixture
of product Gaussians, so sampling is exact: pick a row uniformly, add
scaled Gaussian noise), responses are rebuilt from the fitted regimes plus
a standardized residual drawn from the centered pool and rescaled by a
local-linear variance estimate, and the model is refit on each replicate.
Percentile intervals for a projected boundary coefficient gamma'd invert
the empirical law of T(gamma*'d - gamma_hat'd); slope coefficients use the
usual sqrt(T) scaling.

A wild bootstrap (fixed covariates, two-point multiplier on residuals) and
plug-in normal intervals for the slopes are provided as baselines.
Resampling ignores any temporal dependence in the original rows by design.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field, replace

import numpy as np

from .data_model import Dataset, derive_rng
from .errors import ConfigError, DataError, SegregError
from .estimator import FittedModel, SolverConfig, fit_bcd
from .partition import RegimeAssignment
from .regression import beta_covariance

logger = logging.getLogger("segreg.inference")

_SMOOTHED_STREAM = 301
_WILD_STREAM = 302

#: variance floor, as a fraction of the raw residual variance
_SIGMA2_FLOOR_FRAC = 1e-4

#: two-point multiplier taking values (-(sqrt(5)-1)/2, (sqrt(5)+1)/2) with
#: probabilities ((sqrt(5)+1)/(2 sqrt(5)), (sqrt(5)-1)/(2 sqrt(5))): mean 0,
#: variance 1, third moment 1.
_MAMMEN_VALUES = (-(math.sqrt(5.0) - 1.0) / 2.0, (math.sqrt(5.0) + 1.0) / 2.0)
_MAMMEN_P_LOW = (math.sqrt(5.0) + 1.0) / (2.0 * math.sqrt(5.0))


def _varying_columns(a: np.ndarray) -> list[int]:
    return [j for j in range(a.shape[1]) if np.ptp(a[:, j]) > 0.0]


@dataclass(frozen=True)
class BandwidthConfig:
    """Bandwidths for the smoothed bootstrap; ``None`` means automatic.

    ``b_x``/``b_z`` smooth the conditional-variance regression (chosen by
    least-squares leave-one-out cross-validation when unset) and must be
    positive.  ``h_x``/``h_z`` smooth the covariate distribution itself
    (rule-of-thumb when unset) and may be zero, which reduces resampling
    to drawing the original rows.  ``order`` fixes the local polynomial
    degree of the variance smoother (0 or 1); by default cross-validation
    also picks the order, falling back to local-linear when bandwidths are
    supplied explicitly.
    """

    b_x: float | np.ndarray | None = None
    b_z: float | np.ndarray | None = None
    h_x: float | np.ndarray | None = None
    h_z: float | np.ndarray | None = None
    order: int | None = None
    cv_multipliers: tuple[float, ...] = (0.5, 0.75, 1.0, 1.5, 2.0, 3.0,
                                         4.0, 8.0, 16.0, 32.0)

    def __post_init__(self) -> None:
        for name in ("b_x", "b_z"):
            v = getattr(self, name)
            if v is not None and np.any(np.asarray(v, dtype=float) <= 0.0):
                raise ConfigError(f"{name} must be positive")
        for name in ("h_x", "h_z"):
            v = getattr(self, name)
            if v is not None and np.any(np.asarray(v, dtype=float) < 0.0):
                raise ConfigError(f"{name} must be non-negative")
        if self.order not in (None, 0, 1):
            raise ConfigError("order must be 0 (local constant) or "
                              "1 (local linear)")
        if len(self.cv_multipliers) == 0 or min(self.cv_multipliers) <= 0:
            raise ConfigError("cv_multipliers must be positive and non-empty")


def _as_block_bandwidth(value, n_cols: int, name: str) -> np.ndarray:
    out = np.broadcast_to(np.asarray(value, dtype=float), (n_cols,)).copy()
    if out.shape != (n_cols,):
        raise ConfigError(f"{name} must broadcast to {n_cols} columns")
    return out


def _local_smooth(w: np.ndarray, r2: np.ndarray, b: np.ndarray,
                  queries: np.ndarray, drop_self: bool,
                  order: int) -> np.ndarray:
    """Local polynomial predictions of ``r2`` at ``queries``.

    Product Gaussian weights with per-column bandwidths ``b``; ``order`` 1
    fits a kernel-weighted plane around each query, 0 a weighted mean.
    When ``drop_self`` the i-th query is assumed to be the i-th support
    point and its own observation gets zero weight (leave-one-out).
    """
    t, d = w.shape
    diff = queries[:, None, :] - w[None, :, :]          # (m, t, d)
    k = np.exp(-0.5 * np.sum((diff / b) ** 2, axis=2))  # (m, t)
    if drop_self:
        np.fill_diagonal(k, 0.0)
    if order == 0:
        denom = k.sum(axis=1)
        denom = np.where(denom > 0.0, denom, 1.0)
        return (k @ r2) / denom
    ones = np.ones((queries.shape[0], t, 1))
    design = np.concatenate([ones, -diff], axis=2)       # rows: [1, w_s - q]
    a = np.einsum("mt,mti,mtj->mij", k, design, design, optimize=True)
    rhs = np.einsum("mt,mti,t->mi", k, design, r2, optimize=True)
    ridge = 1e-9 * (1.0 + np.trace(a, axis1=1, axis2=2) / (d + 1))
    a = a + ridge[:, None, None] * np.eye(d + 1)
    sol = np.linalg.solve(a, rhs[..., None])[..., 0]
    return sol[:, 0]


@dataclass
class SmoothedSampler:
    """Frozen ingredients of the smoothed resampling distribution.

    Holds the support rows, per-column noise bandwidths for each block,
    the variance-surface bandwidths, the floored variance evaluations at
    the support, and the centered standardized residual pool.
    """

    x: np.ndarray
    z1: np.ndarray
    z2: np.ndarray
    x_cols: list[int]
    z1_cols: list[int]
    z2_cols: list[int]
    w: np.ndarray
    b: np.ndarray
    h_x: np.ndarray
    h_z1: np.ndarray
    h_z2: np.ndarray
    residuals: np.ndarray
    sigma2: np.ndarray
    sigma2_floor: float
    e_pool: np.ndarray
    smoother_order: int = 1
    cv_score: float | None = None
    _r2: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._r2 = self.residuals ** 2

    @property
    def n_obs(self) -> int:
        return self.x.shape[0]

    def _pack(self, x: np.ndarray, z1: np.ndarray, z2: np.ndarray
              ) -> np.ndarray:
        return np.column_stack([x[:, self.x_cols], z1[:, self.z1_cols],
                                z2[:, self.z2_cols]])

    def sigma2_at(self, x: np.ndarray, z1: np.ndarray, z2: np.ndarray
                  ) -> np.ndarray:
        """Floored local conditional variance estimate at new points."""
        pred = _local_smooth(self.w, self._r2, self.b,
                             self._pack(x, z1, z2), drop_self=False,
                             order=self.smoother_order)
        return np.maximum(pred, self.sigma2_floor)


def fitted_values(ds: Dataset, fit: FittedModel) -> np.ndarray:
    """Regression surface of a fitted model at the original rows."""
    out = np.zeros(ds.n_obs)
    for k in (1, 2, 3, 4):
        rows = fit.assignment.labels == k
        if not rows.any():
            continue
        out[rows] = ds.x[rows] @ fit.betas[k]
    return out


def residuals(ds: Dataset, fit: FittedModel) -> np.ndarray:
    return ds.y - fitted_values(ds, fit)


def _rot_scale(w: np.ndarray, dim: int) -> np.ndarray:
    return w.std(axis=0, ddof=1) * w.shape[0] ** (-1.0 / (4.0 + dim))


def _cross_validate(w: np.ndarray, r2: np.ndarray, rot: np.ndarray,
                    n_x: int, bw: BandwidthConfig
                    ) -> tuple[float, np.ndarray, int]:
    """Least-squares leave-one-out choice of bandwidths and order.

    Stage one scans a shared rule-of-thumb multiplier (widest first, so
    ties go to the smoothest candidate) for each admissible polynomial
    order; stage two refines the two block multipliers separately around
    the stage-one winner.  Returns (score, bandwidth vector, order).
    """
    orders = (0, 1) if bw.order is None else (bw.order,)
    mults = sorted(bw.cv_multipliers)

    def bandwidth(cx: float, cz: float) -> np.ndarray:
        return rot * np.concatenate(
            [np.full(n_x, cx), np.full(w.shape[1] - n_x, cz)])

    def score(cx: float, cz: float, order: int) -> float:
        pred = _local_smooth(w, r2, bandwidth(cx, cz), w,
                             drop_self=True, order=order)
        return float(np.mean((r2 - pred) ** 2))

    best: tuple[float, float, float, int] | None = None
    for order in orders:
        for c in reversed(mults):
            s = score(c, c, order)
            if best is None or s < best[0]:
                best = (s, c, c, order)
    assert best is not None
    _, c_best, _, order = best
    i = mults.index(c_best)
    near = {mults[j] for j in (i - 1, i, i + 1) if 0 <= j < len(mults)}
    for cx in sorted(near, reverse=True):
        for cz in sorted(near, reverse=True):
            if cx == cz:
                continue
            s = score(cx, cz, order)
            if s < best[0]:
                best = (s, cx, cz, order)
    s, cx, cz, order = best
    return s, bandwidth(cx, cz), order


def build_sampler(ds: Dataset, fit: FittedModel,
                  bw: BandwidthConfig | None = None) -> SmoothedSampler:
    """Estimate the variance surface and residual pool behind the bootstrap.

    The conditional variance is a local polynomial regression of squared
    residuals on the varying covariate columns (product Gaussian kernel,
    per-block bandwidths and polynomial order picked by leave-one-out
    least squares unless fixed), floored at a small fraction of the raw
    residual variance.  Letting cross-validation drop from local-linear
    to local-constant keeps the surface stable at the edge of the support
    when the variance is in fact flat.
    """
    bw = bw or BandwidthConfig()
    if ds.n_obs < 50:
        logger.warning("smoothed bootstrap with %d observations; "
                       "at least 50 are recommended", ds.n_obs)
    resid = residuals(ds, fit)
    raw_var = float(np.var(resid))
    if raw_var <= 1e-20 * max(1.0, float(np.var(ds.y))):
        raise DataError(
            "residual variance is numerically zero; there is no noise "
            "distribution to bootstrap from"
        )

    x_cols = _varying_columns(ds.x)
    z1_cols = _varying_columns(ds.z1)
    z2_cols = _varying_columns(ds.z2)
    w = np.column_stack([ds.x[:, x_cols], ds.z1[:, z1_cols],
                         ds.z2[:, z2_cols]])
    n_x = len(x_cols)
    dim_w = w.shape[1]
    rot = _rot_scale(w, dim_w)

    r2 = resid ** 2
    cv_score: float | None = None
    if bw.b_x is not None and bw.b_z is not None:
        b = np.concatenate([
            _as_block_bandwidth(bw.b_x, n_x, "b_x"),
            _as_block_bandwidth(bw.b_z, dim_w - n_x, "b_z"),
        ])
        order = 1 if bw.order is None else bw.order
    else:
        cv_score, b, order = _cross_validate(w, r2, rot, n_x, bw)

    floor = _SIGMA2_FLOOR_FRAC * raw_var
    sigma2 = np.maximum(
        _local_smooth(w, r2, b, w, drop_self=False, order=order), floor)
    e_pool = resid / np.sqrt(sigma2)
    e_pool = e_pool - e_pool.mean()

    t = ds.n_obs
    h_x = (1.06 * ds.x[:, x_cols].std(axis=0, ddof=1)
           * t ** (-1.0 / (4.0 + max(n_x, 1))))
    dim_z = dim_w - n_x
    hz_scale = t ** (-1.0 / (4.0 + max(dim_z, 1)))
    h_z1 = 1.06 * ds.z1[:, z1_cols].std(axis=0, ddof=1) * hz_scale
    h_z2 = 1.06 * ds.z2[:, z2_cols].std(axis=0, ddof=1) * hz_scale
    if bw.h_x is not None:
        h_x = _as_block_bandwidth(bw.h_x, n_x, "h_x")
    if bw.h_z is not None:
        h_z1 = _as_block_bandwidth(bw.h_z, len(z1_cols), "h_z")
        h_z2 = _as_block_bandwidth(bw.h_z, len(z2_cols), "h_z")

    return SmoothedSampler(
        x=ds.x, z1=ds.z1, z2=ds.z2, x_cols=x_cols, z1_cols=z1_cols,
        z2_cols=z2_cols, w=w, b=b, h_x=h_x, h_z1=h_z1, h_z2=h_z2,
        residuals=resid, sigma2=sigma2, sigma2_floor=floor, e_pool=e_pool,
        smoother_order=order, cv_score=cv_score,
    )


def _require_complete_betas(fit: FittedModel) -> None:
    missing = [k for k in (1, 2, 3, 4) if fit.betas[k] is None]
    if missing:
        raise DataError(
            f"fit leaves regime(s) {missing} without coefficients; the "
            "bootstrap regression surface is undefined there"
        )


def _perturb(block: np.ndarray, cols: list[int], h: np.ndarray,
             idx: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    out = block[idx].copy()
    if cols:
        noise = rng.standard_normal((idx.shape[0], len(cols)))
        out[:, cols] += noise * h
    return out


def _resample_rng(sampler: SmoothedSampler, fit: FittedModel,
                  rng: np.random.Generator) -> Dataset:
    _require_complete_betas(fit)
    t = sampler.n_obs
    idx = rng.integers(0, t, size=t)
    e_star = sampler.e_pool[rng.integers(0, t, size=t)]
    x_star = _perturb(sampler.x, sampler.x_cols, sampler.h_x, idx, rng)
    z1_star = _perturb(sampler.z1, sampler.z1_cols, sampler.h_z1, idx, rng)
    z2_star = _perturb(sampler.z2, sampler.z2_cols, sampler.h_z2, idx, rng)

    side1 = (fit.gamma1.value(z1_star) > 0.0).astype(np.uint8)
    side2 = (fit.gamma2.value(z2_star) > 0.0).astype(np.uint8)
    labels = RegimeAssignment.from_sides(side1, side2).labels
    surface = np.zeros(t)
    for k in (1, 2, 3, 4):
        rows = labels == k
        if rows.any():
            surface[rows] = x_star[rows] @ fit.betas[k]
    scale = np.sqrt(sampler.sigma2_at(x_star, z1_star, z2_star))
    return Dataset(y=surface + scale * e_star, x=x_star, z1=z1_star,
                   z2=z2_star)


def resample(sampler: SmoothedSampler, fit: FittedModel,
             seed: int | np.random.Generator) -> Dataset:
    """One draw of a full synthetic dataset from the smoothed distribution."""
    rng = (seed if isinstance(seed, np.random.Generator)
           else derive_rng(int(seed), _SMOOTHED_STREAM))
    return _resample_rng(sampler, fit, rng)


def _stacked_free(g1: np.ndarray, g2: np.ndarray) -> np.ndarray:
    return np.concatenate([g1[1:], g2[1:]])


def _align_to_base(fit: FittedModel, rep: FittedModel
                   ) -> tuple[np.ndarray, np.ndarray]:
    """Replicate (gamma_free, betas) matched to the base boundary order.

    The two boundaries are exchangeable up to relabelling regimes 2 and 4,
    so each replicate is flipped to whichever order sits closer to the
    base estimate before differences are taken.
    """
    b1 = fit.gamma1.coef
    b2 = fit.gamma2.coef
    r1 = rep.gamma1.coef
    r2 = rep.gamma2.coef
    err_id = np.sum((r1 - b1) ** 2) + np.sum((r2 - b2) ** 2)
    err_sw = np.sum((r2 - b1) ** 2) + np.sum((r1 - b2) ** 2)
    if err_sw < err_id:
        order = (2, 1)
        beta_order = (1, 4, 3, 2)
    else:
        order = (1, 2)
        beta_order = (1, 2, 3, 4)
    gammas = {1: r1, 2: r2}
    betas = np.vstack([rep.betas[k] for k in beta_order])
    return _stacked_free(gammas[order[0]], gammas[order[1]]), betas


def default_directions(dim: int) -> np.ndarray:
    """Coordinate projections plus the equal-weight half-sum."""
    return np.vstack([np.eye(dim), np.full((1, dim), 0.5)])


@dataclass(frozen=True)
class BootstrapRun:
    """Replicate draws plus percentile intervals at one level.

    ``gamma_star`` rows are stacked free boundary coordinates per surviving
    replicate; ``beta_star`` stacks the regime coefficient matrices.  The
    interval methods recompute quantiles from the stored draws, so other
    levels are available after the fact.
    """

    kind: str
    n_obs: int
    b: int
    n_failed: int
    seed: int
    alpha: float
    n_solution_samples: int
    directions: np.ndarray
    base_gamma: np.ndarray
    base_beta: np.ndarray
    gamma_star: np.ndarray
    beta_star: np.ndarray

    @property
    def n_used(self) -> int:
        return self.gamma_star.shape[0]

    @property
    def degenerate(self) -> bool:
        return self.n_used < 2

    def gamma_interval(self, direction: np.ndarray,
                       alpha: float | None = None) -> tuple[float, float]:
        alpha = self.alpha if alpha is None else float(alpha)
        d = np.asarray(direction, dtype=float)
        if d.shape != self.base_gamma.shape:
            raise ConfigError("direction length must match the stacked "
                              "free boundary coordinates")
        base = float(self.base_gamma @ d)
        u = self.n_obs * (self.gamma_star @ d - base)
        q_lo, q_hi = np.quantile(u, [alpha / 2.0, 1.0 - alpha / 2.0])
        return base - q_hi / self.n_obs, base - q_lo / self.n_obs

    def beta_interval(self, regime: int, coef: int,
                      alpha: float | None = None) -> tuple[float, float]:
        alpha = self.alpha if alpha is None else float(alpha)
        root_t = math.sqrt(self.n_obs)
        base = float(self.base_beta[regime - 1, coef])
        u = root_t * (self.beta_star[:, regime - 1, coef] - base)
        q_lo, q_hi = np.quantile(u, [alpha / 2.0, 1.0 - alpha / 2.0])
        return base - q_hi / root_t, base - q_lo / root_t

    def intervals(self, alpha: float | None = None) -> dict:
        gamma = [
            {"direction": d.tolist(),
             "interval": list(self.gamma_interval(d, alpha))}
            for d in self.directions
        ]
        beta = {
            f"beta_{k}_{i}": list(self.beta_interval(k, i, alpha))
            for k in (1, 2, 3, 4)
            for i in range(self.base_beta.shape[1])
        }
        return {"gamma": gamma, "beta": beta}

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n_obs": self.n_obs,
            "replicates_requested": self.b,
            "replicates_failed": self.n_failed,
            "replicates_used": self.n_used,
            "seed": self.seed,
            "alpha": self.alpha,
            "n_solution_samples": self.n_solution_samples,
            "degenerate": self.degenerate,
            "base_gamma": self.base_gamma.tolist(),
            "base_beta": self.base_beta.tolist(),
            "intervals": self.intervals(),
        }

    def replicate_rows(self) -> list[dict]:
        rows = []
        p = self.base_beta.shape[1]
        for j in range(self.n_used):
            row: dict = {"replicate": j}
            for m, v in enumerate(self.gamma_star[j], start=1):
                row[f"gamma_{m}"] = float(v)
            for k in (1, 2, 3, 4):
                for i in range(p):
                    row[f"beta_{k}_{i}"] = float(self.beta_star[j, k - 1, i])
            rows.append(row)
        return rows


def _validate_run_args(b: int, alpha: float,
                       directions: np.ndarray | None,
                       dim_free: int) -> np.ndarray:
    if b < 1:
        raise ConfigError("the bootstrap needs at least one replicate")
    if not 0.0 < alpha < 1.0:
        raise ConfigError("alpha must lie strictly between 0 and 1")
    dirs = (default_directions(dim_free) if directions is None
            else np.atleast_2d(np.asarray(directions, dtype=float)))
    if dirs.shape[1] != dim_free:
        raise ConfigError(
            f"directions must have {dim_free} columns (stacked free "
            "boundary coordinates)"
        )
    return dirs


def _run_replicates(fit: FittedModel, kind: str, b: int,
                    cfg: SolverConfig, make_dataset) -> tuple:
    base_free = _stacked_free(fit.gamma1.coef, fit.gamma2.coef)
    gamma_rows = []
    beta_rows = []
    n_failed = 0
    for j in range(b):
        ds_star = make_dataset(j)
        warm = (fit.gamma2.value(ds_star.z2) > 0.0).astype(np.uint8)
        try:
            rep = fit_bcd(ds_star, cfg, extra_starts=(warm,))
            _require_complete_betas(rep)
        except SegregError as exc:
            n_failed += 1
            logger.warning("%s bootstrap replicate %d dropped: %s",
                           kind, j, exc)
            continue
        g_free, betas = _align_to_base(fit, rep)
        gamma_rows.append(g_free)
        beta_rows.append(betas)
    if not gamma_rows:
        raise DataError("all bootstrap replicates failed to refit")
    return (base_free, np.asarray(gamma_rows), np.asarray(beta_rows),
            n_failed)


def smoothed_bootstrap(ds: Dataset, fit: FittedModel, b: int = 200,
                       n: int = 50, seed: int = 0,
                       directions: np.ndarray | None = None,
                       config: SolverConfig | None = None,
                       bw: BandwidthConfig | None = None,
                       alpha: float = 0.05) -> BootstrapRun:
    """Smoothed regression bootstrap with ``b`` refits.

    Each replicate redraws covariates from the kernel-smoothed empirical
    law, rebuilds responses from the fitted regimes with locally rescaled
    residuals, refits (warm-started descent, ``n`` boundary solution
    samples per refit), and records the aligned estimates.  Failed refits
    are dropped and counted.
    """
    _require_complete_betas(fit)
    dirs = _validate_run_args(b, alpha, directions,
                              ds.z1.shape[1] - 1 + ds.z2.shape[1] - 1)
    cfg = config or SolverConfig(n_starts=4, seed=seed)
    cfg = replace(cfg, n_solution_samples=int(n))
    sampler = build_sampler(ds, fit, bw)
    base_free, gamma_star, beta_star, n_failed = _run_replicates(
        fit, "smoothed", b, cfg,
        lambda j: _resample_rng(sampler, fit,
                                derive_rng(seed, _SMOOTHED_STREAM, j)),
    )
    base_beta = np.vstack([fit.betas[k] for k in (1, 2, 3, 4)])
    return BootstrapRun(
        kind="smoothed", n_obs=ds.n_obs, b=b, n_failed=n_failed, seed=seed,
        alpha=alpha, n_solution_samples=int(n), directions=dirs,
        base_gamma=base_free, base_beta=base_beta, gamma_star=gamma_star,
        beta_star=beta_star,
    )


def wild_bootstrap(ds: Dataset, fit: FittedModel, b: int = 200,
                   seed: int = 0, directions: np.ndarray | None = None,
                   config: SolverConfig | None = None,
                   alpha: float = 0.05) -> BootstrapRun:
    """Fixed-design bootstrap: residuals times a two-point multiplier.

    Kept as a baseline; its boundary intervals are expected to undercover
    because fixing the covariates ignores the sampling variation that
    drives the boundary estimate's law.
    """
    _require_complete_betas(fit)
    dirs = _validate_run_args(b, alpha, directions,
                              ds.z1.shape[1] - 1 + ds.z2.shape[1] - 1)
    cfg = config or SolverConfig(n_starts=4, seed=seed)
    surface = fitted_values(ds, fit)
    resid = ds.y - surface
    lo, hi = _MAMMEN_VALUES

    def make_dataset(j: int) -> Dataset:
        rng = derive_rng(seed, _WILD_STREAM, j)
        mult = np.where(rng.random(ds.n_obs) < _MAMMEN_P_LOW, lo, hi)
        return Dataset(y=surface + mult * resid, x=ds.x, z1=ds.z1, z2=ds.z2)

    base_free, gamma_star, beta_star, n_failed = _run_replicates(
        fit, "wild", b, cfg, make_dataset)
    base_beta = np.vstack([fit.betas[k] for k in (1, 2, 3, 4)])
    return BootstrapRun(
        kind="wild", n_obs=ds.n_obs, b=b, n_failed=n_failed, seed=seed,
        alpha=alpha, n_solution_samples=cfg.n_solution_samples,
        directions=dirs, base_gamma=base_free, base_beta=base_beta,
        gamma_star=gamma_star, beta_star=beta_star,
    )


def plugin_beta_intervals(ds: Dataset, fit: FittedModel,
                          alpha: float = 0.05) -> dict[str, tuple[float, float]]:
    """Normal-approximation slope intervals from the sandwich covariance."""
    from scipy.stats import norm

    _require_complete_betas(fit)
    if not 0.0 < alpha < 1.0:
        raise ConfigError("alpha must lie strictly between 0 and 1")
    cov = beta_covariance(ds, fit.assignment, fit.betas)
    zq = float(norm.ppf(1.0 - alpha / 2.0))
    out: dict[str, tuple[float, float]] = {}
    for k in (1, 2, 3, 4):
        se = np.sqrt(np.diag(cov[k]))
        for i, (bhat, s) in enumerate(zip(fit.betas[k], se)):
            out[f"beta_{k}_{i}"] = (float(bhat - zq * s),
                                    float(bhat + zq * s))
    return out


__all__ = [
    "BandwidthConfig",
    "BootstrapRun",
    "SmoothedSampler",
    "build_sampler",
    "default_directions",
    "fitted_values",
    "plugin_beta_intervals",
    "resample",
    "residuals",
    "smoothed_bootstrap",
    "wild_bootstrap",
]
