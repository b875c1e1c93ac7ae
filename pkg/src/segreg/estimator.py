"""Fitting the four-regime model: alternating sweeps and exact enumeration.

Both solvers search over *side patterns* (which side of each boundary every
observation falls on) rather than boundary coefficients directly, because
the profile criterion is piecewise constant in the coefficients: its value
only depends on the induced pattern.

``fit_bcd``
    Block-coordinate descent.  One block step minimizes the criterion
    exactly over all side patterns one boundary can induce (an arrangement
    sweep in that boundary's free-coefficient space) while the other
    boundary's pattern is held fixed.  Steps never increase the objective,
    and the loop stops once an alternation cycle stops improving.  Several
    starting patterns are used: the all-negative pattern, a threshold scan
    along each free coordinate of the second boundary, and random
    hyperplanes.

``fit_exact_enum``
    Exhaustive: enumerates every realizable pattern of the second boundary
    and runs one exact sweep of the first boundary against each.  This
    visits the full Cartesian product of realizable pattern pairs, so the
    result is certified optimal.  Cost grows quadratically in the sample
    size per sweep, so it is capped at small samples.

Ties in the objective (within ``tie_tol``) resolve to the
lexicographically smallest combined side pattern, making both solvers
deterministic.  After the pattern search, the boundary coefficient
solution set is sampled and the reported fit is re-estimated at its
centroid, cross-checking the kernel objective against an independent
least-squares path.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from ._kernels import group_ssr_by_label, sweep_d1, sweep_d2
from .data_model import Dataset, derive_rng
from .errors import ConfigError, DataError, SolverError
from .partition import (
    DEFAULT_BOX_HALFWIDTH,
    Gamma,
    GammaSolutionSet,
    RegimeAssignment,
    realizable_patterns,
    solution_set_sample,
)
from .regression import RegimeFit, fit_regimes

logger = logging.getLogger(__name__)

#: Largest sample size accepted by the exhaustive solver.
EXACT_T_CAP = 60

#: Substream id for the random multi-start draws (see data_model.derive_rng).
_START_STREAM = 201


@dataclass(frozen=True)
class SolverConfig:
    """Knobs shared by the solvers.

    ``tol`` is the absolute objective improvement below which the
    alternation stops; ``tie_tol`` the band within which objective values
    count as tied (resolved lexicographically); ``box_halfwidth`` the bound
    on free boundary coefficients; ``n_solution_samples`` how many points
    of each boundary's solution set to draw for the reported fit.
    """

    n_starts: int = 10
    max_sweeps: int = 100
    tol: float = 1e-10
    tie_tol: float = 1e-9
    box_halfwidth: float = DEFAULT_BOX_HALFWIDTH
    n_solution_samples: int = 100
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_starts < 1:
            raise ConfigError("n_starts must be at least 1")
        if self.max_sweeps < 1:
            raise ConfigError("max_sweeps must be at least 1")
        if self.tol < 0 or self.tie_tol < 0:
            raise ConfigError("tolerances must be non-negative")
        if self.box_halfwidth <= 0:
            raise ConfigError("box_halfwidth must be positive")
        if self.n_solution_samples < 1:
            raise ConfigError("n_solution_samples must be at least 1")


@dataclass(frozen=True)
class FittedModel:
    """A fitted four-regime model.

    ``ssr`` is the criterion value recomputed by plain least squares at the
    final assignment; ``trace`` the kernel objective after each alternation
    cycle of the winning start (a single entry for the exhaustive solver).
    ``certificate`` marks results proven optimal.  ``n_starts_used`` counts
    starting patterns for the descent solver, enumerated second-boundary
    patterns for the exhaustive one, and explored nodes for branch-and-bound
    (which also fills ``bb_stats`` with its search summary).
    """

    gamma_set: GammaSolutionSet
    betas: dict[int, np.ndarray | None]
    fits: dict[int, RegimeFit]
    assignment: RegimeAssignment
    ssr: float
    solver: str
    certificate: bool
    trace: tuple[float, ...]
    n_starts_used: int = 0
    bb_stats: dict | None = None

    @property
    def gamma1(self) -> Gamma:
        return self.gamma_set.centroid_1

    @property
    def gamma2(self) -> Gamma:
        return self.gamma_set.centroid_2

    def to_dict(self) -> dict:
        counts = self.assignment.counts()
        return {
            "ssr": float(self.ssr),
            "solver": self.solver,
            "certificate": self.certificate,
            "n_starts_used": self.n_starts_used,
            "trace": [float(v) for v in self.trace],
            "counts": {str(k): int(counts[k - 1]) for k in (1, 2, 3, 4)},
            "gamma1": self.gamma1.coef.tolist(),
            "gamma2": self.gamma2.coef.tolist(),
            "betas": {
                str(k): None if self.betas[k] is None
                else [float(v) for v in self.betas[k]]
                for k in (1, 2, 3, 4)
            },
            "solution_set": self.gamma_set.to_dict(),
            "bb_stats": self.bb_stats,
        }


def _check_problem(ds: Dataset) -> None:
    if max(ds.d1, ds.d2) > 3:
        raise ConfigError(
            "boundaries with more than 3 coefficients are not supported by "
            f"the sweep solvers (got {ds.d1} and {ds.d2})"
        )
    if ds.n_obs < 4 * ds.p:
        raise DataError(
            f"need at least 4 * p = {4 * ds.p} observations to fit four "
            f"regimes with {ds.p} coefficients each (got {ds.n_obs})"
        )


def _sweep_boundary(z: np.ndarray, other: np.ndarray, x: np.ndarray,
                    y: np.ndarray, halfwidth: float, tie_tol: float,
                    ) -> tuple[float, np.ndarray]:
    """Exact criterion minimum over one boundary's realizable patterns."""
    d_free = z.shape[1] - 1
    az = np.ascontiguousarray(z[:, 0])
    if d_free == 0:
        side = (az > 0.0).astype(np.uint8)
        labels = (2 * side.astype(np.int64) + other.astype(np.int64))
        return group_ssr_by_label(labels, 4, x, y), side
    if d_free == 1:
        return sweep_d1(az, np.ascontiguousarray(z[:, 1]), other, x, y,
                        -halfwidth, halfwidth, tie_tol)
    if d_free == 2:
        lo = np.full(2, -halfwidth)
        hi = np.full(2, halfwidth)
        return sweep_d2(az, np.ascontiguousarray(z[:, 1:]), other, x, y,
                        lo, hi, tie_tol)
    raise ConfigError(f"boundary with {d_free + 1} coefficients unsupported")


def _combined_key(side1: np.ndarray, side2: np.ndarray) -> bytes:
    return side1.tobytes() + side2.tobytes()


def _bcd_single(x: np.ndarray, y: np.ndarray, z1: np.ndarray, z2: np.ndarray,
                side2: np.ndarray, cfg: SolverConfig,
                ) -> tuple[float, np.ndarray, np.ndarray, list[float]]:
    """Alternate exact block steps from one starting second-boundary pattern."""
    trace: list[float] = []
    prev = np.inf
    side1 = np.zeros_like(side2)
    ssr = np.inf
    for _ in range(cfg.max_sweeps):
        _, side1 = _sweep_boundary(z1, side2, x, y, cfg.box_halfwidth,
                                   cfg.tie_tol)
        ssr, side2 = _sweep_boundary(z2, side1, x, y, cfg.box_halfwidth,
                                     cfg.tie_tol)
        trace.append(ssr)
        if prev - ssr < cfg.tol:
            break
        prev = ssr
    return ssr, side1, side2, trace


def _starting_patterns(z2: np.ndarray, x: np.ndarray, y: np.ndarray,
                       cfg: SolverConfig) -> list[np.ndarray]:
    """Deterministic scan starts plus random hyperplane starts, deduplicated."""
    t = z2.shape[0]
    starts: list[np.ndarray] = []
    seen: set[bytes] = set()

    def _add(side: np.ndarray) -> None:
        key = side.tobytes()
        if key not in seen and len(starts) < cfg.n_starts:
            seen.add(key)
            starts.append(side)

    _add(np.zeros(t, np.uint8))
    zeros = np.zeros(t, np.uint8)
    az = np.ascontiguousarray(z2[:, 0])
    for m in range(1, z2.shape[1]):
        bz = np.ascontiguousarray(z2[:, m])
        if not np.any(bz):
            continue
        # Best two-group split over the one-coordinate boundary family.
        _, side = sweep_d1(az, bz, zeros, x, y, -cfg.box_halfwidth,
                           cfg.box_halfwidth, cfg.tie_tol)
        _add(side)

    d_free = z2.shape[1] - 1
    if d_free > 0:
        rng = derive_rng(cfg.seed, _START_STREAM)
        attempts = 0
        while len(starts) < cfg.n_starts and attempts < 50 * cfg.n_starts:
            attempts += 1
            w = rng.uniform(-cfg.box_halfwidth, cfg.box_halfwidth, size=d_free)
            q = z2[:, 0] + z2[:, 1:] @ w
            _add((q > 0.0).astype(np.uint8))
    return starts


def _finalize(ds: Dataset, kernel_ssr: float, side1: np.ndarray,
              side2: np.ndarray, trace: tuple[float, ...], solver: str,
              certificate: bool, cfg: SolverConfig, n_starts_used: int,
              bb_stats: dict | None = None) -> FittedModel:
    assignment = RegimeAssignment.from_sides(side1, side2)
    total, fits = fit_regimes(ds, assignment)
    # Independent cross-check of the incremental kernel objective.
    if abs(total - kernel_ssr) > 1e-8 * max(1.0, abs(total)):
        raise SolverError(
            "internal inconsistency: search kernel objective "
            f"{kernel_ssr:.12g} differs from direct refit {total:.12g}"
        )
    gamma_set = solution_set_sample(
        ds, assignment, n_samples=cfg.n_solution_samples, seed=cfg.seed,
        box_halfwidth=cfg.box_halfwidth,
    )
    betas = {k: fits[k].beta for k in range(1, 5)}
    return FittedModel(
        gamma_set=gamma_set, betas=betas, fits=fits, assignment=assignment,
        ssr=total, solver=solver, certificate=certificate, trace=trace,
        n_starts_used=n_starts_used, bb_stats=bb_stats,
    )


def fit_bcd(ds: Dataset, config: SolverConfig | None = None, *,
            extra_starts: Sequence[np.ndarray] = ()) -> FittedModel:
    """Multi-start alternating descent; fast, not certified optimal.

    ``extra_starts`` prepends caller-supplied second-boundary side patterns
    to the standard start list — used to warm-start refits on perturbed
    data from a solution already in hand.
    """
    cfg = config or SolverConfig()
    _check_problem(ds)
    x = np.ascontiguousarray(ds.x)
    y = np.ascontiguousarray(ds.y)
    z1 = np.ascontiguousarray(ds.z1)
    z2 = np.ascontiguousarray(ds.z2)

    starts = _starting_patterns(z2, x, y, cfg)
    for side in reversed(list(extra_starts)):
        side = np.ascontiguousarray(np.asarray(side, dtype=np.uint8))
        if side.shape != (ds.n_obs,):
            raise ConfigError("warm-start pattern length must match n_obs")
        if not any(np.array_equal(side, s) for s in starts):
            starts.insert(0, side)
    best_ssr = np.inf
    best: tuple[np.ndarray, np.ndarray, list[float]] | None = None
    for side2_init in starts:
        ssr, side1, side2, trace = _bcd_single(x, y, z1, z2,
                                               side2_init.copy(), cfg)
        if best is None or ssr < best_ssr - cfg.tie_tol or (
            abs(ssr - best_ssr) <= cfg.tie_tol
            and _combined_key(side1, side2)
            < _combined_key(best[0], best[1])
        ):
            best_ssr = ssr
            best = (side1, side2, trace)
        if best_ssr == 0.0:
            break
    assert best is not None
    logger.debug("descent solver: %d starts, best objective %.6g",
                 len(starts), best_ssr)
    return _finalize(ds, best_ssr, best[0], best[1], tuple(best[2]),
                     solver="bcd", certificate=False, cfg=cfg,
                     n_starts_used=len(starts))


def fit_exact_enum(ds: Dataset, config: SolverConfig | None = None,
                   ) -> FittedModel:
    """Certified global minimum by full pattern-pair enumeration.

    Enumerates every pattern the second boundary can realize and solves the
    first boundary exactly against each, which covers the whole Cartesian
    product of realizable pairs.  Limited to ``n_obs <= EXACT_T_CAP``.
    """
    cfg = config or SolverConfig()
    if ds.n_obs > EXACT_T_CAP:
        raise ConfigError(
            f"exhaustive solver is limited to {EXACT_T_CAP} observations "
            f"(got {ds.n_obs}); use fit_bcd or the branch-and-bound solver"
        )
    _check_problem(ds)
    x = np.ascontiguousarray(ds.x)
    y = np.ascontiguousarray(ds.y)
    z1 = np.ascontiguousarray(ds.z1)

    patterns2 = realizable_patterns(ds.z2, cfg.box_halfwidth)
    best_ssr = np.inf
    best: tuple[np.ndarray, np.ndarray] | None = None
    for i in range(patterns2.shape[0]):
        side2 = np.ascontiguousarray(patterns2[i])
        ssr, side1 = _sweep_boundary(z1, side2, x, y, cfg.box_halfwidth,
                                     cfg.tie_tol)
        if best is None or ssr < best_ssr - cfg.tie_tol or (
            abs(ssr - best_ssr) <= cfg.tie_tol
            and _combined_key(side1, side2)
            < _combined_key(best[0], best[1])
        ):
            best_ssr = ssr
            best = (side1, side2)
    assert best is not None
    logger.debug("exhaustive solver: %d second-boundary patterns, "
                 "objective %.6g", patterns2.shape[0], best_ssr)
    return _finalize(ds, best_ssr, best[0], best[1], (best_ssr,),
                     solver="exact_enum", certificate=True, cfg=cfg,
                     n_starts_used=patterns2.shape[0])


def fit(ds: Dataset, method: str = "auto",
        config: SolverConfig | None = None) -> FittedModel:
    """Fit the model, choosing the solver by sample size when ``auto``."""
    cfg = config or SolverConfig()
    if method == "auto":
        method = "exact" if ds.n_obs <= EXACT_T_CAP else "bcd"
    if method in ("exact", "exact_enum"):
        return fit_exact_enum(ds, cfg)
    if method == "bcd":
        return fit_bcd(ds, cfg)
    if method in ("bb", "branch_bound"):
        from .miqp import solve_bb  # local import: miqp warm-starts from here

        return solve_bb(ds, config=cfg)
    raise ConfigError(
        f"unknown method {method!r}; expected 'auto', 'exact', 'bcd' "
        "or 'branch_bound'"
    )


__all__ = [
    "EXACT_T_CAP",
    "FittedModel",
    "SolverConfig",
    "fit",
    "fit_bcd",
    "fit_exact_enum",
]
