"""Per-regime least squares, the profile criterion, and plug-in covariance.

The estimation criterion is profile least squares: given boundary
coefficients, observations are assigned to regimes by sign pattern, each
regime gets its own OLS fit, and the criterion is the summed SSR.  These
fits use `numpy.linalg.lstsq` (minimum-norm under rank deficiency) and are
deliberately independent of the incremental Gram/LDL path used inside the
search kernels, so the two can cross-check each other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data_model import Dataset
from .errors import SolverError
from .partition import Gamma, RegimeAssignment, assign

_RCOND = None  # numpy's machine-precision default


@dataclass(frozen=True)
class RegimeFit:
    """OLS summary for a single regime.

    ``beta`` is None for an empty regime (``beta_defined`` False).  A fit
    with fewer observations than columns, or collinear columns, is the
    minimum-norm solution and reports ``rank < p``.
    """

    beta: np.ndarray | None
    ssr: float
    n: int
    xtx: np.ndarray
    rank: int
    cov: np.ndarray | None = None

    @property
    def beta_defined(self) -> bool:
        return self.beta is not None


def ols(x: np.ndarray, y: np.ndarray) -> RegimeFit:
    """Least-squares fit of one regime; exact SSR under rank deficiency."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    n, p = x.shape
    xtx = x.T @ x
    if n == 0:
        return RegimeFit(beta=None, ssr=0.0, n=0, xtx=xtx, rank=0)
    beta, _, rank, _ = np.linalg.lstsq(x, y, rcond=_RCOND)
    resid = y - x @ beta
    return RegimeFit(beta=beta, ssr=float(resid @ resid), n=n, xtx=xtx,
                     rank=int(rank))


def fit_regimes(ds: Dataset, assignment: RegimeAssignment) -> tuple[float, dict[int, RegimeFit]]:
    """Per-regime OLS under a fixed assignment; returns (total SSR, fits)."""
    fits: dict[int, RegimeFit] = {}
    total = 0.0
    for k in range(1, 5):
        mask = assignment.labels == k
        fit = ols(ds.x[mask], ds.y[mask])
        fits[k] = fit
        total += fit.ssr
    return total, fits


def criterion(ds: Dataset, gamma1: Gamma, gamma2: Gamma) -> float:
    """Profile least-squares criterion at a boundary coefficient pair.

    Assigns regimes by the sign pattern of the two boundary functions and
    returns the summed per-regime OLS SSR.  Empty regimes contribute zero.
    """
    total, _ = fit_regimes(ds, assign(ds, gamma1, gamma2))
    return total


def beta_covariance(ds: Dataset, assignment: RegimeAssignment,
                    betas: dict[int, np.ndarray]) -> dict[int, np.ndarray]:
    """Plug-in sampling covariance of each regime's coefficient estimate.

    With ``B_k`` the within-regime design second moment and the residual
    weighted moment ``M_k = T^{-1} sum x x' e^2 1{regime k}``, the
    asymptotic variance is ``B_k^{-1} M_k B_k^{-1}`` and the returned
    per-regime covariance is that sandwich divided by T.

    Raises
    ------
    SolverError
        If a requested regime's moment matrix is singular (too few or
        degenerate observations).
    """
    t_total = ds.n_obs
    out: dict[int, np.ndarray] = {}
    for k, beta in betas.items():
        mask = assignment.labels == k
        xk = ds.x[mask]
        if xk.shape[0] == 0:
            msg = f"regime {k}: no observations, covariance undefined"
            raise SolverError(msg)
        bk = (xk.T @ xk) / t_total
        resid = ds.y[mask] - xk @ np.asarray(beta, dtype=float)
        meat = (xk * resid[:, None] ** 2).T @ xk / t_total
        try:
            binv = np.linalg.inv(bk)
        except np.linalg.LinAlgError:
            msg = (
                f"regime {k}: design moment matrix is singular "
                f"({xk.shape[0]} observations for {xk.shape[1]} coefficients)"
            )
            raise SolverError(msg) from None
        cond = np.linalg.cond(bk)
        if not np.isfinite(cond) or cond > 1e12:
            msg = (
                f"regime {k}: design moment matrix is numerically singular "
                f"(condition number {cond:.2e})"
            )
            raise SolverError(msg)
        out[k] = binv @ meat @ binv / t_total
    return out


__all__ = [
    "RegimeFit",
    "beta_covariance",
    "criterion",
    "fit_regimes",
    "ols",
]
