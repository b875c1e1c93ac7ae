"""Data containers, CSV ingestion, simulation designs, and standardization.

The observation model throughout the package is

    y_t = sum_k x_t' beta_k 1{regime k at (z1_t' gamma1, z2_t' gamma2)} + eps_t

where ``x`` is the regression design (a trailing constant-1 column is the
common case), and ``z1``/``z2`` are the two splitting blocks.  This module
knows nothing about estimation; it owns the `Dataset` container, the
synthetic designs used by the simulation studies, and column scaling.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, DataError

logger = logging.getLogger(__name__)

#: Layouts understood by :func:`simulate_degenerate`.
DEGENERATE_LAYOUTS = (
    "three_bands",      # two parallel boundaries on a shared splitting block
    "three_wedge",      # two crossing boundaries, the two lower cells pooled
    "two_halfspace",    # a single boundary on the first splitting block
    "two_quadrant",     # one corner cell against the pooled remainder
    "one_global",       # no boundary at all
)

_DESIGNS = ("iid", "ar1", "ma1")

# Default coefficient layout used by the synthetic designs: the regression
# design is (3 varying covariates, constant) and each splitting block is
# (2 varying covariates, constant).
_DEFAULT_BETAS = np.array(
    [
        [1.0, 1.0, 1.0, 1.0],
        [-3.0, -2.0, -1.0, 0.0],
        [0.0, 1.0, 3.0, -1.0],
        [2.0, -1.0, 0.0, 2.0],
    ]
)
_DEFAULT_GAMMA_1 = np.array([1.0, -1.0, 0.0])
_DEFAULT_GAMMA_2 = np.array([1.0, 1.0, 0.0])

_AR_BURN_IN = 200


def derive_rng(seed: int, *key: int) -> np.random.Generator:
    """Return a generator for an independent, replayable stream.

    Streams are indexed by ``(seed, *key)`` through `SeedSequence` spawn
    keys, so the same tuple always reproduces the same draws regardless of
    how many other streams were consumed in between.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)


def _as_float_matrix(a: object, name: str) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        msg = f"{name} must be a 2-d array, got ndim={arr.ndim}"
        raise DataError(msg)
    return arr


@dataclass(frozen=True)
class Dataset:
    """Aligned response, regression design, and the two splitting blocks.

    Attributes
    ----------
    y : ndarray, shape (T,)
        Response.
    x : ndarray, shape (T, p)
        Regression design; a constant column is allowed and not treated
        specially here.
    z1, z2 : ndarray, shape (T, d1) and (T, d2)
        Splitting blocks entering the two boundary functions.
    t_index : ndarray, shape (T,)
        Integer observation index (defaults to 0..T-1).
    """

    y: np.ndarray
    x: np.ndarray
    z1: np.ndarray
    z2: np.ndarray
    t_index: np.ndarray | None = None

    def __post_init__(self) -> None:
        y = np.asarray(self.y, dtype=float).reshape(-1)
        x = _as_float_matrix(self.x, "x")
        z1 = _as_float_matrix(self.z1, "z1")
        z2 = _as_float_matrix(self.z2, "z2")
        t = y.shape[0]
        if t < 1:
            msg = "dataset must contain at least one observation"
            raise DataError(msg)
        for name, arr in (("x", x), ("z1", z1), ("z2", z2)):
            if arr.shape[0] != t:
                msg = f"{name} has {arr.shape[0]} rows, expected {t}"
                raise DataError(msg)
        for name, arr in (("y", y), ("x", x), ("z1", z1), ("z2", z2)):
            if not np.all(np.isfinite(arr)):
                msg = f"non-finite value in {name}"
                raise DataError(msg)
        if self.t_index is None:
            idx = np.arange(t, dtype=np.int64)
        else:
            idx = np.asarray(self.t_index, dtype=np.int64).reshape(-1)
            if idx.shape[0] != t:
                msg = f"t_index has {idx.shape[0]} entries, expected {t}"
                raise DataError(msg)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z1", z1)
        object.__setattr__(self, "z2", z2)
        object.__setattr__(self, "t_index", idx)

    @property
    def n_obs(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    @property
    def d1(self) -> int:
        return self.z1.shape[1]

    @property
    def d2(self) -> int:
        return self.z2.shape[1]

    def z_block(self, boundary: int) -> np.ndarray:
        """Return the splitting block for boundary 1 or 2."""
        if boundary == 1:
            return self.z1
        if boundary == 2:
            return self.z2
        msg = f"boundary must be 1 or 2, got {boundary}"
        raise ConfigError(msg)

    def take(self, rows: np.ndarray) -> "Dataset":
        """Row subset / reordering as a new dataset."""
        rows = np.asarray(rows)
        return Dataset(
            y=self.y[rows],
            x=self.x[rows],
            z1=self.z1[rows],
            z2=self.z2[rows],
            t_index=self.t_index[rows],
        )


@dataclass(frozen=True)
class ColumnSchema:
    """Names the CSV columns making up a `Dataset`.

    ``add_constant_*`` appends a constant-1 column to the corresponding
    block after reading, which is the usual way to include intercepts.
    """

    response: str
    x: tuple[str, ...]
    z1: tuple[str, ...]
    z2: tuple[str, ...]
    add_constant_x: bool = True
    add_constant_z1: bool = True
    add_constant_z2: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", tuple(self.x))
        object.__setattr__(self, "z1", tuple(self.z1))
        object.__setattr__(self, "z2", tuple(self.z2))
        for name, cols in (("x", self.x), ("z1", self.z1), ("z2", self.z2)):
            if len(cols) < 1:
                msg = f"schema block {name!r} must name at least one column"
                raise ConfigError(msg)

    @classmethod
    def from_dict(cls, d: dict) -> "ColumnSchema":
        allowed = {
            "response", "x", "z1", "z2",
            "add_constant_x", "add_constant_z1", "add_constant_z2",
        }
        unknown = set(d) - allowed
        if unknown:
            msg = f"unknown schema keys: {sorted(unknown)}"
            raise ConfigError(msg)
        missing = {"response", "x", "z1", "z2"} - set(d)
        if missing:
            msg = f"schema is missing required keys: {sorted(missing)}"
            raise ConfigError(msg)
        return cls(
            response=str(d["response"]),
            x=tuple(d["x"]),
            z1=tuple(d["z1"]),
            z2=tuple(d["z2"]),
            add_constant_x=bool(d.get("add_constant_x", True)),
            add_constant_z1=bool(d.get("add_constant_z1", True)),
            add_constant_z2=bool(d.get("add_constant_z2", True)),
        )


def load_csv(path: str, schema: ColumnSchema) -> Dataset:
    """Read a UTF-8, '.'-decimal CSV with a header row into a `Dataset`.

    Every cell referenced by the schema must parse as a finite float; a
    blank, non-numeric, or NaN cell raises `DataError` naming the offending
    row and column (rows counted from 1, excluding the header).
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            msg = f"{path}: empty file, expected a header row"
            raise DataError(msg) from None
        header = [h.strip() for h in header]
        wanted = [schema.response, *schema.x, *schema.z1, *schema.z2]
        col_of: dict[str, int] = {}
        for name in wanted:
            if name not in header:
                msg = f"{path}: column {name!r} not found in header {header}"
                raise DataError(msg)
            col_of[name] = header.index(name)
        rows: list[list[float]] = []
        for i, raw in enumerate(reader, start=1):
            if not raw or all(not c.strip() for c in raw):
                continue  # ignore trailing blank lines
            parsed = []
            for name in wanted:
                j = col_of[name]
                if j >= len(raw):
                    msg = f"{path}: row {i} is missing column {name!r}"
                    raise DataError(msg)
                cell = raw[j].strip()
                try:
                    val = float(cell)
                except ValueError:
                    msg = f"{path}: row {i}, column {name!r}: cannot parse {cell!r}"
                    raise DataError(msg) from None
                if not np.isfinite(val):
                    msg = f"{path}: row {i}, column {name!r}: non-finite value {cell!r}"
                    raise DataError(msg)
                parsed.append(val)
            rows.append(parsed)
    if not rows:
        msg = f"{path}: no data rows"
        raise DataError(msg)
    data = np.asarray(rows, dtype=float)
    k = 1
    y = data[:, 0]
    x = data[:, k:k + len(schema.x)]
    k += len(schema.x)
    z1 = data[:, k:k + len(schema.z1)]
    k += len(schema.z1)
    z2 = data[:, k:k + len(schema.z2)]
    ones = np.ones((data.shape[0], 1))
    if schema.add_constant_x:
        x = np.hstack([x, ones])
    if schema.add_constant_z1:
        z1 = np.hstack([z1, ones])
    if schema.add_constant_z2:
        z2 = np.hstack([z2, ones])
    logger.debug("loaded %d rows from %s", data.shape[0], path)
    return Dataset(y=y, x=x, z1=z1, z2=z2)


def dataset_to_csv(ds: Dataset, path: str) -> ColumnSchema:
    """Write a dataset with generated column names; returns the schema.

    Constant-1 columns detected in each block are dropped on write and
    re-added through the schema flags, so ``load_csv(dataset_to_csv(ds))``
    round-trips bit-for-bit for the standard layout.
    """

    def split_const(a: np.ndarray) -> tuple[np.ndarray, bool]:
        if a.shape[1] >= 1 and np.all(a[:, -1] == 1.0):
            return a[:, :-1], True
        return a, False

    x, cx = split_const(ds.x)
    z1, c1 = split_const(ds.z1)
    z2, c2 = split_const(ds.z2)
    names_x = [f"x{j + 1}" for j in range(x.shape[1])]
    names_z1 = [f"z1_{j + 1}" for j in range(z1.shape[1])]
    names_z2 = [f"z2_{j + 1}" for j in range(z2.shape[1])]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["y", *names_x, *names_z1, *names_z2])
        for i in range(ds.n_obs):
            row = [repr(float(v)) for v in (ds.y[i], *x[i], *z1[i], *z2[i])]
            writer.writerow(row)
    return ColumnSchema(
        response="y",
        x=tuple(names_x),
        z1=tuple(names_z1),
        z2=tuple(names_z2),
        add_constant_x=cx,
        add_constant_z1=c1,
        add_constant_z2=c2,
    )


@dataclass(frozen=True)
class SimulationConfig:
    """Settings for the synthetic designs.

    Parameters
    ----------
    n_obs : int
        Sample size T.
    design : {"iid", "ar1", "ma1"}
        Covariate process for the 7-dimensional vector
        ``V_t = (x varying, z1 varying, z2 varying)``: independent rows,
        a first-order autoregression ``V_t = psi V_{t-1} + u_t``, or a
        first-order moving average ``V_t = psi u_{t-1} + u_t``.
    psi : float
        Serial-dependence coefficient for "ar1"/"ma1" (ignored for "iid").
    layout : str
        "four" for the full four-regime design, or one of
        `DEGENERATE_LAYOUTS` (consumed by :func:`simulate_degenerate`).
    betas, gammas : optional overrides
        Regime coefficients (K x p) and boundary coefficient vectors.
        Defaults depend on the layout.
    heteroskedastic : bool
        If true, errors are scaled by ``1 + 0.1 v1^2 + 0.1 w1^2`` where
        ``v1``/``w1`` are the first varying regression and splitting
        covariates.
    noise_scale : float
        Multiplier on the error term; 0 gives a noiseless response.
    truncation : float or None
        If set, covariate rows are redrawn by rejection until every
        coordinate of V lies in [-truncation, truncation] ("iid" only).
    cov_diag, cov_offdiag : float
        Covariance of V: ``cov_diag`` on the diagonal, ``cov_offdiag``
        elsewhere.
    seed : int
        Base seed; covariates and noise use separate derived streams.
    """

    n_obs: int
    design: str = "iid"
    psi: float = 0.0
    layout: str = "four"
    betas: np.ndarray | None = None
    gammas: Sequence[np.ndarray] | None = None
    heteroskedastic: bool = True
    noise_scale: float = 1.0
    truncation: float | None = None
    cov_diag: float = 1.0
    cov_offdiag: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.design not in _DESIGNS:
            msg = f"design must be one of {_DESIGNS}, got {self.design!r}"
            raise ConfigError(msg)
        if self.layout != "four" and self.layout not in DEGENERATE_LAYOUTS:
            msg = (
                f"layout must be 'four' or one of {DEGENERATE_LAYOUTS}, "
                f"got {self.layout!r}"
            )
            raise ConfigError(msg)
        if self.n_obs < 1:
            msg = f"n_obs must be positive, got {self.n_obs}"
            raise ConfigError(msg)
        if self.truncation is not None:
            if self.design != "iid":
                msg = "truncation is only supported for the 'iid' design"
                raise ConfigError(msg)
            if self.truncation <= 0:
                msg = f"truncation halfwidth must be positive, got {self.truncation}"
                raise ConfigError(msg)
        if self.noise_scale < 0:
            msg = f"noise_scale must be nonnegative, got {self.noise_scale}"
            raise ConfigError(msg)


@dataclass(frozen=True)
class TrueModel:
    """Ground truth attached to a simulated dataset.

    ``gammas`` lists the boundary coefficient vectors actually used by the
    generating process and ``gamma_blocks`` names the splitting block (1 or
    2) each applies to.  ``labels`` are 1-based regime labels per row.
    """

    labels: np.ndarray
    betas: np.ndarray
    gammas: tuple[np.ndarray, ...]
    gamma_blocks: tuple[int, ...]
    layout: str

    @property
    def k0(self) -> int:
        return self.betas.shape[0]


def _covariance(cfg: SimulationConfig, dim: int) -> np.ndarray:
    cov = np.full((dim, dim), cfg.cov_offdiag)
    np.fill_diagonal(cov, cfg.cov_diag)
    return cov


def _draw_rows(rng: np.random.Generator, n: int, chol: np.ndarray) -> np.ndarray:
    return rng.standard_normal((n, chol.shape[0])) @ chol.T


def _draw_covariates(cfg: SimulationConfig, rng: np.random.Generator,
                     dim: int = 7) -> np.ndarray:
    """Draw the T x 7 covariate matrix V for the configured design."""
    chol = np.linalg.cholesky(_covariance(cfg, dim))
    t = cfg.n_obs
    # ar1/ma1 with psi=0 degenerate to independent rows; route them through
    # the same draw path so the datasets agree bit-for-bit at equal seeds.
    if cfg.design == "iid" or cfg.psi == 0.0:
        if cfg.truncation is None:
            return _draw_rows(rng, t, chol)
        out = np.empty((t, dim))
        filled = 0
        while filled < t:
            batch = _draw_rows(rng, max(t - filled, 64), chol)
            ok = batch[np.all(np.abs(batch) <= cfg.truncation, axis=1)]
            take = min(ok.shape[0], t - filled)
            out[filled:filled + take] = ok[:take]
            filled += take
        return out
    if cfg.design == "ar1":
        u = _draw_rows(rng, t + _AR_BURN_IN, chol)
        v = np.zeros(dim)
        path = np.empty((t + _AR_BURN_IN, dim))
        for i in range(t + _AR_BURN_IN):
            v = cfg.psi * v + u[i]
            path[i] = v
        return path[_AR_BURN_IN:]
    # ma1: one extra innovation so the first observation is stationary
    u = _draw_rows(rng, t + 1, chol)
    return cfg.psi * u[:-1] + u[1:]


def _blocks_from_v(v: np.ndarray, shared_split_block: bool) -> tuple[np.ndarray, ...]:
    t = v.shape[0]
    ones = np.ones((t, 1))
    x = np.hstack([v[:, 0:3], ones])
    z1 = np.hstack([v[:, 3:5], ones])
    if shared_split_block:
        z2 = z1.copy()
    else:
        z2 = np.hstack([v[:, 5:7], ones])
    return x, z1, z2


def _noise(cfg: SimulationConfig, rng: np.random.Generator,
           x: np.ndarray, z1: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return (eps, sigma) for the configured error process."""
    t = x.shape[0]
    if cfg.heteroskedastic:
        sigma = 1.0 + 0.1 * x[:, 0] ** 2 + 0.1 * z1[:, 0] ** 2
    else:
        sigma = np.ones(t)
    e = rng.standard_normal(t)
    return cfg.noise_scale * sigma * e, sigma


def _layout_truth(cfg: SimulationConfig) -> tuple[np.ndarray, list[np.ndarray], list[int]]:
    """Default (betas, gammas, gamma_blocks) for the configured layout."""
    if cfg.layout == "four":
        betas = _DEFAULT_BETAS.copy()
        gammas = [_DEFAULT_GAMMA_1.copy(), _DEFAULT_GAMMA_2.copy()]
        blocks = [1, 2]
    elif cfg.layout == "three_bands":
        betas = _DEFAULT_BETAS[:3].copy()
        gammas = [np.array([1.0, 0.0, -1.0]), np.array([1.0, 0.0, 1.0])]
        blocks = [1, 2]
    elif cfg.layout == "three_wedge":
        betas = _DEFAULT_BETAS[:3].copy()
        gammas = [np.array([1.0, 1.0, 0.0]), np.array([1.0, -1.0, 0.0])]
        blocks = [1, 2]
    elif cfg.layout == "two_halfspace":
        betas = _DEFAULT_BETAS[:2].copy()
        gammas = [np.array([1.0, 1.0, 0.0])]
        blocks = [1]
    elif cfg.layout == "two_quadrant":
        betas = _DEFAULT_BETAS[:2].copy()
        gammas = [_DEFAULT_GAMMA_1.copy(), _DEFAULT_GAMMA_2.copy()]
        blocks = [1, 2]
    elif cfg.layout == "one_global":
        betas = _DEFAULT_BETAS[:1].copy()
        gammas = []
        blocks = []
    else:  # pragma: no cover - guarded by SimulationConfig
        msg = f"unknown layout {cfg.layout!r}"
        raise ConfigError(msg)
    if cfg.betas is not None:
        betas = np.asarray(cfg.betas, dtype=float)
    if cfg.gammas is not None:
        gammas = [np.asarray(g, dtype=float) for g in cfg.gammas]
    return betas, gammas, blocks


def _labels_for_layout(layout: str, q1: np.ndarray | None,
                       q2: np.ndarray | None) -> np.ndarray:
    """Regime labels (1-based) from the boundary values for each layout."""
    if layout == "one_global":
        assert q1 is not None
        return np.ones(q1.shape[0], dtype=np.int64)
    assert q1 is not None
    if layout == "two_halfspace":
        return np.where(q1 > 0, 1, 2).astype(np.int64)
    assert q2 is not None
    pos1 = q1 > 0
    pos2 = q2 > 0
    quadrant = np.select(
        [pos1 & pos2, ~pos1 & pos2, ~pos1 & ~pos2, pos1 & ~pos2],
        [1, 2, 3, 4],
    ).astype(np.int64)
    if layout == "four":
        return quadrant
    if layout == "three_bands":
        # parallel boundaries: the (q1 > 0, q2 <= 0) cell is empty, and the
        # remaining three cells are the bands top-to-bottom
        return quadrant
    if layout == "three_wedge":
        return np.where(quadrant == 4, 3, quadrant)
    if layout == "two_quadrant":
        return np.where(quadrant == 1, 1, 2).astype(np.int64)
    msg = f"unknown layout {layout!r}"  # pragma: no cover
    raise ConfigError(msg)


def _simulate(cfg: SimulationConfig) -> tuple[Dataset, TrueModel]:
    betas, gammas, blocks = _layout_truth(cfg)
    rng_v = derive_rng(cfg.seed, 0)
    rng_e = derive_rng(cfg.seed, 1)
    v = _draw_covariates(cfg, rng_v)
    x, z1, z2 = _blocks_from_v(v, shared_split_block=(cfg.layout == "three_bands"))
    zs = {1: z1, 2: z2}
    qs = [zs[b] @ g for g, b in zip(gammas, blocks)]
    q1 = qs[0] if len(qs) >= 1 else np.zeros(cfg.n_obs)
    q2 = qs[1] if len(qs) >= 2 else None
    labels = _labels_for_layout(cfg.layout, q1, q2)
    if betas.shape[1] != x.shape[1]:
        msg = f"betas have {betas.shape[1]} columns, design has {x.shape[1]}"
        raise ConfigError(msg)
    if labels.max() > betas.shape[0]:
        msg = (
            f"layout {cfg.layout!r} produces {labels.max()} regimes but only "
            f"{betas.shape[0]} beta rows were supplied"
        )
        raise ConfigError(msg)
    eps, _ = _noise(cfg, rng_e, x, z1)
    y = np.einsum("tj,tj->t", x, betas[labels - 1]) + eps
    ds = Dataset(y=y, x=x, z1=z1, z2=z2)
    truth = TrueModel(
        labels=labels,
        betas=betas,
        gammas=tuple(gammas),
        gamma_blocks=tuple(blocks),
        layout=cfg.layout,
    )
    return ds, truth


def simulate_four_regime(cfg: SimulationConfig) -> tuple[Dataset, TrueModel]:
    """Simulate the full four-regime design.

    The covariate vector is 7-dimensional (3 regression + 2 + 2 splitting
    covariates); constants are appended to every block.  Regimes are the
    four sign cells of the two boundary functions.
    """
    if cfg.layout != "four":
        msg = f"simulate_four_regime requires layout='four', got {cfg.layout!r}"
        raise ConfigError(msg)
    return _simulate(cfg)


def simulate_degenerate(cfg: SimulationConfig) -> tuple[Dataset, TrueModel]:
    """Simulate a design with fewer than four true regimes.

    Layouts
    -------
    three_bands
        Both boundaries act on the *same* splitting covariates (the second
        block is a copy of the first) with parallel coefficient vectors, so
        the plane splits into three bands and one sign cell is empty.
    three_wedge
        Crossing boundaries on distinct blocks; the two cells below the
        second boundary share one coefficient vector.
    two_halfspace
        One boundary on the first block; the second block plays no role in
        the response.
    two_quadrant
        The (both positive) cell against the pooled remaining three cells.
    one_global
        A single linear model everywhere.
    """
    if cfg.layout not in DEGENERATE_LAYOUTS:
        msg = (
            f"simulate_degenerate requires a layout in {DEGENERATE_LAYOUTS}, "
            f"got {cfg.layout!r}"
        )
        raise ConfigError(msg)
    return _simulate(cfg)


@dataclass(frozen=True)
class ScalingRecord:
    """Invertible record of the column scaling applied by :func:`standardize`.

    One entry per block; constant columns are flagged and left untouched.
    Scales use the population standard deviation (ddof=0).
    """

    mean: dict[str, tuple[float, ...]]
    scale: dict[str, tuple[float, ...]]
    is_constant: dict[str, tuple[bool, ...]]

    _BLOCKS = ("x", "z1", "z2")

    def to_json(self) -> str:
        payload = {
            "mean": {k: list(v) for k, v in self.mean.items()},
            "scale": {k: list(v) for k, v in self.scale.items()},
            "is_constant": {k: list(v) for k, v in self.is_constant.items()},
        }
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ScalingRecord":
        d = json.loads(text)
        return cls(
            mean={k: tuple(float(x) for x in v) for k, v in d["mean"].items()},
            scale={k: tuple(float(x) for x in v) for k, v in d["scale"].items()},
            is_constant={k: tuple(bool(x) for x in v) for k, v in d["is_constant"].items()},
        )

    def _apply(self, ds: Dataset, forward: bool) -> Dataset:
        out = {}
        for name in self._BLOCKS:
            arr = getattr(ds, name).copy()
            mean = np.asarray(self.mean[name])
            scale = np.asarray(self.scale[name])
            const = np.asarray(self.is_constant[name])
            cols = ~const
            if forward:
                arr[:, cols] = (arr[:, cols] - mean[cols]) / scale[cols]
            else:
                arr[:, cols] = arr[:, cols] * scale[cols] + mean[cols]
            out[name] = arr
        return Dataset(y=ds.y.copy(), x=out["x"], z1=out["z1"], z2=out["z2"],
                       t_index=ds.t_index.copy())

    def transform(self, ds: Dataset) -> Dataset:
        """Apply the recorded scaling to a new dataset."""
        return self._apply(ds, forward=True)

    def inverse(self, ds: Dataset) -> Dataset:
        """Undo the recorded scaling."""
        return self._apply(ds, forward=False)


def standardize(ds: Dataset, constant_columns: dict[str, Sequence[bool]] | None = None,
                ) -> tuple[Dataset, ScalingRecord]:
    """Center and scale each non-constant covariate column.

    Columns are scaled to zero mean and unit *population* standard
    deviation.  Constant columns (detected exactly, or supplied through
    ``constant_columns``) are skipped.  The response is never touched.

    Raises
    ------
    DataError
        If a column declared non-constant has zero variance.
    """
    blocks = {"x": ds.x, "z1": ds.z1, "z2": ds.z2}
    mean: dict[str, tuple[float, ...]] = {}
    scale: dict[str, tuple[float, ...]] = {}
    is_const: dict[str, tuple[bool, ...]] = {}
    for name, arr in blocks.items():
        if constant_columns is not None and name in constant_columns:
            const = np.asarray(constant_columns[name], dtype=bool)
            if const.shape[0] != arr.shape[1]:
                msg = (
                    f"constant_columns[{name!r}] has {const.shape[0]} entries, "
                    f"block has {arr.shape[1]} columns"
                )
                raise ConfigError(msg)
        else:
            const = (arr.max(axis=0) - arr.min(axis=0)) == 0.0
        mu = arr.mean(axis=0)
        sd = arr.std(axis=0)  # population SD
        zero_var = (sd == 0.0) & ~const
        if np.any(zero_var):
            cols = np.flatnonzero(zero_var).tolist()
            msg = f"block {name!r}: zero-variance non-constant column(s) {cols}"
            raise DataError(msg)
        mu = np.where(const, 0.0, mu)
        sd = np.where(const, 1.0, sd)
        mean[name] = tuple(float(v) for v in mu)
        scale[name] = tuple(float(v) for v in sd)
        is_const[name] = tuple(bool(v) for v in const)
    record = ScalingRecord(mean=mean, scale=scale, is_constant=is_const)
    return record.transform(ds), record


__all__ = [
    "ColumnSchema",
    "Dataset",
    "DEGENERATE_LAYOUTS",
    "ScalingRecord",
    "SimulationConfig",
    "TrueModel",
    "dataset_to_csv",
    "derive_rng",
    "load_csv",
    "simulate_degenerate",
    "simulate_four_regime",
    "standardize",
]
