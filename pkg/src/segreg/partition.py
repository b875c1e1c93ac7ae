"""Boundary coefficients, regime assignment, and solution-set geometry.

Two linear boundary functions ``q_j(t) = z_j_t' gamma_j`` split the sample
into four regimes by sign pattern:

    regime 1: q1 > 0,  q2 > 0        regime 2: q1 <= 0, q2 > 0
    regime 3: q1 <= 0, q2 <= 0       regime 4: q1 > 0,  q2 <= 0

Boundary coefficients are normalized so their first entry is one; the
remaining (free) entries live in a compact box.  Because the least-squares
criterion depends on gamma only through the induced sign pattern, the
minimizer is a convex polytope of coefficients, not a point; this module
owns the polytope machinery (candidate enumeration, vertex sampling, and
the centroid summary).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ._kernels import enum_patterns_d1, enum_patterns_d2
from .data_model import Dataset, derive_rng
from .errors import ConfigError, SolverError

logger = logging.getLogger(__name__)

#: half-width of the compact box for each free boundary coefficient
DEFAULT_BOX_HALFWIDTH = 10.0

#: regime label for each packed sign id 2*s1 + s2
_LABEL_OF_PACKED = np.array([3, 2, 4, 1], dtype=np.int64)

#: sign pattern (s1, s2) of each regime label, index 1..4
SIGNS_OF_REGIME = {1: (1, 1), 2: (0, 1), 3: (0, 0), 4: (1, 0)}


@dataclass(frozen=True)
class Gamma:
    """Coefficients of one splitting boundary.

    ``coef[0]`` is the coefficient on the first splitting covariate; the
    canonical (normalized) form has ``coef[0] == 1``.
    """

    coef: np.ndarray

    def __post_init__(self) -> None:
        coef = np.asarray(self.coef, dtype=float).reshape(-1)
        if coef.shape[0] < 1:
            msg = "gamma must have at least one coefficient"
            raise ConfigError(msg)
        if not np.all(np.isfinite(coef)):
            msg = "gamma coefficients must be finite"
            raise ConfigError(msg)
        if not np.any(coef != 0.0):
            msg = "gamma must not be the zero vector"
            raise ConfigError(msg)
        object.__setattr__(self, "coef", coef)

    @property
    def dim(self) -> int:
        return self.coef.shape[0]

    @property
    def is_normalized(self) -> bool:
        return self.coef[0] == 1.0

    @property
    def free(self) -> np.ndarray:
        """Free coefficients of the normalized form (everything past the first)."""
        return self.normalized().coef[1:]

    def normalized(self) -> "Gamma":
        """Rescale so the first coefficient is one (requires it positive)."""
        if self.coef[0] == 1.0:
            return self
        if self.coef[0] <= 0.0:
            msg = (
                "cannot normalize: leading coefficient must be positive, "
                f"got {self.coef[0]!r}"
            )
            raise ConfigError(msg)
        return Gamma(self.coef / self.coef[0])

    def value(self, z: np.ndarray) -> np.ndarray:
        """Boundary function values z @ coef."""
        z = np.asarray(z, dtype=float)
        if z.shape[-1] != self.dim:
            msg = f"z has {z.shape[-1]} columns, gamma has {self.dim}"
            raise ConfigError(msg)
        return z @ self.coef

    @classmethod
    def from_free(cls, free: np.ndarray) -> "Gamma":
        return cls(np.concatenate([[1.0], np.asarray(free, dtype=float).reshape(-1)]))


@dataclass(frozen=True)
class RegimeAssignment:
    """Regime labels induced by a boundary pair on a dataset."""

    labels: np.ndarray
    side1: np.ndarray
    side2: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=np.int64))
        object.__setattr__(self, "side1", np.asarray(self.side1, dtype=np.uint8))
        object.__setattr__(self, "side2", np.asarray(self.side2, dtype=np.uint8))

    @property
    def counts(self) -> np.ndarray:
        """Observation count per regime label 1..4 (index 0 unused)."""
        return np.bincount(self.labels, minlength=5)

    @classmethod
    def from_sides(cls, side1: np.ndarray, side2: np.ndarray) -> "RegimeAssignment":
        side1 = np.asarray(side1, dtype=np.uint8)
        side2 = np.asarray(side2, dtype=np.uint8)
        packed = 2 * side1.astype(np.int64) + side2.astype(np.int64)
        return cls(labels=_LABEL_OF_PACKED[packed], side1=side1, side2=side2)


def regime_index(pos1, pos2):
    """Regime label (1..4) from the sign indicators of the two boundaries.

    Accepts scalars or aligned arrays; ``pos_j`` is truthy when ``q_j > 0``.
    """
    s1 = np.asarray(pos1, dtype=np.int64)
    s2 = np.asarray(pos2, dtype=np.int64)
    out = _LABEL_OF_PACKED[2 * s1 + s2]
    if np.isscalar(pos1) or (s1.ndim == 0):
        return int(out)
    return out


def assign(ds: Dataset, gamma1: Gamma, gamma2: Gamma) -> RegimeAssignment:
    """Assign every observation to its regime under a boundary pair.

    Invariant to positive rescaling of either gamma; observations with a
    boundary value of exactly zero fall on the non-positive side.
    """
    q1 = gamma1.value(ds.z1)
    q2 = gamma2.value(ds.z2)
    return RegimeAssignment.from_sides(q1 > 0.0, q2 > 0.0)


# ---------------------------------------------------------------------------
# polytope machinery in the free-coefficient space (dimension 1 or 2)
# ---------------------------------------------------------------------------


def _box_polygon(halfwidth: float) -> np.ndarray:
    h = float(halfwidth)
    return np.array([[-h, -h], [h, -h], [h, h], [-h, h]])


def _clip_halfplane(poly: np.ndarray, a: float, b: np.ndarray, rhs: float) -> np.ndarray:
    """Sutherland-Hodgman clip of ``poly`` to the halfplane a + b.w >= rhs."""
    if poly.shape[0] == 0:
        return poly
    vals = a + poly @ b - rhs
    out: list[np.ndarray] = []
    n = poly.shape[0]
    for i in range(n):
        j = (i + 1) % n
        vi, vj = vals[i], vals[j]
        if vi >= 0.0:
            out.append(poly[i])
        if (vi > 0.0 and vj < 0.0) or (vi < 0.0 and vj > 0.0):
            t = vi / (vi - vj)
            out.append(poly[i] + t * (poly[j] - poly[i]))
    if not out:
        return np.empty((0, 2))
    return np.asarray(out)


def _cell_polytope(z: np.ndarray, sides: np.ndarray, halfwidth: float,
                   margin: float) -> np.ndarray:
    """Feasible free coefficients for a side pattern, as polygon or interval.

    Positive-side rows require ``q >= margin``; non-positive rows require
    ``q <= 0``.  Returns an (m, D) vertex array (D = z columns - 1); empty
    when infeasible.
    """
    a = z[:, 0]
    b = z[:, 1:]
    d_free = b.shape[1]
    if d_free == 1:
        lo, hi = -halfwidth, halfwidth
        for t in range(z.shape[0]):
            bt = b[t, 0]
            if sides[t]:
                # a + b w >= margin
                if bt > 0.0:
                    lo = max(lo, (margin - a[t]) / bt)
                elif bt < 0.0:
                    hi = min(hi, (margin - a[t]) / bt)
                elif a[t] < margin:
                    return np.empty((0, 1))
            else:
                # a + b w <= 0
                if bt > 0.0:
                    hi = min(hi, -a[t] / bt)
                elif bt < 0.0:
                    lo = max(lo, -a[t] / bt)
                elif a[t] > 0.0:
                    return np.empty((0, 1))
        if lo > hi:
            return np.empty((0, 1))
        return np.array([[lo], [hi]])
    if d_free == 2:
        poly = _box_polygon(halfwidth)
        for t in range(z.shape[0]):
            if sides[t]:
                poly = _clip_halfplane(poly, a[t], b[t], margin)
            else:
                poly = _clip_halfplane(poly, -a[t], -b[t], 0.0)
            if poly.shape[0] == 0:
                return np.empty((0, 2))
        return poly
    msg = f"solution-set geometry supports 1 or 2 free coefficients, got {d_free}"
    raise ConfigError(msg)


@dataclass(frozen=True)
class GammaSolutionSet:
    """Sampled description of the minimizing set of boundary coefficients.

    ``samples_1``/``samples_2`` hold N normalized coefficient vectors per
    boundary obtained by maximizing random linear objectives over the
    feasibility polytope of the optimal sign pattern (vertex sampling);
    ``centroid`` is their mean, guaranteed to reproduce the sign pattern.
    """

    samples_1: np.ndarray
    samples_2: np.ndarray
    centroid_1: Gamma
    centroid_2: Gamma
    side1: np.ndarray
    side2: np.ndarray
    margin: float

    @property
    def n_samples(self) -> int:
        return self.samples_1.shape[0]

    def distance_to(self, coef: np.ndarray, boundary: int) -> float:
        """Euclidean distance from a coefficient vector to the sampled set."""
        samples = self.samples_1 if boundary == 1 else self.samples_2
        coef = np.asarray(coef, dtype=float).reshape(1, -1)
        return float(np.min(np.linalg.norm(samples - coef, axis=1)))

    def to_dict(self) -> dict:
        return {
            "samples_1": self.samples_1.tolist(),
            "samples_2": self.samples_2.tolist(),
            "centroid_1": self.centroid_1.coef.tolist(),
            "centroid_2": self.centroid_2.coef.tolist(),
            "side1": self.side1.astype(int).tolist(),
            "side2": self.side2.astype(int).tolist(),
            "margin": float(self.margin),
        }


def _data_scale(z: np.ndarray) -> float:
    s = float(np.median(np.abs(z)))
    return s if s > 0.0 else 1.0


def _sample_polytope(verts: np.ndarray, n_samples: int,
                     rng: np.random.Generator) -> np.ndarray:
    """Vertex sampling: maximize random linear objectives over the polytope."""
    d = verts.shape[1]
    if d == 1:
        lo, hi = float(verts.min()), float(verts.max())
        picks = np.where(rng.standard_normal(n_samples) > 0.0, hi, lo)
        return picks[:, None]
    dirs = rng.standard_normal((n_samples, 2))
    norms = np.linalg.norm(dirs, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    dirs /= norms
    scores = dirs @ verts.T
    return verts[np.argmax(scores, axis=1)]


def _pattern_violations(z: np.ndarray, want: np.ndarray,
                        pts: np.ndarray) -> np.ndarray:
    # evaluate q exactly as assign() does (one gemv per coefficient vector)
    # so verification and downstream use share the same float rounding
    out = np.empty(pts.shape[0], dtype=bool)
    for n in range(pts.shape[0]):
        coef = np.concatenate([[1.0], pts[n]])
        q = z @ coef
        out[n] = not np.array_equal(q > 0.0, want)
    return out


def _nudge_until_valid(z: np.ndarray, sides: np.ndarray, interior: np.ndarray,
                       pts: np.ndarray, what: str) -> np.ndarray:
    """Move float-boundary violators progressively toward the interior."""
    want = sides.astype(bool)
    pts = pts.copy()
    bad = _pattern_violations(z, want, pts)
    for shrink in (1e-12, 1e-9, 1e-6, 1e-3):
        if not bad.any():
            return pts
        pts[bad] += shrink * (interior[None, :] - pts[bad])
        bad = _pattern_violations(z, want, pts)
    if bad.any():
        msg = (
            f"{int(bad.sum())} polytope {what}(s) fail to reproduce the sign "
            "pattern; the pattern appears infeasible at floating-point resolution"
        )
        raise SolverError(msg)
    return pts


def _verified_samples(z: np.ndarray, sides: np.ndarray, verts: np.ndarray,
                      n_samples: int, rng: np.random.Generator) -> np.ndarray:
    """Sample vertices and nudge any float-boundary violations inward."""
    samples = _sample_polytope(verts, n_samples, rng)
    return _nudge_until_valid(z, sides, verts.mean(axis=0), samples, "sample")


def solution_set_sample(ds: Dataset, assignment: RegimeAssignment,
                        n_samples: int = 100, seed: int = 0,
                        margin: float | None = None,
                        box_halfwidth: float = DEFAULT_BOX_HALFWIDTH,
                        ) -> GammaSolutionSet:
    """Sample the set of boundary coefficients inducing a sign pattern.

    For each boundary, the feasible set of free coefficients is the box
    intersected with ``q_t >= margin`` (positive side) and ``q_t <= 0``
    (non-positive side).  N vertices are drawn by maximizing random linear
    objectives; the centroid is their mean.

    When ``margin`` is None, a data-scaled default is used and shrunk (down
    to essentially zero) if it alone makes the pattern infeasible; an
    explicitly supplied margin is used as-is.  A pattern infeasible at zero
    margin raises `SolverError`.
    """
    if n_samples < 1:
        msg = f"n_samples must be positive, got {n_samples}"
        raise ConfigError(msg)
    rng = derive_rng(seed, 907)
    out_samples: list[np.ndarray] = []
    out_centroids: list[Gamma] = []
    used_margin = 0.0
    for j, (z, sides) in enumerate(((ds.z1, assignment.side1),
                                    (ds.z2, assignment.side2)), start=1):
        if margin is not None:
            margins = [float(margin)]
        else:
            base = 1e-7 * _data_scale(z)
            margins = [base * (0.01 ** k) for k in range(12)] + [0.0]
        verts = np.empty((0, 0))
        for eps in margins:
            verts = _cell_polytope(z, sides, box_halfwidth, eps)
            if verts.shape[0] > 0:
                used_margin = eps
                break
        if verts.shape[0] == 0:
            msg = (
                f"boundary {j}: no coefficient in the box reproduces the "
                "requested sign pattern (contradictory constraints)"
            )
            raise SolverError(msg)
        free = _verified_samples(z, sides, verts, n_samples, rng)
        cen = _nudge_until_valid(z, sides, verts.mean(axis=0),
                                 free.mean(axis=0, keepdims=True), "centroid")
        ones = np.ones((n_samples, 1))
        out_samples.append(np.hstack([ones, free]))
        out_centroids.append(Gamma.from_free(cen[0]))
    centroid1, centroid2 = out_centroids
    sol = GammaSolutionSet(
        samples_1=out_samples[0],
        samples_2=out_samples[1],
        centroid_1=centroid1,
        centroid_2=centroid2,
        side1=assignment.side1.copy(),
        side2=assignment.side2.copy(),
        margin=used_margin,
    )
    check = assign(ds, centroid1, centroid2)
    if not (np.array_equal(check.side1, assignment.side1)
            and np.array_equal(check.side2, assignment.side2)):
        msg = "solution-set centroid does not reproduce the sign pattern"
        raise SolverError(msg)
    return sol


# ---------------------------------------------------------------------------
# candidate hyperplane enumeration
# ---------------------------------------------------------------------------


def induced_pattern(z: np.ndarray, gamma: Gamma) -> np.ndarray:
    """uint8 side pattern of one boundary over the rows of ``z``."""
    return (gamma.value(z) > 0.0).astype(np.uint8)


def realizable_patterns(z: np.ndarray,
                        box_halfwidth: float = DEFAULT_BOX_HALFWIDTH) -> np.ndarray:
    """All side patterns achievable by a normalized boundary on ``z``.

    Returns a deduplicated (m, T) uint8 array.  Exact, via arrangement-cell
    enumeration in the free-coefficient space.
    """
    z = np.ascontiguousarray(z, dtype=float)
    d = z.shape[1]
    az = np.ascontiguousarray(z[:, 0])
    if d == 1:
        return np.unique((z[:, 0] > 0.0).astype(np.uint8)[None, :], axis=0)
    if d == 2:
        cnt, buf = enum_patterns_d1(az, np.ascontiguousarray(z[:, 1]),
                                    -box_halfwidth, box_halfwidth)
    elif d == 3:
        lo = np.full(2, -box_halfwidth)
        hi = np.full(2, box_halfwidth)
        cnt, buf = enum_patterns_d2(az, np.ascontiguousarray(z[:, 1:]), lo, hi)
    else:
        msg = f"pattern enumeration supports 1-3 splitting columns, got {d}"
        raise ConfigError(msg)
    return np.unique(buf[:cnt], axis=0)


def enumerate_candidate_hyperplanes(z: np.ndarray,
                                    box_halfwidth: float = DEFAULT_BOX_HALFWIDTH,
                                    delta: float | None = None) -> list[Gamma]:
    """Finite candidate set realizing every achievable side dichotomy.

    Construction: for every subset of ``d - 1`` rows, solve ``z_t @ gamma = 0``
    (first coefficient fixed to one) for the free coefficients, then probe
    around the solution point with ``+/- delta`` steps along each free
    coordinate so both side-assignments of the touching rows are realized.
    Singular subsets are skipped.  Additional probes (box corners/center,
    wedge bisectors at crossing points, and per-row probes along each row's
    zero line) guard the cells those solution-point probes can miss, e.g.
    cells whose vertices all fall outside the coefficient box.  Candidates
    are deduplicated by their induced dichotomy.

    For datasets this enumeration is meant for (small T), the returned list
    has one candidate per achievable dichotomy.
    """
    z = np.asarray(z, dtype=float)
    t_total, d = z.shape
    if d < 1 or d > 3:
        msg = f"candidate enumeration supports 1-3 splitting columns, got {d}"
        raise ConfigError(msg)
    if t_total < 1:
        msg = "need at least one observation"
        raise ConfigError(msg)
    if delta is None:
        delta = 1e-7 * (1.0 + _data_scale(z))
    if d == 1:
        return [Gamma(np.array([1.0]))]

    a = z[:, 0]
    b = z[:, 1:]
    h = float(box_halfwidth)
    probes: list[np.ndarray] = []
    n_singular = 0

    if d == 2:
        for t in range(t_total):
            if b[t, 0] == 0.0:
                n_singular += 1
                continue
            w = -a[t] / b[t, 0]
            step = delta * (1.0 + abs(w))
            probes.append(np.array([w - step]))
            probes.append(np.array([w + step]))
        probes.append(np.array([-h]))
        probes.append(np.array([h]))
        probes.append(np.array([0.0]))
    else:
        # subset solutions: crossing points of row pairs
        for s in range(t_total):
            for t in range(s + 1, t_total):
                mat = np.array([b[s], b[t]])
                rhs = -np.array([a[s], a[t]])
                det = mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0]
                scale = np.max(np.abs(mat)) ** 2 + 1e-300
                if abs(det) <= 1e-14 * scale:
                    n_singular += 1
                    continue
                w = np.linalg.solve(mat, rhs)
                step = delta * (1.0 + float(np.linalg.norm(w)))
                # axis probes realize side combinations of the touching rows
                for m in range(2):
                    for sgn in (-1.0, 1.0):
                        e = np.zeros(2)
                        e[m] = sgn * step
                        probes.append(w + e)
                # wedge bisectors: guaranteed to land in all four cells
                # around the crossing regardless of the line orientations
                us = np.array([-b[s, 1], b[s, 0]])
                ut = np.array([-b[t, 1], b[t, 0]])
                us = us / np.linalg.norm(us)
                ut = ut / np.linalg.norm(ut)
                for direction in (us + ut, us - ut, -us - ut, -us + ut):
                    nrm = np.linalg.norm(direction)
                    if nrm > 1e-12:
                        probes.append(w + step * direction / nrm)
        # per-row probes: walk each row's zero line across the box and probe
        # both sides of every segment between crossings
        box = np.array([-h, -h, h, h])
        for s in range(t_total):
            nb2 = b[s] @ b[s]
            if nb2 == 0.0:
                continue
            nb = np.sqrt(nb2)
            w0 = -a[s] * b[s] / nb2
            v = np.array([-b[s, 1], b[s, 0]]) / nb
            nrm = b[s] / nb
            ulo, uhi = -np.inf, np.inf
            ok = True
            for i in range(2):
                if v[i] == 0.0:
                    if not (-h <= w0[i] <= h):
                        ok = False
                        break
                else:
                    t1 = (-h - w0[i]) / v[i]
                    t2 = (h - w0[i]) / v[i]
                    ulo = max(ulo, min(t1, t2))
                    uhi = min(uhi, max(t1, t2))
            if not ok or ulo >= uhi:
                continue
            cuts = [ulo, uhi]
            for t in range(t_total):
                if t == s:
                    continue
                alpha = a[t] + b[t] @ w0
                dlt = b[t] @ v
                if dlt != 0.0:
                    u = -alpha / dlt
                    if ulo < u < uhi:
                        cuts.append(u)
            cuts.sort()
            for i in range(len(cuts) - 1):
                mid = w0 + 0.5 * (cuts[i] + cuts[i + 1]) * v
                step = delta * (1.0 + float(np.linalg.norm(mid)))
                probes.append(mid + step * nrm)
                probes.append(mid - step * nrm)
        for cx in (-h, 0.0, h):
            for cy in (-h, 0.0, h):
                probes.append(np.array([cx, cy]))

    if n_singular:
        logger.debug("candidate enumeration skipped %d singular subsets", n_singular)

    seen: dict[bytes, Gamma] = {}
    for w in probes:
        if np.any(np.abs(w) > h):
            continue
        gamma = Gamma.from_free(w)
        key = induced_pattern(z, gamma).tobytes()
        if key not in seen:
            seen[key] = gamma
    return list(seen.values())


__all__ = [
    "DEFAULT_BOX_HALFWIDTH",
    "Gamma",
    "GammaSolutionSet",
    "RegimeAssignment",
    "SIGNS_OF_REGIME",
    "assign",
    "enumerate_candidate_hyperplanes",
    "induced_pattern",
    "realizable_patterns",
    "regime_index",
    "solution_set_sample",
]
