"""Mixed-integer quadratic program: build, LP-format export, branch and bound.

The profile least-squares problem has an exact MIQP reformulation.  With
binaries ``g_{j,t} = 1{z_{j,t}'gamma_j > 0}`` and ``I_{k,t} = 1{t in regime
k}``, and auxiliaries ``l_{k,i,t} = I_{k,t} beta_{k,i}``, the objective

    (1/T) sum_t (y_t - sum_k sum_i x_{t,i} l_{k,i,t})^2

is quadratic in ``l`` and all couplings are linear:

* big-M rows tie ``g`` to the sign of the boundary value, with the strict
  inequality realised through a small positive slack ``eps``;
* box rows force ``l_{k,i,t} = 0`` when ``I_{k,t} = 0`` and
  ``l_{k,i,t} = beta_{k,i}`` when ``I_{k,t} = 1``;
* linking rows make ``I_{k,t}`` the product of the two (possibly negated)
  ``g``'s selected by the regime's sign pair.

``M_{j,t} = max over the gamma box of |z_{j,t}'gamma|`` has the closed form
``|z_{t,0}| + halfwidth * sum_m |z_{t,m}|`` because the leading coefficient
is fixed at one and the free coefficients range over a centred box.

The built model can be written as a standard LP-format text file
(:func:`emit_lp`) for use with external MIQP solvers, or solved in-process
by :func:`solve_bb`, a depth-first branch and bound over the ``g``
variables.  The in-process solver never touches the LP relaxation; instead
each node keeps, per boundary, the polytope of free coefficients consistent
with the signs fixed so far.  An empty polytope prunes the node, and signs
whose boundary value has constant sign over the polytope are propagated
without branching.  The node lower bound is the per-group least-squares SSR
over the observations whose regime is already determined, which can only
grow as more signs are fixed and equals the true objective at a leaf.
Branching follows increasing warm-start boundary distance, so the most
ambiguous observations are resolved first and the rest are typically forced
geometrically.

Bounds on ``beta`` must contain the per-regime least-squares solutions for
the MIQP optimum to coincide with the unconstrained criterion minimum;
standardizing the data and keeping the default box is the intended use.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ._kernels import _gram_ssr
from .data_model import Dataset
from .errors import ConfigError, DataError, SolverError
from .estimator import SolverConfig, FittedModel, _check_problem, _finalize, fit_bcd
from .partition import DEFAULT_BOX_HALFWIDTH, _clip_halfplane, _box_polygon

logger = logging.getLogger(__name__)

#: Largest sample size accepted by the in-process branch-and-bound solver.
BB_T_CAP = 120

_DEFAULT_BETA_BOUND = 10.0


@dataclass(frozen=True)
class LinearRow:
    """One linear constraint: ``sum(coef * var) sense rhs``."""

    name: str
    terms: tuple[tuple[str, float], ...]
    sense: str  # "<=" or ">="
    rhs: float


@dataclass(frozen=True)
class MiqpModel:
    """The assembled program plus the data it was built from.

    ``objective_quad`` stores LP-bracket coefficients, i.e. twice the true
    quadratic coefficient, because the LP format divides the bracket by
    two.  The objective is in mean-square units (SSR / T).
    """

    t: int
    p: int
    d1: int
    d2: int
    continuous: tuple[str, ...]
    binaries: tuple[str, ...]
    bounds: dict[str, tuple[float, float]]
    objective_constant: float
    objective_linear: tuple[tuple[str, float], ...]
    objective_quad: tuple[tuple[str, str, float], ...]
    rows: tuple[LinearRow, ...]
    big_m: np.ndarray
    eps: float
    beta_lower: np.ndarray
    beta_upper: np.ndarray
    box_halfwidth: float
    ds: Dataset = field(repr=False)


def _median_abs_scale(ds: Dataset) -> float:
    vals = np.abs(np.concatenate([ds.z1.ravel(), ds.z2.ravel()]))
    scale = float(np.median(vals))
    return scale if scale > 0 else 1.0


def build(ds: Dataset, beta_bounds: tuple[float, float] | None = None,
          box_halfwidth: float = DEFAULT_BOX_HALFWIDTH,
          eps: float | None = None) -> MiqpModel:
    """Assemble the exact mixed-integer reformulation for a dataset.

    ``beta_bounds`` is a global (lower, upper) pair applied to every
    coefficient; the default is (-10, 10), intended for standardized data.
    ``eps`` is the strict-inequality slack, default ``1e-6`` times the
    median absolute splitting-covariate value.
    """
    t, p = ds.n_obs, ds.p
    d1, d2 = ds.d1, ds.d2
    if max(d1, d2) > 3:
        raise ConfigError("boundaries with more than 3 coefficients are "
                          "not supported")
    if beta_bounds is None:
        beta_bounds = (-_DEFAULT_BETA_BOUND, _DEFAULT_BETA_BOUND)
    lo_b, up_b = float(beta_bounds[0]), float(beta_bounds[1])
    if not (np.isfinite(lo_b) and np.isfinite(up_b)) or lo_b >= up_b:
        raise ConfigError("beta bounds must be finite with lower < upper")
    if eps is None:
        eps = 1e-6 * _median_abs_scale(ds)
    if not eps > 0:
        raise ConfigError("eps must be positive")

    z = (ds.z1, ds.z2)
    big_m = np.empty((2, t))
    for j in range(2):
        big_m[j] = np.abs(z[j][:, 0]) + box_halfwidth * np.abs(z[j][:, 1:]).sum(axis=1)
    if not np.all(np.isfinite(big_m)):
        raise DataError("non-finite big-M constant; check the splitting covariates")

    beta_names = [f"beta_{k}_{i}" for k in range(1, 5) for i in range(1, p + 1)]
    gamma_names = [f"gamma_1_{m}" for m in range(1, d1)]
    gamma_names += [f"gamma_2_{m}" for m in range(1, d2)]
    l_names = [f"l_{k}_{i}_{s}" for k in range(1, 5) for i in range(1, p + 1)
               for s in range(1, t + 1)]
    g_names = [f"g_{j}_{s}" for j in (1, 2) for s in range(1, t + 1)]
    i_names = [f"I_{k}_{s}" for k in range(1, 5) for s in range(1, t + 1)]

    bounds: dict[str, tuple[float, float]] = {}
    for name in beta_names:
        bounds[name] = (lo_b, up_b)
    for name in gamma_names:
        bounds[name] = (-box_halfwidth, box_halfwidth)
    l_lo, l_up = min(lo_b, 0.0), max(up_b, 0.0)
    for name in l_names:
        bounds[name] = (l_lo, l_up)

    # ---- objective: (1/T) sum_t (y_t - sum_{k,i} x_{t,i} l_{k,i,t})^2
    y = ds.y
    x = ds.x
    constant = float(y @ y) / t
    linear: list[tuple[str, float]] = []
    quad: list[tuple[str, str, float]] = []
    ki_pairs = [(k, i) for k in range(1, 5) for i in range(1, p + 1)]
    for s in range(1, t + 1):
        xs = x[s - 1]
        ys = y[s - 1]
        for k, i in ki_pairs:
            coef = -2.0 * ys * xs[i - 1] / t
            if coef != 0.0:
                linear.append((f"l_{k}_{i}_{s}", coef))
        # bracket coefficients are doubled (the LP bracket is halved)
        for a in range(len(ki_pairs)):
            ka, ia = ki_pairs[a]
            xa = xs[ia - 1]
            if xa == 0.0:
                continue
            name_a = f"l_{ka}_{ia}_{s}"
            quad.append((name_a, name_a, 2.0 * xa * xa / t))
            for b in range(a + 1, len(ki_pairs)):
                kb, ib = ki_pairs[b]
                xb = xs[ib - 1]
                if xb == 0.0:
                    continue
                quad.append((name_a, f"l_{kb}_{ib}_{s}", 4.0 * xa * xb / t))

    # ---- constraint rows
    rows: list[LinearRow] = []
    signs = {1: (1, 1), 2: (-1, 1), 3: (-1, -1), 4: (1, -1)}

    for j in (1, 2):
        zj = z[j - 1]
        for s in range(1, t + 1):
            m_js = float(big_m[j - 1, s - 1])
            z0 = float(zj[s - 1, 0])
            gamma_terms = tuple(
                (f"gamma_{j}_{m}", float(zj[s - 1, m]))
                for m in range(1, zj.shape[1])
            )
            # (g - 1)(M + eps) + eps <= z'gamma  <=>
            # z_free'w - (M + eps) g >= eps - (M + eps) - z0
            rows.append(LinearRow(
                name=f"glo_{j}_{s}",
                terms=gamma_terms + ((f"g_{j}_{s}", -(m_js + eps)),),
                sense=">=",
                rhs=eps - (m_js + eps) - z0,
            ))
            # z'gamma <= g M  <=>  z_free'w - M g <= -z0
            rows.append(LinearRow(
                name=f"ghi_{j}_{s}",
                terms=gamma_terms + ((f"g_{j}_{s}", -m_js),),
                sense="<=",
                rhs=-z0,
            ))

    for k in range(1, 5):
        for i in range(1, p + 1):
            for s in range(1, t + 1):
                l_name = f"l_{k}_{i}_{s}"
                i_name = f"I_{k}_{s}"
                b_name = f"beta_{k}_{i}"
                # I L <= l <= I U
                rows.append(LinearRow(f"llo_{k}_{i}_{s}",
                                      ((l_name, 1.0), (i_name, -lo_b)),
                                      ">=", 0.0))
                rows.append(LinearRow(f"lhi_{k}_{i}_{s}",
                                      ((l_name, 1.0), (i_name, -up_b)),
                                      "<=", 0.0))
                # L(1 - I) <= beta - l <= U(1 - I)
                rows.append(LinearRow(f"blo_{k}_{i}_{s}",
                                      ((b_name, 1.0), (l_name, -1.0),
                                       (i_name, lo_b)),
                                      ">=", lo_b))
                rows.append(LinearRow(f"bhi_{k}_{i}_{s}",
                                      ((b_name, 1.0), (l_name, -1.0),
                                       (i_name, up_b)),
                                      "<=", up_b))

    for k in range(1, 5):
        s1, s2 = signs[k]
        for s in range(1, t + 1):
            i_name = f"I_{k}_{s}"
            # I <= s_j g_j + (1 - s_j)/2, each boundary
            for j, sj in ((1, s1), (2, s2)):
                rows.append(LinearRow(
                    f"ig_{k}_{s}_{j}",
                    ((i_name, 1.0), (f"g_{j}_{s}", -float(sj))),
                    "<=",
                    (1.0 - sj) / 2.0,
                ))
            # I >= sum_j [s_j g_j + (1 - s_j)/2] - 1
            rows.append(LinearRow(
                f"igl_{k}_{s}",
                ((i_name, 1.0), (f"g_1_{s}", -float(s1)),
                 (f"g_2_{s}", -float(s2))),
                ">=",
                (1.0 - s1) / 2.0 + (1.0 - s2) / 2.0 - 1.0,
            ))

    return MiqpModel(
        t=t, p=p, d1=d1, d2=d2,
        continuous=tuple(beta_names + gamma_names + l_names),
        binaries=tuple(g_names + i_names),
        bounds=bounds,
        objective_constant=constant,
        objective_linear=tuple(linear),
        objective_quad=tuple(quad),
        rows=tuple(rows),
        big_m=big_m,
        eps=float(eps),
        beta_lower=np.full(p, lo_b),
        beta_upper=np.full(p, up_b),
        box_halfwidth=float(box_halfwidth),
        ds=ds,
    )


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def _fold(tokens: list[str], indent: str = " ", width: int = 200) -> list[str]:
    """Join tokens into lines no wider than ``width``; deterministic."""
    lines: list[str] = []
    cur = indent
    for tok in tokens:
        if len(cur) + len(tok) + 1 > width and cur != indent:
            lines.append(cur)
            cur = indent
        cur += (" " if cur != indent else "") + tok
    if cur.strip():
        lines.append(cur)
    return lines


def _term_tokens(terms) -> list[str]:
    toks: list[str] = []
    for name, coef in terms:
        sign = "-" if coef < 0 else "+"
        toks.append(f"{sign} {_fmt(abs(coef))} {name}")
    return toks


def emit_lp(model: MiqpModel, path=None) -> str:
    """Serialize the model as LP-format text; byte-identical per model.

    Quadratic objective terms appear inside ``[ ... ] / 2`` with doubled
    coefficients, squares written ``name ^ 2`` and products ``a * b``.
    When ``path`` is given the text is also written there.
    """
    out: list[str] = []
    out.append("\\ four-regime segmented least squares, exact "
               "mixed-integer form")
    out.append(f"\\ T={model.t} p={model.p} d1={model.d1} d2={model.d2} "
               f"eps={_fmt(model.eps)}")
    out.append("Minimize")
    obj_tokens = [f"+ {_fmt(model.objective_constant)}"]
    obj_tokens += _term_tokens(model.objective_linear)
    obj_tokens.append("+ [")
    for a, b, coef in model.objective_quad:
        sign = "-" if coef < 0 else "+"
        if a == b:
            obj_tokens.append(f"{sign} {_fmt(abs(coef))} {a} ^ 2")
        else:
            obj_tokens.append(f"{sign} {_fmt(abs(coef))} {a} * {b}")
    obj_tokens.append("] / 2")
    first, *rest = _fold(obj_tokens, indent="   ")
    out.append(" obj:" + first[2:])
    out.extend(rest)
    out.append("Subject To")
    for row in model.rows:
        tokens = _term_tokens(row.terms)
        tokens.append(row.sense)
        tokens.append(_fmt(row.rhs))
        first, *rest = _fold(tokens, indent="   ")
        out.append(f" {row.name}:" + first[2:])
        out.extend(rest)
    out.append("Bounds")
    for name in model.continuous:
        lo, hi = model.bounds[name]
        out.append(f" {_fmt(lo)} <= {name} <= {_fmt(hi)}")
    out.append("Binaries")
    out.extend(_fold(list(model.binaries)))
    out.append("End")
    text = "\n".join(out) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def feasible_point(model: MiqpModel, gamma1, gamma2,
                   betas: dict[int, np.ndarray]) -> dict[str, float]:
    """Variable assignment induced by boundary coefficients and betas.

    Computes ``g``, ``I`` and ``l`` from their definitions.  Useful for
    checking constraint satisfaction and evaluating the objective.
    """
    ds = model.ds
    g1 = np.asarray(gamma1.coef if hasattr(gamma1, "coef") else gamma1, float)
    g2 = np.asarray(gamma2.coef if hasattr(gamma2, "coef") else gamma2, float)
    q1 = ds.z1 @ g1
    q2 = ds.z2 @ g2
    gbin = np.stack([(q1 > 0).astype(int), (q2 > 0).astype(int)])
    signs = {1: (1, 1), 2: (-1, 1), 3: (-1, -1), 4: (1, -1)}
    point: dict[str, float] = {}
    for m in range(1, ds.d1):
        point[f"gamma_1_{m}"] = float(g1[m])
    for m in range(1, ds.d2):
        point[f"gamma_2_{m}"] = float(g2[m])
    for j in (1, 2):
        for s in range(1, model.t + 1):
            point[f"g_{j}_{s}"] = float(gbin[j - 1, s - 1])
    for k in range(1, 5):
        beta = np.asarray(betas[k], float)
        s1, s2 = signs[k]
        for i in range(1, model.p + 1):
            point[f"beta_{k}_{i}"] = float(beta[i - 1])
        for s in range(1, model.t + 1):
            in_k = ((s1 * gbin[0, s - 1] + (1 - s1) / 2)
                    * (s2 * gbin[1, s - 1] + (1 - s2) / 2))
            point[f"I_{k}_{s}"] = float(in_k)
            for i in range(1, model.p + 1):
                point[f"l_{k}_{i}_{s}"] = float(in_k * beta[i - 1])
    return point


def evaluate_objective(model: MiqpModel, point: dict[str, float]) -> float:
    """Objective value (mean-square units) at a variable assignment."""
    val = model.objective_constant
    for name, coef in model.objective_linear:
        val += coef * point[name]
    for a, b, coef in model.objective_quad:
        val += 0.5 * coef * point[a] * point[b]
    return val


# ---------------------------------------------------------------------------
# branch and bound
# ---------------------------------------------------------------------------


def _clip_boundary(state, z_row: np.ndarray, side: int):
    """Intersect a boundary's feasible set with one sign constraint.

    Returns the new state, or None when empty.  State is a vertex array for
    two free coefficients, an ``(lo, hi)`` pair for one, and the string
    ``"point"`` for none.
    """
    d_free = z_row.shape[0] - 1
    z0 = float(z_row[0])
    if d_free == 0:
        ok = z0 > 0 if side == 1 else z0 <= 0
        return state if ok else None
    if d_free == 1:
        lo, hi = state
        b = float(z_row[1])
        if b == 0.0:
            ok = z0 > 0 if side == 1 else z0 <= 0
            return state if ok else None
        u = -z0 / b
        if (side == 1) == (b > 0):
            lo = max(lo, u)
        else:
            hi = min(hi, u)
        return (lo, hi) if lo <= hi else None
    if side == 1:
        poly = _clip_halfplane(state, z0, z_row[1:], 0.0)
    else:
        poly = _clip_halfplane(state, -z0, -z_row[1:], 0.0)
    return poly if len(poly) >= 1 else None


def _q_range(state, z_rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Min and max of each row's boundary value over the feasible set."""
    d_free = z_rows.shape[1] - 1
    z0 = z_rows[:, 0]
    if d_free == 0:
        return z0, z0
    if d_free == 1:
        lo, hi = state
        a = z0 + z_rows[:, 1] * lo
        b = z0 + z_rows[:, 1] * hi
        return np.minimum(a, b), np.maximum(a, b)
    q = z0[:, None] + z_rows[:, 1:] @ np.asarray(state).T
    return q.min(axis=1), q.max(axis=1)


def _initial_states(ds: Dataset, halfwidth: float):
    states = []
    for z in (ds.z1, ds.z2):
        d_free = z.shape[1] - 1
        if d_free == 0:
            states.append("point")
        elif d_free == 1:
            states.append((-halfwidth, halfwidth))
        else:
            states.append(_box_polygon(halfwidth))
    return states


class _Node:
    __slots__ = ("sides", "states", "gram", "cvec", "ysq", "det", "bound")

    def __init__(self, sides, states, gram, cvec, ysq, det, bound):
        self.sides = sides
        self.states = states
        self.gram = gram
        self.cvec = cvec
        self.ysq = ysq
        self.det = det
        self.bound = bound


def _node_bound(gram, cvec, ysq, p) -> float:
    a = np.empty((p, p))
    d = np.empty(p)
    b = np.empty(p)
    total = 0.0
    for g in range(4):
        total += _gram_ssr(gram[g], cvec[g], ysq[g], a, d, b)
    return total


def _apply_sign(node: _Node, j: int, s: int, value: int, ds: Dataset,
                z_blocks, p: int):
    """Child state after fixing one sign variable; None when infeasible."""
    sides = node.sides.copy()
    states = list(node.states)
    sides[j, s] = value
    new_state = _clip_boundary(states[j], z_blocks[j][s], value)
    if new_state is None:
        return None
    states[j] = new_state

    # signs newly forced by the shrunk feasible set
    undec = np.flatnonzero(sides[j] < 0)
    if undec.size:
        qmin, qmax = _q_range(states[j], z_blocks[j][undec])
        sides[j, undec[qmax <= 0.0]] = 0
        sides[j, undec[qmin > 0.0]] = 1

    det = node.det.copy()
    newly = np.flatnonzero(~det & (sides[0] >= 0) & (sides[1] >= 0))
    if newly.size == 0:
        return _Node(sides, states, node.gram, node.cvec, node.ysq, det,
                     node.bound)
    gram = node.gram.copy()
    cvec = node.cvec.copy()
    ysq = node.ysq.copy()
    det[newly] = True
    groups = 2 * sides[0, newly] + sides[1, newly]
    for g in np.unique(groups):
        rows = newly[groups == g]
        xg = ds.x[rows]
        yg = ds.y[rows]
        gram[g] += xg.T @ xg
        cvec[g] += xg.T @ yg
        ysq[g] += float(yg @ yg)
    bound = _node_bound(gram, cvec, ysq, p)
    return _Node(sides, states, gram, cvec, ysq, det, bound)


def solve_bb(problem, config: SolverConfig | None = None,
             node_budget: int = 1_000_000) -> FittedModel:
    """Branch and bound over the sign variables; certified when it finishes.

    Accepts a :class:`MiqpModel` or a bare :class:`~segreg.data_model.Dataset`.
    Warm-starts from the descent solver, whose objective becomes the root
    incumbent.  If the node budget runs out the best incumbent is returned
    with ``certificate=False`` and the remaining gap in ``bb_stats``.
    """
    ds = problem.ds if isinstance(problem, MiqpModel) else problem
    if not isinstance(ds, Dataset):
        raise ConfigError("solve_bb expects a Dataset or a built MiqpModel")
    if ds.n_obs > BB_T_CAP:
        raise ConfigError(
            f"branch-and-bound solver is limited to {BB_T_CAP} observations "
            f"(got {ds.n_obs}); use fit_bcd"
        )
    _check_problem(ds)
    if node_budget < 1:
        raise ConfigError("node_budget must be positive")
    cfg = config or SolverConfig()

    warm = fit_bcd(ds, cfg)
    inc_ssr = warm.ssr
    inc_sides = np.stack([warm.assignment.side1.astype(np.int8),
                          warm.assignment.side2.astype(np.int8)])
    trace = [inc_ssr]

    t, p = ds.n_obs, ds.p
    z_blocks = (ds.z1, ds.z2)
    q_warm = np.concatenate([
        np.abs(ds.z1 @ warm.gamma1.coef),
        np.abs(ds.z2 @ warm.gamma2.coef),
    ])
    order = np.argsort(q_warm, kind="stable")
    warm_flat = inc_sides.reshape(-1)

    root = _Node(
        sides=np.full((2, t), -1, dtype=np.int8),
        states=_initial_states(ds, cfg.box_halfwidth),
        gram=np.zeros((4, p, p)),
        cvec=np.zeros((4, p)),
        ysq=np.zeros(4),
        det=np.zeros(t, dtype=bool),
        bound=0.0,
    )
    # signs decided by geometry alone (boundary value single-signed on the box)
    for j in (0, 1):
        qmin, qmax = _q_range(root.states[j], z_blocks[j])
        root.sides[j, qmax <= 0.0] = 0
        root.sides[j, qmin > 0.0] = 1
    pre = np.flatnonzero((root.sides[0] >= 0) & (root.sides[1] >= 0))
    if pre.size:
        root.det[pre] = True
        groups = 2 * root.sides[0, pre] + root.sides[1, pre]
        for g in np.unique(groups):
            rows = pre[groups == g]
            root.gram[g] += ds.x[rows].T @ ds.x[rows]
            root.cvec[g] += ds.x[rows].T @ ds.y[rows]
            root.ysq[g] += float(ds.y[rows] @ ds.y[rows])
        root.bound = _node_bound(root.gram, root.cvec, root.ysq, p)

    nodes = 0
    stack = [root]
    exhausted = False
    while stack:
        if nodes >= node_budget:
            exhausted = True
            break
        node = stack.pop()
        slack = 1e-10 * max(1.0, abs(inc_ssr))
        if node.bound >= inc_ssr - slack:
            continue
        nodes += 1
        flat = node.sides.reshape(-1)
        branch = -1
        for idx in order:
            if flat[idx] < 0:
                branch = int(idx)
                break
        if branch < 0:
            # leaf: every sign decided, bound is the exact objective
            if node.bound < inc_ssr:
                inc_ssr = node.bound
                inc_sides = node.sides.copy()
                trace.append(inc_ssr)
            continue
        j, s = divmod(branch, t)
        first = int(warm_flat[branch])
        for value in (1 - first, first):  # warm value explored first (LIFO)
            child = _apply_sign(node, j, s, value, ds, z_blocks, p)
            if child is None:
                continue
            if child.bound >= inc_ssr - slack:
                continue
            undecided = bool((child.sides < 0).any())
            if not undecided:
                if child.bound < inc_ssr:
                    inc_ssr = child.bound
                    inc_sides = child.sides.copy()
                    trace.append(inc_ssr)
                continue
            stack.append(child)

    min_open = min((n.bound for n in stack), default=inc_ssr)
    gap = max(0.0, inc_ssr - min_open) if exhausted else 0.0
    certificate = not exhausted
    stats = {
        "nodes": nodes,
        "incumbent": float(inc_ssr),
        "warm_start": float(warm.ssr),
        "gap": float(gap),
        "certificate": certificate,
        "node_budget": node_budget,
    }
    logger.debug("branch and bound: %d nodes, objective %.6g, gap %.3g",
                 nodes, inc_ssr, gap)
    return _finalize(
        ds, inc_ssr, inc_sides[0].astype(np.uint8),
        inc_sides[1].astype(np.uint8), tuple(trace), solver="branch_bound",
        certificate=certificate, cfg=cfg, n_starts_used=nodes,
        bb_stats=stats,
    )


__all__ = [
    "BB_T_CAP",
    "LinearRow",
    "MiqpModel",
    "build",
    "emit_lp",
    "evaluate_objective",
    "feasible_point",
    "solve_bb",
]
