"""Numba kernels for exact single-boundary minimization and enumeration.

A boundary with normalized coefficients ``gamma = (1, w)`` classifies
observation t by the sign of ``q_t(w) = a_t + b_t . w`` where ``a_t`` is the
first splitting covariate and ``b_t`` the remaining ones.  In the space of
free coefficients ``w`` (dimension 1 or 2 here), each observation is a
hyperplane ``q_t(w) = 0``; the achievable side-assignments are exactly the
cells of that arrangement intersected with the compact coefficient box.

The kernels enumerate every cell by walking each observation's line across
the box: consecutive segments between crossings differ in a single
observation's side, so the grouped least-squares objective is maintained by
rank-one Gram updates and small LDL solves instead of refitting.  Cells not
adjacent to any line only occur when no line cuts the box, which the
box-center evaluation covers.  Sums of squares from a Gram system
``G b = c`` are exact under rank deficiency because ``c`` always lies in
``range(G)``; skipped zero pivots leave ``c'b`` (hence the SSR) unchanged.

Group ids inside the kernels are ``2 * side_this + side_other``; the total
objective is invariant to that labeling, so callers translate to regime
labels themselves.
"""

from __future__ import annotations

import numpy as np
from numba import njit

#: relative pivot tolerance for the LDL factorization
_PIV_REL = 1e-11


@njit(cache=True, inline="always")
def _gram_add(G, c, x, yv, sign):
    p = x.shape[0]
    for i in range(p):
        xi = sign * x[i]
        c[i] += xi * yv
        for j in range(p):
            G[i, j] += xi * x[j]


@njit(cache=True)
def _gram_ssr(G, c, ysq, A, dvec, b):
    """SSR of the group with Gram G, moment vector c, response square sum ysq.

    Factors a copy of G as L D L' with zero-pivot skipping and returns
    ``ysq - c'b`` for a solution of ``G b = c`` (any solution gives the same
    value when c is in range(G)).
    """
    p = c.shape[0]
    maxd = 0.0
    for i in range(p):
        for j in range(p):
            A[i, j] = G[i, j]
        if A[i, i] > maxd:
            maxd = A[i, i]
    tol = _PIV_REL * maxd
    for j in range(p):
        dj = A[j, j]
        for k in range(j):
            dj -= A[j, k] * A[j, k] * dvec[k]
        if dj <= tol:
            dvec[j] = 0.0
            for i in range(j + 1, p):
                A[i, j] = 0.0
            continue
        dvec[j] = dj
        for i in range(j + 1, p):
            s = A[i, j]
            for k in range(j):
                s -= A[i, k] * A[j, k] * dvec[k]
            A[i, j] = s / dj
    # forward solve L z = c, scale by D^{-1}
    for i in range(p):
        s = c[i]
        for k in range(i):
            s -= A[i, k] * b[k]
        b[i] = s
    for i in range(p):
        if dvec[i] > 0.0:
            b[i] /= dvec[i]
        else:
            b[i] = 0.0
    # back solve L' out = z
    for i in range(p - 1, -1, -1):
        s = b[i]
        for k in range(i + 1, p):
            s -= A[k, i] * b[k]
        b[i] = s
    ssr = ysq
    for i in range(p):
        ssr -= c[i] * b[i]
    if ssr < 0.0:
        ssr = 0.0
    return ssr


@njit(cache=True)
def group_ssr_by_label(labels, n_groups, X, y):
    """Total least-squares SSR with one coefficient vector per label.

    ``labels`` are integers in [0, n_groups); negative labels exclude the
    observation.  Returns the summed SSR across groups.
    """
    T, p = X.shape
    G = np.zeros((n_groups, p, p))
    c = np.zeros((n_groups, p))
    ysq = np.zeros(n_groups)
    A = np.empty((p, p))
    dvec = np.empty(p)
    b = np.empty(p)
    for t in range(T):
        g = labels[t]
        if g < 0:
            continue
        _gram_add(G[g], c[g], X[t], y[t], 1.0)
        ysq[g] += y[t] * y[t]
    total = 0.0
    for g in range(n_groups):
        total += _gram_ssr(G[g], c[g], ysq[g], A, dvec, b)
    return total


@njit(cache=True)
def _lex_replace(cand, held_idx, n_held, held_sides, best):
    """True when the candidate side pattern is lexicographically smaller.

    The candidate is ``cand`` with positions ``held_idx[:n_held]``
    overridden by ``held_sides``.
    """
    T = cand.shape[0]
    for t in range(T):
        a = cand[t]
        for k in range(n_held):
            if held_idx[k] == t:
                a = held_sides[k]
                break
        bv = best[t]
        if a != bv:
            return a < bv
    return False


@njit(cache=True)
def sweep_d2(az, bz, other, X, y, lo, hi, tie_tol):
    """Exact minimization over all 2-d boundary side-assignments.

    Parameters
    ----------
    az, bz : (T,), (T, 2)
        First splitting covariate and the two free-coefficient covariates.
    other : (T,) uint8
        Side of each observation under the *other* boundary (fixed).
    X, y : design and response.
    lo, hi : (2,) box bounds for the free coefficients.
    tie_tol : float
        Objective differences at or below this are ties, resolved toward
        the lexicographically smallest side pattern.

    Returns
    -------
    best_ssr : float
    best_side : (T,) uint8
        Side pattern (1 means positive side) of the minimizing cell.
    """
    T = az.shape[0]
    p = X.shape[1]
    best_ssr = np.inf
    best_side = np.zeros(T, np.uint8)
    cur = np.zeros(T, np.uint8)
    G = np.zeros((4, p, p))
    c = np.zeros((4, p))
    ysq = np.zeros(4)
    ssr = np.zeros(4)
    A = np.empty((p, p))
    dvec = np.empty(p)
    bwork = np.empty(p)
    Gt = np.empty((p, p))
    ct = np.empty(p)
    cross_u = np.empty(T)
    cross_t = np.empty(T, np.int64)
    held_idx = np.empty(T, np.int64)
    held_dn = np.empty(T)
    held_sides = np.empty(T, np.uint8)

    # ---- box-center cell (covers the case of no line cutting the box)
    w0c = 0.5 * (lo[0] + hi[0])
    w1c = 0.5 * (lo[1] + hi[1])
    for t in range(T):
        q = az[t] + bz[t, 0] * w0c + bz[t, 1] * w1c
        cur[t] = 1 if q > 0.0 else 0
    for g in range(4):
        ysq[g] = 0.0
        c[g, :] = 0.0
        G[g, :, :] = 0.0
    for t in range(T):
        g = 2 * cur[t] + other[t]
        _gram_add(G[g], c[g], X[t], y[t], 1.0)
        ysq[g] += y[t] * y[t]
    total = 0.0
    for g in range(4):
        total += _gram_ssr(G[g], c[g], ysq[g], A, dvec, bwork)
    best_ssr = total
    for t in range(T):
        best_side[t] = cur[t]

    # ---- walk every observation line
    for s in range(T):
        bs0 = bz[s, 0]
        bs1 = bz[s, 1]
        nb2 = bs0 * bs0 + bs1 * bs1
        if nb2 == 0.0:
            continue
        nb = np.sqrt(nb2)
        w00 = -az[s] * bs0 / nb2
        w01 = -az[s] * bs1 / nb2
        v0 = -bs1 / nb
        v1 = bs0 / nb
        n0 = bs0 / nb
        n1 = bs1 / nb
        # clip the line to the box (Liang-Barsky)
        ulo = -np.inf
        uhi = np.inf
        empty = False
        for i in range(2):
            wi = w00 if i == 0 else w01
            vi = v0 if i == 0 else v1
            if vi == 0.0:
                if wi < lo[i] or wi > hi[i]:
                    empty = True
                    break
            else:
                t1 = (lo[i] - wi) / vi
                t2 = (hi[i] - wi) / vi
                tmin = t1 if t1 < t2 else t2
                tmax = t2 if t1 < t2 else t1
                if tmin > ulo:
                    ulo = tmin
                if tmax < uhi:
                    uhi = tmax
        if empty or ulo >= uhi:
            continue
        # collect crossings with the other lines and coincident observations
        m = 0
        n_held = 1
        held_idx[0] = s
        held_dn[0] = nb  # q_s moves as +nb per unit along +normal
        for t in range(T):
            if t == s:
                continue
            alpha = az[t] + bz[t, 0] * w00 + bz[t, 1] * w01
            delta = bz[t, 0] * v0 + bz[t, 1] * v1
            if delta == 0.0:
                if alpha == 0.0:
                    # line t coincides with line s: its side flips with the
                    # probe side, oriented by the normal component
                    dn = bz[t, 0] * n0 + bz[t, 1] * n1
                    held_idx[n_held] = t
                    held_dn[n_held] = dn
                    n_held += 1
                continue
            u = -alpha / delta
            if ulo < u < uhi:
                cross_u[m] = u
                cross_t[m] = t
                m += 1
        order = np.argsort(cross_u[:m])
        ufirst = cross_u[order[0]] if m > 0 else uhi
        um = 0.5 * (ulo + ufirst)
        wp0 = w00 + um * v0
        wp1 = w01 + um * v1
        # initialize state at the first segment, held observations excluded
        for g in range(4):
            ysq[g] = 0.0
            c[g, :] = 0.0
            G[g, :, :] = 0.0
        for t in range(T):
            q = az[t] + bz[t, 0] * wp0 + bz[t, 1] * wp1
            cur[t] = 1 if q > 0.0 else 0
            held = False
            for k in range(n_held):
                if held_idx[k] == t:
                    held = True
                    break
            if held:
                continue
            g = 2 * cur[t] + other[t]
            _gram_add(G[g], c[g], X[t], y[t], 1.0)
            ysq[g] += y[t] * y[t]
        ssr_sum = 0.0
        for g in range(4):
            ssr[g] = _gram_ssr(G[g], c[g], ysq[g], A, dvec, bwork)
            ssr_sum += ssr[g]

        seg = 0
        while True:
            # evaluate both probe sides of line s for the current segment
            for sigma in range(2):
                for k in range(n_held):
                    if held_dn[k] > 0.0:
                        held_sides[k] = sigma
                    else:
                        held_sides[k] = 1 - sigma
                # the held observations fall into at most 4 groups; total is
                # the state total with affected groups re-solved
                total = ssr_sum
                for g in range(4):
                    touched = False
                    for k in range(n_held):
                        if 2 * held_sides[k] + other[held_idx[k]] == g:
                            touched = True
                            break
                    if touched:
                        # recompute group g with its held members added
                        for i in range(p):
                            ct[i] = c[g, i]
                            for j in range(p):
                                Gt[i, j] = G[g, i, j]
                        ys = ysq[g]
                        for k in range(n_held):
                            if 2 * held_sides[k] + other[held_idx[k]] == g:
                                t = held_idx[k]
                                _gram_add(Gt, ct, X[t], y[t], 1.0)
                                ys += y[t] * y[t]
                        total += _gram_ssr(Gt, ct, ys, A, dvec, bwork) - ssr[g]
                if total < best_ssr - tie_tol:
                    best_ssr = total
                    for t in range(T):
                        best_side[t] = cur[t]
                    for k in range(n_held):
                        best_side[held_idx[k]] = held_sides[k]
                elif total <= best_ssr + tie_tol:
                    if _lex_replace(cur, held_idx, n_held, held_sides, best_side):
                        if total < best_ssr:
                            best_ssr = total
                        for t in range(T):
                            best_side[t] = cur[t]
                        for k in range(n_held):
                            best_side[held_idx[k]] = held_sides[k]
            if seg >= m:
                break
            # advance past the next run of (exactly) equal crossings
            u_here = cross_u[order[seg]]
            while seg < m and cross_u[order[seg]] == u_here:
                t = cross_t[order[seg]]
                g_old = 2 * cur[t] + other[t]
                g_new = 2 * (1 - cur[t]) + other[t]
                _gram_add(G[g_old], c[g_old], X[t], y[t], -1.0)
                ysq[g_old] -= y[t] * y[t]
                _gram_add(G[g_new], c[g_new], X[t], y[t], 1.0)
                ysq[g_new] += y[t] * y[t]
                ssr_sum -= ssr[g_old] + ssr[g_new]
                ssr[g_old] = _gram_ssr(G[g_old], c[g_old], ysq[g_old], A, dvec, bwork)
                ssr[g_new] = _gram_ssr(G[g_new], c[g_new], ysq[g_new], A, dvec, bwork)
                ssr_sum += ssr[g_old] + ssr[g_new]
                cur[t] = 1 - cur[t]
                seg += 1
    return best_ssr, best_side


@njit(cache=True)
def sweep_d1(az, bz, other, X, y, lo, hi, tie_tol):
    """Exact minimization over all 1-d boundary side-assignments.

    Same contract as :func:`sweep_d2` with a scalar free coefficient in
    ``[lo, hi]``; cells are the intervals between observation thresholds.
    """
    T = az.shape[0]
    p = X.shape[1]
    G = np.zeros((4, p, p))
    c = np.zeros((4, p))
    ysq = np.zeros(4)
    ssr = np.zeros(4)
    A = np.empty((p, p))
    dvec = np.empty(p)
    bwork = np.empty(p)
    cur = np.zeros(T, np.uint8)
    best_side = np.zeros(T, np.uint8)
    cross_u = np.empty(T)
    cross_t = np.empty(T, np.int64)
    m = 0
    for t in range(T):
        if bz[t] != 0.0:
            u = -az[t] / bz[t]
            if lo < u < hi:
                cross_u[m] = u
                cross_t[m] = t
                m += 1
    order = np.argsort(cross_u[:m])
    ufirst = cross_u[order[0]] if m > 0 else hi
    um = 0.5 * (lo + ufirst)
    for g in range(4):
        ysq[g] = 0.0
        c[g, :] = 0.0
        G[g, :, :] = 0.0
    for t in range(T):
        q = az[t] + bz[t] * um
        cur[t] = 1 if q > 0.0 else 0
        g = 2 * cur[t] + other[t]
        _gram_add(G[g], c[g], X[t], y[t], 1.0)
        ysq[g] += y[t] * y[t]
    ssr_sum = 0.0
    for g in range(4):
        ssr[g] = _gram_ssr(G[g], c[g], ysq[g], A, dvec, bwork)
        ssr_sum += ssr[g]
    best_ssr = ssr_sum
    for t in range(T):
        best_side[t] = cur[t]
    seg = 0
    while seg < m:
        u_here = cross_u[order[seg]]
        while seg < m and cross_u[order[seg]] == u_here:
            t = cross_t[order[seg]]
            g_old = 2 * cur[t] + other[t]
            g_new = 2 * (1 - cur[t]) + other[t]
            _gram_add(G[g_old], c[g_old], X[t], y[t], -1.0)
            ysq[g_old] -= y[t] * y[t]
            _gram_add(G[g_new], c[g_new], X[t], y[t], 1.0)
            ysq[g_new] += y[t] * y[t]
            ssr_sum -= ssr[g_old] + ssr[g_new]
            ssr[g_old] = _gram_ssr(G[g_old], c[g_old], ysq[g_old], A, dvec, bwork)
            ssr[g_new] = _gram_ssr(G[g_new], c[g_new], ysq[g_new], A, dvec, bwork)
            ssr_sum += ssr[g_old] + ssr[g_new]
            cur[t] = 1 - cur[t]
            seg += 1
        if ssr_sum < best_ssr - tie_tol:
            best_ssr = ssr_sum
            for t in range(T):
                best_side[t] = cur[t]
        elif ssr_sum <= best_ssr + tie_tol:
            smaller = False
            for t in range(T):
                if cur[t] != best_side[t]:
                    smaller = cur[t] < best_side[t]
                    break
            if smaller:
                if ssr_sum < best_ssr:
                    best_ssr = ssr_sum
                for t in range(T):
                    best_side[t] = cur[t]
    return best_ssr, best_side


@njit(cache=True)
def enum_patterns_d2(az, bz, lo, hi):
    """Collect the side pattern of every arrangement cell in the box.

    Returns ``(count, buf)`` where ``buf[:count]`` holds one uint8 side
    pattern per row; duplicates are expected and deduplicated by callers.
    """
    T = az.shape[0]
    cap = 2 * T * (T + 2) + 1
    buf = np.empty((cap, T), np.uint8)
    cur = np.zeros(T, np.uint8)
    cross_u = np.empty(T)
    cross_t = np.empty(T, np.int64)
    held_idx = np.empty(T, np.int64)
    held_dn = np.empty(T)
    count = 0
    w0c = 0.5 * (lo[0] + hi[0])
    w1c = 0.5 * (lo[1] + hi[1])
    for t in range(T):
        q = az[t] + bz[t, 0] * w0c + bz[t, 1] * w1c
        buf[count, t] = 1 if q > 0.0 else 0
    count += 1
    for s in range(T):
        bs0 = bz[s, 0]
        bs1 = bz[s, 1]
        nb2 = bs0 * bs0 + bs1 * bs1
        if nb2 == 0.0:
            continue
        nb = np.sqrt(nb2)
        w00 = -az[s] * bs0 / nb2
        w01 = -az[s] * bs1 / nb2
        v0 = -bs1 / nb
        v1 = bs0 / nb
        n0 = bs0 / nb
        n1 = bs1 / nb
        ulo = -np.inf
        uhi = np.inf
        empty = False
        for i in range(2):
            wi = w00 if i == 0 else w01
            vi = v0 if i == 0 else v1
            if vi == 0.0:
                if wi < lo[i] or wi > hi[i]:
                    empty = True
                    break
            else:
                t1 = (lo[i] - wi) / vi
                t2 = (hi[i] - wi) / vi
                tmin = t1 if t1 < t2 else t2
                tmax = t2 if t1 < t2 else t1
                if tmin > ulo:
                    ulo = tmin
                if tmax < uhi:
                    uhi = tmax
        if empty or ulo >= uhi:
            continue
        m = 0
        n_held = 1
        held_idx[0] = s
        held_dn[0] = nb
        for t in range(T):
            if t == s:
                continue
            alpha = az[t] + bz[t, 0] * w00 + bz[t, 1] * w01
            delta = bz[t, 0] * v0 + bz[t, 1] * v1
            if delta == 0.0:
                if alpha == 0.0:
                    dn = bz[t, 0] * n0 + bz[t, 1] * n1
                    held_idx[n_held] = t
                    held_dn[n_held] = dn
                    n_held += 1
                continue
            u = -alpha / delta
            if ulo < u < uhi:
                cross_u[m] = u
                cross_t[m] = t
                m += 1
        order = np.argsort(cross_u[:m])
        ufirst = cross_u[order[0]] if m > 0 else uhi
        um = 0.5 * (ulo + ufirst)
        wp0 = w00 + um * v0
        wp1 = w01 + um * v1
        for t in range(T):
            q = az[t] + bz[t, 0] * wp0 + bz[t, 1] * wp1
            cur[t] = 1 if q > 0.0 else 0
        seg = 0
        while True:
            for sigma in range(2):
                for t in range(T):
                    buf[count, t] = cur[t]
                for k in range(n_held):
                    if held_dn[k] > 0.0:
                        buf[count, held_idx[k]] = sigma
                    else:
                        buf[count, held_idx[k]] = 1 - sigma
                count += 1
            if seg >= m:
                break
            u_here = cross_u[order[seg]]
            while seg < m and cross_u[order[seg]] == u_here:
                t = cross_t[order[seg]]
                cur[t] = 1 - cur[t]
                seg += 1
    return count, buf


@njit(cache=True)
def enum_patterns_d1(az, bz, lo, hi):
    """1-d analogue of :func:`enum_patterns_d2` (interval cells)."""
    T = az.shape[0]
    cap = T + 2
    buf = np.empty((cap, T), np.uint8)
    cross_u = np.empty(T)
    cross_t = np.empty(T, np.int64)
    m = 0
    for t in range(T):
        if bz[t] != 0.0:
            u = -az[t] / bz[t]
            if lo < u < hi:
                cross_u[m] = u
                cross_t[m] = t
                m += 1
    order = np.argsort(cross_u[:m])
    ufirst = cross_u[order[0]] if m > 0 else hi
    um = 0.5 * (lo + ufirst)
    cur = np.zeros(T, np.uint8)
    for t in range(T):
        q = az[t] + bz[t] * um
        cur[t] = 1 if q > 0.0 else 0
    count = 0
    for t in range(T):
        buf[count, t] = cur[t]
    count += 1
    seg = 0
    while seg < m:
        u_here = cross_u[order[seg]]
        while seg < m and cross_u[order[seg]] == u_here:
            t = cross_t[order[seg]]
            cur[t] = 1 - cur[t]
            seg += 1
        for t in range(T):
            buf[count, t] = cur[t]
        count += 1
    return count, buf
