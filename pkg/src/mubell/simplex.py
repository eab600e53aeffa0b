"""Bounded revised simplex specialized to white-noise visibility programs.

The LP  max v  s.t.  sum_w q_w D_w = v*P + (1-v)*Pw,  sum_w q_w = 1,
q >= 0, 0 <= v <= cap  is posed over minimal no-signaling coordinates
(per-party marginals and joint terms with the last outcome dropped), which
makes the equality system full rank.  Deterministic-strategy columns are
never materialized: the entering column is found combinatorially by scanning
Alice's k^mu output maps and best-responding per Bob setting.

Phase 1 (finding a basis for the white-noise point) depends only on the
scenario, so its result is cached and every solve runs phase 2 directly from
that fixed basis.  This keeps each solve a pure function of (scenario, P),
independent of call order.

Status codes: 0 optimal, 1 iteration limit, 2 numerical failure,
3 infeasible (cannot happen for valid inputs).
"""

from __future__ import annotations

import numpy as np
from numba import njit

BIG = 1e300

PRICE_TOL = 1e-9
PIVOT_TOL = 1e-11
RATIO_TIE_TOL = 1e-10
REFACTOR_EVERY = 150


@njit(cache=True)
def _decode(code, n, k, out):
    t = code
    for i in range(n):
        out[i] = t % k
        t //= k


@njit(cache=True)
def _unpack_duals(lam, mu, nu, k):
    """Scatter a CG dual vector into padded (mu,k), (nu,k), (mu,nu,k,k) tables.

    The slot for the dropped outcome k-1 stays zero, so pricing needs no
    branches.
    """
    km = k - 1
    la = np.zeros((mu, k))
    lb = np.zeros((nu, k))
    lj = np.zeros((mu, nu, k, k))
    off_b = mu * km
    off_j = off_b + nu * km
    for x in range(mu):
        for a in range(km):
            la[x, a] = lam[x * km + a]
    for y in range(nu):
        for b in range(km):
            lb[y, b] = lam[off_b + y * km + b]
    for x in range(mu):
        for y in range(nu):
            for a in range(km):
                for b in range(km):
                    lj[x, y, a, b] = lam[off_j + ((x * nu + y) * km + a) * km + b]
    return la, lb, lj


@njit(cache=True)
def _price_strategies(lam, mu, nu, k):
    """Strategy maximizing lam . phi(D_w), via Bob best response per Alice map.

    Returns (score + lam_norm, strategy id).
    """
    la, lb, lj = _unpack_duals(lam, mu, nu, k)
    n_amap = k**mu
    n_bmap = k**nu
    best = -BIG
    best_w = -1
    amap = np.zeros(mu, dtype=np.int64)
    for ai in range(n_amap):
        _decode(ai, mu, k, amap)
        base = 0.0
        for x in range(mu):
            base += la[x, amap[x]]
        score = base
        bi = 0
        fac = 1
        for y in range(nu):
            mb = -BIG
            arg = 0
            for b in range(k):
                s = lb[y, b]
                for x in range(mu):
                    s += lj[x, y, amap[x], b]
                if s > mb:
                    mb = s
                    arg = b
            score += mb
            bi += arg * fac
            fac *= k
        if score > best:
            best = score
            best_w = ai * n_bmap + bi
    return best + lam[lam.shape[0] - 1], best_w


@njit(cache=True)
def _strategy_rows(w, mu, nu, k, rows):
    """Nonzero row indices of strategy column w (all coefficients are 1)."""
    km = k - 1
    n_bmap = k**nu
    amap = np.zeros(mu, dtype=np.int64)
    bmap = np.zeros(nu, dtype=np.int64)
    _decode(w // n_bmap, mu, k, amap)
    _decode(w % n_bmap, nu, k, bmap)
    off_b = mu * km
    off_j = off_b + nu * km
    m = mu * km + nu * km + mu * nu * km * km + 1
    n = 0
    for x in range(mu):
        if amap[x] < km:
            rows[n] = x * km + amap[x]
            n += 1
    for y in range(nu):
        if bmap[y] < km:
            rows[n] = off_b + y * km + bmap[y]
            n += 1
    for x in range(mu):
        if amap[x] < km:
            for y in range(nu):
                if bmap[y] < km:
                    rows[n] = off_j + ((x * nu + y) * km + amap[x]) * km + bmap[y]
                    n += 1
    rows[n] = m - 1
    return n + 1


@njit(cache=True)
def _rebuild_basis_matrix(basis, n_strat, mu, nu, k, pcol):
    m = basis.shape[0]
    bm = np.zeros((m, m))
    rows = np.zeros(mu + nu + mu * nu + 1, dtype=np.int64)
    for j in range(m):
        cid = basis[j]
        if cid == n_strat:
            for i in range(m):
                bm[i, j] = pcol[i]
        elif cid > n_strat:
            bm[cid - n_strat - 1, j] = 1.0
        else:
            nr = _strategy_rows(cid, mu, nu, k, rows)
            for t in range(nr):
                bm[rows[t], j] = 1.0
    return bm


@njit(cache=True)
def _pivot_update(binv, x_b, ue, u, t_star, leave_j, enter_val):
    """Apply the step, exchange the basis column, rank-1 update the inverse.

    Setting the pivot row's multiplier to piv-1 folds the 1/piv row scaling
    into the same rank-1 sweep as every other row.
    """
    m = binv.shape[0]
    for i in range(m):
        x_b[i] -= t_star * u[i]
    x_b[leave_j] = enter_val
    piv = ue[leave_j]
    prow = binv[leave_j] / piv
    for i in range(m):
        f = (piv - 1.0) if i == leave_j else ue[i]
        row = binv[i]
        for jj in range(m):
            row[jj] -= f * prow[jj]


@njit(cache=True)
def build_white_noise_basis(mu, nu, k, b, max_iter):
    """Phase 1: a feasible basis for the white-noise point, no v column.

    Minimizes the artificial total from the all-artificial start.  Depends
    only on the scenario, so callers cache the result.
    Returns (status, basis, binv, x_b).
    """
    m = b.shape[0]
    n_strat = (k**mu) * (k**nu)
    v_id = n_strat
    basis = np.empty(m, dtype=np.int64)
    for j in range(m):
        basis[j] = v_id + 1 + j
    binv = np.eye(m)
    x_b = b.copy()
    rows = np.zeros(mu + nu + mu * nu + 1, dtype=np.int64)
    u = np.zeros(m)
    ue = np.zeros(m)
    lam = np.zeros(m)
    pcol_dummy = np.zeros(m)
    total = 0
    since_refactor = 0
    while True:
        total += 1
        if total > max_iter:
            return 1, basis, binv, x_b
        # duals for cost = 1 on artificials
        for i in range(m):
            lam[i] = 0.0
        for j in range(m):
            if basis[j] > v_id:
                for i in range(m):
                    lam[i] += binv[j, i]
        score, w = _price_strategies(lam, mu, nu, k)
        if -score >= -PRICE_TOL:
            art_sum = 0.0
            for j in range(m):
                if basis[j] > v_id:
                    art_sum += abs(x_b[j])
            if art_sum > 1e-9:
                return 3, basis, binv, x_b
            return 0, basis, binv, x_b
        already = False
        for j in range(m):
            if basis[j] == w:
                already = True
                break
        if already:
            # numerical drift: a basic column priced negative; refactor once
            bm = _rebuild_basis_matrix(basis, n_strat, mu, nu, k, pcol_dummy)
            binv = np.linalg.inv(bm)
            x_b = binv @ b
            since_refactor = 0
            total += 1
            if total > max_iter:
                return 1, basis, binv, x_b
            for i in range(m):
                lam[i] = 0.0
            for j in range(m):
                if basis[j] > v_id:
                    for i in range(m):
                        lam[i] += binv[j, i]
            score, w = _price_strategies(lam, mu, nu, k)
            if -score >= -PRICE_TOL:
                art_sum = 0.0
                for j in range(m):
                    if basis[j] > v_id:
                        art_sum += abs(x_b[j])
                if art_sum > 1e-9:
                    return 3, basis, binv, x_b
                return 0, basis, binv, x_b
            already = False
            for j in range(m):
                if basis[j] == w:
                    already = True
                    break
            if already:
                return 2, basis, binv, x_b
        nr = _strategy_rows(w, mu, nu, k, rows)
        for i in range(m):
            s = 0.0
            for t in range(nr):
                s += binv[i, rows[t]]
            ue[i] = s
            u[i] = s
        # ratio test; artificials keep upper bound +inf during phase 1
        t_star = BIG
        for j in range(m):
            if u[j] > PIVOT_TOL:
                tt = x_b[j] / u[j]
                if tt < t_star:
                    t_star = tt
        if t_star >= BIG:
            return 2, basis, binv, x_b
        if t_star < 0.0:
            t_star = 0.0
        leave_j = -1
        best_piv = 0.0
        for j in range(m):
            if u[j] > PIVOT_TOL:
                tt = x_b[j] / u[j]
                if tt <= t_star + RATIO_TIE_TOL and u[j] > best_piv:
                    # prefer kicking artificials out on ties
                    if leave_j >= 0 and basis[leave_j] > v_id and basis[j] <= v_id:
                        continue
                    best_piv = u[j]
                    leave_j = j
        if leave_j < 0:
            return 2, basis, binv, x_b
        _pivot_update(binv, x_b, ue, u, t_star, leave_j, t_star)
        basis[leave_j] = w
        since_refactor += 1
        if since_refactor >= REFACTOR_EVERY:
            bm = _rebuild_basis_matrix(basis, n_strat, mu, nu, k, pcol_dummy)
            binv = np.linalg.inv(bm)
            x_b = binv @ b
            since_refactor = 0


@njit(cache=True)
def solve_from_basis(mu, nu, k, pcol, b, cap, basis_in, binv_in, x_in, max_iter,
                     abort_above=BIG):
    """Phase 2 from a primal-feasible basis that excludes the v column.

    pcol: v's column, -(phi(P) - phi(Pw)) with trailing 0.
    The objective v never decreases along the pivot path, so once it exceeds
    abort_above the final optimum provably does too and the solve stops with
    status 4 (vstar then holds the proven lower bound).
    Returns (status, vstar, basis, x_b, lam, iters).
    """
    m = b.shape[0]
    n_strat = (k**mu) * (k**nu)
    v_id = n_strat
    basis = basis_in.copy()
    binv = binv_in.copy()
    x_b = x_in.copy()
    rows = np.zeros(mu + nu + mu * nu + 1, dtype=np.int64)
    u = np.zeros(m)
    ue = np.zeros(m)
    lam = np.zeros(m)
    pos_v = -1
    v_at_upper = False
    total = 0
    since_refactor = 0
    refactor_retry = False
    while True:
        total += 1
        if total > max_iter:
            return 1, 0.0, basis, x_b, lam, total
        if pos_v >= 0 and x_b[pos_v] > abort_above:
            return 4, x_b[pos_v], basis, x_b, lam, total
        if v_at_upper and pos_v < 0 and cap > abort_above:
            return 4, cap, basis, x_b, lam, total
        # duals: cost is -1 on v only (artificials carry 0 in phase 2)
        if pos_v >= 0:
            for i in range(m):
                lam[i] = -binv[pos_v, i]
        else:
            for i in range(m):
                lam[i] = 0.0
        # pricing
        enter_id = -1
        from_upper = False
        best_d = -PRICE_TOL
        score, w = _price_strategies(lam, mu, nu, k)
        d_strat = -score
        if d_strat < best_d:
            already = False
            for j in range(m):
                if basis[j] == w:
                    already = True
                    break
            if not already:
                best_d = d_strat
                enter_id = w
            elif not refactor_retry:
                # numerical drift: refactor once and re-price
                bm = _rebuild_basis_matrix(basis, n_strat, mu, nu, k, pcol)
                binv = np.linalg.inv(bm)
                rhs = b.copy()
                if v_at_upper and pos_v < 0:
                    for i in range(m):
                        rhs[i] -= cap * pcol[i]
                x_b = binv @ rhs
                since_refactor = 0
                refactor_retry = True
                continue
            else:
                # a basic column still prices negative after refactoring:
                # the state is inconsistent, hand over to the fallback
                return 2, 0.0, basis, x_b, lam, total
        if pos_v < 0:
            dv = -1.0
            for i in range(m):
                dv -= lam[i] * pcol[i]
            if (not v_at_upper) and dv < best_d:
                best_d = dv
                enter_id = v_id
                from_upper = False
            elif v_at_upper and dv > PRICE_TOL and -dv < best_d:
                best_d = -dv
                enter_id = v_id
                from_upper = True
        if enter_id < 0:
            break
        refactor_retry = False
        # entering column and its basis representation
        if enter_id == v_id:
            ue_new = binv @ pcol
            for i in range(m):
                ue[i] = ue_new[i]
        else:
            nr = _strategy_rows(enter_id, mu, nu, k, rows)
            for i in range(m):
                s = 0.0
                for t in range(nr):
                    s += binv[i, rows[t]]
                ue[i] = s
        sgn = -1.0 if from_upper else 1.0
        for i in range(m):
            u[i] = sgn * ue[i]
        # ratio test (artificial upper bounds are 0 in phase 2)
        t_bound = cap if enter_id == v_id else BIG
        t_star = t_bound
        for j in range(m):
            cid = basis[j]
            hi = cap if cid == v_id else (0.0 if cid > v_id else BIG)
            if u[j] > PIVOT_TOL:
                tt = x_b[j] / u[j]
                if tt < t_star:
                    t_star = tt
            elif u[j] < -PIVOT_TOL and hi < BIG:
                tt = (hi - x_b[j]) / (-u[j])
                if tt < t_star:
                    t_star = tt
        if t_star >= BIG:
            return 2, 0.0, basis, x_b, lam, total
        if t_star < 0.0:
            t_star = 0.0
        if enter_id == v_id and t_star >= t_bound - 1e-12:
            for i in range(m):
                x_b[i] -= t_bound * u[i]
            v_at_upper = not from_upper
            continue
        leave_j = -1
        leave_at_upper = False
        best_piv = 0.0
        for j in range(m):
            cid = basis[j]
            hi = cap if cid == v_id else (0.0 if cid > v_id else BIG)
            if u[j] > PIVOT_TOL:
                tt = x_b[j] / u[j]
                if tt <= t_star + RATIO_TIE_TOL and u[j] > best_piv:
                    best_piv = u[j]
                    leave_j = j
                    leave_at_upper = False
            elif u[j] < -PIVOT_TOL and hi < BIG:
                tt = (hi - x_b[j]) / (-u[j])
                if tt <= t_star + RATIO_TIE_TOL and -u[j] > best_piv:
                    best_piv = -u[j]
                    leave_j = j
                    leave_at_upper = True
        if leave_j < 0:
            return 2, 0.0, basis, x_b, lam, total
        enter_val = (cap - t_star) if from_upper else t_star
        old = basis[leave_j]
        _pivot_update(binv, x_b, ue, u, t_star, leave_j, enter_val)
        basis[leave_j] = enter_id
        if old == v_id:
            pos_v = -1
            v_at_upper = leave_at_upper
        if enter_id == v_id:
            pos_v = leave_j
            v_at_upper = False
        since_refactor += 1
        if since_refactor >= REFACTOR_EVERY:
            bm = _rebuild_basis_matrix(basis, n_strat, mu, nu, k, pcol)
            binv = np.linalg.inv(bm)
            rhs = b.copy()
            if v_at_upper and pos_v < 0:
                for i in range(m):
                    rhs[i] -= cap * pcol[i]
            x_b = binv @ rhs
            since_refactor = 0
    vstar = cap if (v_at_upper and pos_v < 0) else 0.0
    if pos_v >= 0:
        vstar = x_b[pos_v]
    return 0, vstar, basis, x_b, lam, total


