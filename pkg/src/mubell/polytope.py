"""Local-polytope tools: vertex enumeration, visibility LPs, membership.

The white-noise visibility of a correlation P is the largest v >= 0 with
v*P + (1-v)*Pw still a mixture of local deterministic strategies.  Values
below 1 certify Bell nonlocality.  Solves run on the specialized simplex
engine (see simplex.py) with certificate validation; any failure falls back
to scipy's HiGHS on the full-table formulation.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from . import simplex
from .correlations import (
    Correlation,
    PairIndex,
    all_pair_indices,
    extract_two_setting,
)
from .inequalities import BellInequality, evaluate

VIOLATION_TOL = 1e-9
CERT_WEIGHT_TOL = 1e-8
CERT_ENTRY_TOL = 1e-7
LP_FEASIBILITY_TOL = 1e-8

DEFAULT_CAP = 4.0
VERTEX_CAP_DEFAULT = 10**5
VERTEX_CAP_HARD = 2 * 10**6

CG_COLUMN_LIMIT = 10**4
CG_PRICE_TOL = 1e-9

_MAX_ITER = 200_000


class VertexCapError(ValueError):
    """Scenario too large for dense vertex treatment; use column generation."""


class LpFailure(RuntimeError):
    """Both the simplex engine and the scipy fallback failed."""


@dataclass(frozen=True)
class DeterministicStrategy:
    """Output tables of one local deterministic point."""

    alice_map: tuple[int, ...]
    bob_map: tuple[int, ...]

    def correlation(self, k: int) -> Correlation:
        mu, nu = len(self.alice_map), len(self.bob_map)
        p = np.zeros((mu, nu, k, k))
        for x in range(mu):
            for y in range(nu):
                p[x, y, self.alice_map[x], self.bob_map[y]] = 1.0
        return Correlation(mu, nu, k, p)


@dataclass(frozen=True)
class VisibilityResult:
    vstar: float
    cap_hit: bool
    strategy_ids: np.ndarray
    weights: np.ndarray
    method: str

    @property
    def violated(self) -> bool:
        return (not self.cap_hit) and self.vstar < 1.0 - VIOLATION_TOL


def enumerate_vertices(
    mu: int, nu: int, k: int, cap: int = VERTEX_CAP_DEFAULT
) -> list[DeterministicStrategy]:
    """All k^mu * k^nu deterministic strategies, lexicographic."""
    count = k ** (mu + nu)
    if count > min(cap, VERTEX_CAP_HARD):
        raise VertexCapError(
            f"{count} vertices exceed the cap {min(cap, VERTEX_CAP_HARD)}; "
            "use the column-generation path"
        )
    return [
        DeterministicStrategy(am, bm)
        for am in product(range(k), repeat=mu)
        for bm in product(range(k), repeat=nu)
    ]


def strategy_from_id(w: int, mu: int, nu: int, k: int) -> DeterministicStrategy:
    """Inverse of the engine's strategy indexing (little-endian base-k maps)."""
    ai, bi = divmod(w, k**nu)
    amap = tuple((ai // k**x) % k for x in range(mu))
    bmap = tuple((bi // k**y) % k for y in range(nu))
    return DeterministicStrategy(amap, bmap)


# --- minimal no-signaling coordinates -------------------------------------

def cg_dim(mu: int, nu: int, k: int) -> int:
    km = k - 1
    return mu * km + nu * km + mu * nu * km * km


def cg_coords(corr: Correlation) -> np.ndarray:
    """Marginal and joint coordinates with the last outcome dropped."""
    km = corr.k - 1
    pa = corr.p.sum(axis=3).mean(axis=1)
    pb = corr.p.sum(axis=2).mean(axis=0)
    return np.concatenate(
        [pa[:, :km].ravel(), pb[:, :km].ravel(), corr.p[:, :, :km, :km].ravel()]
    )


def cg_white_noise(mu: int, nu: int, k: int) -> np.ndarray:
    km = k - 1
    return np.concatenate(
        [
            np.full(mu * km, 1.0 / k),
            np.full(nu * km, 1.0 / k),
            np.full(mu * nu * km * km, 1.0 / k**2),
        ]
    )


class _ScenarioSolver:
    """Per-scenario engine state: white-noise basis built once, then reused.

    Phase 1 depends only on (mu, nu, k), so every solve is a deterministic
    function of the correlation alone, independent of call order.
    """

    def __init__(self, mu: int, nu: int, k: int):
        self.mu, self.nu, self.k = mu, nu, k
        self.m = cg_dim(mu, nu, k) + 1
        self.pw_cg = cg_white_noise(mu, nu, k)
        self.b = np.concatenate([self.pw_cg, [1.0]])
        status, basis, binv, x_b = simplex.build_white_noise_basis(
            mu, nu, k, self.b, _MAX_ITER
        )
        if status != 0:
            raise LpFailure(f"white-noise basis construction failed, status {status}")
        self.basis0 = basis
        self.binv0 = binv
        self.x0 = x_b

    def solve(self, p_cg: np.ndarray, cap: float, abort_above: float = np.inf):
        pcol = np.concatenate([-(p_cg - self.pw_cg), [0.0]])
        return simplex.solve_from_basis(
            self.mu, self.nu, self.k, pcol, self.b, cap,
            self.basis0, self.binv0, self.x0, _MAX_ITER, abort_above,
        )


_solvers: dict[tuple[int, int, int], _ScenarioSolver] = {}


def _scenario_solver(mu: int, nu: int, k: int) -> _ScenarioSolver:
    key = (mu, nu, k)
    if key not in _solvers:
        _solvers[key] = _ScenarioSolver(mu, nu, k)
    return _solvers[key]


def _mixture_from_strategies(
    ids: np.ndarray, weights: np.ndarray, mu: int, nu: int, k: int
) -> np.ndarray:
    """Full-table convex combination of strategy columns."""
    out = np.zeros((mu, nu, k, k))
    if len(ids) == 0:
        return out
    ai, bi = np.divmod(ids, k**nu)
    amaps = np.stack([(ai // k**x) % k for x in range(mu)], axis=1)
    bmaps = np.stack([(bi // k**y) % k for y in range(nu)], axis=1)
    for x in range(mu):
        for y in range(nu):
            np.add.at(out[x, y], (amaps[:, x], bmaps[:, y]), weights)
    return out


def _certificate_ok(
    result_v: float, ids: np.ndarray, weights: np.ndarray, corr: Correlation, cap_hit: bool
) -> bool:
    if np.any(weights < -CERT_WEIGHT_TOL):
        return False
    if abs(weights.sum() - 1.0) > CERT_WEIGHT_TOL:
        return False
    mixture = _mixture_from_strategies(ids, weights, corr.mu, corr.nu, corr.k)
    target = result_v * corr.p + (1.0 - result_v) / corr.k**2
    return bool(np.max(np.abs(mixture - target)) <= CERT_ENTRY_TOL)


def _scipy_visibility(corr: Correlation, cap: float):
    """Full-table LP through scipy HiGHS (fallback and cross-check path)."""
    mu, nu, k = corr.mu, corr.nu, corr.k
    n_strat = k ** (mu + nu)
    if n_strat > VERTEX_CAP_HARD:
        raise VertexCapError(f"{n_strat} vertices too many for the dense fallback")
    rows = []
    for am in product(range(k), repeat=mu):
        for bm in product(range(k), repeat=nu):
            for x in range(mu):
                for y in range(nu):
                    rows.append(((x * nu + y) * k + am[x]) * k + bm[y])
    cols = np.repeat(np.arange(n_strat), mu * nu)
    d_mat = sp.csc_matrix(
        (np.ones(len(rows)), (np.array(rows), cols)), shape=(mu * nu * k * k, n_strat)
    )
    pw = np.full(mu * nu * k * k, 1.0 / k**2)
    col_v = sp.csc_matrix(np.concatenate([-(corr.p.ravel() - pw), [0.0]]).reshape(-1, 1))
    body = sp.vstack([d_mat, sp.csc_matrix(np.ones((1, n_strat)))], format="csc")
    a_eq = sp.hstack([body, col_v], format="csc")
    res = linprog(
        np.concatenate([np.zeros(n_strat), [-1.0]]),
        A_eq=a_eq,
        b_eq=np.concatenate([pw, [1.0]]),
        bounds=[(0, None)] * n_strat + [(0, cap)],
        method="highs",
    )
    if not res.success:
        raise LpFailure(f"scipy fallback failed: {res.message}")
    vstar = float(-res.fun)
    q = res.x[:n_strat]
    keep = q > 1e-12
    ids = np.nonzero(keep)[0]
    # scipy's column order is (amap big-endian via product) x (bmap); remap to
    # the engine's little-endian ids
    remapped = []
    for w in ids:
        ai, bi = divmod(int(w), k**nu)
        am = tuple((ai // k ** (mu - 1 - x)) % k for x in range(mu))
        bm = tuple((bi // k ** (nu - 1 - y)) % k for y in range(nu))
        ai_le = sum(am[x] * k**x for x in range(mu))
        bi_le = sum(bm[y] * k**y for y in range(nu))
        remapped.append(ai_le * k**nu + bi_le)
    return vstar, np.array(remapped, dtype=np.int64), q[keep]


def visibility(
    corr: Correlation, cap: float = DEFAULT_CAP, vertex_cap: int = VERTEX_CAP_DEFAULT
) -> VisibilityResult:
    """White-noise visibility of P w.r.t. its scenario's local polytope.

    Returns min(LP optimum, cap) with a cap_hit flag; vstar < 1 - 1e-9 means
    the correlation is Bell-nonlocal.
    """
    mu, nu, k = corr.mu, corr.nu, corr.k
    if k ** (mu + nu) > vertex_cap:
        raise VertexCapError(
            f"{k**(mu+nu)} vertices exceed the cap {vertex_cap}; use visibility_cg"
        )
    solver = _scenario_solver(mu, nu, k)
    status, vstar, basis, x_b, _lam, _iters = solver.solve(cg_coords(corr), cap)
    if status == 0:
        mask = basis < k ** (mu + nu)
        ids = basis[mask]
        weights = np.where(x_b[mask] > 0, x_b[mask], 0.0)
        cap_hit = vstar >= cap - VIOLATION_TOL
        if cap_hit or _certificate_ok(vstar, ids, weights, corr, cap_hit):
            return VisibilityResult(float(vstar), bool(cap_hit), ids, weights, "simplex")
    vstar, ids, weights = _scipy_visibility(corr, cap)
    cap_hit = vstar >= cap - VIOLATION_TOL
    if not cap_hit and not _certificate_ok(vstar, ids, weights, corr, cap_hit):
        raise LpFailure("fallback solution failed certificate validation")
    return VisibilityResult(float(vstar), bool(cap_hit), ids, weights, "scipy")


def membership(corr: Correlation, vertex_cap: int = VERTEX_CAP_DEFAULT) -> bool:
    """True iff the correlation lies inside its local polytope."""
    res = visibility(corr, cap=DEFAULT_CAP, vertex_cap=vertex_cap)
    return res.cap_hit or res.vstar >= 1.0 - VIOLATION_TOL


def visibility_wrt_inequality(
    ineq: BellInequality, corr: Correlation, cap: float = DEFAULT_CAP
) -> float:
    """Crossing parameter (I_L - I_w) / (I(P) - I_w) of one inequality.

    Upper-bounds the LP visibility; returns cap when the inequality carries
    no information (I(P) <= I_w).
    """
    i_w = float(ineq.beta.sum()) / ineq.k**2
    if i_w >= ineq.local_bound:
        raise ValueError("inequality not usable: white noise already at the bound")
    i_p = evaluate(ineq, corr)
    if i_p <= i_w:
        return cap
    return min(cap, (ineq.local_bound - i_w) / (i_p - i_w))


def min_visibility_over_pairs(
    corr: Correlation, cap: float = DEFAULT_CAP
) -> tuple[VisibilityResult, PairIndex]:
    """Min visibility over the C(mu,2)C(nu,2) extracted two-setting blocks.

    Equals the visibility of P w.r.t. the polytope cut out by all two-setting
    inequalities lifted to the full scenario.  Pairs whose monotone LP path
    passes the running minimum are abandoned early (they provably cannot
    attain the minimum); the returned minimum is exact.
    """
    k = corr.k
    pairs = all_pair_indices(corr.mu, corr.nu)
    subs = [extract_two_setting(corr, idx) for idx in pairs]
    # process the blocks farthest from white noise first: they tend to have
    # the smallest visibility, which makes the early-abort bound tight sooner
    dist = np.array([np.sum((s.p - 1.0 / k**2) ** 2) for s in subs])
    order = np.argsort(-dist, kind="stable")

    solver = _scenario_solver(2, 2, k)
    best: VisibilityResult | None = None
    best_idx: PairIndex | None = None
    for pos in order:
        sub = subs[pos]
        bound = np.inf if best is None else best.vstar
        status, vstar, basis, x_b, _lam, _it = solver.solve(
            cg_coords(sub), cap, abort_above=bound
        )
        if status == 4:
            continue
        res: VisibilityResult | None = None
        if status == 0:
            mask = basis < k**4
            ids = basis[mask]
            weights = np.where(x_b[mask] > 0, x_b[mask], 0.0)
            cap_hit = vstar >= cap - VIOLATION_TOL
            if cap_hit or _certificate_ok(vstar, ids, weights, sub, cap_hit):
                res = VisibilityResult(
                    float(vstar), bool(cap_hit), ids, weights, "simplex"
                )
        if res is None:
            vstar, ids, weights = _scipy_visibility(sub, cap)
            cap_hit = vstar >= cap - VIOLATION_TOL
            res = VisibilityResult(float(vstar), bool(cap_hit), ids, weights, "scipy")
        if best is None or res.vstar < best.vstar:
            best, best_idx = res, pairs[pos]
    return best, best_idx


def _cg_master(
    columns: np.ndarray, pcol: np.ndarray, b: np.ndarray, cap: float
) -> tuple[float, np.ndarray, np.ndarray]:
    """Restricted master LP over explicit columns; returns (v, weights, duals)."""
    n = columns.shape[1]
    a_eq = np.concatenate([columns, pcol.reshape(-1, 1)], axis=1)
    res = linprog(
        np.concatenate([np.zeros(n), [-1.0]]),
        A_eq=a_eq,
        b_eq=b,
        bounds=[(0, None)] * n + [(0, cap)],
        method="highs",
    )
    if not res.success:
        raise LpFailure(f"column-generation master failed: {res.message}")
    return float(-res.fun), res.x[:n], np.asarray(res.eqlin.marginals)


def _strategy_cg_column(w: int, mu: int, nu: int, k: int, m: int) -> np.ndarray:
    rows = np.zeros(mu + nu + mu * nu + 1, dtype=np.int64)
    nr = simplex._strategy_rows(w, mu, nu, k, rows)
    col = np.zeros(m)
    col[rows[:nr]] = 1.0
    return col


def price_strategy(duals: np.ndarray, mu: int, nu: int, k: int) -> tuple[float, int]:
    """Best strategy for a CG dual vector: max over Alice maps with Bob
    best-responding per setting."""
    score, w = simplex._price_strategies(np.ascontiguousarray(duals), mu, nu, k)
    return float(score), int(w)


def visibility_cg(
    corr: Correlation, cap: float = DEFAULT_CAP, column_limit: int = CG_COLUMN_LIMIT
) -> VisibilityResult:
    """Visibility by column generation, for scenarios beyond the vertex cap.

    Restricted master over an active vertex set, seeded with the k^2
    constant-output strategies (their uniform mixture is white noise, so the
    master starts feasible).  Pricing scans Alice's k^mu maps with Bob
    best-responding per setting; stops when nothing prices above tolerance.
    """
    mu, nu, k = corr.mu, corr.nu, corr.k
    m = cg_dim(mu, nu, k) + 1
    pw_cg = cg_white_noise(mu, nu, k)
    b = np.concatenate([pw_cg, [1.0]])
    pcol = np.concatenate([-(cg_coords(corr) - pw_cg), [0.0]])

    active: list[int] = []
    seen: set[int] = set()

    def add(w: int) -> None:
        if w not in seen:
            seen.add(w)
            active.append(w)

    rep_a = sum(k**x for x in range(mu))
    rep_b = sum(k**y for y in range(nu))
    for a_out in range(k):
        for b_out in range(k):
            add((a_out * rep_a) * k**nu + b_out * rep_b)

    columns = np.stack(
        [_strategy_cg_column(w, mu, nu, k, m) for w in active], axis=1
    )
    while True:
        vstar, weights, duals = _cg_master(columns, pcol, b, cap)
        score, w = price_strategy(duals, mu, nu, k)
        if score <= CG_PRICE_TOL or w in seen:
            break
        if len(active) >= column_limit:
            raise LpFailure(
                f"column generation inconclusive after {column_limit} columns"
            )
        add(w)
        columns = np.concatenate(
            [columns, _strategy_cg_column(w, mu, nu, k, m).reshape(-1, 1)], axis=1
        )
    ids = np.array(active, dtype=np.int64)
    keep = weights > 1e-12
    cap_hit = vstar >= cap - VIOLATION_TOL
    return VisibilityResult(
        float(vstar), bool(cap_hit), ids[keep], weights[keep], "column-generation"
    )
