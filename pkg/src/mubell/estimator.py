"""Seeded Monte Carlo campaigns over Haar-random MUB rotations.

Each trial draws one unitary per party from (master_seed, trial_index,
stream), rotates the reference MUBs, builds the exact Born-rule correlation
and tests it for Bell violation in one of three modes:

  cglmp   max of the k-outcome two-setting inequality family (all
          relabelings) over every extracted setting pair,
  lp2     minimum white-noise visibility over every extracted pair
          (membership in the two-setting-lifted polytope),
  lpfull  visibility against the full local polytope of the scenario.

Trials are pure functions of (config, trial_index): running them in any
order, split over any number of workers, gives identical output.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.stats import beta as beta_dist

from . import correlations as corrmod
from .correlations import Correlation, all_pair_indices, extract_two_setting
from .inequalities import InequalityFamily, cglmp, family_values, relabelings
from .mubs import MubSet, max_bases, rotate_mubs, standard_mubs
from .polytope import (
    VERTEX_CAP_DEFAULT,
    LpFailure,
    min_visibility_over_pairs,
    visibility,
    visibility_cg,
)
from .quantum import (
    STREAM_ALICE,
    STREAM_BOB,
    SchmidtState,
    TrialSeed,
    max_entangled_state,
    partial_qutrit_state,
    sample_haar_unitary,
)

VIOLATION_TOL = 1e-9
CGLMP_BOUND = 2.0
LP_FAILURE_BUDGET = 1e-4  # fraction of trials allowed to fail before aborting

MODES = ("cglmp", "lp2", "lpfull")


class ConfigError(ValueError):
    """Invalid trial configuration."""


class LpFailureBudgetExceeded(RuntimeError):
    """Too many LP failures for the estimate to be trusted."""


@dataclass(frozen=True)
class TrialConfig:
    d: int
    state: tuple
    mu: int
    nu: int
    n_tot: int
    mode: str
    lpfull_settings: int | None = None
    master_seed: int = 0
    alpha_level: float = 0.05
    histogram_bin: float = 2.5e-3
    # test hook: break the per-trial stream derivation so every trial reuses
    # trial 0's randomness (negative control for the table verification)
    corrupt_stream: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.n_tot < 1:
            raise ConfigError("n_tot must be >= 1")
        if not (0.0 < self.alpha_level < 1.0):
            raise ConfigError("alpha_level must be in (0,1)")
        avail = max_bases(self.d)
        if not (1 <= self.mu <= avail and 1 <= self.nu <= avail):
            raise ConfigError(
                f"mu={self.mu}, nu={self.nu} not within the {avail} bases known for d={self.d}"
            )
        if self.mode in ("cglmp", "lp2") and (self.mu < 2 or self.nu < 2):
            raise ConfigError("two-setting tests need mu, nu >= 2")
        if self.mode == "lpfull":
            m = self.lpfull_settings
            if m is None or m != self.mu or m != self.nu:
                raise ConfigError("lpfull mode requires lpfull_settings == mu == nu")
        if self.state[0] == "partial":
            if self.d != 3:
                raise ConfigError("the partially entangled family is a qutrit family")
            partial_qutrit_state(self.state[1], self.state[2])
        elif self.state[0] != "mes":
            raise ConfigError(f"unknown state spec {self.state!r}")

    def build_state(self) -> SchmidtState:
        if self.state[0] == "mes":
            return max_entangled_state(self.d)
        return partial_qutrit_state(self.state[1], self.state[2])


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    violated: bool
    min_visibility: float  # nan outside lp modes
    cap_hit: bool
    max_cglmp: float  # nan outside cglmp mode
    argmax_pair: tuple[int, int, int, int]
    lp_failed: bool = False


@dataclass(frozen=True)
class EstimateSummary:
    n_viol: int
    n_tot: int
    fraction: float
    ci_low: float
    ci_high: float
    alpha_level: float
    lp_failures: int
    wall_time_s: float


class TrialContext:
    """Per-process immutable data shared by all trials of one config."""

    def __init__(self, config: TrialConfig):
        self.config = config
        self.state = config.build_state()
        full = standard_mubs(config.d)
        self.alice_ref: MubSet = full.take(config.mu)
        self.bob_ref: MubSet = full.take(config.nu)
        # stacked reference vectors for the hot path (rotating a unitary onto
        # validated MUBs cannot break their invariants, so trials skip the
        # per-construction validation sweep)
        self.alice_stack = self.alice_ref.stacked()
        self.bob_stack = self.bob_ref.stacked()
        self.pairs = (
            all_pair_indices(config.mu, config.nu)
            if config.mu >= 2 and config.nu >= 2
            else []
        )
        self.family: InequalityFamily | None = None
        if config.mode == "cglmp":
            self.family = relabelings(cglmp(config.d))


def run_trial(config: TrialConfig, trial_index: int, ctx: TrialContext | None = None) -> TrialRecord:
    """One seeded trial; deterministic in (config, trial_index)."""
    if ctx is None:
        ctx = TrialContext(config)
    seed = TrialSeed(config.master_seed, 0 if config.corrupt_stream else trial_index)
    u_a = sample_haar_unitary(config.d, seed, STREAM_ALICE)
    u_b = sample_haar_unitary(config.d, seed, STREAM_BOB)
    p = corrmod.born_tensor(
        ctx.state.coeffs, ctx.alice_stack @ u_a.T, ctx.bob_stack @ u_b.T
    )
    corr = Correlation(config.mu, config.nu, config.d, p)
    no_pair = (-1, -1, -1, -1)
    if config.mode == "cglmp":
        best = -np.inf
        best_pair = no_pair
        for idx in ctx.pairs:
            val = float(np.max(family_values(ctx.family, extract_two_setting(corr, idx))))
            if val > best:
                best = val
                best_pair = (idx.x1, idx.x2, idx.y1, idx.y2)
        violated = best > CGLMP_BOUND + VIOLATION_TOL
        return TrialRecord(trial_index, violated, float("nan"), False, best, best_pair)
    if config.mode == "lp2":
        try:
            res, idx = min_visibility_over_pairs(corr)
        except LpFailure:
            return TrialRecord(
                trial_index, False, float("nan"), False, float("nan"), no_pair, lp_failed=True
            )
        return TrialRecord(
            trial_index,
            res.violated,
            res.vstar,
            res.cap_hit,
            float("nan"),
            (idx.x1, idx.x2, idx.y1, idx.y2),
        )
    # lpfull
    try:
        if corr.k ** (corr.mu + corr.nu) <= VERTEX_CAP_DEFAULT:
            res = visibility(corr)
        else:
            res = visibility_cg(corr)
    except LpFailure:
        return TrialRecord(
            trial_index, False, float("nan"), False, float("nan"), no_pair, lp_failed=True
        )
    return TrialRecord(
        trial_index, res.violated, res.vstar, res.cap_hit, float("nan"), no_pair
    )


def clopper_pearson(n_viol: int, n_tot: int, alpha: float = 0.05) -> tuple[float, float]:
    """Exact binomial confidence interval via the inverse incomplete beta."""
    if not (0 <= n_viol <= n_tot) or n_tot < 1:
        raise ValueError(f"invalid counts ({n_viol}, {n_tot})")
    if n_viol == 0:
        low = 0.0
    else:
        low = float(beta_dist.ppf(alpha / 2.0, n_viol, n_tot - n_viol + 1))
    if n_viol == n_tot:
        high = 1.0
    else:
        high = float(beta_dist.ppf(1.0 - alpha / 2.0, n_viol + 1, n_tot - n_viol))
    return low, high


# --- worker-pool plumbing ---------------------------------------------------

_worker_ctx: TrialContext | None = None


def _worker_init(config: TrialConfig):
    global _worker_ctx
    _worker_ctx = TrialContext(config)


def _worker_run(args: tuple[TrialConfig, int]) -> TrialRecord:
    config, index = args
    return run_trial(config, index, _worker_ctx)


def estimate(
    config: TrialConfig,
    workers: int = 1,
    dump_nonviolating_dir: str | Path | None = None,
    progress_every: int = 0,
) -> tuple[EstimateSummary, list[TrialRecord]]:
    """Run all trials, aggregate counts order-independently, attach the CPI.

    Trials whose LP failed are excluded from n_tot and counted separately;
    more than LP_FAILURE_BUDGET of them aborts the run.
    """
    t0 = time.perf_counter()
    records: list[TrialRecord]
    if workers <= 1:
        ctx = TrialContext(config)
        records = []
        for i in range(config.n_tot):
            records.append(run_trial(config, i, ctx))
            if progress_every and (i + 1) % progress_every == 0:
                done = i + 1
                print(f"  trial {done}/{config.n_tot}", flush=True)
    else:
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_worker_init, initargs=(config,)
        ) as pool:
            chunk = max(1, config.n_tot // (workers * 8))
            results = pool.map(
                _worker_run,
                ((config, i) for i in range(config.n_tot)),
                chunksize=chunk,
            )
            records = list(results)
    records.sort(key=lambda r: r.trial_index)

    if dump_nonviolating_dir is not None:
        _dump_nonviolating(config, records, dump_nonviolating_dir)

    failures = sum(r.lp_failed for r in records)
    if failures > LP_FAILURE_BUDGET * config.n_tot:
        raise LpFailureBudgetExceeded(
            f"{failures} LP failures out of {config.n_tot} trials"
        )
    ok = [r for r in records if not r.lp_failed]
    n_viol = sum(r.violated for r in ok)
    n_tot = len(ok)
    low, high = clopper_pearson(n_viol, n_tot, config.alpha_level)
    summary = EstimateSummary(
        n_viol=n_viol,
        n_tot=n_tot,
        fraction=n_viol / n_tot,
        ci_low=low,
        ci_high=high,
        alpha_level=config.alpha_level,
        lp_failures=failures,
        wall_time_s=time.perf_counter() - t0,
    )
    return summary, records


def _dump_nonviolating(
    config: TrialConfig, records: list[TrialRecord], out_dir: str | Path
) -> None:
    """Store the full correlation of each non-violating trial for re-testing.

    The correlation is rebuilt from its seed (trials are deterministic), so
    only the rare interesting instances ever pay the serialization cost.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ctx = TrialContext(config)
    for rec in records:
        if rec.violated or rec.lp_failed:
            continue
        seed = TrialSeed(
            config.master_seed, 0 if config.corrupt_stream else rec.trial_index
        )
        u_a = sample_haar_unitary(config.d, seed, STREAM_ALICE)
        u_b = sample_haar_unitary(config.d, seed, STREAM_BOB)
        corr = corrmod.compute_correlation(
            ctx.state, rotate_mubs(ctx.alice_ref, u_a), rotate_mubs(ctx.bob_ref, u_b)
        )
        payload = {
            "master_seed": config.master_seed,
            "trial_index": rec.trial_index,
            "d": config.d,
            "mu": config.mu,
            "nu": config.nu,
            "mode": config.mode,
            "min_visibility": rec.min_visibility,
            "correlation": json.loads(corrmod.to_json(corr)),
        }
        path = out / f"nonviolating_{config.master_seed}_{rec.trial_index}.json"
        path.write_text(json.dumps(payload))


def load_dumped_correlation(path: str | Path) -> tuple[dict, Correlation]:
    """Read back one stored non-violating instance."""
    payload = json.loads(Path(path).read_text())
    raw = payload["correlation"]
    corr = Correlation(
        int(raw["mu"]), int(raw["nu"]), int(raw["k"]), np.array(raw["p"])
    )
    return payload, corr


@dataclass(frozen=True)
class Histogram:
    bin_width: float
    origin: float
    lows: np.ndarray
    counts: np.ndarray
    frequencies: np.ndarray
    overflow: int  # cap-hit values
    total: int


def histogram(
    values, bin_width: float, origin: float = 0.0, overflow_count: int = 0
) -> Histogram:
    """Counts over half-open bins [origin + n*w, origin + (n+1)*w)."""
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    vals = np.asarray(list(values), dtype=float)
    total = len(vals) + overflow_count
    if len(vals) == 0:
        return Histogram(
            bin_width, origin, np.array([]), np.array([], dtype=int), np.array([]),
            overflow_count, total,
        )
    idx = np.floor((vals - origin) / bin_width).astype(int)
    lo, hi = idx.min(), idx.max()
    counts = np.bincount(idx - lo, minlength=hi - lo + 1)
    lows = origin + np.arange(lo, hi + 1) * bin_width
    freq = counts / total if total else counts.astype(float)
    return Histogram(bin_width, origin, lows, counts, freq, overflow_count, total)


def visibility_histogram(config: TrialConfig, records: list[TrialRecord]) -> Histogram:
    vals = [
        r.min_visibility
        for r in records
        if not r.lp_failed and not r.cap_hit and np.isfinite(r.min_visibility)
    ]
    overflow = sum(1 for r in records if r.cap_hit)
    return histogram(vals, config.histogram_bin, 0.0, overflow)


GRID_POINTS = 31
_GRID_STREAM_TAG = 0x6D754247  # distinct spawn-key namespace for grid cells


def grid_scan(
    base: TrialConfig, workers: int = 1, progress_every: int = 0
) -> list[list[EstimateSummary]]:
    """31x31 scan of the partially entangled qutrit family at mu=nu=4.

    Cell (i,j) uses alpha_i = (i/30) arccos(1/sqrt(3)), beta_j = (j/30) pi/4,
    with a per-cell seed derived from (master_seed, i, j).
    """
    if base.d != 3 or base.mode != "lp2" or base.mu != 4 or base.nu != 4:
        raise ConfigError("grid scan is defined for d=3, mode lp2, mu=nu=4")
    from .quantum import ALPHA_MAX, BETA_MAX

    rows = []
    for i in range(GRID_POINTS):
        row = []
        for j in range(GRID_POINTS):
            alpha = ALPHA_MAX * i / (GRID_POINTS - 1)
            beta = BETA_MAX * j / (GRID_POINTS - 1)
            cell_seed = int(
                np.random.SeedSequence(
                    base.master_seed, spawn_key=(_GRID_STREAM_TAG, i, j)
                ).generate_state(1, np.uint64)[0]
            )
            config = replace(
                base, state=("partial", alpha, beta), master_seed=cell_seed
            )
            summary, _ = estimate(config, workers=workers)
            row.append(summary)
            if progress_every:
                print(f"  cell ({i},{j}): {summary.fraction:.3f}", flush=True)
        rows.append(row)
    return rows


# --- serialization ----------------------------------------------------------

RECORD_HEADER = (
    "trial_index,violated,min_visibility,cap_hit,max_cglmp,"
    "argmax_x1,argmax_x2,argmax_y1,argmax_y2"
)


def records_to_csv(records: list[TrialRecord]) -> str:
    lines = [RECORD_HEADER]
    for r in records:
        x1, x2, y1, y2 = r.argmax_pair
        lines.append(
            f"{r.trial_index},{int(r.violated)},{r.min_visibility:.17g},"
            f"{int(r.cap_hit)},{r.max_cglmp:.17g},{x1},{x2},{y1},{y2}"
        )
    return "\n".join(lines) + "\n"


def summary_to_json(config: TrialConfig, summary: EstimateSummary) -> str:
    payload = {
        "config": {
            "d": config.d,
            "state": list(config.state),
            "mu": config.mu,
            "nu": config.nu,
            "n_tot": config.n_tot,
            "mode": config.mode,
            "lpfull_settings": config.lpfull_settings,
            "master_seed": config.master_seed,
            "alpha_level": config.alpha_level,
            "histogram_bin": config.histogram_bin,
        },
        "n_viol": summary.n_viol,
        "n_tot": summary.n_tot,
        "fraction": summary.fraction,
        "ci_low": summary.ci_low,
        "ci_high": summary.ci_high,
        "lp_failures": summary.lp_failures,
        "wall_time_s": summary.wall_time_s,
    }
    return json.dumps(payload, indent=2)
