"""Command-line front end: campaigns, grid scans, curves, table verification.

Exit codes: 0 success, 2 configuration error, 3 LP-failure budget exceeded
(or, for verify, a non-overlapping row).  All diagnostics go to stderr; data
files are CSV/JSON only, ready for any plotting tool.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .estimator import (
    ConfigError,
    LpFailureBudgetExceeded,
    TrialConfig,
    estimate,
    grid_scan,
    records_to_csv,
    summary_to_json,
    visibility_histogram,
)
from .quantum import ALPHA_MAX, BETA_MAX
from .reference import REFERENCE_TABLES, intervals_overlap

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_LP_BUDGET = 3

DEFAULT_OUT_ENV = "MUBELL_OUT"


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _parse_state(text: str) -> tuple:
    if text == "mes":
        return ("mes",)
    if text.startswith("partial:"):
        parts = text[len("partial:"):].split(",")
        if len(parts) != 2:
            raise ConfigError("partial state needs two angles: partial:alpha,beta")
        return ("partial", float(parts[0]), float(parts[1]))
    raise ConfigError(f"unknown state {text!r} (use mes or partial:alpha,beta)")


def _parse_mode(text: str) -> tuple[str, int | None]:
    if text in ("cglmp", "lp2"):
        return text, None
    if text.startswith("lpfull:"):
        return "lpfull", int(text.split(":", 1)[1])
    raise ConfigError(f"unknown mode {text!r} (use cglmp, lp2 or lpfull:m)")


def _out_dir(args) -> Path:
    out = args.out or os.environ.get(DEFAULT_OUT_ENV) or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _histogram_csv(hist) -> str:
    lines = ["bin_low,bin_high,count,frequency"]
    for lo, count, freq in zip(hist.lows, hist.counts, hist.frequencies):
        lines.append(f"{lo:.17g},{lo + hist.bin_width:.17g},{int(count)},{freq:.17g}")
    lines.append(f"overflow,,{hist.overflow},"
                 f"{hist.overflow / hist.total if hist.total else 0.0:.17g}")
    return "\n".join(lines) + "\n"


def cmd_estimate(args) -> int:
    try:
        mode, m_settings = _parse_mode(args.mode)
        config = TrialConfig(
            d=args.d,
            state=_parse_state(args.state),
            mu=args.mu,
            nu=args.nu,
            n_tot=args.ntot,
            mode=mode,
            lpfull_settings=m_settings,
            master_seed=args.seed,
            alpha_level=args.alpha,
            histogram_bin=args.bin_width,
        )
    except (ConfigError, ValueError) as exc:
        _err(f"config error: {exc}")
        return EXIT_CONFIG
    out = _out_dir(args)
    try:
        summary, records = estimate(
            config,
            workers=args.threads,
            dump_nonviolating_dir=args.dump_nonviolating,
            progress_every=args.progress_every,
        )
    except LpFailureBudgetExceeded as exc:
        _err(f"LP failure budget exceeded: {exc}")
        return EXIT_LP_BUDGET
    (out / "summary.json").write_text(summary_to_json(config, summary))
    (out / "records.csv").write_text(records_to_csv(records))
    (out / "histogram.csv").write_text(_histogram_csv(visibility_histogram(config, records)))
    _err(
        f"fraction {100*summary.fraction:.4f}% "
        f"CPI ({100*summary.ci_low:.4f}, {100*summary.ci_high:.4f})% "
        f"n={summary.n_tot} wall {summary.wall_time_s:.1f}s"
    )
    return EXIT_OK


def cmd_gridscan(args) -> int:
    try:
        base = TrialConfig(
            d=3,
            state=("partial", 0.1, 0.1),
            mu=4,
            nu=4,
            n_tot=args.ntot_per_cell,
            mode="lp2",
            master_seed=args.seed,
            alpha_level=args.alpha,
        )
    except (ConfigError, ValueError) as exc:
        _err(f"config error: {exc}")
        return EXIT_CONFIG
    out = _out_dir(args)
    try:
        grid = grid_scan(base, workers=args.threads, progress_every=args.progress_every)
    except LpFailureBudgetExceeded as exc:
        _err(f"LP failure budget exceeded: {exc}")
        return EXIT_LP_BUDGET
    lines = ["i,j,alpha,beta,fraction,ci_low,ci_high"]
    n = len(grid)
    for i, row in enumerate(grid):
        for j, s in enumerate(row):
            alpha = ALPHA_MAX * i / (n - 1)
            beta = BETA_MAX * j / (n - 1)
            lines.append(
                f"{i},{j},{alpha:.17g},{beta:.17g},"
                f"{s.fraction:.17g},{s.ci_low:.17g},{s.ci_high:.17g}"
            )
    (out / "heatmap.csv").write_text("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_curves(args) -> int:
    try:
        campaign = json.loads(Path(args.campaign).read_text())
        cells = campaign.get("cells", [])
        if not cells:
            _err("config error: empty campaign")
            return EXIT_CONFIG
        configs = []
        for cell in cells:
            mode, m_settings = _parse_mode(cell.get("mode", "lp2"))
            configs.append(
                TrialConfig(
                    d=int(cell["d"]),
                    state=("mes",),
                    mu=int(cell["mu"]),
                    nu=int(cell.get("nu", cell["mu"])),
                    n_tot=int(cell["ntot"]),
                    mode=mode,
                    lpfull_settings=m_settings,
                    master_seed=int(cell.get("seed", args.seed)),
                    alpha_level=args.alpha,
                )
            )
    except (ConfigError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        _err(f"config error: {exc}")
        return EXIT_CONFIG
    out = _out_dir(args)
    lines = ["d,mu,fraction,ci_low,ci_high"]
    for config in configs:
        try:
            summary, _ = estimate(config, workers=args.threads)
        except LpFailureBudgetExceeded as exc:
            _err(f"LP failure budget exceeded: {exc}")
            return EXIT_LP_BUDGET
        lines.append(
            f"{config.d},{config.mu},{summary.fraction:.17g},"
            f"{summary.ci_low:.17g},{summary.ci_high:.17g}"
        )
        _err(f"d={config.d} mu={config.mu} nu={config.nu}: {100*summary.fraction:.3f}%")
    (out / "curves.csv").write_text("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.table not in REFERENCE_TABLES:
        _err(f"unknown table {args.table!r}; choose from {sorted(REFERENCE_TABLES)}")
        return EXIT_CONFIG
    rows = REFERENCE_TABLES[args.table]
    if args.modes:
        rows = tuple(r for r in rows if r.mode in args.modes.split(","))
    all_ok = True
    for row in rows:
        config = TrialConfig(
            d=row.d,
            state=("mes",),
            mu=row.mu,
            nu=row.nu,
            n_tot=args.ntot,
            mode=row.mode,
            master_seed=args.seed,
            corrupt_stream=args.corrupt_seed_stream,
        )
        try:
            summary, _ = estimate(config, workers=args.threads)
        except LpFailureBudgetExceeded as exc:
            _err(f"LP failure budget exceeded: {exc}")
            return EXIT_LP_BUDGET
        ours = (100 * summary.ci_low, 100 * summary.ci_high)
        ok = intervals_overlap(ours, row.band())
        all_ok &= ok
        print(
            f"{args.table} d={row.d} mu={row.mu} nu={row.nu} {row.mode}: "
            f"ref {row.percent}% {row.band()}, "
            f"run {100*summary.fraction:.4f}% ({ours[0]:.4f}, {ours[1]:.4f}) "
            f"-> {'overlap' if ok else 'NO OVERLAP'}"
        )
    return EXIT_OK if all_ok else EXIT_LP_BUDGET


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mubell",
        description="Bell-violation probability estimation for random MUB measurements",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_est = sub.add_parser("estimate", help="run one Monte Carlo campaign")
    p_est.add_argument("--d", type=int, required=True)
    p_est.add_argument("--state", default="mes", help="mes | partial:alpha,beta")
    p_est.add_argument("--mu", type=int, required=True)
    p_est.add_argument("--nu", type=int, required=True)
    p_est.add_argument("--ntot", type=int, required=True)
    p_est.add_argument("--mode", default="lp2", help="cglmp | lp2 | lpfull:m")
    p_est.add_argument("--seed", type=int, default=0)
    p_est.add_argument("--alpha", type=float, default=0.05)
    p_est.add_argument("--bin-width", type=float, default=2.5e-3)
    p_est.add_argument("--out", default=None)
    p_est.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p_est.add_argument("--dump-nonviolating", default=None, metavar="DIR")
    p_est.add_argument("--progress-every", type=int, default=0)
    p_est.set_defaults(func=cmd_estimate)

    p_grid = sub.add_parser("gridscan", help="31x31 scan of the partial qutrit family")
    p_grid.add_argument("--ntot-per-cell", dest="ntot_per_cell", type=int, required=True)
    p_grid.add_argument("--seed", type=int, default=0)
    p_grid.add_argument("--alpha", type=float, default=0.05)
    p_grid.add_argument("--out", default=None)
    p_grid.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p_grid.add_argument("--progress-every", type=int, default=0)
    p_grid.set_defaults(func=cmd_gridscan)

    p_cur = sub.add_parser("curves", help="probability-vs-mu / vs-d curve data")
    p_cur.add_argument("--campaign", required=True, help="JSON file with a cells list")
    p_cur.add_argument("--seed", type=int, default=0)
    p_cur.add_argument("--alpha", type=float, default=0.05)
    p_cur.add_argument("--out", default=None)
    p_cur.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p_cur.set_defaults(func=cmd_curves)

    p_ver = sub.add_parser("verify", help="reduced-sample comparison to a reference table")
    p_ver.add_argument("--table", required=True)
    p_ver.add_argument("--ntot", type=int, required=True)
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--modes", default=None, help="comma list to restrict (cglmp,lp2)")
    p_ver.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p_ver.add_argument(
        "--corrupt-seed-stream",
        action="store_true",
        help="test hook: collapse the per-party random streams (negative control)",
    )
    p_ver.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
