"""Command-line entry point.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 one or more
analysis subsections failed.
"""

from __future__ import annotations

import argparse
import sys
from datetime import datetime, timedelta, timezone

import numpy as np

from . import synth
from .config import load_config
from .errors import ConfigError, DataError
from .pipeline import run as run_pipeline
from .pipeline import sweep_detrend_window
from .report import write_csv

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_ANALYSIS = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stylefacts",
        description="Stylized-facts analysis of high-frequency price series",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the full pipeline from a YAML config")
    p_run.add_argument("config", help="path to the YAML config file")

    p_sweep = sub.add_parser(
        "sweep-detrend", help="score candidate detrending windows"
    )
    p_sweep.add_argument("config")
    p_sweep.add_argument(
        "--windows",
        default=None,
        help="comma-separated candidate windows (default: detrend.sweep from config)",
    )
    p_sweep.add_argument("--out", default=None, help="optional CSV output path")

    p_val = sub.add_parser("validate", help="validate a config without running")
    p_val.add_argument("config")

    p_synth = sub.add_parser("synth", help="emit a seeded synthetic series as CSV")
    p_synth.add_argument(
        "generator", choices=["gaussian-white", "fgn", "ar1", "q-gaussian"]
    )
    p_synth.add_argument("--n", type=int, required=True)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--sigma", type=float, default=1.0)
    p_synth.add_argument("--hurst", type=float, default=0.5)
    p_synth.add_argument("--phi", type=float, default=0.5)
    p_synth.add_argument("--q", type=float, default=1.5)
    p_synth.add_argument(
        "--cumsum",
        action="store_true",
        help="emit the cumulative sum as a timestamped price series",
    )
    p_synth.add_argument("--base", type=float, default=10000.0,
                         help="price offset used with --cumsum")
    p_synth.add_argument("--start", default="2021-01-01T00:00:00Z",
                         help="first timestamp used with --cumsum")
    p_synth.add_argument("--dt-minutes", type=int, default=10)
    p_synth.add_argument("--out", required=True)
    return parser


def _cmd_run(args) -> int:
    try:
        config = load_config(args.config)
        report, failures = run_pipeline(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    print(f"report written to {config.output_dir}/report.json")
    if failures:
        print(f"{failures} analysis subsection(s) failed; see report", file=sys.stderr)
        return EXIT_ANALYSIS
    return EXIT_OK


def _cmd_sweep(args) -> int:
    try:
        config = load_config(args.config)
        candidates = (
            [int(w) for w in args.windows.split(",")]
            if args.windows
            else config.detrend.sweep
        )
        rows = sweep_detrend_window(config, candidates)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    header = f"{'period':<12} {'window':>8} {'min R2':>8}  flag"
    print(header)
    for row in rows:
        min_r2 = "-" if row["min_r2"] is None else f"{row['min_r2']:.4f}"
        flag = "ok" if row.get("ok") else ""
        print(f"{row['period']:<12} {row['window']:>8} {min_r2:>8}  {flag}")
    if args.out:
        write_csv(
            args.out,
            ["period", "window", "min_r2", "ok"],
            (
                (r["period"], r["window"],
                 "" if r["min_r2"] is None else r["min_r2"], int(r.get("ok", False)))
                for r in rows
            ),
        )
    return EXIT_OK


def _cmd_validate(args) -> int:
    try:
        load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print("config ok")
    return EXIT_OK


def _cmd_synth(args) -> int:
    try:
        if args.generator == "gaussian-white":
            values = synth.gaussian_white(args.n, args.sigma, args.seed).values
        elif args.generator == "fgn":
            values = synth.fgn(args.n, args.hurst, args.seed).values
        elif args.generator == "ar1":
            values = synth.ar1(args.n, args.phi, args.seed).values
        else:
            values = synth.q_gaussian_sample(args.n, args.q, args.seed)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.cumsum:
        prices = args.base + np.cumsum(values)
        if np.any(prices <= 0):
            print(
                "config error: cumulative series crosses zero; raise --base",
                file=sys.stderr,
            )
            return EXIT_CONFIG
        start = datetime.fromisoformat(args.start.replace("Z", "+00:00"))
        if start.tzinfo is None:
            start = start.replace(tzinfo=timezone.utc)
        step = timedelta(minutes=args.dt_minutes)
        write_csv(
            args.out,
            ["timestamp", "price"],
            (
                ((start + i * step).strftime("%Y-%m-%dT%H:%M:%SZ"), float(p))
                for i, p in enumerate(prices)
            ),
        )
    else:
        write_csv(args.out, ["index", "value"], enumerate(map(float, values)))
    print(f"wrote {args.n} samples to {args.out}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "run": _cmd_run,
        "sweep-detrend": _cmd_sweep,
        "validate": _cmd_validate,
        "synth": _cmd_synth,
    }[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
