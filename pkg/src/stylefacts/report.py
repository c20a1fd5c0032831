"""Machine-readable summary report plus a human-readable table."""

from __future__ import annotations

import json
import os

import numpy as np

SCHEMA_VERSION = 1


def _jsonable(value):
    """Convert stray numpy scalars so json serialization never trips."""
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def new_report(config_dict: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "config": config_dict,
        "periods": {},
        "notes": [],
        "methods": {
            "acf_slope_to_hurst": "H = 1 + slope/2 for the absolute-ACF power law",
            "alpha": "alpha = 1/H per diffusion regime",
            "tail_q": "q = 1 - 2/slope from the log-log tail slope",
            "detrending": "three-piece centered moving average, truncated at the edges",
        },
    }


def write_report(report: dict, output_dir: str) -> tuple[str, str]:
    """Write report.json and report.txt; returns their paths.

    Serialization is deterministic: identical report dicts produce identical
    bytes.
    """
    os.makedirs(output_dir, exist_ok=True)
    json_path = os.path.join(output_dir, "report.json")
    txt_path = os.path.join(output_dir, "report.txt")
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, sort_keys=True, indent=2, default=_jsonable)
        fh.write("\n")
    with open(txt_path, "w", encoding="utf-8") as fh:
        fh.write(render_text(report))
    return json_path, txt_path


def _fmt(value, digits: int = 4) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return f"{value:.{digits}f}"
    return str(value)


def render_text(report: dict) -> str:
    """Compact per-period summary of every stylized fact."""
    lines: list[str] = []
    lines.append("Stylized-facts summary")
    lines.append("=" * 70)
    for name, per in report.get("periods", {}).items():
        lines.append(f"\nPeriod: {name}  (n={per.get('n_samples', '-')}, "
                     f"gap fill {100 * per.get('gap_fill_fraction', 0.0):.3f}%)")
        lines.append("-" * 70)
        tail = per.get("tail_fit")
        if tail:
            lines.append(
                f"  fat tail        slope {_fmt(tail['slope'])} +- {_fmt(tail['stderr'])}"
                f"   q = {_fmt(tail['q'])}"
            )
        semi = per.get("semilog_fit")
        if semi:
            pin = " (pinned)" if semi.get("pinned") else ""
            lines.append(
                f"  semilog fit     q = {_fmt(semi['q'])}  scale {_fmt(semi['scale'])}"
                f"  R2 {_fmt(semi['r_squared'])}{pin}"
            )
        diff = per.get("diffusion")
        if diff:
            lines.append(
                f"  diffusion       short: H {_fmt(diff['h_short'])} alpha {_fmt(diff['alpha_short'])}"
                f" ({diff['regime_short']})"
            )
            lines.append(
                f"                  long:  H {_fmt(diff['h_long'])} alpha {_fmt(diff['alpha_long'])}"
                f" ({diff['regime_long']})  breakpoint lag {diff['breakpoint_lag']}"
            )
        acf = per.get("acf")
        if acf:
            lines.append(
                f"  acf             |C| slope {_fmt(acf['slope'])} +- {_fmt(acf['slope_stderr'])}"
                f"  H {_fmt(acf['hurst'])}  memory time {_fmt(acf.get('memory_time'))}"
            )
        det = per.get("detrend")
        if det:
            lines.append(
                f"  self-similarity t_w {det['window']}  master q {_fmt(det['collapse_q'])}"
                f"  collapse dist {_fmt(det['collapse_distance'])}"
                f"  implied xi {_fmt(det.get('implied_xi'))}"
            )
        mf = per.get("mfdfa")
        if mf:
            lines.append(
                f"  mfdfa ({mf['input']})  h(2) {_fmt(mf['h2'])}  slopes"
                f" {_fmt(mf['slope_negative'])}/{_fmt(mf['slope_positive'])}"
                f"  verdict {mf['verdict']} (sweep: {mf['sweep_verdict']})"
            )
        errs = per.get("errors", {})
        for analysis, msg in errs.items():
            lines.append(f"  [failed] {analysis}: {msg}")
    notes = report.get("notes", [])
    if notes:
        lines.append("\nNotes")
        lines.append("-" * 70)
        for note in notes:
            lines.append(f"  - {note}")
    lines.append("")
    return "\n".join(lines)


def write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_csv_cell(v) for v in row) + "\n")


def _csv_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)
