"""
framework/reporter.py

Standardized reporting for every problem folder.
All CSVs go through pandas with a fixed column order and float format, so the
same config and seed give byte-identical files.

Output structure:
    problems/{name}/results/
        ├── certificate.json   ← bound
        ├── certificate.md
        ├── modes.csv
        ├── verification.csv   ← verify
        ├── tightness.csv      ← sharpness (+ {example}_dump.csv with --dump)
        ├── sweep.csv          ← sweep
        ├── sweep.svg
        ├── summary.md
        └── kernel.csv         ← kernel
"""

import json
import math
from datetime import datetime
from pathlib import Path
from typing import Optional

import matplotlib
matplotlib.use("Agg")  # Non-interactive backend for saving files
import matplotlib.pyplot as plt
import pandas as pd

from framework.bound_engine import BoundCertificate
from framework.oracle import VerificationResult
from framework.sharpness import REPORT_COLUMNS, ConstructedSolution, TightnessReport
from framework.sweeps import SweepSpec, is_monotone

FLOAT_FORMAT = "%.12g"
VERIFICATION_COLUMNS = ["lemma", "m", "lhs", "rhs", "margin", "pass"]
KERNEL_COLUMNS = ["r", "re", "im", "bound"]

# svg ids and metadata are otherwise random / time-stamped
matplotlib.rcParams["svg.hashsalt"] = "slab-certify"


def write_csv(df: pd.DataFrame, path: Path, columns: Optional[list] = None) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    if columns is not None:
        df = df.reindex(columns=columns)
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def _fmt(value: float, spec: str = ".6g") -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "n/a"
    return format(value, spec)


def _markdown_table(df: pd.DataFrame) -> str:
    headers = list(df.columns)
    header_row = "| " + " | ".join(headers) + " |"
    sep_row = "|" + "|".join(["---"] * len(headers)) + "|"
    data_rows = "\n".join(
        "| " + " | ".join(_fmt(v) if isinstance(v, float) else str(v) for v in row) + " |"
        for row in df.itertuples(index=False)
    )
    return f"{header_row}\n{sep_row}\n{data_rows}"


# ─── Certificate ────────────────────────────────────────────────────────────

def write_certificate(certificate: BoundCertificate, results_dir: Path, name: str,
                      constants_hash: str = "") -> dict:
    """certificate.json, certificate.md and modes.csv. Returns the JSON payload."""
    results_dir.mkdir(parents=True, exist_ok=True)
    payload = certificate.to_dict()
    payload["constants_sha256"] = constants_hash
    (results_dir / "certificate.json").write_text(
        json.dumps(payload, indent=4, sort_keys=True, default=str), encoding="utf-8")
    table = certificate.to_table()
    write_csv(table, results_dir / "modes.csv")

    theorems = "\n".join(f"| {key} | {_fmt(value)} |"
                         for key, value in sorted(certificate.theorem_comparisons.items()))
    constants = "\n".join(f"| {key} | {_fmt(entry['value'])} | {entry['provenance']} |"
                          for key, entry in certificate.constants.to_dict().items())
    notes = "\n".join(f"- {note}" for note in certificate.notes)
    problem = payload["problem"]
    report = f"""# {name} — Uniqueness Certificate

> n = {problem['n']}, k = {_fmt(certificate.problem.k, '.10g')}, |I| = {_fmt(certificate.problem.measure)}

---

## Result

| | |
|---|---|
| **aggregate c** | **{_fmt(certificate.aggregate_c, '.10g')}** |
| **threshold 1/c** | **{_fmt(certificate.threshold, '.10g')}** |
| tail | m > {certificate.m_tail}: c_m ≤ {_fmt(certificate.tail_bound)} |

Uniqueness holds whenever ‖V‖_∞ < threshold.

## Per-mode bounds

{_markdown_table(table)}

## Theorem-level comparison

| theorem | c |
|---|---|
{theorems}

## Constants

| constant | value | provenance |
|---|---|---|
{constants}

constants file sha256: `{constants_hash or 'n/a'}`

## Notes
{notes}

---
*Generated: {datetime.now().strftime("%Y-%m-%d %H:%M")}*
"""
    (results_dir / "certificate.md").write_text(report, encoding="utf-8")
    print(f"  [Reporter] Certificate → {results_dir}/certificate.md")
    return payload


def print_certificate_summary(name: str, certificate: BoundCertificate):
    worst = max(certificate.modes, key=lambda b: b.c_m)
    lines = "\n".join(
        f"  │  m={b.m:<3} {certificate.problem.mode(b.m).kind.value:<12} c_m = {b.c_m:<12.6g} ({b.source}, {b.provenance.value})"
        for b in certificate.modes
    )
    print(f"""
  ┌─ {name} (n={certificate.problem.n}) ──────────────────────
{lines}
  │  tail m > {certificate.m_tail}:   c_m ≤ {certificate.tail_bound:.6g}
  │  aggregate c:     {certificate.aggregate_c:.10g}  (m={worst.m}, {worst.source})
  │  threshold = {certificate.threshold:.6g}
  └─────────────────────────────────────────────""")


# ─── Verification / sharpness / kernel ──────────────────────────────────────

def verification_frame(results: list[VerificationResult]) -> pd.DataFrame:
    return pd.DataFrame([r.as_row() for r in results], columns=VERIFICATION_COLUMNS)


def write_verification(results: list[VerificationResult], results_dir: Path) -> Path:
    path = write_csv(verification_frame(results), results_dir / "verification.csv", VERIFICATION_COLUMNS)
    print(f"  [Reporter] {len(results)} rows → {path}")
    return path


def print_verification_summary(name: str, summary: dict):
    lines = "\n".join(
        f"  │  {lemma:<18} rows {entry['rows']:>5}   failed {entry['failed']:>4}   worst lhs/rhs {entry['worst_ratio']:.4f}"
        for lemma, entry in summary.items()
    )
    print(f"""
  ┌─ {name} — verification ──────────────────────
{lines}
  └─────────────────────────────────────────────""")


def write_tightness(reports: list[TightnessReport], results_dir: Path) -> Path:
    df = pd.DataFrame([r.as_row() for r in reports], columns=REPORT_COLUMNS)
    path = write_csv(df, results_dir / "tightness.csv", REPORT_COLUMNS)
    for r in reports:
        print(f"  [Sharpness] {r.example:<18} {r.param:<28} bound {_fmt(r.bound):>10}  "
              f"achieved {_fmt(r.achieved):>10}  ratio {_fmt(r.ratio):>8}  ({r.note})")
    print(f"  [Reporter] Tightness → {path}")
    return path


def write_dump(solution: ConstructedSolution, results_dir: Path) -> Path:
    path = write_csv(solution.to_frame(), results_dir / f"{solution.example}_dump.csv")
    print(f"  [Reporter] Samples → {path}")
    return path


def write_kernel_table(table: pd.DataFrame, results_dir: Path) -> Path:
    path = write_csv(table, results_dir / "kernel.csv", KERNEL_COLUMNS)
    print(f"  [Reporter] Kernel table ({len(table)} radii) → {path}")
    return path


# ─── Sweep ──────────────────────────────────────────────────────────────────

def plot_sweep(df: pd.DataFrame, spec: SweepSpec, output_path: Path, title: str):
    column = spec.plotted
    data = df[["value", column]].dropna()
    fig, ax = plt.subplots(figsize=(8, 5))
    ax.plot(data["value"], data[column], marker="o", linewidth=1.5, color="#3b82f6")
    if spec.scale == "geometric":
        ax.set_xscale("log")
        if (data[column] > 0).all() and len(data):
            ax.set_yscale("log")
    ax.set_title(title, fontsize=13, fontweight="bold")
    ax.set_xlabel(spec.parameter)
    ax.set_ylabel(column)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(output_path, format="svg", metadata={"Date": None})
    plt.close(fig)


def write_sweep(df: pd.DataFrame, spec: SweepSpec, results_dir: Path, name: str,
                constants_hash: str = "") -> dict:
    """sweep.csv, sweep.svg and summary.md. Returns the trend summary."""
    results_dir.mkdir(parents=True, exist_ok=True)
    write_csv(df, results_dir / "sweep.csv", spec.columns)
    title = f"{name}: {spec.target} vs {spec.parameter}"
    plot_sweep(df, spec, results_dir / "sweep.svg", title)

    column = spec.plotted
    values = df[column].dropna()
    trend = {
        "column": column,
        "monotone": is_monotone(df[column]),
        "first": float(values.iloc[0]) if len(values) else math.nan,
        "last": float(values.iloc[-1]) if len(values) else math.nan,
        "min": float(values.min()) if len(values) else math.nan,
        "max": float(values.max()) if len(values) else math.nan,
    }
    summary = f"""# {name} — Sweep

{spec.target}: {spec.parameter} from {spec.start:g} to {spec.stop:g} ({spec.points} points, {spec.scale})

## Points

{_markdown_table(df)}

## Trend of `{column}`

| | |
|---|---|
| monotone | {trend['monotone'] or 'no'} |
| first → last | {_fmt(trend['first'])} → {_fmt(trend['last'])} |
| min / max | {_fmt(trend['min'])} / {_fmt(trend['max'])} |

constants file sha256: `{constants_hash or 'n/a'}`

![sweep](sweep.svg)

---
*Generated: {datetime.now().strftime("%Y-%m-%d %H:%M")}*
"""
    (results_dir / "summary.md").write_text(summary, encoding="utf-8")
    print(f"\n  [Reporter] Sweep → {results_dir}/sweep.csv, sweep.svg, summary.md")
    return trend


def print_sweep_summary(name: str, spec: SweepSpec, df: pd.DataFrame, trend: dict):
    column = spec.plotted
    lines = "\n".join(f"  │  {spec.parameter} = {row['value']:<12.6g} {column} = {_fmt(row[column])}"
                      for _, row in df.iterrows())
    print(f"""
  ┌─ {name} — {spec.target} over {spec.parameter} ──────────────────────
{lines}
  │  trend: {trend['monotone'] or 'not monotone'}
  └─────────────────────────────────────────────""")
