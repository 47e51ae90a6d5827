"""CSV-to-image rendering with a fixed deterministic style."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


class SchemaError(ValueError):
    """The CSV does not match the documented schema of the plot kind."""


REQUIRED_COLUMNS = {
    "sweep": ("p_tilde", "system", "sum_rate_mbps_mean", "sum_rate_mbps_stderr"),
    "cdf": ("system", "sum_rate_mbps", "cdf"),
    "bars": ("phase_design", "correlation", "sum_rate_mbps_mean", "sum_rate_mbps_stderr"),
}

SYSTEM_STYLE = {
    "ris": ("#1f77b4", "o", "RIS-assisted cell-free"),
    "no-ris": ("#d62728", "s", "cell-free, no RIS"),
    "no-los": ("#2ca02c", "^", "RIS only (direct links blocked)"),
}

RC = {
    "figure.figsize": (6.4, 4.2),
    "figure.dpi": 120,
    "savefig.dpi": 120,
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.4,
    "svg.hashsalt": "figrender",
}


@dataclass(frozen=True)
class PlotSpec:
    input_csv: Path
    kind: str  # sweep | cdf | bars
    output_path: Path
    title: str = ""


def load_rows(path, kind: str) -> list:
    """Parse the CSV and verify the schema, naming any missing column."""
    if kind not in REQUIRED_COLUMNS:
        raise SchemaError(f"unknown plot kind '{kind}'")
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        names = reader.fieldnames or []
        for column in REQUIRED_COLUMNS[kind]:
            if column not in names:
                raise SchemaError(f"missing column '{column}' for kind '{kind}'")
        rows = list(reader)
    if not rows:
        raise SchemaError("CSV holds no data rows")
    return rows


def series_by_system(rows, x_key: str, y_key: str):
    """Group rows into per-system float arrays, preserving file order."""
    series = {}
    for row in rows:
        system = row["system"]
        series.setdefault(system, ([], []))
        series[system][0].append(float(row[x_key]))
        series[system][1].append(float(row[y_key]))
    return {name: (np.asarray(x), np.asarray(y)) for name, (x, y) in series.items()}


def _style(system: str):
    return SYSTEM_STYLE.get(system, ("#7f7f7f", "x", system))


def _render_sweep(rows, ax):
    series = series_by_system(rows, "p_tilde", "sum_rate_mbps_mean")
    errors = series_by_system(rows, "p_tilde", "sum_rate_mbps_stderr")
    for system, (x, y) in series.items():
        color, marker, label = _style(system)
        ax.errorbar(x, y, yerr=errors[system][1], color=color, marker=marker,
                    capsize=2, label=label)
    ax.set_xlabel("unblocked probability of the direct links")
    ax.set_ylabel("average sum net throughput [Mbps]")
    ax.legend()


def _render_cdf(rows, ax):
    series = series_by_system(rows, "sum_rate_mbps", "cdf")
    for system, (x, y) in series.items():
        color, _, label = _style(system)
        ax.step(x, y, where="post", color=color, label=label)
    ax.set_ylim(0.0, 1.02)
    ax.set_xlabel("sum net throughput [Mbps]")
    ax.set_ylabel("empirical CDF")
    ax.legend()


def _render_bars(rows, ax):
    correlations = []
    designs = []
    for row in rows:
        if row["correlation"] not in correlations:
            correlations.append(row["correlation"])
        if row["phase_design"] not in designs:
            designs.append(row["phase_design"])
    width = 0.8 / len(designs)
    palette = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728")
    for j, design in enumerate(designs):
        means, errs = [], []
        for correlation in correlations:
            match = [r for r in rows
                     if r["phase_design"] == design and r["correlation"] == correlation]
            if not match:
                raise SchemaError(f"missing cell ({design}, {correlation})")
            means.append(float(match[0]["sum_rate_mbps_mean"]))
            errs.append(float(match[0]["sum_rate_mbps_stderr"]))
        offsets = np.arange(len(correlations)) + (j - (len(designs) - 1) / 2.0) * width
        ax.bar(offsets, means, width=width, yerr=errs, capsize=3,
               color=palette[j % len(palette)], label=f"{design} phases")
    ax.set_xticks(np.arange(len(correlations)))
    ax.set_xticklabels([f"{c} fading" for c in correlations])
    ax.set_ylabel("average sum net throughput [Mbps]")
    ax.legend()


def render(spec: PlotSpec) -> Path:
    """Render one CSV into one image file; returns the output path."""
    rows = load_rows(spec.input_csv, spec.kind)
    out = Path(spec.output_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        try:
            if spec.kind == "sweep":
                _render_sweep(rows, ax)
            elif spec.kind == "cdf":
                _render_cdf(rows, ax)
            else:
                _render_bars(rows, ax)
            if spec.title:
                ax.set_title(spec.title)
            fig.tight_layout()
            # Pin the PNG metadata so the bytes do not depend on the
            # library version string.
            fig.savefig(out, format=out.suffix.lstrip(".") or "png",
                        metadata={"Software": "figrender"})
        finally:
            plt.close(fig)
    return out
