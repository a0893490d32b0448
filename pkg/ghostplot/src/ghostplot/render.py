"""Render ghostdiff CSV outputs into publication-style figures.

Consumes exactly the simulator CLI's CSV schemas: profile files with a
``position_m,value`` header and sweep files with a
``param,width_measured_m,width_formula_m,rel_err`` header.  Optional overlay
files carry user-supplied experimental points as ``position_m,counts``; the
repository ships no digitized experimental data.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

PROFILE_HEADER = ["position_m", "value"]
SWEEP_HEADER = ["param", "width_measured_m", "width_formula_m", "rel_err"]
OVERLAY_HEADER = ["position_m", "counts"]


class PlotDataError(ValueError):
    """Raised for malformed input CSV; message carries the line number."""


@dataclass(frozen=True)
class PlotJob:
    """One rendering task: an input CSV, an optional overlay, an output image."""

    input_csv: Path
    output_path: Path
    overlay_csv: Path | None = None
    xlabel: str = "detector position (mm)"
    ylabel: str = "normalized counts"
    annotate_peak: bool = True


def _read_csv(path, header, field="input"):
    path = Path(path)
    if not path.exists():
        raise PlotDataError(f"{field} file {path} does not exist")
    columns = [[] for _ in header]
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if lineno == 1:
                if row != header:
                    raise PlotDataError(
                        f"{path}: line 1: expected header {','.join(header)!r}, "
                        f"got {','.join(row)!r}")
                continue
            if len(row) != len(header):
                raise PlotDataError(
                    f"{path}: line {lineno}: expected {len(header)} columns, "
                    f"got {len(row)}")
            for col, cell in zip(columns, row):
                try:
                    col.append(float(cell))
                except ValueError:
                    raise PlotDataError(
                        f"{path}: line {lineno}: cannot parse {cell!r} as a number")
    if not columns[0]:
        raise PlotDataError(f"{path}: no data rows")
    return [np.asarray(col) for col in columns]


def read_profile(path):
    positions, values = _read_csv(path, PROFILE_HEADER, field="profile")
    if not np.all(np.diff(positions) > 0):
        raise PlotDataError(f"{path}: positions must be strictly increasing")
    return positions, values


def read_sweep(path):
    return _read_csv(path, SWEEP_HEADER, field="sweep")


def read_overlay(path):
    return _read_csv(path, OVERLAY_HEADER, field="overlay")


def detect_kind(path):
    """'profile' or 'sweep', decided by the header row."""
    with Path(path).open(newline="") as fh:
        header = next(csv.reader(fh), [])
    if header == PROFILE_HEADER:
        return "profile"
    if header == SWEEP_HEADER:
        return "sweep"
    raise PlotDataError(
        f"{path}: line 1: unrecognized header {','.join(header)!r}")


def build_profile_figure(job: PlotJob):
    """Line plot of a simulated profile with an optional experimental overlay.

    The plotted line carries the CSV data verbatim (same floats, no
    resampling); positions are shown in millimeters.
    """
    positions, values = read_profile(job.input_csv)
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.plot(positions * 1e3, values, color="#1f77b4", lw=1.6, label="simulation")
    if job.overlay_csv is not None:
        xs, counts = read_overlay(job.overlay_csv)
        ax.scatter(xs * 1e3, counts, marker="s", s=28, facecolors="none",
                   edgecolors="#d62728", label="experiment")
        ax.legend(frameon=False)
    ax.set_xlabel(job.xlabel)
    ax.set_ylabel(job.ylabel)
    if job.annotate_peak:
        peak = float(np.max(values))
        ax.annotate(f"peak = {peak:g}",
                    xy=(positions[int(np.argmax(values))] * 1e3, peak),
                    xytext=(8, -4), textcoords="offset points", fontsize=9)
    ax.margins(x=0.02)
    fig.tight_layout()
    return fig


def build_sweep_figure(job: PlotJob):
    """Log-log width-vs-parameter plot with a power-law fit.

    Returns (figure, fitted_slope); unmeasured sweep points (NaN widths) are
    excluded from the fit and the plot.
    """
    param, measured, formula, _ = read_sweep(job.input_csv)
    keep = np.isfinite(measured)
    if int(np.sum(keep)) < 2:
        raise PlotDataError(
            f"{job.input_csv}: fewer than two measured sweep points; "
            f"cannot fit a slope")
    slope, intercept = np.polyfit(np.log(param[keep]), np.log(measured[keep]), 1)

    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    ax.loglog(param[keep], measured[keep], "o", color="#1f77b4", label="measured")
    ax.loglog(param, formula, "--", color="#7f7f7f", lw=1.2, label="formula")
    fit_x = np.array([param.min(), param.max()])
    ax.loglog(fit_x, np.exp(intercept) * fit_x**slope, "-", color="#d62728",
              lw=1.0, label=f"fit slope {slope:.3f}")
    ax.set_xlabel("sweep parameter")
    ax.set_ylabel("fringe width (m)")
    ax.legend(frameon=False)
    fig.tight_layout()
    return fig, float(slope)


def render(job: PlotJob):
    """Render a job to its output path; returns a small result dict."""
    kind = detect_kind(job.input_csv)
    if kind == "profile":
        fig = build_profile_figure(job)
        result = {"kind": kind, "output": str(job.output_path)}
    else:
        fig, slope = build_sweep_figure(job)
        result = {"kind": kind, "output": str(job.output_path), "fitted_slope": slope}
    out = Path(job.output_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return result
