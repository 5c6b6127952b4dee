"""Chart rendering for experiment reports.

One makespan bar chart per scenario and one robustness chart per report,
written next to the CSV they summarize.  Runs that never finished are drawn
as hatched bars at the top of the axis and labeled.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .experiment import MatrixResult, _slug


def _bars(ax, names, values, errors=None, unit=""):
    finite = [v for v in values if math.isfinite(v)]
    cap = max(finite) * 1.2 if finite else 1.0
    heights = [v if math.isfinite(v) else cap for v in values]
    hatches = ["" if math.isfinite(v) else "//" for v in values]
    err = None
    if errors is not None:
        err = [e if math.isfinite(e) else 0.0 for e in errors]
    bars = ax.bar(range(len(names)), heights, yerr=err, capsize=3,
                  color="#4878a8", edgecolor="black", linewidth=0.5)
    for bar, hatch, v in zip(bars, hatches, values):
        bar.set_hatch(hatch)
        if not math.isfinite(v):
            ax.annotate("did not finish", (bar.get_x() + bar.get_width() / 2, cap),
                        ha="center", va="bottom", fontsize=7, rotation=90)
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=45, ha="right", fontsize=8)
    if unit:
        ax.set_ylabel(unit)


def render_report_figures(result: MatrixResult, csv_path) -> list:
    base = Path(csv_path).with_suffix("")
    written = []

    labels = []
    for s in result.stats:
        if s.scenario not in labels:
            labels.append(s.scenario)
    for label in labels:
        cells = [s for s in result.stats if s.scenario == label]
        fig, ax = plt.subplots(figsize=(7, 4))
        _bars(ax, [c.technique for c in cells], [c.t_par_mean for c in cells],
              errors=[c.t_par_std for c in cells], unit="T_par (s)")
        ax.set_title(f"mean makespan, scenario {label} "
                     f"({cells[0].n_trials} trials)")
        fig.tight_layout()
        path = Path(f"{base}_tpar_{_slug(label)}.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    for report in result.reports:
        fig, ax = plt.subplots(figsize=(7, 4))
        _bars(ax, list(report.techniques), list(report.rho), unit="rho")
        ax.axhline(1.0, color="black", linewidth=0.8, linestyle=":")
        title = f"robustness, scenario {report.scenario}"
        if report.degenerate:
            title += " (degenerate)"
        ax.set_title(title)
        fig.tight_layout()
        path = Path(f"{base}_rho_{_slug(report.scenario)}.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written


def render_theory_figure(header, rows, csv_path) -> Path:
    """Overhead-vs-checkpoint-cost curves for the middle failure rate."""
    base = Path(csv_path).with_suffix("")
    row = rows[len(rows) // 2]
    as_dict = dict(zip(header, row))
    lam = as_dict["failure_rate"] or 1e-5
    h_rdlb = as_dict["overhead_rdlb"]
    c_star = as_dict["crossover_c"]
    upper = max(c_star * 2.0, 1e-9)
    cs = [upper * i / 200.0 for i in range(201)]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(cs, [math.sqrt(2.0 * lam * c) for c in cs], label="checkpointing")
    ax.axhline(h_rdlb, color="C1", label="rescheduling")
    ax.axvline(c_star, color="gray", linestyle=":",
               label=f"crossover C = {c_star:.3g} s")
    ax.set_xlabel("checkpoint cost C (s)")
    ax.set_ylabel("relative overhead")
    ax.set_title(f"failure rate {lam:g}/s")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = Path(f"{base}_overheads.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
