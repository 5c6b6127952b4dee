"""Technique x scenario x trials experiment matrices and their CSV reports.

Cells execute in a fixed (technique, scenario, rdlb-mode, trial) order with
seeds derived as base + trial index, so two runs of the same matrix produce
byte-identical output.  Each cell contributes one row per trial plus mean and
std summary rows; non-baseline scenarios additionally yield a robustness
report against the same technique's baseline mean.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import metrics, techniques, workloads
from .config import Scenario, parse_scenario
from .simulator import (PEModel, SimConfig, dump_trace, inject_failures,
                        inject_perturbations, run_simulation)

RESULTS_HEADER = ("technique", "scenario", "trial", "completed", "t_par",
                  "n_rescheduled", "wasted_iters")
ROBUSTNESS_HEADER = ("technique", "scenario", "t_baseline", "t_perturbed",
                     "radius", "rho")


@dataclass(frozen=True)
class ExperimentMatrix:
    techniques: tuple = techniques.TECHNIQUES
    scenarios: tuple = (parse_scenario("baseline"),)
    trials: int = 20
    seed: int = 0
    rdlb_mode: str = "on"
    n_iterations: int = 10_000
    n_pes: int = 16
    h: float = 1e-4
    base_latency: float = 1e-5
    pes_per_node: int = 4
    workload_kind: str = "constant"
    workload_params: tuple = ()

    def validate(self):
        unknown = [t for t in self.techniques if t not in techniques.TECHNIQUES]
        if unknown:
            raise ValueError(f"unknown techniques: {', '.join(unknown)} "
                             f"(choose from {', '.join(techniques.TECHNIQUES)})")
        if not self.techniques:
            raise ValueError("at least one technique is required")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.rdlb_mode not in ("on", "off", "both"):
            raise ValueError("rdlb must be on, off, or both")
        if self.n_iterations < 1 or self.n_pes < 1 or self.pes_per_node < 1:
            raise ValueError("n_iterations, n_pes, pes_per_node must be positive")
        if self.h < 0.0 or self.base_latency < 0.0:
            raise ValueError("h and base_latency must be nonnegative")
        # surfaces bad workload kinds/params before any cell runs
        self._workload_spec(self.seed)

    def _workload_spec(self, trial_seed):
        return workloads.make_spec(self.workload_kind, self.n_iterations,
                                   seed=trial_seed, **dict(self.workload_params))


@dataclass(frozen=True)
class CellStats:
    technique: str
    scenario: str
    n_trials: int
    completion_rate: float
    t_par_mean: float
    t_par_std: float
    t_par_min: float
    t_par_max: float
    resched_mean: float
    wasted_mean: float


@dataclass
class MatrixResult:
    rows: list
    stats: list
    reports: list = field(default_factory=list)


_MODES = {"on": ((True, ""),), "off": ((False, ""),),
          "both": ((True, "+rdlb"), (False, "-rdlb"))}


def _slug(label: str) -> str:
    label = label.replace("+rdlb", "_rdlb-on").replace("-rdlb", "_rdlb-off")
    return re.sub(r"[^A-Za-z0-9._-]+", "-", label)


def _cell_config(m: ExperimentMatrix, technique, rdlb_on, trial_seed):
    models = tuple(PEModel(id=i, node=i // m.pes_per_node) for i in range(m.n_pes))
    return SimConfig(
        n_iterations=m.n_iterations, n_pes=m.n_pes, technique=technique,
        rdlb_enabled=rdlb_on, h=m.h, base_latency=m.base_latency,
        workload=m._workload_spec(trial_seed), pe_models=models, seed=trial_seed)


def _baseline_tpar(m, technique, trial_seed, cache):
    # rdlb state does not change a failure-free makespan, so one entry serves both
    key = (technique, trial_seed)
    if key not in cache:
        cache[key] = run_simulation(_cell_config(m, technique, False, trial_seed)).t_par
    return cache[key]


def _apply_scenario(m, cfg, scenario: Scenario, cache):
    if scenario.kind == "baseline":
        return cfg
    if scenario.kind == "failures":
        t_base = _baseline_tpar(m, cfg.technique, cfg.seed, cache)
        return inject_failures(cfg, scenario.get("k"), seed=cfg.seed,
                               t_baseline=t_base)
    kwargs = {"node": scenario.get("node")}
    if scenario.kind in ("pe", "combined"):
        kwargs["multiplier"] = scenario.get("multiplier")
    if scenario.kind in ("latency", "combined"):
        kwargs["extra_latency"] = scenario.get("extra")
    return inject_perturbations(cfg, scenario.kind, **kwargs)


def _summarize(technique, label, results) -> CellStats:
    t_par = np.array([r.t_par for r in results])
    completed = np.array([1.0 if r.completed else 0.0 for r in results])
    resched = np.array([float(r.n_rescheduled) for r in results])
    wasted = np.array([float(r.n_wasted_iterations) for r in results])
    with np.errstate(invalid="ignore"):  # inf t_par rows give a nan std
        std = float(t_par.std(ddof=1)) if len(results) > 1 else 0.0
    return CellStats(
        technique=technique, scenario=label, n_trials=len(results),
        completion_rate=float(completed.mean()), t_par_mean=float(t_par.mean()),
        t_par_std=std, t_par_min=float(t_par.min()), t_par_max=float(t_par.max()),
        resched_mean=float(resched.mean()), wasted_mean=float(wasted.mean()))


def _summary_rows(technique, label, results):
    cols = {
        "completed": [1.0 if r.completed else 0.0 for r in results],
        "t_par": [r.t_par for r in results],
        "resched": [float(r.n_rescheduled) for r in results],
        "wasted": [float(r.n_wasted_iterations) for r in results],
    }
    with np.errstate(invalid="ignore"):  # inf t_par rows give a nan std
        mean = {k: float(np.mean(v)) for k, v in cols.items()}
        std = {k: (float(np.std(v, ddof=1)) if len(results) > 1 else 0.0)
               for k, v in cols.items()}
    for name, agg in (("mean", mean), ("std", std)):
        yield (technique, label, name, repr(agg["completed"]), repr(agg["t_par"]),
               repr(agg["resched"]), repr(agg["wasted"]))


def run_matrix(m: ExperimentMatrix, trace_dir=None) -> MatrixResult:
    m.validate()
    scenarios = list(m.scenarios)
    if not any(s.kind == "baseline" for s in scenarios):
        # robustness needs the unperturbed anchor, so run it even if unrequested
        scenarios.insert(0, parse_scenario("baseline"))
    modes = _MODES[m.rdlb_mode]
    if trace_dir is not None:
        trace_dir = Path(trace_dir)
        trace_dir.mkdir(parents=True, exist_ok=True)

    rows, stats = [], []
    baseline_cache: dict = {}
    for technique in m.techniques:
        for scenario in scenarios:
            for rdlb_on, suffix in modes:
                if technique == "STATIC" and rdlb_on:
                    continue  # no self-scheduling requests to piggyback on
                label = scenario.label + suffix
                results = []
                for trial in range(m.trials):
                    trial_seed = m.seed + trial
                    cfg = _apply_scenario(
                        m, _cell_config(m, technique, rdlb_on, trial_seed),
                        scenario, baseline_cache)
                    res = run_simulation(cfg)
                    if scenario.kind == "baseline":
                        baseline_cache.setdefault((technique, trial_seed), res.t_par)
                    if trace_dir is not None:
                        dump_trace(res, trace_dir /
                                   f"{technique}_{_slug(label)}_{trial}.tsv")
                    results.append(res)
                    rows.append((technique, label, str(trial),
                                 "1" if res.completed else "0", repr(res.t_par),
                                 str(res.n_rescheduled),
                                 str(res.n_wasted_iterations)))
                rows.extend(_summary_rows(technique, label, results))
                stats.append(_summarize(technique, label, results))
    return MatrixResult(rows=rows, stats=stats, reports=_robustness_reports(stats))


def _robustness_reports(stats):
    by_cell = {(s.technique, s.scenario): s for s in stats}
    labels = []
    for s in stats:
        if not s.scenario.startswith("baseline") and s.scenario not in labels:
            labels.append(s.scenario)
    reports = []
    for label in labels:
        suffix = next((suf for suf in ("+rdlb", "-rdlb") if label.endswith(suf)), "")
        base_label = "baseline" + suffix
        techs = [s.technique for s in stats if s.scenario == label]
        if not all((t, base_label) in by_cell for t in techs):
            continue
        baselines = {t: by_cell[(t, base_label)].t_par_mean for t in techs}
        perturbed = {t: by_cell[(t, label)].t_par_mean for t in techs}
        reports.append(metrics.robustness(baselines, perturbed, scenario=label))
    return reports


def write_results_csv(result: MatrixResult, path) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULTS_HEADER)
        writer.writerows(result.rows)


def write_robustness_csv(result: MatrixResult, path) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ROBUSTNESS_HEADER)
        for report in result.reports:
            for tech, scen, t_base, t_pert, radius, rho in report.rows():
                writer.writerow((tech, scen, repr(t_base), repr(t_pert),
                                 repr(radius), repr(rho)))


def theory_table(m: ExperimentMatrix):
    """Closed-form cost model over a failure-rate sweep at this matrix's scale."""
    times = workloads.generate(m._workload_spec(m.seed))
    t_task = float(np.mean(times))
    n_per_pe = math.ceil(m.n_iterations / m.n_pes)
    header = ("failure_rate", "t_free", "expected_time", "first_order",
              "overhead_rdlb", "crossover_c")
    rows = []
    for lam in (0.0, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2):
        p = metrics.TheoryParams(n=n_per_pe, q=m.n_pes, t=t_task, lam=lam)
        rows.append((lam, p.t_free, metrics.expected_time_one_failure(p),
                     metrics.expected_time_first_order(p),
                     metrics.overhead_rdlb(p), metrics.checkpoint_crossover(p)[0]))
    return header, rows


def write_theory_csv(header, rows, path) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(x)) for x in row])
