"""Command line driver: rdlb [--config FILE] [flags] -> CSV + charts.

Precedence: built-in defaults, then the config file, then explicit flags.
Exit status is 0 only when every requested cell ran; a run that never
finishes inside the simulation is data, not an error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import config as configmod
from . import experiment, figures, techniques, workloads

_DEFAULTS = {
    "seed": 0, "trials": 20, "out": "results.csv", "rdlb": "on",
    "n_iterations": 10_000, "n_pes": 16, "h": 1e-4, "base_latency": 1e-5,
    "pes_per_node": 4, "workload": "constant", "traces": None, "figures": "on",
    "technique": list(techniques.TECHNIQUES), "scenario": ["baseline"],
}

_INT_KEYS = ("seed", "trials", "n_iterations", "n_pes", "pes_per_node")
_FLOAT_KEYS = ("h", "base_latency")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rdlb",
        description="Run self-scheduling techniques with optional duplicate-based "
                    "rescheduling in a deterministic cluster simulator.")
    p.add_argument("--config", metavar="PATH",
                   help="key=value experiment file (see docs/config.md)")
    p.add_argument("--seed", type=int, metavar="U64", help="base seed; trial i uses seed+i")
    p.add_argument("--trials", type=int, metavar="K", help="repetitions per cell")
    p.add_argument("--out", metavar="PATH", help="results CSV path")
    p.add_argument("--technique", action="append", metavar="NAME",
                   help="technique to run, repeatable (default: all)")
    p.add_argument("--scenario", action="append", metavar="NAME[:params]",
                   help="baseline | failures:k=K | pe | latency | combined, repeatable")
    p.add_argument("--rdlb", choices=("on", "off", "both"),
                   help="duplicate-based rescheduling of lost chunks")
    p.add_argument("--theory", action="store_true",
                   help="emit the closed-form cost model table instead of simulating")
    p.add_argument("--n-iterations", type=int, metavar="N", help="loop size")
    p.add_argument("--n-pes", type=int, metavar="P", help="worker count")
    p.add_argument("--h", type=float, metavar="SECONDS", help="master overhead per assignment")
    p.add_argument("--base-latency", type=float, metavar="SECONDS", help="one-way message latency")
    p.add_argument("--pes-per-node", type=int, metavar="M", help="PEs sharing a node")
    p.add_argument("--workload", metavar="KIND[:params]",
                   help="constant | uniform | gaussian | mandelbrot")
    p.add_argument("--traces", metavar="DIR", help="write one event trace per run")
    p.add_argument("--no-figures", action="store_true",
                   help="skip chart rendering next to the CSV")
    return p


def _merge(args) -> dict:
    merged = {k: (list(v) if isinstance(v, list) else v)
              for k, v in _DEFAULTS.items()}
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise configmod.ConfigError(str(exc))
        merged.update(configmod.parse_config_text(text))
    overrides = {
        "seed": args.seed, "trials": args.trials, "out": args.out,
        "rdlb": args.rdlb, "n_iterations": args.n_iterations,
        "n_pes": args.n_pes, "h": args.h, "base_latency": args.base_latency,
        "pes_per_node": args.pes_per_node, "workload": args.workload,
        "traces": args.traces, "technique": args.technique,
        "scenario": args.scenario,
    }
    merged.update({k: v for k, v in overrides.items() if v is not None})
    if args.no_figures:
        merged["figures"] = "off"
    for key in _INT_KEYS:
        merged[key] = int(merged[key])
    for key in _FLOAT_KEYS:
        merged[key] = float(merged[key])
    if merged["figures"] not in ("on", "off"):
        raise configmod.ConfigError("figures must be on or off")
    return merged


def _build_matrix(merged) -> experiment.ExperimentMatrix:
    kind, params = configmod.parse_workload(merged["workload"])
    matrix = experiment.ExperimentMatrix(
        techniques=tuple(merged["technique"]),
        scenarios=tuple(configmod.parse_scenario(s) for s in merged["scenario"]),
        trials=merged["trials"], seed=merged["seed"], rdlb_mode=merged["rdlb"],
        n_iterations=merged["n_iterations"], n_pes=merged["n_pes"],
        h=merged["h"], base_latency=merged["base_latency"],
        pes_per_node=merged["pes_per_node"], workload_kind=kind,
        workload_params=tuple(sorted(params.items())))
    matrix.validate()
    return matrix


def _run_theory(matrix, merged) -> int:
    header, rows = experiment.theory_table(matrix)
    widths = [max(len(h), 12) for h in header]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for row in rows:
        print("  ".join(f"{x:<{w}.6g}" for x, w in zip(row, widths)))
    if merged["out"]:
        experiment.write_theory_csv(header, rows, merged["out"])
        print(f"wrote {merged['out']}")
        if merged["figures"] == "on":
            path = figures.render_theory_figure(header, rows, merged["out"])
            print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        merged = _merge(args)
        matrix = _build_matrix(merged)
    except (configmod.ConfigError, ValueError) as exc:
        parser.error(str(exc))
    if args.theory:
        return _run_theory(matrix, merged)
    try:
        result = experiment.run_matrix(matrix, trace_dir=merged["traces"])
        out = Path(merged["out"])
        experiment.write_results_csv(result, out)
        written = [out]
        if result.reports:
            rob = out.with_name(out.stem + "_robustness" + out.suffix)
            experiment.write_robustness_csv(result, rob)
            written.append(rob)
        if merged["figures"] == "on":
            written.extend(figures.render_report_figures(result, out))
    except Exception as exc:  # a cell that cannot run is a hard error
        print(f"error: {exc}", file=sys.stderr)
        return 1
    n_cells = len(result.stats)
    print(f"{n_cells} cells, {len(result.rows)} rows")
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
