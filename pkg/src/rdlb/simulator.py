"""Discrete-event simulation of a master-worker self-scheduling run.

Workers request chunks from a serial master; each assignment costs the master
h seconds of service, every message pays a one-way latency (base plus any
node-level extras in effect at send time), and compute time follows a
piecewise speed multiplier.  Completion reports double as the next work
request.  Once nothing is left to schedule, an idle worker either waits
(plain self-scheduling) or receives a duplicate of a still-unfinished chunk
picked by a rotating cursor; the first completion of a chunk wins.

A fail-stop worker stops computing at fail_at: messages it already sent are
delivered, everything it holds is lost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from heapq import heappush, heappop

import numpy as np

from . import techniques, workloads
from .ledger import TaskLedger

# event kinds, in tie-breaking order at equal timestamps
_FAILURE, _PERTURB_START, _PERTURB_END, _COMPLETION, _REQUEST = range(5)
_KIND_NAMES = {
    _FAILURE: "Failure",
    _PERTURB_START: "PerturbStart",
    _PERTURB_END: "PerturbEnd",
    _COMPLETION: "ChunkCompletion",
    _REQUEST: "WorkRequest",
}


@dataclass(frozen=True)
class PEModel:
    """One processing element; schedules hold (start, end, value) windows."""

    id: int
    fail_at: float | None = None
    speed_schedule: tuple = ()    # multiplier in (0, 1] while the window is active
    latency_schedule: tuple = ()  # extra one-way seconds, additive across windows
    node: int = 0


@dataclass(frozen=True)
class SimConfig:
    n_iterations: int
    n_pes: int
    technique: str
    rdlb_enabled: bool = True
    h: float = 1e-4
    base_latency: float = 1e-5
    workload: workloads.WorkloadSpec | None = None
    pe_models: tuple = ()
    seed: int = 0
    hang_horizon: float | None = None


@dataclass
class SimResult:
    completed: bool
    t_par: float
    per_pe_busy: list
    per_pe_idle: list
    n_rescheduled: int
    n_wasted_iterations: int
    trace: list = field(repr=False)
    executed_per_pe: list = field(default_factory=list)
    n_lost_chunks: int = 0


def replace_models(cfg: SimConfig, models) -> SimConfig:
    return replace(cfg, pe_models=tuple(models))


def _materialize_models(cfg):
    if not cfg.pe_models:
        return [PEModel(id=i) for i in range(cfg.n_pes)]
    if len(cfg.pe_models) != cfg.n_pes:
        raise ValueError("pe_models must cover every PE")
    models = sorted(cfg.pe_models, key=lambda m: m.id)
    if [m.id for m in models] != list(range(cfg.n_pes)):
        raise ValueError("pe ids must be 0..P-1 without repeats")
    return models


def _norm_windows(schedule, *, is_speed):
    out = []
    for start, end, value in schedule:
        hi = math.inf if end is None else float(end)
        if not start < hi:
            raise ValueError("window start must precede its end")
        if is_speed:
            if not 0.0 < value <= 1.0:
                raise ValueError("speed multiplier must be in (0, 1]")
            if value == 1.0:
                continue  # no-op window; skip so timings match the unperturbed run
        elif value < 0.0:
            raise ValueError("extra latency must be nonnegative")
        out.append((float(start), hi, float(value)))
    out.sort()
    if is_speed:
        for (s0, e0, _), (s1, _, _) in zip(out, out[1:]):
            if s1 < e0:
                raise ValueError("speed windows must not overlap")
    return out


def _advance(windows, t0, work):
    """Finish time for `work` seconds of unit-speed work started at t0."""
    t = t0
    for start, end, mult in windows:
        if end <= t:
            continue
        if start > t:
            gap = start - t
            if work <= gap:
                return t + work
            work -= gap
            t = start
        capacity = (end - t) * mult
        if work <= capacity:
            return t + work / mult
        work -= capacity
        t = end
    return t + work


def run_simulation(cfg: SimConfig, times=None) -> SimResult:
    n, p = cfg.n_iterations, cfg.n_pes
    if n < 1 or p < 1:
        raise ValueError("need at least one iteration and one PE")
    if cfg.h < 0.0 or cfg.base_latency < 0.0:
        raise ValueError("overheads must be nonnegative")
    if times is None:
        if cfg.workload is None:
            raise ValueError("either a workload spec or a time vector is required")
        times = workloads.generate(cfg.workload)
    times = np.asarray(times, dtype=float)
    if times.shape != (n,):
        raise ValueError("time vector length must equal n_iterations")
    csum = np.concatenate(([0.0], np.cumsum(times)))

    models = _materialize_models(cfg)
    fail_at = [math.inf if m.fail_at is None else float(m.fail_at) for m in models]
    speed = [_norm_windows(m.speed_schedule, is_speed=True) for m in models]
    lat = [_norm_windows(m.latency_schedule, is_speed=False) for m in models]

    def one_way(pe, t):
        return cfg.base_latency + sum(v for s, e, v in lat[pe] if s <= t < e)

    state = techniques.make_state(
        cfg.technique, n, p, overhead_s=cfg.h,
        sigma=float(np.std(times)), seed=cfg.seed)
    ledger = TaskLedger(n)

    heap = []
    seq = 0

    def push(t, kind, pe, start=0, size=0, dup=False, t_compute=0.0, t_sched=0.0):
        nonlocal seq
        heappush(heap, (t, kind, pe, seq, start, size, dup, t_compute, t_sched))
        seq += 1

    for pe in range(p):
        push(one_way(pe, 0.0), _REQUEST, pe)
    for pe in range(p):
        if math.isfinite(fail_at[pe]):
            push(fail_at[pe], _FAILURE, pe)
        for s, e, _ in speed[pe] + lat[pe]:
            push(s, _PERTURB_START, pe)
            if math.isfinite(e):
                push(e, _PERTURB_END, pe)

    trace = []
    master_free = 0.0
    next_start = 0
    intervals = [[] for _ in range(p)]  # (compute begin, compute end) per PE
    executed = [0] * p
    last_send = [0.0] * p
    n_rescheduled = 0
    wasted = 0
    lost = 0

    def deliver(pe, t_issue, start, size, dup):
        nonlocal wasted, lost
        t_recv = t_issue + one_way(pe, t_issue)
        if fail_at[pe] <= t_recv:
            lost += 1  # dead on receipt
            return
        work = float(csum[start + size] - csum[start])
        t_fin = _advance(speed[pe], t_recv, work)
        if fail_at[pe] < t_fin:
            intervals[pe].append((t_recv, fail_at[pe]))
            wasted += size
            lost += 1
            return
        intervals[pe].append((t_recv, t_fin))
        t_sched = t_recv - last_send[pe]
        last_send[pe] = t_fin
        push(t_fin + one_way(pe, t_fin), _COMPLETION, pe, start, size, dup,
             t_compute=t_fin - t_recv, t_sched=t_sched)

    def handle_request(t, pe):
        nonlocal master_free, next_start, n_rescheduled
        if state.remaining > 0:
            size = techniques.next_chunk(state, pe)
            start = next_start
            next_start += size
            ledger.mark_scheduled(start, size, pe)
            dup = False
        elif cfg.rdlb_enabled:
            picked = ledger.rdlb_select()
            if picked is None:
                trace.append((t, "WorkRequest", pe, None, None, None))
                return
            start, size = picked
            dup = True
            n_rescheduled += 1
        else:
            trace.append((t, "WorkRequest", pe, None, None, None))
            return
        t_issue = max(t, master_free) + cfg.h
        master_free = t_issue
        trace.append((t, "WorkRequest", pe, start, size, dup))
        deliver(pe, t_issue, start, size, dup)

    completed = False
    t_par = math.inf
    t_last = 0.0
    while heap:
        t, kind, pe, _, start, size, dup, t_compute, t_sched = heappop(heap)
        if cfg.hang_horizon is not None and t > cfg.hang_horizon:
            break
        t_last = t
        if kind != _COMPLETION and kind != _REQUEST:
            trace.append((t, _KIND_NAMES[kind], pe, None, None, None))
            continue
        if kind == _COMPLETION:
            accepted = ledger.report_completion(start, size, pe)
            trace.append((t, "ChunkCompletion", pe, start, size, dup))
            executed[pe] += size
            if not accepted:
                wasted += size
            techniques.record_sample(state, pe, size, t_compute, t_sched)
            if accepted and ledger.is_complete():
                completed = True
                t_par = t
                break
        handle_request(t, pe)  # a completion report doubles as the next request

    t_end = t_par if completed else t_last
    busy, idle = [], []
    for pe in range(p):
        cap = min(t_end, fail_at[pe])
        b = sum(max(0.0, min(e, cap) - min(s, cap)) for s, e in intervals[pe])
        busy.append(b)
        idle.append(max(0.0, cap - b))

    return SimResult(
        completed=completed, t_par=t_par, per_pe_busy=busy, per_pe_idle=idle,
        n_rescheduled=n_rescheduled, n_wasted_iterations=wasted, trace=trace,
        executed_per_pe=executed, n_lost_chunks=lost)


def inject_failures(cfg: SimConfig, count: int, seed: int,
                    t_baseline: float | None = None) -> SimConfig:
    """Pick `count` distinct victims and fail-stop times in (0, T_baseline).

    At most P-1 failures are allowed, so at least one worker survives.  The
    returned config also carries a hang horizon of 100x the failure-free
    makespan so runs that lose work without recovery terminate.
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    if count >= cfg.n_pes:
        raise ValueError("at most P-1 failures are supported")
    if count == 0:
        return cfg
    models = _materialize_models(cfg)
    if t_baseline is None:
        clean = [replace(m, fail_at=None) for m in models]
        t_baseline = run_simulation(replace_models(cfg, clean)).t_par
    rng = np.random.default_rng([cfg.seed if seed is None else seed, 3])
    victims = rng.choice(cfg.n_pes, size=count, replace=False)
    fail_times = rng.uniform(0.0, t_baseline, size=count)
    for victim, t in zip(victims, fail_times):
        models[victim] = replace(models[victim], fail_at=float(t))
    horizon = cfg.hang_horizon if cfg.hang_horizon is not None else 100.0 * t_baseline
    return replace(cfg, pe_models=tuple(models), hang_horizon=horizon)


def inject_perturbations(cfg: SimConfig, scenario: str, node: int = 0,
                         multiplier: float = 0.5, extra_latency: float = 10.0,
                         start: float = 0.0, end: float | None = None) -> SimConfig:
    """Degrade every PE on `node`: compute speed, message latency, or both."""
    if scenario not in ("pe", "latency", "combined"):
        raise ValueError(f"unknown perturbation scenario: {scenario!r}")
    models = _materialize_models(cfg)
    for i, m in enumerate(models):
        if m.node != node:
            continue
        upd = {}
        if scenario in ("pe", "combined"):
            upd["speed_schedule"] = m.speed_schedule + ((start, end, multiplier),)
        if scenario in ("latency", "combined"):
            upd["latency_schedule"] = m.latency_schedule + ((start, end, extra_latency),)
        models[i] = replace(m, **upd)
    return replace_models(cfg, models)


def dump_trace(result: SimResult, path) -> None:
    """Write the event trace as tab-separated rows, '-' for absent fields."""
    with open(path, "w") as fh:
        for t, kind, pe, start, size, dup in result.trace:
            cols = (repr(float(t)), kind, str(pe),
                    "-" if start is None else str(start),
                    "-" if size is None else str(size),
                    "-" if dup is None else str(int(dup)))
            fh.write("\t".join(cols) + "\n")
