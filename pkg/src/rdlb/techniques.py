"""Chunk-size rules for dynamic loop self-scheduling.

Every technique answers one question: when a free worker asks for work, how
many of the R remaining loop iterations should it get?  The rules range from
fixed blocks (STATIC) and single iterations (SS) over geometrically and
linearly decreasing sequences (GSS, TSS), batched halving (FAC and its
weighted relatives WF/AWF), to fully adaptive per-PE sizing from measured
execution statistics (AF).

All state lives in a TechniqueState; the functions here are deterministic
given that state.  Nothing in this module knows about simulated time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TECHNIQUES = (
    "STATIC", "SS", "FSC", "mFSC", "GSS", "TSS", "FAC", "WF", "RAND",
    "AWF_B", "AWF_C", "AWF_D", "AWF_E", "AF",
)
DYNAMIC_TECHNIQUES = tuple(t for t in TECHNIQUES if t != "STATIC")
ADAPTIVE_TECHNIQUES = ("AWF_B", "AWF_C", "AWF_D", "AWF_E", "AF")

_BATCHED = {"FAC", "WF", "AWF_B", "AWF_C", "AWF_D", "AWF_E"}
_WEIGHTED = {"WF", "AWF_B", "AWF_C", "AWF_D", "AWF_E"}
_OVERHEAD_AWARE = {"AWF_D", "AWF_E"}
_PER_CHUNK_UPDATE = {"AWF_C", "AWF_E"}

_MU_FLOOR = 1e-12  # guards division when a PE reports zero-time samples


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass
class TechniqueState:
    technique: str
    n_total: int
    n_pes: int
    remaining: int
    # FAC/WF/AWF batch bookkeeping: budget left in the current batch, the
    # batch size at its start, and the equal nominal chunk for that batch.
    batch_remaining: int = 0
    batch_size: int = 0
    batch_nominal: int = 1
    # TSS linear recurrence
    tss_next: float = 0.0
    tss_decrement: float = 0.0
    # FSC / mFSC fixed chunk
    fixed_chunk: int = 0
    # WF/AWF relative weights, sum == n_pes
    weights: list = field(default_factory=list)
    # raw (size, compute seconds, scheduling-overhead seconds) per PE
    perf_samples: list = field(default_factory=list)
    # AF online per-iteration statistics
    mu: list = field(default_factory=list)
    sigma: list = field(default_factory=list)
    af_counts: list = field(default_factory=list)
    rng: object = None
    rand_bounds: tuple = (1, 1)
    _aw_iters: list = field(default_factory=list)
    _aw_compute: list = field(default_factory=list)
    _aw_overhead: list = field(default_factory=list)
    _af_m2: list = field(default_factory=list)
    _weights_dirty: bool = False


def make_state(technique: str, n_iterations: int, n_pes: int, *,
               overhead_s: float = 1e-4, sigma: float = 0.0, seed: int = 0,
               weights=None) -> TechniqueState:
    """Build the scheduling state for one run.

    overhead_s and sigma feed the FSC closed form only; seed feeds RAND;
    weights preset the WF vector (uniform when omitted).
    """
    if technique not in TECHNIQUES:
        raise ValueError("unknown technique %r" % (technique,))
    if n_iterations < 1 or n_pes < 1:
        raise ValueError("need at least one iteration and one PE")
    p = n_pes
    st = TechniqueState(technique, n_iterations, p, n_iterations)
    st.weights = list(weights) if weights is not None else [1.0] * p
    if len(st.weights) != p or any(w <= 0 for w in st.weights):
        raise ValueError("weights must be %d positive values" % p)
    st.perf_samples = [[] for _ in range(p)]
    st.mu = [0.0] * p
    st.sigma = [0.0] * p
    st.af_counts = [0] * p
    st._aw_iters = [0] * p
    st._aw_compute = [0.0] * p
    st._aw_overhead = [0.0] * p
    st._af_m2 = [0.0] * p

    if technique == "FSC":
        st.fixed_chunk = chunk_fsc(n_iterations, p, overhead_s, sigma)
    elif technique == "mFSC":
        st.fixed_chunk = max(1, _round_half_up(n_iterations / fac_chunk_count(n_iterations, p)))
    elif technique == "TSS":
        f = math.ceil(n_iterations / (2 * p))
        n_c = math.ceil(2 * n_iterations / (f + 1))
        st.tss_next = float(f)
        st.tss_decrement = (f - 1) / (n_c - 1) if n_c > 1 else 0.0
    elif technique == "RAND":
        st.rng = np.random.default_rng([seed, 1])
        st.rand_bounds = (max(1, n_iterations // (100 * p)),
                          max(1, n_iterations // (2 * p)))
    return st


def next_chunk(ts: TechniqueState, pe: int):
    """Size of the next chunk for the requesting PE, or None when no work remains.

    Decrements ts.remaining; per-technique state (batch budgets, TSS
    recurrence, RNG stream) advances as a side effect.
    """
    if ts.remaining <= 0:
        return None
    name = ts.technique
    if name == "SS":
        k = 1
    elif name == "STATIC":
        k = math.ceil(ts.n_total / ts.n_pes)
    elif name in ("FSC", "mFSC"):
        k = ts.fixed_chunk
    elif name == "GSS":
        k = chunk_gss(ts.remaining, ts.n_pes)
    elif name == "TSS":
        k = chunk_tss(ts)
    elif name == "FAC":
        k = chunk_fac(ts)
    elif name in _WEIGHTED:
        k = chunk_weighted(ts, pe)
    elif name == "RAND":
        k = chunk_rand(ts)
    else:  # AF
        k = _chunk_af(ts, pe)
    k = min(k, ts.remaining)
    ts.remaining -= k
    return k


def chunk_gss(remaining: int, n_pes: int) -> int:
    # a 1/P share of whatever is left, never zero
    return max(1, math.ceil(remaining / n_pes))


def chunk_tss(ts: TechniqueState) -> int:
    k = max(1, min(_round_half_up(ts.tss_next), ts.remaining))
    ts.tss_next -= ts.tss_decrement
    return k


def _start_batch(ts: TechniqueState) -> None:
    if ts.technique in ("AWF_B", "AWF_D") and ts._weights_dirty:
        update_weights(ts)
    b0 = math.ceil(ts.remaining / 2)
    k = max(1, math.ceil(b0 / ts.n_pes))
    ts.batch_size = b0
    ts.batch_nominal = k
    # the batch holds P equal chunk quanta, clamped to what is left
    ts.batch_remaining = min(ts.remaining, ts.n_pes * k)


def chunk_fac(ts: TechniqueState) -> int:
    if ts.batch_remaining <= 0:
        _start_batch(ts)
    k = min(ts.batch_nominal, ts.batch_remaining, ts.remaining)
    ts.batch_remaining -= k
    return k


def chunk_weighted(ts: TechniqueState, pe: int) -> int:
    if ts.batch_remaining <= 0:
        _start_batch(ts)
    nominal = max(1, math.ceil((ts.batch_size / ts.n_pes) * ts.weights[pe]))
    k = min(nominal, ts.batch_remaining, ts.remaining)
    ts.batch_remaining -= k
    return k


def chunk_fsc(n_iterations: int, n_pes: int, overhead_s: float, sigma: float) -> int:
    """Fixed chunk from the overhead/variability trade-off closed form.

    Capped at ceil(N/P): a fixed chunk above an equal share cannot improve
    load balance, and the cap doubles as the sigma -> 0 limit.  The formula
    lives only here so it can be swapped wholesale.
    """
    if n_pes < 2:
        raise ValueError("FSC needs at least 2 PEs")
    cap = math.ceil(n_iterations / n_pes)
    if sigma <= 0.0:
        return cap
    val = ((math.sqrt(2.0) * n_iterations * overhead_s)
           / (sigma * n_pes * math.sqrt(math.log(n_pes)))) ** (2.0 / 3.0)
    return max(1, min(_round_half_up(val), cap))


def fac_chunk_count(n_iterations: int, n_pes: int) -> int:
    """How many chunks practical FAC emits for (N, P); sizes mFSC's fixed chunk."""
    r, count = n_iterations, 0
    while r > 0:
        k = max(1, math.ceil(math.ceil(r / 2) / n_pes))
        budget = min(r, n_pes * k)
        count += math.ceil(budget / k)
        r -= budget
    return count


def chunk_rand(ts: TechniqueState) -> int:
    lo, hi = ts.rand_bounds
    return int(ts.rng.integers(lo, hi + 1))


def record_sample(ts: TechniqueState, pe: int, chunk_size: int,
                  compute_s: float, overhead_s: float = 0.0) -> None:
    """Feed one completed chunk's measurements to the adaptive techniques.

    No-op for non-adaptive techniques, so callers can invoke it uniformly.
    """
    name = ts.technique
    if name == "AF":
        update_af(ts, pe, chunk_size, compute_s)
        return
    if name not in ADAPTIVE_TECHNIQUES:
        return
    ts.perf_samples[pe].append((chunk_size, compute_s, overhead_s))
    ts._aw_iters[pe] += chunk_size
    ts._aw_compute[pe] += compute_s
    ts._aw_overhead[pe] += overhead_s
    if name in _PER_CHUNK_UPDATE:
        update_weights(ts)
    else:
        ts._weights_dirty = True


def update_weights(ts: TechniqueState) -> None:
    """Recompute AWF weights from cumulative per-PE rates.

    Until every PE has at least one sample the weights stay uniform.  The
    -D/-E variants charge the measured scheduling overhead against the rate;
    -B/-C use compute time alone.  Zero-time PEs get clamped to the fastest
    finite rate instead of an infinite weight.
    """
    p = ts.n_pes
    if any(ts._aw_iters[pe] == 0 for pe in range(p)):
        return
    with_overhead = ts.technique in _OVERHEAD_AWARE
    rates = []
    for pe in range(p):
        t = ts._aw_compute[pe] + (ts._aw_overhead[pe] if with_overhead else 0.0)
        rates.append(ts._aw_iters[pe] / t if t > 0.0 else None)
    finite = [r for r in rates if r is not None]
    top = max(finite) if finite else 1.0
    rates = [top if r is None else r for r in rates]
    total = sum(rates)
    ts.weights = [p * r / total for r in rates]
    ts._weights_dirty = False


def update_af(ts: TechniqueState, pe: int, chunk_size: int, elapsed: float):
    """Fold one chunk timing into pe's running mu/sigma; return its next chunk size.

    The per-iteration observation is elapsed/chunk_size; mean and population
    stddev update online.  The returned size is a preview computed by the
    factoring rule; it does not consume remaining iterations.
    """
    x = elapsed / chunk_size
    ts.af_counts[pe] += 1
    n = ts.af_counts[pe]
    delta = x - ts.mu[pe]
    ts.mu[pe] += delta / n
    ts._af_m2[pe] += delta * (x - ts.mu[pe])
    ts.sigma[pe] = math.sqrt(ts._af_m2[pe] / n)
    return _chunk_af(ts, pe)


def _chunk_af(ts: TechniqueState, pe: int) -> int:
    # Small probe chunks until every PE has an estimate: T sums the rates of
    # the whole population, so a partial sum would hand one early reporter
    # nearly all of R.
    if any(c == 0 for c in ts.af_counts):
        return math.ceil(ts.n_total / (2 * ts.n_pes ** 2))
    d = sum(ts.sigma[j] ** 2 / max(ts.mu[j], _MU_FLOOR) for j in range(ts.n_pes))
    t = ts.remaining / sum(1.0 / max(ts.mu[j], _MU_FLOOR) for j in range(ts.n_pes))
    mu_pe = max(ts.mu[pe], _MU_FLOOR)
    if d == 0.0:
        return max(1, int(t / mu_pe))
    num = d + 2.0 * t - math.sqrt(d * d + 4.0 * d * t)
    return max(1, int(num / (2.0 * mu_pe)))
