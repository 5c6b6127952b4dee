"""Chunk-rule oracles.

Expected sequences below were derived by hand-iterating the published rules
(independent loops in this file, frozen constants) before the implementation
was written. If an implementation change breaks one of these, the change is
wrong, not the test.
"""

import math
import random

import pytest

from rdlb import techniques as tq


# ---------------------------------------------------------------------------
# independent oracles (re-derive the rules with plain loops)

def oracle_gss(n, p):
    r, seq = n, []
    while r > 0:
        c = min(max(1, math.ceil(r / p)), r)
        seq.append(c)
        r -= c
    return seq


def oracle_tss(n, p):
    f = math.ceil(n / (2 * p))
    n_c = math.ceil(2 * n / (f + 1))
    d = (f - 1) / (n_c - 1) if n_c > 1 else 0.0
    r, nxt, seq = n, float(f), []
    while r > 0:
        c = min(max(1, int(math.floor(nxt + 0.5))), r)
        seq.append(c)
        r -= c
        nxt -= d
    return seq


def oracle_fac(n, p):
    # batch budget = half the remainder rounded up to P equal chunk quanta
    r, seq, budget, k = n, [], 0, 0
    while r > 0:
        if budget <= 0:
            k = max(1, math.ceil(math.ceil(r / 2) / p))
            budget = min(r, p * k)
        c = min(k, budget, r)
        seq.append(c)
        budget -= c
        r -= c
    return seq


GSS_100_4 = [25, 19, 14, 11, 8, 6, 5, 3, 3, 2, 1, 1, 1, 1]
TSS_100_4 = [13, 12, 11, 10, 10, 9, 8, 7, 6, 5, 4, 4, 1]
FAC_100_4 = [13, 13, 13, 13, 6, 6, 6, 6, 3, 3, 3, 3, 2, 2, 2, 2, 1, 1, 1, 1]


def emit_all(state, feed_time=None):
    """Exhaust next_chunk round-robin over PEs; optionally feed timing samples."""
    seq, i = [], 0
    while True:
        pe = i % state.n_pes
        c = tq.next_chunk(state, pe)
        if c is None:
            break
        seq.append(c)
        if feed_time is not None:
            tq.record_sample(state, pe, c, feed_time(pe, c), 1e-4)
        i += 1
    return seq


# ---------------------------------------------------------------------------
# GSS

def test_gss_single_values():
    assert tq.chunk_gss(100, 4) == 25
    assert tq.chunk_gss(1, 256) == 1


def test_gss_full_sequence_matches_oracle():
    assert oracle_gss(100, 4) == GSS_100_4
    st = tq.make_state("GSS", 100, 4)
    assert emit_all(st) == GSS_100_4


def test_gss_nonincreasing():
    st = tq.make_state("GSS", 5000, 7)
    seq = emit_all(st)
    assert seq == sorted(seq, reverse=True)
    assert sum(seq) == 5000


# ---------------------------------------------------------------------------
# TSS

def test_tss_parameters():
    st = tq.make_state("TSS", 100, 4)
    assert st.tss_next == 13.0
    assert st.tss_decrement == pytest.approx(12 / 14)


def test_tss_sequence():
    assert oracle_tss(100, 4) == TSS_100_4
    st = tq.make_state("TSS", 100, 4)
    seq = emit_all(st)
    assert seq == TSS_100_4
    assert seq[:3] == [13, 12, 11]


def test_tss_degenerate_all_ones():
    st = tq.make_state("TSS", 16, 8)  # N = 2P so f = 1
    assert emit_all(st) == [1] * 16


def test_tss_covers_exactly():
    st = tq.make_state("TSS", 1000, 7)
    assert sum(emit_all(st)) == 1000


# ---------------------------------------------------------------------------
# FAC / mFSC

def test_fac_sequence():
    assert oracle_fac(100, 4) == FAC_100_4
    st = tq.make_state("FAC", 100, 4)
    assert emit_all(st) == FAC_100_4


def test_fac_n_equals_p():
    st = tq.make_state("FAC", 8, 8)
    assert emit_all(st) == [1] * 8


def test_fac_batch_chunk_count():
    # within one batch exactly ceil(budget/chunk) chunks are issued
    rng = random.Random(7)
    for _ in range(40):
        n = rng.randint(10, 1000)
        p = rng.choice([2, 4, 16])
        st = tq.make_state("FAC", n, p)
        seq = emit_all(st)
        assert sum(seq) == n
        i = 0
        r = n
        while i < len(seq):
            k = max(1, math.ceil(math.ceil(r / 2) / p))
            budget = min(r, p * k)
            m = math.ceil(budget / k)
            batch = seq[i:i + m]
            assert len(batch) == m
            assert all(c == k for c in batch[:-1])
            assert batch[-1] <= k
            r -= sum(batch)
            i += m


def test_mfsc_chunk_from_fac_count():
    assert len(oracle_fac(100, 4)) == 20
    st = tq.make_state("mFSC", 100, 4)
    assert st.fixed_chunk == 5  # round(100 / 20)
    seq = emit_all(st)
    assert sum(seq) == 100
    assert set(seq[:-1]) == {5}


# ---------------------------------------------------------------------------
# FSC

def test_fsc_value():
    # frozen from an independent one-line evaluation of the closed form
    assert tq.chunk_fsc(20000, 256, 1e-4, 0.01) == 1


def test_fsc_large_sigma_limit():
    assert tq.chunk_fsc(20000, 16, 1e-4, 1e9) == 1


def test_fsc_zero_sigma_caps_at_equal_share():
    assert tq.chunk_fsc(10000, 16, 1e-4, 0.0) == 625


def test_fsc_rejects_single_pe():
    with pytest.raises(ValueError):
        tq.chunk_fsc(100, 1, 1e-4, 0.1)


# ---------------------------------------------------------------------------
# weighted techniques

def test_weighted_uniform_equals_fac():
    a = tq.make_state("WF", 377, 4)
    b = tq.make_state("FAC", 377, 4)
    assert emit_all(a) == emit_all(b)


def test_weighted_hand_example():
    # batch of 50, P=4, weights (2, 2/3, 2/3, 2/3): 25 then 9,9,9
    st = tq.make_state("WF", 100, 4, weights=[2.0, 2 / 3, 2 / 3, 2 / 3])
    got = [tq.next_chunk(st, pe) for pe in range(4)]
    assert got == [25, 9, 9, 9]


def test_weighted_random_weights_cover():
    rng = random.Random(3)
    for _ in range(20):
        n = rng.randint(50, 4000)
        p = rng.randint(2, 12)
        w = [rng.uniform(0.2, 3.0) for _ in range(p)]
        s = sum(w)
        w = [p * x / s for x in w]
        st = tq.make_state("WF", n, p, weights=w)
        assert sum(emit_all(st)) == n


def test_update_weights_homogeneous():
    st = tq.make_state("AWF_B", 1000, 4)
    for pe in range(4):
        tq.record_sample(st, pe, 10, 5.0, 0.01)
    tq.update_weights(st)
    assert st.weights == pytest.approx([1.0] * 4)


def test_update_weights_hand_example():
    # pe0 runs twice as fast as three equal peers
    st = tq.make_state("AWF_B", 1000, 4)
    tq.record_sample(st, 0, 20, 10.0, 0.0)
    for pe in (1, 2, 3):
        tq.record_sample(st, pe, 10, 10.0, 0.0)
    tq.update_weights(st)
    assert st.weights == pytest.approx([1.6, 0.8, 0.8, 0.8])
    assert sum(st.weights) == pytest.approx(4.0, abs=1e-9)


def test_update_weights_scale_invariant():
    a = tq.make_state("AWF_C", 500, 3)
    b = tq.make_state("AWF_C", 500, 3)
    for pe, t in enumerate((2.0, 3.0, 5.0)):
        tq.record_sample(a, pe, 7, t, 0.0)
        tq.record_sample(b, pe, 7, 10 * t, 0.0)
    assert a.weights == pytest.approx(b.weights)


def test_awf_weights_stay_uniform_until_all_sampled():
    st = tq.make_state("AWF_C", 1000, 4)
    tq.record_sample(st, 0, 10, 1.0, 0.0)  # only one PE has a sample
    assert st.weights == [1.0] * 4


def test_awf_overhead_variants_differ():
    # same compute times, very different scheduling overhead on pe1
    plain = tq.make_state("AWF_C", 1000, 2)
    ovh = tq.make_state("AWF_E", 1000, 2)
    for st in (plain, ovh):
        tq.record_sample(st, 0, 10, 10.0, 0.1)
        tq.record_sample(st, 1, 10, 10.0, 30.0)
    assert plain.weights == pytest.approx([1.0, 1.0])
    assert ovh.weights[0] > 1.0 > ovh.weights[1]


# ---------------------------------------------------------------------------
# AF

def test_af_bootstrap_chunk():
    st = tq.make_state("AF", 1000, 4)
    assert tq.next_chunk(st, 0) == math.ceil(1000 / (2 * 16))


def test_af_probes_until_every_pe_is_sampled():
    # a lone early reporter must not be handed the rest of the loop: the T
    # term sums all PE rates, so the formula waits for full coverage
    st = tq.make_state("AF", 1000, 4)
    probe = math.ceil(1000 / (2 * 16))
    assert tq.next_chunk(st, 0) == probe
    tq.update_af(st, 0, probe, float(probe))
    assert tq.next_chunk(st, 0) == probe  # still probing, 3 PEs unsampled
    for pe in (1, 2, 3):
        assert tq.next_chunk(st, pe) == probe
        tq.update_af(st, pe, probe, float(probe))
    before = st.remaining  # next_chunk reserves, so bound on the pre-call value
    first_adaptive = tq.next_chunk(st, 0)
    assert probe < first_adaptive <= math.ceil(before / 4) + 1


def test_af_hand_example():
    # mu = (1, 2), sigma = (0.1, 0.1), R = 100:
    # D = 0.015, T = 200/3, chunk = floor((D + 2T - sqrt(D^2+4DT)) / (2 mu))
    st = tq.make_state("AF", 100, 2)
    for x in (0.9, 1.1):
        tq.update_af(st, 0, 1, x)
    for x in (1.9, 2.1):
        tq.update_af(st, 1, 1, x)
    assert st.mu[0] == pytest.approx(1.0)
    assert st.sigma[0] == pytest.approx(0.1)
    assert st.mu[1] == pytest.approx(2.0)
    assert st.sigma[1] == pytest.approx(0.1)
    assert tq.next_chunk(st, 0) == 65
    st2 = tq.make_state("AF", 100, 2)
    for x in (0.9, 1.1):
        tq.update_af(st2, 0, 1, x)
    for x in (1.9, 2.1):
        tq.update_af(st2, 1, 1, x)
    assert tq.next_chunk(st2, 1) == 32


def test_af_zero_variance_equal_pes():
    st = tq.make_state("AF", 1000, 4)
    for pe in range(4):
        tq.update_af(st, pe, 10, 10.0)  # mu = 1, sigma = 0 everywhere
    c = tq.next_chunk(st, 0)
    assert c == 1000 // 4


def test_af_slower_pe_smaller_chunk():
    rng = random.Random(11)
    for _ in range(25):
        fast = rng.uniform(0.1, 2.0)
        slow = fast * rng.uniform(1.5, 6.0)
        st = tq.make_state("AF", 5000, 2)
        for x in (0.9 * fast, 1.1 * fast):
            tq.update_af(st, 0, 1, x)
        for x in (0.9 * slow, 1.1 * slow):
            tq.update_af(st, 1, 1, x)
        a = tq.make_state("AF", 5000, 2)
        a.mu, a.sigma, a.af_counts = list(st.mu), list(st.sigma), list(st.af_counts)
        a.remaining = st.remaining
        assert tq.next_chunk(st, 0) >= tq.next_chunk(a, 1)


# ---------------------------------------------------------------------------
# RAND

def test_rand_bounds():
    st = tq.make_state("RAND", 20000, 256, seed=5)
    lo, hi = st.rand_bounds
    assert (lo, hi) == (1, 39)
    seq = emit_all(st)
    assert sum(seq) == 20000
    assert all(1 <= c <= 39 for c in seq)


def test_rand_small_n_always_one():
    st = tq.make_state("RAND", 7, 4, seed=0)  # N < 2P
    assert emit_all(st) == [1] * 7


def test_rand_deterministic():
    a = emit_all(tq.make_state("RAND", 5000, 16, seed=42))
    b = emit_all(tq.make_state("RAND", 5000, 16, seed=42))
    assert a == b
    c = emit_all(tq.make_state("RAND", 5000, 16, seed=43))
    assert a != c


# ---------------------------------------------------------------------------
# dispatch and shared invariants

def test_ss_always_one():
    st = tq.make_state("SS", 50, 4)
    assert emit_all(st) == [1] * 50


def test_static_block_partition():
    st = tq.make_state("STATIC", 100, 4)
    assert [tq.next_chunk(st, pe) for pe in range(4)] == [25, 25, 25, 25]
    assert tq.next_chunk(st, 0) is None


def test_last_iteration_schedulable():
    for name in tq.TECHNIQUES:
        p = 2
        st = tq.make_state(name, 1, p) if name != "FSC" else tq.make_state(name, 1, p, sigma=0.5)
        assert tq.next_chunk(st, 0) == 1
        assert tq.next_chunk(st, 1) is None


def test_no_work_signal():
    st = tq.make_state("GSS", 10, 2)
    emit_all(st)
    assert st.remaining == 0
    assert tq.next_chunk(st, 0) is None


@pytest.mark.parametrize("name", tq.TECHNIQUES)
def test_coverage_random_pairs(name):
    # chunk sizes always sum to N, R never increases, chunks within [1, R]
    rng = random.Random(hash(name) & 0xFFFF)
    for _ in range(30):
        n = int(10 ** rng.uniform(0, 4.0))
        p_lo = 2 if name == "FSC" else 1
        p = rng.randint(p_lo, max(p_lo, min(n, 64)))
        st = tq.make_state(name, n, p, sigma=0.3, seed=rng.randrange(2**31))
        seq, i, r_prev = [], 0, n
        while True:
            c = tq.next_chunk(st, i % p)
            if c is None:
                break
            assert 1 <= c <= r_prev
            assert st.remaining == r_prev - c
            r_prev = st.remaining
            seq.append(c)
            if name in tq.ADAPTIVE_TECHNIQUES and i % 3 == 0:
                tq.record_sample(st, i % p, c, c * (1.0 + 0.1 * ((i % 5) - 2)), 1e-3)
            i += 1
        assert sum(seq) == n


@pytest.mark.parametrize("name", ["GSS", "TSS", "FAC", "RAND", "AWF_B", "AF"])
def test_deterministic_sequences(name):
    def run():
        st = tq.make_state(name, 3000, 8, sigma=0.2, seed=99)
        return emit_all(st, feed_time=lambda pe, c: c * (1.0 + 0.05 * pe))
    assert run() == run()


def test_weight_normalization_invariant():
    st = tq.make_state("AWF_E", 4000, 5)
    rng = random.Random(4)
    for i in range(200):
        pe = i % 5
        tq.record_sample(st, pe, rng.randint(1, 30), rng.uniform(0.5, 4.0), rng.uniform(0, 0.2))
        assert sum(st.weights) == pytest.approx(5.0, abs=1e-9)
        assert all(w > 0 for w in st.weights)


def test_zero_time_sample_clamped():
    st = tq.make_state("AWF_C", 1000, 3)
    tq.record_sample(st, 0, 10, 0.0, 0.0)  # instantaneous, must not blow up
    tq.record_sample(st, 1, 10, 2.0, 0.0)
    tq.record_sample(st, 2, 10, 2.0, 0.0)
    assert all(math.isfinite(w) and w > 0 for w in st.weights)
    assert st.weights[0] == max(st.weights)
