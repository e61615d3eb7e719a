import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from smallworld.generator import (
    PAIR_BLOCK,
    SampleSpec,
    derive_seed,
    pair_uniforms,
    random_permutation,
    sample_er,
    sample_ws,
)
from smallworld.graph import InvalidParameters, Permutation, WsParams, permute, ring_lattice


def test_same_seed_same_graph():
    spec = SampleSpec(WsParams(300, 10, 0.3), seed=42)
    g1, p1 = sample_ws(spec)
    g2, p2 = sample_ws(spec)
    assert g1 == g2 and p1 == p2
    g3, _ = sample_ws(SampleSpec(WsParams(300, 10, 0.3), seed=43))
    assert g3 != g1


def test_worker_count_does_not_change_output():
    # n=600 spans several pair blocks
    n = 600
    assert n * (n - 1) // 2 > 2 * PAIR_BLOCK
    u1 = pair_uniforms(n, 9, workers=1)
    u4 = pair_uniforms(n, 9, workers=4)
    assert np.array_equal(u1, u4)
    spec = SampleSpec(WsParams(n, 20, 0.4), seed=9)
    assert sample_ws(spec, workers=1)[0] == sample_ws(spec, workers=3)[0]
    assert sample_er(n, 0.1, 9, workers=1) == sample_er(n, 0.1, 9, workers=5)


@settings(max_examples=30, deadline=None)
@given(st.integers(5, 60), st.integers(0, 2**63), st.data())
def test_beta_zero_is_permuted_lattice(n, seed, data):
    k = data.draw(st.sampled_from([k for k in range(2, n - 1, 2)]))
    g, perm = sample_ws(SampleSpec(WsParams(n, k, 0.0), seed))
    assert g == permute(ring_lattice(n, k), perm)


def test_identity_mode_gives_lattice():
    g, perm = sample_ws(SampleSpec(WsParams(100, 10, 0.0), 1, "identity"))
    assert perm == Permutation.identity(100)
    assert g == ring_lattice(100, 10)


def test_explicit_permutation_mode():
    p = Permutation(np.roll(np.arange(20), 3))
    g, perm = sample_ws(SampleSpec(WsParams(20, 4, 0.0), 0, p))
    assert perm == p
    with pytest.raises(InvalidParameters):
        SampleSpec(WsParams(20, 4, 0.0), 0, Permutation.identity(5))
    with pytest.raises(InvalidParameters):
        SampleSpec(WsParams(20, 4, 0.0), 0, "shuffled")


def test_mean_degree_matches_channel():
    # E[deg] = k p_in + (n-1-k) q = k - beta(1-beta) k^2/(n-1)
    n, k, beta = 200, 20, 0.3
    expected = k - beta * (1 - beta) * k * k / (n - 1)
    params = WsParams(n, k, beta)
    degs = [sample_ws(SampleSpec(params, s))[0].degrees.mean() for s in range(200)]
    # per-sample edge count variance: sum of Bernoulli variances
    var_edges = n * k / 2 * params.p_in * (1 - params.p_in) + (n * (n - 1) / 2 - n * k / 2) * params.q * (1 - params.q)
    sd_mean_degree = 2 * math.sqrt(var_edges) / n / math.sqrt(200)
    assert abs(np.mean(degs) - expected) < 4 * sd_mean_degree


def test_lattice_edges_survive_at_rate_p_in():
    n, k, beta = 400, 10, 0.5
    params = WsParams(n, k, beta)
    kept = []
    for s in range(20):
        g, perm = sample_ws(SampleSpec(params, s))
        lattice = permute(ring_lattice(n, k), perm)
        kept.append((g.dense & lattice.dense).sum() / lattice.dense.sum())
    sd = math.sqrt(params.p_in * (1 - params.p_in) / (n * k / 2 * 20))
    assert abs(np.mean(kept) - params.p_in) < 4 * sd


def test_beta_one_edge_counts_match_er():
    # two-sample KS on edge counts, small version of the acceptance check
    n, k = 200, 10
    ws = [sample_ws(SampleSpec(WsParams(n, k, 1.0), derive_seed(1, t)))[0].edge_count for t in range(200)]
    er = [sample_er(n, k / (n - 1), derive_seed(2, t)).edge_count for t in range(200)]
    assert stats.ks_2samp(ws, er).pvalue > 0.01


def test_random_permutation_uniform():
    n, draws = 4, 4800
    counts = {p: 0 for p in itertools.permutations(range(n))}
    for s in range(draws):
        counts[tuple(random_permutation(n, derive_seed(77, s)).forward.tolist())] += 1
    observed = np.array(list(counts.values()))
    assert stats.chisquare(observed).pvalue > 0.001


def test_er_probability_extremes():
    assert sample_er(30, 0.0, 1).edge_count == 0
    assert sample_er(30, 1.0, 1).edge_count == 30 * 29 // 2
    with pytest.raises(InvalidParameters):
        sample_er(30, 1.5, 1)


def test_derive_seed_is_deterministic_and_distinct():
    assert derive_seed(5, 1, 2) == derive_seed(5, 1, 2)
    seeds = {derive_seed(5, i, j) for i in range(10) for j in range(10)}
    assert len(seeds) == 100
    assert 0 <= derive_seed(2**64 - 1, 3) < 2**64
