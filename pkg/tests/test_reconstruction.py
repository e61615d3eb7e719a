import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from smallworld.generator import SampleSpec, sample_ws
from smallworld.graph import Graph, InvalidParameters, Permutation, SizeMismatch, WsParams, permute, ring_lattice
from smallworld.reconstruction import (
    GroundTruth,
    NeighborhoodEstimate,
    correlation_threshold,
    format_neighborhoods,
    neighborhood_error,
    neighbors_from_angles,
    per_node_errors,
    read_neighborhoods,
    row_correlations,
    spectral_order,
    write_neighborhoods,
)


def test_ground_truth_identity():
    sets = GroundTruth(Permutation.identity(10), 4).sets()
    np.testing.assert_array_equal(sets[0], [1, 2, 8, 9])
    np.testing.assert_array_equal(sets[5], [3, 4, 6, 7])


def test_ground_truth_matches_permuted_lattice():
    p = Permutation(np.random.default_rng(2).permutation(40))
    g = permute(ring_lattice(40, 6), p)
    truth = GroundTruth(p, 6).sets()
    for i in range(40):
        assert truth[i].tolist() == np.flatnonzero(g.dense[i]).tolist()


def test_row_correlations_match_dense():
    g, _ = sample_ws(SampleSpec(WsParams(150, 10, 0.4), 3))
    a = g.dense.astype(np.int64)
    assert np.array_equal(row_correlations(g, closed=False), a @ a)
    closed = a + np.eye(150, dtype=np.int64)
    assert np.array_equal(row_correlations(g, closed=True), closed @ closed)


def test_correlation_exact_on_lattice():
    g = ring_lattice(20, 4)
    est = correlation_threshold(g, 4)
    assert neighborhood_error(est, GroundTruth(Permutation.identity(20), 4)) == 0.0
    # open rows confuse ring distance k/2 with k/2+1
    assert neighborhood_error(correlation_threshold(g, 4, closed=False), GroundTruth(Permutation.identity(20), 4)) > 0


@settings(max_examples=20, deadline=None)
@given(st.integers(12, 80), st.integers(0, 2**63), st.data())
def test_correlation_exact_on_hidden_lattice(n, seed, data):
    k = data.draw(st.sampled_from([k for k in range(2, n // 3, 2)] or [2]))
    g, perm = sample_ws(SampleSpec(WsParams(n, k, 0.0), seed))
    assert neighborhood_error(correlation_threshold(g, k), GroundTruth(perm, k)) == 0.0


def test_correlation_ties_to_smaller_index():
    est = correlation_threshold(Graph.empty(6), 2)
    np.testing.assert_array_equal(est.sets[0], [1, 2])
    np.testing.assert_array_equal(est.sets[3], [0, 1])


def test_spectral_order_exact_on_lattice():
    est = spectral_order(ring_lattice(256, 16), 16)
    assert neighborhood_error(est, GroundTruth(Permutation.identity(256), 16)) == 0.0
    assert est.details["harmonic_gap"] > 0 and not est.details["degenerate_gap"]


def test_spectral_order_hidden_lattice_and_split_sample():
    params = WsParams(300, 60, 0.0)
    g, perm = sample_ws(SampleSpec(params, 8))
    truth = GroundTruth(perm, 60)
    assert neighborhood_error(spectral_order(g, 60), truth) == 0.0
    est = spectral_order(g, 60, split_sample=g)
    assert est.details["split_sample"]
    with pytest.raises(SizeMismatch):
        spectral_order(g, 60, split_sample=ring_lattice(20, 4))


def test_spectral_order_noisy_large_k():
    params = WsParams(512, 200, 0.05)
    g, perm = sample_ws(SampleSpec(params, 1))
    split, _ = sample_ws(SampleSpec(params, 2, perm))
    truth = GroundTruth(perm, 200)
    assert neighborhood_error(spectral_order(g, 200), truth) <= 0.2
    assert neighborhood_error(spectral_order(g, 200, split_sample=split), truth) <= 0.2


def test_neighbors_from_angles():
    angles = np.array([0.0, 3.0, 1.0, 2.0, -1.0])
    # cyclic order 4, 0, 2, 3, 1
    sets = neighbors_from_angles(angles, 2)
    np.testing.assert_array_equal(sets[0], [2, 4])
    np.testing.assert_array_equal(sets[1], [3, 4])
    # equal angles fall back to node index
    np.testing.assert_array_equal(neighbors_from_angles(np.zeros(5), 2)[0], [1, 4])


@settings(max_examples=50, deadline=None)
@given(st.integers(5, 60), st.integers(0, 2**32 - 1), st.data())
def test_angles_invariant_to_rotation_and_reflection(n, seed, data):
    k = data.draw(st.sampled_from(list(range(2, n - 2, 2))))
    theta = np.random.default_rng(seed).uniform(-np.pi, np.pi, n)
    base = neighbors_from_angles(theta, k)
    shift = data.draw(st.floats(0, 2 * np.pi))
    rotated = np.angle(np.exp(1j * (theta + shift)))
    assert np.array_equal(neighbors_from_angles(rotated, k), base)
    assert np.array_equal(neighbors_from_angles(-theta, k), base)


def test_error_metric_range():
    truth = GroundTruth(Permutation.identity(10), 2)
    est = NeighborhoodEstimate(10, 2, truth.sets(), "x")
    assert neighborhood_error(est, truth) == 0.0
    far = NeighborhoodEstimate(10, 2, (truth.sets() + 4) % 10, "x")
    assert neighborhood_error(far, truth) == 2.0
    errs = per_node_errors(far, truth)
    assert np.all((errs >= 0) & (errs <= 2))
    with pytest.raises(SizeMismatch):
        per_node_errors(NeighborhoodEstimate(10, 4, GroundTruth(Permutation.identity(10), 4).sets(), "x"), truth)


def test_estimate_validation():
    with pytest.raises(SizeMismatch):
        NeighborhoodEstimate(4, 2, np.zeros((4, 3)), "x")
    with pytest.raises(InvalidParameters):
        NeighborhoodEstimate(3, 1, [[0], [0], [1]], "x")
    with pytest.raises(InvalidParameters):
        correlation_threshold(ring_lattice(10, 2), 9)


def test_neighborhood_file_round_trip(tmp_path):
    est = correlation_threshold(ring_lattice(12, 4), 4)
    text = format_neighborhoods(est, {"seed": 1})
    assert text.splitlines()[:2] == ["# seed=1", "0: 1 2 10 11"]
    write_neighborhoods(est, tmp_path / "sets.txt", {"seed": 1})
    sets = read_neighborhoods(tmp_path / "sets.txt")
    assert sets == {i: est.neighbors(i) for i in range(12)}
