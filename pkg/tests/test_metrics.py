import json

import numpy as np
import pytest
import scipy.sparse as sp

import refina as rf
from refina.exceptions import DimensionError, UndefinedMetricError


def connected_graph(n, seed):
    g = rf.random_graph(n, 4, seed=seed)
    path = [(i, i + 1) for i in range(n - 1)]
    return rf.Graph.from_edges(n, np.vstack([g.edges(), path]))


def test_accuracy():
    truth = rf.Permutation.random(30, seed=0)
    assert rf.accuracy(truth.to_matrix(), truth) == 1.0
    shifted = rf.AlignmentMatrix.from_mapping((truth.map + 1) % 30, 30)
    assert rf.accuracy(shifted, truth) == 0.0
    with pytest.raises(DimensionError):
        rf.accuracy(truth.to_matrix(), rf.Permutation.identity(29))


def test_accuracy_of_corrupted_truth():
    truth = rf.Permutation.random(2000, seed=0)
    m = rf.corrupted_truth(truth, 0.5, seed=1)
    assert 0.5 <= rf.accuracy(m, truth) <= 0.51


def test_topk_accuracy_equals_accuracy():
    rng = np.random.default_rng(0)
    for i in range(100):
        n = int(rng.integers(2, 20))
        truth = rf.Permutation.random(n, seed=i)
        values = np.round(rng.random((n, n)), 1)
        values[rng.random((n, n)) < 0.5] = 0.0
        for m in [rf.AlignmentMatrix(values),
                  rf.AlignmentMatrix(sp.csr_matrix(values))]:
            assert rf.topk_accuracy(m, truth, 1) == rf.accuracy(m, truth)


def test_topk_accuracy():
    rng = np.random.default_rng(1)
    truth = rf.Permutation.random(25, seed=1)
    m = rf.AlignmentMatrix(rng.random((25, 25)))
    assert rf.topk_accuracy(m, truth, 25) == 1.0
    assert rf.topk_accuracy(m, truth, 5) >= rf.topk_accuracy(m, truth, 1)
    sparse = rf.top_k(m, 3)
    assert rf.topk_accuracy(sparse, truth, 5) == \
        rf.topk_accuracy(m, truth, 3)


def test_conserved_network():
    g = connected_graph(50, 0)
    identity = rf.AlignmentMatrix(np.eye(50))
    assert rf.conserved_network(g, g, identity) == g
    collapsed = rf.AlignmentMatrix.from_mapping(np.zeros(50, dtype=int), 50)
    assert rf.conserved_network(g, g, collapsed).m == 0
    g2, truth = rf.noisy_copy(g, rf.NoiseSpec(p=0.0), seed=1)
    assert rf.conserved_network(g, g2, truth.to_matrix()).m == g.m


def test_conserved_network_monotone():
    g1 = rf.random_graph(60, 6, seed=2)
    g2, truth = rf.noisy_copy(g1, rf.NoiseSpec(p=0.1, seed=3), seed=4)
    m = rf.corrupted_truth(truth, 0.2, seed=5)
    full = set(map(tuple, rf.conserved_network(g1, g2, m).edges().tolist()))
    g1_sub = rf.apply_noise(g1, rf.NoiseSpec(p=0.3, seed=6))
    sub = set(map(tuple,
                  rf.conserved_network(g1_sub, g2, m).edges().tolist()))
    assert sub <= full


def test_normalized_overlap():
    g = connected_graph(40, 1)
    assert rf.normalized_overlap(g, g, rf.AlignmentMatrix(np.eye(40))) == \
        100.0
    g1 = rf.Graph.from_edges(4, [(0, 1)])
    g2 = rf.Graph.from_edges(4, [(2, 3)])
    assert rf.normalized_overlap(g1, g2, rf.AlignmentMatrix(np.eye(4))) == 0
    empty = rf.Graph.from_edges(3, [])
    with pytest.raises(UndefinedMetricError):
        rf.normalized_overlap(empty, empty, rf.AlignmentMatrix(np.eye(3)))


def test_normalized_overlap_symmetry():
    g1 = rf.random_graph(50, 6, seed=7)
    g2 = rf.random_graph(50, 8, seed=8)
    perm = rf.Permutation.random(50, seed=9)
    m = perm.to_matrix()
    assert rf.normalized_overlap(g1, g2, m) == \
        pytest.approx(rf.normalized_overlap(g2, g1, m.T))


def test_normalized_overlap_noisy_copy():
    p = 0.2
    g1 = rf.random_graph(400, 10, seed=0)
    values = []
    for seed in range(20):
        g2, truth = rf.noisy_copy(g1, rf.NoiseSpec(p=p, seed=seed),
                                  seed=50 + seed)
        values.append(rf.normalized_overlap(g1, g2, truth.to_matrix()))
    sigma = 100 * np.sqrt(p * (1 - p) / g1.m / 20)
    assert abs(np.mean(values) - 100 * (1 - p)) < 4 * sigma


def test_lccc():
    g = connected_graph(30, 3)
    identity = rf.AlignmentMatrix(np.eye(30))
    assert rf.lccc(g, g, identity) == g.m
    # a triangle and a path with 5 edges
    g = rf.Graph.from_edges(9, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5),
                                (5, 6), (6, 7), (7, 8)])
    assert rf.lccc(g, g, rf.AlignmentMatrix(np.eye(9))) == 5
    collapsed = rf.AlignmentMatrix.from_mapping(np.zeros(9, dtype=int), 9)
    assert rf.lccc(g, g, collapsed) == 0


def test_lccc_bounds():
    g1 = rf.random_graph(80, 5, seed=10)
    g2, truth = rf.noisy_copy(g1, rf.NoiseSpec(p=0.2, seed=11), seed=12)
    m = rf.corrupted_truth(truth, 0.3, seed=13)
    conserved = rf.conserved_network(g1, g2, m)
    assert rf.lccc(g1, g2, m) <= conserved.adjacency.nnz / 2 <= \
        min(g1.m, g2.m)


def test_metric_identities():
    g = connected_graph(60, 4)
    identity = rf.AlignmentMatrix(np.eye(60))
    report = rf.evaluate(g, g, identity)
    assert report.n_ov == 100.0
    assert report.lccc_edges == g.m
    assert report.avg_mnc == 1.0


def test_evaluate_without_truth():
    g1 = rf.random_graph(40, 4, seed=0)
    g2, truth = rf.noisy_copy(g1, rf.NoiseSpec(p=0.1, seed=1), seed=2)
    report = rf.evaluate(g1, g2, truth.to_matrix())
    data = report.to_dict()
    assert set(data) == {"avg_mnc", "n_ov", "lccc_edges"}


def test_evaluate_with_truth(tmp_path):
    g1 = rf.random_graph(40, 4, seed=0)
    g2, truth = rf.noisy_copy(g1, rf.NoiseSpec(p=0.1, seed=1), seed=2)
    m = rf.corrupted_truth(truth, 0.5, seed=3)
    report = rf.evaluate(g1, g2, m, truth=truth, topk=[1, 5])
    assert report.topk[1] == report.accuracy
    assert 0 <= report.n_ov <= 100

    fname = str(tmp_path / "metrics.json")
    report.to_json(fname)
    with open(fname) as f:
        data = json.load(f)
    assert set(data) == {"accuracy", "topk", "avg_mnc", "n_ov",
                         "lccc_edges"}
    assert set(data["topk"]) == {"1", "5"}
    assert data["lccc_edges"] == report.lccc_edges
