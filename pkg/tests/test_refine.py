import logging

import numpy as np
import pytest
import scipy.sparse as sp

import refina as rf
from refina.exceptions import DimensionError, ParameterError
from refina.refine import _sparse_step, _top_alpha_update


def triangle():
    return rf.Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])


def benchmark_instance(seed, n=500, p=0.05, fraction=0.3):
    """Graph, permuted noisy copy, ground truth and corrupted initial
    alignment."""
    g1 = rf.random_graph(n, 10, seed=seed)
    g2, truth = rf.noisy_copy(g1, rf.NoiseSpec(p=p, seed=seed + 1),
                              seed=seed + 2)
    m0 = rf.corrupted_truth(truth, fraction, seed=seed + 3)
    return g1, g2, truth, m0


def ringed_graph(n, seed):
    """Random graph plus a ring, so that no node is isolated."""
    g = rf.random_graph(n, 3, seed=seed)
    ring = [(i, (i + 1) % n) for i in range(n)]
    return rf.Graph.from_edges(n, np.vstack([g.edges(), ring]))


def test_auto_epsilon():
    assert rf.auto_epsilon(1133) == pytest.approx(1e-4)
    assert rf.auto_epsilon(9) == pytest.approx(1e-1)
    assert rf.auto_epsilon(10) == pytest.approx(1e-2)
    assert rf.auto_epsilon(1) == pytest.approx(1e-1)
    with pytest.raises(ParameterError):
        rf.auto_epsilon(0)


def test_mnc_update_dense():
    g = triangle()
    m = rf.mnc_update_dense(g, g, rf.AlignmentMatrix(np.eye(3)))
    assert np.array_equal(m.toarray(), 2 * np.eye(3))
    m = rf.mnc_update_dense(g, g, rf.AlignmentMatrix(np.zeros((3, 3))))
    assert not m.toarray().any()
    empty = rf.Graph.from_edges(3, [])
    m = rf.mnc_update_dense(empty, g, rf.AlignmentMatrix(np.ones((3, 3))))
    assert not m.toarray().any()
    with pytest.raises(DimensionError):
        rf.mnc_update_dense(g, g, rf.AlignmentMatrix(np.eye(2)))


def test_high_degree_priority():
    # triangle 0-1-2 with a pendant node 3 attached to node 0
    g = rf.Graph.from_edges(4, [(0, 1), (1, 2), (0, 2), (0, 3)])
    m = rf.mnc_update_dense(g, g, rf.AlignmentMatrix(np.full((4, 4), 0.25)))
    x = m.toarray()
    pendant = np.concatenate([x[3, :], x[:, 3]])
    assert np.all(x[0, 0] > pendant)


def test_normalize_single_pass():
    m = rf.normalize_single_pass(rf.AlignmentMatrix([[2.0, 0.0],
                                                     [1.0, 1.0]]))
    assert np.allclose(m.toarray(), [[2 / 3, 0.0], [1 / 3, 1.0]])
    p = rf.Permutation.random(6, seed=0).to_matrix()
    assert np.array_equal(rf.normalize_single_pass(p).toarray(),
                          p.toarray())
    zero = rf.AlignmentMatrix(np.zeros((2, 3)))
    assert not rf.normalize_single_pass(zero).toarray().any()


def test_normalize_single_pass_sparse():
    values = np.array([[2.0, 0.0, 1.0], [0.0, 0.0, 0.0], [1.0, 3.0, 0.0]])
    dense = rf.normalize_single_pass(rf.AlignmentMatrix(values))
    sparse = rf.normalize_single_pass(rf.AlignmentMatrix(
        sp.csr_matrix(values)))
    assert sparse.is_sparse
    assert np.allclose(dense.toarray(), sparse.toarray())


def test_normalize_sinkhorn():
    m = rf.normalize_sinkhorn(rf.AlignmentMatrix([[1.0, 2.0], [3.0, 0.5]]),
                              max_iters=1000, tol=1e-2)
    x = m.toarray()
    assert np.all(np.abs(x.sum(axis=0) - 1) < 1e-2)
    assert np.all(np.abs(x.sum(axis=1) - 1) < 1e-2)
    p = rf.Permutation.random(5, seed=1).to_matrix()
    assert np.array_equal(rf.normalize_sinkhorn(p).toarray(), p.toarray())
    half = rf.normalize_sinkhorn(rf.AlignmentMatrix(np.ones((2, 2))))
    assert np.allclose(half.toarray(), 0.5)


def test_normalize_sinkhorn_positive_square():
    rng = np.random.default_rng(3)
    for tol in [1e-2, 1e-6]:
        x = rf.normalize_sinkhorn(rf.AlignmentMatrix(rng.random((20, 20))),
                                  tol=tol).toarray()
        assert np.abs(x.sum(axis=1) - 1).max() < tol
        assert np.abs(x.sum(axis=0) - 1).max() < tol


def test_normalize_sinkhorn_zero_line(caplog):
    values = np.array([[1.0, 0.0], [0.0, 0.0]])
    with caplog.at_level(logging.WARNING, logger="refina"):
        m = rf.normalize_sinkhorn(rf.AlignmentMatrix(values))
    assert "all-zero" in caplog.text
    assert m.toarray()[1].sum() == 0.0


def test_refine_config():
    cfg = rf.RefineConfig(normalization="single", epsilon=1e-3)
    assert cfg.normalization == "single_pass"
    assert rf.RefineConfig.from_dict(cfg.to_dict()) == cfg
    assert cfg.get_epsilon(5, 20) == 1e-3
    assert rf.RefineConfig().get_epsilon(5, 20) == pytest.approx(1e-2)
    assert rf.RefineConfig.from_dict({"K": 7}).iterations == 7
    assert cfg.copy(alpha=3).alpha == 3
    for kwargs in [{"alpha": 0}, {"iterations": -1}, {"mode": "gpu"},
                   {"epsilon": -1.0}, {"normalization": "l2"},
                   {"sinkhorn_tolerance": 0.0},
                   {"early_stop_fraction": 2.0}]:
        with pytest.raises(ParameterError):
            rf.RefineConfig(**kwargs)
    with pytest.raises(ParameterError):
        rf.RefineConfig.from_dict({"iterations": 3, "beta": 1})


@pytest.mark.parametrize("mode", ["dense", "sparse"])
def test_refine_zero_iterations(mode):
    g1, g2, truth, m0 = benchmark_instance(0, n=50)
    m, trace = rf.refine(g1, g2, m0, rf.RefineConfig(iterations=0,
                                                     mode=mode))
    assert m is m0
    assert len(trace) == 0


def test_refine_mode_mismatch():
    g1, g2, truth, m0 = benchmark_instance(0, n=30)
    with pytest.raises(ParameterError):
        rf.refine_dense(g1, g2, m0, rf.RefineConfig(mode="sparse"))
    with pytest.raises(DimensionError):
        rf.refine(g1, g2, m0, truth=rf.Permutation.identity(29))


def test_zero_epsilon_never_grows_support():
    g1, g2, truth, m0 = benchmark_instance(1, n=200)
    support0 = m0.support()
    pi0 = rf.greedy_map(m0).pi

    def check(k, m):
        assert m.support() <= support0

    cfg = rf.RefineConfig(iterations=20, epsilon=0.0)
    m, trace = rf.refine_dense(g1, g2, m0, cfg, callback=check)
    mapping = rf.greedy_map(m)
    # rows that keep a positive score keep their alignment, the rows without
    # matched neighbors drop to zero and map to column 0
    kept = ~mapping.zero_rows
    assert kept.any()
    assert np.array_equal(mapping.pi[kept], pi0[kept])
    assert np.all(mapping.pi[~kept] == 0)
    expected = np.where(kept, pi0 == truth.map, truth.map == 0).mean()
    assert rf.accuracy(m, truth) == pytest.approx(expected)
    if not mapping.zero_rows.any():
        assert rf.accuracy(m, truth) == rf.accuracy(m0, truth)


def test_dense_positive_after_token_scores():
    g1, g2, truth, m0 = benchmark_instance(2, n=60)

    def check(k, m):
        x = m.toarray()
        assert np.all(x > 0)
        assert np.all(x.sum(axis=1) > 0)

    rf.refine_dense(g1, g2, m0, rf.RefineConfig(iterations=5),
                    callback=check)


def test_refinement_recovers():
    better = 0
    for seed in range(10):
        g1, g2, truth, m0 = benchmark_instance(10 * seed)
        acc0 = rf.accuracy(m0, truth)
        mnc0 = rf.average_mnc(g1, g2, m0)
        cfg = rf.RefineConfig(iterations=100, trace_metrics=False)
        m, _ = rf.refine_dense(g1, g2, m0, cfg)
        acc = rf.accuracy(m, truth)
        assert acc >= 0.9 * acc0 + 0.1
        assert rf.average_mnc(g1, g2, m) >= mnc0
        better += acc > acc0
    assert better >= 9


def test_epsilon_sensitivity():
    results = {}
    for eps in [1e-6, 1e-4, 1e-1]:
        accs = []
        for seed in range(3):
            g1, g2, truth, m0 = benchmark_instance(10 * seed)
            cfg = rf.RefineConfig(iterations=100, epsilon=eps,
                                  trace_metrics=False)
            m, _ = rf.refine_dense(g1, g2, m0, cfg)
            accs.append(rf.accuracy(m, truth))
        results[eps] = np.mean(accs)
    assert abs(results[1e-6] - results[1e-4]) <= 0.05
    assert results[1e-1] < results[1e-4]


def test_sparse_matches_dense_at_full_alpha():
    isolated = 0
    for seed in range(5):
        n = 40
        g1 = rf.random_graph(n, 3, seed=seed)
        g2, truth = rf.noisy_copy(g1, rf.NoiseSpec(p=0.05, seed=seed + 1),
                                  seed=seed + 2)
        isolated += np.sum(g1.degrees == 0) + np.sum(g2.degrees == 0)
        rng = np.random.default_rng(seed)
        values = 0.5 + rng.random((n, n))
        m0 = rf.AlignmentMatrix(sp.csr_matrix(values))
        assert m0.nnz == n * n

        maps = {"dense": [], "sparse": []}
        mats = {"dense": [], "sparse": []}
        for mode in maps:
            def record(k, m, mode=mode):
                maps[mode].append(rf.greedy_map(m).pi)
                mats[mode].append(m.toarray())

            cfg = rf.RefineConfig(iterations=10, mode=mode, alpha=n)
            rf.refine(g1, g2, m0, cfg, truth=truth, callback=record)

        assert len(maps["dense"]) == len(maps["sparse"]) == 10
        for a, b in zip(maps["dense"], maps["sparse"]):
            assert np.array_equal(a, b)
        for a, b in zip(mats["dense"], mats["sparse"]):
            assert np.allclose(a, b, rtol=0, atol=1e-9)
    # pairs without matched neighbors are part of the comparison
    assert isolated > 0


def test_full_alpha_selects_zero_counts():
    # node 2 of both graphs is isolated
    g = rf.Graph.from_edges(3, [(0, 1)])
    x = sp.csr_matrix(np.full((3, 3), 0.5))
    u, selected = _top_alpha_update(g.adjacency, x, g.adjacency, alpha=3)
    assert selected.nnz == 9
    new = _sparse_step(x, u, selected, 0.1).toarray()
    dense = x.toarray() * (g.adjacency @ x @ g.adjacency).toarray() + 0.1
    assert np.allclose(new, dense)
    assert np.allclose(new[2], 0.1)


def test_partial_alpha_skips_rows_without_matches():
    g = rf.Graph.from_edges(3, [(0, 1)])
    x = sp.csr_matrix(np.full((3, 3), 0.5))
    u, selected = _top_alpha_update(g.adjacency, x, g.adjacency, alpha=1)
    assert np.diff(selected.indptr).tolist() == [1, 1, 0]
    new = _sparse_step(x, u, selected, 0.1).toarray()
    assert np.allclose(new[2], 0.5)


def test_sparse_alpha_matters():
    accs = {1: [], 10: []}
    for seed in range(3):
        g1, g2, truth, m0 = benchmark_instance(10 * seed)
        for alpha in accs:
            cfg = rf.RefineConfig(iterations=100, mode="sparse", alpha=alpha,
                                  trace_metrics=False)
            m, _ = rf.refine_sparse(g1, g2, m0, cfg)
            accs[alpha].append(rf.accuracy(m, truth))
    assert np.mean(accs[10]) > np.mean(accs[1])


def test_sparse_support_growth_bound():
    g1, g2, truth, m0 = benchmark_instance(4, n=200)
    alpha = 5

    def check(k, m):
        assert m.is_sparse
        assert m.nnz <= m0.nnz + k * m0.n1 * alpha
        assert m.values.data.min() >= 0

    rf.refine_sparse(g1, g2, m0, rf.RefineConfig(iterations=8, mode="sparse",
                                                 alpha=alpha),
                     callback=check)


def test_sparse_prune_threshold():
    g1, g2, truth, m0 = benchmark_instance(5, n=200)
    cfg = rf.RefineConfig(iterations=10, mode="sparse")
    m, _ = rf.refine_sparse(g1, g2, m0, cfg)
    pruned, _ = rf.refine_sparse(g1, g2, m0,
                                 cfg.copy(prune_threshold=1e-3))
    assert pruned.nnz < m.nnz
    assert pruned.values.data.min() >= 1e-3


def test_sparse_step_keeps_rows_without_update():
    x = sp.csr_matrix(np.array([[0.5, 0.0, 0.5], [0.0, 1.0, 0.0]]))
    u = sp.csr_matrix(np.array([[0.0, 2.0, 1.0], [0.0, 0.0, 0.0]]))
    selected = sp.csr_matrix(np.array([[0.0, 1.0, 1.0], [0.0, 0.0, 0.0]]))
    new = _sparse_step(x, u, selected, 0.1).toarray()
    # column 1 is newly selected and receives exactly epsilon
    assert np.allclose(new[0], [0.5, 0.1, 0.6])
    assert np.allclose(new[1], [0.0, 1.0, 0.0])


@pytest.mark.parametrize("mode", ["dense", "sparse"])
def test_refine_determinism(mode):
    g1, g2, truth, m0 = benchmark_instance(6, n=120)
    cfg = rf.RefineConfig(iterations=15, mode=mode)
    m1, t1 = rf.refine(g1, g2, m0, cfg, truth=truth)
    m2, t2 = rf.refine(g1, g2, m0, cfg, truth=truth)
    assert np.array_equal(m1.toarray(), m2.toarray())
    f1 = t1.to_frame().drop(columns="wall_ms")
    f2 = t2.to_frame().drop(columns="wall_ms")
    assert f1.equals(f2)


def test_sparse_parallel_blocks():
    g1, g2, truth, m0 = benchmark_instance(7, n=150)
    cfg = rf.RefineConfig(iterations=5, mode="sparse", chunk_rows=16)
    m1, _ = rf.refine(g1, g2, m0, cfg)
    m2, _ = rf.refine(g1, g2, m0, cfg.copy(workers=4))
    assert np.allclose(m1.toarray(), m2.toarray(), rtol=0, atol=1e-9)
    assert np.array_equal(rf.greedy_map(m1).pi, rf.greedy_map(m2).pi)


def test_sinkhorn_and_single_pass():
    g1, g2, truth, m0 = benchmark_instance(0)
    acc, wall_ms = {}, {}
    for normalization in ["single_pass", "sinkhorn"]:
        cfg = rf.RefineConfig(iterations=100, normalization=normalization,
                              trace_metrics=False)
        m, trace = rf.refine_dense(g1, g2, m0, cfg)
        acc[normalization] = rf.accuracy(m, truth)
        wall_ms[normalization] = trace.to_frame()["wall_ms"].to_numpy()
    assert abs(acc["single_pass"] - acc["sinkhorn"]) <= 0.03
    assert len(wall_ms["single_pass"]) == len(wall_ms["sinkhorn"]) == 100
    # a single pass is cheaper than Sinkhorn in every iteration
    assert np.all(wall_ms["single_pass"] < wall_ms["sinkhorn"])


def test_sparse_sinkhorn():
    g1, g2, truth, m0 = benchmark_instance(8, n=100)
    cfg = rf.RefineConfig(iterations=5, mode="sparse",
                          normalization="sinkhorn")
    m, _ = rf.refine(g1, g2, m0, cfg)
    assert m.is_sparse
    assert m.nnz >= m0.nnz
    assert 0.0 <= rf.accuracy(m, truth) <= 1.0


def test_trace(tmp_path):
    g1, g2, truth, m0 = benchmark_instance(9, n=80)
    cfg = rf.RefineConfig(iterations=10, log_every=3)
    m, trace = rf.refine(g1, g2, m0, cfg, truth=truth)
    frame = trace.to_frame()
    assert list(frame.columns) == ["iter", "avg_mnc", "accuracy",
                                   "changed_rows", "wall_ms"]
    assert frame["iter"].tolist() == [3, 6, 9, 10]
    assert frame["accuracy"].iloc[-1] == rf.accuracy(m, truth)

    _, trace = rf.refine(g1, g2, m0, cfg)
    fname = str(tmp_path / "trace.csv")
    trace.to_csv(fname)
    with open(fname) as f:
        lines = f.read().splitlines()
    assert lines[0] == "iter,avg_mnc,accuracy,changed_rows,wall_ms"
    assert lines[1].split(",")[2] == ""


def test_early_stop():
    g1 = ringed_graph(100, seed=0)
    g2, truth = rf.noisy_copy(g1, rf.NoiseSpec(p=0.0), seed=1)
    cfg = rf.RefineConfig(iterations=50, early_stop_fraction=0.01)
    m, trace = rf.refine(g1, g2, truth.to_matrix(), cfg, truth=truth)
    assert len(trace) == 1
    assert rf.accuracy(m, truth) == 1.0
