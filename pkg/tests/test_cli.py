import json
import os

import numpy as np
import pandas as pd

import refina as rf
from refina.cli import EXIT_CONFIG, EXIT_DIMENSION, EXIT_INPUT, EXIT_OK, main


def write_pair(folder, n=60):
    g = rf.random_graph(n, 3, seed=0)
    ring = [(i, (i + 1) % n) for i in range(n)]
    g1 = rf.Graph.from_edges(n, np.vstack([g.edges(), ring]))
    g2, truth = rf.noisy_copy(g1, rf.NoiseSpec("add_edges", 0.05, seed=1),
                              seed=2)
    paths = {name: str(folder / "{}.txt".format(name))
             for name in ["g1", "g2", "truth"]}
    g1.write_edge_list(paths["g1"])
    g2.write_edge_list(paths["g2"])
    truth.to_file(paths["truth"])
    return paths


def test_bench_random_graph(tmp_path):
    out = str(tmp_path / "bench")
    code = main(["bench", "--nodes", "60", "--avg-degree", "6", "--noise",
                 "0.0", "0.1", "--seeds", "0", "--iters", "3", "--topk", "1",
                 "--corruption", "0.2", "--workers", "1", "--out", out])
    assert code == EXIT_OK
    summary = pd.read_csv(os.path.join(out, "summary.csv"))
    assert len(summary) == 2
    assert os.path.exists(os.path.join(out, "p=0.1", "seed=0", "base",
                                       "trace.csv"))


def test_bench_config_file(tmp_path):
    fname = str(tmp_path / "bench.json")
    rf.io.dump(fname, {"graph": {"n": 50, "avg_degree": 4},
                       "noise": {"levels": [0.05]},
                       "refine": {"iterations": 2}})
    out = str(tmp_path / "bench")
    code = main(["bench", "--config", fname, "--mode", "sparse", "--alpha",
                 "5", "--out", out, "--workers", "1"])
    assert code == EXIT_OK
    results = pd.read_csv(os.path.join(out, "results.csv"))
    assert results["iterations_run"].tolist() == [2]


def test_bench_unknown_config_key(tmp_path):
    fname = str(tmp_path / "bench.json")
    rf.io.dump(fname, {"graph": {"n": 50, "avg_degree": 4},
                       "noise": {"levels": [0.05]}, "colour": "red"})
    assert main(["bench", "--config", fname]) == EXIT_CONFIG


def test_bench_missing_graph():
    assert main(["bench", "--noise", "0.1"]) == EXIT_CONFIG


def test_refine(tmp_path):
    paths = write_pair(tmp_path)
    out = str(tmp_path / "refined")
    code = main(["refine", "--graph", paths["g1"], "--graph2", paths["g2"],
                 "--m0", paths["truth"], "--truth", paths["truth"],
                 "--iters", "5", "--epsilon", "1e-3", "--topk", "1", "5",
                 "--top", "2", "--out", out])
    assert code == EXIT_OK
    with open(os.path.join(out, "metrics.json")) as f:
        report = json.load(f)
    assert report["accuracy"] == 1.0
    assert set(report["topk"]) == {"1", "5"}
    with open(os.path.join(out, "alignment.txt")) as f:
        assert len([line for line in f if line.strip()]) == 2 * 60


def test_refine_missing_file(tmp_path):
    paths = write_pair(tmp_path)
    code = main(["refine", "--graph", paths["g1"], "--graph2", paths["g2"],
                 "--m0", str(tmp_path / "missing.txt")])
    assert code == EXIT_INPUT


def test_refine_malformed_file(tmp_path):
    paths = write_pair(tmp_path)
    fname = str(tmp_path / "m0.txt")
    with open(fname, "w") as f:
        f.write("0 0\n1 one\n")
    code = main(["refine", "--graph", paths["g1"], "--graph2", paths["g2"],
                 "--m0", fname, "--out", str(tmp_path / "out")])
    assert code == EXIT_INPUT


def test_refine_out_of_range(tmp_path):
    paths = write_pair(tmp_path)
    fname = str(tmp_path / "m0.txt")
    with open(fname, "w") as f:
        f.write("0 0\n500 1\n")
    code = main(["refine", "--graph", paths["g1"], "--graph2", paths["g2"],
                 "--m0", fname, "--out", str(tmp_path / "out")])
    assert code == EXIT_DIMENSION


def test_refine_invalid_setting(tmp_path):
    paths = write_pair(tmp_path)
    code = main(["refine", "--graph", paths["g1"], "--graph2", paths["g2"],
                 "--m0", paths["truth"], "--alpha", "0",
                 "--out", str(tmp_path / "out")])
    assert code == EXIT_CONFIG


def test_metrics(tmp_path):
    paths = write_pair(tmp_path)
    fname = str(tmp_path / "metrics.json")
    code = main(["metrics", "--graph", paths["g1"], "--graph2", paths["g2"],
                 "--m0", paths["truth"], "--truth", paths["truth"],
                 "--out", fname])
    assert code == EXIT_OK
    with open(fname) as f:
        report = json.load(f)
    assert report["accuracy"] == 1.0
    assert report["n_ov"] > 90


def test_scale(tmp_path):
    fname = str(tmp_path / "scaling.csv")
    code = main(["scale", "--sizes", "50", "100", "200", "--iters", "1",
                 "--out", fname])
    assert code == EXIT_OK
    timings = pd.read_csv(fname)
    assert timings["n"].tolist() == [50, 50, 100, 100, 200, 200]


def test_scale_single_size(tmp_path):
    code = main(["scale", "--sizes", "100", "--out",
                 str(tmp_path / "scaling.csv")])
    assert code == EXIT_CONFIG


def test_log_file(tmp_path):
    paths = write_pair(tmp_path)
    fname = str(tmp_path / "refina.log")
    try:
        code = main(["--log-file", fname, "metrics", "--graph", paths["g1"],
                     "--graph2", paths["g2"], "--m0", paths["truth"]])
    finally:
        rf.remove_file_handlers()
    assert code == EXIT_OK
    assert os.path.exists(fname)
