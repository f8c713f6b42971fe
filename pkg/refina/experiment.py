"""This module contains the experiment harness: the synthetic benchmark with
parameter sweeps, the refinement of external alignments and the scaling
probe.

A benchmark aligns a graph to permuted noisy copies of itself. Every cell of
the sweep is one combination of a noise level, a trial seed and a refinement
variant. The trial seed is split into independent streams for the
permutation, the noise mask and the initial alignment, so all three are
drawn anew for every seed.

Usage
-----

>>> cfg = ExperimentConfig.from_file("bench.json", output="results")
>>> results, summary = run_benchmark(cfg)

"""

import os
from concurrent.futures import ProcessPoolExecutor
from itertools import product
from logging import getLogger
from time import perf_counter

import numpy as np
from pandas import DataFrame

from .alignment import load_alignment, write_alignment
from .consistency import average_mnc
from .exceptions import DimensionError, ParameterError
from .graph import (NoiseSpec, Permutation, load_edge_list, noisy_copy,
                    random_graph)
from .initializers import InitSpec, corrupted_truth, make_initial
from .io.base import load
from .metrics import accuracy, evaluate
from .refine import RefineConfig, refine
from .utils import atomic_write, get_workers, validate_name
from .version import __version__

logger = getLogger(__name__)

SWEEP_AXES = ("epsilon", "alpha", "iterations", "mode", "normalization")


def _write_frame(fname, frame):
    return atomic_write(fname, lambda f: frame.to_csv(f, index=False))


class ExperimentConfig:
    """Declarative description of a benchmark.

    Parameters
    ----------
    graph: dict
        Either {"path": edge list file} or {"n": int, "avg_degree": float,
        "seed": int} for a random graph.
    noise: dict
        {"kind": "remove_edges" or "add_edges", "levels": [p, ...]}.
    init: dict, optional
        Settings of the initial alignment, see refina.InitSpec.
    refine: dict, optional
        Base refinement settings, see refina.RefineConfig.
    sweep: dict, optional
        Lists of values for the axes epsilon, alpha, iterations, mode and
        normalization. Every combination is one refinement variant. A "p"
        axis replaces the noise levels.
    seeds: list of int, optional
        Trial seeds, default [0].
    output: str, optional
        Output directory, default "results".
    topk: list of int, optional
        Values of k for the top-k accuracy, default [1, 5, 10].
    log_every: int, optional
        Record every j-th iteration in the traces.
    workers: int, optional
        Number of parallel cells; defaults to REFINA_WORKERS.

    """
    _name = "ExperimentConfig"
    keys = ("graph", "noise", "init", "refine", "sweep", "seeds", "output",
            "topk", "log_every", "workers")

    def __init__(self, graph, noise, init=None, refine=None, sweep=None,
                 seeds=(0,), output="results", topk=(1, 5, 10),
                 log_every=None, workers=None):
        if not isinstance(graph, dict) or not (
                "path" in graph or {"n", "avg_degree"} <= set(graph)):
            raise ParameterError("The graph is given by a 'path' or by 'n' "
                                 "and 'avg_degree'.")
        if set(graph) - {"path", "n", "avg_degree", "seed"}:
            raise ParameterError("Unknown graph settings: {}.".format(
                ", ".join(sorted(set(graph) - {"path", "n", "avg_degree",
                                               "seed"}))))
        noise = dict(noise)
        if set(noise) - {"kind", "levels"}:
            raise ParameterError("Noise settings are 'kind' and 'levels'.")
        sweep = dict(sweep or {})
        if "p" in sweep:
            noise["levels"] = sweep.pop("p")
        levels = list(noise.get("levels", []))
        if not levels:
            raise ParameterError("The list of noise levels is empty.")
        kind = noise.get("kind", "remove_edges")
        for p in levels:
            NoiseSpec(kind, p)

        unknown = set(sweep) - set(SWEEP_AXES)
        if unknown:
            raise ParameterError("Unknown sweep axes {}, choose from "
                                 "{}.".format(sorted(unknown), SWEEP_AXES))
        for axis, values in sweep.items():
            if not isinstance(values, (list, tuple)) or not values:
                raise ParameterError("Sweep axis {} needs at least one "
                                     "value.".format(axis))
        seeds = [int(s) for s in seeds]
        if not seeds:
            raise ParameterError("The list of seeds is empty.")

        self.graph = dict(graph)
        self.noise = {"kind": kind, "levels": [float(p) for p in levels]}
        self.init = InitSpec.from_dict(init or {})
        self.refine = RefineConfig.from_dict(refine or {})
        if log_every is not None:
            self.refine = self.refine.copy(log_every=log_every)
        self.sweep = {axis: list(values) for axis, values in sweep.items()}
        self.seeds = seeds
        self.output = output
        self.topk = [int(k) for k in (topk or [])]
        self.workers = workers

        # every variant is validated here, not halfway through a sweep
        self.variants()

    def __repr__(self):
        return "{}(levels={}, seeds={}, variants={})".format(
            self.__class__.__name__, self.noise["levels"], self.seeds,
            len(self.variants()))

    @classmethod
    def from_dict(cls, data, **overrides):
        """Create a config from a dictionary; keyword arguments that are not
        None override the values in data."""
        data = dict(data)
        unknown = set(data) - set(cls.keys)
        if unknown:
            raise ParameterError("Unknown configuration keys: {}.".format(
                ", ".join(sorted(unknown))))
        for key, value in overrides.items():
            if value is None:
                continue
            if key in ("refine", "init", "noise"):
                # nested settings are merged, not replaced
                value = dict(data.get(key) or {}, **value)
            data[key] = value
        for key in ("graph", "noise"):
            if key not in data:
                raise ParameterError("The configuration needs a '{}' "
                                     "entry.".format(key))
        return cls(**data)

    @classmethod
    def from_file(cls, fname, **overrides):
        """Load a config from a json file, see from_dict for overrides."""
        data = load(fname)
        if not isinstance(data, dict):
            raise ParameterError("{} does not hold a configuration "
                                 "object.".format(fname))
        return cls.from_dict(data, **overrides)

    def to_dict(self):
        data = {
            "graph": self.graph,
            "noise": self.noise,
            "init": self.init.to_dict(),
            "refine": self.refine.to_dict(),
            "sweep": self.sweep,
            "seeds": self.seeds,
            "output": self.output,
            "topk": self.topk,
        }
        if self.workers is not None:
            data["workers"] = self.workers
        return data

    def variants(self):
        """List of (name, RefineConfig) for every sweep combination."""
        if not self.sweep:
            return [("base", self.refine)]
        axes = list(self.sweep)
        variants = []
        for values in product(*(self.sweep[axis] for axis in axes)):
            updates = dict(zip(axes, values))
            name = ",".join("{}={}".format(axis, value)
                            for axis, value in updates.items())
            variants.append((name, self.refine.copy(**updates)))
        return variants

    def build_graph(self):
        if "path" in self.graph:
            return load_edge_list(self.graph["path"])
        return random_graph(int(self.graph["n"]),
                            float(self.graph["avg_degree"]),
                            seed=self.graph.get("seed", 0))


def _trial(g1, kind, p, seed, init):
    """Noisy copy, ground truth and initial alignment of one trial."""
    perm_ss, noise_ss, init_ss = np.random.SeedSequence(seed).spawn(3)
    g2, truth = noisy_copy(g1, NoiseSpec(kind, p, seed=noise_ss),
                           seed=perm_ss)
    m0 = make_initial(init, g1, g2, truth, seed=init_ss)
    return g2, truth, m0


def _run_cell(g1, kind, p, seed, name, cfg, init, topk, folder):
    """Run one benchmark cell and write its trace and metrics."""
    g2, truth, m0 = _trial(g1, kind, p, seed, init)
    row = {"p": p, "seed": seed, "variant": name,
           "initial_accuracy": accuracy(m0, truth),
           "initial_mnc": average_mnc(g1, g2, m0)}

    m, trace = refine(g1, g2, m0, cfg, truth=truth)
    report = evaluate(g1, g2, m, truth=truth, topk=topk)

    os.makedirs(folder, exist_ok=True)
    trace.to_csv(os.path.join(folder, "trace.csv"))
    report.to_json(os.path.join(folder, "metrics.json"))

    row.update(accuracy=report.accuracy, avg_mnc=report.avg_mnc,
               n_ov=report.n_ov, lccc_edges=report.lccc_edges)
    for k, value in (report.topk or {}).items():
        row["top{}_accuracy".format(k)] = value
    row["iterations_run"] = int(trace.records[-1][0]) if len(trace) else 0
    row["ms_per_iter"] = trace.ms_per_iter
    logger.info("Cell p=%s seed=%d %s: accuracy %.3f -> %.3f.", p, seed,
                name, row["initial_accuracy"], row["accuracy"])
    return row


def _cell_folder(output, p, seed, name):
    return os.path.join(output, "p={}".format(p), "seed={}".format(seed),
                        validate_name(name))


def summarize(results):
    """Mean and standard deviation across seeds of every cell.

    Parameters
    ----------
    results: pandas.DataFrame
        One row per (p, seed, variant), as written to results.csv.

    Returns
    -------
    pandas.DataFrame
        One row per (p, variant) with columns <metric>_mean and
        <metric>_std and the number of seeds.

    """
    metrics = [col for col in results.columns
               if col not in ("p", "seed", "variant", "ms_per_iter",
                              "iterations_run")]
    grouped = results.groupby(["p", "variant"], sort=False)
    summary = grouped[metrics].agg(["mean", "std"])
    summary.columns = ["{}_{}".format(col, stat)
                       for col, stat in summary.columns]
    summary["n_seeds"] = grouped.size()
    return summary.reset_index()


def run_benchmark(cfg, workers=None):
    """Run the synthetic benchmark of an experiment configuration.

    Parameters
    ----------
    cfg: refina.ExperimentConfig
    workers: int, optional
        Number of cells run in parallel processes. Defaults to cfg.workers
        or the REFINA_WORKERS environment variable.

    Returns
    -------
    results: pandas.DataFrame
        One row per cell, also written to <output>/results.csv.
    summary: pandas.DataFrame
        Mean and standard deviation over the seeds, also written to
        <output>/summary.csv.

    Notes
    -----
    Every cell writes trace.csv and metrics.json to
    <output>/p=<p>/seed=<seed>/<variant>/. All files are written atomically
    and, apart from the timing columns, are reproducible from the
    configuration.

    """
    workers = get_workers(cfg.workers if workers is None else workers)
    g1 = cfg.build_graph()
    kind = cfg.noise["kind"]
    cells = [(p, seed, name, rcfg)
             for p in cfg.noise["levels"]
             for seed in cfg.seeds
             for name, rcfg in cfg.variants()]
    logger.info("Benchmark on %s: %d cells with %d worker(s).", g1,
                len(cells), workers)

    args = [(g1, kind, p, seed, name, rcfg, cfg.init, cfg.topk,
             _cell_folder(cfg.output, p, seed, name))
            for p, seed, name, rcfg in cells]
    tic = perf_counter()
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_cell, *zip(*args)))
    else:
        rows = [_run_cell(*a) for a in args]

    results = DataFrame(rows)
    summary = summarize(results)
    os.makedirs(cfg.output, exist_ok=True)
    _write_frame(os.path.join(cfg.output, "results.csv"), results)
    _write_frame(os.path.join(cfg.output, "summary.csv"), summary)
    logger.info("Benchmark finished in %.1f s, results in %s (refina %s).",
                perf_counter() - tic, cfg.output, __version__)
    return results, summary


def _load_pair(g1_path, g2_path, m_path, truth_path=None):
    g1 = load_edge_list(g1_path)
    g2 = load_edge_list(g2_path)
    m = load_alignment(m_path, g1.n, g2.n)
    truth = None
    if truth_path is not None:
        truth = Permutation.from_file(truth_path)
        if len(truth) != g1.n:
            raise DimensionError("Ground truth {} has {} nodes, the first "
                                 "graph {}.".format(truth_path, len(truth),
                                                    g1.n))
        if g2.n != g1.n:
            raise DimensionError("A ground truth permutation needs graphs of "
                                 "equal size, got {} and {}.".format(g1.n,
                                                                     g2.n))
    return g1, g2, m, truth


def run_external(g1_path, g2_path, m0_path, cfg=None, truth_path=None,
                 output="refined", topk=None, top=None):
    """Refine the output of an external alignment method.

    Parameters
    ----------
    g1_path, g2_path: str
        Edge lists of the two graphs.
    m0_path: str
        Initial alignment file with "i j" or "i j v" lines.
    cfg: refina.RefineConfig, optional
    truth_path: str, optional
        Ground truth permutation file. Without it the report holds no
        accuracies.
    output: str, optional
        Output directory for alignment.txt, trace.csv and metrics.json.
    topk: list of int, optional
    top: int, optional
        Only write the top entries of every row of the refined alignment.

    Returns
    -------
    refina.MetricsReport

    """
    cfg = RefineConfig() if cfg is None else cfg
    g1, g2, m0, truth = _load_pair(g1_path, g2_path, m0_path, truth_path)
    logger.info("Refining %s for %s and %s.", m0, g1, g2)
    m, trace = refine(g1, g2, m0, cfg, truth=truth)
    report = evaluate(g1, g2, m, truth=truth, topk=topk)

    os.makedirs(output, exist_ok=True)
    write_alignment(os.path.join(output, "alignment.txt"), m, top=top)
    trace.to_csv(os.path.join(output, "trace.csv"))
    report.to_json(os.path.join(output, "metrics.json"))
    return report


def evaluate_file(g1_path, g2_path, m_path, truth_path=None, topk=None,
                  output=None):
    """Metrics of an alignment file, optionally written to a json file."""
    g1, g2, m, truth = _load_pair(g1_path, g2_path, m_path, truth_path)
    report = evaluate(g1, g2, m, truth=truth, topk=topk)
    if output is not None:
        report.to_json(output)
    return report


def scaling_probe(sizes, cfg=None, avg_degree=10, output=None, seed=0,
                  modes=("dense", "sparse")):
    """Time per refinement iteration as a function of the graph size.

    Parameters
    ----------
    sizes: list of int
        At least three strictly ascending graph sizes.
    cfg: refina.RefineConfig, optional
        Base settings; the number of iterations defaults to 3 here. Mode,
        early stopping and trace metrics are set by the probe.
    avg_degree: float, optional
        Average degree of the random graphs.
    output: str, optional
        CSV file for the timings.
    seed: int, optional
    modes: tuple of str, optional

    Returns
    -------
    pandas.DataFrame
        Columns n, mode and ms_per_iter.

    """
    sizes = [int(n) for n in sizes]
    if len(sizes) < 3:
        raise ParameterError("A scaling probe needs at least 3 sizes, got "
                             "{}.".format(len(sizes)))
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ParameterError("Sizes must be strictly ascending.")
    cfg = RefineConfig(iterations=3) if cfg is None else cfg

    rows = []
    for n in sizes:
        perm_ss, init_ss = np.random.SeedSequence([seed, n]).spawn(2)
        g1 = random_graph(n, avg_degree, seed=seed)
        g2, truth = noisy_copy(g1, NoiseSpec(p=0.0), seed=perm_ss)
        m0 = corrupted_truth(truth, 0.3, seed=init_ss)
        for mode in modes:
            rcfg = cfg.copy(mode=mode, trace_metrics=False,
                            early_stop_fraction=0.0)
            _, trace = refine(g1, g2, m0, rcfg)
            rows.append({"n": n, "mode": mode,
                         "ms_per_iter": trace.ms_per_iter})
            logger.info("n=%d %s: %.2f ms per iteration.", n, mode,
                        trace.ms_per_iter)

    timings = DataFrame(rows, columns=["n", "mode", "ms_per_iter"])
    if output is not None:
        _write_frame(output, timings)
    return timings
