"""The refine module contains the iterative refinement of alignment matrices
by amplifying matched neighborhood consistency.

Every iteration multiplies the alignment matrix elementwise with the number
of matched neighbors of every node pair, A1 M A2, adds a small token match
score epsilon and normalizes the matrix by row and then by column::

    M_k = normalize(M_{k-1} * (A1 M_{k-1} A2) + epsilon)

Counting matched neighbors without dividing by the neighborhood sizes favours
high degree nodes, the token score lets the refinement discover alignments
that are absent from the initial solution and the normalization keeps the
scores bounded.

The sparse variant only updates the alpha largest entries of A1 M A2 per row
and keeps every other stored score as it is, so it never materializes a dense
n1 x n2 matrix.

Examples
--------
>>> cfg = RefineConfig(iterations=100, epsilon="auto", mode="sparse")
>>> m, trace = refine(g1, g2, m0, cfg, truth=truth)
>>> trace.to_frame().tail()

"""

from concurrent.futures import ThreadPoolExecutor
from logging import getLogger
from time import perf_counter

import numpy as np
import scipy.sparse as sp
from pandas import DataFrame

from .alignment import AlignmentMatrix, _greedy_pi, _top_k_csr
from .consistency import _node_mnc
from .decorators import check_dimensions
from .exceptions import DimensionError, ParameterError
from .utils import atomic_write, get_workers

logger = getLogger(__name__)

__all__ = ["RefineConfig", "IterationTrace", "auto_epsilon",
           "mnc_update_dense", "normalize_single_pass", "normalize_sinkhorn",
           "refine_dense", "refine_sparse", "refine"]


class RefineConfig:
    """Settings of a refinement run.

    Parameters
    ----------
    iterations: int, optional
        Number of refinement iterations K, default 100.
    epsilon: float or "auto", optional
        Token match score. "auto" (default) uses auto_epsilon(max(n1, n2)).
    mode: str, optional
        "dense" (default) or "sparse".
    alpha: int, optional
        Number of scores updated per row in sparse mode, default 10.
    normalization: str, optional
        "single_pass" (default, one row and one column normalization) or
        "sinkhorn" (iterated until close to doubly stochastic).
    sinkhorn_max_iters: int, optional
        Maximum number of Sinkhorn passes, default 1000.
    sinkhorn_tolerance: float, optional
        Sinkhorn stops when all row and column sums are within this distance
        of their targets, default 1e-2.
    early_stop_fraction: float, optional
        Stop when at most this fraction of the rows changed their greedy
        alignment in an iteration. The default 0 disables early stopping.
    prune_threshold: float, optional
        Sparse mode only: stored scores below this value are dropped after
        normalization. The default 0 keeps every score.
    log_every: int, optional
        Record every j-th iteration in the trace, default 1. The last
        iteration is always recorded.
    trace_metrics: bool, optional
        Compute the average MNC and accuracy of recorded iterations (default
        True). Switch off for pure timing runs.
    workers: int, optional
        Number of threads for the row blocks of the sparse update. Defaults
        to the REFINA_WORKERS environment variable.
    chunk_rows: int, optional
        Number of rows per block of the sparse update, default 4096.

    """
    _name = "RefineConfig"
    modes = ("dense", "sparse")
    normalizations = ("single_pass", "sinkhorn")
    _aliases = {"single": "single_pass"}

    def __init__(self, iterations=100, epsilon="auto", mode="dense", alpha=10,
                 normalization="single_pass", sinkhorn_max_iters=1000,
                 sinkhorn_tolerance=1e-2, early_stop_fraction=0.0,
                 prune_threshold=0.0, log_every=1, trace_metrics=True,
                 workers=None, chunk_rows=4096):
        normalization = self._aliases.get(normalization, normalization)
        if mode not in self.modes:
            raise ParameterError("Mode {} not supported, choose from "
                                 "{}.".format(mode, self.modes))
        if normalization not in self.normalizations:
            raise ParameterError("Normalization {} not supported, choose "
                                 "from {}.".format(normalization,
                                                   self.normalizations))
        if int(iterations) != iterations or iterations < 0:
            raise ParameterError("iterations must be a nonnegative integer.")
        if epsilon != "auto":
            epsilon = float(epsilon)
            if not epsilon >= 0:
                raise ParameterError("epsilon must be >= 0 or 'auto'.")
        if int(alpha) != alpha or alpha < 1:
            raise ParameterError("alpha must be an integer >= 1.")
        if sinkhorn_max_iters < 1 or not sinkhorn_tolerance > 0:
            raise ParameterError("Sinkhorn needs max_iters >= 1 and a "
                                 "positive tolerance.")
        if not 0.0 <= early_stop_fraction <= 1.0:
            raise ParameterError("early_stop_fraction must lie in [0, 1].")
        if prune_threshold < 0:
            raise ParameterError("prune_threshold must be >= 0.")
        if log_every < 1 or chunk_rows < 1:
            raise ParameterError("log_every and chunk_rows must be >= 1.")

        self.iterations = int(iterations)
        self.epsilon = epsilon
        self.mode = mode
        self.alpha = int(alpha)
        self.normalization = normalization
        self.sinkhorn_max_iters = int(sinkhorn_max_iters)
        self.sinkhorn_tolerance = float(sinkhorn_tolerance)
        self.early_stop_fraction = float(early_stop_fraction)
        self.prune_threshold = float(prune_threshold)
        self.log_every = int(log_every)
        self.trace_metrics = bool(trace_metrics)
        self.workers = workers
        self.chunk_rows = int(chunk_rows)

    def __repr__(self):
        return ("{cls}(iterations={iterations}, epsilon={epsilon}, "
                "mode={mode}, alpha={alpha}, "
                "normalization={normalization})").format(
            cls=self.__class__.__name__, **self.to_dict())

    def __eq__(self, other):
        return (isinstance(other, RefineConfig) and
                self.to_dict() == other.to_dict())

    __hash__ = None

    def get_epsilon(self, n1, n2):
        """Token match score for graphs with n1 and n2 nodes."""
        if self.epsilon == "auto":
            return auto_epsilon(max(n1, n2))
        return self.epsilon

    def to_dict(self):
        return {
            "iterations": self.iterations,
            "epsilon": self.epsilon,
            "mode": self.mode,
            "alpha": self.alpha,
            "normalization": self.normalization,
            "sinkhorn_max_iters": self.sinkhorn_max_iters,
            "sinkhorn_tolerance": self.sinkhorn_tolerance,
            "early_stop_fraction": self.early_stop_fraction,
            "prune_threshold": self.prune_threshold,
            "log_every": self.log_every,
            "trace_metrics": self.trace_metrics,
            "workers": self.workers,
            "chunk_rows": self.chunk_rows,
        }

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        # "K" is accepted as the short name of the iterations
        if "K" in data:
            data["iterations"] = data.pop("K")
        unknown = set(data) - set(cls().to_dict())
        if unknown:
            raise ParameterError("Unknown refinement settings: {}.".format(
                ", ".join(sorted(unknown))))
        return cls(**data)

    def copy(self, **updates):
        data = self.to_dict()
        data.update(updates)
        return self.from_dict(data)


class IterationTrace:
    """Per-iteration record of a refinement run.

    Every record holds the iteration index, the average MNC and accuracy
    (None when not computed or no ground truth is known), the number of rows
    whose greedy alignment changed and the wall time of the update and
    normalization in milliseconds.

    """
    _name = "IterationTrace"
    columns = ["iter", "avg_mnc", "accuracy", "changed_rows", "wall_ms"]

    def __init__(self):
        self.records = []

    def __len__(self):
        return len(self.records)

    def __repr__(self):
        return "{}(records={})".format(self.__class__.__name__, len(self))

    def add(self, iteration, avg_mnc=None, accuracy=None, changed_rows=0,
            wall_ms=0.0):
        self.records.append((int(iteration), avg_mnc, accuracy,
                             int(changed_rows), float(wall_ms)))

    def to_frame(self):
        """pandas.DataFrame with one row per record."""
        frame = DataFrame(self.records, columns=self.columns)
        for col in ["avg_mnc", "accuracy"]:
            frame[col] = frame[col].astype(float)
        return frame

    @property
    def ms_per_iter(self):
        if not self.records:
            return np.nan
        return float(np.mean([r[4] for r in self.records]))

    def to_csv(self, fname):
        """Write the trace with header iter,avg_mnc,accuracy,changed_rows,
        wall_ms. Missing values are written as empty fields."""
        frame = self.to_frame()
        return atomic_write(fname, lambda f: frame.to_csv(f, index=False))


def auto_epsilon(n):
    """Default token match score for graphs with n nodes.

    Parameters
    ----------
    n: int
        max(n1, n2).

    Returns
    -------
    float
        10^-p with p the smallest natural number such that 10^p > n, so that
        the token scores of a node sum to less than one.

    """
    if n < 1:
        raise ParameterError("auto_epsilon needs n >= 1, got {}.".format(n))
    p = 0
    while 10 ** p <= n:
        p += 1
    return 10.0 ** -p


def _matched_counts(a1, x, a2):
    """Number of matched neighbors A1 X A2 for a dense X."""
    # a2 is symmetric: A1 X A2 = (A2 (A1 X)^T)^T
    return np.ascontiguousarray(np.asarray(a2 @ (a1 @ x).T).T)


@check_dimensions
def mnc_update_dense(g1, g2, m):
    """One multiplicative MNC update M' = M * (A1 M A2), elementwise.

    Parameters
    ----------
    g1, g2: refina.Graph
    m: refina.AlignmentMatrix

    Returns
    -------
    refina.AlignmentMatrix
        Dense matrix with nonnegative entries.

    """
    x = m.toarray()
    return AlignmentMatrix(x * _matched_counts(g1.adjacency, x,
                                               g2.adjacency))


def _safe(sums):
    return np.where(sums > 0, sums, 1.0)


def _scale_rows(values, factors):
    """Divide every row of a dense array or CSR matrix by a factor."""
    if sp.issparse(values):
        values = values.copy()
        values.data /= np.repeat(factors, np.diff(values.indptr))
        return values
    return values / factors[:, None]


def _scale_cols(values, factors):
    if sp.issparse(values):
        values = values.copy()
        values.data /= factors[values.indices]
        return values
    return values / factors[None, :]


def _row_sums(values):
    return np.asarray(values.sum(axis=1)).ravel()


def _col_sums(values):
    return np.asarray(values.sum(axis=0)).ravel()


def _single_pass(values):
    values = _scale_rows(values, _safe(_row_sums(values)))
    return _scale_cols(values, _safe(_col_sums(values)))


def _sinkhorn(values, max_iters=1000, tol=1e-2):
    """Alternate row and column normalization.

    Returns
    -------
    values: numpy.ndarray or scipy.sparse.csr_matrix
    niter: int
        Number of passes performed.

    """
    n1, n2 = values.shape
    col_target = n1 / n2
    rows = _row_sums(values) > 0
    cols = _col_sums(values) > 0
    if not rows.all() or not cols.all():
        logger.warning("Sinkhorn normalization of a matrix with %d all-zero "
                       "rows and %d all-zero columns; these are skipped.",
                       (~rows).sum(), (~cols).sum())
    niter = 0
    for niter in range(1, max_iters + 1):
        values = _scale_rows(values, _safe(_row_sums(values)))
        values = _scale_cols(values, _safe(_col_sums(values)) / col_target)
        row_dev = np.abs(_row_sums(values)[rows] - 1.0)
        col_dev = np.abs(_col_sums(values)[cols] - col_target)
        dev = max(row_dev.max(initial=0.0), col_dev.max(initial=0.0))
        if dev < tol:
            break
    else:
        logger.debug("Sinkhorn stopped after %d passes at deviation %.3g.",
                     max_iters, dev)
    return values, niter


def normalize_single_pass(m):
    """Divide every row by its sum, then every column by its sum.

    Rows and columns that sum to zero are left unchanged. A sparse matrix is
    normalized over its stored entries.

    Parameters
    ----------
    m: refina.AlignmentMatrix

    Returns
    -------
    refina.AlignmentMatrix

    Examples
    --------
    >>> normalize_single_pass(AlignmentMatrix([[2, 0], [1, 1]])).values
    array([[0.66666667, 0.        ],
           [0.33333333, 1.        ]])

    """
    return AlignmentMatrix(_single_pass(m.values))


def normalize_sinkhorn(m, max_iters=1000, tol=1e-2):
    """Sinkhorn normalization: alternate row and column normalization until
    every row sum is within tol of 1 and every column sum within tol of
    n1 / n2, or until max_iters passes.

    Parameters
    ----------
    m: refina.AlignmentMatrix
    max_iters: int, optional
    tol: float, optional

    Returns
    -------
    refina.AlignmentMatrix

    Notes
    -----
    All-zero rows and columns cannot be normalized; a warning is logged and
    they are left out of the convergence check.

    """
    values, niter = _sinkhorn(m.values, max_iters, tol)
    logger.debug("Sinkhorn converged in %d passes.", niter)
    return AlignmentMatrix(values)


def _normalize(values, cfg):
    if cfg.normalization == "sinkhorn":
        return _sinkhorn(values, cfg.sinkhorn_max_iters,
                         cfg.sinkhorn_tolerance)[0]
    return _single_pass(values)


def _top_alpha_update(a1, x, a2, alpha, workers=1, chunk_rows=4096):
    """Sparse update U = top-alpha(A1 X A2), computed in row blocks.

    Returns U and the indicator of its support. Below alpha = n2 only
    positive counts are selected, so a row without any matched neighbor has
    an empty support. With alpha >= n2 every pair is selected, zero counts
    included, and the step equals the dense update.

    """
    n1, n2 = a1.shape[0], a2.shape[0]
    starts = list(range(0, n1, chunk_rows)) or [0]

    def block(start):
        counts = (a1[start:start + chunk_rows] @ x @ a2).tocsr()
        if alpha >= n2:
            return counts, sp.csr_matrix(np.ones(counts.shape))
        top = _top_k_csr(counts, alpha)
        selected = top.copy()
        selected.data[:] = 1.0
        return top, selected

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(block, starts))
    else:
        blocks = [block(start) for start in starts]
    u = sp.vstack([b[0] for b in blocks], format="csr")
    selected = sp.vstack([b[1] for b in blocks], format="csr")
    return u, selected


def _sparse_step(x, u, selected, eps):
    """Replace the scores on the selected pairs by M * U + eps; every other
    stored score is carried over unchanged."""
    updated = sp.csr_matrix(x.multiply(u))
    carry = sp.csr_matrix(x - x.multiply(selected))
    carry.eliminate_zeros()
    new = carry + updated
    if eps:
        new = new + eps * selected
    new = sp.csr_matrix(new)
    new.eliminate_zeros()
    new.sort_indices()
    return new


class _Recorder:
    """Internal helper collecting the per-iteration trace of a run."""

    def __init__(self, g1, g2, cfg, truth, pi0):
        self.g1 = g1
        self.g2 = g2
        self.cfg = cfg
        self.truth = None if truth is None else truth.map
        self.prev = pi0
        self.trace = IterationTrace()

    def __call__(self, k, values, wall_ms, last=False):
        """Record iteration k; returns True when the run should stop."""
        pi, _ = _greedy_pi(values)
        changed = int(np.count_nonzero(pi != self.prev))
        self.prev = pi
        n1 = pi.size
        stop = (self.cfg.early_stop_fraction > 0 and
                changed <= self.cfg.early_stop_fraction * n1)
        if k % self.cfg.log_every == 0 or last or stop:
            avg_mnc = accuracy = None
            if self.cfg.trace_metrics:
                avg_mnc = float(_node_mnc(self.g1, self.g2, pi).mean())
                if self.truth is not None:
                    accuracy = float(np.mean(pi == self.truth))
            self.trace.add(k, avg_mnc, accuracy, changed, wall_ms)
            logger.debug("Iteration %d: avg_mnc=%s accuracy=%s changed=%d "
                         "(%.1f ms)", k, avg_mnc, accuracy, changed, wall_ms)
        if stop:
            logger.info("Early stop after iteration %d: %d of %d rows "
                        "changed.", k, changed, n1)
        return stop


def _check_truth(truth, n1):
    if truth is not None and len(truth) != n1:
        raise DimensionError("Ground truth of length {} does not match {} "
                             "nodes.".format(len(truth), n1))


@check_dimensions
def refine_dense(g1, g2, m0, cfg=None, truth=None, callback=None):
    """Dense refinement of an alignment matrix.

    Parameters
    ----------
    g1, g2: refina.Graph
    m0: refina.AlignmentMatrix
        Initial alignment matrix, dense or sparse.
    cfg: refina.RefineConfig, optional
        Settings; the default is RefineConfig(mode="dense").
    truth: refina.Permutation, optional
        Ground truth, used for the per-iteration accuracy in the trace.
    callback: callable, optional
        Function called as callback(k, m) after every iteration k.

    Returns
    -------
    m: refina.AlignmentMatrix
        Dense refined matrix; m0 itself when cfg.iterations is 0.
    trace: refina.IterationTrace

    """
    cfg = RefineConfig(mode="dense") if cfg is None else cfg
    if cfg.mode != "dense":
        raise ParameterError("refine_dense needs a config with "
                             "mode='dense'.")
    _check_truth(truth, g1.n)
    if cfg.iterations == 0:
        return m0, IterationTrace()

    eps = cfg.get_epsilon(m0.n1, m0.n2)
    a1, a2 = g1.adjacency, g2.adjacency
    x = m0.toarray()
    record = _Recorder(g1, g2, cfg, truth, _greedy_pi(x)[0])
    start = perf_counter()
    for k in range(1, cfg.iterations + 1):
        tic = perf_counter()
        x = x * _matched_counts(a1, x, a2)
        if eps:
            x += eps
        x = _normalize(x, cfg)
        wall_ms = 1000.0 * (perf_counter() - tic)
        if callback is not None:
            callback(k, AlignmentMatrix(x))
        if record(k, x, wall_ms, last=k == cfg.iterations):
            break

    logger.info("Dense refinement: %d iterations in %.2f s (epsilon=%g).",
                k, perf_counter() - start, eps)
    return AlignmentMatrix(x), record.trace


@check_dimensions
def refine_sparse(g1, g2, m0, cfg=None, truth=None, callback=None):
    """Sparse refinement of an alignment matrix.

    Every iteration computes U = top-alpha(A1 M A2), the alpha largest
    matched neighbor counts of every row (ties by the lowest column). On the
    support of U the scores become M * U + epsilon, so pairs that are newly
    selected receive exactly epsilon. Scores outside the support of U are
    carried over unchanged. The matrix is then normalized over its stored
    entries.

    Below alpha = n2 only positive counts are selected, so a row without any
    matched neighbor keeps its scores, where the dense update sets them all
    to epsilon. With alpha >= n2 every pair is selected, zero counts
    included, and the iterations equal those of refine_dense.

    Parameters
    ----------
    g1, g2: refina.Graph
    m0: refina.AlignmentMatrix
        Initial alignment matrix; a dense matrix is converted to sparse.
    cfg: refina.RefineConfig, optional
        Settings; the default is RefineConfig(mode="sparse").
    truth: refina.Permutation, optional
    callback: callable, optional
        Function called as callback(k, m) after every iteration k.

    Returns
    -------
    m: refina.AlignmentMatrix
        Sparse refined matrix; m0 itself when cfg.iterations is 0.
    trace: refina.IterationTrace

    Notes
    -----
    After k iterations M holds at most nnz(M0) + k * n1 * alpha entries. No
    dense n1 x n2 array is created.

    """
    cfg = RefineConfig(mode="sparse") if cfg is None else cfg
    if cfg.mode != "sparse":
        raise ParameterError("refine_sparse needs a config with "
                             "mode='sparse'.")
    _check_truth(truth, g1.n)
    if cfg.iterations == 0:
        return m0, IterationTrace()

    eps = cfg.get_epsilon(m0.n1, m0.n2)
    workers = get_workers(cfg.workers)
    a1, a2 = g1.adjacency, g2.adjacency
    x = m0.tocsr()
    record = _Recorder(g1, g2, cfg, truth, _greedy_pi(x)[0])
    start = perf_counter()
    for k in range(1, cfg.iterations + 1):
        tic = perf_counter()
        u, selected = _top_alpha_update(a1, x, a2, cfg.alpha, workers,
                                        cfg.chunk_rows)
        x = _normalize(_sparse_step(x, u, selected, eps), cfg)
        if cfg.prune_threshold > 0:
            x.data[x.data < cfg.prune_threshold] = 0.0
            x.eliminate_zeros()
        wall_ms = 1000.0 * (perf_counter() - tic)
        if callback is not None:
            callback(k, AlignmentMatrix(x))
        if record(k, x, wall_ms, last=k == cfg.iterations):
            break

    logger.info("Sparse refinement: %d iterations in %.2f s (epsilon=%g, "
                "alpha=%d, nnz=%d).", k, perf_counter() - start, eps,
                cfg.alpha, x.nnz)
    return AlignmentMatrix(x), record.trace


def refine(g1, g2, m0, cfg=None, truth=None, callback=None):
    """Refine an alignment matrix with the dense or sparse variant, as set by
    cfg.mode.

    See Also
    --------
    refina.refine.refine_dense
    refina.refine.refine_sparse

    """
    cfg = RefineConfig() if cfg is None else cfg
    if cfg.mode == "sparse":
        return refine_sparse(g1, g2, m0, cfg, truth=truth, callback=callback)
    return refine_dense(g1, g2, m0, cfg, truth=truth, callback=callback)
