"""Quality metrics of an alignment.

With a ground truth the accuracy and top-k accuracy are available. Without a
ground truth the quality is judged from the conserved network, the edges of
the first graph that the alignment maps onto edges of the second graph:

- N-OV: conserved edges as a percentage of the edges of the larger graph;
- LCCC: number of edges in the largest connected component of the conserved
  network.

Real-valued alignment matrices are binarized with the greedy alignment first.

"""

from logging import getLogger

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .alignment import AlignmentMatrix, _top_k_csr, binarize, greedy_map
from .consistency import average_mnc
from .decorators import check_dimensions, check_truth
from .exceptions import ParameterError, UndefinedMetricError
from .graph import Graph
from .io.base import dump

logger = getLogger(__name__)


class MetricsReport:
    """Collection of the quality metrics of one alignment.

    Parameters
    ----------
    accuracy: float, optional
        Fraction of correctly aligned nodes, absent without a ground truth.
    topk: dict, optional
        Top-k accuracy per k, absent without a ground truth.
    avg_mnc: float, optional
    n_ov: float, optional
        Normalized overlap, a percentage in [0, 100].
    lccc_edges: int, optional

    """
    _name = "MetricsReport"
    fields = ("accuracy", "topk", "avg_mnc", "n_ov", "lccc_edges")

    def __init__(self, accuracy=None, topk=None, avg_mnc=None, n_ov=None,
                 lccc_edges=None):
        self.accuracy = accuracy
        self.topk = topk
        self.avg_mnc = avg_mnc
        self.n_ov = n_ov
        self.lccc_edges = lccc_edges

    def __repr__(self):
        values = ", ".join("{}={}".format(key, value)
                           for key, value in self.to_dict().items())
        return "{}({})".format(self.__class__.__name__, values)

    def to_dict(self):
        """Dictionary with the metrics that are present.

        The top-k accuracies are keyed by str(k), as they are in JSON.

        """
        data = {}
        for key in self.fields:
            value = getattr(self, key)
            if value is None:
                continue
            if key == "topk":
                value = {str(k): v for k, v in value.items()}
            data[key] = value
        return data

    def to_json(self, fname):
        """Write the report to a json file."""
        if not fname.endswith(".json"):
            raise ParameterError("A metrics report is written to a .json "
                                 "file.")
        return dump(fname, self.to_dict())


@check_truth
def accuracy(m, truth):
    """Fraction of the rows whose greedy alignment equals the ground truth.

    Parameters
    ----------
    m: refina.AlignmentMatrix
    truth: refina.Permutation

    Returns
    -------
    float

    """
    return float(np.mean(greedy_map(m).pi == truth.map))


@check_truth
def topk_accuracy(m, truth, k):
    """Fraction of the rows with the true column among the top k columns.

    Parameters
    ----------
    m: refina.AlignmentMatrix
    truth: refina.Permutation
    k: int

    Returns
    -------
    float

    Notes
    -----
    The columns are ranked as in refina.alignment.top_k_columns. A sparse
    row without stored entries has column 0 as its only candidate, as in
    greedy_map, so topk_accuracy(m, truth, 1) always equals accuracy.

    """
    if k < 1:
        raise ParameterError("k must be at least 1, got {}.".format(k))
    t = truth.map
    rows = np.arange(m.n1)
    if not m.is_sparse:
        x = m.values
        v = x[rows, t]
        greater = np.count_nonzero(x > v[:, None], axis=1)
        ties = np.count_nonzero((x == v[:, None]) &
                                (np.arange(m.n2)[None, :] < t[:, None]),
                                axis=1)
        return float(np.mean(greater + ties < k))

    values = m.values
    top = _top_k_csr(values, k)
    target = AlignmentMatrix.from_mapping(t, m.n2).values
    hit = np.asarray(top.multiply(target).sum(axis=1)).ravel() > 0
    empty = np.diff(values.indptr) == 0
    hit[empty] = t[empty] == 0
    return float(np.mean(hit))


@check_dimensions
def conserved_network(g1, g2, m):
    """Conserved network: the edges of g1 mapped onto edges of g2.

    Parameters
    ----------
    g1, g2: refina.Graph
    m: refina.AlignmentMatrix
        Binarized with the greedy alignment.

    Returns
    -------
    refina.Graph
        Graph on the nodes of g2 with the edges (pi(u), pi(v)) for every edge
        (u, v) of g1 that is also an edge of g2. Edges mapped onto a single
        node are dropped.

    """
    b = binarize(m).values
    mapped = (b.T @ g1.adjacency @ b).tocsr()
    conserved = sp.csr_matrix(mapped.multiply(g2.adjacency))
    return Graph(conserved)


@check_dimensions
def normalized_overlap(g1, g2, m):
    """Percentage of conserved edges (N-OV).

    Returns
    -------
    float
        100 * nnz(conserved) / max(nnz(A1), nnz(A2)), in [0, 100].

    """
    denominator = max(g1.adjacency.nnz, g2.adjacency.nnz)
    if denominator == 0:
        raise UndefinedMetricError("The normalized overlap of two graphs "
                                   "without edges is undefined.")
    return _overlap(conserved_network(g1, g2, m), denominator)


def _overlap(conserved, denominator):
    return 100.0 * conserved.adjacency.nnz / denominator


def _largest_component_edges(g):
    """Edge count of the component with most edges; ties by the number of
    nodes, then by the lowest node id."""
    if g.m == 0:
        return 0
    ncomp, labels = connected_components(g.adjacency, directed=False)
    edges = np.bincount(labels, weights=g.degrees, minlength=ncomp) / 2
    nodes = np.bincount(labels, minlength=ncomp)
    first = np.full(ncomp, g.n)
    np.minimum.at(first, labels, np.arange(g.n))
    best = np.lexsort((first, -nodes, -edges))[0]
    return int(edges[best])


@check_dimensions
def lccc(g1, g2, m):
    """Number of edges of the largest connected conserved component (LCCC).

    Returns
    -------
    int
        0 when no edge is conserved.

    """
    return _largest_component_edges(conserved_network(g1, g2, m))


@check_dimensions
def evaluate(g1, g2, m, truth=None, topk=None):
    """Compute all metrics of an alignment.

    Parameters
    ----------
    g1, g2: refina.Graph
    m: refina.AlignmentMatrix
    truth: refina.Permutation, optional
        Without a ground truth the report holds no accuracies.
    topk: list of int, optional
        Values of k for the top-k accuracy.

    Returns
    -------
    refina.MetricsReport

    """
    nzero = int(greedy_map(m).zero_rows.sum())
    if nzero:
        logger.warning("%d of %d rows of the alignment have no positive "
                       "score and are aligned to node 0.", nzero, m.n1)

    report = MetricsReport(avg_mnc=average_mnc(g1, g2, m))
    conserved = conserved_network(g1, g2, m)
    report.lccc_edges = _largest_component_edges(conserved)
    denominator = max(g1.adjacency.nnz, g2.adjacency.nnz)
    if denominator:
        report.n_ov = _overlap(conserved, denominator)
    else:
        logger.warning("Both graphs have no edges; N-OV is left out of the "
                       "report.")

    if truth is not None:
        report.accuracy = accuracy(m, truth)
        if topk:
            report.topk = {int(k): topk_accuracy(m, truth, k) for k in topk}
    return report
