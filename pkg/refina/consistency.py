"""Matched neighborhood consistency (MNC) of an alignment.

The MNC of a node pair (i, j) is the Jaccard similarity of the mapped
neighborhood of i, i.e. the set {pi(k) : k neighbor of i} in the second
graph, and the neighborhood of j. Duplicate images collapse, the mapped
neighborhood is a set.

Examples
--------
>>> average_mnc(g1, g2, m)
0.93

"""

from logging import getLogger

import numpy as np
from pandas import DataFrame

from .alignment import AlignmentMatrix, greedy_map
from .decorators import check_dimensions
from .exceptions import DimensionError, PreconditionError, \
    UndefinedMetricError

logger = getLogger(__name__)


class MncScore(float):
    """MNC value of a single node pair, a float in [0, 1]."""

    def __new__(cls, value):
        value = float(value)
        if not 0.0 <= value <= 1.0:
            raise ValueError("MNC must lie in [0, 1], got {}.".format(value))
        return super().__new__(cls, value)

    @property
    def value(self):
        return float(self)


def mnc_pair(g1, g2, mapping, i, j):
    """MNC of node i of g1 and node j of g2 under a hard alignment.

    Parameters
    ----------
    g1, g2: refina.Graph
    mapping: refina.Mapping
        Hard alignment of the nodes of g1 onto g2.
    i: int
        Node of g1.
    j: int
        Node of g2.

    Returns
    -------
    refina.MncScore
        1 when both neighborhoods are empty, 0 when exactly one is.

    """
    if len(mapping) != g1.n:
        raise DimensionError("Mapping of length {} does not match a graph "
                             "with {} nodes.".format(len(mapping), g1.n))
    mapped = set(mapping.pi[g1.neighbors(i)].tolist())
    nb = set(g2.neighbors(j).tolist())
    union = mapped | nb
    if not union:
        return MncScore(1.0)
    return MncScore(len(mapped & nb) / len(union))


def _mapped_neighborhoods(g1, b):
    """Indicator matrix of the mapped neighborhoods: row i holds a one at
    every node of the second graph a neighbor of i is aligned to."""
    image = (g1.adjacency @ b).tocsr()
    image.eliminate_zeros()
    image.data[:] = 1.0
    return image


@check_dimensions
def mnc_matrix(g1, g2, m):
    """MNC of every node pair for a binary alignment matrix.

    Parameters
    ----------
    g1, g2: refina.Graph
    m: refina.AlignmentMatrix
        Binary alignment matrix.

    Returns
    -------
    refina.AlignmentMatrix
        Dense matrix S with
        S = A1 M A2 / (A1 M 1 1^T + 1 1^T A2 - A1 M A2) elementwise,
        and S[i, j] = 1 where the denominator is zero.

    Notes
    -----
    The count A1 M is reduced to an indicator before the multiplication with
    A2, so neighbors of i that are aligned to the same node count once. For a
    one-to-one M this is the plain matrix formula; for any one-hot M every
    entry equals mnc_pair for the mapping that M encodes.

    """
    if not m.is_binary():
        raise PreconditionError("mnc_matrix needs a binary alignment matrix, "
                                "binarize real-valued matrices first.")
    image = _mapped_neighborhoods(g1, m.tocsr())
    inter = np.asarray((image @ g2.adjacency).todense())
    size1 = np.diff(image.indptr).astype(np.float64)
    union = size1[:, None] + g2.degrees[None, :] - inter
    s = np.ones(inter.shape, dtype=np.float64)
    np.divide(inter, union, out=s, where=union > 0)
    return AlignmentMatrix(s)


def _node_mnc(g1, g2, pi):
    """Internal method computing MNC(i, pi(i)) for every node i."""
    b = AlignmentMatrix.from_mapping(pi, g2.n).values
    image = _mapped_neighborhoods(g1, b)
    target = b @ g2.adjacency
    inter = np.asarray(image.multiply(target).sum(axis=1)).ravel()
    size1 = np.diff(image.indptr)
    union = size1 + g2.degrees[pi] - inter
    mnc = np.ones(g1.n, dtype=np.float64)
    np.divide(inter, union, out=mnc, where=union > 0)
    return mnc


@check_dimensions
def node_mnc(g1, g2, m):
    """MNC of every node with its greedy counterpart.

    Returns
    -------
    numpy.ndarray
        Array of length n1 with MNC(i, pi(i)), pi = greedy_map(m).

    """
    return _node_mnc(g1, g2, greedy_map(m).pi)


@check_dimensions
def average_mnc(g1, g2, m):
    """Mean MNC over all nodes of g1 under the greedy alignment of m.

    Raises
    ------
    UndefinedMetricError
        If g1 has no nodes.

    """
    if g1.n == 0:
        raise UndefinedMetricError("The average MNC of an empty graph is "
                                   "undefined.")
    return float(_node_mnc(g1, g2, greedy_map(m).pi).mean())


@check_dimensions
def degree_mnc_profile(g1, g2, m, truth=None):
    """Per node degree, MNC and (optionally) correctness of an alignment.

    Parameters
    ----------
    g1, g2: refina.Graph
    m: refina.AlignmentMatrix
    truth: refina.Permutation, optional

    Returns
    -------
    pandas.DataFrame
        Columns "degree", "mnc" and, with a ground truth, "correct". Useful
        to see that high degree nodes are aligned more reliably.

    """
    pi = greedy_map(m).pi
    data = {"degree": g1.degrees, "mnc": _node_mnc(g1, g2, pi)}
    if truth is not None:
        data["correct"] = pi == truth.map
    profile = DataFrame(data)
    profile.index.name = "node"
    return profile
