"""This module contains the Graph class and the functions that build the
benchmark instances: edge-list I/O, permutation and noise injection.

Graphs are undirected, unweighted and simple. Node ids are dense 0-based
integers; ids missing from an edge list become isolated nodes.

Examples
--------
>>> g1 = random_graph(1000, avg_degree=10, seed=0)
>>> g2, truth = noisy_copy(g1, NoiseSpec("remove_edges", p=0.05, seed=1),
...                        seed=2)

"""

from logging import getLogger
from math import ceil

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .alignment import AlignmentMatrix
from .exceptions import DimensionError, ParameterError
from .io.base import read_pairs
from .utils import get_rng

logger = getLogger(__name__)

# Below this number of node pairs random_graph draws every pair explicitly.
_EXACT_PAIRS = 5000000


class Graph:
    """Undirected, unweighted, simple graph stored as a CSR adjacency matrix.

    Parameters
    ----------
    adjacency: scipy.sparse matrix
        Square symmetric matrix whose nonzero pattern holds the edges. The
        values are ignored, the diagonal is dropped.

    Raises
    ------
    DimensionError
        If the matrix is not square or its pattern is not symmetric.

    Notes
    -----
    The adjacency matrix has sorted column indices and all values equal to
    one, so the neighbor list of node i is the sorted slice
    ``adjacency.indices[indptr[i]:indptr[i + 1]]``. A Graph is never
    modified after construction.

    Examples
    --------
    >>> g = Graph.from_edges(3, [(0, 1), (1, 2)])
    >>> g.neighbors(1)
    array([0, 2], dtype=int32)

    """
    _name = "Graph"

    def __init__(self, adjacency):
        coo = sp.coo_matrix(adjacency)
        if coo.shape[0] != coo.shape[1]:
            raise DimensionError("Adjacency matrix must be square, got shape "
                                 "{}.".format(coo.shape))
        keep = (coo.row != coo.col) & (coo.data != 0)
        adjacency = sp.csr_matrix(
            (np.ones(int(keep.sum())), (coo.row[keep], coo.col[keep])),
            shape=coo.shape)
        adjacency.sum_duplicates()
        adjacency.data[:] = 1.0
        adjacency.sort_indices()
        if (adjacency != adjacency.T).nnz:
            raise DimensionError("Adjacency matrix must be symmetric; use "
                                 "Graph.from_adjacency for a directed "
                                 "pattern.")
        self.adjacency = adjacency

    def __repr__(self):
        return "{cls}(n={n}, m={m})".format(cls=self.__class__.__name__,
                                            n=self.n, m=self.m)

    def __eq__(self, other):
        if not isinstance(other, Graph) or other.n != self.n:
            return False
        return (np.array_equal(self.adjacency.indptr, other.adjacency.indptr)
                and np.array_equal(self.adjacency.indices,
                                   other.adjacency.indices))

    __hash__ = None

    @classmethod
    def from_edges(cls, n, edges):
        """Create a graph from an edge list.

        Parameters
        ----------
        n: int
            Number of nodes.
        edges: array-like
            Sequence of (u, v) pairs. Duplicates, reversed duplicates and
            self-loops are allowed and removed.

        Returns
        -------
        g: refina.Graph

        """
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.size and (edges.min() < 0 or edges.max() >= n):
            raise DimensionError("Edge list refers to nodes outside "
                                 "0..{}.".format(n - 1))
        u, v = edges[:, 0], edges[:, 1]
        keep = u != v
        u, v = u[keep], v[keep]
        rows = np.concatenate([u, v])
        cols = np.concatenate([v, u])
        data = np.ones(rows.size, dtype=np.float64)
        return cls(sp.csr_matrix((data, (rows, cols)), shape=(n, n)))

    @classmethod
    def from_adjacency(cls, adjacency):
        """Create a graph from any square matrix; the pattern is made
        symmetric."""
        adjacency = sp.csr_matrix(adjacency, dtype=np.float64, copy=True)
        adjacency.eliminate_zeros()
        adjacency.data[:] = 1.0
        return cls(adjacency + adjacency.T)

    @property
    def n(self):
        return self.adjacency.shape[0]

    @property
    def m(self):
        return self.adjacency.nnz // 2

    @property
    def degrees(self):
        return np.diff(self.adjacency.indptr)

    @property
    def average_degree(self):
        return 2.0 * self.m / self.n if self.n else 0.0

    def neighbors(self, i):
        """Sorted array with the neighbors of node i."""
        if not 0 <= i < self.n:
            raise IndexError("Node {} out of range for a graph with {} "
                             "nodes.".format(i, self.n))
        a = self.adjacency
        return a.indices[a.indptr[i]:a.indptr[i + 1]]

    def edges(self):
        """Array of shape (m, 2) with every edge once, as u < v."""
        coo = sp.triu(self.adjacency, k=1).tocoo()
        order = np.lexsort((coo.col, coo.row))
        return np.column_stack([coo.row[order],
                                coo.col[order]]).astype(np.int64)

    def is_connected(self):
        if self.n <= 1:
            return True
        ncomp, _ = connected_components(self.adjacency, directed=False)
        return ncomp == 1

    def check(self):
        """Full scan of the graph invariants.

        Returns
        -------
        bool
            True if the adjacency is symmetric, free of self-loops and
            duplicates, binary and has sorted neighbor lists.

        """
        a = self.adjacency
        if a.diagonal().any():
            return False
        if not np.all(a.data == 1.0):
            return False
        if (a - a.T).count_nonzero():
            return False
        for i in range(self.n):
            nb = a.indices[a.indptr[i]:a.indptr[i + 1]]
            if nb.size > 1 and not np.all(np.diff(nb) > 0):
                return False
        return True

    def write_edge_list(self, fname):
        """Write the graph as an edge list, one "u v" line per edge."""
        np.savetxt(fname, self.edges(), fmt="%d",
                   header="{} nodes, {} edges".format(self.n, self.m))


class Permutation:
    """A bijection on the node indices 0..n-1.

    Parameters
    ----------
    map: array-like
        map[i] is the image of node i.

    """
    _name = "Permutation"

    def __init__(self, map):
        map = np.asarray(map, dtype=np.int64).ravel()
        n = map.size
        if n and (map.min() < 0 or map.max() >= n or
                  np.unique(map).size != n):
            raise ParameterError("A permutation must contain every index "
                                 "0..{} exactly once.".format(n - 1))
        self.map = map

    def __len__(self):
        return self.map.size

    def __getitem__(self, i):
        return self.map[i]

    def __eq__(self, other):
        return (isinstance(other, Permutation) and
                np.array_equal(self.map, other.map))

    __hash__ = None

    def __repr__(self):
        return "{}(n={})".format(self.__class__.__name__, len(self))

    @classmethod
    def identity(cls, n):
        return cls(np.arange(n))

    @classmethod
    def random(cls, n, seed=None):
        """Uniformly random permutation of n nodes."""
        return cls(get_rng(seed).permutation(n))

    def inverse(self):
        inv = np.empty_like(self.map)
        inv[self.map] = np.arange(self.map.size)
        return Permutation(inv)

    @classmethod
    def from_file(cls, fname):
        """Read a permutation file with "i j" lines: node i in the first
        graph corresponds to node j in the second graph."""
        pairs = read_pairs(fname, ncols=(2,))
        if not pairs:
            return cls([])
        pairs = np.array(pairs, dtype=np.int64)
        n = pairs.shape[0]
        if pairs[:, 0].max() >= n or np.unique(pairs[:, 0]).size != n:
            raise ParameterError("Permutation file {} must list every node "
                                 "0..{} once.".format(fname, n - 1))
        map = np.empty(n, dtype=np.int64)
        map[pairs[:, 0]] = pairs[:, 1]
        return cls(map)

    def to_matrix(self, n2=None):
        """Binary alignment matrix of the permutation."""
        return AlignmentMatrix.from_permutation(self, n2=n2)

    def to_file(self, fname):
        np.savetxt(fname, np.column_stack([np.arange(len(self)), self.map]),
                   fmt="%d")


class NoiseSpec:
    """Parameters of the structural noise added to a graph.

    Parameters
    ----------
    kind: str, optional
        "remove_edges" (default): every edge is removed independently with
        probability p. "add_edges": ceil(p * m) uniformly random non-edges
        are added.
    p: float, optional
        Noise level in [0, 1].
    seed: int, optional
        Seed of the noise mask.

    """
    _name = "NoiseSpec"
    kinds = ("remove_edges", "add_edges")

    def __init__(self, kind="remove_edges", p=0.0, seed=None):
        if kind not in self.kinds:
            raise ParameterError("Noise kind {} not supported, choose from "
                                 "{}.".format(kind, self.kinds))
        if not 0.0 <= p <= 1.0:
            raise ParameterError("Noise level p={} outside [0, 1].".format(p))
        self.kind = kind
        self.p = float(p)
        self.seed = seed

    def __repr__(self):
        return "{}(kind={}, p={}, seed={})".format(
            self.__class__.__name__, self.kind, self.p, self.seed)

    def to_dict(self):
        return {"kind": self.kind, "p": self.p, "seed": self.seed}


def load_edge_list(fname):
    """Load a graph from an edge-list file.

    Parameters
    ----------
    fname: str
        Path to a UTF-8 text file with one edge "u v" per line. Lines
        starting with "#" are comments.

    Returns
    -------
    g: refina.Graph
        Graph over the nodes 0..max_id. Edges are symmetrized and
        deduplicated, self-loops are dropped.

    Raises
    ------
    ParseError
        For a malformed line, with its line number.

    """
    pairs = read_pairs(fname, ncols=(2,))
    if not pairs:
        logger.info("Edge list %s is empty, returning an empty graph.", fname)
        return Graph(sp.csr_matrix((0, 0)))
    edges = np.array(pairs, dtype=np.int64)
    g = Graph.from_edges(int(edges.max()) + 1, edges)
    logger.debug("Loaded %s from %s.", g, fname)
    return g


def permute(g, perm):
    """Relabel the nodes of a graph: edge (i, j) becomes (perm[i], perm[j]).

    Parameters
    ----------
    g: refina.Graph
    perm: refina.Permutation

    Returns
    -------
    refina.Graph
        The permuted graph, P A P^T in matrix terms.

    """
    if len(perm) != g.n:
        raise DimensionError("Permutation of length {} does not match a "
                             "graph with {} nodes.".format(len(perm), g.n))
    edges = g.edges()
    return Graph.from_edges(g.n, perm.map[edges])


def _sample_pairs(n, count, rng, exclude=None):
    """Internal method to draw count distinct node pairs uniformly at random.

    Parameters
    ----------
    n: int
        Number of nodes.
    count: int
        Number of distinct unordered pairs to draw.
    rng: numpy.random.Generator
    exclude: numpy.ndarray, optional
        Sorted codes u * n + v (u < v) of pairs that may not be drawn.

    Returns
    -------
    numpy.ndarray
        Array of shape (count, 2) with u < v in every row.

    """
    codes = np.empty(0, dtype=np.int64)
    while codes.size < count:
        draw = int(1.1 * (count - codes.size)) + 16
        u = rng.integers(0, n, size=draw)
        v = rng.integers(0, n, size=draw)
        keep = u != v
        new = np.minimum(u, v)[keep] * n + np.maximum(u, v)[keep]
        if exclude is not None and exclude.size:
            new = new[~np.isin(new, exclude)]
        codes = np.concatenate([codes, new])
        # keep the first occurrence of every pair in draw order
        _, first = np.unique(codes, return_index=True)
        codes = codes[np.sort(first)]
    codes = codes[:count]
    return np.column_stack([codes // n, codes % n])


def apply_noise(g, spec):
    """Add structural noise to a graph.

    Parameters
    ----------
    g: refina.Graph
    spec: refina.NoiseSpec

    Returns
    -------
    refina.Graph
        A new graph. For "remove_edges" its edge set is a subset of the edges
        of g, for "add_edges" a superset.

    Notes
    -----
    The result is a deterministic function of (g, spec). With p=0 a copy of g
    is returned.

    """
    rng = get_rng(spec.seed)
    edges = g.edges()
    if spec.kind == "remove_edges":
        keep = rng.random(edges.shape[0]) >= spec.p
        return Graph.from_edges(g.n, edges[keep])

    count = int(ceil(spec.p * g.m))
    available = g.n * (g.n - 1) // 2 - g.m
    if count > available:
        logger.warning("Requested %d added edges but only %d non-edges "
                       "exist; adding all of them.", count, available)
        count = available
    if count == 0:
        return Graph(g.adjacency.copy())
    exclude = np.sort(edges[:, 0] * g.n + edges[:, 1])
    added = _sample_pairs(g.n, count, rng, exclude=exclude)
    return Graph.from_edges(g.n, np.vstack([edges, added]))


def random_graph(n, avg_degree, seed=None):
    """Generate an Erdos-Renyi random graph G(n, p_edge).

    Parameters
    ----------
    n: int
        Number of nodes.
    avg_degree: float
        Expected average degree; p_edge = avg_degree / (n - 1).
    seed: int, optional

    Returns
    -------
    refina.Graph

    Notes
    -----
    For large n the number of edges is drawn from its binomial distribution
    and the edges are drawn as a uniform subset of all node pairs, which
    gives exactly the G(n, p) distribution without visiting every pair.

    """
    if n < 0 or avg_degree < 0:
        raise ParameterError("n and avg_degree must be nonnegative.")
    if n <= 1:
        if avg_degree > 0:
            raise ParameterError("avg_degree={} exceeds n-1={}.".format(
                avg_degree, n - 1))
        return Graph(sp.csr_matrix((n, n)))
    if avg_degree > n - 1:
        raise ParameterError("avg_degree={} exceeds n-1={}.".format(
            avg_degree, n - 1))

    rng = get_rng(seed)
    p_edge = avg_degree / (n - 1)
    npairs = n * (n - 1) // 2
    if npairs <= _EXACT_PAIRS:
        u, v = np.triu_indices(n, k=1)
        keep = rng.random(npairs) < p_edge
        edges = np.column_stack([u[keep], v[keep]])
    else:
        count = int(rng.binomial(npairs, p_edge))
        edges = _sample_pairs(n, count, rng)
    return Graph.from_edges(n, edges)


def noisy_copy(g, spec, seed=None):
    """Create a noisy, randomly permuted copy of a graph.

    Parameters
    ----------
    g: refina.Graph
    spec: refina.NoiseSpec
        Noise applied before permuting.
    seed: int, optional
        Seed of the random permutation.

    Returns
    -------
    g2: refina.Graph
        The permuted noisy copy.
    truth: refina.Permutation
        Node i of g corresponds to node truth[i] of g2.

    """
    truth = Permutation.random(g.n, seed)
    g2 = permute(apply_noise(g, spec), truth)
    if g.is_connected() and not g2.is_connected():
        logger.warning("Noisy copy with %s is disconnected; it is kept.",
                       spec)
    return g2, truth
