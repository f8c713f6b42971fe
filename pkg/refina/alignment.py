"""The alignment module contains the alignment matrix data model and the
extraction of hard alignments from it.

An alignment matrix M holds nonnegative scores; M[i, j] is the similarity of
node i of the first graph to node j of the second graph. It is stored either
dense (numpy.ndarray) or row-sparse (scipy.sparse.csr_matrix).

Ties between equal scores are always broken towards the lowest column index.

Examples
--------
>>> m = AlignmentMatrix(np.eye(3))
>>> greedy_map(m).pi
array([0, 1, 2])

"""

from logging import getLogger

import numpy as np
import scipy.sparse as sp

from .exceptions import (DimensionError, IngestionError, ParameterError,
                         ParseError)
from .io.base import read_pairs
from .utils import atomic_write

logger = getLogger(__name__)


class AlignmentMatrix:
    """Matrix of nonnegative alignment scores between two graphs.

    Parameters
    ----------
    values: numpy.ndarray or scipy.sparse matrix
        Array of shape (n1, n2). Sparse input is stored as CSR without
        explicit zeros, with sorted column indices and summed duplicates.

    Notes
    -----
    The values are copied on construction and never modified afterwards.

    """
    _name = "AlignmentMatrix"

    def __init__(self, values):
        if sp.issparse(values):
            values = sp.csr_matrix(values, dtype=np.float64, copy=True)
            values.sum_duplicates()
            values.eliminate_zeros()
            values.sort_indices()
            data = values.data
        else:
            values = np.array(values, dtype=np.float64, ndmin=2)
            if values.ndim != 2:
                raise DimensionError("An alignment matrix is two "
                                     "dimensional.")
            data = values
        if data.size and (not np.all(np.isfinite(data)) or data.min() < 0):
            raise ParameterError("Alignment scores must be finite and "
                                 "nonnegative.")
        self.values = values

    def __repr__(self):
        return "{cls}(n1={n1}, n2={n2}, {kind}, nnz={nnz})".format(
            cls=self.__class__.__name__, n1=self.n1, n2=self.n2,
            kind="sparse" if self.is_sparse else "dense", nnz=self.nnz)

    @classmethod
    def from_mapping(cls, pi, n2, value=1.0):
        """Sparse matrix with a single entry per row, at column pi[i]."""
        pi = np.asarray(pi, dtype=np.int64)
        n1 = pi.size
        if n1 and (pi.min() < 0 or pi.max() >= n2):
            raise DimensionError("Mapping refers to columns outside "
                                 "0..{}.".format(n2 - 1))
        data = np.full(n1, value, dtype=np.float64)
        return cls(sp.csr_matrix((data, pi, np.arange(n1 + 1)),
                                 shape=(n1, n2)))

    @classmethod
    def from_permutation(cls, perm, n2=None, value=1.0):
        """Binary matrix of a permutation, optionally scaled by value."""
        n2 = len(perm) if n2 is None else n2
        return cls.from_mapping(perm.map, n2, value=value)

    @property
    def n1(self):
        return self.values.shape[0]

    @property
    def n2(self):
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape

    @property
    def is_sparse(self):
        return sp.issparse(self.values)

    @property
    def nnz(self):
        if self.is_sparse:
            return self.values.nnz
        return int(np.count_nonzero(self.values))

    def toarray(self):
        """Dense numpy array with the values."""
        if self.is_sparse:
            return self.values.toarray()
        return self.values.copy()

    def tocsr(self):
        """CSR matrix with the nonzero values."""
        if self.is_sparse:
            return self.values.copy()
        return sp.csr_matrix(self.values)

    def to_dense(self):
        return AlignmentMatrix(self.toarray())

    def to_sparse(self):
        return AlignmentMatrix(self.tocsr())

    def transpose(self):
        return AlignmentMatrix(self.values.T)

    T = property(transpose)

    def row(self, i):
        """Candidate columns and values of row i.

        Returns
        -------
        cols, vals: numpy.ndarray
            All columns for a dense matrix, the stored columns (sorted) for a
            sparse matrix.

        """
        if not 0 <= i < self.n1:
            raise IndexError("Row {} out of range for a matrix with {} "
                             "rows.".format(i, self.n1))
        if self.is_sparse:
            v = self.values
            start, end = v.indptr[i], v.indptr[i + 1]
            return v.indices[start:end].astype(np.int64), v.data[start:end]
        return np.arange(self.n2), self.values[i]

    def is_binary(self):
        data = self.values.data if self.is_sparse else self.values
        return bool(np.all((data == 0.0) | (data == 1.0)))

    def support(self):
        """Set of (i, j) pairs with a nonzero value."""
        rows, cols = self.values.nonzero()
        return set(zip(rows.tolist(), cols.tolist()))


class Mapping:
    """Hard node correspondence pi, the greedy alignment of a matrix.

    Parameters
    ----------
    pi: array-like
        pi[i] is the node of the second graph node i is aligned to. Not
        necessarily injective.
    n2: int
        Number of nodes of the second graph.
    zero_rows: array-like of bool, optional
        Rows without any positive score; these map to column 0.

    """
    _name = "Mapping"

    def __init__(self, pi, n2, zero_rows=None):
        pi = np.asarray(pi, dtype=np.int64)
        if pi.size and (pi.min() < 0 or pi.max() >= n2):
            raise DimensionError("Mapping refers to columns outside "
                                 "0..{}.".format(n2 - 1))
        self.pi = pi
        self.n2 = n2
        if zero_rows is None:
            zero_rows = np.zeros(pi.size, dtype=bool)
        self.zero_rows = np.asarray(zero_rows, dtype=bool)

    def __len__(self):
        return self.pi.size

    def __getitem__(self, i):
        return self.pi[i]

    def __repr__(self):
        return "{}(n1={}, n2={})".format(self.__class__.__name__, len(self),
                                         self.n2)


def _greedy_pi(values):
    """Internal method returning the row-wise argmax of a dense array or CSR
    matrix (ties by the lowest column) and the mask of all-zero rows."""
    n1 = values.shape[0]
    if not sp.issparse(values):
        return np.argmax(values, axis=1), ~np.any(values > 0, axis=1)
    if not values.has_sorted_indices:
        values = values.sorted_indices()
    counts = np.diff(values.indptr)
    pi = np.zeros(n1, dtype=np.int64)
    rowmax = np.zeros(n1)
    nonempty = counts > 0
    if values.nnz:
        rowmax[nonempty] = np.maximum.reduceat(values.data,
                                               values.indptr[:-1][nonempty])
        rows = np.repeat(np.arange(n1), counts)
        cand = np.flatnonzero((values.data == rowmax[rows]) &
                              (values.data > 0))
        # column indices are sorted, so the first candidate is the lowest
        crows, first = np.unique(rows[cand], return_index=True)
        pi[crows] = values.indices[cand[first]]
    return pi, ~(rowmax > 0)


def greedy_map(m):
    """Greedy alignment: every row maps to the column of its largest score.

    Parameters
    ----------
    m: refina.AlignmentMatrix

    Returns
    -------
    refina.Mapping
        Ties are broken by the lowest column index; an all-zero row maps to
        column 0 and is flagged in Mapping.zero_rows.

    """
    if m.n1 == 0 or m.n2 == 0:
        raise DimensionError("Cannot extract an alignment from an empty "
                             "matrix of shape {}.".format(m.shape))
    pi, zero_rows = _greedy_pi(m.values)
    nzero = int(zero_rows.sum())
    if nzero:
        logger.debug("%d of %d rows of the alignment matrix have no "
                     "positive score and are mapped to column 0.", nzero,
                     m.n1)
    return Mapping(pi, m.n2, zero_rows=zero_rows)


def top_k_columns(m, i, k):
    """The k columns of row i with the largest values.

    Parameters
    ----------
    m: refina.AlignmentMatrix
    i: int
        Row index.
    k: int
        Number of columns, at least 1.

    Returns
    -------
    list of int
        min(k, number of candidates) columns, value-descending, ties by the
        lowest column. A dense row has all columns as candidates, a sparse
        row its stored entries.

    """
    if k < 1:
        raise ParameterError("k must be at least 1, got {}.".format(k))
    cols, vals = m.row(i)
    order = np.lexsort((cols, -vals))[:k]
    return cols[order].tolist()


def _top_k_csr(values, k):
    """Internal method keeping the k largest stored entries of every row of a
    CSR matrix (ties by the lowest column)."""
    values = sp.csr_matrix(values)
    values.sum_duplicates()
    values.eliminate_zeros()
    counts = np.diff(values.indptr)
    if values.nnz == 0 or counts.max() <= k:
        values.sort_indices()
        return values
    n1 = values.shape[0]
    rows = np.repeat(np.arange(n1), counts)
    order = np.lexsort((values.indices, -values.data, rows))
    ranks = np.arange(values.nnz) - np.repeat(values.indptr[:-1], counts)
    keep = order[ranks < k]
    top = sp.csr_matrix((values.data[keep], (rows[keep],
                                             values.indices[keep])),
                        shape=values.shape)
    top.sort_indices()
    return top


def top_k(m, k):
    """Sparse matrix holding only the k largest entries of every row.

    Parameters
    ----------
    m: refina.AlignmentMatrix
    k: int

    Returns
    -------
    refina.AlignmentMatrix
        Sparse. Zero entries of a dense input are never selected.

    """
    if k < 1:
        raise ParameterError("k must be at least 1, got {}.".format(k))
    return AlignmentMatrix(_top_k_csr(m.tocsr(), k))


def binarize(m):
    """One-hot matrix of the greedy alignment of m.

    Returns
    -------
    refina.AlignmentMatrix
        Sparse matrix with exactly one entry of value 1 per row.

    """
    return AlignmentMatrix.from_mapping(greedy_map(m).pi, m.n2)


def load_alignment(fname, n1, n2):
    """Load an alignment matrix from a text file.

    Parameters
    ----------
    fname: str
        File with "i j" lines (binary alignment, value 1) or "i j v" lines
        (real-valued alignment, v > 0). Repeated pairs are summed.
    n1, n2: int
        Number of nodes of the two graphs.

    Returns
    -------
    refina.AlignmentMatrix
        Sparse alignment matrix.

    Raises
    ------
    IngestionError
        If a node index is out of bounds.
    ParseError
        For malformed lines and values v <= 0.

    """
    rows, cols, vals = [], [], []
    for lineno, pair in read_pairs(fname, ncols=(2, 3), lines=True):
        i, j = pair[0], pair[1]
        if i >= n1 or j >= n2:
            raise IngestionError("Pair ({}, {}) outside a {}x{} alignment "
                                 "matrix".format(i, j, n1, n2),
                                 fname=fname, line=lineno)
        v = 1.0
        if len(pair) == 3:
            try:
                v = float(pair[2])
            except ValueError:
                raise ParseError("Score '{}' is not a number".format(pair[2]),
                                 fname=fname, line=lineno) from None
            if not np.isfinite(v) or v <= 0:
                raise ParseError("Scores must be positive, got "
                                 "{}".format(v), fname=fname, line=lineno)
        rows.append(i)
        cols.append(j)
        vals.append(v)
    values = sp.csr_matrix((np.asarray(vals, dtype=np.float64),
                            (np.asarray(rows, dtype=np.int64),
                             np.asarray(cols, dtype=np.int64))),
                           shape=(n1, n2))
    if values.nnz < len(vals):
        logger.warning("%s holds repeated pairs; their scores are summed.",
                       fname)
    return AlignmentMatrix(values)


def write_alignment(fname, m, top=None):
    """Write an alignment matrix as "i j v" lines.

    Parameters
    ----------
    fname: str
    m: refina.AlignmentMatrix
    top: int, optional
        Only write the top entries of every row.

    Notes
    -----
    Values are printed with 17 significant digits, which reproduces every
    float64 exactly when the file is read back.

    """
    values = m.tocsr() if top is None else _top_k_csr(m.tocsr(), top)
    coo = values.tocoo()
    order = np.lexsort((coo.col, coo.row))

    def write(f):
        for i, j, v in zip(coo.row[order], coo.col[order], coo.data[order]):
            f.write("{:d} {:d} {:.17g}\n".format(i, j, v))

    return atomic_write(fname, write)
