"""Initial alignment matrices for the refinement.

When no output of an external alignment method is available, these functions
produce the initial matrix M0: a degree based prior, a corrupted copy of the
ground truth, a random alignment or an alignment file.

"""

from logging import getLogger
from math import ceil, floor, log2

import numpy as np
import scipy.sparse as sp

from .alignment import AlignmentMatrix, load_alignment
from .exceptions import DimensionError, ParameterError
from .utils import get_rng

logger = getLogger(__name__)


class InitSpec:
    """Description of how to build an initial alignment matrix.

    Parameters
    ----------
    kind: str, optional
        One of "degree_prior", "corrupted_truth" (default), "random_map" and
        "external_file".
    corruption_fraction: float, optional
        Fraction of rows reassigned by corrupted_truth, in [0, 1].
    seed: int, optional
        Seed of the random initializers.
    path: str, optional
        Alignment file, required for and only allowed with "external_file".

    """
    _name = "InitSpec"
    kinds = ("degree_prior", "corrupted_truth", "random_map",
             "external_file")

    def __init__(self, kind="corrupted_truth", corruption_fraction=0.0,
                 seed=None, path=None):
        if kind not in self.kinds:
            raise ParameterError("Initializer {} not supported, choose from "
                                 "{}.".format(kind, self.kinds))
        if not 0.0 <= corruption_fraction <= 1.0:
            raise ParameterError("corruption_fraction must lie in [0, 1], "
                                 "got {}.".format(corruption_fraction))
        if (path is not None) != (kind == "external_file"):
            raise ParameterError("A path is required for, and only allowed "
                                 "with, kind='external_file'.")
        self.kind = kind
        self.corruption_fraction = float(corruption_fraction)
        self.seed = seed
        self.path = path

    def __repr__(self):
        return "{}(kind={}, corruption_fraction={})".format(
            self.__class__.__name__, self.kind, self.corruption_fraction)

    def to_dict(self):
        data = {"kind": self.kind,
                "corruption_fraction": self.corruption_fraction,
                "seed": self.seed}
        if self.path is not None:
            data["path"] = self.path
        return data

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - {"kind", "corruption_fraction", "seed", "path"}
        if unknown:
            raise ParameterError("Unknown initializer settings: {}.".format(
                ", ".join(sorted(unknown))))
        return cls(**data)


def degree_prior(g1, g2):
    """Sparse prior alignment matrix from node degrees.

    Every row i holds the k nodes of g2 whose degree is closest to the degree
    of i, with k = floor(log2((n1 + n2) / 2)), at least 1 and at most n2.
    Ties are broken by the lowest node id. The similarity of a pair is
    1 / (1 + |deg(i) - deg(j)|).

    Parameters
    ----------
    g1, g2: refina.Graph

    Returns
    -------
    refina.AlignmentMatrix

    Examples
    --------
    >>> degree_prior(g, g).nnz == g.n * 3  # for n = 8
    True

    """
    if g1.n == 0 or g2.n == 0:
        raise ParameterError("degree_prior needs two non-empty graphs.")
    k = min(max(int(floor(log2((g1.n + g2.n) / 2))), 1), g2.n)
    deg1 = g1.degrees
    deg2 = g2.degrees
    ids = np.arange(g2.n)

    # all nodes of g1 with the same degree share their candidates
    values, inverse = np.unique(deg1, return_inverse=True)
    cand = np.empty((values.size, k), dtype=np.int64)
    for r, d in enumerate(values):
        cand[r] = np.lexsort((ids, np.abs(deg2 - d)))[:k]

    cols = cand[inverse].ravel()
    rows = np.repeat(np.arange(g1.n), k)
    sim = 1.0 / (1.0 + np.abs(deg1[rows] - deg2[cols]))
    logger.debug("Degree prior with %d candidates per node.", k)
    return AlignmentMatrix(sp.csr_matrix((sim, (rows, cols)),
                                         shape=(g1.n, g2.n)))


def corrupted_truth(truth, fraction, n2=None, seed=None):
    """Ground truth alignment with a fraction of the rows reassigned.

    Parameters
    ----------
    truth: refina.Permutation
    fraction: float
        A uniformly chosen subset of ceil(fraction * n) rows is reassigned to
        uniformly random columns. A reassigned row can land on its true
        column again.
    n2: int, optional
        Number of columns, defaults to len(truth).
    seed: int, optional

    Returns
    -------
    refina.AlignmentMatrix
        Binary matrix with one entry per row.

    """
    if not 0.0 <= fraction <= 1.0:
        raise ParameterError("fraction must lie in [0, 1], got "
                             "{}.".format(fraction))
    n = len(truth)
    n2 = n if n2 is None else n2
    rng = get_rng(seed)
    pi = truth.map.copy()
    count = min(int(ceil(fraction * n)), n)
    rows = rng.choice(n, size=count, replace=False)
    pi[rows] = rng.integers(0, n2, size=count)
    return AlignmentMatrix.from_mapping(pi, n2)


def random_map(n1, n2, seed=None):
    """Binary alignment matrix with a uniformly random column per row."""
    if n1 < 1 or n2 < 1:
        raise ParameterError("random_map needs n1, n2 >= 1.")
    pi = get_rng(seed).integers(0, n2, size=n1)
    return AlignmentMatrix.from_mapping(pi, n2)


def make_initial(spec, g1, g2, truth=None, seed=None):
    """Build the initial alignment matrix described by an InitSpec.

    Parameters
    ----------
    spec: refina.InitSpec
    g1, g2: refina.Graph
    truth: refina.Permutation, optional
        Required for "corrupted_truth".
    seed: int or numpy.random.Generator, optional
        Overrides spec.seed, used by the benchmark to give every trial its
        own stream.

    Returns
    -------
    refina.AlignmentMatrix

    """
    seed = spec.seed if seed is None else seed
    if spec.kind == "degree_prior":
        return degree_prior(g1, g2)
    elif spec.kind == "corrupted_truth":
        if truth is None:
            raise ParameterError("corrupted_truth needs a ground truth.")
        if len(truth) != g1.n:
            raise DimensionError("Ground truth of length {} does not match "
                                 "{} nodes.".format(len(truth), g1.n))
        return corrupted_truth(truth, spec.corruption_fraction, g2.n, seed)
    elif spec.kind == "random_map":
        return random_map(g1.n, g2.n, seed)
    return load_alignment(spec.path, g1.n, g2.n)
