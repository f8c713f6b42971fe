from functools import wraps
from logging import getLogger

from .exceptions import DimensionError

logger = getLogger(__name__)


def check_dimensions(function):
    """Check that the alignment matrix agrees with the two graphs.

    The decorated function must take (g1, g2, m, ...) as its first three
    positional arguments.

    """
    @wraps(function)
    def _check_dimensions(g1, g2, m, *args, **kwargs):
        if (m.n1, m.n2) != (g1.n, g2.n):
            raise DimensionError(
                "Alignment matrix of shape {}x{} does not match graphs with "
                "{} and {} nodes.".format(m.n1, m.n2, g1.n, g2.n))
        return function(g1, g2, m, *args, **kwargs)

    return _check_dimensions


def check_truth(function):
    """Check that a ground truth permutation covers every row of the
    alignment matrix.

    The decorated function must take (m, truth, ...) as its first two
    positional arguments.

    """
    @wraps(function)
    def _check_truth(m, truth, *args, **kwargs):
        if len(truth) != m.n1:
            raise DimensionError(
                "Ground truth of length {} does not match the {} rows of the "
                "alignment matrix.".format(len(truth), m.n1))
        return function(m, truth, *args, **kwargs)

    return _check_truth
