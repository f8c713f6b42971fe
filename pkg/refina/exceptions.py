"""Exceptions raised throughout refina.

All exceptions derive from RefinaError and, where it makes sense, from the
builtin exception a caller would naturally catch (mostly ValueError).

"""


class RefinaError(Exception):
    """Base class of all refina specific errors."""


class ParseError(RefinaError, ValueError):
    """Raised when an input file contains a malformed line."""

    def __init__(self, msg, fname=None, line=None):
        self.fname = fname
        self.line = line
        if line is not None:
            msg = "{} (line {}{})".format(
                msg, line, "" if fname is None else " of {}".format(fname))
        super().__init__(msg)


class DimensionError(RefinaError, ValueError):
    """Raised when the shapes of graphs, matrices or permutations do not
    agree."""


class IngestionError(DimensionError):
    """Raised when an alignment file refers to a node outside the declared
    dimensions."""

    def __init__(self, msg, fname=None, line=None):
        self.fname = fname
        self.line = line
        if line is not None:
            msg = "{} (line {}{})".format(
                msg, line, "" if fname is None else " of {}".format(fname))
        super().__init__(msg)


class ParameterError(RefinaError, ValueError):
    """Raised for parameters outside their valid range."""


class PreconditionError(RefinaError, ValueError):
    """Raised when an input violates the precondition of an operation."""


class UndefinedMetricError(RefinaError, ValueError):
    """Raised when a metric is undefined for the given input, e.g. a mean
    over zero nodes."""
