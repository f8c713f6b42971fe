"""
Reading and writing of refina files.

Configuration and report files are dispatched on their extension to the
module refina.io.<ext>, which implements load and dump. The plain text
formats (edge lists, permutations and alignments) share read_pairs.

"""

from importlib import import_module
from logging import getLogger
from os import path

from ..exceptions import ParseError

logger = getLogger(__name__)


def load(fname, **kwargs):
    """Method to load a configuration or report file.

    Parameters
    ----------
    fname: str
        string with the name of the file to be imported including the file
        extension.
    kwargs: extension specific

    Returns
    -------
    data: dict
        Dictionary with the file content.

    """
    if not path.exists(fname):
        msg = "File not found: {}".format(fname)
        logger.error(msg)
        raise FileNotFoundError(msg)

    ext = path.splitext(fname)[1]
    load_mod = import_module("refina.io" + ext)
    data = load_mod.load(fname, **kwargs)
    logger.debug("Loaded %s.", fname)
    return data


def dump(fname, data, **kwargs):
    """Method to save a dictionary to a file. The specific dump-module is
    automatically chosen based on the provided file extension.

    Parameters
    ----------
    fname: str
        string with the name of the file, including a supported
        file-extension. Currently supported extension is: .json.
    data: dict
        dictionary with the information to store.
    kwargs: extension specific keyword arguments can be provided using kwargs.

    Returns
    -------
    fname: str

    """
    ext = path.splitext(fname)[1]
    dump_mod = import_module("refina.io" + ext)
    return dump_mod.dump(fname, data, **kwargs)


def read_pairs(fname, ncols=(2,), lines=False):
    """Read a text file of whitespace separated node pairs.

    Parameters
    ----------
    fname: str
        UTF-8 text file. Empty lines and lines starting with "#" are skipped.
    ncols: tuple of int
        Allowed numbers of tokens per line.
    lines: bool, optional
        Return (line number, pair) tuples instead of pairs.

    Returns
    -------
    pairs: list of tuple
        (u, v) or (u, v, token) per line. u and v are nonnegative integers,
        any further tokens are returned as strings.

    Raises
    ------
    ParseError
        With the 1-based line number of the first malformed line.

    """
    pairs = []
    with open(fname, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            if len(tokens) not in ncols:
                raise ParseError("Expected {} values, got {}".format(
                    " or ".join(str(c) for c in ncols), len(tokens)),
                    fname=fname, line=lineno)
            try:
                u, v = int(tokens[0]), int(tokens[1])
            except ValueError:
                raise ParseError("Node ids must be integers, got "
                                 "'{}'".format(line), fname=fname,
                                 line=lineno) from None
            if u < 0 or v < 0:
                raise ParseError("Node ids must be nonnegative, got "
                                 "'{}'".format(line), fname=fname,
                                 line=lineno)
            pair = (u, v, *tokens[2:])
            pairs.append((lineno, pair) if lines else pair)
    return pairs
