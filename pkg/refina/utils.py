import logging
import os
import tempfile
from logging import handlers

import numpy as np

logger = logging.getLogger(__name__)

# Name of the environment variable holding the number of worker tasks.
WORKERS_ENV = "REFINA_WORKERS"


def get_rng(seed=None):
    """Method to obtain the random generator used throughout refina.

    Parameters
    ----------
    seed: int, numpy.random.SeedSequence or numpy.random.Generator, optional
        Seed of the generator. A Generator is returned unchanged.

    Returns
    -------
    rng: numpy.random.Generator
        Generator backed by the PCG64 bit generator.

    Notes
    -----
    PCG64 is portable across platforms, so experiments replay exactly
    everywhere for the same seed.

    """
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.PCG64(seed))


def get_workers(workers=None):
    """Get the number of worker tasks, from the argument or from the
    REFINA_WORKERS environment variable (default 1).

    """
    if workers is None:
        workers = os.environ.get(WORKERS_ENV, 1)
    try:
        workers = int(workers)
    except (TypeError, ValueError):
        logger.warning("Invalid value %r for %s, using a single worker.",
                       workers, WORKERS_ENV)
        workers = 1
    return max(workers, 1)


def atomic_write(fname, write, mode="w"):
    """Write a file atomically.

    Parameters
    ----------
    fname: str
        Destination path.
    write: callable
        Function that takes an open file object and writes the content.
    mode: str, optional
        File mode, "w" (default) or "wb".

    Notes
    -----
    The content is written to a temporary file in the destination folder,
    which is then moved over the destination with os.replace.

    """
    folder = os.path.dirname(os.path.abspath(fname))
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-")
    try:
        with os.fdopen(fd, mode) as f:
            write(f)
        os.replace(tmp, fname)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
    return fname


def validate_name(name):
    """Method to check user-provided names and log a warning if wrong.

    Parameters
    ----------
    name: str
        String with the name to check for 'illegal' characters.

    Returns
    -------
    name: str
        Unchanged name string

    Notes
    -----
    Forbidden characters are: "/", "\\", " ". Names are used to build the
    folder names of experiment cells.

    """
    name = str(name)

    for char in ["\\", "/", " "]:
        if char in name:
            logger.warning("User-provided name '%s' contains illegal "
                           "character %r", name, char)

    return name


def initialize_logger(logger=None, level=logging.INFO):
    """Internal method to create a logger instance to log program output.

    Parameters
    -------
    logger : logging.Logger
        A Logger-instance. Use refina.logger to initialise the Logging
        instance that handles all logging throughout refina, including all
        sub modules and packages.

    """
    if logger is None:
        logger = logging.getLogger('refina')
    logger.setLevel(level)
    remove_file_handlers(logger)
    set_console_handler(logger)


def set_console_handler(logger=None, level=logging.INFO,
                        fmt="%(levelname)s: %(message)s"):
    """Method to add a console handler to the logger of refina.

    Parameters
    -------
    logger : logging.Logger
        A Logger-instance. Defaults to the 'refina' logger.
    level: int or str
        Level of the console handler.
    fmt: str
        Format string of the console output.

    """
    if logger is None:
        logger = logging.getLogger('refina')
    remove_console_handler(logger)
    ch = logging.StreamHandler()
    ch.setLevel(level)
    ch.setFormatter(logging.Formatter(fmt=fmt))
    logger.addHandler(ch)
    # Let DEBUG messages through when they are requested on the console.
    if logger.getEffectiveLevel() > ch.level:
        logger.setLevel(ch.level)


def set_log_level(level):
    """Set the log-level of the console. This method is just a wrapper around
    set_console_handler.

    Parameters
    ----------
    level: int or str
        E.g. "DEBUG", "INFO", "WARNING" or "ERROR".

    """
    if isinstance(level, str):
        level = level.upper()
    set_console_handler(level=level)


def remove_console_handler(logger=None):
    """Method to remove the console handler from the logger of refina."""
    if logger is None:
        logger = logging.getLogger('refina')
    for handler in list(logger.handlers):
        if type(handler) is logging.StreamHandler:
            logger.removeHandler(handler)


def add_file_handlers(logger=None, filenames=('info.log', 'errors.log'),
                      levels=(logging.INFO, logging.ERROR), maxBytes=10485760,
                      backupCount=20, encoding='utf8',
                      fmt='%(asctime)s - %(name)s - %(levelname)s - '
                          '%(message)s',
                      datefmt='%y-%m-%d %H:%M'):
    """Method to add rotating file handlers to the logger of refina.

    Useful for long parameter sweeps, where the console output is lost.

    """
    if logger is None:
        logger = logging.getLogger('refina')
    formatter = logging.Formatter(fmt=fmt, datefmt=datefmt)

    for filename, level in zip(filenames, levels):
        fh = handlers.RotatingFileHandler(filename, maxBytes=maxBytes,
                                          backupCount=backupCount,
                                          encoding=encoding)
        fh.setLevel(level)
        fh.setFormatter(formatter)
        logger.addHandler(fh)


def remove_file_handlers(logger=None):
    """Method to remove any file handlers in the logger of refina."""
    if logger is None:
        logger = logging.getLogger('refina')
    for handler in list(logger.handlers):
        if isinstance(handler, handlers.RotatingFileHandler):
            logger.removeHandler(handler)
