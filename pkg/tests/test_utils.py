import logging
import os
from logging import handlers

import numpy as np
import pytest

import refina as rf
from refina.utils import atomic_write, get_rng, get_workers, validate_name


def test_get_rng_reproducible():
    a = get_rng(42).integers(0, 1000, size=10)
    b = get_rng(42).integers(0, 1000, size=10)
    assert np.array_equal(a, b)
    rng = get_rng(0)
    assert get_rng(rng) is rng


def test_get_workers(monkeypatch):
    monkeypatch.delenv("REFINA_WORKERS", raising=False)
    assert get_workers() == 1
    assert get_workers(4) == 4
    assert get_workers(0) == 1
    monkeypatch.setenv("REFINA_WORKERS", "3")
    assert get_workers() == 3
    monkeypatch.setenv("REFINA_WORKERS", "many")
    assert get_workers() == 1


def test_atomic_write(tmp_path):
    fname = str(tmp_path / "sub" / "file.txt")
    atomic_write(fname, lambda f: f.write("first"))
    atomic_write(fname, lambda f: f.write("second"))
    with open(fname) as f:
        assert f.read() == "second"
    assert os.listdir(str(tmp_path / "sub")) == ["file.txt"]


def test_atomic_write_failure_keeps_old_file(tmp_path):
    fname = str(tmp_path / "file.txt")
    atomic_write(fname, lambda f: f.write("old"))

    def broken(f):
        f.write("partial")
        raise RuntimeError("disk full")

    with pytest.raises(RuntimeError):
        atomic_write(fname, broken)
    with open(fname) as f:
        assert f.read() == "old"
    assert os.listdir(str(tmp_path)) == ["file.txt"]


def test_validate_name(caplog):
    with caplog.at_level(logging.WARNING):
        assert validate_name("epsilon=0.1") == "epsilon=0.1"
    assert not caplog.records
    with caplog.at_level(logging.WARNING):
        validate_name("a/b")
    assert "illegal" in caplog.text


def test_file_handlers(tmp_path):
    fname = str(tmp_path / "refina.log")
    rf.add_file_handlers(filenames=(fname,), levels=(logging.INFO,))
    try:
        logging.getLogger("refina.tests").info("written to the log file")
    finally:
        rf.remove_file_handlers()
    with open(fname) as f:
        assert "written to the log file" in f.read()
    assert not any(isinstance(h, handlers.RotatingFileHandler)
                   for h in logging.getLogger("refina").handlers)


def test_set_log_level():
    rf.set_log_level("debug")
    try:
        assert logging.getLogger("refina").getEffectiveLevel() == \
            logging.DEBUG
    finally:
        rf.set_log_level("INFO")
        logging.getLogger("refina").setLevel(logging.INFO)
