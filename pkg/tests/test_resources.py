"""Tests de utilidades, versión y trazado."""

import hashlib
import io

import numpy as np
import pytest

from alphabx.resources.logging_method import MethodLogger
from alphabx.resources.utils import calculate_sha256, db_to_linear, linear_to_db, write_text_atomic
from alphabx.resources.version import compare_versions, get_app_info, parse_version


def test_db_round_trip():
    for value in (-37.5, -5.0, 0.0, 3.0, 10.0, 41.2):
        assert linear_to_db(db_to_linear(value)) == pytest.approx(value, rel=1e-12, abs=1e-12)
    assert db_to_linear(float("-inf")) == 0.0
    with pytest.raises(ValueError):
        linear_to_db(-1.0)


def test_write_text_atomic_and_sha(tmp_path):
    path = tmp_path / "table.csv"
    write_text_atomic(path, "a,b\n1.0,2.0\n")
    write_text_atomic(path, "a\n3.0\n")
    assert path.read_text() == "a\n3.0\n"
    assert calculate_sha256(path) == hashlib.sha256(b"a\n3.0\n").hexdigest()
    assert list(tmp_path.iterdir()) == [path]


def test_versions():
    assert parse_version("v1.2.3") == (1, 2, 3)
    assert compare_versions("0.3.9", "0.4.0") == -1
    assert compare_versions("0.4.0", "0.4.0") == 0
    with pytest.raises(ValueError):
        parse_version("1.2")
    assert {"name", "version", "numpy", "scipy"} <= set(get_app_info())


def test_trace_summarizes_arrays():
    logger = MethodLogger()
    previous = logger.stream
    logger.stream = io.StringIO()
    logger.enable(["scaled"])
    try:
        @logger.log_function
        def scaled(samples, factor=2.0):
            return samples * factor

        @logger.log_function
        def untraced(x):
            return x

        untraced(1)
        scaled(np.arange(1_000_000.0))
        output = logger.stream.getvalue()
    finally:
        logger.disable()
        logger.stream = previous
    assert "INPUT: [scaled]" in output
    assert "shape=(1000000,)" in output
    assert "max=2e+06" in output
    assert "untraced" not in output
