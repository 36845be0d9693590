"""Pytest fixtures for edgevote tests."""

from fractions import Fraction

import numpy as np
import pytest

from edgevote.config import get_settings
from edgevote.source import Dataset, make_spec


@pytest.fixture(autouse=True)
def isolated_settings(tmp_path, monkeypatch):
    """Fresh settings per test, with logs and outputs under tmp_path."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("EDGEVOTE_LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.setenv("EDGEVOTE_OUTPUT_DIR", str(tmp_path / "out"))
    monkeypatch.setenv("EDGEVOTE_EXECUTION_MODE", "sequential")
    monkeypatch.delenv("EDGEVOTE_THREADS", raising=False)
    monkeypatch.delenv("EDGEVOTE_LOG_LEVEL", raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def parallel_mode(monkeypatch):
    """Fan out through the worker pool with four threads."""
    monkeypatch.setenv("EDGEVOTE_EXECUTION_MODE", "parallel")
    monkeypatch.setenv("EDGEVOTE_THREADS", "4")
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


def make_dataset(labels, rows) -> Dataset:
    """Dataset from literal labels and example rows."""
    return Dataset(
        np.array(labels, dtype=np.uint8),
        np.array(rows, dtype=np.uint8),
        seed=0,
        spec_fingerprint="literal",
    )


@pytest.fixture
def three_example_dataset() -> Dataset:
    """m=3, labels (1,0,1), x0=(1,0,1), x1=(0,0,1)."""
    return make_dataset([1, 0, 1], [[1, 0], [0, 0], [1, 1]])


@pytest.fixture
def small_spec():
    """N=40 with 10 positive relevant variables at gamma=1/5."""
    return make_spec(40, 10, Fraction(1, 5))


@pytest.fixture
def mixed_spec():
    """N=30 with 6 relevant variables, the first 3 positive and the last 3 negative."""
    return make_spec(30, 6, Fraction(1, 10), "half_half")


@pytest.fixture
def dataset_factory():
    """Build datasets from literal labels and rows."""
    return make_dataset
