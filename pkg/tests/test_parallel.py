from __future__ import annotations

import threading

import numpy as np
import pytest

from stokes_treecode.errors import ParameterError
from stokes_treecode.parallel import partition_offsets, run_segments


def test_partition_offsets_balanced():
    np.testing.assert_array_equal(partition_offsets(10, 3), [0, 4, 7, 10])
    np.testing.assert_array_equal(partition_offsets(4, 4), [0, 1, 2, 3, 4])
    np.testing.assert_array_equal(partition_offsets(2, 4), [0, 1, 2, 2, 2])


def test_partition_offsets_rejects_zero_workers():
    with pytest.raises(ParameterError):
        partition_offsets(10, 0)


def test_run_segments_covers_range_once():
    seen = np.zeros(101, dtype=int)
    lock = threading.Lock()

    def task(start, end):
        with lock:
            seen[start:end] += 1

    segments = run_segments(101, 4, task)
    assert len(segments) == 4
    assert (seen == 1).all()


def test_run_segments_skips_empty_segments():
    calls = []
    segments = run_segments(2, 5, lambda s, e: calls.append((s, e)))
    assert segments == [(0, 1), (1, 2)]
    assert sorted(calls) == segments


def test_run_segments_propagates_errors():
    def task(start, end):
        raise RuntimeError("boom")

    with pytest.raises(RuntimeError, match="boom"):
        run_segments(10, 2, task)
