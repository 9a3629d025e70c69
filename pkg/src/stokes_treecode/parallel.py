"""Replicated-data work splitting.

Every worker sees the full (read-only) particle and tree arrays; only the
range of target indices is split. Workers are threads: the numba kernels
release the GIL, so no data is copied between them.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Tuple

import numpy as np

from .errors import ParameterError

logger = logging.getLogger(__name__)


def partition_offsets(size: int, workers: int) -> np.ndarray:
    """Start offsets of ``workers`` contiguous segments covering [0, size).

    The first ``size % workers`` segments get one extra element. The
    returned array has ``workers + 1`` entries; segment w is
    ``[out[w], out[w + 1])``.
    """
    if workers < 1:
        raise ParameterError(f"workers must be >= 1, got {workers}")
    base, extra = divmod(int(size), workers)
    counts = np.full(workers, base, dtype=np.int64)
    counts[:extra] += 1
    out = np.zeros(workers + 1, dtype=np.int64)
    np.cumsum(counts, out=out[1:])
    return out


def run_segments(
    size: int, workers: int, task: Callable[[int, int], None]
) -> List[Tuple[int, int]]:
    """Call ``task(start, end)`` once per segment, in parallel if workers > 1.

    Tasks must write only to their own segment of shared outputs.
    """
    offsets = partition_offsets(size, workers)
    segments = [
        (int(offsets[w]), int(offsets[w + 1]))
        for w in range(workers)
        if offsets[w + 1] > offsets[w]
    ]
    if workers == 1 or len(segments) <= 1:
        for start, end in segments:
            task(start, end)
        return segments

    logger.debug("dispatching %d segments to %d threads", len(segments), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(task, start, end) for start, end in segments]
        for fut in futures:
            fut.result()
    return segments
