from __future__ import annotations

from typing import Final, Tuple

# Treecode defaults (headline configuration of the benchmarks)
DEFAULT_ORDER: Final[int] = 6
DEFAULT_THETA: Final[float] = 0.5
DEFAULT_LEAF_SIZE: Final[int] = 2000
DEFAULT_WORKERS: Final[int] = 1
DEFAULT_SEED: Final[int] = 20200601

# Hard limits; MAX_ORDER bounds multi-index table sizes (b-table reaches p + 2)
MAX_ORDER: Final[int] = 16
MAX_TREE_DEPTH: Final[int] = 64

NORMAL_TOLERANCE: Final[float] = 1e-12
ROOT_MARGIN: Final[float] = 1e-12

# Random cube benchmark: particles per unit volume
CUBE_DENSITY: Final[float] = 2500.0

# Lookup-table entry for a shifted multi-index outside the table
SENTINEL: Final[int] = -1

REPORT_COLUMNS: Final[Tuple[str, ...]] = (
    "N",
    "p",
    "theta",
    "n0",
    "workers",
    "time_direct_s",
    "time_tree_s",
    "speedup",
    "error_E",
    "farfield_evals",
    "direct_evals",
)
