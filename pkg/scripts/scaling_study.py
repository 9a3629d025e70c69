#!/usr/bin/env python3
"""Size, strong and weak scaling timings on the random cube.

Usage: PYTHONPATH=src python scripts/scaling_study.py [out_dir]

Size scaling runs N = 50K, 200K, 800K at (theta, p) = (0.5, 6) with the
direct sum for reference; strong scaling runs N = 500K on 1, 2, 4, 8
workers and weak scaling 125K particles per worker, treecode only.
"""

import logging
import sys
from pathlib import Path

from stokes_treecode.engine import TreecodeParams
from stokes_treecode.harness.studies import (
    format_scaling,
    size_scaling,
    strong_scaling,
    weak_scaling,
)
from stokes_treecode.testcases import CubeCaseConfig, cube_particles

WORKERS = [1, 2, 4, 8]


def main(out_dir: str = "results") -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    out = Path(out_dir)
    params = TreecodeParams(order=6, theta=0.5)

    sizes = size_scaling([50_000, 200_000, 800_000], params)
    sizes.to_csv(out / "size_scaling.csv")
    print(sizes.render_human())
    rows = sizes.rows
    for small, large in zip(rows, rows[1:]):
        print(
            f"N {small.N} -> {large.N}: "
            f"direct x{large.time_direct_s / small.time_direct_s:.1f}, "
            f"tree x{large.time_tree_s / small.time_tree_s:.1f}"
        )

    particles = cube_particles(CubeCaseConfig(n=500_000))
    strong = strong_scaling(particles, WORKERS, params, direct=False)
    strong.to_csv(out / "strong_scaling.csv")
    print("\nstrong scaling")
    print(format_scaling(strong))

    weak = weak_scaling(125_000, WORKERS, params)
    weak.to_csv(out / "weak_scaling.csv")
    print("\nweak scaling")
    print(format_scaling(weak, weak=True))
    return 0


if __name__ == "__main__":
    sys.exit(main(*sys.argv[1:2]))
