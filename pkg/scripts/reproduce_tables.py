#!/usr/bin/env python3
"""Accuracy/speedup tables over the (theta, p) grid.

Usage: PYTHONPATH=src python scripts/reproduce_tables.py [levels] [cube_n] [out_dir]

Runs the sweep on the sphere case (box shrinking on, once with radial and
once with random normals) and on the random cube (Stokeslets only), writes
one CSV per case and prints the error and speedup tables with rows p and
columns theta.
"""

import logging
import sys
from pathlib import Path

import pandas as pd

from stokes_treecode.engine import TreecodeParams
from stokes_treecode.harness.report import BenchReport
from stokes_treecode.harness.studies import parameter_sweep
from stokes_treecode.testcases import (
    CubeCaseConfig,
    SphereCaseConfig,
    cube_particles,
    sphere_particles,
)


def print_tables(name: str, report: BenchReport) -> None:
    frame = report.to_frame()
    for column, title in (("error_E", "E"), ("speedup", "d/t")):
        table = frame.pivot(index="p", columns="theta", values=column)
        table = table[sorted(table.columns, reverse=True)]
        print(f"\n{name}: {title}  (N={report.rows[0].N}, N0={report.rows[0].n0})")
        with pd.option_context("display.float_format", "{:.2e}".format):
            print(table.to_string())


def main(levels: int = 5, cube_n: int = 100_000, out_dir: str = "results") -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    out = Path(out_dir)
    cases = (
        (
            f"sphere_L{levels}",
            sphere_particles(SphereCaseConfig(levels=levels)),
            TreecodeParams(shrink=True),
        ),
        (
            f"sphere_L{levels}_random_normals",
            sphere_particles(SphereCaseConfig(levels=levels, normals="random")),
            TreecodeParams(shrink=True),
        ),
        (
            f"cube_N{cube_n}",
            cube_particles(CubeCaseConfig(n=cube_n)),
            TreecodeParams(),
        ),
    )
    for name, particles, params in cases:
        report = parameter_sweep(particles, params)
        report.to_csv(out / f"sweep_{name}.csv")
        print_tables(name, report)
    print(f"\nWrote sweeps to {out}")
    return 0


if __name__ == "__main__":
    args = sys.argv[1:]
    levels = int(args[0]) if args else 5
    cube_n = int(args[1]) if len(args) > 1 else 100_000
    sys.exit(main(levels, cube_n, *args[2:3]))
