"""Benchmark harness: particle files, reports, runs, studies and the CLI."""

from __future__ import annotations

from .io import read_particles, write_particles
from .report import BenchReport, BenchRow, relative_error
from .runner import RunConfig, execute, run

__all__ = [
    "BenchReport",
    "BenchRow",
    "RunConfig",
    "execute",
    "read_particles",
    "relative_error",
    "run",
    "write_particles",
]
