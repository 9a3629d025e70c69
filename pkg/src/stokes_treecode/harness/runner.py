"""Single benchmark runs: generate or load particles, time, compare, report."""

from __future__ import annotations

import dataclasses
import logging
import pathlib
import sys
import time
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from ..engine import TreecodeParams, prepare
from ..errors import ParameterError
from ..kernels import KernelSelection, ParticleSet, parallel_direct_velocity
from ..testcases import (
    CubeCaseConfig,
    SphereCaseConfig,
    cube_particles,
    sphere_particles,
)
from .io import read_particles
from .report import BenchReport, BenchRow, relative_error

logger = logging.getLogger(__name__)

MODES = ("tree", "direct", "both")
TESTCASES = ("sphere", "cube", "file")
FORMATS = ("csv", "human")
SHRINK_MODES = ("auto", "on", "off")


@dataclass
class RunConfig:
    """Everything one benchmark run needs; ``validate`` before computing."""

    mode: str = "both"
    testcase: str = "sphere"
    params: TreecodeParams = field(default_factory=TreecodeParams)
    shrink: str = "auto"
    sphere: SphereCaseConfig = field(default_factory=SphereCaseConfig)
    cube: CubeCaseConfig = field(default_factory=CubeCaseConfig)
    input_path: Optional[pathlib.Path] = None
    out: Optional[pathlib.Path] = None
    fmt: str = "human"
    memory: bool = False

    def validate(self) -> None:
        for name, value, allowed in (
            ("mode", self.mode, MODES),
            ("testcase", self.testcase, TESTCASES),
            ("format", self.fmt, FORMATS),
            ("shrink", self.shrink, SHRINK_MODES),
        ):
            if value not in allowed:
                raise ParameterError(f"{name} must be one of {allowed}, got {value!r}")
        self.params.validate()
        if self.testcase == "sphere":
            self.sphere.validate()
        elif self.testcase == "cube":
            self.cube.validate()
        elif self.input_path is None:
            raise ParameterError("testcase 'file' needs an input path (--input)")

    def resolved_params(self) -> TreecodeParams:
        """Params with shrink resolved: 'auto' is on for the sphere only."""
        if self.shrink == "auto":
            shrink = self.testcase == "sphere"
        else:
            shrink = self.shrink == "on"
        return dataclasses.replace(self.params, shrink=shrink)


@dataclass
class RunOutcome:
    row: BenchRow
    u_direct: Optional[np.ndarray] = None
    u_tree: Optional[np.ndarray] = None


def load_particles(config: RunConfig) -> ParticleSet:
    if config.testcase == "sphere":
        return sphere_particles(config.sphere)
    if config.testcase == "cube":
        return cube_particles(config.cube)
    return read_particles(config.input_path)  # type: ignore[arg-type]


def peak_rss_mb() -> Optional[float]:
    """Peak resident set size of this process in MiB, None if unavailable."""
    try:
        import resource
    except ImportError:  # pragma: no cover - non-Unix
        return None
    peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    # bytes on macOS, KiB elsewhere
    return peak / 2**20 if sys.platform == "darwin" else peak / 2**10


_warmed = False


def warm_up() -> None:
    """Compile the numba kernels once so timings exclude JIT compilation."""
    global _warmed
    if _warmed:
        return
    rng = np.random.Generator(np.random.PCG64(0))
    normals = rng.standard_normal((64, 3))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    tiny = ParticleSet(
        rng.uniform(0.0, 1.0, (64, 3)),
        rng.uniform(-1.0, 1.0, (64, 3)),
        rng.uniform(-1.0, 1.0, (64, 3)),
        normals,
    )
    prepare(tiny, TreecodeParams(order=2, leaf_size=4)).evaluate()
    parallel_direct_velocity(tiny)
    _warmed = True
    logger.debug("numba kernels compiled")


def time_direct(
    particles: ParticleSet, sel: KernelSelection, workers: int
) -> Tuple[np.ndarray, float]:
    started = time.perf_counter()
    u = parallel_direct_velocity(particles, sel, workers)
    return u, time.perf_counter() - started


def execute(
    config: RunConfig, particles: Optional[ParticleSet] = None
) -> RunOutcome:
    """Run the configured mode(s) on ``particles`` (loaded when omitted)."""
    config.validate()
    params = config.resolved_params()
    if particles is None:
        particles = load_particles(config)
    sel = params.selection_for(particles)
    particles.validate(sel)
    warm_up()

    row = BenchRow(
        N=particles.count,
        p=params.order,
        theta=params.theta,
        n0=params.leaf_size,
        workers=params.workers,
    )
    outcome = RunOutcome(row)
    if config.mode in ("direct", "both"):
        outcome.u_direct, row.time_direct_s = time_direct(
            particles, sel, params.workers
        )
    if config.mode in ("tree", "both"):
        evaluator = prepare(particles, params)
        result = evaluator.evaluate()
        if config.memory:
            row.moments_bytes = evaluator.moments.nbytes
        outcome.u_tree = result.velocities
        row.time_tree_s = result.timings.total_s
        row.time_build_s = result.timings.build_s
        row.time_moments_s = result.timings.moments_s
        row.time_traversal_s = result.timings.traversal_s
        row.farfield_evals = result.stats.farfield_evals
        row.direct_evals = result.stats.direct_evals
    if config.mode == "both":
        row.error_E = relative_error(outcome.u_direct, outcome.u_tree)
        row.speedup = row.time_direct_s / max(row.time_tree_s, 1e-300)
    if config.memory:
        row.peak_rss_mb = peak_rss_mb()
    logger.info(
        "run: mode=%s N=%d p=%d theta=%g E=%s",
        config.mode,
        row.N,
        row.p,
        row.theta,
        row.error_E,
    )
    return outcome


def write_report(report: BenchReport, out: pathlib.Path, fmt: str) -> None:
    if fmt == "csv":
        report.to_csv(out)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(report.render_human() + "\n", encoding="utf-8")


def run(config: RunConfig) -> BenchReport:
    """Execute one run and return (and optionally write) its report."""
    report = BenchReport([execute(config).row])
    if config.out is not None:
        write_report(report, pathlib.Path(config.out), config.fmt)
    return report
