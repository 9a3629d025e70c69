"""Multi-run experiments: accuracy sweeps and size/strong/weak scaling.

Every study returns a :class:`BenchReport`; the direct-sum reference of a
particle set is computed once and shared by all treecode runs on it.
"""

from __future__ import annotations

import dataclasses
import logging
from typing import Optional, Sequence

from ..config import CUBE_DENSITY, DEFAULT_SEED
from ..engine import TreecodeParams, prepare
from ..errors import ParameterError
from ..kernels import ParticleSet
from ..testcases import CubeCaseConfig, cube_particles
from .report import BenchReport, BenchRow, relative_error
from .runner import time_direct, warm_up

logger = logging.getLogger(__name__)

SWEEP_ORDERS = (0, 2, 4, 6, 8, 10)
SWEEP_THETAS = (0.8, 0.5, 0.2)


def _tree_row(
    particles: ParticleSet,
    params: TreecodeParams,
    u_direct=None,
    time_direct_s: Optional[float] = None,
) -> BenchRow:
    evaluator = prepare(particles, params)
    result = evaluator.evaluate()
    row = BenchRow(
        N=particles.count,
        p=params.order,
        theta=params.theta,
        n0=params.leaf_size,
        workers=result.workers,
        time_direct_s=time_direct_s,
        time_tree_s=result.timings.total_s,
        farfield_evals=result.stats.farfield_evals,
        direct_evals=result.stats.direct_evals,
        time_build_s=result.timings.build_s,
        time_moments_s=result.timings.moments_s,
        time_traversal_s=result.timings.traversal_s,
        moments_bytes=evaluator.moments.nbytes,
    )
    if u_direct is not None:
        row.error_E = relative_error(u_direct, result.velocities)
    if time_direct_s is not None:
        row.speedup = time_direct_s / max(result.timings.total_s, 1e-300)
    return row


def parameter_sweep(
    particles: ParticleSet,
    base: Optional[TreecodeParams] = None,
    orders: Sequence[int] = SWEEP_ORDERS,
    thetas: Sequence[float] = SWEEP_THETAS,
) -> BenchReport:
    """Error and speedup over the (theta, p) grid for one particle set."""
    base = base or TreecodeParams()
    base.validate()
    sel = base.selection_for(particles)
    warm_up()
    u_direct, t_direct = time_direct(particles, sel, base.workers)
    report = BenchReport()
    for theta in thetas:
        for order in orders:
            params = dataclasses.replace(base, order=int(order), theta=float(theta))
            params.validate()
            row = _tree_row(particles, params, u_direct, t_direct)
            logger.info("sweep theta=%g p=%d E=%.3e", theta, order, row.error_E)
            report.append(row)
    return report


def size_scaling(
    sizes: Sequence[int],
    base: Optional[TreecodeParams] = None,
    density: float = CUBE_DENSITY,
    seed: int = DEFAULT_SEED,
    direct: bool = True,
) -> BenchReport:
    """Direct and treecode times on random cubes of growing N at fixed density."""
    base = base or TreecodeParams()
    base.validate()
    warm_up()
    report = BenchReport()
    for n in sizes:
        particles = cube_particles(CubeCaseConfig(n=int(n), density=density, seed=seed))
        u_direct = t_direct = None
        if direct:
            u_direct, t_direct = time_direct(
                particles, base.selection_for(particles), base.workers
            )
        report.append(_tree_row(particles, base, u_direct, t_direct))
        logger.info("size scaling N=%d done", n)
    return report


def strong_scaling(
    particles: ParticleSet,
    workers_list: Sequence[int],
    base: Optional[TreecodeParams] = None,
    direct: bool = True,
) -> BenchReport:
    """Fixed problem, growing worker count; both sums are parallelized."""
    base = base or TreecodeParams()
    if not workers_list:
        raise ParameterError("workers list is empty")
    warm_up()
    report = BenchReport()
    for workers in workers_list:
        params = dataclasses.replace(base, workers=int(workers))
        params.validate()
        u_direct = t_direct = None
        if direct:
            u_direct, t_direct = time_direct(
                particles, params.selection_for(particles), params.workers
            )
        report.append(_tree_row(particles, params, u_direct, t_direct))
    return report


def weak_scaling(
    base_n: int,
    workers_list: Sequence[int],
    base: Optional[TreecodeParams] = None,
    density: float = CUBE_DENSITY,
    seed: int = DEFAULT_SEED,
    direct: bool = False,
) -> BenchReport:
    """N grows with the worker count (N = base_n * workers) at fixed density."""
    base = base or TreecodeParams()
    if not workers_list:
        raise ParameterError("workers list is empty")
    warm_up()
    report = BenchReport()
    for workers in workers_list:
        params = dataclasses.replace(base, workers=int(workers))
        params.validate()
        cfg = CubeCaseConfig(n=int(base_n) * int(workers), density=density, seed=seed)
        particles = cube_particles(cfg)
        u_direct = t_direct = None
        if direct:
            u_direct, t_direct = time_direct(
                particles, params.selection_for(particles), params.workers
            )
        report.append(_tree_row(particles, params, u_direct, t_direct))
    return report


def format_scaling(report: BenchReport, weak: bool = False) -> str:
    """Speedup t_1/t_np and parallel efficiency relative to the first row.

    Strong scaling: PE = t_1 / (np * t_np) with np relative to the first row's
    worker count. Weak scaling: PE = t_1 / t_np.
    """
    if not report.rows:
        return ""
    first = report.rows[0]
    lines = [f"{'np':>4} {'N':>9} {'t[s]':>10} {'t1/t':>7} {'PE%':>6}"]
    for row in report.rows:
        t = row.time_tree_s or 0.0
        ratio = (first.time_tree_s or 0.0) / t if t > 0 else float("nan")
        if weak:
            pe = ratio
        else:
            pe = ratio * first.workers / row.workers
        lines.append(
            f"{row.workers:>4d} {row.N:>9d} {t:>10.4f} {ratio:>7.2f} {100 * pe:>6.1f}"
        )
    return "\n".join(lines)
