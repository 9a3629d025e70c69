"""Treecode driver: prepare the replicated data, traverse, gather.

``prepare`` builds the tree and moments once; the returned
:class:`TreecodeEvaluator` is immutable and can be evaluated any number of
times, with any worker count. Workers own disjoint contiguous segments of
the tree-ordered targets and write only to those segments, so the result is
bit-identical for every worker count.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _traversal
from .config import (
    DEFAULT_LEAF_SIZE,
    DEFAULT_ORDER,
    DEFAULT_THETA,
    DEFAULT_WORKERS,
    MAX_ORDER,
)
from .errors import ParameterError
from .kernels import (
    KernelSelection,
    ParticleSet,
    Vec3,
    _as_point,
    _as_vectors,
    check_finite,
)
from .parallel import run_segments
from .taylor import (
    MultiIndexTable,
    build_multiindex_table,
    coefficient_order,
    table_size,
)
from .tree import ClusterMoments, ClusterTree, build_tree, compute_moments

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TreecodeParams:
    """User parameters of a treecode evaluation.

    ``kernels`` of None means "whatever weights the particle set carries".
    """

    order: int = DEFAULT_ORDER
    theta: float = DEFAULT_THETA
    leaf_size: int = DEFAULT_LEAF_SIZE
    shrink: bool = False
    kernels: Optional[KernelSelection] = None
    workers: int = DEFAULT_WORKERS

    def validate(self) -> None:
        if not 0 <= self.order <= MAX_ORDER:
            raise ParameterError(
                f"order p must be in [0, {MAX_ORDER}], got {self.order}"
            )
        if not 0.0 < self.theta < 1.0:
            raise ParameterError(
                f"MAC parameter theta must satisfy 0 < theta < 1, got {self.theta}"
            )
        if self.leaf_size < 1:
            raise ParameterError(f"leaf size N0 must be >= 1, got {self.leaf_size}")
        if self.workers < 1:
            raise ParameterError(f"workers must be >= 1, got {self.workers}")
        if self.kernels is not None:
            self.kernels.validate()

    def selection_for(self, particles: ParticleSet) -> KernelSelection:
        return self.kernels or particles.default_selection()


@dataclass
class InteractionStats:
    """Traversal counters summed over all targets."""

    farfield_evals: int = 0
    direct_evals: int = 0
    direct_pairs: int = 0
    visited_clusters: int = 0

    @classmethod
    def from_counters(
        cls,
        n_far: np.ndarray,
        n_leaf: np.ndarray,
        n_pairs: np.ndarray,
        n_visit: np.ndarray,
    ) -> "InteractionStats":
        return cls(
            int(n_far.sum()),
            int(n_leaf.sum()),
            int(n_pairs.sum()),
            int(n_visit.sum()),
        )

    def __add__(self, other: "InteractionStats") -> "InteractionStats":
        return InteractionStats(
            self.farfield_evals + other.farfield_evals,
            self.direct_evals + other.direct_evals,
            self.direct_pairs + other.direct_pairs,
            self.visited_clusters + other.visited_clusters,
        )


@dataclass
class PhaseTimings:
    build_s: float = 0.0
    moments_s: float = 0.0
    traversal_s: float = 0.0

    @property
    def total_s(self) -> float:
        return self.build_s + self.moments_s + self.traversal_s


@dataclass
class VelocityResult:
    """Velocities in input particle order plus traversal stats and timings."""

    velocities: np.ndarray
    stats: InteractionStats = field(default_factory=InteractionStats)
    timings: PhaseTimings = field(default_factory=PhaseTimings)
    workers: int = 1

    @property
    def wall_time_s(self) -> float:
        return self.timings.total_s


class TreecodeEvaluator:
    """Tree, moments and tables for one particle set and parameter set.

    Build through :func:`prepare`. Instances hold only read-only arrays; all
    scratch is private to each traversal call.
    """

    def __init__(
        self,
        particles: ParticleSet,
        params: TreecodeParams,
        selection: KernelSelection,
        tree: ClusterTree,
        moments: ClusterMoments,
        table: MultiIndexTable,
        timings: PhaseTimings,
    ) -> None:
        self.particles = particles
        self.params = params
        self.selection = selection
        self.tree = tree
        self.moments = moments
        self.table = table
        self.timings = timings
        self._node_is_leaf = tree.node_is_leaf
        self._stack_size = 7 * (tree.depth + 1) + 8

    @property
    def order(self) -> int:
        return self.params.order

    @property
    def coefficient_order(self) -> int:
        return coefficient_order(self.params.order, self.selection)

    def _traverse(
        self,
        points: np.ndarray,
        skip: np.ndarray,
        out: np.ndarray,
        counters: np.ndarray,
        root: int = 0,
    ) -> None:
        tree = self.tree
        table = self.table
        pos, forces, dipoles, normals = tree.particles.kernel_arrays(self.selection)
        m = self.moments
        _traversal.traverse(
            points,
            skip,
            root,
            self.params.theta,
            tree.node_start,
            tree.node_end,
            tree.node_center,
            tree.node_radius,
            self._node_is_leaf,
            tree.node_children,
            self._stack_size,
            pos,
            forces,
            dipoles,
            normals,
            self.selection.stokeslet_enabled,
            self.selection.stresslet_enabled,
            m.M,
            m.Mt,
            m.mtrace,
            m.msym,
            table_size(self.params.order),
            table_size(self.coefficient_order),
            table.grades,
            table.entries,
            table.shift_lut,
            table.plus_minus,
            table.plus_plus,
            table.plus_plus_minus,
            out,
            counters[0],
            counters[1],
            counters[2],
            counters[3],
        )

    def _run(
        self, points: np.ndarray, skip: np.ndarray, workers: int
    ) -> "tuple[np.ndarray, InteractionStats]":
        n = points.shape[0]
        out = np.zeros((n, 3))
        counters = np.zeros((4, n), dtype=np.int64)

        def task(start: int, end: int) -> None:
            self._traverse(
                points[start:end],
                skip[start:end],
                out[start:end],
                counters[:, start:end],
            )

        run_segments(n, workers, task)
        return out, InteractionStats.from_counters(*counters)

    def evaluate(self, workers: Optional[int] = None) -> VelocityResult:
        """Velocity at every source particle, self term excluded."""
        workers = self.params.workers if workers is None else int(workers)
        if workers < 1:
            raise ParameterError(f"workers must be >= 1, got {workers}")
        tree_particles = self.tree.particles
        skip = np.arange(tree_particles.count, dtype=np.int64)
        started = time.perf_counter()
        out, stats = self._run(tree_particles.positions, skip, workers)
        elapsed = time.perf_counter() - started
        check_finite(out, "treecode produced non-finite velocities")
        timings = PhaseTimings(self.timings.build_s, self.timings.moments_s, elapsed)
        logger.info(
            "treecode: N=%d p=%d theta=%g workers=%d far=%d leaf=%d time=%.3fs",
            tree_particles.count,
            self.params.order,
            self.params.theta,
            workers,
            stats.farfield_evals,
            stats.direct_evals,
            timings.total_s,
        )
        return VelocityResult(
            velocities=self.tree.to_original_order(out),
            stats=stats,
            timings=timings,
            workers=workers,
        )

    def velocity_at(self, points, workers: Optional[int] = None) -> np.ndarray:
        """Treecode velocity at arbitrary evaluation points (no self exclusion).

        A point coinciding with a source particle is a GeometryError.
        """
        workers = self.params.workers if workers is None else int(workers)
        pts = _as_vectors("points", points)
        skip = np.full(pts.shape[0], -1, dtype=np.int64)
        out, _ = self._run(pts, skip, workers)
        check_finite(out, "evaluation point coincides with a source particle")
        return out

    def compute_velocity(
        self, x: Vec3, target_index: int = -1, cluster: int = 0
    ) -> np.ndarray:
        """Contribution of the subtree under ``cluster`` at ``x``.

        ``target_index`` (input order) is the source excluded from leaf direct
        sums; -1 excludes nothing.
        """
        point = _as_point("x", x).reshape(1, 3)
        if not 0 <= cluster < len(self.tree):
            raise ParameterError(f"cluster {cluster} outside [0, {len(self.tree)})")
        if target_index >= self.particles.count or target_index < -1:
            raise ParameterError(
                f"target index {target_index} outside [-1, {self.particles.count})"
            )
        skip = np.array(
            [-1 if target_index < 0 else self.tree.inverse[target_index]],
            dtype=np.int64,
        )
        out = np.zeros((1, 3))
        counters = np.zeros((4, 1), dtype=np.int64)
        self._traverse(point, skip, out, counters, root=cluster)
        check_finite(out, "evaluation point coincides with a source particle")
        return out[0]


def prepare(
    particles: ParticleSet, params: Optional[TreecodeParams] = None
) -> TreecodeEvaluator:
    """Validate inputs, build the tree and compute all moments."""
    params = params or TreecodeParams()
    params.validate()
    sel = params.selection_for(particles)
    particles.validate(sel)

    started = time.perf_counter()
    tree = build_tree(particles, params.leaf_size, params.shrink)
    built = time.perf_counter()
    moments = compute_moments(tree, params.order, sel, workers=params.workers)
    done = time.perf_counter()
    table = build_multiindex_table(coefficient_order(params.order, sel))
    timings = PhaseTimings(build_s=built - started, moments_s=done - built)
    logger.debug(
        "prepared: build=%.3fs moments=%.3fs clusters=%d",
        timings.build_s,
        timings.moments_s,
        len(tree),
    )
    return TreecodeEvaluator(particles, params, sel, tree, moments, table, timings)


def treecode_velocity(
    particles: ParticleSet, params: Optional[TreecodeParams] = None
) -> VelocityResult:
    """Treecode velocity at every particle on a single worker."""
    return prepare(particles, params).evaluate(workers=1)


def parallel_velocity(
    particles: ParticleSet, params: Optional[TreecodeParams] = None
) -> VelocityResult:
    """Treecode velocity with targets split over ``params.workers`` threads."""
    params = params or TreecodeParams()
    return prepare(particles, params).evaluate(workers=params.workers)
