"""Octree of particle clusters and per-cluster moments.

The tree is stored flattened: clusters are numbered in depth-first
preorder and described by parallel ``node_*`` arrays, which is the layout
the numba traversal consumes. Particles are permuted into tree order at
build so every cluster owns the contiguous range [start, end).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

import numpy as np

from . import _farfield
from .config import DEFAULT_LEAF_SIZE, MAX_TREE_DEPTH, ROOT_MARGIN
from .errors import ParameterError
from .kernels import KernelSelection, ParticleSet, Vec3, _as_point
from .parallel import run_segments
from .taylor import build_multiindex_table, sym_index, table_size

logger = logging.getLogger(__name__)

NO_CHILD = -1


@dataclass(frozen=True, eq=False)
class Cluster:
    """Read-only view of one tree node."""

    index: int
    start: int
    end: int
    center: Vec3
    radius: float
    lo: Vec3
    hi: Vec3
    level: int
    children: Tuple[int, ...]

    @property
    def count(self) -> int:
        return self.end - self.start

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def particle_range(self) -> range:
        return range(self.start, self.end)


@dataclass(frozen=True, eq=False)
class ClusterTree:
    """Flattened octree over a tree-ordered copy of the source particles.

    ``permutation[t]`` is the original index of the particle at tree
    position t and ``inverse`` maps back. ``node_children[c, slot]`` is the
    child in octant ``slot`` (4*x_upper + 2*y_upper + z_upper) or -1.
    """

    particles: ParticleSet
    permutation: np.ndarray
    inverse: np.ndarray
    node_start: np.ndarray
    node_end: np.ndarray
    node_center: np.ndarray
    node_radius: np.ndarray
    node_lo: np.ndarray
    node_hi: np.ndarray
    node_level: np.ndarray
    node_parent: np.ndarray
    node_children: np.ndarray
    leaf_size: int
    shrink: bool

    def __len__(self) -> int:
        return int(self.node_start.shape[0])

    @property
    def node_is_leaf(self) -> np.ndarray:
        return (self.node_children == NO_CHILD).all(axis=1)

    @property
    def depth(self) -> int:
        return int(self.node_level.max())

    @property
    def root(self) -> Cluster:
        return self.cluster(0)

    def cluster(self, index: int) -> Cluster:
        if not 0 <= index < len(self):
            raise ParameterError(f"cluster {index} outside [0, {len(self)})")
        children = tuple(int(c) for c in self.node_children[index] if c != NO_CHILD)
        return Cluster(
            index=index,
            start=int(self.node_start[index]),
            end=int(self.node_end[index]),
            center=self.node_center[index].copy(),
            radius=float(self.node_radius[index]),
            lo=self.node_lo[index].copy(),
            hi=self.node_hi[index].copy(),
            level=int(self.node_level[index]),
            children=children,
        )

    def leaves(self) -> Iterator[Cluster]:
        for index in np.flatnonzero(self.node_is_leaf):
            yield self.cluster(int(index))

    def to_original_order(self, values: np.ndarray) -> np.ndarray:
        """Reorder per-particle rows from tree order to input order."""
        return values[self.inverse]


class _Builder:
    def __init__(self, positions: np.ndarray, leaf_size: int, shrink: bool) -> None:
        self.positions = positions
        self.leaf_size = leaf_size
        self.shrink = shrink
        self.order = np.arange(positions.shape[0], dtype=np.int64)
        self.start: List[int] = []
        self.end: List[int] = []
        self.center: List[np.ndarray] = []
        self.radius: List[float] = []
        self.lo: List[np.ndarray] = []
        self.hi: List[np.ndarray] = []
        self.level: List[int] = []
        self.parent: List[int] = []
        self.children: List[List[int]] = []

    def split(
        self,
        start: int,
        end: int,
        lo: np.ndarray,
        hi: np.ndarray,
        level: int,
        parent: int,
    ) -> int:
        index = len(self.start)
        pts = self.positions[self.order[start:end]]
        if self.shrink:
            lo, hi = pts.min(axis=0), pts.max(axis=0)
        center = 0.5 * (lo + hi)
        radius = float(np.sqrt(((pts - center) ** 2).sum(axis=1).max()))

        self.start.append(start)
        self.end.append(end)
        self.center.append(center)
        self.radius.append(radius)
        self.lo.append(lo)
        self.hi.append(hi)
        self.level.append(level)
        self.parent.append(parent)
        self.children.append([NO_CHILD] * 8)

        if end - start <= self.leaf_size or level >= MAX_TREE_DEPTH:
            return index

        upper = pts >= center
        code = 4 * upper[:, 0] + 2 * upper[:, 1] + upper[:, 2].astype(np.int64)
        perm = np.argsort(code, kind="stable")
        self.order[start:end] = self.order[start:end][perm]
        counts = np.bincount(code, minlength=8)
        offset = start
        for slot in range(8):
            if counts[slot] == 0:
                continue
            bits = np.array([(slot >> 2) & 1, (slot >> 1) & 1, slot & 1], dtype=bool)
            child_lo = np.where(bits, center, lo)
            child_hi = np.where(bits, hi, center)
            self.children[index][slot] = self.split(
                offset, offset + int(counts[slot]), child_lo, child_hi, level + 1, index
            )
            offset += int(counts[slot])
        return index


def build_tree(
    particles: ParticleSet,
    leaf_size: int = DEFAULT_LEAF_SIZE,
    shrink: bool = False,
) -> ClusterTree:
    """Build the cluster octree.

    The root is the bounding cube of all particles, padded by a relative
    margin. Clusters with more than ``leaf_size`` particles are bisected along
    all three axes (ties go to the upper child); empty octants are dropped.
    With ``shrink`` every cluster's box is first tightened to its particles
    and the tightened box is the one that gets bisected.
    """
    if leaf_size < 1:
        raise ParameterError(f"leaf size must be >= 1, got {leaf_size}")
    if particles.count < 1:
        raise ParameterError("cannot build a tree over an empty particle set")

    pos = particles.positions
    lo0, hi0 = pos.min(axis=0), pos.max(axis=0)
    mid = 0.5 * (lo0 + hi0)
    half = 0.5 * float((hi0 - lo0).max()) * (1.0 + ROOT_MARGIN)
    builder = _Builder(pos, int(leaf_size), bool(shrink))
    builder.split(0, particles.count, mid - half, mid + half, 0, NO_CHILD)

    order = builder.order
    inverse = np.empty_like(order)
    inverse[order] = np.arange(order.shape[0], dtype=np.int64)
    tree = ClusterTree(
        particles=particles.take(order),
        permutation=order,
        inverse=inverse,
        node_start=np.array(builder.start, dtype=np.int64),
        node_end=np.array(builder.end, dtype=np.int64),
        node_center=np.array(builder.center, dtype=np.float64).reshape(-1, 3),
        node_radius=np.array(builder.radius, dtype=np.float64),
        node_lo=np.array(builder.lo, dtype=np.float64).reshape(-1, 3),
        node_hi=np.array(builder.hi, dtype=np.float64).reshape(-1, 3),
        node_level=np.array(builder.level, dtype=np.int64),
        node_parent=np.array(builder.parent, dtype=np.int64),
        node_children=np.array(builder.children, dtype=np.int64).reshape(-1, 8),
        leaf_size=int(leaf_size),
        shrink=bool(shrink),
    )
    leaf_counts = (tree.node_end - tree.node_start)[tree.node_is_leaf]
    logger.debug(
        "tree: N=%d clusters=%d leaves=%d depth=%d max_leaf=%d shrink=%s",
        particles.count,
        len(tree),
        leaf_counts.size,
        tree.depth,
        int(leaf_counts.max()),
        shrink,
    )
    return tree


@dataclass(frozen=True, eq=False)
class ClusterMoments:
    """Moments of every cluster at a single order p.

    M[c, j, k] are the Stokeslet moments and Mt[c, j, l, k] the stresslet
    moments; mtrace[c, k] = sum_j Mt[c, j, j, k] and msym[c, s, k] holds
    Mt_ij + Mt_ji in the 6-slot symmetric layout. Arrays of a disabled kernel
    have zero clusters.
    """

    order: int
    selection: KernelSelection
    M: np.ndarray
    Mt: np.ndarray
    mtrace: np.ndarray
    msym: np.ndarray

    @property
    def cluster_count(self) -> int:
        return max(self.M.shape[0], self.Mt.shape[0])

    @property
    def has_stokeslets(self) -> bool:
        return self.selection.stokeslet_enabled

    @property
    def has_stresslets(self) -> bool:
        return self.selection.stresslet_enabled

    @property
    def nbytes(self) -> int:
        return sum(a.nbytes for a in (self.M, self.Mt, self.mtrace, self.msym))

    def for_cluster(self, c: int) -> "ClusterMoments":
        """Moments of cluster ``c`` alone (as cluster 0)."""
        if not 0 <= c < self.cluster_count:
            raise ParameterError(f"cluster {c} outside [0, {self.cluster_count})")

        def pick(arr: np.ndarray) -> np.ndarray:
            return arr[c : c + 1] if arr.shape[0] else arr

        return ClusterMoments(
            self.order,
            self.selection,
            pick(self.M),
            pick(self.Mt),
            pick(self.mtrace),
            pick(self.msym),
        )


def _derive(order: int, sel: KernelSelection, M: np.ndarray, Mt: np.ndarray):
    nc, nterms = Mt.shape[0], Mt.shape[-1]
    mtrace = np.einsum("cjjk->ck", Mt) if nc else np.zeros((0, nterms))
    msym = np.zeros((nc, 6, nterms))
    for i in range(3):
        for j in range(i, 3):
            msym[:, sym_index(i, j)] = Mt[:, i, j] + Mt[:, j, i]
    return ClusterMoments(order, sel, M, Mt, np.ascontiguousarray(mtrace), msym)


def compute_moments(
    tree: ClusterTree,
    order: int,
    sel: Optional[KernelSelection] = None,
    workers: int = 1,
) -> ClusterMoments:
    """Moments of every cluster straight from its own particles.

    M_j^k = sum_n (y^n - y_c)^k f_j^n and Mt_jl^k = sum_n (y^n - y_c)^k
    h_j^n nu_l^n. Clusters are independent, so with ``workers`` > 1 the
    cluster range is split across threads.
    """
    if order < 0:
        raise ParameterError(f"order must be >= 0, got {order}")
    particles = tree.particles
    sel = sel or particles.default_selection()
    particles.validate(sel, check_distinct=False)
    table = build_multiindex_table(order)
    nterms = table_size(order)
    nc = len(tree)
    M = np.zeros((nc if sel.stokeslet_enabled else 0, 3, nterms))
    Mt = np.zeros((nc if sel.stresslet_enabled else 0, 3, 3, nterms))
    pos, forces, dipoles, normals = particles.kernel_arrays(sel)

    def task(start: int, end: int) -> None:
        _farfield.accumulate_moments(
            pos,
            forces,
            dipoles,
            normals,
            tree.node_start[start:end],
            tree.node_end[start:end],
            tree.node_center[start:end],
            nterms,
            table.parent,
            table.parent_axis,
            sel.stokeslet_enabled,
            sel.stresslet_enabled,
            M[start:end] if sel.stokeslet_enabled else M,
            Mt[start:end] if sel.stresslet_enabled else Mt,
            np.empty(nterms),
        )

    run_segments(nc, workers, task)
    moments = _derive(order, sel, M, Mt)
    logger.debug(
        "moments: clusters=%d order=%d terms=%d bytes=%d",
        nc,
        order,
        nterms,
        moments.nbytes,
    )
    return moments


def cluster_moments(
    particles: ParticleSet,
    center: Vec3,
    order: int,
    sel: Optional[KernelSelection] = None,
) -> ClusterMoments:
    """Moments of an arbitrary particle set about ``center`` as one cluster."""
    if order < 0:
        raise ParameterError(f"order must be >= 0, got {order}")
    sel = sel or particles.default_selection()
    particles.validate(sel, check_distinct=False)
    table = build_multiindex_table(order)
    nterms = table_size(order)
    M = np.zeros((1 if sel.stokeslet_enabled else 0, 3, nterms))
    Mt = np.zeros((1 if sel.stresslet_enabled else 0, 3, 3, nterms))
    pos, forces, dipoles, normals = particles.kernel_arrays(sel)
    _farfield.accumulate_moments(
        pos,
        forces,
        dipoles,
        normals,
        np.zeros(1, dtype=np.int64),
        np.full(1, particles.count, dtype=np.int64),
        _as_point("center", center).reshape(1, 3),
        nterms,
        table.parent,
        table.parent_axis,
        sel.stokeslet_enabled,
        sel.stresslet_enabled,
        M,
        Mt,
        np.empty(nterms),
    )
    return _derive(order, sel, M, Mt)


def mac(x: Vec3, cluster: Cluster, theta: float) -> bool:
    """Multipole acceptance: r / R <= theta with R = |x - y_c|; False if R = 0."""
    R = float(np.linalg.norm(_as_point("x", x) - cluster.center))
    if R == 0.0:
        return False
    return cluster.radius / R <= theta
