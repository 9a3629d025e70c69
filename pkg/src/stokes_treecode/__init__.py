"""Treecode for Stokeslet and stresslet sums in three dimensions.

Velocities induced by N regular Stokeslets and stresslets are evaluated in
O(N log N) by a Barnes-Hut style traversal of an octree with Cartesian
Taylor far-field approximations; an exact O(N^2) direct sum is the
reference.
"""

from __future__ import annotations

from .engine import (
    InteractionStats,
    TreecodeEvaluator,
    TreecodeParams,
    VelocityResult,
    parallel_velocity,
    prepare,
    treecode_velocity,
)
from .errors import GeometryError, ParameterError, ParticleFileError, TreecodeError
from .kernels import (
    KernelSelection,
    ParticleSet,
    contracted_direct_velocity,
    direct_velocity_at,
    naive_direct_velocity,
    parallel_direct_velocity,
    stokeslet,
    stresslet,
)
from .testcases import (
    CubeCaseConfig,
    SphereCaseConfig,
    cube_particles,
    sphere_particles,
)
from .tree import ClusterMoments, ClusterTree, build_tree, compute_moments, mac

__version__ = "0.1.0"

__all__ = [
    "ClusterMoments",
    "ClusterTree",
    "CubeCaseConfig",
    "GeometryError",
    "InteractionStats",
    "KernelSelection",
    "ParameterError",
    "ParticleFileError",
    "ParticleSet",
    "SphereCaseConfig",
    "TreecodeError",
    "TreecodeEvaluator",
    "TreecodeParams",
    "VelocityResult",
    "build_tree",
    "compute_moments",
    "contracted_direct_velocity",
    "cube_particles",
    "direct_velocity_at",
    "mac",
    "naive_direct_velocity",
    "parallel_direct_velocity",
    "parallel_velocity",
    "prepare",
    "sphere_particles",
    "stokeslet",
    "stresslet",
    "treecode_velocity",
]
