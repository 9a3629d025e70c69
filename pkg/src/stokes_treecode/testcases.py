"""Benchmark particle sets: the refined icosahedral sphere and the random cube.

Weights come from ``numpy.random.Generator`` over the PCG64 bit generator,
seeded explicitly, so a config always produces byte-identical particles.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from .config import CUBE_DENSITY, DEFAULT_SEED
from .errors import ParameterError
from .kernels import ParticleSet

logger = logging.getLogger(__name__)

GOLDEN_RATIO = (1.0 + 5.0**0.5) / 2.0


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


SPHERE_NORMALS = ("radial", "random")


@dataclass(frozen=True)
class SphereCaseConfig:
    """Refinement level, seed and normal field of the sphere case.

    ``normals="radial"`` uses the outward surface normal. With it every
    source on the sphere sees (x - y) . nu(y) = -|x - y|^2 / 2, so the
    stresslet is no more singular than the Stokeslet. ``"random"`` draws
    isotropic unit normals instead.
    """

    levels: int = 5
    seed: int = DEFAULT_SEED
    normals: str = "radial"

    @property
    def count(self) -> int:
        return 20 * 4**self.levels

    def validate(self) -> None:
        if self.levels < 0:
            raise ParameterError(f"refinement level must be >= 0, got {self.levels}")
        if self.normals not in SPHERE_NORMALS:
            raise ParameterError(
                f"sphere normals must be one of {SPHERE_NORMALS}, got {self.normals!r}"
            )


@dataclass(frozen=True)
class CubeCaseConfig:
    """Random particles at fixed number density in [0, L]^3."""

    n: int = 10000
    density: float = CUBE_DENSITY
    seed: int = DEFAULT_SEED
    stresslets: bool = False

    @property
    def side(self) -> float:
        return float((self.n / self.density) ** (1.0 / 3.0))

    def validate(self) -> None:
        if self.n < 1:
            raise ParameterError(f"particle count must be >= 1, got {self.n}")
        if not self.density > 0.0:
            raise ParameterError(f"number density must be > 0, got {self.density}")


def _normalize(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def icosahedron() -> np.ndarray:
    """The 20 faces of the unit icosahedron as a (20, 3, 3) vertex array.

    Vertices are the cyclic permutations of (0, +-1, +-phi); faces are the
    vertex triples at mutual distance 2 (the edge length before scaling).
    """
    verts = []
    for s1, s2 in itertools.product((-1.0, 1.0), repeat=2):
        base = (0.0, s1, s2 * GOLDEN_RATIO)
        for shift in range(3):
            verts.append(base[-shift:] + base[:-shift] if shift else base)
    v = np.array(verts)
    faces = [
        (a, b, c)
        for a, b, c in itertools.combinations(range(12), 3)
        if np.isclose(np.linalg.norm(v[a] - v[b]), 2.0)
        and np.isclose(np.linalg.norm(v[b] - v[c]), 2.0)
        and np.isclose(np.linalg.norm(v[a] - v[c]), 2.0)
    ]
    return _normalize(v)[np.array(faces)]


def subdivide(faces: np.ndarray) -> np.ndarray:
    """Split every triangle into four, pushing edge midpoints to the sphere."""
    a, b, c = faces[:, 0], faces[:, 1], faces[:, 2]
    ab, bc, ca = _normalize(a + b), _normalize(b + c), _normalize(c + a)
    children = np.stack(
        [
            np.stack([a, ab, ca], axis=1),
            np.stack([ab, b, bc], axis=1),
            np.stack([ca, bc, c], axis=1),
            np.stack([ab, bc, ca], axis=1),
        ],
        axis=1,
    )
    return children.reshape(-1, 3, 3)


def sphere_particles(cfg: SphereCaseConfig) -> ParticleSet:
    """Centroids of a geodesic sphere triangulation with N = 20 * 4**L faces.

    Force and dipole components are uniform in [-1, 1], forces drawn
    first. Normals are the (outward) positions, or with ``normals="random"``
    isotropic unit vectors drawn after the dipoles.
    """
    cfg.validate()
    faces = icosahedron()
    for _ in range(cfg.levels):
        faces = subdivide(faces)
    positions = _normalize(faces.mean(axis=1))
    rng = make_rng(cfg.seed)
    n = positions.shape[0]
    forces = rng.uniform(-1.0, 1.0, size=(n, 3))
    dipoles = rng.uniform(-1.0, 1.0, size=(n, 3))
    if cfg.normals == "random":
        normals = _normalize(rng.standard_normal(size=(n, 3)))
    else:
        normals = positions.copy()
    logger.debug(
        "sphere case: L=%d N=%d seed=%d normals=%s",
        cfg.levels,
        n,
        cfg.seed,
        cfg.normals,
    )
    return ParticleSet(positions, forces, dipoles, normals)


def cube_particles(cfg: CubeCaseConfig) -> ParticleSet:
    """Uniform random particles in [0, L]^3 with L = (N / density)**(1/3).

    Positions are drawn first, then forces; with ``stresslets`` the dipoles
    and random unit normals follow.
    """
    cfg.validate()
    rng = make_rng(cfg.seed)
    side = cfg.side
    positions = rng.uniform(0.0, side, size=(cfg.n, 3))
    forces = rng.uniform(-1.0, 1.0, size=(cfg.n, 3))
    dipoles = normals = None
    if cfg.stresslets:
        dipoles = rng.uniform(-1.0, 1.0, size=(cfg.n, 3))
        normals = _normalize(rng.standard_normal(size=(cfg.n, 3)))
    logger.debug("cube case: N=%d L=%.6g seed=%d", cfg.n, side, cfg.seed)
    return ParticleSet(positions, forces, dipoles, normals)
