from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from stokes_treecode.kernels import ParticleSet


def pytest_addoption(parser):
    parser.addoption(
        "--runslow",
        action="store_true",
        default=False,
        help="run full-size benchmark experiments",
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def make_particles(rng, n, stresslets=True, side=1.0, offset=(0.0, 0.0, 0.0)):
    """Random particles in a cube with random unit normals."""
    positions = rng.uniform(0.0, side, size=(n, 3)) + np.asarray(offset)
    forces = rng.uniform(-1.0, 1.0, size=(n, 3))
    if not stresslets:
        return ParticleSet(positions, forces)
    dipoles = rng.uniform(-1.0, 1.0, size=(n, 3))
    normals = rng.standard_normal(size=(n, 3))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    return ParticleSet(positions, forces, dipoles, normals)


def make_cluster(rng, n, center, radius, stresslets=True):
    """Random particles inside the ball of ``radius`` around ``center``."""
    directions = rng.standard_normal(size=(n, 3))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = radius * rng.uniform(0.0, 1.0, size=(n, 1)) ** (1.0 / 3.0)
    positions = np.asarray(center) + radii * directions
    forces = rng.uniform(-1.0, 1.0, size=(n, 3))
    if not stresslets:
        return ParticleSet(positions, forces)
    dipoles = rng.uniform(-1.0, 1.0, size=(n, 3))
    normals = rng.standard_normal(size=(n, 3))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    return ParticleSet(positions, forces, dipoles, normals)


def _central(func, y, k, h):
    """Tensor-product central difference D^k func at y, error O(h^2)."""
    total = 0.0
    axes = []
    for a in range(3):
        axes.append(
            [
                ((k[a] / 2.0 - i) * h, (-1) ** i * math.comb(k[a], i))
                for i in range(k[a] + 1)
            ]
        )
    for combo in itertools.product(*axes):
        shift = np.array([c[0] for c in combo])
        weight = np.prod([c[1] for c in combo])
        total = total + weight * np.asarray(func(y + shift))
    return total / h ** sum(k)


def fd_taylor(func, y, k, h):
    """(1/k!) D_y^k func at y by central differences plus one Richardson step."""
    coarse = _central(func, y, k, h)
    fine = _central(func, y, k, h / 2.0)
    factorial = math.prod(math.factorial(c) for c in k)
    return (4.0 * fine - coarse) / 3.0 / factorial


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))


@pytest.fixture
def small_particles(rng):
    return make_particles(rng, 300)
