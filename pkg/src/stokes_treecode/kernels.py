"""Stokeslet and stresslet kernels, particle containers and direct sums.

The kernels are used without physical prefactors:

    S_ij(x, y)  = delta_ij / |x - y| + (x_i - y_i)(x_j - y_j) / |x - y|^3
    T_ijl(x, y) = (x_i - y_i)(x_j - y_j)(x_l - y_l) / |x - y|^5

Applications multiply by their own constants (e.g. 1/(8 pi mu)).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import _direct
from .config import NORMAL_TOLERANCE
from .errors import GeometryError, ParameterError
from .parallel import run_segments

logger = logging.getLogger(__name__)

# A point or vector in R^3: float64 array of shape (3,)
Vec3 = np.ndarray

_EMPTY = np.zeros((0, 3), dtype=np.float64)


def _as_vectors(name: str, value, count: Optional[int] = None) -> np.ndarray:
    arr = np.ascontiguousarray(value, dtype=np.float64)
    if arr.ndim == 1 and arr.shape[0] == 3:
        arr = arr.reshape(1, 3)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ParameterError(f"{name} must have shape (N, 3), got {arr.shape}")
    if count is not None and arr.shape[0] != count:
        raise ParameterError(
            f"{name} has {arr.shape[0]} rows, expected {count} (one per particle)"
        )
    if not np.isfinite(arr).all():
        raise GeometryError(f"{name} contains NaN or Inf")
    return arr


def _as_point(name: str, value) -> Vec3:
    arr = np.asarray(value, dtype=np.float64).reshape(-1)
    if arr.shape != (3,):
        raise ParameterError(f"{name} must have 3 components, got {arr.shape}")
    if not np.isfinite(arr).all():
        raise GeometryError(f"{name} contains NaN or Inf")
    return arr


@dataclass(frozen=True)
class KernelSelection:
    """Which kernels contribute to the velocity."""

    stokeslet_enabled: bool = True
    stresslet_enabled: bool = True

    def validate(self) -> None:
        if not (self.stokeslet_enabled or self.stresslet_enabled):
            raise ParameterError("at least one of stokeslet/stresslet must be enabled")

    @property
    def name(self) -> str:
        if self.stokeslet_enabled and self.stresslet_enabled:
            return "both"
        return "stokeslet" if self.stokeslet_enabled else "stresslet"

    @classmethod
    def from_name(cls, name: str) -> "KernelSelection":
        choices = {
            "both": cls(True, True),
            "stokeslet": cls(True, False),
            "stresslet": cls(False, True),
        }
        try:
            return choices[name]
        except KeyError:
            raise ParameterError(
                f"unknown kernel selection {name!r}; use one of {sorted(choices)}"
            ) from None


@dataclass(frozen=True, eq=False)
class ParticleSet:
    """Source/target particles as parallel (N, 3) arrays.

    ``forces`` are the Stokeslet weights f, ``dipoles`` and ``normals`` the
    stresslet weights h and nu. Stresslet arrays may be omitted together
    when only Stokeslets are used.
    """

    positions: np.ndarray
    forces: Optional[np.ndarray] = None
    dipoles: Optional[np.ndarray] = None
    normals: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        pos = _as_vectors("positions", self.positions)
        count = pos.shape[0]
        object.__setattr__(self, "positions", pos)
        for name in ("forces", "dipoles", "normals"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, _as_vectors(name, value, count))
        if (self.dipoles is None) != (self.normals is None):
            raise ParameterError("dipoles and normals must be given together")

    @property
    def count(self) -> int:
        return int(self.positions.shape[0])

    def __len__(self) -> int:
        return self.count

    @property
    def has_stokeslets(self) -> bool:
        return self.forces is not None

    @property
    def has_stresslets(self) -> bool:
        return self.dipoles is not None

    def default_selection(self) -> KernelSelection:
        return KernelSelection(self.has_stokeslets, self.has_stresslets)

    def validate(
        self, sel: KernelSelection, *, check_distinct: bool = True
    ) -> None:
        """Check the set can be summed with ``sel``.

        Raises ParameterError for missing weights or non-unit normals and
        GeometryError for coincident particles.
        """
        sel.validate()
        if self.count < 1:
            raise ParameterError("particle set is empty")
        if sel.stokeslet_enabled and self.forces is None:
            raise ParameterError("Stokeslets enabled but no force weights given")
        if sel.stresslet_enabled:
            if self.dipoles is None or self.normals is None:
                raise ParameterError(
                    "stresslets enabled but dipole weights/normals are missing"
                )
            lengths = np.linalg.norm(self.normals, axis=1)
            worst = int(np.argmax(np.abs(lengths - 1.0)))
            if abs(lengths[worst] - 1.0) > NORMAL_TOLERANCE:
                raise ParameterError(
                    f"normal of particle {worst} has length {lengths[worst]!r}; "
                    "normals must be unit vectors"
                )
        if check_distinct and self.count > 1:
            _, first, counts = np.unique(
                self.positions, axis=0, return_index=True, return_counts=True
            )
            if (counts > 1).any():
                dup = int(first[np.argmax(counts > 1)])
                raise GeometryError(
                    f"particle {dup} shares its position with another particle"
                )

    def take(self, order: np.ndarray) -> "ParticleSet":
        """Return a reordered copy (rows ``order`` of every array)."""

        def pick(arr: Optional[np.ndarray]) -> Optional[np.ndarray]:
            return None if arr is None else np.ascontiguousarray(arr[order])

        return ParticleSet(
            pick(self.positions),
            pick(self.forces),
            pick(self.dipoles),
            pick(self.normals),
        )

    def kernel_arrays(
        self, sel: KernelSelection
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(positions, forces, dipoles, normals) with empty stand-ins for
        disabled kernels, in the layout the numba kernels expect."""
        forces = self.forces if sel.stokeslet_enabled else _EMPTY
        dipoles = self.dipoles if sel.stresslet_enabled else _EMPTY
        normals = self.normals if sel.stresslet_enabled else _EMPTY
        return self.positions, forces, dipoles, normals  # type: ignore[return-value]


def _separation(x, y) -> Vec3:
    d = _as_point("x", x) - _as_point("y", y)
    if not d.any():
        raise GeometryError("kernel evaluated at coincident points x == y")
    return d


def stokeslet(x: Vec3, y: Vec3) -> np.ndarray:
    """Stokeslet tensor S_ij(x, y) as a (3, 3) array."""
    out = np.empty((3, 3))
    _direct.stokeslet_tensor(_separation(x, y), out)
    return out


def stresslet(x: Vec3, y: Vec3) -> np.ndarray:
    """Stresslet tensor T_ijl(x, y) as a (3, 3, 3) array."""
    out = np.empty((3, 3, 3))
    _direct.stresslet_tensor(_separation(x, y), out)
    return out


def naive_direct_velocity(
    particles: ParticleSet, sel: Optional[KernelSelection] = None
) -> np.ndarray:
    """O(N^2) velocity forming the kernel tensors for every pair.

    This is the reference the faster paths are checked against.
    """
    sel = sel or particles.default_selection()
    particles.validate(sel)
    pos, forces, dipoles, normals = particles.kernel_arrays(sel)
    out = np.zeros((particles.count, 3))
    _direct.naive_direct(
        pos,
        forces,
        dipoles,
        normals,
        sel.stokeslet_enabled,
        sel.stresslet_enabled,
        out,
    )
    return out


def contracted_direct_velocity(
    particles: ParticleSet,
    sel: Optional[KernelSelection] = None,
    targets: Optional[range] = None,
    *,
    validate: bool = True,
) -> np.ndarray:
    """Direct-sum velocity at the particles in ``targets`` (default: all).

    Uses the contracted pair terms s = (d.f)/r^3 and t = (d.h)(d.nu)/r^5
    so no tensors are formed. Row t of the result belongs to particle
    ``targets[t]``.
    """
    sel = sel or particles.default_selection()
    if validate:
        particles.validate(sel)
    targets = range(particles.count) if targets is None else targets
    if len(targets) and (min(targets) < 0 or max(targets) >= particles.count):
        raise ParameterError(
            f"target range {targets} outside [0, {particles.count})"
        )
    index = np.asarray(targets, dtype=np.int64)
    out = np.zeros((index.size, 3))
    if index.size == 0:
        return out
    pos, forces, dipoles, normals = particles.kernel_arrays(sel)
    _direct.contracted_direct(
        np.ascontiguousarray(pos[index]),
        index,
        pos,
        forces,
        dipoles,
        normals,
        sel.stokeslet_enabled,
        sel.stresslet_enabled,
        out,
    )
    return out


def parallel_direct_velocity(
    particles: ParticleSet,
    sel: Optional[KernelSelection] = None,
    workers: int = 1,
) -> np.ndarray:
    """Contracted direct sum with targets split over ``workers`` threads.

    Per-target summation order is fixed, so the result does not depend on
    the worker count.
    """
    sel = sel or particles.default_selection()
    particles.validate(sel)
    pos, forces, dipoles, normals = particles.kernel_arrays(sel)
    out = np.zeros((particles.count, 3))
    skip = np.arange(particles.count, dtype=np.int64)

    def task(start: int, end: int) -> None:
        _direct.contracted_direct(
            pos[start:end],
            skip[start:end],
            pos,
            forces,
            dipoles,
            normals,
            sel.stokeslet_enabled,
            sel.stresslet_enabled,
            out[start:end],
        )

    run_segments(particles.count, workers, task)
    return out


def direct_velocity_at(
    points, particles: ParticleSet, sel: Optional[KernelSelection] = None
) -> np.ndarray:
    """Direct-sum velocity induced by ``particles`` at arbitrary points.

    No source is excluded, so a point that coincides with a source is a
    GeometryError.
    """
    sel = sel or particles.default_selection()
    particles.validate(sel, check_distinct=False)
    pts = _as_vectors("points", points)
    pos, forces, dipoles, normals = particles.kernel_arrays(sel)
    out = np.zeros((pts.shape[0], 3))
    _direct.contracted_direct(
        pts,
        np.full(pts.shape[0], -1, dtype=np.int64),
        pos,
        forces,
        dipoles,
        normals,
        sel.stokeslet_enabled,
        sel.stresslet_enabled,
        out,
    )
    check_finite(out, "evaluation point coincides with a source particle")
    return out


def check_finite(values: np.ndarray, message: str) -> None:
    """Raise GeometryError if a kernel produced Inf/NaN (zero separation)."""
    if not np.isfinite(values).all():
        raise GeometryError(message)
