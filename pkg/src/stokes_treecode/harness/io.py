"""Particle text files.

One header line names the column blocks present, each three columns wide:
``x`` (positions, required), ``f`` (forces), ``h nu`` (dipoles and normals,
always together). Every following non-blank line is one particle. Values
are written with 17 significant digits so a write/read round trip is exact.
"""

from __future__ import annotations

import logging
import pathlib
from typing import Dict, List, Union

import numpy as np

from ..errors import ParticleFileError, TreecodeError
from ..kernels import ParticleSet

logger = logging.getLogger(__name__)

PathLike = Union[str, pathlib.Path]

_BLOCKS = ("x", "f", "h", "nu")
_FIELDS = {"x": "positions", "f": "forces", "h": "dipoles", "nu": "normals"}


def _header_blocks(header: str, path: pathlib.Path) -> List[str]:
    tokens = header.split()
    if not tokens:
        raise ParticleFileError("missing header line", path, 1)
    unknown = [t for t in tokens if t not in _BLOCKS]
    if unknown:
        raise ParticleFileError(
            f"unknown header block(s) {unknown}; allowed: {' '.join(_BLOCKS)}",
            path,
            1,
        )
    if len(set(tokens)) != len(tokens):
        raise ParticleFileError("duplicate header block", path, 1)
    if "x" not in tokens:
        raise ParticleFileError("header must declare the position block 'x'", path, 1)
    if ("h" in tokens) != ("nu" in tokens):
        raise ParticleFileError("blocks 'h' and 'nu' must appear together", path, 1)
    return tokens


def read_particles(path: PathLike) -> ParticleSet:
    """Load a particle file; ParticleFileError names the offending line."""
    path = pathlib.Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ParticleFileError("file is empty", path)
    blocks = _header_blocks(lines[0], path)
    width = 3 * len(blocks)

    rows: List[List[float]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != width:
            raise ParticleFileError(
                f"expected {width} values for header '{lines[0].strip()}', "
                f"got {len(fields)}",
                path,
                lineno,
            )
        try:
            rows.append([float(v) for v in fields])
        except ValueError as exc:
            raise ParticleFileError(f"bad number: {exc}", path, lineno) from None
    if not rows:
        raise ParticleFileError("no particle rows", path)

    data = np.array(rows, dtype=np.float64)
    arrays: Dict[str, np.ndarray] = {
        _FIELDS[name]: np.ascontiguousarray(data[:, 3 * b : 3 * b + 3])
        for b, name in enumerate(blocks)
    }
    try:
        particles = ParticleSet(**arrays)
    except TreecodeError as exc:
        raise ParticleFileError(str(exc), path) from exc
    logger.debug("read %d particles (%s) from %s", particles.count, blocks, path)
    return particles


def write_particles(path: PathLike, particles: ParticleSet) -> pathlib.Path:
    """Write ``particles`` with every block it carries; returns the path."""
    path = pathlib.Path(path)
    blocks = ["x"]
    columns = [particles.positions]
    if particles.forces is not None:
        blocks.append("f")
        columns.append(particles.forces)
    if particles.dipoles is not None and particles.normals is not None:
        blocks += ["h", "nu"]
        columns += [particles.dipoles, particles.normals]
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(
        path,
        np.hstack(columns),
        fmt="%.17g",
        delimiter=" ",
        header=" ".join(blocks),
        comments="",
    )
    logger.debug("wrote %d particles to %s", particles.count, path)
    return path
