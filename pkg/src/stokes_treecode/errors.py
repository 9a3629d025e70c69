"""Exception types raised by the treecode library.

All of them derive from ``ValueError`` as well, so callers that already
guard with ``except ValueError`` keep working.
"""

from __future__ import annotations

import pathlib
from typing import Optional


class TreecodeError(Exception):
    """Base class for library errors."""


class GeometryError(TreecodeError, ValueError):
    """Invalid geometry: coincident points, zero separation, non-finite data."""


class ParameterError(TreecodeError, ValueError):
    """Invalid parameters or inconsistent inputs."""


class ParticleFileError(TreecodeError, ValueError):
    """Malformed particle file."""

    def __init__(
        self, message: str, path: Optional[pathlib.Path] = None, line: int = 0
    ) -> None:
        self.path = path
        self.line = line
        if line:
            where = f"{path}:{line}: " if path is not None else f"line {line}: "
        else:
            where = f"{path}: " if path is not None else ""
        super().__init__(where + message)
