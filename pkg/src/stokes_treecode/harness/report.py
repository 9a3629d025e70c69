"""Benchmark rows, the relative velocity error and CSV/human rendering."""

from __future__ import annotations

import io
import math
import pathlib
from dataclasses import dataclass, field
from typing import IO, Iterable, List, Optional, Union

import numpy as np
import pandas as pd

from ..config import REPORT_COLUMNS
from ..errors import GeometryError, ParameterError


def relative_error(u_direct: np.ndarray, u_tree: np.ndarray) -> float:
    """E = sqrt(sum |u_d - u_t|^2 / sum |u_d|^2) over all particles."""
    ud = np.asarray(u_direct, dtype=np.float64)
    ut = np.asarray(u_tree, dtype=np.float64)
    if ud.shape != ut.shape or ud.ndim != 2 or ud.shape[1] != 3:
        raise ParameterError(
            "velocity fields must both have shape (N, 3), "
            f"got {ud.shape} and {ut.shape}"
        )
    if ud.shape[0] < 1:
        raise ParameterError("velocity fields are empty")
    denom = float(np.sum(ud * ud))
    if denom == 0.0:
        raise GeometryError("reference velocity field is identically zero")
    return math.sqrt(float(np.sum((ud - ut) ** 2)) / denom)


@dataclass
class BenchRow:
    """One benchmark run. Fields after ``direct_evals`` are not in the CSV."""

    N: int
    p: int
    theta: float
    n0: int
    workers: int
    time_direct_s: Optional[float] = None
    time_tree_s: Optional[float] = None
    speedup: Optional[float] = None
    error_E: Optional[float] = None
    farfield_evals: Optional[int] = None
    direct_evals: Optional[int] = None
    time_build_s: Optional[float] = field(default=None, compare=False)
    time_moments_s: Optional[float] = field(default=None, compare=False)
    time_traversal_s: Optional[float] = field(default=None, compare=False)
    moments_bytes: Optional[int] = field(default=None, compare=False)
    peak_rss_mb: Optional[float] = field(default=None, compare=False)

    def as_record(self) -> dict:
        return {name: getattr(self, name) for name in REPORT_COLUMNS}


_INT_COLUMNS = ("N", "p", "n0", "workers", "farfield_evals", "direct_evals")


def _cell(value, name: str):
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return None
    if name in _INT_COLUMNS:
        return int(value)
    return float(value)


@dataclass
class BenchReport:
    rows: List[BenchRow] = field(default_factory=list)

    def append(self, row: BenchRow) -> None:
        self.rows.append(row)

    def extend(self, rows: Iterable[BenchRow]) -> None:
        self.rows.extend(rows)

    def __len__(self) -> int:
        return len(self.rows)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(
            [row.as_record() for row in self.rows], columns=list(REPORT_COLUMNS)
        )
        for name in _INT_COLUMNS:
            frame[name] = frame[name].astype("Int64")
        return frame

    def to_csv(self, path: Union[str, pathlib.Path, None] = None) -> str:
        """CSV text with the fixed header; also written to ``path`` if given."""
        text = self.to_frame().to_csv(index=False, float_format="%.17g")
        if path is not None:
            target = pathlib.Path(path)
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(text, encoding="utf-8")
        return text

    @classmethod
    def from_csv(cls, source: Union[str, pathlib.Path, IO[str]]) -> "BenchReport":
        """Parse CSV written by :meth:`to_csv` (a path, file, or CSV text)."""
        if isinstance(source, str) and "\n" in source:
            source = io.StringIO(source)
        frame = pd.read_csv(source, float_precision="round_trip")
        missing = [c for c in REPORT_COLUMNS if c not in frame.columns]
        if missing:
            raise ParameterError(f"report CSV lacks columns {missing}")
        rows = [
            BenchRow(**{name: _cell(rec[name], name) for name in REPORT_COLUMNS})
            for rec in frame.to_dict(orient="records")
        ]
        return cls(rows)

    def render_human(self) -> str:
        """Fixed-width table for terminals; blank cells for absent values."""
        header = (
            f"{'N':>9} {'p':>3} {'theta':>6} {'n0':>6} {'wk':>3} "
            f"{'direct[s]':>10} {'tree[s]':>10} {'d/t':>7} {'E':>9} "
            f"{'far':>12} {'leaf':>12}"
        )
        lines = [header, "-" * len(header)]

        def fmt(value, spec: str, width: int) -> str:
            return f"{value:{width}{spec}}" if value is not None else " " * width

        for r in self.rows:
            lines.append(
                f"{r.N:>9d} {r.p:>3d} {r.theta:>6.3g} {r.n0:>6d} {r.workers:>3d} "
                f"{fmt(r.time_direct_s, '.4f', 10)} {fmt(r.time_tree_s, '.4f', 10)} "
                f"{fmt(r.speedup, '.2f', 7)} {fmt(r.error_E, '.2e', 9)} "
                f"{fmt(r.farfield_evals, 'd', 12)} {fmt(r.direct_evals, 'd', 12)}"
            )
            extras = []
            if r.time_build_s is not None:
                extras.append(
                    f"build={r.time_build_s:.4f}s moments={r.time_moments_s:.4f}s "
                    f"traversal={r.time_traversal_s:.4f}s"
                )
            if r.moments_bytes is not None:
                extras.append(f"moment_arrays={r.moments_bytes / 2**20:.2f}MiB")
            if r.peak_rss_mb is not None:
                extras.append(f"peak_rss={r.peak_rss_mb:.1f}MiB")
            if extras:
                lines.append("    " + "  ".join(extras))
        return "\n".join(lines)

