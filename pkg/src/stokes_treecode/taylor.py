"""Cartesian Taylor machinery for particle-cluster approximations.

Multi-indices k = (k1, k2, k3) are flattened in graded lexicographic order:
every index of grade s precedes every index of grade s + 1, and within a
grade k1 ascends, then k2. The table of order p is therefore a prefix of the
table of any higher order, so one table built for the largest order in use
serves every smaller one.

The Coulomb coefficients b^k = (1/k!) D_y^k (1/|x - y|) are evaluated by a
three-term recurrence, and the Stokeslet/stresslet Taylor coefficients are
linear combinations of them. The far-field evaluations use the contracted
forms that never materialize the coefficient tensors.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, Optional, Sequence, Tuple

import numpy as np

from . import _farfield
from .config import MAX_ORDER, SENTINEL
from .errors import GeometryError, ParameterError
from .kernels import KernelSelection, Vec3

if TYPE_CHECKING:  # pragma: no cover
    from .tree import ClusterMoments

logger = logging.getLogger(__name__)

MultiIndex = Tuple[int, int, int]

_SHIFTS = (-2, -1, 1, 2)


def table_size(order: int) -> int:
    """Number of multi-indices with ||k|| <= order."""
    if order < 0:
        return 0
    return (order + 1) * (order + 2) * (order + 3) // 6


def sym_index(i: int, j: int) -> int:
    """Storage slot of the symmetric pair (i, j) in the 6-entry m_ij layout."""
    return i if i == j else i + j + 2


@dataclass(frozen=True, eq=False)
class MultiIndexTable:
    """Graded enumeration of multi-indices with precomputed shift lookups.

    ``shift_lut[n, axis, c]`` is the flat position of entries[n] shifted by
    (-2, -1, +1, +2)[c] along ``axis``; the composite tables hold k + e_i - e_j,
    k + e_i + e_j and k + e_i + e_j - e_l. Every lookup leaving the table or
    producing a negative component is SENTINEL.
    """

    pmax: int
    entries: np.ndarray
    grades: np.ndarray
    shift_lut: np.ndarray
    plus_minus: np.ndarray
    plus_plus: np.ndarray
    plus_plus_minus: np.ndarray
    parent: np.ndarray
    parent_axis: np.ndarray
    _positions: Dict[MultiIndex, int] = field(repr=False)

    def __len__(self) -> int:
        return int(self.entries.shape[0])

    @staticmethod
    def size(order: int) -> int:
        return table_size(order)

    def index(self, k: Sequence[int]) -> int:
        """Flat position of ``k``; ParameterError if it is not in the table."""
        key = tuple(int(c) for c in k)
        try:
            return self._positions[key]  # type: ignore[index]
        except KeyError:
            raise ParameterError(
                f"multi-index {key} outside table of order {self.pmax}"
            ) from None

    def lookup(self, k: Sequence[int]) -> int:
        """Like :meth:`index` but SENTINEL for negative components."""
        if min(k) < 0:
            return SENTINEL
        return self.index(k)

    def shift(self, n: int, axis: int, delta: int) -> int:
        return int(self.shift_lut[n, axis, _SHIFTS.index(delta)])


@functools.lru_cache(maxsize=None)
def build_multiindex_table(pmax: int) -> MultiIndexTable:
    """Build (once per order, then cached) the multi-index table for ``pmax``."""
    pmax = int(pmax)
    if pmax < 0 or pmax > MAX_ORDER + 2:
        raise ParameterError(f"table order must be in [0, {MAX_ORDER + 2}], got {pmax}")

    keys = []
    for s in range(pmax + 1):
        for k1 in range(s + 1):
            for k2 in range(s - k1 + 1):
                keys.append((k1, k2, s - k1 - k2))
    positions = {k: n for n, k in enumerate(keys)}
    n_terms = len(keys)

    def pos(k) -> int:
        return positions.get(k, SENTINEL)

    def moved(k, *steps) -> MultiIndex:
        out = list(k)
        for axis, delta in steps:
            out[axis] += delta
        return tuple(out)  # type: ignore[return-value]

    entries = np.array(keys, dtype=np.int64).reshape(n_terms, 3)
    grades = entries.sum(axis=1)
    shift_lut = np.full((n_terms, 3, 4), SENTINEL, dtype=np.int64)
    plus_minus = np.full((n_terms, 3, 3), SENTINEL, dtype=np.int64)
    plus_plus = np.full((n_terms, 3, 3), SENTINEL, dtype=np.int64)
    plus_plus_minus = np.full((n_terms, 3, 3, 3), SENTINEL, dtype=np.int64)
    parent = np.zeros(n_terms, dtype=np.int64)
    parent_axis = np.zeros(n_terms, dtype=np.int64)

    for n, k in enumerate(keys):
        for i in range(3):
            for c, delta in enumerate(_SHIFTS):
                shift_lut[n, i, c] = pos(moved(k, (i, delta)))
            for j in range(3):
                plus_minus[n, i, j] = pos(moved(k, (i, 1), (j, -1)))
                plus_plus[n, i, j] = pos(moved(k, (i, 1), (j, 1)))
                for l in range(3):
                    plus_plus_minus[n, i, j, l] = pos(
                        moved(k, (i, 1), (j, 1), (l, -1))
                    )
        if n:
            axis = next(a for a in range(3) if k[a] > 0)
            parent[n] = positions[moved(k, (axis, -1))]
            parent_axis[n] = axis

    logger.debug("built multi-index table: order=%d terms=%d", pmax, n_terms)
    return MultiIndexTable(
        pmax=pmax,
        entries=entries,
        grades=grades,
        shift_lut=shift_lut,
        plus_minus=plus_minus,
        plus_plus=plus_plus,
        plus_plus_minus=plus_plus_minus,
        parent=parent,
        parent_axis=parent_axis,
        _positions=positions,
    )


def coefficient_order(p: int, sel: KernelSelection) -> int:
    """Grade the b-table must reach for order-p far fields under ``sel``."""
    return p + 2 if sel.stresslet_enabled else p + 1


@dataclass(frozen=True, eq=False)
class CoulombCoeffs:
    """b^k for ||k|| <= pmax about a cluster center, dx = x - y_c."""

    b: np.ndarray
    dx: np.ndarray
    r2: float
    table: MultiIndexTable
    pmax: int

    def coeff(self, k: Sequence[int]) -> float:
        """b^k, zero when a component of k is negative."""
        if min(k) < 0:
            return 0.0
        if sum(k) > self.pmax:
            raise ParameterError(
                f"b^{tuple(k)} requested but coefficients only reach grade {self.pmax}"
            )
        return float(self.b[self.table.index(k)])


def _separation(dx) -> np.ndarray:
    d = np.asarray(dx, dtype=np.float64).reshape(-1)
    if d.shape != (3,):
        raise ParameterError(f"dx must have 3 components, got {d.shape}")
    if not np.isfinite(d).all():
        raise GeometryError("dx contains NaN or Inf")
    if not d.any():
        raise GeometryError("Taylor coefficients need x != y_c (zero separation)")
    return d


def coulomb_coeffs(
    dx: Vec3,
    pmax: int,
    table: Optional[MultiIndexTable] = None,
    out: Optional[np.ndarray] = None,
) -> CoulombCoeffs:
    """Evaluate b^k for ||k|| <= pmax by the grade-by-grade recurrence.

    ``table`` may be of any order >= pmax. ``out`` (length >= the number of
    terms) is filled in place when given.
    """
    d = _separation(dx)
    table = table if table is not None else build_multiindex_table(pmax)
    if pmax < 0 or pmax > table.pmax:
        raise ParameterError(
            f"coefficient order {pmax} not covered by table of order {table.pmax}"
        )
    nb = table_size(pmax)
    b = np.empty(nb) if out is None else out[:nb]
    r2 = float(d @ d)
    _farfield.coulomb_recurrence(
        d[0], d[1], d[2], r2, nb, table.grades, table.shift_lut, b
    )
    return CoulombCoeffs(b=b, dx=d, r2=r2, table=table, pmax=pmax)


def _delta(i: int, j: int) -> int:
    return 1 if i == j else 0


def _unit(axis: int) -> np.ndarray:
    e = np.zeros(3, dtype=np.int64)
    e[axis] = 1
    return e


def _check_axes(*axes: int) -> None:
    for a in axes:
        if a not in (0, 1, 2):
            raise ParameterError(f"axis must be 0, 1 or 2, got {a}")


def _check_dx(dx, coeffs: CoulombCoeffs) -> None:
    if not np.array_equal(np.asarray(dx, dtype=np.float64).reshape(-1), coeffs.dx):
        raise ParameterError("dx does not match the separation of the coefficients")


def stokeslet_taylor_coeff(
    dx: Vec3, k: Sequence[int], i: int, j: int, coeffs: CoulombCoeffs
) -> float:
    """Taylor coefficient a^k_ij of S_ij(x, y) about y = y_c.

    a^k_ij = d_ij b^k + dx_j (k_i + 1) b^{k+e_i} - (k_i + 1 - d_ij) b^{k+e_i-e_j}
    """
    _check_axes(i, j)
    _check_dx(dx, coeffs)
    kv = np.asarray(k, dtype=np.int64)
    if kv.min() < 0 or kv.sum() + 1 > coeffs.pmax:
        raise ParameterError(
            f"a^k needs ||k|| + 1 <= {coeffs.pmax}, got k={tuple(kv.tolist())}"
        )
    dij = _delta(i, j)
    ki = int(kv[i])
    ei, ej = _unit(i), _unit(j)
    return (
        dij * coeffs.coeff(kv)
        + coeffs.dx[j] * (ki + 1) * coeffs.coeff(kv + ei)
        - (ki + 1 - dij) * coeffs.coeff(kv + ei - ej)
    )


def stresslet_taylor_coeff(
    dx: Vec3, k: Sequence[int], i: int, j: int, l: int, coeffs: CoulombCoeffs
) -> float:
    """Taylor coefficient of T_ijl(x, y) about y = y_c (needs grade ||k|| + 2)."""
    _check_axes(i, j, l)
    _check_dx(dx, coeffs)
    kv = np.asarray(k, dtype=np.int64)
    if kv.min() < 0 or kv.sum() + 2 > coeffs.pmax:
        raise ParameterError(
            f"stresslet coefficient needs ||k|| + 2 <= {coeffs.pmax}, "
            f"got k={tuple(kv.tolist())}"
        )
    dij, dil, djl = _delta(i, j), _delta(i, l), _delta(j, l)
    ki, kj, kl = int(kv[i]), int(kv[j]), int(kv[l])
    ei, ej, el = _unit(i), _unit(j), _unit(l)
    three_a = (
        coeffs.dx[l] * (ki + 1) * (kj + 1 + dij) * coeffs.coeff(kv + ei + ej)
        - (ki + 1 - dil) * (kj + 1 + dij - djl) * coeffs.coeff(kv + ei + ej - el)
        + dij * (kl + 1) * coeffs.coeff(kv + el)
    )
    return three_a / 3.0


def stokeslet_taylor_tensor(coeffs: CoulombCoeffs, order: int) -> np.ndarray:
    """All a^k_ij with ||k|| <= order as an (n_terms, 3, 3) array."""
    n = table_size(order)
    out = np.empty((n, 3, 3))
    for t in range(n):
        k = coeffs.table.entries[t]
        for i in range(3):
            for j in range(3):
                out[t, i, j] = stokeslet_taylor_coeff(coeffs.dx, k, i, j, coeffs)
    return out


def stresslet_taylor_tensor(coeffs: CoulombCoeffs, order: int) -> np.ndarray:
    """All stresslet coefficients with ||k|| <= order, shape (n_terms, 3, 3, 3)."""
    n = table_size(order)
    out = np.empty((n, 3, 3, 3))
    for t in range(n):
        k = coeffs.table.entries[t]
        for i in range(3):
            for j in range(3):
                for l in range(3):
                    out[t, i, j, l] = stresslet_taylor_coeff(
                        coeffs.dx, k, i, j, l, coeffs
                    )
    return out


@dataclass
class FarFieldWorkspace:
    """Per-worker scratch for far-field evaluation.

    ``b`` holds the Coulomb coefficients of the current pair and ``acc`` the
    velocity accumulator. The contraction sums (sigma^k, tau_j) are scalars
    inside the kernels and need no storage. Contents are undefined between
    calls; never share one workspace between threads.
    """

    b: np.ndarray
    acc: np.ndarray = field(default_factory=lambda: np.zeros(3))

    @classmethod
    def for_table(cls, table: MultiIndexTable) -> "FarFieldWorkspace":
        return cls(b=np.empty(len(table)))


def _check_moments(moments: "ClusterMoments", p: int, cluster: int) -> None:
    if moments.order != p:
        raise ParameterError(
            f"moments were computed at order {moments.order}, not {p}"
        )
    if not 0 <= cluster < moments.cluster_count:
        raise ParameterError(
            f"cluster {cluster} outside [0, {moments.cluster_count})"
        )


def _pair_coeffs(
    dx,
    pmax: int,
    table: MultiIndexTable,
    ws: FarFieldWorkspace,
    coeffs: Optional[CoulombCoeffs],
) -> CoulombCoeffs:
    if coeffs is None:
        if table.pmax < pmax:
            raise ParameterError(
                f"far field needs a table of order {pmax}, got {table.pmax}"
            )
        if ws.b.shape[0] < table_size(pmax):
            ws.b = np.empty(table_size(pmax))
        return coulomb_coeffs(dx, pmax, table, out=ws.b)
    if coeffs.pmax < pmax:
        raise ParameterError(
            f"far field needs coefficients through grade {pmax}, got {coeffs.pmax}"
        )
    return coeffs


def stokeslet_farfield(
    dx: Vec3,
    moments: "ClusterMoments",
    p: int,
    table: MultiIndexTable,
    ws: FarFieldWorkspace,
    cluster: int = 0,
    coeffs: Optional[CoulombCoeffs] = None,
) -> np.ndarray:
    """Contracted Stokeslet approximation of cluster ``cluster`` at x = y_c + dx.

    u_i = sum_k [2 b^k M_i^k + (k_i + 1)(b^{k+e_i} sigma^k
          - sum_j b^{k+e_i-e_j} M_j^k)],  sigma^k = sum_j dx_j M_j^k
    """
    _check_moments(moments, p, cluster)
    if not moments.has_stokeslets:
        raise ParameterError("moments were computed without Stokeslet weights")
    c = _pair_coeffs(dx, p + 1, table, ws, coeffs)
    ws.acc[:] = 0.0
    _farfield.stokeslet_farfield(
        c.dx[0],
        c.dx[1],
        c.dx[2],
        c.b,
        moments.M[cluster],
        table_size(p),
        table.entries,
        table.shift_lut,
        table.plus_minus,
        ws.acc,
    )
    return ws.acc.copy()


def stresslet_farfield(
    dx: Vec3,
    moments: "ClusterMoments",
    p: int,
    table: MultiIndexTable,
    ws: FarFieldWorkspace,
    cluster: int = 0,
    coeffs: Optional[CoulombCoeffs] = None,
) -> np.ndarray:
    """Contracted stresslet approximation of cluster ``cluster`` at x = y_c + dx.

    Uses tau_j = sum_l dx_l Mt_jl^k per multi-index and the precomputed
    target-independent moments m^k and m_ij^k.
    """
    _check_moments(moments, p, cluster)
    if not moments.has_stresslets:
        raise ParameterError("moments were computed without stresslet weights")
    c = _pair_coeffs(dx, p + 2, table, ws, coeffs)
    ws.acc[:] = 0.0
    _farfield.stresslet_farfield(
        c.dx[0],
        c.dx[1],
        c.dx[2],
        c.b,
        moments.Mt[cluster],
        moments.mtrace[cluster],
        moments.msym[cluster],
        table_size(p),
        table.entries,
        table.shift_lut,
        table.plus_plus,
        table.plus_plus_minus,
        ws.acc,
    )
    return ws.acc.copy()


def farfield_velocity(
    dx: Vec3,
    moments: "ClusterMoments",
    table: MultiIndexTable,
    ws: FarFieldWorkspace,
    cluster: int = 0,
) -> np.ndarray:
    """Both far fields of one pair, sharing a single b-table evaluation."""
    p = moments.order
    sel = moments.selection
    c = _pair_coeffs(dx, coefficient_order(p, sel), table, ws, None)
    u = np.zeros(3)
    if sel.stokeslet_enabled:
        u += stokeslet_farfield(dx, moments, p, table, ws, cluster, coeffs=c)
    if sel.stresslet_enabled:
        u += stresslet_farfield(dx, moments, p, table, ws, cluster, coeffs=c)
    return u
