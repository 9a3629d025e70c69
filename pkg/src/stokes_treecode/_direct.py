"""Numba kernels for pointwise tensors and direct summation.

Arrays are float64, C-ordered, shape (N, 3). When a kernel family is
disabled the matching weight arrays may be empty and are never read.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True, error_model="numpy")
def stokeslet_tensor(d, out):
    r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
    rinv = 1.0 / math.sqrt(r2)
    rinv3 = rinv * rinv * rinv
    for i in range(3):
        for j in range(3):
            out[i, j] = d[i] * d[j] * rinv3
        out[i, i] += rinv


@njit(cache=True, nogil=True, error_model="numpy")
def stresslet_tensor(d, out):
    r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
    rinv = 1.0 / math.sqrt(r2)
    rinv5 = rinv * rinv * rinv * rinv * rinv
    for i in range(3):
        for j in range(3):
            dij = d[i] * d[j] * rinv5
            for l in range(3):
                out[i, j, l] = dij * d[l]


@njit(cache=True, nogil=True, error_model="numpy")
def accumulate_pairs(
    x0, x1, x2, skip, start, end, pos, forces, dipoles, normals, use_sto, use_str, acc
):
    """Add the contracted direct sum over sources [start, end) at x.

    Source ``skip`` is excluded (pass -1 to keep all). Returns the number
    of pairs evaluated.
    """
    u0 = 0.0
    u1 = 0.0
    u2 = 0.0
    pairs = 0
    for n in range(start, end):
        if n == skip:
            continue
        d0 = x0 - pos[n, 0]
        d1 = x1 - pos[n, 1]
        d2 = x2 - pos[n, 2]
        rinv = 1.0 / math.sqrt(d0 * d0 + d1 * d1 + d2 * d2)
        rinv2 = rinv * rinv
        rinv3 = rinv2 * rinv
        if use_sto:
            f0 = forces[n, 0]
            f1 = forces[n, 1]
            f2 = forces[n, 2]
            s = (d0 * f0 + d1 * f1 + d2 * f2) * rinv3
            u0 += f0 * rinv + d0 * s
            u1 += f1 * rinv + d1 * s
            u2 += f2 * rinv + d2 * s
        if use_str:
            dh = d0 * dipoles[n, 0] + d1 * dipoles[n, 1] + d2 * dipoles[n, 2]
            dn = d0 * normals[n, 0] + d1 * normals[n, 1] + d2 * normals[n, 2]
            t = dh * dn * rinv3 * rinv2
            u0 += d0 * t
            u1 += d1 * t
            u2 += d2 * t
        pairs += 1
    acc[0] += u0
    acc[1] += u1
    acc[2] += u2
    return pairs


@njit(cache=True, nogil=True, error_model="numpy")
def contracted_direct(
    points, skip, pos, forces, dipoles, normals, use_sto, use_str, out
):
    """Direct sum at each point; ``skip[t]`` is the source excluded for point t."""
    n_src = pos.shape[0]
    acc = np.zeros(3)
    for t in range(points.shape[0]):
        acc[0] = 0.0
        acc[1] = 0.0
        acc[2] = 0.0
        accumulate_pairs(
            points[t, 0],
            points[t, 1],
            points[t, 2],
            skip[t],
            0,
            n_src,
            pos,
            forces,
            dipoles,
            normals,
            use_sto,
            use_str,
            acc,
        )
        out[t, 0] = acc[0]
        out[t, 1] = acc[1]
        out[t, 2] = acc[2]


@njit(cache=True, nogil=True, error_model="numpy")
def naive_direct(pos, forces, dipoles, normals, use_sto, use_str, out):
    """Direct sum forming S_ij and T_ijl explicitly for every pair."""
    n_src = pos.shape[0]
    d = np.empty(3)
    S = np.empty((3, 3))
    T = np.empty((3, 3, 3))
    for m in range(n_src):
        for i in range(3):
            out[m, i] = 0.0
        for n in range(n_src):
            if n == m:
                continue
            for i in range(3):
                d[i] = pos[m, i] - pos[n, i]
            if use_sto:
                stokeslet_tensor(d, S)
                for i in range(3):
                    for j in range(3):
                        out[m, i] += S[i, j] * forces[n, j]
            if use_str:
                stresslet_tensor(d, T)
                for i in range(3):
                    for j in range(3):
                        for l in range(3):
                            out[m, i] += T[i, j, l] * dipoles[n, j] * normals[n, l]
