"""Numba kernels for Taylor coefficients, far-field sums and cluster moments.

Multi-index arithmetic goes through lookup tables built by
``taylor.build_multiindex_table``; a negative entry means "outside the
table or a negative component" and contributes zero.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

# columns of the shift lookup table: k - 2e, k - e, k + e, k + 2e
MINUS2 = 0
MINUS1 = 1
PLUS1 = 2
PLUS2 = 3

# m_ij is stored in 6 slots (00, 11, 22, 01, 02, 12): i if i == j else i + j + 2


@njit(cache=True, nogil=True, error_model="numpy")
def coulomb_recurrence(d0, d1, d2, r2, nterms, grades, shift_lut, b):
    """Fill b[:nterms] with the Taylor coefficients of 1/|x - y| about y.

    Grade by grade: |k| r^2 b^k = (2|k| - 1) sum_i d_i b^{k-e_i}
    - (|k| - 1) sum_i b^{k-2e_i}.
    """
    b[0] = 1.0 / math.sqrt(r2)
    for idx in range(1, nterms):
        s = grades[idx]
        first = 0.0
        q = shift_lut[idx, 0, MINUS1]
        if q >= 0:
            first += d0 * b[q]
        q = shift_lut[idx, 1, MINUS1]
        if q >= 0:
            first += d1 * b[q]
        q = shift_lut[idx, 2, MINUS1]
        if q >= 0:
            first += d2 * b[q]
        second = 0.0
        for i in range(3):
            q = shift_lut[idx, i, MINUS2]
            if q >= 0:
                second += b[q]
        b[idx] = ((2 * s - 1) * first - (s - 1) * second) / (s * r2)


@njit(cache=True, nogil=True, error_model="numpy")
def stokeslet_farfield(d0, d1, d2, b, M, nterms, entries, shift_lut, plus_minus, acc):
    """Add the contracted Stokeslet particle-cluster approximation to acc.

    ``M`` is one cluster's (3, nterms) moment block; b must reach grade p+1.
    """
    u0 = 0.0
    u1 = 0.0
    u2 = 0.0
    for k in range(nterms):
        m0 = M[0, k]
        m1 = M[1, k]
        m2 = M[2, k]
        sigma = d0 * m0 + d1 * m1 + d2 * m2
        bk2 = 2.0 * b[k]
        for i in range(3):
            inner = b[shift_lut[k, i, PLUS1]] * sigma
            q = plus_minus[k, i, 0]
            if q >= 0:
                inner -= b[q] * m0
            q = plus_minus[k, i, 1]
            if q >= 0:
                inner -= b[q] * m1
            q = plus_minus[k, i, 2]
            if q >= 0:
                inner -= b[q] * m2
            term = bk2 * M[i, k] + (entries[k, i] + 1) * inner
            if i == 0:
                u0 += term
            elif i == 1:
                u1 += term
            else:
                u2 += term
    acc[0] += u0
    acc[1] += u1
    acc[2] += u2


@njit(cache=True, nogil=True, error_model="numpy")
def stresslet_farfield(
    d0,
    d1,
    d2,
    b,
    Mt,
    mtrace,
    msym,
    nterms,
    entries,
    shift_lut,
    plus_plus,
    plus_plus_minus,
    acc,
):
    """Add the contracted stresslet particle-cluster approximation to acc.

    ``Mt`` is one cluster's (3, 3, nterms) block, ``mtrace`` its trace
    moments and ``msym`` the (6, nterms) symmetrized moments; b must reach
    grade p+2.
    """
    u0 = 0.0
    u1 = 0.0
    u2 = 0.0
    for k in range(nterms):
        tau0 = d0 * Mt[0, 0, k] + d1 * Mt[0, 1, k] + d2 * Mt[0, 2, k]
        tau1 = d0 * Mt[1, 0, k] + d1 * Mt[1, 1, k] + d2 * Mt[1, 2, k]
        tau2 = d0 * Mt[2, 0, k] + d1 * Mt[2, 1, k] + d2 * Mt[2, 2, k]
        mk = mtrace[k]
        for i in range(3):
            ki1 = entries[k, i] + 1
            t_tau = 0.0
            t_mom = 0.0
            t_sym = 0.0
            for j in range(3):
                cj = entries[k, j] + 1
                if i == j:
                    cj += 1
                if j == 0:
                    tau_j = tau0
                elif j == 1:
                    tau_j = tau1
                else:
                    tau_j = tau2
                t_tau += cj * b[plus_plus[k, i, j]] * tau_j
                inner = 0.0
                for l in range(3):
                    q = plus_plus_minus[k, i, j, l]
                    if q >= 0:
                        inner += b[q] * Mt[j, l, k]
                t_mom += cj * inner
                s = i if i == j else i + j + 2
                t_sym += (entries[k, j] + 1) * b[shift_lut[k, j, PLUS1]] * msym[s, k]
            term = ki1 * (t_tau - t_mom + b[shift_lut[k, i, PLUS1]] * mk) + t_sym
            if i == 0:
                u0 += term
            elif i == 1:
                u1 += term
            else:
                u2 += term
    acc[0] += u0 / 3.0
    acc[1] += u1 / 3.0
    acc[2] += u2 / 3.0


@njit(cache=True, nogil=True, error_model="numpy")
def accumulate_moments(
    pos,
    forces,
    dipoles,
    normals,
    node_start,
    node_end,
    node_center,
    nterms,
    parent,
    parent_axis,
    use_sto,
    use_str,
    M,
    Mt,
    mono,
):
    """Moments of every cluster directly from its particles.

    M[c, j, k]     = sum_n (y^n - y_c)^k f_j^n
    Mt[c, j, l, k] = sum_n (y^n - y_c)^k h_j^n nu_l^n
    Monomials are built incrementally: (d)^k = (d)^parent(k) * d[axis(k)].
    """
    d = np.empty(3)
    for c in range(node_start.shape[0]):
        for n in range(node_start[c], node_end[c]):
            d[0] = pos[n, 0] - node_center[c, 0]
            d[1] = pos[n, 1] - node_center[c, 1]
            d[2] = pos[n, 2] - node_center[c, 2]
            mono[0] = 1.0
            for k in range(1, nterms):
                mono[k] = mono[parent[k]] * d[parent_axis[k]]
            if use_sto:
                for j in range(3):
                    fj = forces[n, j]
                    for k in range(nterms):
                        M[c, j, k] += mono[k] * fj
            if use_str:
                for j in range(3):
                    hj = dipoles[n, j]
                    for l in range(3):
                        w = hj * normals[n, l]
                        for k in range(nterms):
                            Mt[c, j, l, k] += mono[k] * w
