"""Numba kernel for the MAC-gated depth-first traversal."""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from ._direct import accumulate_pairs
from ._farfield import coulomb_recurrence, stokeslet_farfield, stresslet_farfield


@njit(cache=True, nogil=True, error_model="numpy")
def traverse(
    points,
    skip,
    root,
    theta,
    node_start,
    node_end,
    node_center,
    node_radius,
    node_is_leaf,
    node_children,
    stack_size,
    pos,
    forces,
    dipoles,
    normals,
    use_sto,
    use_str,
    M,
    Mt,
    mtrace,
    msym,
    nterms,
    nb,
    grades,
    entries,
    shift_lut,
    plus_minus,
    plus_plus,
    plus_plus_minus,
    out,
    n_far,
    n_leaf,
    n_pairs,
    n_visit,
):
    """Velocity at every point from the subtree rooted at ``root``.

    A cluster passing the MAC contributes its far-field approximation, a
    failing leaf its direct sum (excluding source ``skip[t]``), a failing
    internal cluster its children in slot order 0..7. Counters are written
    per point.
    """
    b = np.empty(nb)
    acc = np.zeros(3)
    stack = np.empty(stack_size, dtype=np.int64)
    for t in range(points.shape[0]):
        x0 = points[t, 0]
        x1 = points[t, 1]
        x2 = points[t, 2]
        acc[0] = 0.0
        acc[1] = 0.0
        acc[2] = 0.0
        far = 0
        leaf = 0
        pairs = 0
        visit = 0
        stack[0] = root
        top = 1
        while top > 0:
            top -= 1
            c = stack[top]
            visit += 1
            d0 = x0 - node_center[c, 0]
            d1 = x1 - node_center[c, 1]
            d2 = x2 - node_center[c, 2]
            r2 = d0 * d0 + d1 * d1 + d2 * d2
            R = math.sqrt(r2)
            if R > 0.0 and node_radius[c] / R <= theta:
                coulomb_recurrence(d0, d1, d2, r2, nb, grades, shift_lut, b)
                if use_sto:
                    stokeslet_farfield(
                        d0, d1, d2, b, M[c], nterms, entries, shift_lut, plus_minus, acc
                    )
                if use_str:
                    stresslet_farfield(
                        d0,
                        d1,
                        d2,
                        b,
                        Mt[c],
                        mtrace[c],
                        msym[c],
                        nterms,
                        entries,
                        shift_lut,
                        plus_plus,
                        plus_plus_minus,
                        acc,
                    )
                far += 1
            elif node_is_leaf[c]:
                pairs += accumulate_pairs(
                    x0,
                    x1,
                    x2,
                    skip[t],
                    node_start[c],
                    node_end[c],
                    pos,
                    forces,
                    dipoles,
                    normals,
                    use_sto,
                    use_str,
                    acc,
                )
                leaf += 1
            else:
                for slot in range(7, -1, -1):
                    child = node_children[c, slot]
                    if child >= 0:
                        stack[top] = child
                        top += 1
        out[t, 0] = acc[0]
        out[t, 1] = acc[1]
        out[t, 2] = acc[2]
        n_far[t] = far
        n_leaf[t] = leaf
        n_pairs[t] = pairs
        n_visit[t] = visit
