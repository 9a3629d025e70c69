from __future__ import annotations

import itertools

import numpy as np
import pytest
from conftest import fd_taylor, make_cluster

from stokes_treecode.config import SENTINEL
from stokes_treecode.errors import GeometryError, ParameterError
from stokes_treecode.kernels import (
    KernelSelection,
    ParticleSet,
    direct_velocity_at,
    stokeslet,
    stresslet,
)
from stokes_treecode.taylor import (
    FarFieldWorkspace,
    build_multiindex_table,
    coulomb_coeffs,
    farfield_velocity,
    stokeslet_farfield,
    stokeslet_taylor_coeff,
    stokeslet_taylor_tensor,
    stresslet_farfield,
    stresslet_taylor_coeff,
    stresslet_taylor_tensor,
    table_size,
)
from stokes_treecode.tree import cluster_moments


def _random_dx(rng, low=0.8, high=1.6):
    d = rng.standard_normal(3)
    return d / np.linalg.norm(d) * rng.uniform(low, high)


def _grade_errors(table, order, approx, exact):
    """Max error per grade, relative to the largest exact magnitude of that grade."""
    out = []
    for s in range(order + 1):
        rows = np.flatnonzero(table.grades[: table_size(order)] == s)
        scale = np.abs(exact[rows]).max()
        out.append(np.abs(approx[rows] - exact[rows]).max() / scale)
    return out


class TestMultiIndexTable:
    @pytest.mark.parametrize("pmax,count", [(0, 1), (2, 10), (10, 286)])
    def test_sizes(self, pmax, count):
        table = build_multiindex_table(pmax)
        assert len(table) == count == table_size(pmax)

    def test_order_zero(self):
        np.testing.assert_array_equal(build_multiindex_table(0).entries, [[0, 0, 0]])

    def test_graded_lexicographic(self):
        table = build_multiindex_table(5)
        keys = [tuple(k) for k in table.entries]
        assert keys == sorted(keys, key=lambda k: (sum(k), k))
        assert keys[1:4] == [(0, 0, 1), (0, 1, 0), (1, 0, 0)]

    def test_smaller_tables_are_prefixes(self):
        small, large = build_multiindex_table(4), build_multiindex_table(8)
        np.testing.assert_array_equal(large.entries[: len(small)], small.entries)

    def test_cached(self):
        assert build_multiindex_table(3) is build_multiindex_table(3)

    def test_shift_lookups(self):
        table = build_multiindex_table(4)
        for n, k in enumerate(table.entries):
            for axis in range(3):
                for delta in (-2, -1, 1, 2):
                    moved = k.copy()
                    moved[axis] += delta
                    q = table.shift(n, axis, delta)
                    if moved.min() < 0 or moved.sum() > 4:
                        assert q == SENTINEL
                    else:
                        np.testing.assert_array_equal(table.entries[q], moved)

    def test_composite_lookups(self):
        table = build_multiindex_table(4)
        n = table.index((1, 0, 1))
        assert table.plus_minus[n, 0, 0] == n
        assert table.plus_minus[n, 1, 0] == table.index((0, 1, 1))
        assert table.plus_minus[n, 0, 1] == SENTINEL
        assert table.plus_plus[n, 2, 2] == table.index((1, 0, 3))
        assert table.plus_plus_minus[n, 1, 1, 0] == table.index((0, 2, 1))

    def test_index_errors(self):
        table = build_multiindex_table(2)
        with pytest.raises(ParameterError):
            table.index((3, 0, 0))
        assert table.lookup((-1, 0, 0)) == SENTINEL
        with pytest.raises(ParameterError):
            build_multiindex_table(-1)

    def test_grade_completeness(self):
        # every b read at order p lies inside the p + 2 table
        for p in (0, 3, 6):
            table = build_multiindex_table(p + 2)
            n = table_size(p)
            assert (table.shift_lut[:n, :, 2] >= 0).all()
            assert (table.plus_plus[:n] >= 0).all()


class TestCoulombCoeffs:
    def test_axis_aligned(self):
        c = coulomb_coeffs([1.0, 0.0, 0.0], 2)
        assert c.coeff((0, 0, 0)) == 1.0
        assert c.coeff((1, 0, 0)) == 1.0
        assert c.coeff((2, 0, 0)) == 1.0
        assert c.coeff((0, 1, 0)) == 0.0
        assert c.coeff((-1, 0, 0)) == 0.0

    def test_scaled_axis(self):
        c = coulomb_coeffs([0.0, 2.0, 0.0], 1)
        assert c.coeff((0, 0, 0)) == 0.5
        assert c.coeff((0, 1, 0)) == 0.25
        assert c.b[0] > 0

    def test_zero_separation(self):
        with pytest.raises(GeometryError):
            coulomb_coeffs([0.0, 0.0, 0.0], 3)

    def test_table_too_small(self):
        with pytest.raises(ParameterError):
            coulomb_coeffs([1.0, 0.0, 0.0], 5, build_multiindex_table(3))
        with pytest.raises(ParameterError):
            coulomb_coeffs([1.0, 0.0, 0.0], 2).coeff((3, 0, 0))

    def test_matches_finite_differences(self, rng):
        table = build_multiindex_table(4)
        for _ in range(20):
            dx = _random_dx(rng)
            x = dx.copy()
            yc = np.zeros(3)
            c = coulomb_coeffs(dx, 4, table)
            h = 1e-2 * np.linalg.norm(dx)
            fd = np.array(
                [
                    fd_taylor(lambda y: 1.0 / np.linalg.norm(x - y), yc, k, h)
                    for k in table.entries
                ]
            )
            assert max(_grade_errors(table, 4, fd, c.b)) < 1e-5


class TestTaylorCoefficients:
    def test_zeroth_stokeslet_coefficient_is_kernel(self, rng):
        for _ in range(10):
            dx = _random_dx(rng)
            c = coulomb_coeffs(dx, 1)
            S = stokeslet(dx, np.zeros(3))
            for i in range(3):
                for j in range(3):
                    a = stokeslet_taylor_coeff(dx, (0, 0, 0), i, j, c)
                    assert a == pytest.approx(S[i, j], rel=1e-12, abs=1e-15)

    def test_zeroth_stokeslet_axis_values(self):
        dx = np.array([1.0, 0.0, 0.0])
        assert stokeslet_taylor_coeff(dx, (0, 0, 0), 0, 0, coulomb_coeffs(dx, 1)) == 2.0
        dz = np.array([0.0, 0.0, 1.0])
        assert stokeslet_taylor_coeff(dz, (0, 0, 0), 0, 1, coulomb_coeffs(dz, 1)) == 0.0

    def test_zeroth_stresslet_coefficient_is_kernel(self, rng):
        for _ in range(10):
            dx = _random_dx(rng)
            c = coulomb_coeffs(dx, 2)
            T = stresslet(dx, np.zeros(3))
            for i in range(3):
                for j in range(3):
                    for l in range(3):
                        a = stresslet_taylor_coeff(dx, (0, 0, 0), i, j, l, c)
                        assert a == pytest.approx(T[i, j, l], rel=1e-12, abs=1e-15)

    def test_zeroth_stresslet_axis_values(self):
        ones = np.ones(3)
        a = stresslet_taylor_coeff(ones, (0, 0, 0), 0, 0, 0, coulomb_coeffs(ones, 2))
        assert a == pytest.approx(1.0 / (9.0 * np.sqrt(3.0)), rel=1e-12)
        dx = np.array([0.0, 3.0, 0.0])
        c = coulomb_coeffs(dx, 2)
        assert abs(stresslet_taylor_coeff(dx, (0, 0, 0), 0, 1, 1, c)) < 1e-16

    def test_out_of_range(self):
        dx = np.array([1.0, 2.0, 3.0])
        c = coulomb_coeffs(dx, 3)
        with pytest.raises(ParameterError):
            stokeslet_taylor_coeff(dx, (3, 0, 0), 0, 0, c)
        with pytest.raises(ParameterError):
            stresslet_taylor_coeff(dx, (1, 1, 0), 0, 0, 0, c)
        with pytest.raises(ParameterError):
            stokeslet_taylor_coeff(dx, (0, 0, 0), 3, 0, c)
        with pytest.raises(ParameterError):
            stokeslet_taylor_coeff(dx + 1, (0, 0, 0), 0, 0, c)

    def test_stokeslet_coefficients_match_finite_differences(self, rng):
        table = build_multiindex_table(4)
        for _ in range(5):
            dx = _random_dx(rng)
            c = coulomb_coeffs(dx, 4, table)
            exact = stokeslet_taylor_tensor(c, 3)
            h = 1e-2 * np.linalg.norm(dx)
            fd = np.array(
                [
                    fd_taylor(lambda y: stokeslet(dx, y), np.zeros(3), k, h)
                    for k in table.entries[: table_size(3)]
                ]
            )
            assert max(_grade_errors(table, 3, fd, exact)) < 1e-4

    def test_stresslet_coefficients_match_finite_differences(self, rng):
        table = build_multiindex_table(4)
        for _ in range(5):
            dx = _random_dx(rng)
            c = coulomb_coeffs(dx, 4, table)
            exact = stresslet_taylor_tensor(c, 2)
            h = 1e-2 * np.linalg.norm(dx)
            fd = np.array(
                [
                    fd_taylor(lambda y: stresslet(dx, y), np.zeros(3), k, h)
                    for k in table.entries[: table_size(2)]
                ]
            )
            assert max(_grade_errors(table, 2, fd, exact)) < 1e-4


def _admissible_pair(rng, ratio, n=40):
    center = rng.uniform(-1.0, 1.0, 3)
    cluster = make_cluster(rng, n, center, 0.5)
    r = np.linalg.norm(cluster.positions - center, axis=1).max()
    direction = rng.standard_normal(3)
    dx = direction / np.linalg.norm(direction) * (r / ratio)
    return cluster, center, dx


class TestFarField:
    @pytest.mark.parametrize("p", [0, 2, 4, 6])
    def test_contraction_matches_coefficient_sums(self, rng, p):
        table = build_multiindex_table(p + 2)
        ws = FarFieldWorkspace.for_table(table)
        for _ in range(10):
            cluster, center, dx = _admissible_pair(rng, 0.5)
            moments = cluster_moments(cluster, center, p)
            c = coulomb_coeffs(dx, p + 2, table)

            contracted = stokeslet_farfield(dx, moments, p, table, ws)
            expanded = np.einsum(
                "kij,jk->i", stokeslet_taylor_tensor(c, p), moments.M[0]
            )
            np.testing.assert_allclose(contracted, expanded, rtol=1e-12, atol=0)

            contracted = stresslet_farfield(dx, moments, p, table, ws)
            expanded = np.einsum(
                "kijl,jlk->i", stresslet_taylor_tensor(c, p), moments.Mt[0]
            )
            np.testing.assert_allclose(contracted, expanded, rtol=1e-12, atol=0)

    @pytest.mark.parametrize("p", [0, 3, 8])
    def test_single_particle_at_center_is_exact(self, rng, p):
        y = rng.uniform(-1, 1, 3)
        f, h = rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3)
        nu = rng.standard_normal(3)
        nu /= np.linalg.norm(nu)
        single = ParticleSet([y], [f], [h], [nu])
        moments = cluster_moments(single, y, p)
        assert not moments.M[0, :, 1:].any()
        table = build_multiindex_table(p + 2)
        ws = FarFieldWorkspace.for_table(table)
        x = y + np.array([0.7, -1.1, 0.4])
        np.testing.assert_allclose(
            stokeslet_farfield(x - y, moments, p, table, ws),
            stokeslet(x, y) @ f,
            rtol=1e-14,
        )
        np.testing.assert_allclose(
            stresslet_farfield(x - y, moments, p, table, ws),
            np.einsum("ijl,j,l->i", stresslet(x, y), h, nu),
            rtol=1e-13,
        )

    def test_monopole_places_weight_at_center(self, rng):
        cluster, center, dx = _admissible_pair(rng, 0.5)
        moments = cluster_moments(cluster, center, 0, KernelSelection(True, False))
        table = build_multiindex_table(1)
        ws = FarFieldWorkspace.for_table(table)
        expected = stokeslet(center + dx, center) @ cluster.forces.sum(axis=0)
        np.testing.assert_allclose(
            stokeslet_farfield(dx, moments, 0, table, ws), expected, rtol=1e-13
        )

    def test_high_order_matches_direct_sum(self, rng):
        table = build_multiindex_table(12)
        ws = FarFieldWorkspace.for_table(table)
        for _ in range(3):
            cluster, center, dx = _admissible_pair(rng, 0.15, n=50)
            moments = cluster_moments(cluster, center, 10)
            direct = direct_velocity_at(center + dx, cluster)[0]
            approx = farfield_velocity(dx, moments, table, ws)
            assert np.linalg.norm(approx - direct) <= 1e-7 * np.linalg.norm(direct)
            sto = direct_velocity_at(
                center + dx, cluster, KernelSelection(True, False)
            )[0]
            approx = stokeslet_farfield(dx, moments, 10, table, ws)
            assert np.linalg.norm(approx - sto) <= 1e-7 * np.linalg.norm(sto)

    def test_zero_dipoles_give_zero(self, rng):
        cluster, center, dx = _admissible_pair(rng, 0.5)
        silent = ParticleSet(
            cluster.positions,
            cluster.forces,
            np.zeros((cluster.count, 3)),
            cluster.normals,
        )
        table = build_multiindex_table(6)
        ws = FarFieldWorkspace.for_table(table)
        for p in (0, 2, 4):
            moments = cluster_moments(silent, center, p)
            np.testing.assert_array_equal(
                stresslet_farfield(dx, moments, p, table, ws), np.zeros(3)
            )

    @pytest.mark.parametrize(
        "selection,farfield",
        [
            (KernelSelection(True, False), stokeslet_farfield),
            (KernelSelection(False, True), stresslet_farfield),
        ],
        ids=["stokeslet", "stresslet"],
    )
    def test_error_decays_with_order_at_half_radius(self, selection, farfield):
        # Target at unit distance from the origin center along u = (1, 2, 2)/3.
        # One source sits at 0.5 u, so r/R = 0.5 exactly and the expansion
        # error is led by that source; eight more fill a small core.
        u = np.array([1.0, 2.0, 2.0]) / 3.0
        positions = [0.5 * u]
        forces = [(1.0, -0.5, 0.25)]
        dipoles = [(0.3, 1.0, -0.6)]
        normals = [u]
        corners = itertools.product((-1.0, 1.0), repeat=3)
        for i, (a, b, c) in enumerate(corners, start=1):
            positions.append(0.08 * np.array([a, b, c]))
            forces.append((0.5 * a, -0.25 * b, 0.1 * i))
            dipoles.append((0.2 * c, 0.1 * i - 0.4, 0.3 * a * b))
            normal = np.array([a + 0.5, b, c - 0.25])
            normals.append(normal / np.linalg.norm(normal))
        cluster = ParticleSet(
            np.array(positions), np.array(forces), np.array(dipoles), np.array(normals)
        )
        center = np.zeros(3)
        table = build_multiindex_table(14)
        ws = FarFieldWorkspace.for_table(table)
        direct = direct_velocity_at(center + u, cluster, selection)[0]
        errors = []
        for p in range(0, 13, 2):
            moments = cluster_moments(cluster, center, p, selection)
            errors.append(np.linalg.norm(farfield(u, moments, p, table, ws) - direct))
        for coarse, fine in zip(errors, errors[1:]):
            assert coarse / fine >= 2.0

    def test_order_mismatch(self, rng):
        cluster, center, dx = _admissible_pair(rng, 0.5)
        moments = cluster_moments(cluster, center, 3)
        table = build_multiindex_table(6)
        ws = FarFieldWorkspace.for_table(table)
        with pytest.raises(ParameterError):
            stokeslet_farfield(dx, moments, 4, table, ws)
        with pytest.raises(ParameterError):
            stresslet_farfield(dx, moments, 3, build_multiindex_table(4), ws)

    def test_disabled_kernel_moments(self, rng):
        cluster, center, dx = _admissible_pair(rng, 0.5)
        moments = cluster_moments(cluster, center, 2, KernelSelection(True, False))
        table = build_multiindex_table(4)
        ws = FarFieldWorkspace.for_table(table)
        with pytest.raises(ParameterError):
            stresslet_farfield(dx, moments, 2, table, ws)
        np.testing.assert_array_equal(
            farfield_velocity(dx, moments, table, ws),
            stokeslet_farfield(dx, moments, 2, table, ws),
        )
