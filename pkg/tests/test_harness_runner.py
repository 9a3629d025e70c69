from __future__ import annotations

import numpy as np
import pytest

from stokes_treecode.engine import TreecodeParams
from stokes_treecode.errors import ParameterError
from stokes_treecode.harness.io import write_particles
from stokes_treecode.harness.report import BenchReport
from stokes_treecode.harness.runner import RunConfig, execute, load_particles, run
from stokes_treecode.harness.studies import (
    format_scaling,
    parameter_sweep,
    size_scaling,
    strong_scaling,
    weak_scaling,
)
from stokes_treecode.testcases import CubeCaseConfig, SphereCaseConfig

SMALL = TreecodeParams(order=4, theta=0.5, leaf_size=40)


def _cube_config(**kwargs):
    kwargs.setdefault("params", SMALL)
    return RunConfig(testcase="cube", cube=CubeCaseConfig(n=600), **kwargs)


class TestRunConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [{"mode": "fast"}, {"testcase": "torus"}, {"fmt": "json"}, {"shrink": "yes"}],
    )
    def test_rejects_unknown_choices(self, kwargs):
        with pytest.raises(ParameterError):
            RunConfig(**kwargs).validate()

    def test_file_case_needs_path(self):
        with pytest.raises(ParameterError, match="--input"):
            RunConfig(testcase="file").validate()

    def test_shrink_resolution(self):
        assert RunConfig(testcase="sphere").resolved_params().shrink
        assert not RunConfig(testcase="cube").resolved_params().shrink
        assert RunConfig(testcase="cube", shrink="on").resolved_params().shrink
        assert not RunConfig(shrink="off").resolved_params().shrink


class TestExecute:
    def test_both_modes_fill_the_row(self):
        outcome = execute(_cube_config(memory=True))
        row = outcome.row
        assert row.N == 600 and row.p == 4 and row.n0 == 40
        assert row.error_E < 1e-2
        assert row.time_direct_s > 0 and row.time_tree_s > 0
        assert row.speedup == pytest.approx(row.time_direct_s / row.time_tree_s)
        assert row.farfield_evals + row.direct_evals > 0
        assert row.moments_bytes > 0
        assert outcome.u_direct.shape == outcome.u_tree.shape == (600, 3)

    def test_tree_only(self):
        row = execute(_cube_config(mode="tree")).row
        assert row.time_direct_s is None and row.error_E is None
        assert row.time_tree_s is not None

    def test_direct_only(self):
        row = execute(_cube_config(mode="direct")).row
        assert row.time_tree_s is None and row.farfield_evals is None
        assert row.time_direct_s is not None

    def test_sphere_case(self):
        config = RunConfig(testcase="sphere", sphere=SphereCaseConfig(levels=2))
        row = execute(config).row
        assert row.N == 320
        assert row.error_E < 1e-3

    def test_file_case(self, tmp_path, small_particles):
        path = write_particles(tmp_path / "p.txt", small_particles)
        config = RunConfig(testcase="file", input_path=path, params=SMALL)
        particles = load_particles(config)
        np.testing.assert_array_equal(particles.positions, small_particles.positions)
        assert execute(config).row.N == 300

    def test_run_writes_csv(self, tmp_path):
        out = tmp_path / "report.csv"
        report = run(_cube_config(mode="tree", out=out, fmt="csv"))
        assert BenchReport.from_csv(out).rows == report.rows

    def test_run_writes_human(self, tmp_path):
        out = tmp_path / "report.txt"
        run(_cube_config(mode="tree", out=out))
        assert out.read_text().startswith("        N")


class TestStudies:
    def test_parameter_sweep_grid(self, small_particles):
        base = TreecodeParams(leaf_size=20)
        report = parameter_sweep(
            small_particles, base, orders=[0, 4], thetas=[0.8, 0.3]
        )
        assert [(r.theta, r.p) for r in report.rows] == [
            (0.8, 0),
            (0.8, 4),
            (0.3, 0),
            (0.3, 4),
        ]
        assert len({r.time_direct_s for r in report.rows}) == 1
        errors = {(r.theta, r.p): r.error_E for r in report.rows}
        assert errors[(0.3, 4)] < errors[(0.8, 0)]

    def test_sweep_rejects_bad_order(self, small_particles):
        with pytest.raises(ParameterError):
            parameter_sweep(small_particles, orders=[20], thetas=[0.5])

    def test_size_scaling(self):
        report = size_scaling([200, 400], TreecodeParams(leaf_size=30))
        assert [r.N for r in report.rows] == [200, 400]
        assert all(r.error_E is not None for r in report.rows)

    def test_strong_scaling(self, small_particles):
        report = strong_scaling(
            small_particles, [1, 2], TreecodeParams(leaf_size=30), direct=False
        )
        assert [r.workers for r in report.rows] == [1, 2]
        assert report.rows[0].farfield_evals == report.rows[1].farfield_evals
        table = format_scaling(report)
        assert len(table.splitlines()) == 3
        with pytest.raises(ParameterError):
            strong_scaling(small_particles, [])

    def test_weak_scaling(self):
        report = weak_scaling(100, [1, 2], TreecodeParams(leaf_size=30))
        assert [r.N for r in report.rows] == [100, 200]
        assert report.rows[0].error_E is None
        assert "PE%" in format_scaling(report, weak=True)

    def test_format_empty(self):
        assert format_scaling(BenchReport()) == ""
