import numpy as np
import pytest

from config.errors import DimensionError, SampleError, ValidationError
from klepca.solver import solve_kle
from parameterization.core import Parameterization, register
from sampling.snapshots import (
    assemble,
    center,
    default_checkpoints,
    from_raw,
    sample_designs,
    variance_convergence,
)

from conftest import linear_toy


class TestSampleDesigns:
    def test_inside_box(self, airfoil):
        spec, _ = airfoil
        designs = sample_designs(spec, 50, seed=3)
        assert len(designs) == 50
        assert all(d.is_feasible() for d in designs)

    def test_deterministic(self, airfoil):
        spec, _ = airfoil
        a = sample_designs(spec, 5, seed=11)
        b = sample_designs(spec, 5, seed=11)
        c = sample_designs(spec, 5, seed=12)
        assert all(np.array_equal(x.values, y.values) for x, y in zip(a, b))
        assert not np.array_equal(a[0].values, c[0].values)

    def test_needs_two_samples(self, airfoil):
        with pytest.raises(ValidationError):
            sample_designs(airfoil[0], 1)


class TestAssemble:
    def test_airfoil_dimensions(self, airfoil):
        spec, baseline = airfoil
        snapshots = assemble(spec, baseline, sample_designs(spec, 20, seed=1), seed=1)
        assert snapshots.D.shape == (546, 20)
        assert snapshots.U.shape == (14, 20)
        assert np.all(snapshots.D[364:] == 0.0)

    def test_centered(self, small_hull):
        spec, baseline = small_hull
        snapshots = assemble(spec, baseline, sample_designs(spec, 30, seed=2), seed=2)
        np.testing.assert_allclose(snapshots.D.mean(axis=1), 0.0, atol=1e-14)
        np.testing.assert_allclose(snapshots.U.mean(axis=1), 0.0, atol=1e-14)

    def test_columns_follow_sample_order(self, small_hull):
        spec, baseline = small_hull
        designs = sample_designs(spec, 8, seed=5)
        snapshots = assemble(spec, baseline, designs, seed=5)
        param = register(spec, baseline)
        raw = snapshots.displacements()
        for j, u in enumerate(designs):
            np.testing.assert_allclose(raw[:, j], param.deform(u).values, atol=1e-13)
        np.testing.assert_allclose(snapshots.designs()[:, 3], designs[3].values, atol=1e-14)

    def test_threaded_evaluation_is_identical(self, small_hull):
        spec, baseline = small_hull
        designs = sample_designs(spec, 12, seed=6)
        serial = assemble(spec, baseline, designs, seed=6, workers=1)
        threaded = assemble(spec, baseline, designs, seed=6, workers=4)
        np.testing.assert_array_equal(serial.D, threaded.D)
        assert serial.provenance == threaded.provenance

    def test_provenance_tracks_seed(self, airfoil):
        spec, baseline = airfoil
        a = assemble(spec, baseline, sample_designs(spec, 5, seed=1), seed=1)
        b = assemble(spec, baseline, sample_designs(spec, 5, seed=1), seed=1)
        c = assemble(spec, baseline, sample_designs(spec, 5, seed=2), seed=2)
        assert a.provenance == b.provenance
        assert a.provenance != c.provenance

    def test_arrays_are_read_only(self, toy):
        _, _, snapshots = toy
        with pytest.raises(ValueError):
            snapshots.D[0, 0] = 1.0

    def test_failed_sample_reports_index(self, airfoil, monkeypatch):
        spec, baseline = airfoil

        def broken(self, u):
            raise RuntimeError("mesh folded")

        monkeypatch.setattr(Parameterization, "deform", broken)
        with pytest.raises(SampleError) as info:
            assemble(spec, baseline, sample_designs(spec, 3, seed=1))
        assert info.value.index == 0

    def test_no_designs(self, airfoil):
        with pytest.raises(ValidationError):
            assemble(airfoil[0], airfoil[1], [])


class TestFromRaw:
    def test_column_mismatch(self):
        with pytest.raises(DimensionError):
            from_raw(np.zeros((6, 4)), np.zeros((1, 5)), [-1.0], [1.0])

    def test_bounds_length(self):
        with pytest.raises(DimensionError):
            from_raw(np.zeros((6, 4)), np.zeros((2, 4)), [-1.0], [1.0])

    def test_two_pass_centering(self):
        matrix = 1e8 + np.random.default_rng(0).normal(size=(3, 50))
        centered, mean = center(matrix)
        np.testing.assert_allclose(centered.mean(axis=1), 0.0, atol=1e-7)
        np.testing.assert_allclose(centered + mean[:, None], matrix)


class TestVarianceConvergence:
    def test_full_sample_matches_spectrum(self):
        shape, _, snapshots = linear_toy(L=4, M=3, S=40, seed=2)
        table = variance_convergence(snapshots, shape, [10, 20, 40])
        assert [s for s, _ in table] == [10, 20, 40]
        basis = solve_kle(snapshots, shape, 0.95)
        assert table[-1][1] == pytest.approx(basis.eigenvalues.sum(), rel=1e-8)
        assert table[-1][1] == pytest.approx(basis.sigma2, rel=1e-12)

    def test_checkpoints_out_of_range(self, toy):
        shape, _, snapshots = toy
        with pytest.raises(ValidationError):
            variance_convergence(snapshots, shape, [5, 100])

    def test_checkpoints_increasing(self, toy):
        shape, _, snapshots = toy
        with pytest.raises(ValidationError):
            variance_convergence(snapshots, shape, [10, 5])

    def test_default_checkpoints(self):
        points = default_checkpoints(1000)
        assert points[0] == 10
        assert points[-1] == 1000
        assert points == sorted(set(points))
