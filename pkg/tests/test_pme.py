import numpy as np
import pytest

from config.errors import DimensionError, ProvenanceError, SizeCapError, ValidationError
from klepca.solver import nse_per_sample, project, project_matrix, solve_kle
from optimize.problems import penalized_objective
from parameterization.spec import DesignVector
from pme import (
    bound_violation,
    embed,
    nse_per_sample_pme,
    overflow_fraction,
    project_design_space,
    reconstruct_u,
    sample_latent,
    solve_pme_direct,
)
from pme.embedding import latent_coordinates, reconstruct_geometry, split_augmented
from sampling.snapshots import assemble, sample_designs

from conftest import line_shape, linear_toy


def fitted(L=3, M=2, S=20, seed=0, confidence=1.0, weights=None):
    shape, B, snapshots = linear_toy(L=L, M=M, S=S, seed=seed, weights=weights)
    basis = solve_kle(snapshots, shape, confidence)
    return shape, snapshots, basis, embed(snapshots, basis, shape)


class TestEmbed:
    def test_single_variable_is_exact(self):
        shape, snapshots, basis, emb = fitted(L=4, M=1, S=15, seed=2)
        assert emb.N == 1
        alpha = latent_coordinates(emb.V, basis, snapshots, shape)
        raw = snapshots.designs()
        for j in range(snapshots.S):
            np.testing.assert_allclose(reconstruct_u(emb, alpha[:, j]).values, raw[:, j], atol=1e-12)

    def test_full_rank_pre_image(self):
        shape, snapshots, basis, emb = fitted(L=5, M=3, S=40, seed=5)
        assert emb.N == 3
        alpha = latent_coordinates(emb.V, basis, snapshots, shape)
        u_hat = emb.mean_u[:, None] + emb.V @ alpha
        np.testing.assert_allclose(u_hat, snapshots.designs(), atol=1e-10)

    def test_closed_form(self, toy):
        shape, _, snapshots = toy
        basis = solve_kle(snapshots, shape, 1.0)
        emb = embed(snapshots, basis, shape)
        C = snapshots.U @ snapshots.D.T / snapshots.S
        expected = C @ np.diag(shape.gw_diagonal) @ basis.retained @ np.diag(1.0 / basis.eigenvalues[:basis.N])
        np.testing.assert_allclose(emb.V, expected, atol=1e-12)

    def test_latent_matches_geometric_projection(self, toy):
        shape, _, snapshots = toy
        basis = solve_kle(snapshots, shape, 1.0)
        emb = embed(snapshots, basis, shape)
        np.testing.assert_allclose(latent_coordinates(emb.V, basis, snapshots, shape),
                                   project_matrix(basis, snapshots.D, shape), atol=1e-13)
        d_hat = snapshots.D[:, 4]
        np.testing.assert_allclose(project_design_space(emb, d_hat, shape).values,
                                   project(basis, d_hat, shape).values, atol=1e-13)

    def test_bounds_contain_training_points(self):
        shape, snapshots, basis, emb = fitted(L=6, M=4, S=50, seed=8, confidence=0.9)
        alpha = latent_coordinates(emb.V, basis, snapshots, shape)
        assert np.all(alpha >= emb.x_lower[:, None])
        assert np.all(alpha <= emb.x_upper[:, None])
        np.testing.assert_array_equal(alpha.min(axis=1), emb.x_lower)
        np.testing.assert_array_equal(alpha.max(axis=1), emb.x_upper)

    def test_margin_inflates_box(self, toy):
        shape, _, snapshots = toy
        basis = solve_kle(snapshots, shape, 1.0)
        tight = embed(snapshots, basis, shape)
        loose = embed(snapshots, basis, shape, margin=0.1)
        span = tight.x_upper - tight.x_lower
        np.testing.assert_allclose(loose.x_lower, tight.x_lower - 0.1 * span)
        np.testing.assert_allclose(loose.x_upper, tight.x_upper + 0.1 * span)
        assert loose.digest() != tight.digest()
        with pytest.raises(ValidationError):
            embed(snapshots, basis, shape, margin=-0.1)

    def test_foreign_basis(self, toy):
        shape, _, snapshots = toy
        _, _, other = linear_toy(seed=1)
        basis = solve_kle(other, shape, 1.0)
        with pytest.raises(ProvenanceError):
            embed(snapshots, basis, shape)

    def test_shape_mismatch(self, toy):
        shape, _, snapshots = toy
        basis = solve_kle(snapshots, shape, 1.0)
        with pytest.raises(DimensionError):
            embed(snapshots, basis, line_shape(4))

    def test_read_only(self, toy):
        shape, _, snapshots = toy
        emb = embed(snapshots, solve_kle(snapshots, shape, 1.0), shape)
        with pytest.raises(ValueError):
            emb.V[0, 0] = 1.0


class TestReconstruction:
    def test_origin_is_mean(self, toy):
        shape, _, snapshots = toy
        emb = embed(snapshots, solve_kle(snapshots, shape, 1.0), shape)
        np.testing.assert_array_equal(reconstruct_u(emb, np.zeros(emb.N)).values, emb.mean_u)
        np.testing.assert_array_equal(reconstruct_geometry(emb, np.zeros(emb.N)).values, emb.mean_delta)

    def test_wrong_length(self, toy):
        shape, _, snapshots = toy
        emb = embed(snapshots, solve_kle(snapshots, shape, 1.0), shape)
        with pytest.raises(DimensionError):
            reconstruct_u(emb, np.zeros(emb.N + 1))
        with pytest.raises(DimensionError):
            reconstruct_geometry(emb, np.zeros(emb.N + 1))

    def test_bound_violation(self):
        inside = DesignVector([0.5, -1.0], [-1.0, -1.0], [1.0, 1.0])
        assert bound_violation(inside) == 0.0
        outside = DesignVector([1.5, -2.0, 0.0], [-1.0] * 3, [1.0] * 3)
        assert bound_violation(outside) == pytest.approx(1.5)

    def test_nse_matches_geometric_nse(self):
        shape, snapshots, basis, emb = fitted(L=6, M=4, S=40, seed=3, confidence=0.8)
        np.testing.assert_allclose(nse_per_sample_pme(emb, snapshots, shape),
                                   nse_per_sample(basis, snapshots, shape), rtol=1e-10, atol=1e-14)

    def test_nse_rejects_other_snapshots(self, toy):
        shape, _, snapshots = toy
        emb = embed(snapshots, solve_kle(snapshots, shape, 1.0), shape)
        _, _, other = linear_toy(seed=4)
        with pytest.raises(ProvenanceError):
            nse_per_sample_pme(emb, other, shape)


class TestLatentSampling:
    def test_inside_latent_box(self, toy):
        shape, _, snapshots = toy
        emb = embed(snapshots, solve_kle(snapshots, shape, 1.0), shape)
        points = sample_latent(emb, 200, seed=5)
        assert points.shape == (200, emb.N)
        assert np.all(points >= emb.x_lower) and np.all(points <= emb.x_upper)
        np.testing.assert_array_equal(points, sample_latent(emb, 200, seed=5))
        with pytest.raises(ValidationError):
            sample_latent(emb, 0)

    def test_overflow_fraction_counts_infeasible(self, small_hull):
        spec, baseline = small_hull
        snapshots = assemble(spec, baseline, sample_designs(spec, 200, seed=3), seed=3)
        basis = solve_kle(snapshots, baseline, 0.95)
        emb = embed(snapshots, basis, baseline)
        points = sample_latent(emb, 300, seed=9)
        expected = np.mean([not reconstruct_u(emb, x).is_feasible() for x in points])
        fraction = overflow_fraction(emb, points)
        assert 0.0 <= fraction <= 1.0
        assert fraction == pytest.approx(expected)


class TestDirectSolve:
    @pytest.mark.parametrize("seed", range(5))
    def test_matches_closed_form(self, seed):
        weights = None if seed % 2 == 0 else np.array([1.0, 0.0, 0.5, 1.0])
        shape, snapshots, basis, emb = fitted(L=4, M=2, S=15, seed=seed, weights=weights)
        values, Z_tilde, n = solve_pme_direct(snapshots, shape, 1.0)
        assert n == basis.N
        np.testing.assert_allclose(values[:n], basis.eigenvalues[:n], atol=1e-10 * basis.eigenvalues[0])
        Z, V = split_augmented(values, Z_tilde, shape, snapshots.M, n, reference=basis.retained)
        np.testing.assert_allclose(Z * np.sqrt(shape.gw_diagonal)[:, None],
                                   basis.retained * np.sqrt(shape.gw_diagonal)[:, None], atol=1e-8)
        np.testing.assert_allclose(V, emb.V, atol=1e-8)

    def test_airfoil_spectrum(self, airfoil, airfoil_snapshots):
        _, baseline = airfoil
        basis = solve_kle(airfoil_snapshots, baseline, 0.95)
        solution = solve_pme_direct(airfoil_snapshots, baseline, 0.95)
        assert solution.N == basis.N
        np.testing.assert_allclose(solution.eigenvalues[:basis.N], basis.eigenvalues[:basis.N], rtol=1e-6)

    @pytest.mark.parametrize("confidence", [0.5, 0.8, 0.95])
    def test_mode_count_follows_confidence(self, confidence):
        shape, snapshots, _, _ = fitted(L=5, M=4, S=30, seed=11)
        basis = solve_kle(snapshots, shape, confidence)
        assert solve_pme_direct(snapshots, shape, confidence).N == basis.N

    def test_rejects_bad_confidence(self, toy):
        shape, _, snapshots = toy
        with pytest.raises(ValidationError):
            solve_pme_direct(snapshots, shape, 0.0)

    def test_size_cap(self, toy):
        shape, _, snapshots = toy
        with pytest.raises(SizeCapError):
            solve_pme_direct(snapshots, shape, cap=5)


class TestPresetEmbedding:
    def test_nse_paths_agree(self, preset_case):
        _, baseline, snapshots = preset_case
        basis = solve_kle(snapshots, baseline, 0.95)
        emb = embed(snapshots, basis, baseline)
        np.testing.assert_allclose(nse_per_sample_pme(emb, snapshots, baseline),
                                   nse_per_sample(basis, snapshots, baseline), rtol=1e-10, atol=1e-14)

    def test_full_rank_pre_image(self, preset_case):
        _, baseline, snapshots = preset_case
        emb = embed(snapshots, solve_kle(snapshots, baseline, 1.0), baseline)
        designs = snapshots.designs()
        scale = np.abs(designs).max()
        X = project_matrix(emb.basis, snapshots.D, baseline, emb.N)
        np.testing.assert_allclose(emb.mean_u[:, None] + emb.V @ X, designs, rtol=0, atol=1e-8 * scale)
        for j in range(0, snapshots.S, 97):
            np.testing.assert_allclose(reconstruct_u(emb, X[:, j]).values, designs[:, j], rtol=0, atol=1e-8 * scale)

    def test_hull_latent_box_overflows(self, hull, hull_snapshots):
        _, baseline = hull
        emb = embed(hull_snapshots, solve_kle(hull_snapshots, baseline, 0.95), baseline)
        points = sample_latent(emb, 1000, seed=9)
        assert overflow_fraction(emb, points) > 0.0
        outside = [u for u in (reconstruct_u(emb, x) for x in points) if not u.is_feasible()]
        assert outside
        assert all(penalized_objective(1.0, u, 1000.0) > 1.0 for u in outside)
