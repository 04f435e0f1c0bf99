"""Tests for the least-squares core: solver, residualization, VIF, variances."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ancovalab import (
    ConstantTreatment,
    DesignMatrix,
    DimensionMismatch,
    InsufficientDof,
    PerfectCollinearity,
    RankDeficient,
    estimated_variance_adjusted,
    estimated_variance_unadjusted,
    fwl_residualize,
    least_squares,
    r_squared_z_given_x,
    vif,
)
from conftest import random_regression_instance

# The four-point instance used throughout: z on (1, x) has slope 1/2 and
# intercept 1/2, so the residual is (0, 1/2, -1/2, 0) with RSS 1/2.
Z4 = np.array([1.0, 1.0, 0.0, 0.0])
X4 = np.array([1.0, 0.0, 0.0, -1.0])


class TestDesignMatrix:
    def test_promotes_1d_and_labels(self):
        dm = DesignMatrix(np.array([1.0, 2.0, 3.0]))
        assert dm.values.shape == (3, 1)
        assert dm.column_labels == ("x_1",)

    def test_rejects_wide_and_nonfinite(self):
        with pytest.raises(DimensionMismatch):
            DesignMatrix(np.ones((2, 3)))
        with pytest.raises(DimensionMismatch):
            DesignMatrix(np.array([[1.0], [np.nan]]))
        with pytest.raises(DimensionMismatch):
            DesignMatrix(np.ones((3, 1)), column_labels=("a", "b"))


class TestLeastSquares:
    def test_intercept_only_fit_is_the_mean(self):
        fit = least_squares(np.ones((3, 1)), np.array([2.0, 4.0, 6.0]))
        np.testing.assert_allclose(fit.coefficients, [4.0])
        np.testing.assert_allclose(fit.residuals, [-2.0, 0.0, 2.0])
        assert fit.rss == pytest.approx(8.0)
        assert fit.dof == 2

    def test_two_column_hand_fit(self):
        design = np.column_stack([np.ones(4), X4])
        fit = least_squares(design, Z4)
        np.testing.assert_allclose(fit.coefficients, [0.5, 0.5], atol=1e-12)
        np.testing.assert_allclose(fit.residuals, [0.0, 0.5, -0.5, 0.0], atol=1e-12)
        assert fit.rss == pytest.approx(0.5, abs=1e-12)

    def test_duplicated_column_is_rank_deficient(self):
        x = np.random.default_rng(0).standard_normal(6)
        design = np.column_stack([np.ones(6), x, x])
        with pytest.raises(RankDeficient):
            least_squares(design, np.arange(6.0))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            least_squares(np.ones((3, 1)), np.ones(4))
        with pytest.raises(DimensionMismatch):
            least_squares(np.ones((2, 3)), np.ones(2))

    def test_fit_invariants_on_random_instances(self):
        rng = np.random.default_rng(101)
        for _ in range(50):
            y, z, x = random_regression_instance(rng)
            design = np.column_stack([np.ones(len(y)), z, x])
            fit = least_squares(design, y)
            np.testing.assert_allclose(fit.fitted + fit.residuals, y, rtol=0, atol=1e-10)
            assert fit.rss == pytest.approx(float(fit.residuals @ fit.residuals))
            assert fit.dof == len(y) - design.shape[1]
            # residuals orthogonal to every design column
            for j in range(design.shape[1]):
                column = design[:, j]
                bound = 1e-8 * np.linalg.norm(column) * np.linalg.norm(fit.residuals)
                assert abs(column @ fit.residuals) <= max(bound, 1e-12)

    def test_matches_lstsq_reference(self):
        rng = np.random.default_rng(7)
        y, z, x = random_regression_instance(rng, n=40, k=3)
        design = np.column_stack([np.ones(40), z, x])
        fit = least_squares(design, y)
        reference = np.linalg.lstsq(design, y, rcond=None)[0]
        np.testing.assert_allclose(fit.coefficients, reference, rtol=1e-9)


class TestFwlResidualize:
    def test_orthogonal_covariates_leave_centered_z(self):
        # centered x orthogonal to centered z: residual is exactly z - zbar
        z = np.array([1.0, 1.0, 0.0, 0.0])
        x = np.array([1.0, -1.0, 1.0, -1.0])
        assert x @ z == pytest.approx(0.0)
        residual = fwl_residualize(z, x)
        np.testing.assert_allclose(residual, z - z.mean(), atol=1e-12)

    def test_hand_example(self):
        np.testing.assert_allclose(
            fwl_residualize(Z4, X4), [0.0, 0.5, -0.5, 0.0], atol=1e-12
        )

    def test_constant_z_is_rank_deficient(self):
        with pytest.raises(RankDeficient):
            fwl_residualize(np.ones(5), np.arange(5.0))

    def test_residual_orthogonality(self):
        rng = np.random.default_rng(11)
        y, z, x = random_regression_instance(rng, n=30, k=2)
        residual = fwl_residualize(z, x)
        assert abs(residual.sum()) < 1e-8
        for j in range(x.shape[1]):
            assert abs(x[:, j] @ residual) < 1e-8

    def test_full_design_coefficient_equals_residual_ratio(self):
        # partialling-out identity, 200 random instances
        rng = np.random.default_rng(2024)
        for _ in range(200):
            y, z, x = random_regression_instance(rng)
            residual = fwl_residualize(z, x)
            via_fwl = float(residual @ y) / float(residual @ residual)
            design = np.column_stack([np.ones(len(y)), z, x])
            via_full = least_squares(design, y).coefficients[1]
            assert via_full == pytest.approx(via_fwl, rel=1e-9)


class TestVif:
    def test_orthogonal_covariates_give_one(self):
        z = np.array([1.0, 1.0, 0.0, 0.0])
        x = np.array([1.0, -1.0, 1.0, -1.0])
        assert vif(z, x) == pytest.approx(1.0, abs=1e-12)

    def test_hand_example_is_two(self):
        assert vif(Z4, X4) == pytest.approx(2.0, abs=1e-10)

    def test_perfect_collinearity(self):
        x = np.array([0.3, -1.2, 0.4, 2.0])
        with pytest.raises(PerfectCollinearity):
            vif(x, x)

    def test_constant_treatment(self):
        with pytest.raises(ConstantTreatment):
            vif(np.full(4, 2.0), X4)

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_lower_bound_and_duality(self, seed):
        rng = np.random.default_rng(seed)
        _, z, x = random_regression_instance(rng)
        value = vif(z, x)
        assert value >= 1.0 - 1e-12
        assert value * (1.0 - r_squared_z_given_x(z, x)) == pytest.approx(1.0, abs=1e-9)


class TestRSquared:
    def test_orthogonal_is_zero(self):
        z = np.array([1.0, 1.0, 0.0, 0.0])
        x = np.array([1.0, -1.0, 1.0, -1.0])
        assert r_squared_z_given_x(z, x) == pytest.approx(0.0, abs=1e-12)

    def test_hand_example_is_half(self):
        assert r_squared_z_given_x(Z4, X4) == pytest.approx(0.5, abs=1e-12)

    def test_affine_function_is_one(self):
        x = np.array([0.3, -1.2, 0.4, 2.0, 0.9])
        z = 2.0 * x - 1.0
        assert r_squared_z_given_x(z, x) == pytest.approx(1.0, abs=1e-12)


class TestEstimatedVariances:
    def test_unadjusted_perfect_fit_is_zero(self):
        z = np.array([0.0, 1.0, 0.0, 1.0])
        y = np.array([0.0, 2.0, 0.0, 2.0])
        assert estimated_variance_unadjusted(y, z) == pytest.approx(0.0, abs=1e-20)

    def test_unadjusted_hand_value(self):
        # group means are both 1/2, each residual +-1/2: sigma2 = 1/2, tss_z = 1
        y = np.array([1.0, 0.0, 0.0, 1.0])
        assert estimated_variance_unadjusted(y, Z4) == pytest.approx(0.5, abs=1e-12)

    def test_unadjusted_insufficient_dof(self):
        with pytest.raises(InsufficientDof):
            estimated_variance_unadjusted(np.array([1.0, 2.0]), np.array([0.0, 1.0]))

    def test_adjusted_perfect_fit_is_zero(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal(8)
        z = rng.standard_normal(8)
        y = 1.0 + 2.0 * z - x
        assert estimated_variance_adjusted(y, z, x) == pytest.approx(0.0, abs=1e-18)

    def test_adjusted_matches_fwl_and_classical_forms(self):
        rng = np.random.default_rng(17)
        for _ in range(25):
            y, z, x = random_regression_instance(rng)
            value = estimated_variance_adjusted(y, z, x)

            design = np.column_stack([np.ones(len(y)), z, x])
            fit = least_squares(design, y)
            sigma2 = fit.rss / fit.dof
            residual = fwl_residualize(z, x)
            assert value == pytest.approx(sigma2 / float(residual @ residual), rel=1e-10)

            classical = sigma2 * np.linalg.inv(design.T @ design)[1, 1]
            assert value == pytest.approx(classical, rel=1e-8)
            assert value >= 0.0

    def test_adjusted_insufficient_dof(self):
        # n = dim(x) + 2 leaves zero degrees of freedom
        rng = np.random.default_rng(5)
        x = rng.standard_normal((4, 2))
        z = rng.standard_normal(4)
        y = rng.standard_normal(4)
        with pytest.raises(InsufficientDof):
            estimated_variance_adjusted(y, z, x)

    def test_orthogonality_collapse(self):
        # centered x orthogonal to centered z: adjusted equals unadjusted coefficient
        rng = np.random.default_rng(23)
        for _ in range(20):
            n = int(rng.integers(10, 40))
            z = rng.standard_normal(n)
            z -= z.mean()
            raw = rng.standard_normal((n, 2))
            raw -= raw.mean(axis=0)
            # project out z so the centered blocks are exactly orthogonal
            x = raw - np.outer(z, z @ raw) / float(z @ z)
            y = rng.standard_normal(n)
            adjusted = least_squares(np.column_stack([np.ones(n), z, x]), y).coefficients[1]
            unadjusted = least_squares(np.column_stack([np.ones(n), z]), y).coefficients[1]
            assert adjusted == pytest.approx(unadjusted, rel=1e-9, abs=1e-9)
