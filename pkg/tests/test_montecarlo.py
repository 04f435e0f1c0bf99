"""Tests for the regime runners, decompositions, and the summary grid."""

import numpy as np
import pytest

from ancovalab import (
    Assignment,
    DesignSpec,
    DgpSpec,
    draw_errors,
    estimated_variance_comparison,
    run_conditional_on_eps,
    run_conditional_on_z,
    run_unconditional,
    select_imbalanced_assignment,
    substream,
    table1_report,
    total_variance_decomposition,
    unit_variance_covariates,
)
from ancovalab.montecarlo import mean_mc_se, variance_gap, variance_mc_se


def _spec(n=30, k=1, beta=1.0, sigma=1.0, tau=2.0, seed=5, design=None, error_dist="normal"):
    x = unit_variance_covariates(n, k, seed)
    return DgpSpec(
        x=x,
        alpha=0.5,
        tau=tau,
        beta=np.full(k, beta),
        sigma=sigma,
        design=design or DesignSpec.complete(n, n // 2),
        error_dist=error_dist,
    )


class TestMoments:
    def test_mean_se_matches_formula(self):
        values = np.random.default_rng(0).standard_normal(4000)
        assert mean_mc_se(values) == pytest.approx(values.std(ddof=1) / np.sqrt(4000))

    def test_variance_se_near_normal_theory(self):
        # for normal data, sd(s^2) ~ sigma^2 * sqrt(2/R)
        values = np.random.default_rng(1).standard_normal(20000) * 3.0
        theory = 9.0 * np.sqrt(2.0 / 20000)
        assert variance_mc_se(values) == pytest.approx(theory, rel=0.2)

    def test_variance_gap_of_identical_series_is_zero(self):
        values = np.random.default_rng(2).standard_normal(500)
        gap, se = variance_gap(values, values)
        assert gap == 0.0
        assert se == 0.0


class TestRunUnconditional:
    def test_zero_beta_matches_noise_only_variance(self):
        spec = _spec(beta=0.0)
        report = run_unconditional(spec, ("unadjusted",), replications=4000, seed=11)
        scale = spec.n / (15 * 15)
        assert report.analytic_reference["var_unadjusted"] == pytest.approx(scale * 1.0)
        summary = report.estimators["unadjusted"]
        assert abs(summary.empirical_variance - scale) <= 4 * summary.mc_se_variance
        assert abs(summary.empirical_mean - spec.tau) <= 4 * summary.mc_se_mean

    def test_variance_gap_positive_with_signal(self):
        spec = _spec(beta=1.0)
        report = run_unconditional(spec, replications=4000, seed=12)
        gap, se = report.variance_gaps["unadjusted-ancova"]
        assert gap > 4 * se
        reference = report.analytic_reference["var_gap_unadjusted_minus_ancova"]
        assert abs(gap - reference) <= 4 * se

    def test_bernoulli_design_mean_is_tau(self):
        spec = _spec(design=DesignSpec.bernoulli(30, 0.5))
        report = run_unconditional(spec, ("unadjusted",), replications=3000, seed=13)
        summary = report.estimators["unadjusted"]
        assert abs(summary.empirical_mean - spec.tau) <= 4 * summary.mc_se_mean
        assert "var_unadjusted" not in report.analytic_reference

    def test_rejects_small_replication_counts(self):
        with pytest.raises(ValueError):
            run_unconditional(_spec(), replications=10, seed=1)

    def test_deterministic_and_schedule_independent(self):
        spec = _spec()
        a = run_unconditional(spec, replications=1500, seed=21)
        b = run_unconditional(spec, replications=1500, seed=21)
        c = run_unconditional(spec, replications=1500, seed=21, n_jobs=3)
        for kind in ("unadjusted", "ancova"):
            assert a.estimators[kind] == b.estimators[kind]
            assert a.estimators[kind] == c.estimators[kind]
        assert a.variance_gaps == c.variance_gaps


class TestRunConditionalOnZ:
    def test_hand_instance_analytics(self):
        # frozen z = (1,1,0,0), x = (1,0,0,-1): var(ancova|Z) = 2,
        # var(unadjusted|Z) = 1, VIF = 2
        x = np.array([1.0, 0.0, 0.0, -1.0])
        spec = DgpSpec(
            x=x,
            alpha=0.0,
            tau=0.5,
            beta=np.array([1.0]),
            sigma=1.0,
            design=DesignSpec.complete(4, 2),
        )
        frozen = Assignment.from_z([1, 1, 0, 0])
        report = run_conditional_on_z(spec, frozen, replications=20000, seed=31)
        analytic = report.analytic_reference
        assert analytic["var_ancova"] == pytest.approx(2.0, abs=1e-12)
        assert analytic["var_unadjusted"] == pytest.approx(1.0, abs=1e-12)
        assert analytic["vif"] == pytest.approx(2.0, abs=1e-12)
        for kind in ("unadjusted", "ancova"):
            summary = report.estimators[kind]
            assert abs(summary.empirical_variance - analytic[f"var_{kind}"]) <= (
                4 * summary.mc_se_variance
            )
        unadj = report.estimators["unadjusted"]
        assert abs(unadj.empirical_mean - analytic["mean_unadjusted"]) <= 4 * unadj.mc_se_mean

    def test_balanced_assignment_has_no_bias(self):
        spec = _spec(n=20)
        # x sorted pairing makes a perfectly balanced split available
        order = np.argsort(spec.x.values[:, 0])
        z = np.zeros(20, dtype=int)
        z[order[::2]] = 1  # alternate along the sorted order
        frozen = Assignment.from_z(z)
        delta = float(np.mean(spec.x.values[z == 1, 0]) - np.mean(spec.x.values[z == 0, 0]))
        report = run_conditional_on_z(spec, frozen, replications=3000, seed=32)
        bias = report.analytic_reference["conditional_bias_unadjusted"]
        assert abs(bias) == pytest.approx(abs(delta), abs=1e-12)
        for kind in ("unadjusted", "ancova"):
            summary = report.estimators[kind]
            reference = report.analytic_reference[f"mean_{kind}"]
            assert abs(summary.empirical_mean - reference) <= 4 * summary.mc_se_mean

    def test_vif_at_least_one_for_any_frozen_assignment(self):
        spec = _spec(n=24, k=2)
        rng = np.random.default_rng(33)
        for _ in range(10):
            z = np.zeros(24, dtype=int)
            z[rng.permutation(24)[: rng.integers(4, 20)]] = 1
            report = run_conditional_on_z(
                spec, Assignment.from_z(z), replications=1000, seed=34
            )
            analytic = report.analytic_reference
            assert analytic["vif"] >= 1.0 - 1e-12
            assert analytic["var_ancova"] >= analytic["var_unadjusted"] - 1e-15


class TestRunConditionalOnEps:
    def test_enumeration_mean_is_exactly_tau(self):
        x = unit_variance_covariates(4, 1, 9)
        spec = DgpSpec(
            x=x,
            alpha=0.3,
            tau=1.7,
            beta=np.array([0.8]),
            sigma=1.0,
            design=DesignSpec.complete(4, 2),
        )
        eps = draw_errors(4, 1.0, "normal", substream(41, 0))
        report = run_conditional_on_eps(spec, eps, seed=0)
        assert report.exact
        assert report.replications == 6
        summary = report.estimators["unadjusted"]
        assert summary.empirical_mean == pytest.approx(1.7, abs=1e-12)
        assert summary.mc_se_mean == 0.0

    def test_sampling_used_above_enumeration_limit(self, default_spec):
        eps = draw_errors(100, 1.0, "normal", substream(42, 0))
        report = run_conditional_on_eps(default_spec, eps, replications=1000, seed=43)
        assert not report.exact
        assert report.replications == 1000

    def test_zero_beta_makes_estimators_equally_precise(self):
        spec = _spec(beta=0.0)
        eps = draw_errors(30, 1.0, "normal", substream(44, 0))
        report = run_conditional_on_eps(spec, eps, replications=4000, seed=45)
        gap, se = report.variance_gaps["unadjusted-ancova"]
        assert abs(gap) <= 4 * se

    def test_predictive_covariates_favor_adjustment(self, default_spec):
        eps = draw_errors(100, 1.0, "normal", substream(46, 0))
        report = run_conditional_on_eps(default_spec, eps, replications=4000, seed=47)
        gap, se = report.variance_gaps["unadjusted-ancova"]
        assert gap > 4 * se


class TestDecomposition:
    def test_on_z_unadjusted_between_term_matches_design_formula(self):
        spec = _spec(n=30, beta=1.0)
        report = total_variance_decomposition(
            spec, "unadjusted", r_outer=150, r_inner=150, conditioning="on_z", seed=51
        )
        # between-group variance is var(beta' delta_x) = scale * beta'S beta
        scale = 30 / (15 * 15)
        expected = scale * 1.0
        assert abs(report.variance_of_inner_mean - expected) <= (
            5 * report.se_variance_of_inner_mean
        )
        assert abs(report.gap) <= 5 * report.se_gap

    def test_on_z_ancova_between_term_is_structural_zero(self):
        spec = _spec(n=30, beta=1.0)
        report = total_variance_decomposition(
            spec, "ancova", r_outer=120, r_inner=120, conditioning="on_z", seed=52
        )
        assert abs(report.variance_of_inner_mean) <= 5 * report.se_variance_of_inner_mean
        assert abs(report.gap) <= 5 * report.se_gap

    def test_on_eps_unadjusted_between_term_is_structural_zero(self):
        spec = _spec(n=30, beta=1.0)
        report = total_variance_decomposition(
            spec, "unadjusted", r_outer=120, r_inner=120, conditioning="on_eps", seed=53
        )
        assert abs(report.variance_of_inner_mean) <= 5 * report.se_variance_of_inner_mean
        assert abs(report.gap) <= 5 * report.se_gap

    def test_validates_inputs(self):
        spec = _spec()
        with pytest.raises(ValueError):
            total_variance_decomposition(spec, "unadjusted", 50, 150, "on_z", 1)
        with pytest.raises(ValueError):
            total_variance_decomposition(spec, "unadjusted", 150, 150, "sideways", 1)


class TestEstimatedVarianceComparison:
    def test_zero_beta_median_near_one(self):
        spec = _spec(n=200, k=1, beta=0.0)
        summary = estimated_variance_comparison(spec, replications=1500, seed=61)
        assert 0.98 <= summary.median <= 1.05

    def test_predictive_covariates_push_ratio_below_one(self):
        spec = _spec(n=200, k=1, beta=1.5)
        summary = estimated_variance_comparison(spec, replications=1500, seed=62)
        assert summary.fraction_below_one > 0.95
        assert summary.q1 <= summary.median <= summary.q3

    def test_large_noise_pushes_ratio_toward_one(self):
        medians = []
        for sigma in (1.0, 10.0, 100.0):
            spec = _spec(n=100, k=1, beta=1.0, sigma=sigma)
            medians.append(
                estimated_variance_comparison(spec, replications=1500, seed=63).median
            )
        assert medians[0] < medians[1] < medians[2] <= 1.05


class TestImbalancePick:
    def test_maximizes_over_candidate_set(self):
        spec = _spec(n=30)
        pick = select_imbalanced_assignment(spec, n_candidates=50, seed=71)
        from ancovalab import diff_in_means, draw_assignment

        scores = []
        for i in range(50):
            candidate = draw_assignment(
                spec.design, spec.x.values, substream(71, 7, i)
            )
            delta = np.atleast_1d(diff_in_means(spec.x.values, candidate))
            scores.append(abs(float(spec.beta @ delta)))
        assert abs(pick.projected_imbalance) == pytest.approx(max(scores), abs=1e-12)

    def test_deterministic(self):
        spec = _spec(n=30)
        a = select_imbalanced_assignment(spec, n_candidates=40, seed=72)
        b = select_imbalanced_assignment(spec, n_candidates=40, seed=72)
        np.testing.assert_array_equal(a.assignment.z, b.assignment.z)

    def test_rerandomized_design_shrinks_the_pick(self):
        complete = _spec(n=30)
        constrained = _spec(n=30, design=DesignSpec.rerandomized(30, 15, 0.2))
        loose = select_imbalanced_assignment(complete, n_candidates=200, seed=73)
        tight = select_imbalanced_assignment(constrained, n_candidates=200, seed=73)
        assert abs(tight.projected_imbalance) < abs(loose.projected_imbalance)


class TestTable1:
    def test_degenerate_spec_flags_and_passes(self):
        spec = _spec(n=30, beta=0.0)
        report = table1_report(spec, replications=10_000, seed=81)
        assert report.degenerate
        assert report.all_passed
        bias_cell = next(
            c
            for c in report.cells
            if c.row == "conditional_on_z" and c.column == "mean_unadjusted"
        )
        assert abs(bias_cell.reference - spec.tau) < 0.2  # no real bias to speak of

    def test_rejects_small_replication_counts(self, default_spec):
        with pytest.raises(ValueError):
            table1_report(default_spec, replications=500, seed=1)
