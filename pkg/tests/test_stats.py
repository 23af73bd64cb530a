"""Tests for the statistical building blocks."""

import itertools
import math

import numpy as np
import pytest
from scipy import stats as scipy_stats

from src.pathwise.exceptions import AnalysisError, DistributionError
from src.pathwise.stats import (
    ClassicTest,
    Distribution,
    adjust_p_values,
    closure,
    clr_transform,
    dist_sf,
    kde_mode,
    relative_abundance,
    run_classic_test,
    silverman_bandwidth,
)
from src.pathwise.stats.classic import wilcoxon_rows


class TestDistributions:
    def test_normal_symmetry(self):
        for x in (0.0, 0.3, 1.7, 4.2):
            assert dist_sf(Distribution.std_normal(), x) + dist_sf(Distribution.std_normal(), -x) == pytest.approx(1.0, abs=1e-12)
        assert dist_sf(Distribution.std_normal(), 0.0) == pytest.approx(0.5, abs=1e-15)

    def test_cauchy_is_student_t_one_df(self):
        for x in (-3.0, -0.5, 0.0, 0.5, 2.0, 10.0):
            expected = 0.5 - math.atan(x) / math.pi
            assert dist_sf(Distribution.student_t(1), x) == pytest.approx(expected, abs=1e-10)

    def test_chi_squared_two_df_is_exponential(self):
        for x in (0.1, 1.0, 2.5, 7.0):
            assert dist_sf(Distribution.chi_squared(2), x) == pytest.approx(math.exp(-x / 2), abs=1e-10)

    def test_f_matches_scipy(self):
        assert dist_sf(Distribution.f(3, 12), 2.4) == pytest.approx(scipy_stats.f.sf(2.4, 3, 12), abs=1e-10)

    def test_non_positive_tails(self):
        assert dist_sf(Distribution.chi_squared(3), 0.0) == 1.0
        assert dist_sf(Distribution.f(2, 5), -1.0) == 1.0
        assert dist_sf(Distribution.student_t(5), math.inf) == 0.0

    def test_vector_input(self):
        out = dist_sf(Distribution.std_normal(), np.array([0.0, 1.0]))
        assert out.shape == (2,)

    @pytest.mark.parametrize("df", [0, -1, math.nan, math.inf])
    def test_invalid_df(self, df):
        with pytest.raises(DistributionError):
            Distribution.student_t(df)


class TestTwoGroupTests:
    def test_welch_matches_scipy(self):
        a, b = [1.2, 3.4, 2.2, 5.1], [7.3, 6.1, 9.0, 8.8, 7.7]
        result = run_classic_test([a, b], ClassicTest.WELCH_T)
        ref = scipy_stats.ttest_ind(a, b, equal_var=False)
        assert result.statistic == pytest.approx(ref.statistic, rel=1e-10)
        assert result.p_value == pytest.approx(ref.pvalue, rel=1e-8)

    def test_student_matches_scipy(self):
        a, b = [1.0, 2.0, 4.0], [3.0, 5.0, 6.0, 8.0]
        result = run_classic_test([a, b], ClassicTest.STUDENT_T)
        ref = scipy_stats.ttest_ind(a, b)
        assert result.p_value == pytest.approx(ref.pvalue, rel=1e-8)
        assert result.df == 5

    def test_identical_constant_groups_are_degenerate(self):
        result = run_classic_test([[2.0, 2.0], [2.0, 2.0, 2.0]], ClassicTest.WELCH_T)
        assert result.p_value == 1.0
        assert result.degenerate

    def test_different_constant_groups(self):
        result = run_classic_test([[1.0, 1.0], [2.0, 2.0]], ClassicTest.STUDENT_T)
        assert result.p_value == 0.0
        assert result.degenerate

    def test_t_needs_two_per_group(self):
        with pytest.raises(AnalysisError):
            run_classic_test([[1.0], [2.0, 3.0]], ClassicTest.WELCH_T)

    def test_non_finite_input(self):
        with pytest.raises(AnalysisError):
            run_classic_test([[1.0, math.nan], [2.0, 3.0]], ClassicTest.WELCH_T)


def _enumeration_oracle(x, y):
    """Two-sided exact p of U by brute force over all relabelings."""
    pooled = list(x) + list(y)
    n1 = len(x)

    def u_of(idx):
        first = [pooled[i] for i in idx]
        rest = [pooled[i] for i in range(len(pooled)) if i not in idx]
        return sum((a > b) + 0.5 * (a == b) for a in first for b in rest)

    observed = u_of(tuple(range(n1)))
    null = [u_of(idx) for idx in itertools.combinations(range(len(pooled)), n1)]
    lower = sum(u <= observed + 1e-9 for u in null) / len(null)
    upper = sum(u >= observed - 1e-9 for u in null) / len(null)
    return min(1.0, 2 * min(lower, upper))


class TestWilcoxon:
    def test_exact_matches_enumeration_for_small_untied_inputs(self):
        rng = np.random.default_rng(11)
        for n1 in range(1, 6):
            for n2 in range(1, 11 - n1):
                for _ in range(3):
                    values = rng.permutation(n1 + n2).astype(float) + rng.random()
                    x, y = values[:n1], values[n1:]
                    result = run_classic_test([x, y], ClassicTest.WILCOXON)
                    assert result.method_detail == "exact"
                    assert result.p_value == pytest.approx(_enumeration_oracle(x, y), abs=1e-12)

    def test_total_separation_three_vs_three(self):
        result = run_classic_test([[1, 2, 3], [4, 5, 6]], ClassicTest.WILCOXON)
        assert result.statistic == 0.0
        assert result.p_value == pytest.approx(0.1, abs=1e-12)

    def test_ties_use_normal_approximation(self):
        result = run_classic_test([[1, 1, 2, 3], [3, 4, 4, 5]], ClassicTest.WILCOXON)
        assert result.method_detail == "normal-approximation"
        ref = scipy_stats.mannwhitneyu([1, 1, 2, 3], [3, 4, 4, 5], method="asymptotic")
        assert result.p_value == pytest.approx(ref.pvalue, rel=1e-9)

    def test_all_values_tied(self):
        result = run_classic_test([[2, 2], [2, 2]], ClassicTest.WILCOXON)
        assert result.p_value == 1.0
        assert result.degenerate

    def test_rows_match_scalar(self):
        matrix = np.array([[1.0, 2.0, 3.0, 10.0, 11.0], [5.0, 1.0, 4.0, 2.0, 3.0]])
        in_first = np.array([True, True, True, False, False])
        rows = wilcoxon_rows(matrix, in_first)
        for i in range(2):
            scalar = run_classic_test([matrix[i, :3], matrix[i, 3:]], ClassicTest.WILCOXON)
            assert rows.p_value[i] == pytest.approx(scalar.p_value)


class TestOmnibus:
    def test_anova_equals_student_t_squared(self):
        rng = np.random.default_rng(3)
        for _ in range(1000):
            a = rng.normal(size=int(rng.integers(2, 8)))
            b = rng.normal(0.5, size=int(rng.integers(2, 8)))
            f = run_classic_test([a, b], ClassicTest.ANOVA)
            t = run_classic_test([a, b], ClassicTest.STUDENT_T)
            assert f.statistic == pytest.approx(t.statistic ** 2, rel=1e-9, abs=1e-9)
            assert f.p_value == pytest.approx(t.p_value, abs=1e-9)

    def test_kruskal_equals_wilcoxon_z_squared(self):
        rng = np.random.default_rng(5)
        for _ in range(1000):
            a = rng.normal(size=int(rng.integers(3, 9)))
            b = rng.normal(size=int(rng.integers(3, 9)))
            h = run_classic_test([a, b], ClassicTest.KRUSKAL_WALLIS)
            w = run_classic_test([a, b], ClassicTest.WILCOXON, exact=False, continuity=False)
            assert h.p_value == pytest.approx(w.p_value, abs=1e-9)

    def test_kruskal_matches_scipy_with_ties(self):
        groups = [[1, 2, 2, 3], [2, 4, 5], [5, 5, 6, 7]]
        result = run_classic_test(groups, ClassicTest.KRUSKAL_WALLIS)
        ref = scipy_stats.kruskal(*groups)
        assert result.statistic == pytest.approx(ref.statistic, rel=1e-10)
        assert result.p_value == pytest.approx(ref.pvalue, rel=1e-9)

    def test_anova_needs_more_samples_than_groups(self):
        with pytest.raises(AnalysisError):
            run_classic_test([[1.0], [2.0]], ClassicTest.ANOVA)


class TestMultipleTesting:
    def test_bh_hand_computed(self):
        p = [0.01, 0.04, 0.03, 0.005]
        np.testing.assert_allclose(adjust_p_values(p, "BH"), [0.02, 0.04, 0.04, 0.02], atol=1e-12)

    def test_holm_hand_computed(self):
        p = [0.01, 0.04, 0.03, 0.005]
        np.testing.assert_allclose(adjust_p_values(p, "holm"), [0.03, 0.06, 0.06, 0.02], atol=1e-12)

    def test_by_hand_computed(self):
        # BH scaled by 1 + 1/2 + 1/3 + 1/4 = 25/12
        p = [0.01, 0.04, 0.03, 0.005]
        np.testing.assert_allclose(adjust_p_values(p, "BY"), [1 / 24, 1 / 12, 1 / 12, 1 / 24], atol=1e-12)

    def test_bh_follows_permutation(self):
        rng = np.random.default_rng(12)
        p = rng.random(40) ** 3
        adjusted = adjust_p_values(p, "BH")
        for _ in range(10):
            order = rng.permutation(p.size)
            np.testing.assert_allclose(adjust_p_values(p[order], "BH"), adjusted[order], rtol=1e-12)

    def test_bonferroni_caps_at_one(self):
        np.testing.assert_allclose(adjust_p_values([0.2, 0.5, 0.01], "bonferroni"), [0.6, 1.0, 0.03], atol=1e-12)

    def test_none_is_identity(self):
        np.testing.assert_array_equal(adjust_p_values([0.3, 0.1], "none"), [0.3, 0.1])

    def test_adjusted_never_below_raw(self):
        rng = np.random.default_rng(0)
        p = rng.random(50)
        for method in ("BH", "BY", "holm", "bonferroni"):
            assert np.all(adjust_p_values(p, method) >= p)

    def test_invalid_p(self):
        with pytest.raises(AnalysisError):
            adjust_p_values([0.1, 1.2])

    def test_unknown_method(self):
        with pytest.raises(AnalysisError, match="valid"):
            adjust_p_values([0.1], "sidak")


class TestTransforms:
    def test_relative_abundance_columns_sum_to_one(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            matrix = rng.integers(0, 1000, size=(15, 6)).astype(float) + 1
            np.testing.assert_allclose(relative_abundance(matrix).sum(axis=0), 1.0, atol=1e-12)

    def test_clr_columns_sum_to_zero(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            matrix = rng.integers(0, 500, size=(12, 5)).astype(float)
            np.testing.assert_allclose(clr_transform(matrix, 0.5).sum(axis=0), 0.0, atol=1e-9)

    def test_clr_scale_invariance(self):
        rng = np.random.default_rng(4)
        matrix = rng.random((8, 4)) + 0.1
        scales = rng.random(4) * 100
        np.testing.assert_allclose(clr_transform(matrix * scales), clr_transform(matrix), atol=1e-9)

    def test_clr_rejects_zero_without_pseudo(self):
        with pytest.raises(AnalysisError):
            clr_transform(np.array([[0.0, 1.0], [1.0, 1.0]]))

    def test_closure_names_empty_sample(self):
        with pytest.raises(AnalysisError, match="S2"):
            closure(np.array([[1.0, 0.0], [2.0, 0.0]]), ["S1", "S2"])


class TestKde:
    def test_mode_of_constant_data(self):
        assert kde_mode(np.full(5, 1.5)) == 1.5

    def test_mode_near_cluster(self):
        x = np.concatenate([np.random.default_rng(0).normal(0.0, 0.05, 50), [3.0, 4.0]])
        assert abs(kde_mode(x)) < 0.1

    def test_silverman_falls_back_to_sd(self):
        x = np.array([0.0, 0.0, 0.0, 0.0, 1.0])
        assert silverman_bandwidth(x) == pytest.approx(0.9 * np.std(x, ddof=1) * 5 ** -0.2)

    def test_silverman_uses_sample_sd(self):
        x = np.array([1.0, 2.0, 3.0, 4.0, 10.0, 11.0])
        iqr = np.percentile(x, 75) - np.percentile(x, 25)
        expected = 0.9 * min(np.std(x, ddof=1), iqr / 1.34) * 6 ** -0.2
        assert silverman_bandwidth(x) == pytest.approx(expected)
        assert silverman_bandwidth(np.array([2.0])) == 0.0
