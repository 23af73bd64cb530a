"""Classic tests wrapped as DA methods."""

import numpy as np

from src.pathwise.methods.base import (
    BaseDaaMethod,
    ClassicTransform,
    Comparison,
    DaaMethodName,
    FeatureStat,
)
from src.pathwise.profiles.metadata import SampleMetadata
from src.pathwise.profiles.tables import AbundanceTable
from src.pathwise.stats.classic import (
    DETAIL_DEGENERATE,
    RowResults,
    kruskal_wallis,
    one_way_anova,
    student_t_rows,
    welch_t_rows,
    wilcoxon_rows,
)
from src.pathwise.stats.transforms import clr_transform, relative_abundance


class _TransformedMixin:
    """Puts the table on the configured scale."""

    def scaled_values(self, table: AbundanceTable) -> np.ndarray:
        if self.config.transform == ClassicTransform.CLR:
            return clr_transform(table.values, self.config.pseudo_count)
        return relative_abundance(table)


class _TwoGroupMethod(_TransformedMixin, BaseDaaMethod):
    """Row-wise two-group test; effect = mean(group1) - mean(group2) on the test scale."""

    def rows(self, matrix: np.ndarray, in_first: np.ndarray) -> RowResults:
        raise NotImplementedError

    def compare(
        self, table: AbundanceTable, meta: SampleMetadata, comparison: Comparison
    ) -> list[FeatureStat]:
        idx1 = table.sample_index(meta.samples_in(comparison.group1))
        idx2 = table.sample_index(meta.samples_in(comparison.group2))
        values = self.scaled_values(table)[:, idx1 + idx2]
        in_first = np.zeros(len(idx1) + len(idx2), dtype=bool)
        in_first[: len(idx1)] = True

        result = self.rows(values, in_first)
        diff = values[:, in_first].mean(axis=1) - values[:, ~in_first].mean(axis=1)
        stats = []
        for i in range(table.n_features):
            note = DETAIL_DEGENERATE if result.degenerate[i] else ""
            if result.exact[i]:
                note = "exact"
            stats.append(FeatureStat(float(diff[i]), float(result.p_value[i]), note))
        return stats


class StudentTMethod(_TwoGroupMethod):
    name = DaaMethodName.STUDENT_T

    def rows(self, matrix, in_first):
        return student_t_rows(matrix, in_first)


class WelchTMethod(_TwoGroupMethod):
    name = DaaMethodName.WELCH_T

    def rows(self, matrix, in_first):
        return welch_t_rows(matrix, in_first)


class WilcoxonMethod(_TwoGroupMethod):
    name = DaaMethodName.WILCOXON
    min_group_size = 1

    def rows(self, matrix, in_first):
        return wilcoxon_rows(
            matrix, in_first, exact=self.config.wilcoxon_exact, continuity=self.config.continuity
        )


class _OmnibusMethod(_TransformedMixin, BaseDaaMethod):
    """Runs once across every group; effect is the test statistic."""

    omnibus = True
    min_group_size = 1

    def test(self, groups):
        raise NotImplementedError

    def compare(
        self, table: AbundanceTable, meta: SampleMetadata, comparison: Comparison
    ) -> list[FeatureStat]:
        values = self.scaled_values(table)
        indices = [table.sample_index(meta.samples_in(label)) for label in comparison.groups]
        stats = []
        for row in values:
            result = self.test([row[idx] for idx in indices])
            note = DETAIL_DEGENERATE if result.degenerate else ""
            stats.append(FeatureStat(result.statistic, result.p_value, note))
        return stats


class KruskalWallisMethod(_OmnibusMethod):
    name = DaaMethodName.KRUSKAL_WALLIS

    def test(self, groups):
        return kruskal_wallis(groups)


class AnovaMethod(_OmnibusMethod):
    name = DaaMethodName.ANOVA
    min_group_size = 1

    def test(self, groups):
        return one_way_anova(groups)
