"""LinDA-style linear model on log relative abundances with compositional bias correction."""

import math
from dataclasses import dataclass

import numpy as np

from src.pathwise.exceptions import AnalysisError
from src.pathwise.methods.base import BaseDaaMethod, Comparison, DaaMethodName, FeatureStat
from src.pathwise.profiles.metadata import SampleMetadata
from src.pathwise.profiles.tables import AbundanceTable
from src.pathwise.stats.distributions import student_t_sf_vec
from src.pathwise.stats.kde import kde_mode
from src.pathwise.stats.transforms import closure

RECOMMENDED_GROUP_SIZE = 3


@dataclass
class LindaFit:
    """Per-feature coefficients of the group indicator."""

    raw: np.ndarray
    debiased: np.ndarray
    se: np.ndarray
    df: int
    mode: float

    @property
    def t(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.se > 0, self.debiased / self.se, 0.0)

    @property
    def p_value(self) -> np.ndarray:
        t = self.t
        p = np.minimum(1.0, 2.0 * student_t_sf_vec(np.abs(t), np.full(t.shape, float(self.df))))
        degenerate = self.se <= 0
        return np.where(degenerate, np.where(self.debiased == 0, 1.0, 0.0), p)


def fit_linda(
    values: np.ndarray, design: np.ndarray, pseudo_count: float, sample_ids=None
) -> LindaFit:
    """
    Fit every feature by OLS and subtract the KDE mode of the group coefficients.

    Args:
        values: Non-negative abundances, features x samples
        design: samples x regressors, intercept first, group indicator second
        pseudo_count: Added to every value before closure
        sample_ids: Column names for error messages

    Returns:
        LindaFit
    """
    n, r = design.shape
    if n < r + 1:
        raise AnalysisError(f"linda needs at least {r + 1} samples for {r} regressors, got {n}")
    if np.linalg.matrix_rank(design) < r:
        raise AnalysisError("linda design matrix is rank-deficient")

    w = np.log(closure(np.asarray(values, dtype=np.float64) + pseudo_count, sample_ids))
    if not np.all(np.isfinite(w)):
        raise AnalysisError("zero abundances need a positive pseudo_count for linda")

    gram_inv = np.linalg.inv(design.T @ design)
    beta = w @ design @ gram_inv.T
    residuals = w - beta @ design.T
    df = n - r
    sigma2 = np.sum(residuals ** 2, axis=1) / df
    se = np.sqrt(np.maximum(sigma2 * gram_inv[1, 1], 0.0))

    raw = beta[:, 1]
    mode = kde_mode(raw)
    return LindaFit(raw=raw, debiased=raw - mode, se=se, df=df, mode=mode)


class LindaMethod(BaseDaaMethod):
    name = DaaMethodName.LINDA

    def design(self, meta: SampleMetadata, members1: list[str], members2: list[str]) -> np.ndarray:
        samples = members1 + members2
        columns = [np.ones(len(samples)), np.array([1.0] * len(members1) + [0.0] * len(members2))]
        for name in self.config.covariates:
            if name not in meta.covariates:
                raise AnalysisError(f"covariate '{name}' is not present in the metadata")
            columns.append(np.array([meta.covariates[name][sid] for sid in samples]))
        return np.column_stack(columns)

    def compare(
        self, table: AbundanceTable, meta: SampleMetadata, comparison: Comparison
    ) -> list[FeatureStat]:
        members1 = meta.samples_in(comparison.group1)
        members2 = meta.samples_in(comparison.group2)
        if min(len(members1), len(members2)) < RECOMMENDED_GROUP_SIZE:
            self.logger.bind(
                group1_size=len(members1), group2_size=len(members2)
            ).warning(f"linda is unreliable below {RECOMMENDED_GROUP_SIZE} samples per group")

        columns = table.sample_index(members1 + members2)
        fit = fit_linda(
            table.values[:, columns],
            self.design(meta, members1, members2),
            self.config.pseudo_count,
            [table.sample_ids[j] for j in columns],
        )
        self.logger.bind(mode=round(fit.mode, 6), df=fit.df).debug("Estimated compositional bias")
        effect = fit.debiased / math.log(2.0)
        p = fit.p_value
        return [
            FeatureStat(float(effect[i]), float(p[i]), "degenerate" if fit.se[i] <= 0 else "")
            for i in range(table.n_features)
        ]
