"""Classic two-group and omnibus tests.

Two-group tests (Student t, Welch t, Wilcoxon rank-sum) are implemented row-wise
over a features x samples matrix so the Monte Carlo methods can run them for
every feature and instance at once; :func:`run_classic_test` is the scalar
entry point on top of the same code.
"""

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.stats import rankdata

from src.pathwise.exceptions import AnalysisError
from src.pathwise.stats.distributions import Distribution, dist_sf, student_t_sf_vec

EXACT_MAX_N = 12
_TOL = 1e-9

DETAIL_EXACT = "exact"
DETAIL_NORMAL = "normal-approximation"
DETAIL_DEGENERATE = "degenerate"


class ClassicTest(str, Enum):
    STUDENT_T = "student_t"
    WELCH_T = "welch_t"
    WILCOXON = "wilcoxon"
    KRUSKAL_WALLIS = "kruskal_wallis"
    ANOVA = "anova"


@dataclass(frozen=True)
class TestResult:
    """Outcome of one statistical test."""

    __test__ = False

    statistic: float
    p_value: float
    df: Optional[float] = None
    method_detail: str = ""

    @property
    def degenerate(self) -> bool:
        return DETAIL_DEGENERATE in self.method_detail


@dataclass
class RowResults:
    """Row-wise results of a two-group test."""

    statistic: np.ndarray
    p_value: np.ndarray
    df: Optional[np.ndarray]
    degenerate: np.ndarray
    exact: np.ndarray


def _split(matrix: np.ndarray, in_first: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    in_first = np.asarray(in_first, dtype=bool)
    return matrix[:, in_first], matrix[:, ~in_first]


def _resolve_degenerate(diff: np.ndarray, se: np.ndarray):
    """Zero standard error: p = 1 for equal means, p = 0 otherwise."""
    degenerate = se <= 0
    equal = degenerate & (diff == 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        statistic = np.where(degenerate, np.where(equal, 0.0, np.sign(diff) * np.inf), diff / se)
    return statistic, degenerate, equal


def student_t_rows(matrix: np.ndarray, in_first: np.ndarray) -> RowResults:
    """Pooled-variance two-sample t test for every row."""
    x1, x2 = _split(matrix, in_first)
    n1, n2 = x1.shape[1], x2.shape[1]
    if n1 < 2 or n2 < 2:
        raise AnalysisError("student_t needs at least 2 samples per group")
    diff = x1.mean(axis=1) - x2.mean(axis=1)
    df = n1 + n2 - 2
    pooled = ((n1 - 1) * x1.var(axis=1, ddof=1) + (n2 - 1) * x2.var(axis=1, ddof=1)) / df
    se = np.sqrt(pooled * (1.0 / n1 + 1.0 / n2))
    statistic, degenerate, equal = _resolve_degenerate(diff, se)
    p = 2.0 * student_t_sf_vec(np.abs(np.where(degenerate, 0.0, statistic)), np.full(diff.shape, df))
    p = np.where(degenerate, np.where(equal, 1.0, 0.0), np.minimum(p, 1.0))
    return RowResults(statistic, p, np.full(diff.shape, float(df)), degenerate, np.zeros(diff.shape, bool))


def welch_t_rows(matrix: np.ndarray, in_first: np.ndarray) -> RowResults:
    """Welch's unequal-variance t test with Welch-Satterthwaite df for every row."""
    x1, x2 = _split(matrix, in_first)
    n1, n2 = x1.shape[1], x2.shape[1]
    if n1 < 2 or n2 < 2:
        raise AnalysisError("welch_t needs at least 2 samples per group")
    diff = x1.mean(axis=1) - x2.mean(axis=1)
    a = x1.var(axis=1, ddof=1) / n1
    b = x2.var(axis=1, ddof=1) / n2
    se = np.sqrt(a + b)
    statistic, degenerate, equal = _resolve_degenerate(diff, se)
    with np.errstate(divide="ignore", invalid="ignore"):
        df = (a + b) ** 2 / (a * a / (n1 - 1) + b * b / (n2 - 1))
    df = np.where(degenerate, float(n1 + n2 - 2), df)
    p = 2.0 * student_t_sf_vec(np.abs(np.where(degenerate, 0.0, statistic)), df)
    p = np.where(degenerate, np.where(equal, 1.0, 0.0), np.minimum(p, 1.0))
    return RowResults(statistic, p, df, degenerate, np.zeros(diff.shape, bool))


@lru_cache(maxsize=64)
def _exact_u_null(n1: int, n2: int) -> np.ndarray:
    """Sorted null distribution of U (no ties) over all C(n1+n2, n1) rank assignments."""
    n = n1 + n2
    offset = n1 * (n1 + 1) / 2.0
    sums = [sum(c) for c in itertools.combinations(range(1, n + 1), n1)]
    return np.sort(np.asarray(sums, dtype=np.float64) - offset)


def _exact_two_sided(u: float, null: np.ndarray) -> float:
    total = null.size
    lower = np.searchsorted(null, u + _TOL, side="right") / total
    upper = (total - np.searchsorted(null, u - _TOL, side="left")) / total
    return float(min(1.0, 2.0 * min(lower, upper)))


def _enumerated_null(ranks: np.ndarray, n1: int) -> np.ndarray:
    offset = n1 * (n1 + 1) / 2.0
    sums = [sum(c) for c in itertools.combinations(ranks.tolist(), n1)]
    return np.sort(np.asarray(sums, dtype=np.float64) - offset)


def _tie_term(ranks: np.ndarray) -> float:
    _, counts = np.unique(ranks, return_counts=True)
    return float(np.sum(counts.astype(np.float64) ** 3 - counts))


def wilcoxon_rows(
    matrix: np.ndarray,
    in_first: np.ndarray,
    exact: Optional[bool] = None,
    continuity: bool = True,
) -> RowResults:
    """
    Wilcoxon rank-sum (Mann-Whitney U) test for every row.

    The statistic is U of the first group. ``exact=None`` enumerates the
    permutation distribution when n1 + n2 <= 12 and the row has no ties, and
    uses the tie-corrected normal approximation otherwise. ``exact=True``
    always enumerates (over mid-ranks when tied); ``exact=False`` never does.
    """
    x1, x2 = _split(matrix, in_first)
    n1, n2 = x1.shape[1], x2.shape[1]
    if n1 < 1 or n2 < 1:
        raise AnalysisError("wilcoxon needs at least 1 sample per group")
    n = n1 + n2
    combined = np.hstack([x1, x2])
    ranks = rankdata(combined, axis=1)
    u = ranks[:, :n1].sum(axis=1) - n1 * (n1 + 1) / 2.0

    sorted_rows = np.sort(combined, axis=1)
    has_ties = np.any(np.diff(sorted_rows, axis=1) == 0, axis=1) if n > 1 else np.zeros(len(u), bool)

    mu = n1 * n2 / 2.0
    tie_terms = np.zeros(len(u))
    for i in np.flatnonzero(has_ties):
        tie_terms[i] = _tie_term(ranks[i])
    variance = n1 * n2 / 12.0 * ((n + 1) - tie_terms / (n * (n - 1))) if n > 1 else np.zeros(len(u))
    sigma = np.sqrt(np.maximum(variance, 0.0))

    d = u - mu
    if continuity:
        d = np.sign(d) * np.maximum(np.abs(d) - 0.5, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(sigma > 0, d / sigma, 0.0)
    p = np.minimum(1.0, 2.0 * dist_sf(Distribution.std_normal(), np.abs(z)))

    degenerate = sigma <= 0
    p = np.where(degenerate, 1.0, p)

    if exact is None:
        use_exact = (~has_ties) & (n <= EXACT_MAX_N)
    else:
        use_exact = np.full(len(u), bool(exact))
    use_exact &= ~degenerate

    for i in np.flatnonzero(use_exact):
        null = _enumerated_null(ranks[i], n1) if has_ties[i] else _exact_u_null(n1, n2)
        p[i] = _exact_two_sided(float(u[i]), null)

    return RowResults(u, np.asarray(p, dtype=np.float64), None, degenerate, use_exact)


def kruskal_wallis(groups: Sequence[np.ndarray]) -> TestResult:
    """Kruskal-Wallis H with tie correction; chi-squared(k - 1) upper tail."""
    k = len(groups)
    sizes = np.array([len(g) for g in groups])
    combined = np.concatenate(groups)
    n = combined.size
    ranks = rankdata(combined)
    bounds = np.cumsum(np.concatenate([[0], sizes]))
    rank_sums = np.array([ranks[bounds[i]:bounds[i + 1]].sum() for i in range(k)])
    h = 12.0 / (n * (n + 1)) * np.sum(rank_sums ** 2 / sizes) - 3.0 * (n + 1)
    correction = 1.0 - _tie_term(ranks) / (n ** 3 - n)
    if correction <= 0:
        return TestResult(0.0, 1.0, float(k - 1), DETAIL_DEGENERATE)
    h /= correction
    h = max(h, 0.0)
    p = dist_sf(Distribution.chi_squared(k - 1), h)
    return TestResult(float(h), float(p), float(k - 1), "chi-squared")


def one_way_anova(groups: Sequence[np.ndarray]) -> TestResult:
    """One-way ANOVA F test; F(k - 1, N - k) upper tail."""
    k = len(groups)
    n = sum(len(g) for g in groups)
    if n - k < 1:
        raise AnalysisError(f"anova needs more samples ({n}) than groups ({k})")
    grand = np.concatenate(groups).mean()
    ss_between = sum(len(g) * (g.mean() - grand) ** 2 for g in groups)
    ss_within = sum(np.sum((g - g.mean()) ** 2) for g in groups)
    d1, d2 = k - 1, n - k
    if ss_within <= 0:
        if ss_between <= 0:
            return TestResult(0.0, 1.0, float(d1), DETAIL_DEGENERATE)
        return TestResult(math.inf, 0.0, float(d1), DETAIL_DEGENERATE)
    f = (ss_between / d1) / (ss_within / d2)
    p = dist_sf(Distribution.f(d1, d2), f)
    return TestResult(float(f), float(p), float(d1), f"F({d1},{d2})")


def run_classic_test(
    groups: Sequence[Sequence[float]],
    method: ClassicTest,
    exact: Optional[bool] = None,
    continuity: bool = True,
) -> TestResult:
    """
    Run one classic test on a list of group vectors (two-sided p-values).

    Args:
        groups: One vector of observations per group
        method: Test to run
        exact: Wilcoxon only; see :func:`wilcoxon_rows`
        continuity: Wilcoxon only; apply the 0.5 continuity correction

    Returns:
        TestResult
    """
    method = ClassicTest(method)
    vectors = [np.asarray(g, dtype=np.float64).ravel() for g in groups]
    if any(not np.all(np.isfinite(v)) for v in vectors):
        raise AnalysisError("test input contains non-finite values")

    if method in (ClassicTest.KRUSKAL_WALLIS, ClassicTest.ANOVA):
        if len(vectors) < 2:
            raise AnalysisError(f"{method.value} needs at least 2 groups")
        if any(v.size == 0 for v in vectors):
            raise AnalysisError(f"{method.value} needs non-empty groups")
        if method == ClassicTest.KRUSKAL_WALLIS:
            return kruskal_wallis(vectors)
        return one_way_anova(vectors)

    if len(vectors) != 2:
        raise AnalysisError(f"{method.value} needs exactly 2 groups, got {len(vectors)}")
    row = np.concatenate(vectors)[np.newaxis, :]
    in_first = np.arange(row.shape[1]) < vectors[0].size

    if method == ClassicTest.WILCOXON:
        res = wilcoxon_rows(row, in_first, exact=exact, continuity=continuity)
        detail = DETAIL_DEGENERATE if res.degenerate[0] else (
            DETAIL_EXACT if res.exact[0] else DETAIL_NORMAL
        )
        return TestResult(float(res.statistic[0]), float(res.p_value[0]), None, detail)

    rows = student_t_rows if method == ClassicTest.STUDENT_T else welch_t_rows
    res = rows(row, in_first)
    detail = DETAIL_DEGENERATE if res.degenerate[0] else "t"
    return TestResult(float(res.statistic[0]), float(res.p_value[0]), float(res.df[0]), detail)
