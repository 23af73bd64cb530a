"""Base DA method class, run configuration and result records."""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np

from src.pathwise.config import config
from src.pathwise.exceptions import AnalysisError
from src.pathwise.profiles.metadata import SampleMetadata
from src.pathwise.profiles.tables import AbundanceTable
from src.pathwise.stats.multitest import PAdjustMethod, adjust_p_values
from src.pathwise.stats.transforms import relative_abundance
from src.pathwise.utils.logger import get_logger

LOG2FC_EPSILON = 1e-10
OMNIBUS_GROUP2 = "all"
MAX_SEED = 2 ** 64 - 1


class DaaMethodName(str, Enum):
    """Differential abundance methods."""

    STUDENT_T = "student_t"
    WELCH_T = "welch_t"
    WILCOXON = "wilcoxon"
    KRUSKAL_WALLIS = "kruskal_wallis"
    ANOVA = "anova"
    ALDEX2 = "aldex2"
    LINDA = "linda"

    @classmethod
    def parse(cls, value: Union[str, "DaaMethodName"]) -> "DaaMethodName":
        if isinstance(value, DaaMethodName):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise AnalysisError(f"unknown DA method '{value}' (valid methods: {valid})") from None


class ClassicTransform(str, Enum):
    """Scale the classic tests run on."""

    RELATIVE_ABUNDANCE = "relative_abundance"
    CLR = "clr"


@dataclass
class DaaConfig:
    """Configuration of one DA run."""

    method: DaaMethodName = DaaMethodName.LINDA
    p_adjust: PAdjustMethod = field(default_factory=lambda: PAdjustMethod.parse(config.daa.p_adjust))
    seed: int = field(default_factory=lambda: config.daa.seed)
    mc_instances: int = field(default_factory=lambda: config.daa.mc_instances)
    pseudo_count: float = field(default_factory=lambda: config.daa.pseudo_count)
    reference_group: Optional[str] = None
    transform: ClassicTransform = ClassicTransform.RELATIVE_ABUNDANCE
    covariates: tuple[str, ...] = ()
    wilcoxon_exact: Optional[bool] = None
    continuity: bool = True

    def __post_init__(self):
        self.method = DaaMethodName.parse(self.method)
        self.p_adjust = PAdjustMethod.parse(self.p_adjust)
        self.transform = ClassicTransform(self.transform)
        self.covariates = tuple(self.covariates)
        if not 0 <= int(self.seed) <= MAX_SEED:
            raise AnalysisError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        self.seed = int(self.seed)
        if self.mc_instances < 2:
            raise AnalysisError(f"mc_instances must be at least 2, got {self.mc_instances}")
        if self.pseudo_count < 0:
            raise AnalysisError(f"pseudo_count must be non-negative, got {self.pseudo_count}")


@dataclass
class DaaResultRecord:
    """Per-feature outcome of one method on one comparison family."""

    feature_id: str
    method: str
    group1: str
    group2: str
    effect: float
    log2_fold_change: float
    p_value: float
    adjusted_p: float
    adjust_method: str
    note: str = ""

    @property
    def family(self) -> tuple[str, str]:
        return (self.group1, self.group2)

    @property
    def omnibus(self) -> bool:
        return self.group2 == OMNIBUS_GROUP2


@dataclass(frozen=True)
class Comparison:
    """One comparison family: two groups, or every group for omnibus tests."""

    group1: str
    group2: str
    groups: tuple[str, ...]

    @property
    def omnibus(self) -> bool:
        return self.group2 == OMNIBUS_GROUP2


@dataclass
class FeatureStat:
    """Unadjusted per-feature output of a method."""

    effect: float
    p_value: float
    note: str = ""


def log2_fold_changes(
    table: AbundanceTable, meta: SampleMetadata, group1: str, group2: str
) -> np.ndarray:
    """log2 of mean relative abundance in group1 over group2 (epsilon 1e-10)."""
    rel = relative_abundance(table)
    idx1 = table.sample_index(meta.samples_in(group1))
    idx2 = table.sample_index(meta.samples_in(group2))
    m1 = rel[:, idx1].mean(axis=1)
    m2 = rel[:, idx2].mean(axis=1)
    return np.log2((m1 + LOG2FC_EPSILON) / (m2 + LOG2FC_EPSILON))


class BaseDaaMethod(ABC):
    """Base class for all DA methods."""

    name: DaaMethodName
    omnibus: bool = False
    min_group_size: int = 2

    def __init__(self, daa_config: DaaConfig):
        """
        Initialize the method.

        Args:
            daa_config: Run configuration
        """
        self.config = daa_config
        self.logger = get_logger(f"method.{self.name.value}")

    @abstractmethod
    def compare(
        self, table: AbundanceTable, meta: SampleMetadata, comparison: Comparison
    ) -> list[FeatureStat]:
        """
        Test every feature of ``table`` for one comparison family.

        Args:
            table: Aligned abundance table (all samples)
            meta: Aligned metadata
            comparison: Family to test

        Returns:
            One FeatureStat per feature, in table order
        """

    def check_groups(self, meta: SampleMetadata, groups: Sequence[str]) -> None:
        sizes = meta.group_sizes()
        for label in groups:
            if sizes.get(label, 0) < self.min_group_size:
                raise AnalysisError(
                    f"group '{label}' has {sizes.get(label, 0)} sample(s); "
                    f"{self.name.value} needs at least {self.min_group_size}"
                )

    def run(
        self, table: AbundanceTable, meta: SampleMetadata, comparison: Comparison
    ) -> list[DaaResultRecord]:
        """
        Run the method on one family and adjust p-values across its features.

        Args:
            table: Aligned abundance table
            meta: Aligned metadata
            comparison: Family to test

        Returns:
            Records in table feature order
        """
        self.logger.bind(group1=comparison.group1, group2=comparison.group2).info(
            "Running comparison"
        )
        self.check_groups(meta, comparison.groups)
        stats = self.compare(table, meta, comparison)

        if comparison.omnibus:
            if len(comparison.groups) == 2:
                fold = log2_fold_changes(table, meta, *comparison.groups)
            else:
                fold = np.full(table.n_features, math.nan)
        else:
            fold = log2_fold_changes(table, meta, comparison.group1, comparison.group2)

        adjusted = adjust_p_values([s.p_value for s in stats], self.config.p_adjust)
        records = [
            DaaResultRecord(
                feature_id=feature_id,
                method=self.name.value,
                group1=comparison.group1,
                group2=comparison.group2,
                effect=float(stat.effect),
                log2_fold_change=float(fc),
                p_value=float(stat.p_value),
                adjusted_p=float(q),
                adjust_method=self.config.p_adjust.value,
                note=stat.note,
            )
            for feature_id, stat, fc, q in zip(table.feature_ids, stats, fold, adjusted)
        ]
        self.logger.bind(
            features=len(records),
            significant=sum(r.adjusted_p <= config.daa.alpha for r in records),
        ).info("Comparison complete")
        return records
