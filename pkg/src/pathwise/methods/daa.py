"""
Multi-method differential abundance: dispatch, comparison families, consensus
and the results TSV format.
"""

import io
import itertools
import math
from collections import OrderedDict
from dataclasses import dataclass, field, replace
from pathlib import Path
from statistics import median
from typing import Mapping, Optional, Sequence, Type, Union

import pandas as pd

from src.pathwise.config import config
from src.pathwise.exceptions import AnalysisError, MetadataError, TableFormatError
from src.pathwise.methods.aldex2 import Aldex2Method
from src.pathwise.methods.base import (
    OMNIBUS_GROUP2,
    BaseDaaMethod,
    Comparison,
    DaaConfig,
    DaaMethodName,
    DaaResultRecord,
)
from src.pathwise.methods.classic import (
    AnovaMethod,
    KruskalWallisMethod,
    StudentTMethod,
    WelchTMethod,
    WilcoxonMethod,
)
from src.pathwise.methods.linda import LindaMethod
from src.pathwise.profiles.metadata import SampleMetadata
from src.pathwise.profiles.tables import AbundanceTable
from src.pathwise.utils.formatting import atomic_write_text, format_real, parse_real, read_utf8_text
from src.pathwise.utils.logger import get_logger

logger = get_logger(__name__)

METHOD_REGISTRY: dict[DaaMethodName, Type[BaseDaaMethod]] = {
    DaaMethodName.STUDENT_T: StudentTMethod,
    DaaMethodName.WELCH_T: WelchTMethod,
    DaaMethodName.WILCOXON: WilcoxonMethod,
    DaaMethodName.KRUSKAL_WALLIS: KruskalWallisMethod,
    DaaMethodName.ANOVA: AnovaMethod,
    DaaMethodName.ALDEX2: Aldex2Method,
    DaaMethodName.LINDA: LindaMethod,
}

RESULT_COLUMNS = (
    "feature",
    "method",
    "group1",
    "group2",
    "effect",
    "log2_fold_change",
    "p_value",
    "adjusted_p",
    "adjust_method",
    "note",
)


def create_method(daa_config: DaaConfig) -> BaseDaaMethod:
    return METHOD_REGISTRY[daa_config.method](daa_config)


def comparison_families(
    groups: Sequence[str], omnibus: bool, reference_group: Optional[str] = None
) -> list[Comparison]:
    """
    Decompose the groups into comparison families.

    Omnibus methods get a single family over every group. Two-group methods
    compare ``reference_group`` against each other group when it is given, and
    every unordered pair in lexicographic order otherwise.
    """
    groups = sorted(groups)
    if omnibus:
        return [Comparison(";".join(groups), OMNIBUS_GROUP2, tuple(groups))]
    if reference_group is not None:
        if reference_group not in groups:
            raise MetadataError(
                f"reference group '{reference_group}' not found (groups: {', '.join(groups)})"
            )
        return [
            Comparison(reference_group, other, (reference_group, other))
            for other in groups
            if other != reference_group
        ]
    return [Comparison(a, b, (a, b)) for a, b in itertools.combinations(groups, 2)]


def _canonicalize(
    table: AbundanceTable, meta: SampleMetadata
) -> tuple[AbundanceTable, SampleMetadata]:
    if set(table.sample_ids) != set(meta.sample_ids):
        raise AnalysisError("table and metadata are not aligned; run align_samples first")
    ordered = sorted(table.sample_ids)
    return table.select_samples(ordered), meta.select(ordered)


def pathway_daa(
    table: AbundanceTable, meta: SampleMetadata, daa_config: Optional[DaaConfig] = None
) -> list[DaaResultRecord]:
    """
    Run one DA method over every comparison family.

    Args:
        table: Abundance table aligned with ``meta``
        meta: Sample metadata
        daa_config: Method and options (default: linda with configured defaults)

    Returns:
        Records sorted by (group1, group2, adjusted_p, feature_id)
    """
    daa_config = daa_config or DaaConfig()
    meta.require_groups(2)
    table, meta = _canonicalize(table, meta)
    method = create_method(daa_config)

    families = comparison_families(meta.groups, method.omnibus, daa_config.reference_group)
    logger.bind(method=daa_config.method.value, families=len(families)).info(
        "Running differential abundance"
    )
    records: list[DaaResultRecord] = []
    for comparison in families:
        records.extend(method.run(table, meta, comparison))
    records.sort(key=lambda r: (r.group1, r.group2, r.adjusted_p, r.feature_id))
    return records


def aldex2_daa(
    table: AbundanceTable, meta: SampleMetadata, daa_config: Optional[DaaConfig] = None
) -> list[DaaResultRecord]:
    """ALDEx2-style DA (pairwise when more than two groups)."""
    return pathway_daa(table, meta, replace(daa_config or DaaConfig(), method=DaaMethodName.ALDEX2))


def linda_daa(
    table: AbundanceTable, meta: SampleMetadata, daa_config: Optional[DaaConfig] = None
) -> list[DaaResultRecord]:
    """LinDA-style DA (pairwise when more than two groups)."""
    return pathway_daa(table, meta, replace(daa_config or DaaConfig(), method=DaaMethodName.LINDA))


def split_families(
    records: Sequence[DaaResultRecord],
) -> "OrderedDict[tuple[str, str], list[DaaResultRecord]]":
    """Group records by (group1, group2), in order of first appearance."""
    families: OrderedDict[tuple[str, str], list[DaaResultRecord]] = OrderedDict()
    for record in records:
        families.setdefault(record.family, []).append(record)
    return families


@dataclass
class ConsensusRow:
    feature_id: str
    n_significant: int
    n_methods: int
    consensus_flag: bool
    median_adjusted_p: float
    adjusted_p: dict[str, float] = field(default_factory=dict)


@dataclass
class ConsensusTable:
    """Per-feature agreement of several methods on one comparison family."""

    group1: str
    group2: str
    methods: list[str]
    alpha: float
    min_agree: int
    rows: list[ConsensusRow]

    def flagged(self) -> list[str]:
        return [row.feature_id for row in self.rows if row.consensus_flag]

    def row(self, feature_id: str) -> ConsensusRow:
        for row in self.rows:
            if row.feature_id == feature_id:
                return row
        raise KeyError(feature_id)

    def to_tsv(self) -> str:
        header = [
            "feature",
            "group1",
            "group2",
            "n_significant",
            "n_methods",
            "consensus",
            "median_adjusted_p",
        ] + [f"adjusted_p_{m}" for m in self.methods]
        lines = ["\t".join(header)]
        for r in self.rows:
            cells = [
                r.feature_id,
                self.group1,
                self.group2,
                str(r.n_significant),
                str(r.n_methods),
                "true" if r.consensus_flag else "false",
                format_real(r.median_adjusted_p),
            ] + [format_real(r.adjusted_p[m]) for m in self.methods]
            lines.append("\t".join(cells))
        return "\n".join(lines) + "\n"


def consensus_daa(
    results: Mapping[str, Sequence[DaaResultRecord]],
    alpha: Optional[float] = None,
    min_agree: Optional[int] = None,
) -> ConsensusTable:
    """
    Combine several methods' results on one comparison family.

    Args:
        results: Method label -> records of exactly one family
        alpha: Significance threshold on adjusted_p (default: configured alpha)
        min_agree: Methods that must agree (default: ceil(methods / 2))

    Returns:
        ConsensusTable sorted by (not flagged, median adjusted p, feature id)
    """
    alpha = config.daa.alpha if alpha is None else alpha
    if not results:
        raise AnalysisError("consensus needs at least one method")
    methods = sorted(results)
    if min_agree is None:
        min_agree = math.ceil(len(methods) / 2)
    if not 1 <= min_agree <= len(methods):
        raise AnalysisError(f"min_agree must be between 1 and {len(methods)}, got {min_agree}")

    by_method: dict[str, dict[str, DaaResultRecord]] = {}
    pairwise_family = None
    omnibus_family = None
    for method in methods:
        families = split_families(results[method])
        if len(families) != 1:
            raise AnalysisError(
                f"method '{method}' has {len(families)} comparison families; "
                "consensus needs exactly one"
            )
        family = next(iter(families))
        if family[1] == OMNIBUS_GROUP2:
            omnibus_family = omnibus_family or family
        elif pairwise_family is None:
            pairwise_family = family
        elif set(family) != set(pairwise_family):
            raise AnalysisError(
                f"method '{method}' compares {family[0]} vs {family[1]}, "
                f"expected {pairwise_family[0]} vs {pairwise_family[1]}"
            )
        by_method[method] = {r.feature_id: r for r in results[method]}

    reference = set(by_method[methods[0]])
    for method in methods[1:]:
        other = set(by_method[method])
        if other != reference:
            diff = sorted(reference ^ other)
            raise AnalysisError(f"feature sets differ between methods: {', '.join(diff)}")

    rows = []
    for feature_id in reference:
        adjusted = {m: by_method[m][feature_id].adjusted_p for m in methods}
        n_significant = sum(q <= alpha for q in adjusted.values())
        rows.append(
            ConsensusRow(
                feature_id=feature_id,
                n_significant=n_significant,
                n_methods=len(methods),
                consensus_flag=n_significant >= min_agree,
                median_adjusted_p=float(median(adjusted.values())),
                adjusted_p=adjusted,
            )
        )
    rows.sort(key=lambda r: (not r.consensus_flag, r.median_adjusted_p, r.feature_id))

    group1, group2 = pairwise_family or omnibus_family
    logger.bind(
        methods=methods, flagged=sum(r.consensus_flag for r in rows), min_agree=min_agree
    ).info("Consensus computed")
    return ConsensusTable(group1, group2, methods, alpha, min_agree, rows)


def consensus_by_family(
    results: Mapping[str, Sequence[DaaResultRecord]],
    alpha: Optional[float] = None,
    min_agree: Optional[int] = None,
) -> list[ConsensusTable]:
    """
    Consensus for every pairwise family present in ``results``.

    Omnibus methods take part in every family. With only omnibus methods a
    single table over the omnibus family is returned.
    """
    pairwise: OrderedDict[tuple[str, str], dict[str, list[DaaResultRecord]]] = OrderedDict()
    omnibus: dict[str, list[DaaResultRecord]] = {}
    for method in sorted(results):
        for family, records in split_families(results[method]).items():
            if family[1] == OMNIBUS_GROUP2:
                omnibus[method] = records
            else:
                pairwise.setdefault(family, {})[method] = records
    if not pairwise:
        return [consensus_daa(omnibus, alpha, min_agree)]
    return [
        consensus_daa({**omnibus, **methods}, alpha, min_agree)
        for _, methods in sorted(pairwise.items())
    ]


def records_to_frame(records: Sequence[DaaResultRecord]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            [
                r.feature_id,
                r.method,
                r.group1,
                r.group2,
                r.effect,
                r.log2_fold_change,
                r.p_value,
                r.adjusted_p,
                r.adjust_method,
                r.note,
            ]
            for r in records
        ],
        columns=list(RESULT_COLUMNS),
    )


def format_daa_results(records: Sequence[DaaResultRecord]) -> str:
    lines = ["\t".join(RESULT_COLUMNS)]
    for r in records:
        lines.append(
            "\t".join(
                [
                    r.feature_id,
                    r.method,
                    r.group1,
                    r.group2,
                    format_real(r.effect),
                    format_real(r.log2_fold_change),
                    format_real(r.p_value),
                    format_real(r.adjusted_p),
                    r.adjust_method,
                    r.note,
                ]
            )
        )
    return "\n".join(lines) + "\n"


def write_daa_results(records: Sequence[DaaResultRecord], path: Union[str, Path]) -> Path:
    path = Path(path)
    atomic_write_text(path, format_daa_results(records))
    logger.bind(path=str(path), records=len(records)).info("Wrote DA results")
    return path


def format_consensus(tables: Sequence[ConsensusTable]) -> str:
    """One TSV for several families; the header is written once."""
    if not tables:
        raise AnalysisError("no consensus tables to write")
    parts = [table.to_tsv() for table in tables]
    return parts[0] + "".join(part.split("\n", 1)[1] for part in parts[1:])


def write_consensus(tables: Union[ConsensusTable, Sequence[ConsensusTable]], path: Union[str, Path]) -> Path:
    path = Path(path)
    if isinstance(tables, ConsensusTable):
        tables = [tables]
    atomic_write_text(path, format_consensus(tables))
    logger.bind(path=str(path), families=len(tables)).info("Wrote consensus table")
    return path


def read_daa_results(path: Union[str, Path]) -> list[DaaResultRecord]:
    """Read a DA results TSV written by :func:`write_daa_results`."""
    path = Path(path)
    if not path.is_file():
        raise TableFormatError(f"DA results file not found: {path}")
    text = read_utf8_text(path, TableFormatError)
    frame = pd.read_csv(io.StringIO(text), sep="\t", dtype=str, keep_default_na=False, na_filter=False)
    missing = [c for c in RESULT_COLUMNS if c not in frame.columns]
    if missing:
        raise TableFormatError(f"{path}: missing DA result column(s): {', '.join(missing)}", 1)
    records = []
    for offset, row in enumerate(frame.itertuples(index=False), start=2):
        try:
            records.append(
                DaaResultRecord(
                    feature_id=row.feature,
                    method=row.method,
                    group1=row.group1,
                    group2=row.group2,
                    effect=parse_real(row.effect),
                    log2_fold_change=parse_real(row.log2_fold_change),
                    p_value=parse_real(row.p_value),
                    adjusted_p=parse_real(row.adjusted_p),
                    adjust_method=row.adjust_method,
                    note=row.note,
                )
            )
        except ValueError as exc:
            raise TableFormatError(f"{path}: {exc}", offset) from exc
    return records
