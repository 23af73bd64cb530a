"""Sample metadata parsing and table/metadata alignment."""

import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

import pandas as pd

from src.pathwise.exceptions import MetadataError
from src.pathwise.profiles.tables import AbundanceTable, delimiter_for
from src.pathwise.utils.formatting import read_utf8_text
from src.pathwise.utils.logger import get_logger

logger = get_logger(__name__)

SAMPLE_ID_HEADERS = ("sample-id", "#SampleID", "sample_name", "sampleid", "id")


@dataclass(frozen=True)
class SampleMetadata:
    """Sample to group assignment plus optional numeric covariates."""

    sample_ids: tuple[str, ...]
    group: Mapping[str, str]
    covariates: Mapping[str, Mapping[str, float]] = field(default_factory=dict)
    group_column: str = "group"

    def __post_init__(self):
        sample_ids = tuple(self.sample_ids)
        if len(set(sample_ids)) != len(sample_ids):
            raise MetadataError("duplicate sample ids in metadata")
        missing = [sid for sid in sample_ids if sid not in self.group]
        if missing:
            raise MetadataError(f"samples without a group label: {', '.join(missing)}")
        object.__setattr__(self, "sample_ids", sample_ids)
        object.__setattr__(self, "group", {sid: self.group[sid] for sid in sample_ids})
        object.__setattr__(
            self,
            "covariates",
            {name: {sid: float(col[sid]) for sid in sample_ids} for name, col in self.covariates.items()},
        )

    @property
    def groups(self) -> list[str]:
        """Distinct group labels in lexicographic order."""
        return sorted(set(self.group.values()))

    def samples_in(self, label: str) -> list[str]:
        """Samples of one group, in metadata order."""
        return [sid for sid in self.sample_ids if self.group[sid] == label]

    def group_sizes(self) -> dict[str, int]:
        return {label: len(self.samples_in(label)) for label in self.groups}

    def labels(self) -> list[str]:
        """Group label of every sample, in metadata order."""
        return [self.group[sid] for sid in self.sample_ids]

    def require_groups(self, minimum: int = 2) -> None:
        if len(self.groups) < minimum:
            raise MetadataError(
                f"at least {minimum} distinct groups are required, found {len(self.groups)}"
                f" ({', '.join(self.groups) or 'none'}) in column '{self.group_column}'"
            )

    def select(self, sample_ids: Sequence[str]) -> "SampleMetadata":
        """Restrict (and reorder) to ``sample_ids``."""
        unknown = [sid for sid in sample_ids if sid not in self.group]
        if unknown:
            raise MetadataError(f"unknown sample id(s): {', '.join(unknown)}")
        return SampleMetadata(
            tuple(sample_ids),
            {sid: self.group[sid] for sid in sample_ids},
            {name: {sid: col[sid] for sid in sample_ids} for name, col in self.covariates.items()},
            self.group_column,
        )


def parse_metadata(
    path: Union[str, Path],
    group_column: str,
    covariates: Optional[Sequence[str]] = None,
) -> SampleMetadata:
    """
    Parse a sample metadata table.

    The first column holds sample ids (``sample-id``, ``#SampleID``,
    ``sample_name`` or anything else). A QIIME 2 ``#q2:types`` row is skipped.

    Args:
        path: TSV/TXT or CSV metadata file
        group_column: Column holding group labels
        covariates: Optional numeric covariate columns

    Returns:
        SampleMetadata
    """
    path = Path(path)
    if not path.is_file():
        raise MetadataError(f"metadata file not found: {path}")

    text = read_utf8_text(path, MetadataError)
    try:
        frame = pd.read_csv(
            io.StringIO(text),
            sep=delimiter_for(path),
            dtype=str,
            keep_default_na=False,
            na_filter=False,
        )
    except pd.errors.EmptyDataError:
        raise MetadataError(f"metadata file is empty: {path}") from None
    except pd.errors.ParserError as e:
        raise MetadataError(f"malformed metadata file {path}: {e}") from None

    frame.columns = [str(c).strip() for c in frame.columns]
    columns = list(frame.columns)
    if len(columns) < 2:
        raise MetadataError(f"metadata needs a sample id column and a group column: {path}")

    id_column = columns[0]
    frame = frame[~frame[id_column].str.startswith("#q2:")]

    if group_column not in columns:
        raise MetadataError(
            f"group column '{group_column}' not found; available columns: [{', '.join(columns)}]"
        )

    sample_ids = [s.strip() for s in frame[id_column]]
    seen: set[str] = set()
    for sid in sample_ids:
        if not sid:
            raise MetadataError("empty sample id in metadata")
        if sid in seen:
            raise MetadataError(f"duplicate sample id '{sid}' in metadata")
        seen.add(sid)

    group: dict[str, str] = {}
    for sid, label in zip(sample_ids, frame[group_column]):
        label = label.strip()
        if not label:
            raise MetadataError(f"empty group label for sample '{sid}' in column '{group_column}'")
        group[sid] = label

    covariate_values: dict[str, dict[str, float]] = {}
    for name in covariates or []:
        if name not in columns:
            raise MetadataError(
                f"covariate column '{name}' not found; available columns: [{', '.join(columns)}]"
            )
        values: dict[str, float] = {}
        for sid, cell in zip(sample_ids, frame[name]):
            try:
                values[sid] = float(cell)
            except ValueError:
                raise MetadataError(
                    f"non-numeric covariate value '{cell}' for sample '{sid}' in column '{name}'"
                ) from None
        covariate_values[name] = values

    meta = SampleMetadata(tuple(sample_ids), group, covariate_values, group_column)
    logger.bind(path=str(path), samples=len(sample_ids), groups=meta.groups).info(
        "Parsed sample metadata"
    )
    return meta


def align_samples(
    table: AbundanceTable, meta: SampleMetadata
) -> tuple[AbundanceTable, SampleMetadata]:
    """
    Restrict table and metadata to their common samples in canonical order.

    The canonical order is ascending lexicographic sample id; the Monte Carlo
    methods key their random streams on positions in this order.

    Args:
        table: Abundance table
        meta: Sample metadata

    Returns:
        (aligned table, aligned metadata)
    """
    table_ids, meta_ids = set(table.sample_ids), set(meta.sample_ids)
    common = sorted(table_ids & meta_ids)
    if not common:
        raise MetadataError(
            "abundance table and metadata share no sample ids "
            f"(table: {len(table_ids)} samples, metadata: {len(meta_ids)} samples)"
        )

    dropped_table = sorted(table_ids - meta_ids)
    dropped_meta = sorted(meta_ids - table_ids)
    if dropped_table or dropped_meta:
        logger.bind(
            dropped_from_table=dropped_table, dropped_from_metadata=dropped_meta
        ).warning("Samples dropped during alignment")

    return table.select_samples(common), meta.select(common)
