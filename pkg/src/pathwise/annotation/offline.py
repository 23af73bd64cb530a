"""Bundled and user-supplied offline annotation tables."""

import io
from collections.abc import Mapping
from functools import lru_cache
from pathlib import Path
from typing import Iterator, Optional, Union

import pandas as pd

from src.pathwise.annotation.records import AnnotationRecord, AnnotationSource, unannotated_record
from src.pathwise.config import config
from src.pathwise.exceptions import AnnotationError
from src.pathwise.profiles.tables import FeatureKind
from src.pathwise.utils.formatting import read_utf8_text
from src.pathwise.utils.logger import get_logger

logger = get_logger(__name__)

TABLE_COLUMNS = ("id", "name", "description", "class", "map")

BUNDLED_TABLES = {
    FeatureKind.KO: "ko_annotations.tsv",
    FeatureKind.EC: "ec_annotations.tsv",
    FeatureKind.METACYC: "metacyc_annotations.tsv",
    FeatureKind.KEGG_PATHWAY: "pathway_annotations.tsv",
}


class AnnotationTable(Mapping):
    """Read-only map of feature id to AnnotationRecord."""

    def __init__(self, kind: FeatureKind, records: dict[str, AnnotationRecord], provenance: str = ""):
        self.kind = kind
        self._records = dict(records)
        self.provenance = provenance

    def __getitem__(self, feature_id: str) -> AnnotationRecord:
        return self._records[feature_id]

    def __iter__(self) -> Iterator[str]:
        return iter(self._records)

    def __len__(self) -> int:
        return len(self._records)

    def lookup(self, feature_id: str) -> AnnotationRecord:
        """Record for ``feature_id``; an unannotated record when absent."""
        record = self._records.get(feature_id)
        return record if record is not None else unannotated_record(feature_id)


def bundled_table_path(kind: FeatureKind) -> Path:
    kind = FeatureKind.parse(kind)
    if kind not in BUNDLED_TABLES:
        raise AnnotationError(f"no bundled annotation table for feature kind '{kind.value}'")
    return config.data_dir / BUNDLED_TABLES[kind]


def _split_comments(text: str) -> tuple[str, list[str]]:
    comments, body = [], []
    for line in text.splitlines():
        if not body and line.startswith("#"):
            comments.append(line.lstrip("#").strip())
        else:
            body.append(line)
    return "\n".join(body), comments


def read_annotation_file(path: Union[str, Path], kind: FeatureKind) -> AnnotationTable:
    """
    Parse an ``id, name, description, class, map`` TSV.

    Leading ``#`` lines are comments; one of the form ``provenance: ...`` names
    the source snapshot. Empty cells are allowed. Duplicate ids keep the last
    occurrence.
    """
    path = Path(path)
    if not path.is_file():
        raise AnnotationError(f"annotation table not found: {path}")
    body, comments = _split_comments(read_utf8_text(path, AnnotationError))
    provenance = next(
        (c.split(":", 1)[1].strip() for c in comments if c.lower().startswith("provenance:")), ""
    )
    frame = pd.read_csv(io.StringIO(body), sep="\t", dtype=str, keep_default_na=False)
    missing = [c for c in TABLE_COLUMNS if c not in frame.columns]
    if missing:
        raise AnnotationError(f"{path}: missing annotation column(s): {', '.join(missing)}")

    records: dict[str, AnnotationRecord] = {}
    duplicates = []
    for row in frame.to_dict("records"):
        feature_id = row["id"].strip()
        if not feature_id:
            continue
        if feature_id in records:
            duplicates.append(feature_id)
        records[feature_id] = AnnotationRecord(
            feature_id=feature_id,
            pathway_name=row["name"].strip(),
            pathway_description=row["description"].strip(),
            pathway_class=row["class"].strip(),
            pathway_map=row["map"].strip(),
            source=AnnotationSource.OFFLINE,
        )
    if duplicates:
        logger.bind(path=str(path), duplicates=sorted(set(duplicates))).warning(
            "Duplicate annotation ids; the last occurrence wins"
        )
    logger.bind(kind=kind.value, records=len(records)).debug("Loaded annotation table")
    return AnnotationTable(kind, records, provenance)


@lru_cache(maxsize=None)
def _bundled(kind: FeatureKind) -> AnnotationTable:
    return read_annotation_file(bundled_table_path(kind), kind)


def load_annotation_table(
    kind: Union[str, FeatureKind], path: Optional[Union[str, Path]] = None
) -> AnnotationTable:
    """
    Load the annotation lookup for a feature kind.

    Args:
        kind: Feature kind
        path: Custom table; the bundled snapshot is used when omitted

    Returns:
        AnnotationTable
    """
    kind = FeatureKind.parse(kind)
    if path is not None:
        return read_annotation_file(path, kind)
    return _bundled(kind)
