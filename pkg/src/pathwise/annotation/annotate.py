"""Feature annotation in offline, KEGG REST and automatic modes."""

import io
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence, Union

import pandas as pd

from src.pathwise.annotation.kegg_client import KeggRestClient, NetworkUnavailable
from src.pathwise.annotation.offline import AnnotationTable, load_annotation_table
from src.pathwise.annotation.records import ANNOTATION_FIELDS, AnnotationRecord
from src.pathwise.exceptions import AnnotationError, TableFormatError
from src.pathwise.profiles.tables import FeatureKind, delimiter_for, find_header_row, infer_feature_kind
from src.pathwise.utils.formatting import atomic_write_text, read_utf8_text
from src.pathwise.utils.logger import get_logger

logger = get_logger(__name__)


class AnnotationMode(str, Enum):
    OFFLINE = "offline"
    KEGG_REST = "kegg_rest"
    AUTO = "auto"


class Annotator:
    """Resolves annotations for one feature kind, remembering what it fetched."""

    def __init__(
        self,
        kind: FeatureKind,
        mode: AnnotationMode = AnnotationMode.OFFLINE,
        table_path: Optional[Union[str, Path]] = None,
        client: Optional[KeggRestClient] = None,
    ):
        self.kind = FeatureKind.parse(kind)
        self.mode = AnnotationMode(mode)
        if self.mode == AnnotationMode.KEGG_REST and self.kind != FeatureKind.KEGG_PATHWAY:
            raise AnnotationError(
                f"kegg_rest annotation only supports KEGG pathways, not {self.kind.value}"
            )
        self.table: AnnotationTable = load_annotation_table(self.kind, table_path)
        self._client = client
        self._network_down = False
        self._resolved: dict[str, AnnotationRecord] = {}

    @property
    def client(self) -> KeggRestClient:
        if self._client is None:
            self._client = KeggRestClient()
        return self._client

    def _from_network(self, feature_id: str, offline: AnnotationRecord) -> AnnotationRecord:
        if self._network_down:
            return offline
        try:
            record = self.client.get_entry(feature_id)
        except NetworkUnavailable as exc:
            self._network_down = True
            logger.bind(reason=str(exc)).warning(
                "KEGG unavailable; falling back to the offline annotation table"
            )
            return offline
        if offline.annotated and record.annotated:
            diff = offline.differences(record)
            if diff:
                logger.bind(id=feature_id, fields=sorted(diff)).info(
                    "Online annotation differs from the offline table; using the online record"
                )
        return record

    def close(self) -> None:
        if self._client is not None:
            self._client.close()

    def resolve(self, feature_id: str) -> AnnotationRecord:
        if feature_id in self._resolved:
            return self._resolved[feature_id]
        offline = self.table.lookup(feature_id)
        if self.mode == AnnotationMode.KEGG_REST:
            record = self._from_network(feature_id, offline)
        elif (
            self.mode == AnnotationMode.AUTO
            and offline.unannotated
            and self.kind == FeatureKind.KEGG_PATHWAY
        ):
            record = self._from_network(feature_id, offline)
        else:
            record = offline
        self._resolved[feature_id] = record
        return record


def annotate_features(
    ids: Sequence[str],
    kind: Union[str, FeatureKind],
    mode: Union[str, AnnotationMode] = AnnotationMode.OFFLINE,
    table_path: Optional[Union[str, Path]] = None,
    client: Optional[KeggRestClient] = None,
) -> list[AnnotationRecord]:
    """
    Annotate feature ids.

    ``offline`` reads the tables only; ``kegg_rest`` asks KEGG for every id and
    falls back to the tables when the network is unavailable; ``auto`` uses the
    tables first and KEGG for pathway ids they miss.

    Args:
        ids: Feature ids
        kind: Feature kind of the ids
        mode: Annotation mode
        table_path: Custom offline table
        client: KEGG client (created on demand)

    Returns:
        One record per id, in input order
    """
    if not ids:
        return []
    annotator = Annotator(kind, mode, table_path, client)
    try:
        records = [annotator.resolve(feature_id) for feature_id in ids]
    finally:
        annotator.close()
    logger.bind(
        kind=annotator.kind.value,
        mode=annotator.mode.value,
        features=len(records),
        unannotated=sum(r.unannotated for r in records),
    ).info("Annotated features")
    return records


def is_daa_frame(frame: pd.DataFrame) -> bool:
    return "feature" in frame.columns and "method" in frame.columns


def annotate_table(
    frame: pd.DataFrame,
    kind: Optional[Union[str, FeatureKind]] = None,
    mode: Union[str, AnnotationMode] = AnnotationMode.OFFLINE,
    table_path: Optional[Union[str, Path]] = None,
    client: Optional[KeggRestClient] = None,
) -> pd.DataFrame:
    """
    Append annotation columns to a DA results or abundance frame.

    A DA frame is recognised by its ``feature`` and ``method`` columns; any
    other frame is keyed by its first column. Existing annotation columns are
    replaced, so annotating twice gives the same frame.
    """
    id_column = "feature" if is_daa_frame(frame) else frame.columns[0]
    ids = [str(v) for v in frame[id_column]]
    if kind is None:
        kind = infer_feature_kind(sorted(set(ids)))
        if kind == FeatureKind.UNKNOWN and table_path is None:
            raise AnnotationError("cannot infer the feature kind; pass it explicitly")
    records = annotate_features(ids, kind, mode, table_path, client)

    out = frame.drop(columns=[c for c in ANNOTATION_FIELDS if c in frame.columns])
    for name in ANNOTATION_FIELDS:
        out[name] = [getattr(r, name) or "" for r in records]
    return out


def read_table_frame(path: Union[str, Path]) -> pd.DataFrame:
    """Read a TSV/CSV as strings, skipping leading ``#`` comment lines."""
    path = Path(path)
    if not path.is_file():
        raise TableFormatError(f"table not found: {path}")
    text = read_utf8_text(path, TableFormatError)
    return pd.read_csv(
        io.StringIO(text),
        sep=delimiter_for(path),
        skiprows=find_header_row(text.splitlines()),
        dtype=str,
        keep_default_na=False,
        na_filter=False,
    )


def write_table_frame(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    atomic_write_text(path, frame.to_csv(sep="\t", index=False, lineterminator="\n"))
    return path
