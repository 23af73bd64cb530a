"""Abundance tables: the feature x sample matrix, its parser and canonical writer."""

import io
import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np
import pandas as pd

from src.pathwise.exceptions import ConfigError, TableFormatError
from src.pathwise.utils.formatting import atomic_write_text, format_real, read_utf8_text
from src.pathwise.utils.logger import get_logger

logger = get_logger(__name__)

# Comment lines that are really headers (BIOM-converted tables, QIIME exports).
_COMMENT_HEADERS = ("#OTU ID", "#OTU_ID", "#OTUID", "#SampleID", "#FeatureID")
KIND_VOTE_THRESHOLD = 0.9


class FeatureKind(str, Enum):
    """Kinds of functional features found in PICRUSt2 output."""

    KO = "KO"
    EC = "EC"
    METACYC = "MetaCyc"
    KEGG_PATHWAY = "KEGG_PATHWAY"
    UNKNOWN = "UNKNOWN"

    @classmethod
    def parse(cls, value: Union[str, "FeatureKind"]) -> "FeatureKind":
        """Parse a kind name case-insensitively (``ko``, ``ec``, ``metacyc``, ``pathway``...)."""
        if isinstance(value, FeatureKind):
            return value
        key = value.strip().lower().replace("-", "_")
        aliases = {
            "ko": cls.KO,
            "ec": cls.EC,
            "metacyc": cls.METACYC,
            "kegg_pathway": cls.KEGG_PATHWAY,
            "pathway": cls.KEGG_PATHWAY,
            "kegg": cls.KEGG_PATHWAY,
            "unknown": cls.UNKNOWN,
        }
        if key not in aliases:
            valid = ", ".join(kind.value for kind in cls)
            raise ConfigError(f"unknown feature kind '{value}' (valid: {valid})")
        return aliases[key]


ID_PATTERNS = {
    FeatureKind.KO: re.compile(r"^K\d{5}$"),
    FeatureKind.KEGG_PATHWAY: re.compile(r"^ko\d{5}$"),
    FeatureKind.EC: re.compile(r"^EC:(\d+\.){3}\d+$"),
}


def infer_feature_kind(feature_ids: Sequence[str]) -> FeatureKind:
    """
    Infer the feature kind by majority vote over id patterns.

    Args:
        feature_ids: Feature identifiers

    Returns:
        The kind matched by at least 90% of ids, else UNKNOWN
    """
    if not feature_ids:
        return FeatureKind.UNKNOWN
    votes: Counter = Counter()
    for feature_id in feature_ids:
        for kind, pattern in ID_PATTERNS.items():
            if pattern.match(feature_id):
                votes[kind] += 1
                break
    if not votes:
        return FeatureKind.UNKNOWN
    kind, count = votes.most_common(1)[0]
    if count / len(feature_ids) >= KIND_VOTE_THRESHOLD:
        return kind
    return FeatureKind.UNKNOWN


def check_feature_ids(feature_ids: Iterable[str], kind: FeatureKind) -> list[str]:
    """
    Advisory id validation: return (and warn about) ids that do not match ``kind``.
    """
    pattern = ID_PATTERNS.get(kind)
    if pattern is None:
        return []
    offenders = [fid for fid in feature_ids if not pattern.match(fid)]
    if offenders:
        logger.bind(kind=kind.value, count=len(offenders), first=offenders[0]).warning(
            "Feature ids do not match the expected pattern"
        )
    return offenders


@dataclass(frozen=True)
class AbundanceTable:
    """
    Feature x sample matrix of non-negative abundances.

    Rows are features, columns are samples. The value matrix is copied on
    construction and made read-only, so tables can be shared freely.
    """

    feature_ids: tuple[str, ...]
    sample_ids: tuple[str, ...]
    values: np.ndarray
    kind: FeatureKind = FeatureKind.UNKNOWN

    def __post_init__(self):
        feature_ids = tuple(str(f) for f in self.feature_ids)
        sample_ids = tuple(str(s) for s in self.sample_ids)
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 2 or values.shape != (len(feature_ids), len(sample_ids)):
            raise TableFormatError(
                f"matrix shape {values.shape} does not match "
                f"({len(feature_ids)}, {len(sample_ids)}) ids"
            )
        _require_unique(feature_ids, "feature")
        _require_unique(sample_ids, "sample")
        if not np.all(np.isfinite(values)):
            raise TableFormatError("abundance values must be finite")
        if np.any(values < 0):
            raise TableFormatError("abundance values must be non-negative")
        values.flags.writeable = False
        object.__setattr__(self, "feature_ids", feature_ids)
        object.__setattr__(self, "sample_ids", sample_ids)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "kind", FeatureKind.parse(self.kind))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def n_features(self) -> int:
        return len(self.feature_ids)

    @property
    def n_samples(self) -> int:
        return len(self.sample_ids)

    def sample_index(self, sample_ids: Sequence[str]) -> list[int]:
        position = {sid: i for i, sid in enumerate(self.sample_ids)}
        return [position[sid] for sid in sample_ids]

    def feature_index(self, feature_ids: Sequence[str]) -> list[int]:
        position = {fid: i for i, fid in enumerate(self.feature_ids)}
        missing = [fid for fid in feature_ids if fid not in position]
        if missing:
            raise TableFormatError(f"unknown feature id(s): {', '.join(missing)}")
        return [position[fid] for fid in feature_ids]

    def select_samples(self, sample_ids: Sequence[str]) -> "AbundanceTable":
        """Return a table restricted to (and ordered by) ``sample_ids``."""
        index = self.sample_index(sample_ids)
        return AbundanceTable(self.feature_ids, tuple(sample_ids), self.values[:, index], self.kind)

    def select_features(self, feature_ids: Sequence[str]) -> "AbundanceTable":
        """Return a table restricted to (and ordered by) ``feature_ids``."""
        index = self.feature_index(feature_ids)
        return AbundanceTable(tuple(feature_ids), self.sample_ids, self.values[index, :], self.kind)

    def with_kind(self, kind: FeatureKind) -> "AbundanceTable":
        return AbundanceTable(self.feature_ids, self.sample_ids, self.values, kind)

    def to_frame(self) -> pd.DataFrame:
        """Convert to a pandas DataFrame (features as index, samples as columns)."""
        return pd.DataFrame(
            np.array(self.values),
            index=pd.Index(self.feature_ids, name="function"),
            columns=list(self.sample_ids),
        )

    @classmethod
    def from_frame(
        cls, frame: pd.DataFrame, kind: FeatureKind = FeatureKind.UNKNOWN
    ) -> "AbundanceTable":
        """Build a table from a DataFrame with features as index and samples as columns."""
        return cls(
            tuple(str(i) for i in frame.index),
            tuple(str(c) for c in frame.columns),
            frame.to_numpy(dtype=np.float64),
            kind,
        )

    def to_tsv(self) -> str:
        """Serialize in the canonical TSV layout."""
        lines = ["\t".join(("function",) + self.sample_ids)]
        for feature_id, row in zip(self.feature_ids, self.values):
            lines.append("\t".join([feature_id] + [format_real(v) for v in row]))
        return "\n".join(lines) + "\n"


def _require_unique(ids: Sequence[str], what: str) -> None:
    seen: set[str] = set()
    for item in ids:
        if item in seen:
            raise TableFormatError(f"duplicate {what} id '{item}'")
        seen.add(item)


def delimiter_for(path: Path) -> str:
    """Comma for ``.csv``, tab for everything else (``.tsv``, ``.txt``)."""
    return "," if path.suffix.lower() == ".csv" else "\t"


def find_header_row(lines: list[str]) -> int:
    for index, line in enumerate(lines):
        if not line.strip():
            continue
        if line.startswith("#") and not line.startswith(_COMMENT_HEADERS):
            continue
        return index
    raise TableFormatError("empty table: no header row found")


def _to_float_matrix(body: np.ndarray, first_line: int) -> np.ndarray:
    """Convert string cells to floats, reporting the first bad cell by file coordinates."""
    try:
        values = body.astype(np.float64)
    except (TypeError, ValueError):
        values = None
    if values is not None and np.all(np.isfinite(values)) and not np.any(values < 0):
        return values

    for i, row in enumerate(body):
        for j, cell in enumerate(row):
            line, column = first_line + i, j + 2
            if not isinstance(cell, str) or not cell.strip():
                raise TableFormatError("missing value", line, column)
            try:
                number = float(cell)
            except ValueError:
                raise TableFormatError(f"non-numeric value '{cell}'", line, column) from None
            if not np.isfinite(number):
                raise TableFormatError(f"non-finite value '{cell}'", line, column)
            if number < 0:
                raise TableFormatError(f"negative value '{cell}'", line, column)
    raise TableFormatError("table contains invalid values")


def parse_abundance_table(
    path: Union[str, Path],
    kind_hint: Optional[FeatureKind] = None,
) -> AbundanceTable:
    """
    Parse a PICRUSt2-style abundance table.

    The first column always holds feature ids whatever its header says
    (``function``, ``#OTU ID``, ``pathway``...). Leading ``#`` comment lines are
    skipped. Error coordinates are 1-based file line and column numbers.

    Args:
        path: TSV/TXT (tab) or CSV (comma) file
        kind_hint: Feature kind; inferred from the ids when omitted

    Returns:
        Parsed AbundanceTable
    """
    path = Path(path)
    if not path.is_file():
        raise TableFormatError(f"abundance table not found: {path}")

    text = read_utf8_text(path, TableFormatError)
    lines = text.splitlines()
    header_index = find_header_row(lines)
    sep = delimiter_for(path)

    try:
        raw = pd.read_csv(
            io.StringIO(text),
            sep=sep,
            header=None,
            skiprows=header_index,
            dtype=str,
            keep_default_na=False,
            na_filter=False,
        )
    except pd.errors.EmptyDataError:
        raise TableFormatError(f"empty table: {path}") from None
    except pd.errors.ParserError as e:
        raise TableFormatError(f"malformed table {path}: {e}") from None

    if raw.shape[0] < 2 or raw.shape[1] < 2:
        raise TableFormatError(f"empty table: {path} has no data rows or no sample columns")

    cells = raw.to_numpy(dtype=object)
    sample_ids = tuple(str(s).strip() for s in cells[0, 1:])
    feature_ids = tuple(str(f).strip() for f in cells[1:, 0])
    first_data_line = header_index + 2

    _require_unique(sample_ids, "sample")
    seen: dict[str, int] = {}
    for offset, feature_id in enumerate(feature_ids):
        if not feature_id:
            raise TableFormatError("empty feature id", first_data_line + offset, 1)
        if feature_id in seen:
            raise TableFormatError(
                f"duplicate feature id '{feature_id}'", first_data_line + offset, 1
            )
        seen[feature_id] = offset

    values = _to_float_matrix(cells[1:, 1:], first_data_line)

    if kind_hint is not None:
        kind = FeatureKind.parse(kind_hint)
        check_feature_ids(feature_ids, kind)
    else:
        kind = infer_feature_kind(feature_ids)

    table = AbundanceTable(feature_ids, sample_ids, values, kind)
    logger.bind(
        path=str(path), features=table.n_features, samples=table.n_samples, kind=kind.value
    ).info("Parsed abundance table")
    return table


def write_abundance_table(table: AbundanceTable, path: Union[str, Path]) -> Path:
    """
    Write the canonical TSV: header ``function`` + sample ids, 17 significant digits, LF.

    Args:
        table: Table to write
        path: Destination file

    Returns:
        The written path
    """
    path = Path(path)
    atomic_write_text(path, table.to_tsv())
    logger.bind(path=str(path), features=table.n_features).debug("Wrote abundance table")
    return path
