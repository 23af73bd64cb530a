"""
KEGG flat-file parser.

A record is a run of lines whose first 12 columns hold the keyword. A line
with blank keyword columns continues the previous field; an indented keyword
(``  AUTHORS``) is a sub-field stored as ``PARENT.SUB``. ``///`` ends a record.
"""

import re
from dataclasses import dataclass, field
from datetime import datetime
from typing import Optional

from src.pathwise.annotation.records import AnnotationRecord, AnnotationSource
from src.pathwise.exceptions import AnnotationError

KEYWORD_WIDTH = 12
TERMINATOR = "///"
_KEYWORD = re.compile(r"^[A-Z][A-Z0-9_]*$")


@dataclass
class FlatFileRecord:
    """Fields of one record, each a list of value lines in file order."""

    fields: dict[str, list[str]] = field(default_factory=dict)

    def lines(self, keyword: str) -> list[str]:
        return self.fields.get(keyword, [])

    def joined(self, keyword: str) -> Optional[str]:
        values = [v for v in self.lines(keyword) if v]
        if not values:
            return None
        return " ".join(" ".join(values).split())

    def first(self, keyword: str) -> Optional[str]:
        values = self.lines(keyword)
        return values[0] if values else None

    @property
    def entry_id(self) -> Optional[str]:
        entry = self.first("ENTRY")
        return entry.split()[0] if entry else None


def parse_flat_file(text: str) -> list[FlatFileRecord]:
    """
    Parse every record in a KEGG flat-file response.

    Raises:
        AnnotationError: a keyword column that is not an uppercase keyword, a
            continuation before any keyword, or a missing ``///`` terminator.
            The message quotes the offending line.
    """
    records: list[FlatFileRecord] = []
    current: Optional[FlatFileRecord] = None
    parent: Optional[str] = None
    last_key: Optional[str] = None

    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        if line.startswith(TERMINATOR):
            if current is not None:
                records.append(current)
            current, parent, last_key = None, None, None
            continue

        head, value = line[:KEYWORD_WIDTH], line[KEYWORD_WIDTH:].strip()
        if current is None:
            current = FlatFileRecord()

        if not head.strip():
            if last_key is None:
                raise AnnotationError(f"line {number}: continuation before any keyword: {line!r}")
            current.fields[last_key].append(value)
            continue

        keyword = head.strip()
        if not _KEYWORD.match(keyword):
            raise AnnotationError(f"line {number}: malformed keyword field: {line!r}")
        if head.startswith(" "):
            if parent is None:
                raise AnnotationError(f"line {number}: sub-keyword without a parent: {line!r}")
            key = f"{parent}.{keyword}"
        else:
            parent = key = keyword
        current.fields.setdefault(key, []).append(value)
        last_key = key

    if current is not None:
        raise AnnotationError("flat-file record is not terminated by '///'")
    return records


def record_to_annotation(
    feature_id: str,
    record: FlatFileRecord,
    source: AnnotationSource = AnnotationSource.KEGG_REST,
    fetched_at: Optional[datetime] = None,
) -> AnnotationRecord:
    """Map NAME, DESCRIPTION, CLASS and the first PATHWAY_MAP token onto an AnnotationRecord."""
    pathway_map = record.first("PATHWAY_MAP")
    return AnnotationRecord(
        feature_id=feature_id,
        pathway_name=record.joined("NAME"),
        pathway_description=record.joined("DESCRIPTION"),
        pathway_class=record.joined("CLASS"),
        pathway_map=pathway_map.split()[0] if pathway_map else None,
        source=source,
        fetched_at=fetched_at,
    )


def parse_kegg_entry(
    feature_id: str, text: str, fetched_at: Optional[datetime] = None
) -> AnnotationRecord:
    """Parse a single-entry ``/get`` response body."""
    records = parse_flat_file(text)
    if not records:
        raise AnnotationError(f"empty KEGG response for {feature_id}")
    return record_to_annotation(feature_id, records[0], fetched_at=fetched_at)
