"""Annotation record type."""

from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from typing import Optional

from src.pathwise.exceptions import AnnotationError

ANNOTATION_FIELDS = ("pathway_name", "pathway_description", "pathway_class", "pathway_map")


class AnnotationSource(str, Enum):
    OFFLINE = "offline"
    KEGG_REST = "kegg_rest"


@dataclass(frozen=True)
class AnnotationRecord:
    """Human-readable annotation of one feature."""

    feature_id: str
    pathway_name: Optional[str] = None
    pathway_description: Optional[str] = None
    pathway_class: Optional[str] = None
    pathway_map: Optional[str] = None
    source: AnnotationSource = AnnotationSource.OFFLINE
    fetched_at: Optional[datetime] = None

    def __post_init__(self):
        if not self.feature_id:
            raise AnnotationError("annotation record needs a feature id")
        for name in ANNOTATION_FIELDS:
            if getattr(self, name) == "":
                object.__setattr__(self, name, None)

    @property
    def annotated(self) -> bool:
        return any(getattr(self, name) for name in ANNOTATION_FIELDS)

    @property
    def unannotated(self) -> bool:
        return not self.annotated

    @property
    def class_group(self) -> Optional[str]:
        """Top-level class: the text before the first ';'."""
        if not self.pathway_class:
            return None
        return self.pathway_class.split(";", 1)[0].strip()

    @property
    def display_name(self) -> str:
        return self.pathway_name or self.feature_id

    def differences(self, other: "AnnotationRecord") -> dict[str, tuple]:
        """Annotation fields whose values differ, as (self, other) pairs."""
        return {
            name: (getattr(self, name), getattr(other, name))
            for name in ANNOTATION_FIELDS
            if getattr(self, name) != getattr(other, name)
        }


def unannotated_record(feature_id: str, source: AnnotationSource = AnnotationSource.OFFLINE) -> AnnotationRecord:
    return AnnotationRecord(feature_id=feature_id, source=source)
