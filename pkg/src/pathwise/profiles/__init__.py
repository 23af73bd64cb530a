"""Abundance table and sample metadata input/output."""

from src.pathwise.profiles.tables import (
    AbundanceTable,
    FeatureKind,
    check_feature_ids,
    infer_feature_kind,
    parse_abundance_table,
    write_abundance_table,
)
from src.pathwise.profiles.metadata import SampleMetadata, align_samples, parse_metadata

__all__ = [
    "AbundanceTable",
    "FeatureKind",
    "SampleMetadata",
    "align_samples",
    "check_feature_ids",
    "infer_feature_kind",
    "parse_abundance_table",
    "parse_metadata",
    "write_abundance_table",
]
