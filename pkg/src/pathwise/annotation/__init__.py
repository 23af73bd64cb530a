"""Feature annotation from bundled tables and the KEGG REST service."""

from src.pathwise.annotation.records import AnnotationRecord, AnnotationSource
from src.pathwise.annotation.offline import AnnotationTable, load_annotation_table
from src.pathwise.annotation.flatfile import FlatFileRecord, parse_flat_file, parse_kegg_entry
from src.pathwise.annotation.kegg_client import KeggRestClient, RateLimiter, fetch_kegg_entry
from src.pathwise.annotation.annotate import (
    AnnotationMode,
    annotate_features,
    annotate_table,
    read_table_frame,
    write_table_frame,
)

__all__ = [
    "AnnotationMode",
    "AnnotationRecord",
    "AnnotationSource",
    "AnnotationTable",
    "FlatFileRecord",
    "KeggRestClient",
    "RateLimiter",
    "annotate_features",
    "annotate_table",
    "fetch_kegg_entry",
    "load_annotation_table",
    "parse_flat_file",
    "parse_kegg_entry",
    "read_table_frame",
    "write_table_frame",
]
