"""KEGG pathway abundance conversion."""

from src.pathwise.kegg.mapping import (
    ConversionReport,
    KoToPathwayMap,
    PathwayMatch,
    ko2kegg_abundance,
    ko2kegg_with_report,
    load_ko_map,
)

__all__ = [
    "ConversionReport",
    "KoToPathwayMap",
    "PathwayMatch",
    "ko2kegg_abundance",
    "ko2kegg_with_report",
    "load_ko_map",
]
