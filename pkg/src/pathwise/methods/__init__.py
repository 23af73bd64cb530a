"""Differential abundance methods."""

from src.pathwise.methods.base import (
    BaseDaaMethod,
    ClassicTransform,
    Comparison,
    DaaConfig,
    DaaMethodName,
    DaaResultRecord,
)
from src.pathwise.methods.daa import (
    ConsensusTable,
    aldex2_daa,
    comparison_families,
    consensus_by_family,
    consensus_daa,
    linda_daa,
    pathway_daa,
    read_daa_results,
    records_to_frame,
    format_consensus,
    write_consensus,
    write_daa_results,
)

__all__ = [
    "BaseDaaMethod",
    "ClassicTransform",
    "Comparison",
    "ConsensusTable",
    "DaaConfig",
    "DaaMethodName",
    "DaaResultRecord",
    "aldex2_daa",
    "comparison_families",
    "consensus_by_family",
    "consensus_daa",
    "linda_daa",
    "pathway_daa",
    "read_daa_results",
    "records_to_frame",
    "format_consensus",
    "write_consensus",
    "write_daa_results",
]
