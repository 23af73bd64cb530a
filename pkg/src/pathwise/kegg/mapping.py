"""KO to KEGG pathway membership reference and abundance aggregation."""

import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Union

import numpy as np

from src.pathwise.config import config
from src.pathwise.exceptions import MappingError
from src.pathwise.profiles.tables import AbundanceTable, FeatureKind
from src.pathwise.utils.formatting import read_utf8_text
from src.pathwise.utils.logger import get_logger

logger = get_logger(__name__)

PATHWAY_ID = re.compile(r"^ko\d{5}$")
KO_ID = re.compile(r"^K\d{5}$")
BUNDLED_MAP = "ko_pathway_map.tsv"


@dataclass(frozen=True)
class KoToPathwayMap:
    """KEGG pathway id -> set of member KO ids, with snapshot provenance."""

    entries: Mapping[str, frozenset[str]]
    provenance: str = ""

    @property
    def pathway_count(self) -> int:
        return len(self.entries)

    @property
    def ko_count(self) -> int:
        return len(set().union(*self.entries.values())) if self.entries else 0

    def members(self, pathway_id: str) -> frozenset[str]:
        return self.entries.get(pathway_id, frozenset())

    def pathways_per_ko(self) -> dict[str, int]:
        """Number of pathways each KO belongs to."""
        counts: Counter = Counter()
        for members in self.entries.values():
            counts.update(members)
        return dict(counts)

    def max_pathways_per_ko(self) -> int:
        counts = self.pathways_per_ko()
        return max(counts.values()) if counts else 0


@dataclass(frozen=True)
class PathwayMatch:
    pathway_id: str
    matched: int
    total: int


@dataclass
class ConversionReport:
    """Per-pathway matched-member counts of one KO -> pathway conversion."""

    matches: list[PathwayMatch] = field(default_factory=list)
    kept: list[str] = field(default_factory=list)

    def summary(self) -> str:
        lines = [f"{'pathway':<10} {'matched':>7} {'total':>6}  kept"]
        kept = set(self.kept)
        for m in self.matches:
            lines.append(
                f"{m.pathway_id:<10} {m.matched:>7} {m.total:>6}  {'yes' if m.pathway_id in kept else 'no'}"
            )
        return "\n".join(lines)

    def to_tsv(self) -> str:
        kept = set(self.kept)
        rows = ["pathway\tmatched\ttotal\tkept"]
        rows += [
            f"{m.pathway_id}\t{m.matched}\t{m.total}\t{str(m.pathway_id in kept).lower()}"
            for m in self.matches
        ]
        return "\n".join(rows) + "\n"


def _read_provenance(line: str) -> Optional[str]:
    body = line.lstrip("#").strip()
    if body.lower().startswith("provenance:"):
        return body.split(":", 1)[1].strip()
    return None


def load_ko_map(path: Optional[Union[str, Path]] = None) -> KoToPathwayMap:
    """
    Load and validate a KO -> pathway membership file.

    Format: ``pathway_id<TAB>K00001,K00002,...`` per line; ``#`` lines are
    comments, and a ``# provenance: ...`` comment sets the provenance string.

    Args:
        path: Map file (defaults to the bundled snapshot)

    Returns:
        KoToPathwayMap
    """
    path = Path(path) if path is not None else config.data_dir / BUNDLED_MAP
    if not path.is_file():
        raise MappingError(f"KO to pathway map not found: {path}")

    entries: dict[str, frozenset[str]] = {}
    provenance: Optional[str] = None
    text = read_utf8_text(path, MappingError)
    for line_number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            provenance = provenance or _read_provenance(line)
            continue

        fields = line.split("\t")
        if len(fields) != 2:
            raise MappingError(
                f"line {line_number}: expected 'pathway_id<TAB>KO list', got {line!r}"
            )
        pathway_id, ko_list = fields[0].strip(), fields[1]
        if not PATHWAY_ID.match(pathway_id):
            raise MappingError(f"line {line_number}: invalid pathway id {pathway_id!r}")
        if pathway_id in entries:
            raise MappingError(f"line {line_number}: duplicate pathway id {pathway_id}")
        members = [k.strip() for k in ko_list.split(",") if k.strip()]
        if not members:
            raise MappingError(f"line {line_number}: pathway {pathway_id} has no member KOs")
        bad = [k for k in members if not KO_ID.match(k)]
        if bad:
            raise MappingError(f"line {line_number}: invalid KO id {bad[0]!r}")
        entries[pathway_id] = frozenset(members)

    if not entries:
        raise MappingError(f"KO to pathway map is empty: {path}")

    ko_map = KoToPathwayMap(entries, provenance or path.name)
    logger.bind(
        path=str(path), pathways=ko_map.pathway_count, kos=ko_map.ko_count
    ).info("Loaded KO to pathway map")
    return ko_map


def ko2kegg_with_report(
    ko_table: AbundanceTable, ko_map: KoToPathwayMap
) -> tuple[AbundanceTable, ConversionReport]:
    """
    Sum member KO abundances into KEGG pathway abundances.

    value(p, s) is the sum over member KOs of p present in the table, added in
    ascending KO id order. A KO in several pathways contributes fully to each.
    Pathways whose row is all zero are dropped; output rows are in ascending
    pathway id order.

    Args:
        ko_table: KO-level abundance table
        ko_map: Membership reference

    Returns:
        (pathway table, conversion report)
    """
    if ko_table.kind == FeatureKind.UNKNOWN:
        logger.warning("Input feature kind is UNKNOWN; assuming KO ids")
    elif ko_table.kind != FeatureKind.KO:
        raise MappingError(
            f"KO to pathway conversion needs a KO table, got kind {ko_table.kind.value}"
        )

    position = {fid: i for i, fid in enumerate(ko_table.feature_ids)}
    report = ConversionReport()
    pathway_ids: list[str] = []
    rows: list[np.ndarray] = []

    for pathway_id in sorted(ko_map.entries):
        members = ko_map.entries[pathway_id]
        present = sorted(k for k in members if k in position)
        report.matches.append(PathwayMatch(pathway_id, len(present), len(members)))
        if not present:
            continue
        acc = np.zeros(ko_table.n_samples, dtype=np.float64)
        for ko in present:
            acc += ko_table.values[position[ko]]
        if not np.any(acc > 0):
            continue
        pathway_ids.append(pathway_id)
        rows.append(acc)

    if not pathway_ids:
        raise MappingError(
            "no KEGG pathway has a non-zero abundance; the input may not be a KO-level table"
        )

    report.kept = list(pathway_ids)
    result = AbundanceTable(
        tuple(pathway_ids), ko_table.sample_ids, np.vstack(rows), FeatureKind.KEGG_PATHWAY
    )
    logger.bind(
        pathways=len(pathway_ids),
        dropped=ko_map.pathway_count - len(pathway_ids),
        kos_matched=len(set(position) & set(ko_map.pathways_per_ko())),
    ).info("Converted KO abundances to KEGG pathway abundances")
    return result, report


def ko2kegg_abundance(ko_table: AbundanceTable, ko_map: KoToPathwayMap) -> AbundanceTable:
    """Convert a KO table to a KEGG pathway table (see :func:`ko2kegg_with_report`)."""
    table, _ = ko2kegg_with_report(ko_table, ko_map)
    return table
