"""
Demo dataset generator.

50 KO features x 20 samples in two groups. Counts are drawn from a
Dirichlet-multinomial: a shared baseline composition, a per-sample Dirichlet
draw around it (precision ``DEMO_PRECISION``) and a multinomial draw at a
sequencing depth between 15000 and 25000. In the ProInflammatory group
(S01-S10) five respiratory chain KOs, all members of ko05016 (Huntington
disease) and ko05012 (Parkinson disease), are enriched eightfold before
renormalising. ProSurvival (S11-S20) keeps the baseline.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from src.pathwise.profiles.metadata import SampleMetadata
from src.pathwise.profiles.tables import AbundanceTable, FeatureKind, write_abundance_table
from src.pathwise.utils.formatting import atomic_write_text
from src.pathwise.utils.logger import get_logger

logger = get_logger(__name__)

DEMO_SEED = 20230501
DEMO_PRECISION = 500.0
DEPTH_RANGE = (15000, 25000)
SPIKE_FOLD = 8.0
SPIKE_BASELINE = 0.01

DEMO_GROUPS = ("ProInflammatory", "ProSurvival")
DEMO_SAMPLES = tuple(f"S{i:02d}" for i in range(1, 21))

SPIKED_KOS = ("K00411", "K00412", "K00413", "K02256", "K02262")
DEMO_KOS = tuple(
    sorted(
        SPIKED_KOS
        + (
            "K00844", "K01810", "K00850", "K01623", "K00134", "K00927", "K01689", "K00873",
            "K00161", "K00627", "K01647", "K01681", "K00031", "K00164", "K00239", "K00240",
            "K01679", "K00024", "K00036", "K00033", "K00615", "K00330", "K00331", "K02111",
            "K02112", "K04565", "K00088", "K01939", "K00942", "K00609", "K01465", "K01915",
            "K00265", "K00600", "K00058", "K00625", "K00370", "K02003", "K10111", "K07636",
            "K02945", "K02967", "K00975", "K01961", "K00059",
        )
    )
)

ABUNDANCE_FILE = "demo_ko_abundance.tsv"
METADATA_FILE = "demo_metadata.tsv"


@dataclass
class DemoDataset:
    table: AbundanceTable
    meta: SampleMetadata

    def metadata_tsv(self) -> str:
        lines = ["sample_id\tgroup"]
        lines += [f"{sid}\t{self.meta.group[sid]}" for sid in self.meta.sample_ids]
        return "\n".join(lines) + "\n"


def group_of(sample_id: str) -> str:
    return DEMO_GROUPS[0] if int(sample_id[1:]) <= 10 else DEMO_GROUPS[1]


def generate_demo_dataset(seed: int = DEMO_SEED) -> DemoDataset:
    """
    Draw the demo KO count table.

    Args:
        seed: Master seed; the same seed always gives the same counts

    Returns:
        DemoDataset with a KO-kind table and its metadata
    """
    rng = np.random.default_rng(seed)
    n = len(DEMO_KOS)
    spiked = np.array([ko in SPIKED_KOS for ko in DEMO_KOS])

    baseline = rng.dirichlet(np.full(n, 4.0))
    baseline[spiked] = 0.0
    baseline = baseline / baseline.sum() * (1.0 - SPIKE_BASELINE * spiked.sum())
    baseline[spiked] = SPIKE_BASELINE

    counts = np.zeros((n, len(DEMO_SAMPLES)), dtype=np.float64)
    for j, sid in enumerate(DEMO_SAMPLES):
        p = baseline.copy()
        if group_of(sid) == DEMO_GROUPS[0]:
            p[spiked] *= SPIKE_FOLD
        p /= p.sum()
        q = rng.dirichlet(p * DEMO_PRECISION)
        depth = int(rng.integers(DEPTH_RANGE[0], DEPTH_RANGE[1] + 1))
        counts[:, j] = rng.multinomial(depth, q)

    table = AbundanceTable(DEMO_KOS, DEMO_SAMPLES, counts, FeatureKind.KO)
    meta = SampleMetadata(DEMO_SAMPLES, {sid: group_of(sid) for sid in DEMO_SAMPLES})
    logger.bind(seed=seed, features=n, samples=len(DEMO_SAMPLES)).debug("Generated demo dataset")
    return DemoDataset(table, meta)


def write_demo_dataset(directory: Union[str, Path], seed: int = DEMO_SEED) -> tuple[Path, Path]:
    """Write ``demo_ko_abundance.tsv`` and ``demo_metadata.tsv`` into ``directory``."""
    directory = Path(directory)
    dataset = generate_demo_dataset(seed)
    table_path = write_abundance_table(dataset.table, directory / ABUNDANCE_FILE)
    meta_path = directory / METADATA_FILE
    atomic_write_text(meta_path, dataset.metadata_tsv())
    logger.bind(directory=str(directory)).info("Wrote demo dataset")
    return table_path, meta_path
