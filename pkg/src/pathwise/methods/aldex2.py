"""
ALDEx2-style Monte Carlo CLR test.

Each sample's counts are resampled as a Dirichlet composition, CLR-transformed,
and tested per feature with Welch's t and the Wilcoxon rank-sum test. The
reported p-value is the mean over instances (the "expected" p-value).

Random draws come from a PCG64 generator seeded by
``SeedSequence(entropy=seed, spawn_key=(sample_index, instance))`` where
``sample_index`` is the position of the sample in the lexicographically sorted
sample ids. Draws therefore depend only on the sample, never on its group or
column position.
"""

import numpy as np

from src.pathwise.methods.base import BaseDaaMethod, Comparison, DaaMethodName, FeatureStat
from src.pathwise.profiles.metadata import SampleMetadata
from src.pathwise.profiles.tables import AbundanceTable
from src.pathwise.stats.classic import welch_t_rows, wilcoxon_rows
from src.pathwise.stats.multitest import adjust_p_values
from src.pathwise.utils.formatting import format_real

DIRICHLET_PRIOR = 0.5
ROUNDING_TOLERANCE = 0.01
EFFECT_FLOOR = 1e-12


def sample_generator(seed: int, sample_index: int, instance: int) -> np.random.Generator:
    """Generator for one (sample, instance) substream."""
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=(sample_index, instance))
    return np.random.Generator(np.random.PCG64(sequence))


def dirichlet_clr_instances(
    counts: np.ndarray, canonical_index: list[int], seed: int, instances: int
) -> np.ndarray:
    """
    Draw Monte Carlo CLR instances.

    Args:
        counts: Integer counts, features x samples
        canonical_index: Canonical index of every column
        seed: Master seed
        instances: Number of Monte Carlo instances

    Returns:
        Array of shape (instances, features, samples)
    """
    n_features, n_samples = counts.shape
    tiny = np.finfo(np.float64).tiny
    out = np.empty((instances, n_features, n_samples), dtype=np.float64)
    for j in range(n_samples):
        alpha = counts[:, j] + DIRICHLET_PRIOR
        for m in range(instances):
            draw = sample_generator(seed, canonical_index[j], m).dirichlet(alpha)
            logs = np.log(np.maximum(draw, tiny))
            out[m, :, j] = logs - logs.mean()
    return out


class Aldex2Method(BaseDaaMethod):
    name = DaaMethodName.ALDEX2

    def to_counts(self, table: AbundanceTable) -> np.ndarray:
        counts = np.rint(table.values)
        error = float(np.max(np.abs(table.values - counts))) if counts.size else 0.0
        if error > ROUNDING_TOLERANCE:
            self.logger.bind(max_rounding_error=round(error, 4)).warning(
                "Rounded fractional abundances to integer counts"
            )
        return counts

    def compare(
        self, table: AbundanceTable, meta: SampleMetadata, comparison: Comparison
    ) -> list[FeatureStat]:
        members1 = meta.samples_in(comparison.group1)
        members2 = meta.samples_in(comparison.group2)
        columns = table.sample_index(members1 + members2)
        canonical = {sid: i for i, sid in enumerate(sorted(table.sample_ids))}
        canonical_index = [canonical[sid] for sid in members1 + members2]

        counts = self.to_counts(table)[:, columns]
        clr = dirichlet_clr_instances(
            counts, canonical_index, self.config.seed, self.config.mc_instances
        )
        instances, n_features, n_samples = clr.shape
        in_first = np.zeros(n_samples, dtype=bool)
        in_first[: len(members1)] = True

        flat = clr.reshape(instances * n_features, n_samples)
        welch = welch_t_rows(flat, in_first).p_value.reshape(instances, n_features)
        wilcoxon = wilcoxon_rows(
            flat, in_first, exact=self.config.wilcoxon_exact, continuity=self.config.continuity
        ).p_value.reshape(instances, n_features)

        g1, g2 = clr[:, :, in_first], clr[:, :, ~in_first]
        spread = np.maximum(np.maximum(g1.std(axis=2, ddof=1), g2.std(axis=2, ddof=1)), EFFECT_FLOOR)
        effect = np.median((g1.mean(axis=2) - g2.mean(axis=2)) / spread, axis=0)

        welch_p = welch.mean(axis=0)
        wilcoxon_p = wilcoxon.mean(axis=0)
        wilcoxon_q = adjust_p_values(np.clip(wilcoxon_p, 0.0, 1.0), self.config.p_adjust)
        return [
            FeatureStat(
                float(effect[i]),
                float(min(max(welch_p[i], 0.0), 1.0)),
                f"wilcoxon_p={format_real(wilcoxon_p[i])};"
                f"wilcoxon_adjusted_p={format_real(wilcoxon_q[i])}",
            )
            for i in range(n_features)
        ]
