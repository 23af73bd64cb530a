"""Compositional transforms: closure to relative abundance and centered log-ratio."""

from typing import Optional, Sequence, Union

import numpy as np

from src.pathwise.exceptions import AnalysisError
from src.pathwise.profiles.tables import AbundanceTable


def closure(matrix: np.ndarray, sample_ids: Optional[Sequence[str]] = None) -> np.ndarray:
    """
    Divide every column (sample) by its sum.

    Args:
        matrix: Non-negative features x samples matrix
        sample_ids: Column names used in error messages

    Returns:
        Matrix whose columns sum to 1
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    totals = matrix.sum(axis=0)
    empty = np.flatnonzero(totals <= 0)
    if empty.size:
        j = int(empty[0])
        name = sample_ids[j] if sample_ids is not None else f"column {j + 1}"
        raise AnalysisError(f"sample '{name}' has zero total abundance")
    return matrix / totals


def relative_abundance(table: Union[AbundanceTable, np.ndarray]) -> np.ndarray:
    """
    Per-sample relative abundances (each column divided by its sum).

    Args:
        table: AbundanceTable or features x samples matrix

    Returns:
        features x samples matrix of proportions
    """
    if isinstance(table, AbundanceTable):
        return closure(table.values, table.sample_ids)
    return closure(table)


def clr_transform(matrix: np.ndarray, pseudo: float = 0.0) -> np.ndarray:
    """
    Centered log-ratio transform per sample (column).

    clr_i = ln(x_i) - mean_j ln(x_j), after adding ``pseudo`` to every entry.

    Args:
        matrix: Non-negative features x samples matrix
        pseudo: Pseudo-count added before taking logs

    Returns:
        CLR matrix; every column sums to zero
    """
    if pseudo < 0:
        raise AnalysisError(f"pseudo-count must be non-negative, got {pseudo}")
    shifted = np.asarray(matrix, dtype=np.float64) + pseudo
    if np.any(shifted <= 0):
        raise AnalysisError("CLR needs strictly positive values; use a positive pseudo-count")
    logs = np.log(shifted)
    return logs - logs.mean(axis=0, keepdims=True)
