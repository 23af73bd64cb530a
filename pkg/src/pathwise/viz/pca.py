"""Principal component analysis of relative abundances."""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from src.pathwise.exceptions import PlotError
from src.pathwise.stats.transforms import closure
from src.pathwise.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass
class PcaResult:
    """
    scores: samples x k; loadings: features x k; explained_variance_ratio: k.

    ``processed`` is the centered (and optionally scaled) samples x features
    matrix that was decomposed, over ``feature_ids``.
    """

    scores: np.ndarray
    loadings: np.ndarray
    explained_variance_ratio: np.ndarray
    feature_ids: tuple[str, ...]
    processed: np.ndarray


def compute_pca(
    matrix: np.ndarray,
    k: int = 2,
    scale: bool = False,
    feature_ids: Optional[Sequence[str]] = None,
) -> PcaResult:
    """
    PCA by singular value decomposition.

    Args:
        matrix: Non-negative features x samples abundances
        k: Number of components
        scale: Scale features to unit variance (constant features are dropped)
        feature_ids: Names of the rows

    Returns:
        PcaResult with each loading vector's largest-magnitude entry positive
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    n_features, n_samples = matrix.shape
    if feature_ids is None:
        feature_ids = [f"feature_{i + 1}" for i in range(n_features)]
    feature_ids = tuple(feature_ids)
    if n_samples < 2:
        raise PlotError(f"PCA needs at least 2 samples, got {n_samples}")

    x = closure(matrix).T
    x = x - x.mean(axis=0)
    if scale:
        sd = x.std(axis=0, ddof=1)
        keep = sd > 0
        if not keep.all():
            dropped = [fid for fid, k_ in zip(feature_ids, keep) if not k_]
            logger.bind(dropped=len(dropped), first=dropped[0]).warning(
                "Dropped constant features before scaling"
            )
        x = x[:, keep] / sd[keep]
        feature_ids = tuple(fid for fid, k_ in zip(feature_ids, keep) if k_)

    total = float(np.sum(x * x))
    if x.shape[1] == 0 or total <= 0:
        raise PlotError("zero variance: all samples are identical")
    limit = min(x.shape[1], n_samples - 1)
    if not 1 <= k <= limit:
        raise PlotError(f"k={k} is out of range; at most {limit} components are available")

    u, s, vt = np.linalg.svd(x, full_matrices=False)
    for j in range(k):
        pivot = int(np.argmax(np.abs(vt[j])))
        if vt[j, pivot] < 0:
            u[:, j] = -u[:, j]
            vt[j] = -vt[j]

    scores = u[:, :k] * s[:k]
    ratio = s[:k] ** 2 / total
    return PcaResult(
        scores=scores,
        loadings=vt[:k].T.copy(),
        explained_variance_ratio=np.minimum(ratio, 1.0),
        feature_ids=feature_ids,
        processed=x,
    )
