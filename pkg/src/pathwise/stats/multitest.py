"""Multiple-testing correction."""

from enum import Enum
from typing import Sequence, Union

import numpy as np
from statsmodels.stats.multitest import multipletests

from src.pathwise.exceptions import AnalysisError


class PAdjustMethod(str, Enum):
    BH = "BH"
    HOLM = "holm"
    BONFERRONI = "bonferroni"
    BY = "BY"
    NONE = "none"

    @classmethod
    def parse(cls, value: Union[str, "PAdjustMethod"]) -> "PAdjustMethod":
        if isinstance(value, PAdjustMethod):
            return value
        lookup = {m.value.lower(): m for m in cls}
        lookup.update({"fdr": cls.BH, "fdr_bh": cls.BH, "fdr_by": cls.BY})
        key = str(value).strip().lower()
        if key not in lookup:
            valid = ", ".join(m.value for m in cls)
            raise AnalysisError(f"unknown p-value adjustment '{value}' (valid: {valid})")
        return lookup[key]


_STATSMODELS_NAMES = {
    PAdjustMethod.BH: "fdr_bh",
    PAdjustMethod.HOLM: "holm",
    PAdjustMethod.BONFERRONI: "bonferroni",
    PAdjustMethod.BY: "fdr_by",
}


def adjust_p_values(
    p: Sequence[float], method: Union[str, PAdjustMethod] = PAdjustMethod.BH
) -> np.ndarray:
    """
    Adjust a family of p-values for multiple testing.

    Args:
        p: Raw p-values in [0, 1]
        method: BH, holm, bonferroni, BY or none

    Returns:
        Adjusted p-values in the input order, clipped to [0, 1]
    """
    method = PAdjustMethod.parse(method)
    values = np.asarray(p, dtype=np.float64).ravel()
    if np.any(~np.isfinite(values)) or np.any((values < 0) | (values > 1)):
        raise AnalysisError("p-values must lie in [0, 1]")
    if method == PAdjustMethod.NONE or values.size == 0:
        return values.copy()
    _, adjusted, _, _ = multipletests(values, method=_STATSMODELS_NAMES[method])
    return np.clip(np.maximum(adjusted, values), 0.0, 1.0)
