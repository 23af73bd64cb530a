"""Upper-tail probabilities of the reference distributions used by the tests.

All survival functions go through the regularized incomplete beta and gamma
functions from :mod:`scipy.special`:

- Student t:  P(T > t) = I_{df/(df+t^2)}(df/2, 1/2) / 2 for t >= 0
- chi-squared: P(X > x) = Q(df/2, x/2)
- F:          P(X > x) = I_{d2/(d2+d1 x)}(d2/2, d1/2)
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np
from scipy import special

from src.pathwise.exceptions import DistributionError

ArrayLike = Union[float, np.ndarray]


class DistKind(str, Enum):
    STD_NORMAL = "std_normal"
    STUDENT_T = "student_t"
    CHI_SQUARED = "chi_squared"
    F = "f"


def _check_df(value: Optional[float], name: str) -> float:
    if value is None or not math.isfinite(value) or value <= 0:
        raise DistributionError(f"{name} must be a positive finite number, got {value}")
    return float(value)


@dataclass(frozen=True)
class Distribution:
    """A reference distribution with its degrees of freedom."""

    kind: DistKind
    df1: Optional[float] = None
    df2: Optional[float] = None

    def __post_init__(self):
        kind = DistKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind in (DistKind.STUDENT_T, DistKind.CHI_SQUARED):
            object.__setattr__(self, "df1", _check_df(self.df1, "df"))
        elif kind == DistKind.F:
            object.__setattr__(self, "df1", _check_df(self.df1, "d1"))
            object.__setattr__(self, "df2", _check_df(self.df2, "d2"))

    @classmethod
    def std_normal(cls) -> "Distribution":
        return cls(DistKind.STD_NORMAL)

    @classmethod
    def student_t(cls, df: float) -> "Distribution":
        return cls(DistKind.STUDENT_T, df)

    @classmethod
    def chi_squared(cls, df: float) -> "Distribution":
        return cls(DistKind.CHI_SQUARED, df)

    @classmethod
    def f(cls, d1: float, d2: float) -> "Distribution":
        return cls(DistKind.F, d1, d2)


def _student_t_sf(x: np.ndarray, df: ArrayLike) -> np.ndarray:
    df = np.asarray(df, dtype=np.float64)
    x2 = x * x
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(np.isinf(x), 0.0, df / (df + x2))
    tail = 0.5 * special.betainc(df / 2.0, 0.5, ratio)
    return np.where(x >= 0, tail, 1.0 - tail)


def _chi_squared_sf(x: np.ndarray, df: float) -> np.ndarray:
    positive = np.maximum(x, 0.0)
    return np.where(x > 0, special.gammaincc(df / 2.0, positive / 2.0), 1.0)


def _f_sf(x: np.ndarray, d1: float, d2: float) -> np.ndarray:
    positive = np.maximum(x, 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(np.isinf(positive), 0.0, d2 / (d2 + d1 * positive))
    return np.where(x > 0, special.betainc(d2 / 2.0, d1 / 2.0, ratio), 1.0)


def dist_sf(dist: Distribution, x: ArrayLike) -> ArrayLike:
    """
    Upper-tail probability P(X > x).

    Args:
        dist: Reference distribution
        x: Scalar or array of evaluation points

    Returns:
        Survival probability, same shape as ``x``
    """
    values = np.asarray(x, dtype=np.float64)
    if dist.kind == DistKind.STD_NORMAL:
        result = special.ndtr(-values)
    elif dist.kind == DistKind.STUDENT_T:
        result = _student_t_sf(values, dist.df1)
    elif dist.kind == DistKind.CHI_SQUARED:
        result = _chi_squared_sf(values, dist.df1)
    else:
        result = _f_sf(values, dist.df1, dist.df2)
    result = np.clip(result, 0.0, 1.0)
    if np.ndim(x) == 0:
        return float(result)
    return result


def student_t_sf_vec(x: np.ndarray, df: np.ndarray) -> np.ndarray:
    """Vectorised Student-t survival function with per-element degrees of freedom."""
    df = np.asarray(df, dtype=np.float64)
    if np.any(~np.isfinite(df) | (df <= 0)):
        raise DistributionError("degrees of freedom must be positive and finite")
    return np.clip(_student_t_sf(np.asarray(x, dtype=np.float64), df), 0.0, 1.0)
