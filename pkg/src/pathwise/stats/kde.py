"""One-dimensional Gaussian kernel density estimates on a fixed grid.

Shared by the LinDA-style bias correction (mode of the coefficients) and the
density margins of the PCA figure.
"""

from typing import Optional

import numpy as np

MODE_GRID_POINTS = 512


def silverman_bandwidth(x: np.ndarray) -> float:
    """
    Silverman's rule: 0.9 * min(sd, IQR / 1.34) * n^(-1/5), with the sample
    standard deviation.

    Falls back to the standard deviation when the IQR is zero; a single
    observation has bandwidth 0.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.size < 2:
        return 0.0
    sd = float(np.std(x, ddof=1))
    q75, q25 = np.percentile(x, [75, 25])
    iqr = float(q75 - q25)
    spread = min(sd, iqr / 1.34) if iqr > 0 else sd
    return 0.9 * spread * x.size ** (-0.2)


def gaussian_kde_grid(
    x: np.ndarray,
    grid: Optional[np.ndarray] = None,
    grid_points: int = MODE_GRID_POINTS,
    bandwidth: Optional[float] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Evaluate a Gaussian KDE of ``x`` on a grid.

    Args:
        x: Observations
        grid: Evaluation points (default: ``grid_points`` over [min(x), max(x)])
        grid_points: Size of the default grid
        bandwidth: Kernel sd (default: Silverman)

    Returns:
        (grid, density)
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    if grid is None:
        grid = np.linspace(x.min(), x.max(), grid_points)
    bw = silverman_bandwidth(x) if bandwidth is None else bandwidth
    if bw <= 0:
        density = np.zeros_like(grid)
        density[np.argmin(np.abs(grid - x.mean()))] = 1.0
        return grid, density
    z = (grid[np.newaxis, :] - x[:, np.newaxis]) / bw
    density = np.exp(-0.5 * z * z).sum(axis=0) / (x.size * bw * np.sqrt(2.0 * np.pi))
    return grid, density


def kde_mode(x: np.ndarray, grid_points: int = MODE_GRID_POINTS) -> float:
    """
    Mode of the Gaussian KDE over a grid spanning the data range.

    Ties in the density maximum go to the smallest grid value; data without
    spread return the common value.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValueError("kde_mode needs at least one value")
    if np.ptp(x) == 0:
        return float(x[0])
    grid, density = gaussian_kde_grid(x, grid_points=grid_points)
    return float(grid[int(np.argmax(density))])
