"""Statistical building blocks: transforms, distributions, tests, corrections, KDE."""

from src.pathwise.stats.transforms import closure, clr_transform, relative_abundance
from src.pathwise.stats.distributions import Distribution, DistKind, dist_sf
from src.pathwise.stats.classic import ClassicTest, TestResult, run_classic_test
from src.pathwise.stats.multitest import PAdjustMethod, adjust_p_values
from src.pathwise.stats.kde import gaussian_kde_grid, kde_mode, silverman_bandwidth

__all__ = [
    "ClassicTest",
    "DistKind",
    "Distribution",
    "PAdjustMethod",
    "TestResult",
    "adjust_p_values",
    "closure",
    "clr_transform",
    "dist_sf",
    "gaussian_kde_grid",
    "kde_mode",
    "relative_abundance",
    "run_classic_test",
    "silverman_bandwidth",
]
