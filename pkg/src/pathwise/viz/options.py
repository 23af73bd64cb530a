"""Plot options shared by the renderers."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from src.pathwise.config import config
from src.pathwise.exceptions import PlotError
from src.pathwise.viz.svg import PALETTES

MIN_SIZE_PX = 100


class SortBy(str, Enum):
    ADJUSTED_P = "adjusted_p"
    CLASS_THEN_P = "class_then_p"
    EFFECT = "effect"


@dataclass
class PlotOptions:
    """Figure size, fonts, palette and feature selection."""

    width_px: int = field(default_factory=lambda: config.plot.width_px)
    height_px: int = field(default_factory=lambda: config.plot.height_px)
    palette: str = "okabe_ito"
    font_family: str = field(default_factory=lambda: config.plot.font_family)
    font_size: float = field(default_factory=lambda: config.plot.font_size)
    max_features: int = field(default_factory=lambda: config.plot.max_features)
    sort_by: SortBy = SortBy.ADJUSTED_P
    show_error_bars: bool = True
    alpha: float = field(default_factory=lambda: config.daa.alpha)
    pca_scale: bool = False
    title: Optional[str] = None

    def __post_init__(self):
        if self.width_px < MIN_SIZE_PX or self.height_px < MIN_SIZE_PX:
            raise PlotError(
                f"figure must be at least {MIN_SIZE_PX}x{MIN_SIZE_PX} px, "
                f"got {self.width_px}x{self.height_px}"
            )
        if self.palette not in PALETTES:
            raise PlotError(f"unknown palette '{self.palette}' (available: {', '.join(PALETTES)})")
        if self.max_features < 1:
            raise PlotError("max_features must be positive")
        if not 0 < self.alpha < 1:
            raise PlotError(f"alpha must lie in (0, 1), got {self.alpha}")
        self.sort_by = SortBy(self.sort_by)
