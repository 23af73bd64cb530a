"""PCA scatter with per-group marginal density curves."""

import math
from typing import Optional

import numpy as np

from src.pathwise.exceptions import PlotError
from src.pathwise.profiles.metadata import SampleMetadata
from src.pathwise.profiles.tables import AbundanceTable
from src.pathwise.stats.kde import gaussian_kde_grid
from src.pathwise.viz.options import PlotOptions
from src.pathwise.viz.pca import PcaResult, compute_pca
from src.pathwise.viz.svg import SvgCanvas, num, palette_colors, text_width

DENSITY_GRID_POINTS = 256
MARGIN = 16.0
DENSITY_BAND = 80.0
AXIS_BAND = 48.0


def axis_label(component: int, ratio: float) -> str:
    """``PCn (xx.x%)``; truncated to one decimal so the shown percentages never exceed 100."""
    percent = math.floor(ratio * 1000.0 + 1e-9) / 10.0
    return f"PC{component} ({percent:.1f}%)"


def _padded_range(values: np.ndarray) -> tuple[float, float]:
    lo, hi = float(values.min()), float(values.max())
    pad = (hi - lo) * 0.08 or 1.0
    return lo - pad, hi + pad


def pathway_pca(
    table: AbundanceTable, meta: SampleMetadata, options: Optional[PlotOptions] = None
) -> str:
    """
    Render PC1 vs PC2 coloured by group, with KDE margins per group.

    Args:
        table: Abundance table
        meta: Metadata covering the table's samples
        options: Plot options (``pca_scale`` toggles unit-variance scaling)

    Returns:
        SVG document
    """
    options = options or PlotOptions()
    if table.n_samples < 3:
        raise PlotError(f"PCA plot needs at least 3 samples, got {table.n_samples}")
    samples = sorted(table.sample_ids)
    table = table.select_samples(samples)
    meta = meta.select(samples)
    result = compute_pca(table.values, k=2, scale=options.pca_scale, feature_ids=table.feature_ids)
    return _render(result, samples, meta, options)


def _render(result: PcaResult, samples: list[str], meta: SampleMetadata, options: PlotOptions) -> str:
    fs = options.font_size
    width, height = float(options.width_px), float(options.height_px)
    groups = meta.groups
    colors = dict(zip(groups, palette_colors(options.palette, len(groups))))

    legend_width = max((text_width(g, fs) for g in groups), default=0.0) + fs * 2.5
    left = MARGIN + AXIS_BAND
    right = width - MARGIN - DENSITY_BAND - legend_width
    top = MARGIN + fs * 1.5 + DENSITY_BAND
    bottom = height - MARGIN - AXIS_BAND
    if right - left < 20 or bottom - top < 20:
        raise PlotError("figure is too small for the PCA layout")

    pc1, pc2 = result.scores[:, 0], result.scores[:, 1]
    x_lo, x_hi = _padded_range(pc1)
    y_lo, y_hi = _padded_range(pc2)

    def sx(v):
        return left + (right - left) * (v - x_lo) / (x_hi - x_lo)

    def sy(v):
        return bottom - (bottom - top) * (v - y_lo) / (y_hi - y_lo)

    canvas = SvgCanvas(width, height, options.font_family, fs)
    canvas.text(MARGIN, MARGIN + fs, options.title or "PCA of relative abundances", size=fs * 1.2, weight="bold", cls="title")

    frame = canvas.group(cls="axes")
    canvas.rect(left, top, right - left, bottom - top, "none", parent=frame, stroke="#333333")
    canvas.text((left + right) / 2.0, bottom + AXIS_BAND - 12.0, axis_label(1, result.explained_variance_ratio[0]), anchor="middle", cls="axis-label", parent=frame)
    canvas.text(
        MARGIN + fs,
        (top + bottom) / 2.0,
        axis_label(2, result.explained_variance_ratio[1]),
        anchor="middle",
        cls="axis-label",
        parent=frame,
        transform=f"rotate(-90 {num(MARGIN + fs)} {num((top + bottom) / 2.0)})",
    )

    points = canvas.group(cls="points")
    for i, sid in enumerate(samples):
        canvas.circle(sx(pc1[i]), sy(pc2[i]), 4.5, colors[meta.group[sid]], cls="point", parent=points, data_sample=sid)

    densities = canvas.group(cls="densities")
    x_grid = np.linspace(x_lo, x_hi, DENSITY_GRID_POINTS)
    y_grid = np.linspace(y_lo, y_hi, DENSITY_GRID_POINTS)
    curves = []
    for label in groups:
        idx = [i for i, sid in enumerate(samples) if meta.group[sid] == label]
        if len(idx) < 2:
            continue
        _, dx = gaussian_kde_grid(pc1[idx], grid=x_grid)
        _, dy = gaussian_kde_grid(pc2[idx], grid=y_grid)
        curves.append((label, dx, dy))
    peak_x = max((float(dx.max()) for _, dx, _ in curves), default=0.0) or 1.0
    peak_y = max((float(dy.max()) for _, _, dy in curves), default=0.0) or 1.0
    for label, dx, dy in curves:
        canvas.polyline(
            [(sx(v), top - 4.0 - (DENSITY_BAND - 8.0) * d / peak_x) for v, d in zip(x_grid, dx)],
            colors[label],
            cls="density",
            parent=densities,
        )
        canvas.polyline(
            [(right + 4.0 + (DENSITY_BAND - 8.0) * d / peak_y, sy(v)) for v, d in zip(y_grid, dy)],
            colors[label],
            cls="density",
            parent=densities,
        )

    legend = canvas.group(cls="legend")
    lx = right + DENSITY_BAND + fs
    for i, label in enumerate(groups):
        ly = top + i * (fs + 6.0)
        canvas.circle(lx, ly, fs * 0.35, colors[label], parent=legend)
        canvas.text(lx + fs, ly + fs * 0.35, label, parent=legend)

    return canvas.to_string()
