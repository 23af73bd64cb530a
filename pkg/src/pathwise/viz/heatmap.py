"""Grouped z-score heatmap."""

from typing import Mapping, Optional, Sequence

import numpy as np

from src.pathwise.annotation.records import AnnotationRecord
from src.pathwise.exceptions import PlotError
from src.pathwise.profiles.metadata import SampleMetadata
from src.pathwise.profiles.tables import AbundanceTable
from src.pathwise.stats.transforms import relative_abundance
from src.pathwise.utils.logger import get_logger
from src.pathwise.viz.options import PlotOptions
from src.pathwise.viz.svg import (
    SvgCanvas,
    diverging_color,
    palette_colors,
    text_width,
    truncate_to_width,
)

logger = get_logger(__name__)

Z_LIMIT = 3.0
MARGIN = 16.0
BAND_HEIGHT = 12.0
LEGEND_STEPS = 7


def heatmap_column_order(meta: SampleMetadata, sample_ids: Sequence[str]) -> list[str]:
    """Samples grouped by label (lexicographic), lexicographic within each group."""
    present = set(sample_ids)
    return [sid for label in meta.groups for sid in sorted(meta.samples_in(label)) if sid in present]


def heatmap_zscores(
    table: AbundanceTable, meta: SampleMetadata, features: Sequence[str]
) -> tuple[np.ndarray, list[str], list[str]]:
    """
    Per-feature z-scores of relative abundance across all samples.

    Returns:
        (z matrix in heatmap column order, column sample ids, constant feature ids).
        Constant features get a row of zeros.
    """
    if not features:
        raise PlotError("heatmap needs at least one feature")
    unknown = [f for f in features if f not in set(table.feature_ids)]
    if unknown:
        raise PlotError(f"unknown feature id(s) for heatmap: {', '.join(unknown)}")

    columns = heatmap_column_order(meta, table.sample_ids)
    rel = relative_abundance(table)[np.ix_(table.feature_index(list(features)), table.sample_index(columns))]
    mean = rel.mean(axis=1, keepdims=True)
    sd = rel.std(axis=1, ddof=1, keepdims=True) if rel.shape[1] > 1 else np.zeros_like(mean)
    constant = (sd[:, 0] <= 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(sd > 0, (rel - mean) / sd, 0.0)
    constant_ids = [f for f, c in zip(features, constant) if c]
    if constant_ids:
        logger.bind(features=constant_ids).warning("Constant features drawn at the mid colour")
    return z, columns, constant_ids


def pathway_heatmap(
    table: AbundanceTable,
    meta: SampleMetadata,
    features: Sequence[str],
    options: Optional[PlotOptions] = None,
    annotations: Optional[Mapping[str, AnnotationRecord]] = None,
) -> str:
    """Render the heatmap of ``features`` with a group annotation band."""
    options = options or PlotOptions()
    annotations = annotations or {}
    z, columns, _ = heatmap_zscores(table, meta, features)

    fs = options.font_size
    width, height = float(options.width_px), float(options.height_px)
    groups = meta.groups
    colors = dict(zip(groups, palette_colors(options.palette, len(groups))))
    labels = [annotations[f].display_name if f in annotations else f for f in features]

    label_width = min(max(text_width(label, fs) for label in labels) + 8.0, width * 0.35)
    left = MARGIN + label_width
    right = width - MARGIN - 60.0
    top = MARGIN + fs * 2.5 + BAND_HEIGHT + 6.0
    cell_w = (right - left) / len(columns)
    cell_h = max(min((height - top - MARGIN - fs * 2) / len(features), 28.0), 4.0)
    height = max(height, top + cell_h * len(features) + MARGIN + fs * 2)

    canvas = SvgCanvas(width, height, options.font_family, fs)
    canvas.text(MARGIN, MARGIN + fs, options.title or "Relative abundance z-scores", size=fs * 1.2, weight="bold", cls="title")

    band = canvas.group(cls="group-band")
    band_top = top - BAND_HEIGHT - 6.0
    for j, sid in enumerate(columns):
        canvas.rect(left + j * cell_w, band_top, cell_w, BAND_HEIGHT, colors[meta.group[sid]], parent=band, data_sample=sid)
    for label in groups:
        idx = [j for j, sid in enumerate(columns) if meta.group[sid] == label]
        if idx:
            center = left + (idx[0] + idx[-1] + 1) * cell_w / 2.0
            canvas.text(center, band_top - 4.0, label, anchor="middle", cls="group-label", parent=band)

    cells = canvas.group(cls="cells")
    for i, feature_id in enumerate(features):
        y = top + i * cell_h
        canvas.text(left - 6.0, y + cell_h / 2.0 + fs * 0.35, truncate_to_width(labels[i], label_width - 8.0, fs), anchor="end", cls="label", parent=cells)
        for j in range(len(columns)):
            canvas.rect(left + j * cell_w, y, cell_w, cell_h, diverging_color(float(z[i, j]), Z_LIMIT), cls="cell", parent=cells)

    legend = canvas.group(cls="color-legend")
    lx = right + 16.0
    step_h = min(cell_h * len(features), 140.0) / LEGEND_STEPS
    for k in range(LEGEND_STEPS):
        value = Z_LIMIT - 2.0 * Z_LIMIT * k / (LEGEND_STEPS - 1)
        canvas.rect(lx, top + k * step_h, 12.0, step_h, diverging_color(value, Z_LIMIT), parent=legend)
    canvas.text(lx + 16.0, top + fs * 0.7, f"{Z_LIMIT:+.0f}", parent=legend)
    canvas.text(lx + 16.0, top + step_h * LEGEND_STEPS / 2.0 + fs * 0.35, "0", parent=legend)
    canvas.text(lx + 16.0, top + step_h * LEGEND_STEPS, f"{-Z_LIMIT:+.0f}", parent=legend)

    return canvas.to_string()
