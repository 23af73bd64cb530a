"""Error-bar panel: group means with standard errors, log2 fold change and adjusted p."""

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from src.pathwise.annotation.records import AnnotationRecord
from src.pathwise.exceptions import PlotError
from src.pathwise.methods.base import DaaResultRecord
from src.pathwise.methods.daa import split_families
from src.pathwise.profiles.metadata import SampleMetadata
from src.pathwise.profiles.tables import AbundanceTable
from src.pathwise.stats.transforms import relative_abundance
from src.pathwise.utils.formatting import format_pvalue
from src.pathwise.utils.logger import get_logger
from src.pathwise.viz.options import PlotOptions, SortBy
from src.pathwise.viz.svg import SvgCanvas, num, palette_colors, text_width, truncate_to_width

logger = get_logger(__name__)

UNCLASSIFIED = "Unclassified"
MARGIN = 16.0
HEADER_HEIGHT = 64.0
AXIS_HEIGHT = 36.0
PVALUE_COLUMN = 70.0


@dataclass
class ErrorbarRow:
    feature_id: str
    label: str
    class_group: str
    means: list[float]
    errors: list[float]
    log2_fold_change: float
    adjusted_p: float


def select_records(
    records: Sequence[DaaResultRecord],
    annotations: Mapping[str, AnnotationRecord],
    options: PlotOptions,
) -> tuple[list[DaaResultRecord], bool]:
    """Records to draw, and whether any of them passed ``options.alpha``."""
    significant = [r for r in records if r.adjusted_p <= options.alpha]
    pool = significant or list(records)

    def class_of(record):
        ann = annotations.get(record.feature_id)
        return (ann.class_group if ann else None) or UNCLASSIFIED

    if options.sort_by == SortBy.EFFECT:
        key = lambda r: (-abs(r.effect) if math.isfinite(r.effect) else 0.0, r.feature_id)  # noqa: E731
    elif options.sort_by == SortBy.CLASS_THEN_P:
        key = lambda r: (class_of(r), r.adjusted_p, r.feature_id)  # noqa: E731
    else:
        key = lambda r: (r.adjusted_p, r.feature_id)  # noqa: E731

    if significant:
        chosen = sorted(pool, key=key)[: options.max_features]
    else:
        top = sorted(pool, key=lambda r: (r.adjusted_p, r.feature_id))[: options.max_features]
        chosen = sorted(top, key=key)
    return chosen, bool(significant)


def _group_stats(values: np.ndarray) -> tuple[float, float]:
    mean = float(values.mean())
    if values.size < 2:
        return mean, 0.0
    return mean, float(values.std(ddof=1) / math.sqrt(values.size))


def pathway_errorbar(
    table: AbundanceTable,
    meta: SampleMetadata,
    daa_results: Sequence[DaaResultRecord],
    annotations: Optional[Mapping[str, AnnotationRecord]] = None,
    options: Optional[PlotOptions] = None,
) -> str:
    """
    Render the error-bar panel for one comparison family.

    Args:
        table: Abundance table the results were computed on
        meta: Sample metadata aligned with ``table``
        daa_results: Records of exactly one comparison family
        annotations: Feature id -> annotation (names and classes)
        options: Plot options

    Returns:
        SVG document
    """
    options = options or PlotOptions()
    annotations = annotations or {}
    if not daa_results:
        raise PlotError("no DA results to plot")
    families = split_families(daa_results)
    if len(families) != 1:
        raise PlotError(f"DA results cover {len(families)} comparison families; pass one")
    first = daa_results[0]
    groups = list(meta.groups) if first.omnibus else [first.group1, first.group2]
    unknown = [g for g in groups if g not in meta.groups]
    if unknown:
        raise PlotError(f"group(s) not in metadata: {', '.join(unknown)}")

    chosen, any_significant = select_records(daa_results, annotations, options)
    rel = relative_abundance(table)
    indices = [table.sample_index(meta.samples_in(g)) for g in groups]

    rows = []
    for record in chosen:
        row = rel[table.feature_index([record.feature_id])[0]]
        stats = [_group_stats(row[idx]) for idx in indices]
        ann = annotations.get(record.feature_id)
        rows.append(
            ErrorbarRow(
                feature_id=record.feature_id,
                label=ann.display_name if ann else record.feature_id,
                class_group=(ann.class_group if ann else None) or UNCLASSIFIED,
                means=[m for m, _ in stats],
                errors=[e for _, e in stats],
                log2_fold_change=record.log2_fold_change,
                adjusted_p=record.adjusted_p,
            )
        )

    return _render(rows, groups, first, any_significant, options)


def _render(
    rows: list[ErrorbarRow],
    groups: list[str],
    first: DaaResultRecord,
    any_significant: bool,
    options: PlotOptions,
) -> str:
    fs = options.font_size
    colors = palette_colors(options.palette, len(groups))
    with_headers = options.sort_by == SortBy.CLASS_THEN_P

    layout: list[tuple[str, object]] = []
    current_class = None
    for row in rows:
        if with_headers and row.class_group != current_class:
            layout.append(("header", row.class_group))
            current_class = row.class_group
        layout.append(("row", row))

    bar_height = max(fs * 0.7, 6.0)
    row_height = bar_height * len(groups) + 8.0
    header_row = fs + 8.0
    body = sum(row_height if kind == "row" else header_row for kind, _ in layout)
    height = max(float(options.height_px), HEADER_HEIGHT + body + AXIS_HEIGHT + MARGIN)
    width = float(options.width_px)

    label_width = min(
        max((text_width(r.label, fs) for r in rows), default=0.0) + 8.0, width * 0.4
    )
    plot_left = MARGIN + label_width
    plot_right = width - MARGIN - PVALUE_COLUMN
    bar_width = (plot_right - plot_left) * 0.55
    fc_left = plot_left + bar_width + 20.0
    fc_width = plot_right - fc_left

    canvas = SvgCanvas(width, height, options.font_family, fs)
    title = options.title or (
        f"{first.method}: {' vs '.join(groups)}" if not first.omnibus else f"{first.method}: all groups"
    )
    canvas.text(MARGIN, MARGIN + fs, title, size=fs * 1.2, weight="bold", cls="title")

    legend = canvas.group(cls="legend")
    x = MARGIN
    for label, color in zip(groups, colors):
        canvas.rect(x, MARGIN + fs + 8.0, fs * 0.8, fs * 0.8, color, parent=legend)
        canvas.text(x + fs, MARGIN + fs * 1.8 + 8.0, label, parent=legend)
        x += fs * 2 + text_width(label, fs)

    if not any_significant:
        canvas.text(
            width - MARGIN,
            MARGIN + fs,
            f"No features with adjusted p <= {options.alpha:g}; showing the top {len(rows)} by adjusted p",
            anchor="end",
            cls="banner",
            fill="#D55E00",
        )

    max_extent = max((m + e for r in rows for m, e in zip(r.means, r.errors)), default=0.0)
    max_extent = max_extent * 1.05 if max_extent > 0 else 1.0
    folds = [abs(r.log2_fold_change) for r in rows if math.isfinite(r.log2_fold_change)]
    fc_limit = max(folds, default=0.0) * 1.1 or 1.0
    fc_zero = fc_left + fc_width / 2.0

    def bar_x(value: float) -> float:
        return plot_left + bar_width * min(max(value, 0.0), max_extent) / max_extent

    def fc_x(value: float) -> float:
        return fc_zero + (fc_width / 2.0) * value / fc_limit

    canvas.text(plot_right + PVALUE_COLUMN, HEADER_HEIGHT - 6.0, "adj. p", anchor="end", weight="bold")
    canvas.text(fc_zero, HEADER_HEIGHT - 6.0, "log2 fold change", anchor="middle", weight="bold")

    y = HEADER_HEIGHT
    body_group = canvas.group(cls="rows")
    for kind, item in layout:
        if kind == "header":
            canvas.text(MARGIN, y + fs, str(item), weight="bold", cls="class-header", parent=body_group)
            y += header_row
            continue
        row: ErrorbarRow = item
        row_group = canvas.group(cls="feature", parent=body_group, data_feature=row.feature_id)
        center = y + row_height / 2.0
        label = truncate_to_width(row.label, label_width - 8.0, fs)
        canvas.text(plot_left - 8.0, center + fs * 0.35, label, anchor="end", cls="label", parent=row_group)
        for i, (mean, error) in enumerate(zip(row.means, row.errors)):
            top = y + 4.0 + i * bar_height
            canvas.rect(plot_left, top, bar_x(mean) - plot_left, bar_height - 1.0, colors[i], cls="bar", parent=row_group)
            if options.show_error_bars and error > 0:
                mid = top + (bar_height - 1.0) / 2.0
                canvas.line(bar_x(mean - error), mid, bar_x(mean + error), mid, cls="whisker", parent=row_group)
        if math.isfinite(row.log2_fold_change):
            color = colors[0] if row.log2_fold_change >= 0 else colors[1 % len(colors)]
            canvas.line(fc_zero, center, fc_x(row.log2_fold_change), center, stroke=color, width=2.0, cls="fold-change-line", parent=row_group)
            canvas.circle(fc_x(row.log2_fold_change), center, 4.0, color, cls="fold-change", parent=row_group)
        canvas.text(
            plot_right + PVALUE_COLUMN,
            center + fs * 0.35,
            format_pvalue(row.adjusted_p),
            anchor="end",
            cls="pvalue",
            parent=row_group,
        )
        y += row_height

    axis = canvas.group(cls="axis")
    canvas.line(plot_left, y + 4.0, plot_left + bar_width, y + 4.0, parent=axis)
    for fraction in (0.0, 0.5, 1.0):
        value = max_extent * fraction
        canvas.line(bar_x(value), y + 4.0, bar_x(value), y + 8.0, parent=axis)
        canvas.text(bar_x(value), y + 8.0 + fs, f"{value * 100:.2f}%", anchor="middle", parent=axis)
    canvas.text(plot_left + bar_width / 2.0, y + 12.0 + 2 * fs, "Mean relative abundance", anchor="middle", parent=axis)
    canvas.line(fc_zero, HEADER_HEIGHT, fc_zero, y, stroke="#999999", stroke_dasharray="4 3", parent=axis)
    for value in (-fc_limit, fc_limit):
        canvas.text(fc_x(value), y + 8.0 + fs, num(value), anchor="middle", parent=axis)

    logger.bind(features=len(rows), significant=any_significant).debug("Rendered error-bar panel")
    return canvas.to_string()
