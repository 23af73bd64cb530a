"""Deterministic SVG figures and the PCA numeric core."""

from src.pathwise.viz.options import PlotOptions, SortBy
from src.pathwise.viz.pca import PcaResult, compute_pca
from src.pathwise.viz.errorbar import pathway_errorbar
from src.pathwise.viz.pca_plot import pathway_pca
from src.pathwise.viz.heatmap import heatmap_zscores, pathway_heatmap
from src.pathwise.viz.svg import DIVERGING, OKABE_ITO, save_svg

__all__ = [
    "DIVERGING",
    "OKABE_ITO",
    "PcaResult",
    "PlotOptions",
    "SortBy",
    "compute_pca",
    "heatmap_zscores",
    "pathway_errorbar",
    "pathway_heatmap",
    "pathway_pca",
    "save_svg",
]
