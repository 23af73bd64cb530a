"""
pathwise - functional profile analysis
======================================

Differential abundance analysis, annotation and visualisation of predicted
functional profiles (KO, EC, MetaCyc and KEGG pathway abundance tables).

Features:
---------
- KO to KEGG pathway abundance conversion from a bundled membership snapshot
- LinDA, ALDEx2-style, t-test, Wilcoxon, Kruskal-Wallis and ANOVA testing
- Multi-method consensus tables
- Offline and KEGG REST annotation with an on-disk cache
- Deterministic SVG error-bar, PCA and heatmap figures

License: MIT
"""

__version__ = "0.1.0"

from src.pathwise.config import Config, config

__all__ = [
    "Config",
    "config",
    "__version__",
]
