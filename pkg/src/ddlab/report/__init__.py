"""Command line, text tables and SVG figures."""

from .config import RunConfig, load_config
from .plots import render_heatmap, render_line
from .table import summary_table

__all__ = ["RunConfig", "load_config", "render_heatmap", "render_line", "summary_table"]
