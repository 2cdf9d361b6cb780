"""Figure rendering for simulator sweep CSVs."""

from .render import FigureKind, FigureSpec, SchemaError, build_figure, cli_main, render_figure

__version__ = "0.1.0"
