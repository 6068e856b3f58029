"""Offline figure generation from sqgsim's persisted CSV/JSON artifacts."""

from .figures import FIGURE_KINDS, FigureSpec, SchemaError, render

__version__ = "0.1.0"
