"""Thin rendering layer over the ddxy simulator's CSV/JSON outputs."""

__version__ = "0.1.0"

from .figures import FigureSpec, render  # noqa: F401
from .io import SchemaError  # noqa: F401
