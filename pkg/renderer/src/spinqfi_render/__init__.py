"""Read-only figure renderer for the spinqfi CSV outputs."""

__version__ = "0.1.0"

from .figures import FigureSpec, RenderError, render

__all__ = ["FigureSpec", "RenderError", "render", "__version__"]
