"""Figure rendering for the halo benchmark CSV output."""

from .figures import DISPLAY_FLOOR, FIGURES, FigureSpec, RenderError, render, render_all

__version__ = "0.1.0"
