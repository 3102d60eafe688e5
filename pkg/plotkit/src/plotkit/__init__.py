"""Render divexp CSV output into the two standard figure styles:
triangle heat maps of divergence fields and expected-divergence-vs-N
sweep curves with their large-N asymptotes."""

from .render import FigureRecipe, PlotkitError, RenderResult, render

__version__ = "0.1.0"

__all__ = ["FigureRecipe", "PlotkitError", "RenderResult", "render"]
