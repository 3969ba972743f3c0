"""Figure rendering for rvrsim CSV outputs."""

from .render import KINDS, MissingColumnError, RenderError, render

__all__ = ["KINDS", "MissingColumnError", "RenderError", "render"]
__version__ = "0.1.0"
