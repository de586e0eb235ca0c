"""Publication-style plots for coopscatter run directories.

Read-only over the harness CSV schema: every curve and reference line is a
column the run already wrote, so nothing physical is recomputed here.
"""

from .render import RenderError, RenderResult, render
from .specs import FIGURES, SEMILOG_FIGURES, FigureSpec

__version__ = "0.1.0"

__all__ = [
    "FIGURES",
    "SEMILOG_FIGURES",
    "FigureSpec",
    "RenderError",
    "RenderResult",
    "render",
    "__version__",
]
