"""Figure rendering for vortexlab results files (CSV sweeps and snapshots)."""

__version__ = "0.1.0"

from .render import PlotJob, ParseError, render

__all__ = ["PlotJob", "ParseError", "render", "__version__"]
