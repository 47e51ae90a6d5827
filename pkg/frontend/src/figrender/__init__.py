"""Offline figure renderer for the simulator's CSV artifacts.

Three plot kinds mirror the three experiment outputs: throughput-vs-blocking
line plots (``sweep``), empirical distribution step plots (``cdf``), and
grouped bars for the phase-design comparison (``bars``).  Rendering never
reinterprets values; images are deterministic (fixed style, no timestamps).
"""

__version__ = "0.1.0"

from .render import PlotSpec, SchemaError, render  # noqa: F401
