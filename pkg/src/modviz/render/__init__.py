"""SVG rendering of weighted constellations, traces, sweeps, and confusion matrices."""

from .constellation import (
    RenderSpec,
    color_points,
    connect_segments,
    ramp_color,
    render_constellation,
    render_sweep_panel,
    render_time_trace,
)
from .confusion_plot import render_confusion

__all__ = [
    "RenderSpec",
    "color_points",
    "connect_segments",
    "ramp_color",
    "render_constellation",
    "render_sweep_panel",
    "render_time_trace",
    "render_confusion",
]
