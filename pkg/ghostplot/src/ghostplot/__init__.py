"""Publication-style figures from ghostdiff CSV outputs."""

from .render import (OVERLAY_HEADER, PROFILE_HEADER, SWEEP_HEADER, PlotDataError,
                     PlotJob, build_profile_figure, build_sweep_figure,
                     detect_kind, read_overlay, read_profile, read_sweep, render)

__version__ = "0.1.0"

__all__ = [
    "OVERLAY_HEADER", "PROFILE_HEADER", "SWEEP_HEADER", "PlotDataError",
    "PlotJob", "build_profile_figure", "build_sweep_figure", "detect_kind",
    "read_overlay", "read_profile", "read_sweep", "render",
]
