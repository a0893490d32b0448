"""Two-photon single-slit ghost diffraction simulator and verification library.

Closed-form wave-packet evolution of an entangled photon pair through a
single slit, validated against brute-force spectral-propagation and
quadrature oracles, with a scenario runner reproducing the experiment's
diffraction observables.
"""

from .core import (ConvergenceError, DerivedParams, PhysicalConfig, ScanSpec,
                   ValidationError, derive_params, parse_inverse_length,
                   parse_length, uncertainties)
from .analytic import (DensityProfile, SINC_CONVENTIONS, conditional_profile,
                       final_amplitude, fringe_width, ghost_profile,
                       initial_state, joint_density, marginal_z1, marginal_z2,
                       state_at_slit)
from .oracle import (GridSpec, QuadratureSpec, WaveGrid, dispersion,
                     end_to_end_density, propagate, sample_initial_state,
                     slit_integral, truncate_slit)
from .analysis import (ComparisonResult, Extremum, FringeMetrics,
                       PatternNotResolvedError, compare, find_extrema,
                       measure_fringe, normalize)

__version__ = "0.1.0"

__all__ = [
    "ComparisonResult", "ConvergenceError", "DensityProfile", "DerivedParams",
    "Extremum", "FringeMetrics", "GridSpec", "PatternNotResolvedError",
    "PhysicalConfig", "QuadratureSpec", "SINC_CONVENTIONS", "ScanSpec",
    "ValidationError", "WaveGrid", "compare", "conditional_profile",
    "derive_params", "dispersion", "end_to_end_density", "final_amplitude",
    "find_extrema", "fringe_width", "ghost_profile", "initial_state",
    "joint_density", "marginal_z1", "marginal_z2", "measure_fringe",
    "normalize", "parse_inverse_length", "parse_length", "propagate",
    "sample_initial_state", "slit_integral", "state_at_slit", "truncate_slit",
    "uncertainties",
]
