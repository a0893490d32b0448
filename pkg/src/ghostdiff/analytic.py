"""Closed-form amplitudes and densities of the propagated two-photon state.

All functions are pure and broadcast over numpy arrays.  Amplitudes are
complex; densities are their squared moduli.  Complex square roots take the
principal branch throughout; only moduli of the prefactors enter densities,
so the branch choice is observationally irrelevant.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import DerivedParams, PhysicalConfig, ScanSpec, ValidationError, derive_params

# Dimensionless threshold below which the removable sinc singularity is
# evaluated by Taylor series instead of sin(x)/x.
_SINC_SERIES_THRESHOLD = 1e-8

#: The two candidate forms of the transverse argument of the post-slit sinc.
#: "published" carries pi*z1/(2*lam*L) with a negative coupling term;
#: "linearized" is what direct linearization of the slit integral's kernel
#: phase produces, pi*z1/(lam*L) with a positive coupling term.  The
#: quadrature and grid oracles adjudicate between them; the z1 = 0 ghost
#: results are identical for both.
SINC_CONVENTIONS = ("published", "linearized")


@dataclass(frozen=True)
class DensityProfile:
    """A sampled 1D detection-probability profile."""

    positions: np.ndarray
    values: np.ndarray
    normalization: str = "raw"

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        val = np.asarray(self.values, dtype=float)
        if pos.ndim != 1 or val.shape != pos.shape:
            raise ValidationError("profile positions and values must be equal-length 1D arrays")
        if pos.size < 2 or not np.all(np.diff(pos) > 0):
            raise ValidationError("profile positions must be strictly increasing")
        if np.any(val < 0) or not np.all(np.isfinite(val)):
            raise ValidationError("profile values must be finite and non-negative")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "values", val)


def state_prefactor(config: PhysicalConfig, params: DerivedParams | None = None) -> complex:
    """Complex normalization of the pair state at the slit plane."""
    params = params or derive_params(config)
    sig = config.momentum_spread
    pos = config.position_spread
    return complex(np.sqrt(
        8.0 * pos / (math.pi * sig * params.sum_width_sq * params.diff_width_sq)))


def post_slit_prefactor(config: PhysicalConfig, params: DerivedParams | None = None) -> complex:
    """Complex prefactor of the post-slit amplitude (carries the kernel norms)."""
    params = params or derive_params(config)
    lam_d = config.wavelength * config.slit_to_detector
    combined = params.combined_width_sq
    product = params.sum_width_sq * params.diff_width_sq
    c0 = state_prefactor(config, params)
    return complex(c0 / (1j * lam_d)
                   * (combined / (math.pi * product) + 1.0 / (1j * lam_d)) ** -0.5)


def initial_state(z1, z2, config: PhysicalConfig):
    """Pair amplitude at the source; real, positive, and symmetric.

    sqrt(2 sig / (pi pos)) * exp(-(z1-z2)^2 sig^2) * exp(-(z1+z2)^2 / 4 pos^2)
    """
    sig = config.momentum_spread
    pos = config.position_spread
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    pref = math.sqrt(2.0 * sig / (math.pi * pos))
    return pref * np.exp(-((z1 - z2) ** 2) * sig**2 - (z1 + z2) ** 2 / (4.0 * pos**2))


def state_at_slit(z1, z2, config: PhysicalConfig):
    """Pair amplitude after the source-to-slit leg, just before the slit."""
    params = derive_params(config)
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    pref = state_prefactor(config, params)
    return pref * np.exp(-((z1 + z2) ** 2) / params.sum_width_sq
                         - (z1 - z2) ** 2 / params.diff_width_sq)


def _sinc_argument(z1, z2, config, params, convention):
    det_dist = config.slit_to_detector
    lam = config.wavelength
    if convention == "published":
        return np.pi * z1 / (2.0 * lam * det_dist) - 1j * z2 * params.coupling
    if convention == "linearized":
        return np.pi * z1 / (lam * det_dist) + 1j * z2 * params.coupling
    raise ValidationError(f"unknown sinc convention {convention!r}; use one of {SINC_CONVENTIONS}")


def _slit_sinc(arg, slit_width):
    """sin(slit_width*arg)/arg with the removable singularity handled by series."""
    arg = np.asarray(arg, dtype=complex)
    scaled = arg * (slit_width / 2.0)
    small = np.abs(scaled) < _SINC_SERIES_THRESHOLD
    safe = np.where(small, 1.0, arg)
    out = np.where(small,
                   slit_width * (1.0 - (slit_width * arg) ** 2 / 6.0),
                   np.sin(slit_width * safe) / safe)
    return out


def final_amplitude(z1, z2, config: PhysicalConfig, *, convention="published"):
    """Pair amplitude at the detectors after slit truncation, narrow-slit form.

    Returns the closed form

        C_r * exp(i pi z1^2 / (lam L) - z2^2 / env) * sin(eps*arg) / arg

    where ``arg`` is the transverse sinc argument in the requested
    ``convention`` (see SINC_CONVENTIONS) and the ``arg -> 0`` limit is the
    slit width times the Gaussian factor.
    """
    params = derive_params(config)
    lam = config.wavelength
    det_dist = config.slit_to_detector
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    arg = _sinc_argument(z1, z2, config, params, convention)
    pref = post_slit_prefactor(config, params)
    gauss = np.exp(1j * np.pi * z1**2 / (lam * det_dist) - z2**2 / params.detector_env_sq)
    return pref * gauss * _slit_sinc(arg, config.slit_width)


def joint_density(z1, z2, config: PhysicalConfig, *, convention="published"):
    """Probability density of joint detection at (z1, z2); non-negative."""
    amp = final_amplitude(z1, z2, config, convention=convention)
    return np.abs(amp) ** 2


def _approximation_warning(config):
    if not (config.position_spread * config.momentum_spread > 5.0
            and config.approximation_regime):
        warnings.warn(
            "config is outside the approximation regime (needs pos*sig >> 1 and "
            "dispersive spread >> 1/sig^2); the closed-form ghost profile may "
            "deviate from the exact conditional density", stacklevel=3)


def ghost_profile(z2, config: PhysicalConfig):
    """Approximate conditional density of photon 2 with photon 1 fixed on axis.

    Valid in the strongly entangled, dispersion-dominated regime; warns
    otherwise.  The removable singularity at z2 = 0 is evaluated by limit.
    """
    _approximation_warning(config)
    lam = config.wavelength
    slit = config.slit_width
    sig = config.momentum_spread
    pos = config.position_spread
    det_dist = config.slit_to_detector
    src_dist = config.source_to_slit
    dist = 2.0 * src_dist + det_dist

    z2 = np.asarray(z2, dtype=float)
    envelope = (1.0 / math.sqrt(pos**2 + (lam * src_dist / (2.0 * math.pi * pos)) ** 2)
                * dist / (2.0 * math.pi**2 * sig * det_dist)
                * np.exp(-2.0 * (np.pi * z2 / (sig * lam * dist)) ** 2))
    osc = np.pi * slit * z2 / (lam * dist)
    growth = slit * z2 * (np.pi / (sig * lam * dist)) ** 2
    bracket = (np.sin(osc) ** 2 * np.cosh(growth) ** 2
               + np.cos(osc) ** 2 * np.sinh(growth) ** 2)
    small = np.abs(z2) < 1e-9
    safe = np.where(small, 1.0, z2)
    limit = (np.pi * slit / (lam * dist)) ** 2 + (slit * (np.pi / (sig * lam * dist)) ** 2) ** 2
    return np.where(small, envelope * limit, envelope * bracket / safe**2)


def conditional_profile(z0, scan: ScanSpec, config: PhysicalConfig) -> DensityProfile:
    """Sample the joint density along z2 with photon 1 fixed at z0."""
    positions = scan.positions()
    values = joint_density(z0, positions, config)
    return DensityProfile(positions=positions, values=values)


def _marginal(fixed, scan, config, axis):
    positions = scan.positions()
    if axis == "z2":
        dens = joint_density(fixed, positions, config)
    else:
        dens = joint_density(positions, fixed, config)
    peak = float(np.max(dens))
    if peak > 0.0:
        edge = max(dens[0], dens[-1]) / peak
        if edge > 1e-6:
            warnings.warn(
                f"marginal integration span looks insufficient: integrand at the "
                f"scan endpoints is {edge:.2e} of its maximum", stacklevel=3)
    return float(np.trapezoid(dens, positions))


def marginal_z2(z1, scan_z2: ScanSpec, config: PhysicalConfig) -> float:
    """Singles density of photon 1 at z1: joint density integrated over z2."""
    return _marginal(z1, scan_z2, config, axis="z2")


def marginal_z1(z2, scan_z1: ScanSpec, config: PhysicalConfig) -> float:
    """Singles density of photon 2 at z2: joint density integrated over z1."""
    return _marginal(z2, scan_z1, config, axis="z1")


def fringe_width(config: PhysicalConfig) -> float:
    """Characteristic pattern scale lam * (2 L_src + L_det) / slit_width."""
    return (config.wavelength
            * (2.0 * config.source_to_slit + config.slit_to_detector)
            / config.slit_width)
