"""Brute-force numerical checks of the closed forms.

Two independent routes: adaptive Gauss-Legendre quadrature of the exact
post-slit integral (no narrow-slit linearization), and full grid-based
spectral propagation of the two-coordinate wavefunction through
source -> slit -> detectors.
"""

from __future__ import annotations

import json
import math
import os
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .core import ConvergenceError, PhysicalConfig, ValidationError, derive_params
from .analytic import initial_state, post_slit_prefactor

SPEED_OF_LIGHT = 299792458.0  # m/s


def dispersion(kz, config: PhysicalConfig):
    """Angular frequency of a photon with transverse wave-vector component kz.

    Quadratic (paraxial) expansion c*k0 + c*kz^2/(2 k0) about the forward
    wavenumber; warns when |kz| exceeds k0/10 where the expansion degrades.
    """
    k0 = 2.0 * math.pi / config.wavelength
    kz = np.asarray(kz, dtype=float)
    if np.any(np.abs(kz) > k0 / 10.0):
        warnings.warn("transverse wave-vector exceeds k0/10; paraxial expansion "
                      "is inaccurate there", stacklevel=2)
    out = SPEED_OF_LIGHT * (k0 + kz**2 / (2.0 * k0))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GridSpec:
    """Sampling of the two-coordinate wavefunction: count^2 points over
    [-half_extent, half_extent) per axis, zero exactly on the lattice."""

    count: int = 2048
    half_extent: float = 25e-3

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 16 or self.count % 2:
            raise ValidationError(f"grid count must be an even integer >= 16, got {self.count}")
        if not (math.isfinite(self.half_extent) and self.half_extent > 0):
            raise ValidationError(f"grid half extent must be positive, got {self.half_extent}")
        object.__setattr__(self, "count", int(self.count))

    @property
    def spacing(self):
        return 2.0 * self.half_extent / self.count

    def axis(self):
        n = self.count
        return (np.arange(n) - n // 2) * self.spacing


@dataclass(frozen=True)
class QuadratureSpec:
    """Adaptive Gauss-Legendre control: fixed-node order doubled until the
    relative change of the integral falls below ``tolerance``."""

    start_order: int = 16
    tolerance: float = 1e-10
    max_order: int = 1024

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValidationError("quadrature tolerance must be positive")
        if not 1 <= self.start_order <= self.max_order:
            raise ValidationError("quadrature orders must satisfy 1 <= start <= max")


@dataclass(frozen=True)
class WaveGrid:
    """A sampled complex two-coordinate wavefunction on a uniform lattice."""

    z1_axis: np.ndarray
    z2_axis: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self):
        z1 = np.asarray(self.z1_axis, dtype=float)
        z2 = np.asarray(self.z2_axis, dtype=float)
        amp = np.asarray(self.amplitudes)
        if amp.shape != (z1.size, z2.size):
            raise ValidationError("amplitude array shape must be (len(z1), len(z2))")
        for name, ax in (("z1", z1), ("z2", z2)):
            d = np.diff(ax)
            if ax.size < 2 or not np.allclose(d, d[0], rtol=1e-12, atol=0.0):
                raise ValidationError(f"{name} axis must be uniformly spaced")
        if not np.all(np.isfinite(amp.real)) or not np.all(np.isfinite(np.asarray(amp.imag))):
            raise ValidationError("amplitudes must be finite")
        object.__setattr__(self, "z1_axis", z1)
        object.__setattr__(self, "z2_axis", z2)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def spacing1(self):
        return float(self.z1_axis[1] - self.z1_axis[0])

    @property
    def spacing2(self):
        return float(self.z2_axis[1] - self.z2_axis[0])

    def norm(self):
        """Discrete L2 norm sqrt(sum |amp|^2 dz1 dz2)."""
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)
                             * self.spacing1 * self.spacing2))

    def dump(self, path):
        """Write amplitudes as little-endian float64 (re, im) pairs, row-major,
        with a JSON sidecar describing the axes."""
        amp = np.ascontiguousarray(self.amplitudes, dtype=complex)
        flat = np.empty((amp.size, 2), dtype="<f8")
        flat[:, 0] = amp.real.ravel()
        flat[:, 1] = amp.imag.ravel()
        path = str(path)
        flat.tofile(path)
        sidecar = {
            "shape": list(amp.shape),
            "dtype": "<f8 interleaved re,im, row-major",
            "z1_axis": {"start": float(self.z1_axis[0]), "spacing": self.spacing1,
                        "count": int(self.z1_axis.size)},
            "z2_axis": {"start": float(self.z2_axis[0]), "spacing": self.spacing2,
                        "count": int(self.z2_axis.size)},
        }
        with open(path + ".json", "w") as fh:
            json.dump(sidecar, fh, indent=2, sort_keys=True)

    @classmethod
    def load(cls, path):
        path = str(path)
        with open(path + ".json") as fh:
            sidecar = json.load(fh)
        n1, n2 = sidecar["shape"]
        raw = np.fromfile(path, dtype="<f8").reshape(n1, n2, 2)
        amps = raw[..., 0] + 1j * raw[..., 1]
        ax1 = sidecar["z1_axis"]
        ax2 = sidecar["z2_axis"]
        z1 = ax1["start"] + ax1["spacing"] * np.arange(ax1["count"])
        z2 = ax2["start"] + ax2["spacing"] * np.arange(ax2["count"])
        return cls(z1_axis=z1, z2_axis=z2, amplitudes=amps)


def sample_initial_state(config: PhysicalConfig, spec: GridSpec) -> WaveGrid:
    """Sample the source-plane pair amplitude on a square lattice."""
    z = spec.axis()
    amps = initial_state(z[:, None], z[None, :], config).astype(complex)
    return WaveGrid(z1_axis=z, z2_axis=z, amplitudes=amps)


def _check_sampling(axis_len, spacing, wavelength, distance):
    # Transfer-function chirp must advance less than pi per frequency cell at
    # the highest represented frequency: N * dz^2 >= lam * distance.
    budget = axis_len * spacing**2
    needed = wavelength * abs(distance)
    if budget < needed * (1.0 - 1e-12):
        raise ValidationError(
            f"grid violates the Fresnel sampling rule: N*dz^2 = {budget:.3e} m^2 "
            f"but lambda*distance = {needed:.3e} m^2; enlarge the grid extent "
            f"or point count")


def propagate(grid: WaveGrid, distance, config: PhysicalConfig) -> WaveGrid:
    """Free-space propagation of both coordinates by the same distance.

    Applies the quadratic-phase spectral multiplier exp(-i pi lam d f^2)
    along each axis via forward/inverse DFT; the global on-axis phase is
    dropped.  Unitary: the discrete L2 norm is preserved to roundoff.
    """
    lam = config.wavelength
    amps = grid.amplitudes.astype(complex, copy=False)
    _check_sampling(grid.z1_axis.size, grid.spacing1, lam, distance)
    _check_sampling(grid.z2_axis.size, grid.spacing2, lam, distance)
    f1 = np.fft.fftfreq(grid.z1_axis.size, grid.spacing1)
    f2 = np.fft.fftfreq(grid.z2_axis.size, grid.spacing2)
    kern1 = np.exp(-1j * np.pi * lam * distance * f1**2)
    kern2 = np.exp(-1j * np.pi * lam * distance * f2**2)
    out = np.fft.ifft(np.fft.fft(amps, axis=0) * kern1[:, None], axis=0)
    out = np.fft.ifft(np.fft.fft(out, axis=1) * kern2[None, :], axis=1)
    return WaveGrid(z1_axis=grid.z1_axis, z2_axis=grid.z2_axis, amplitudes=out)


def truncate_slit(grid: WaveGrid, slit_width) -> WaveGrid:
    """Zero the amplitude wherever photon 1 is outside the slit opening.

    Samples with |z1| <= slit_width/2 are left untouched; the rest are
    zeroed.  Idempotent projection; norm never increases.
    """
    if slit_width < 8.0 * grid.spacing1:
        raise ValidationError(
            f"slit under-resolved: width {slit_width:.3e} m spans fewer than 8 "
            f"grid cells of {grid.spacing1:.3e} m")
    mask = np.abs(grid.z1_axis) <= slit_width / 2.0
    out = grid.amplitudes * mask[:, None]
    return WaveGrid(z1_axis=grid.z1_axis, z2_axis=grid.z2_axis, amplitudes=out)


def slit_integrand(z1p, z1, z2, config: PhysicalConfig):
    """Exact post-slit integrand over the slit coordinate z1p, including the
    quadratic terms and the Gaussian factor the narrow-slit form neglects."""
    params = derive_params(config)
    lam_d = config.wavelength * config.slit_to_detector
    asym = params.width_asymmetry
    pref = post_slit_prefactor(config, params)
    return pref * (np.exp(1j * np.pi * (z1 - z1p) ** 2 / lam_d)
                   * np.exp(-((z2 - asym * z1p) ** 2) / params.detector_env_sq)
                   * np.exp(-4.0 * z1p**2 / params.combined_width_sq))


def slit_integral(z1, z2, config: PhysicalConfig,
                  spec: QuadratureSpec = QuadratureSpec()) -> complex:
    """Adaptive Gauss-Legendre evaluation of the exact post-slit amplitude.

    Integrates the full integrand over the slit opening, doubling the node
    count until the relative change drops below the spec tolerance.
    """
    half = config.slit_width / 2.0
    previous = None
    value = None
    order = spec.start_order
    while order <= spec.max_order:
        nodes, weights = leggauss(order)
        z1p = nodes * half
        previous = value
        value = complex(np.sum(weights * slit_integrand(z1p, z1, z2, config)) * half)
        if previous is not None:
            scale = max(abs(value), abs(previous))
            if scale == 0.0 or abs(value - previous) <= spec.tolerance * scale:
                return value
        order *= 2
    raise ConvergenceError(
        f"slit integral did not converge by order {spec.max_order}: "
        f"last two iterates {previous!r} and {value!r} differ by more than "
        f"rel {spec.tolerance:g}")


def end_to_end_density(spec: GridSpec, config: PhysicalConfig, *,
                       with_slit=True) -> WaveGrid:
    """Full brute-force pipeline: sample the source state, propagate both
    coordinates to the slit plane, truncate photon 1 to the slit opening,
    propagate both coordinates to the detectors, return |amplitude|^2."""
    pattern_half_width = (config.wavelength
                          * (2.0 * config.source_to_slit + config.slit_to_detector)
                          / (2.0 * config.slit_width))
    if spec.half_extent < 8.0 * pattern_half_width:
        warnings.warn(
            f"grid half extent {spec.half_extent:.3e} m is below 8x the expected "
            f"pattern half width {pattern_half_width:.3e} m; wrap-around may "
            f"contaminate the outer region", stacklevel=2)
    grid = sample_initial_state(config, spec)
    grid = propagate(grid, config.source_to_slit, config)
    if with_slit:
        grid = truncate_slit(grid, config.slit_width)
    grid = propagate(grid, config.slit_to_detector, config)
    dens = np.abs(grid.amplitudes) ** 2
    return WaveGrid(z1_axis=grid.z1_axis, z2_axis=grid.z2_axis, amplitudes=dens)


def interior_mask(axis, guard_fraction=0.2):
    """Boolean mask excluding the outer guard band of an axis (wrap-around
    from the periodic transform is confined there)."""
    half = float(np.max(np.abs(axis)))
    return np.abs(axis) <= (1.0 - guard_fraction) * half
