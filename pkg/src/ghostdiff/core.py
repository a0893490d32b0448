"""Physical parameters, unit handling, and derived propagation constants.

Everything downstream works in SI units (meters, inverse meters).  Config
ingestion accepts unit-suffixed strings such as ``"702.2nm"``, ``"0.4mm"``
or ``"5.0/mm"`` and converts on parse.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path


class ValidationError(ValueError):
    """Raised when a physical parameter or option fails validation."""


class ConvergenceError(RuntimeError):
    """Raised when an iterative numerical scheme fails to converge."""


# Length units as powers of ten; applied by exponent adjustment so that unit
# conversion costs a single rounding ("702.2nm" parses to exactly 702.2e-9).
_LENGTH_EXP = {"m": 0, "cm": -2, "mm": -3, "um": -6, "µm": -6, "nm": -9}

_QUANTITY_RE = re.compile(
    r"^\s*([-+]?[0-9]*\.?[0-9]+)(?:[eE]([-+]?[0-9]+))?\s*(.*?)\s*$"
)


def _scaled_float(mantissa, exponent, power10):
    return float(f"{mantissa}e{int(exponent or 0) + power10}")


def parse_length(value, field="length"):
    """Parse a length given as a number (meters) or a unit-suffixed string."""
    if isinstance(value, (int, float)):
        return float(value)
    m = _QUANTITY_RE.match(str(value))
    if not m:
        raise ValidationError(f"{field}: cannot parse length {value!r}")
    mantissa, exponent, unit = m.groups()
    if unit == "":
        return _scaled_float(mantissa, exponent, 0)
    if unit not in _LENGTH_EXP:
        raise ValidationError(f"{field}: unknown length unit {unit!r} in {value!r}")
    return _scaled_float(mantissa, exponent, _LENGTH_EXP[unit])


def parse_inverse_length(value, field="inverse length"):
    """Parse an inverse length given in 1/m or as e.g. ``"5.0/mm"``, ``"5.0mm^-1"``."""
    if isinstance(value, (int, float)):
        return float(value)
    m = _QUANTITY_RE.match(str(value))
    if not m:
        raise ValidationError(f"{field}: cannot parse inverse length {value!r}")
    mantissa, exponent, unit = m.groups()
    if unit == "":
        return _scaled_float(mantissa, exponent, 0)
    for prefix in ("/", "1/"):
        if unit.startswith(prefix) and unit[len(prefix):] in _LENGTH_EXP:
            return _scaled_float(mantissa, exponent, -_LENGTH_EXP[unit[len(prefix):]])
    for suffix in ("^-1", "**-1", "-1"):
        if unit.endswith(suffix) and unit[: -len(suffix)] in _LENGTH_EXP:
            return _scaled_float(mantissa, exponent, -_LENGTH_EXP[unit[: -len(suffix)]])
    raise ValidationError(f"{field}: unknown inverse-length unit {unit!r} in {value!r}")


# Relative asymmetry |sum - diff| / |sum + diff| above which the photon pair
# is flagged entangled; chosen at the floating-point noise floor.
ENTANGLEMENT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class PhysicalConfig:
    """Experiment geometry and source parameters, all in SI units.

    Attributes
    ----------
    wavelength : float
        Photon wavelength (m).
    slit_width : float
        Full width of the single slit in the path of photon 1 (m).
    momentum_spread : float
        Wave-vector spread of the pair source along the transverse axis (1/m).
    position_spread : float
        Position spread of the pair centroid at the source (m).
    slit_to_detector : float
        Propagation distance from the slit plane to either detector (m).
    source_to_slit : float
        Propagation distance from the source to the slit plane (m).
    """

    wavelength: float = 702.2e-9
    slit_width: float = 0.4e-3
    momentum_spread: float = 5.0e3
    position_spread: float = 2.0e-3
    slit_to_detector: float = 0.6
    source_to_slit: float = 0.6

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v) or v <= 0:
                raise ValidationError(f"{name} must be strictly positive and finite, got {v!r}")
            object.__setattr__(self, name, float(v))

    # -- regime flags (informational, never hard errors) -------------------

    @property
    def entangled_regime(self):
        """True when the position and momentum spreads satisfy Omega*sigma >> 1."""
        return self.position_spread * self.momentum_spread > 5.0

    @property
    def fresnel_regime(self):
        """True when the slit is far smaller than both propagation distances."""
        return (self.slit_width / self.slit_to_detector < 1e-2
                and self.slit_width / self.source_to_slit < 1e-2)

    @property
    def approximation_regime(self):
        """True when source-leg dispersion dominates the inverse momentum spread."""
        dispersive = 2.0 * self.wavelength * self.source_to_slit / math.pi
        return dispersive > 100.0 / self.momentum_spread**2

    # -- construction helpers ----------------------------------------------

    @classmethod
    def from_mapping(cls, data):
        """Build a config from a dict whose values may carry unit suffixes."""
        kwargs = {}
        for name in ("wavelength", "slit_width", "position_spread",
                     "slit_to_detector", "source_to_slit"):
            if name in data:
                kwargs[name] = parse_length(data[name], field=name)
        if "momentum_spread" in data:
            kwargs["momentum_spread"] = parse_inverse_length(
                data["momentum_spread"], field="momentum_spread")
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValidationError(f"unknown config fields: {sorted(unknown)}")
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path):
        try:
            text = Path(path).read_text()
        except OSError:
            raise
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config file {path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ValidationError(f"config file {path}: expected a JSON object")
        return cls.from_mapping(data)

    def replace(self, **changes):
        from dataclasses import replace as _replace
        return _replace(self, **changes)

    def disentangled(self):
        """Same geometry with the position spread set to the product-state point."""
        return self.replace(position_spread=1.0 / (2.0 * self.momentum_spread))


@dataclass(frozen=True)
class DerivedParams:
    """Complex propagation constants computed once from a config.

    ``sum_width_sq`` and ``diff_width_sq`` are the complex squared widths of
    the Gaussians in the sum and difference coordinates of the pair at the
    slit plane; ``detector_env_sq`` is the complex squared width of the
    partner photon's envelope at the detectors; ``coupling`` is the complex
    cross term (1/m^2) that couples the two detector positions and vanishes
    exactly for a product state.
    """

    wavenumber: float
    effective_distance: float
    sum_width_sq: complex
    diff_width_sq: complex
    detector_env_sq: complex
    coupling: complex
    is_entangled: bool

    @property
    def combined_width_sq(self):
        return self.sum_width_sq + self.diff_width_sq

    @property
    def width_asymmetry(self):
        """(sum - diff) / (sum + diff); exactly zero for a product state."""
        return self.coupling * self.detector_env_sq


def derive_params(config: PhysicalConfig) -> DerivedParams:
    """Compute the complex propagation constants for a configuration.

    Deterministic and pure.  The width difference is evaluated in factored
    form so that the cross coupling is exactly zero whenever the product of
    twice the position spread and the momentum spread is exactly one in
    floating point.
    """
    lam = config.wavelength
    sig = config.momentum_spread
    pos = config.position_spread
    det_dist = config.slit_to_detector
    src_dist = config.source_to_slit

    wavenumber = 2.0 * math.pi / lam
    effective_distance = 2.0 * src_dist + det_dist

    dispersive = 2j * lam * src_dist / math.pi
    sum_width_sq = 4.0 * pos**2 + dispersive
    diff_width_sq = 1.0 / sig**2 + dispersive
    combined = sum_width_sq + diff_width_sq
    # 4*pos^2 - 1/sig^2, factored to cancel exactly at 2*pos*sig == 1
    width_diff = (2.0 * pos - 1.0 / sig) * (2.0 * pos + 1.0 / sig)

    detector_env_sq = (sum_width_sq * diff_width_sq / combined
                       + 1j * lam * det_dist / math.pi)
    if detector_env_sq.real <= 0.0:
        raise ValidationError(
            "detector envelope parameter has non-positive real part; "
            "the post-slit Gaussian envelope would not be normalizable")
    coupling = width_diff / (combined * detector_env_sq)
    is_entangled = abs(width_diff) / abs(combined) > ENTANGLEMENT_TOLERANCE

    return DerivedParams(
        wavenumber=wavenumber,
        effective_distance=effective_distance,
        sum_width_sq=sum_width_sq,
        diff_width_sq=diff_width_sq,
        detector_env_sq=detector_env_sq,
        coupling=coupling,
        is_entangled=is_entangled,
    )


def uncertainties(config: PhysicalConfig):
    """Position and wave-vector spreads (dz, dk) of either photon.

    dz = sqrt(pos^2 + 1/(4 sig^2)), dk = (1/2) sqrt(sig^2 + 1/(4 pos^2));
    the product is bounded below by 1/2 with equality exactly at
    2*pos*sig = 1.
    """
    sig = config.momentum_spread
    pos = config.position_spread
    dz = math.hypot(pos, 1.0 / (2.0 * sig))
    dk = 0.5 * math.hypot(sig, 1.0 / (2.0 * pos))
    return dz, dk


@dataclass(frozen=True)
class ScanSpec:
    """A uniform 1D detector scan, endpoints included."""

    start: float
    stop: float
    count: int

    def __post_init__(self):
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ValidationError("scan endpoints must be finite")
        if not self.start < self.stop:
            raise ValidationError(
                f"scan start must be below stop, got [{self.start}, {self.stop}]")
        if int(self.count) != self.count or self.count < 2:
            raise ValidationError(f"scan count must be an integer >= 2, got {self.count}")
        object.__setattr__(self, "count", int(self.count))

    def positions(self):
        import numpy as np
        return np.linspace(self.start, self.stop, self.count)

    @classmethod
    def parse(cls, text):
        """Parse ``"start,stop,count"`` where the endpoints may carry units."""
        parts = str(text).split(",")
        if len(parts) != 3:
            raise ValidationError(f"scan spec must be 'start,stop,count', got {text!r}")
        return cls(parse_length(parts[0], "scan start"),
                   parse_length(parts[1], "scan stop"),
                   int(parts[2]))
