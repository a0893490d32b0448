"""Profile post-processing: normalization, extrema, fringe metrics, errors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analytic import DensityProfile
from .core import ValidationError


class PatternNotResolvedError(ValueError):
    """Raised when a profile lacks the extrema a fringe measurement needs."""


@dataclass(frozen=True)
class Extremum:
    position: float
    value: float
    kind: str  # "min" or "max"


@dataclass(frozen=True)
class FringeMetrics:
    """Extrema-derived observables of a diffraction profile.

    Widths are mean distances from the central maximum; the secondary-max
    fields are None when no secondary maxima flank the central lobe.
    """

    central_max_position: float
    first_min_positions: tuple
    first_secondary_max_positions: tuple | None
    measured_width_min: float
    measured_width_max: float | None
    peak_value: float
    secondary_to_central_ratio: float | None


def normalize(profile: DensityProfile, mode="unit-area", *, scale=1.0) -> DensityProfile:
    """Return a rescaled copy of a profile.

    ``unit-area`` divides by the trapezoid integral; ``peak-scaled`` maps the
    maximum value to ``scale``.  Idempotent per mode.
    """
    values = profile.values
    peak = float(np.max(values))
    if peak <= 0.0:
        raise ValidationError("cannot normalize an all-zero profile")
    if mode == "unit-area":
        area = float(np.trapezoid(values, profile.positions))
        return DensityProfile(profile.positions, values / area, "unit-area")
    if mode == "peak-scaled":
        # divide first so the maximum maps to exactly 1.0, then to scale
        return DensityProfile(profile.positions, values / peak * scale,
                              f"peak-scaled({scale:g})")
    raise ValidationError(f"unknown normalization mode {mode!r}")


def _parabolic_refine(x, y, i):
    """Vertex of the parabola through the bracketing triple around index i,
    clamped to the bracket."""
    x0, x1, x2 = float(x[i - 1]), float(x[i]), float(x[i + 1])
    y0, y1, y2 = float(y[i - 1]), float(y[i]), float(y[i + 1])
    b1 = (x1 - x0) * (y1 - y2)
    b2 = (x1 - x2) * (y1 - y0)
    denom = b1 - b2
    if denom == 0.0:
        return x1, y1
    pos = x1 - 0.5 * ((x1 - x0) * b1 - (x1 - x2) * b2) / denom
    pos = float(np.clip(pos, x0, x2))
    l0 = (pos - x1) * (pos - x2) / ((x0 - x1) * (x0 - x2))
    l1 = (pos - x0) * (pos - x2) / ((x1 - x0) * (x1 - x2))
    l2 = (pos - x0) * (pos - x1) / ((x2 - x0) * (x2 - x1))
    return pos, float(y0 * l0 + y1 * l1 + y2 * l2)


def find_extrema(profile: DensityProfile):
    """Interior local extrema by 3-point comparison, positions refined by
    parabolic interpolation through the bracketing triple."""
    x = profile.positions
    y = profile.values
    if x.size < 5:
        raise ValidationError("profile must contain at least 5 points")
    out = []
    for i in range(1, x.size - 1):
        if y[i] < y[i - 1] and y[i] < y[i + 1]:
            kind = "min"
        elif y[i] > y[i - 1] and y[i] > y[i + 1]:
            kind = "max"
        else:
            continue
        pos, val = _parabolic_refine(x, y, i)
        out.append(Extremum(position=pos, value=val, kind=kind))
    return out


def measure_fringe(profile: DensityProfile) -> FringeMetrics:
    """Extract fringe observables from a profile.

    Needs a central maximum with at least one local minimum on each side;
    raises PatternNotResolvedError otherwise.
    """
    extrema = find_extrema(profile)
    maxima = [e for e in extrema if e.kind == "max"]
    minima = [e for e in extrema if e.kind == "min"]
    if not maxima:
        raise PatternNotResolvedError("pattern-not-resolved: no interior maximum")
    central = max(maxima, key=lambda e: e.value)
    left_min = [e for e in minima if e.position < central.position]
    right_min = [e for e in minima if e.position > central.position]
    if not left_min or not right_min:
        raise PatternNotResolvedError(
            "pattern-not-resolved: central maximum is not bracketed by minima")
    first_left = max(left_min, key=lambda e: e.position)
    first_right = min(right_min, key=lambda e: e.position)
    width_min = 0.5 * ((central.position - first_left.position)
                       + (first_right.position - central.position))

    left_sec = [e for e in maxima if e.position < first_left.position]
    right_sec = [e for e in maxima if e.position > first_right.position]
    sec_positions = None
    width_max = None
    ratio = None
    if left_sec and right_sec:
        sl = max(left_sec, key=lambda e: e.position)
        sr = min(right_sec, key=lambda e: e.position)
        sec_positions = (sl.position, sr.position)
        width_max = 0.5 * ((central.position - sl.position)
                           + (sr.position - central.position))
        ratio = 0.5 * (sl.value + sr.value) / central.value

    return FringeMetrics(
        central_max_position=central.position,
        first_min_positions=(first_left.position, first_right.position),
        first_secondary_max_positions=sec_positions,
        measured_width_min=width_min,
        measured_width_max=width_max,
        peak_value=central.value,
        secondary_to_central_ratio=ratio,
    )


@dataclass(frozen=True)
class ComparisonResult:
    l_inf_rel: float
    l2_rel: float
    resampled: bool


def compare(a: DensityProfile, b: DensityProfile) -> ComparisonResult:
    """L-infinity and L2 relative errors of unit-area-normalized profiles.

    Profiles on different axes are resampled onto the overlap of the first
    profile's axis by linear interpolation (flagged in the result); disjoint
    supports are rejected.  Symmetric in its arguments on a common axis.
    """
    xa, xb = a.positions, b.positions
    resampled = not (xa.size == xb.size and np.array_equal(xa, xb))
    if resampled:
        lo = max(xa[0], xb[0])
        hi = min(xa[-1], xb[-1])
        if lo >= hi:
            raise ValidationError("profiles have disjoint position supports")
        keep = (xa >= lo) & (xa <= hi)
        x = xa[keep]
        va = a.values[keep]
        vb = np.interp(x, xb, b.values)
    else:
        x = xa
        va = a.values
        vb = b.values
    area_a = float(np.trapezoid(va, x))
    area_b = float(np.trapezoid(vb, x))
    if area_a <= 0.0 or area_b <= 0.0:
        raise ValidationError("cannot compare profiles with non-positive area")
    na = va / area_a
    nb = vb / area_b
    peak = max(float(np.max(na)), float(np.max(nb)))
    l_inf = float(np.max(np.abs(na - nb))) / peak
    denom = max(float(np.linalg.norm(na)), float(np.linalg.norm(nb)))
    l2 = float(np.linalg.norm(na - nb)) / denom
    return ComparisonResult(l_inf_rel=l_inf, l2_rel=l2, resampled=resampled)
