"""Scenario runner: named experiments, CSV outputs, machine-readable summaries.

Summary JSON goes to stdout, a human-readable table to stderr.  Exit codes:
0 success, 2 invalid configuration or options, 3 numerical non-convergence,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, analytic, oracle
from .core import (ConvergenceError, PhysicalConfig, ScanSpec, ValidationError,
                   derive_params, parse_length, uncertainties)

SCENARIOS = ("ghost", "shifted", "marginal-z1", "marginal-z2", "disentangled",
             "first-order", "fringe-sweep", "validate-quadrature", "validate-grid")


@dataclass
class RunSummary:
    scenario: str
    config_si: dict
    derived: dict
    regime_flags: dict
    metrics: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    wall_time_s: float = 0.0


# ---------------------------------------------------------------------------
# formatting and file output

def _fmt(x):
    """Fixed 17-significant-digit float formatting, locale independent."""
    return format(float(x), ".17g")


def _jsonable(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def _write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.tmp{os.getpid()}")
    try:
        tmp.write_text(text)
        os.replace(tmp, path)
    finally:
        tmp.unlink(missing_ok=True)


def _write_profile_csv(path: Path, profile) -> str:
    lines = ["position_m,value"]
    for x, v in zip(profile.positions, profile.values):
        lines.append(f"{_fmt(x)},{_fmt(v)}")
    _write_atomic(path, "\n".join(lines) + "\n")
    return str(path)


def _write_sweep_csv(path: Path, rows) -> str:
    lines = ["param,width_measured_m,width_formula_m,rel_err"]
    for param, measured, formula, rel in rows:
        lines.append(f"{_fmt(param)},{_fmt(measured)},{_fmt(formula)},{_fmt(rel)}")
    _write_atomic(path, "\n".join(lines) + "\n")
    return str(path)


# ---------------------------------------------------------------------------
# shared pieces

def _summary_base(name, config):
    params = derive_params(config)
    dz, dk = uncertainties(config)
    return RunSummary(
        scenario=name,
        config_si={f: getattr(config, f) for f in config.__dataclass_fields__},
        derived={
            "wavenumber": params.wavenumber,
            "effective_distance": params.effective_distance,
            "sum_width_sq": params.sum_width_sq,
            "diff_width_sq": params.diff_width_sq,
            "detector_env_sq": params.detector_env_sq,
            "coupling": params.coupling,
            "is_entangled": params.is_entangled,
            "position_uncertainty": dz,
            "wavevector_uncertainty": dk,
        },
        regime_flags={
            "entangled_regime": config.entangled_regime,
            "fresnel_regime": config.fresnel_regime,
            "approximation_regime": config.approximation_regime,
        },
    )


def _fringe_metrics_dict(profile, config):
    formula = analytic.fringe_width(config)
    try:
        metrics = analysis.measure_fringe(profile)
    except analysis.PatternNotResolvedError:
        return {"status": "pattern-not-resolved", "width_formula_m": formula}
    out = asdict(metrics)
    out["status"] = "resolved"
    out["width_formula_m"] = formula
    out["width_rel_err"] = abs(metrics.measured_width_min - formula) / formula
    return out


def _threads():
    env = os.environ.get("GHOSTDIFF_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValidationError(f"GHOSTDIFF_THREADS must be an integer, got {env!r}")
    return min(8, os.cpu_count() or 1)


def _singles_axis_scales(config):
    """Physical scales used to pick integration spans for the marginals."""
    params = derive_params(config)
    lam_d = config.wavelength * config.slit_to_detector
    env_std = 1.0 / (2.0 * math.sqrt((1.0 / params.detector_env_sq).real))
    imb = abs(params.coupling.imag)
    # Stationary point of the oscillating argument couples the two detector
    # coordinates; shift_coeff maps a z1 offset to the z2 response center.
    shift_coeff = math.pi / (2.0 * lam_d * imb) if imb > 0 else 0.0
    sinc_zero = 2.0 * lam_d / config.slit_width
    return env_std, shift_coeff, sinc_zero


def _singles_profile(config, outer: ScanSpec, integrate_over: str) -> analytic.DensityProfile:
    """Profile of one photon with the other integrated out (trapezoid rule)."""
    env_std, shift_coeff, sinc_zero = _singles_axis_scales(config)
    outer_max = max(abs(outer.start), abs(outer.stop))
    pos = outer.positions()
    if integrate_over == "z2":
        half = 8.0 * env_std + (shift_coeff if shift_coeff else 0.0) * outer_max
        inner = ScanSpec(-half, half, 1601)
        z2 = inner.positions()
        dens = analytic.joint_density(pos[:, None], z2[None, :], config)
        vals = np.trapezoid(dens, z2, axis=1)
    elif integrate_over == "z1":
        half = 8.0 * sinc_zero
        if shift_coeff:
            half += outer_max / shift_coeff
        inner = ScanSpec(-half, half, 1601)
        z1 = inner.positions()
        dens = analytic.joint_density(z1[:, None], pos[None, :], config)
        vals = np.trapezoid(dens, z1, axis=0)
    else:
        raise ValidationError(f"unknown integration axis {integrate_over!r}")
    return analytic.DensityProfile(positions=pos, values=vals)


# ---------------------------------------------------------------------------
# scenarios

def run_ghost(config, opts) -> RunSummary:
    summary = _summary_base("ghost", config)
    scan = opts.scan or ScanSpec(-10e-3, 10e-3, 401)
    profile = analytic.conditional_profile(0.0, scan, config)
    scaled = analysis.normalize(profile, "peak-scaled", scale=opts.peak_scale)
    out = _write_profile_csv(opts.out / "ghost_profile.csv", scaled)
    summary.outputs.append(out)
    summary.metrics["fringe"] = _fringe_metrics_dict(profile, config)
    summary.metrics["peak_scale"] = opts.peak_scale
    return summary


def run_shifted(config, opts) -> RunSummary:
    if opts.z0 is None:
        raise ValidationError("scenario 'shifted' requires --z0")
    summary = _summary_base("shifted", config)
    summary.metrics["z0_m"] = opts.z0
    scan = opts.scan or ScanSpec(-10e-3, 10e-3, 401)
    profile = analytic.conditional_profile(opts.z0, scan, config)
    scaled = analysis.normalize(profile, "peak-scaled", scale=opts.peak_scale)
    out = _write_profile_csv(opts.out / "shifted_profile.csv", scaled)
    summary.outputs.append(out)
    summary.metrics["fringe"] = _fringe_metrics_dict(profile, config)
    idx = int(np.argmax(profile.values))
    summary.metrics["argmax_m"] = float(profile.positions[idx])
    reference = analytic.conditional_profile(0.0, scan, config)
    summary.metrics["argmax_shift_m"] = (
        summary.metrics["argmax_m"] - float(reference.positions[np.argmax(reference.values)]))
    return summary


def _extrema_census(profile):
    extrema = analysis.find_extrema(profile)
    return {
        "n_minima": sum(1 for e in extrema if e.kind == "min"),
        "n_maxima": sum(1 for e in extrema if e.kind == "max"),
        "minima_positions_m": [e.position for e in extrema if e.kind == "min"],
    }


def run_marginal_z1(config, opts) -> RunSummary:
    """Photon 2 singles: joint density integrated over z1, scanned along z2."""
    summary = _summary_base("marginal-z1", config)
    scan = opts.scan or ScanSpec(-10e-3, 10e-3, 401)
    profile = _singles_profile(config, scan, integrate_over="z1")
    out = _write_profile_csv(opts.out / "marginal_z1_profile.csv", profile)
    summary.outputs.append(out)
    summary.metrics["extrema"] = _extrema_census(profile)
    summary.metrics["unimodal"] = summary.metrics["extrema"]["n_minima"] == 0
    return summary


def run_marginal_z2(config, opts) -> RunSummary:
    """Photon 1 singles: joint density integrated over z2, scanned along z1."""
    summary = _summary_base("marginal-z2", config)
    scan = opts.scan or ScanSpec(-15e-3, 15e-3, 401)
    profile = _singles_profile(config, scan, integrate_over="z2")
    out = _write_profile_csv(opts.out / "marginal_z2_profile.csv", profile)
    summary.outputs.append(out)
    summary.metrics["extrema"] = _extrema_census(profile)
    summary.metrics["unimodal"] = summary.metrics["extrema"]["n_minima"] == 0
    return summary


def run_disentangled(config, opts) -> RunSummary:
    config = config.disentangled()
    summary = _summary_base("disentangled", config)
    scan = opts.scan or ScanSpec(-10e-3, 10e-3, 401)

    conditional = analytic.conditional_profile(0.0, scan, config)
    out = _write_profile_csv(opts.out / "disentangled_conditional.csv",
                             analysis.normalize(conditional, "peak-scaled",
                                                scale=opts.peak_scale))
    summary.outputs.append(out)
    summary.metrics["fringe"] = _fringe_metrics_dict(conditional, config)

    _, _, sinc_zero = _singles_axis_scales(config)
    z1_scan = ScanSpec(-7.2 * sinc_zero, 7.2 * sinc_zero, 1401)
    singles = _singles_profile(config, z1_scan, integrate_over="z2")
    out = _write_profile_csv(opts.out / "disentangled_singles_z1.csv", singles)
    summary.outputs.append(out)

    minima = sorted(e.position for e in analysis.find_extrema(singles) if e.kind == "min")
    zeros = []
    for n in (1, 2, 3):
        expected = 2.0 * n * config.wavelength * config.slit_to_detector / config.slit_width
        candidates = [p for p in minima if p > 0]
        if len(candidates) >= n:
            measured = candidates[n - 1]
            zeros.append({"order": n, "measured_m": measured, "expected_m": expected,
                          "rel_err": abs(measured - expected) / expected})
    summary.metrics["singles_sinc_zeros"] = zeros
    return summary


def run_first_order(config, opts) -> RunSummary:
    summary = _summary_base("first-order", config)
    scan = opts.scan or ScanSpec(-15e-3, 15e-3, 401)
    profile = _singles_profile(config, scan, integrate_over="z2")
    out = _write_profile_csv(opts.out / "first_order_profile.csv", profile)
    summary.outputs.append(out)
    census = _extrema_census(profile)
    summary.metrics["extrema"] = census
    summary.metrics["diffraction_visible"] = census["n_minima"] > 0
    return summary


def _sweep_point(config, param, value):
    if param == "slit_width":
        cfg = config.replace(slit_width=value)
    elif param == "distance":
        scale = value / (2.0 * config.source_to_slit + config.slit_to_detector)
        cfg = config.replace(slit_to_detector=config.slit_to_detector * scale,
                             source_to_slit=config.source_to_slit * scale)
    else:
        raise ValidationError(f"unknown sweep parameter {param!r}")
    width_formula = analytic.fringe_width(cfg)
    scan = ScanSpec(-3.5 * width_formula, 3.5 * width_formula, 1401)
    profile = analytic.conditional_profile(0.0, scan, cfg)
    try:
        measured = analysis.measure_fringe(profile).measured_width_min
        rel = abs(measured - width_formula) / width_formula
    except analysis.PatternNotResolvedError:
        measured = float("nan")
        rel = float("nan")
    return value, measured, width_formula, rel


def run_fringe_sweep(config, opts) -> RunSummary:
    summary = _summary_base("fringe-sweep", config)
    param = opts.sweep_param
    values = opts.sweep_values
    if values is None:
        values = ([0.2e-3, 0.4e-3, 0.8e-3] if param == "slit_width"
                  else [0.9, 1.8, 3.6])
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        rows = list(pool.map(lambda v: _sweep_point(config, param, v), values))
    out = _write_sweep_csv(opts.out / "fringe_sweep.csv", rows)
    summary.outputs.append(out)
    summary.metrics["sweep_param"] = param
    summary.metrics["points"] = [
        {"param": p, "width_measured_m": m, "width_formula_m": f, "rel_err": r}
        for p, m, f, r in rows]
    summary.metrics["all_within_5pct"] = all(
        math.isfinite(r) and r <= 0.05 for _, _, _, r in rows)
    return summary


def run_validate_quadrature(config, opts) -> RunSummary:
    summary = _summary_base("validate-quadrature", config)
    qspec = oracle.QuadratureSpec()

    z2s = np.linspace(-2.5e-3, 2.5e-3, 21)
    quad = np.array([oracle.slit_integral(0.0, z, config, qspec) for z in z2s])
    closed = analytic.final_amplitude(0.0, z2s, config)
    rel_complex = np.abs(quad - closed) / np.abs(quad)
    rel_modulus = np.abs(np.abs(quad) - np.abs(closed)) / np.abs(quad)
    shape = analysis.compare(
        analytic.DensityProfile(z2s, np.abs(quad) ** 2),
        analytic.DensityProfile(z2s, np.abs(closed) ** 2))
    rows = ["z2_m,rel_complex,rel_modulus"]
    for z, rc, rm in zip(z2s, rel_complex, rel_modulus):
        rows.append(f"{_fmt(z)},{_fmt(rc)},{_fmt(rm)}")
    path = opts.out / "quadrature_check.csv"
    _write_atomic(path, "\n".join(rows) + "\n")
    summary.outputs.append(str(path))
    summary.metrics["on_axis"] = {
        "max_rel_complex": float(np.max(rel_complex)),
        "max_rel_modulus": float(np.max(rel_modulus)),
        "normalized_density_l_inf": shape.l_inf_rel,
    }

    def rel_err_at(slit_width, z2):
        cfg = config.replace(slit_width=slit_width)
        q = oracle.slit_integral(0.0, z2, config=cfg, spec=qspec)
        f = complex(analytic.final_amplitude(0.0, z2, cfg))
        return abs(q - f) / abs(q)

    z2_probe = 2e-3
    base = config.slit_width
    ratios = {}
    for label, e in (("at_default_width", base), ("asymptotic", base / 4.0)):
        ratios[label] = {
            "slit_width_m": e,
            "rel_err": rel_err_at(e, z2_probe),
            "rel_err_halved": rel_err_at(e / 2.0, z2_probe),
        }
        ratios[label]["ratio"] = ratios[label]["rel_err"] / ratios[label]["rel_err_halved"]
    summary.metrics["halving"] = ratios

    # Adjudication between the two sinc-argument conventions off axis.
    points = [(0.25e-3, 0.25e-3), (0.25e-3, 0.5e-3), (0.5e-3, 0.25e-3), (0.5e-3, 0.5e-3)]
    adjud = {}
    for convention in analytic.SINC_CONVENTIONS:
        rels = []
        for z1, z2 in points:
            q = oracle.slit_integral(z1, z2, config, qspec)
            f = complex(analytic.final_amplitude(z1, z2, config, convention=convention))
            rels.append(abs(q - f) / abs(q))
        adjud[convention] = {"max_rel_complex": max(rels), "rel_complex": rels}
    supported = min(adjud, key=lambda k: adjud[k]["max_rel_complex"])
    summary.metrics["off_axis_adjudication"] = {
        "points": [[z1, z2] for z1, z2 in points],
        "per_convention": adjud,
        "supported_convention": supported,
    }
    return summary


def run_validate_grid(config, opts) -> RunSummary:
    summary = _summary_base("validate-grid", config)
    spec = oracle.GridSpec(count=opts.grid_count, half_extent=opts.grid_extent)
    t0 = time.perf_counter()

    grid = oracle.sample_initial_state(config, spec)
    norm0 = grid.norm()
    at_slit = oracle.propagate(grid, config.source_to_slit, config)
    z = at_slit.z1_axis
    inner = oracle.interior_mask(z)
    analytic_slit = analytic.state_at_slit(z[inner][:, None], z[inner][None, :], config)
    state_err = (np.max(np.abs(at_slit.amplitudes[np.ix_(inner, inner)] - analytic_slit))
                 / np.max(np.abs(analytic_slit)))
    del analytic_slit

    no_slit = oracle.propagate(at_slit, config.slit_to_detector, config)
    unitarity_err = abs(no_slit.norm() - norm0) / norm0
    del no_slit

    truncated = oracle.truncate_slit(at_slit, config.slit_width)
    final = oracle.propagate(truncated, config.slit_to_detector, config)
    dens = np.abs(final.amplitudes) ** 2
    elapsed = time.perf_counter() - t0

    i0 = int(np.argmin(np.abs(final.z1_axis)))
    window = np.abs(final.z2_axis) <= 8e-3
    slice_profile = analytic.DensityProfile(final.z2_axis[window], dens[i0, window])
    closed = analytic.DensityProfile(
        final.z2_axis[window],
        analytic.joint_density(0.0, final.z2_axis[window], config))
    agreement = analysis.compare(slice_profile, closed)
    out = _write_profile_csv(opts.out / "grid_slice.csv", slice_profile)
    summary.outputs.append(out)
    if opts.dump_grid:
        dump_path = str(opts.out / "end_to_end_density.f64")
        oracle.WaveGrid(final.z1_axis, final.z2_axis, dens).dump(dump_path)
        summary.outputs.extend([dump_path, dump_path + ".json"])

    def slice_at(spec2):
        d = oracle.end_to_end_density(spec2, config)
        j0 = int(np.argmin(np.abs(d.z1_axis)))
        w = np.abs(d.z2_axis) <= 8e-3
        return analytic.DensityProfile(d.z2_axis[w], d.amplitudes[j0, w])

    refined = slice_at(oracle.GridSpec(count=2 * spec.count, half_extent=spec.half_extent))
    enlarged = slice_at(oracle.GridSpec(count=2 * spec.count, half_extent=2 * spec.half_extent))
    summary.metrics.update({
        "grid": {"count": spec.count, "half_extent_m": spec.half_extent},
        "initial_norm": norm0,
        "propagation_unitarity_rel_err": unitarity_err,
        "state_at_slit_l_inf_rel": float(state_err),
        "slice_vs_joint_density_l_inf_rel": agreement.l_inf_rel,
        "self_convergence": {
            "halved_spacing_l_inf": analysis.compare(slice_profile, refined).l_inf_rel,
            "doubled_extent_l_inf": analysis.compare(slice_profile, enlarged).l_inf_rel,
        },
        "pipeline_seconds": elapsed,
    })
    return summary


_RUNNERS = {
    "ghost": run_ghost,
    "shifted": run_shifted,
    "marginal-z1": run_marginal_z1,
    "marginal-z2": run_marginal_z2,
    "disentangled": run_disentangled,
    "first-order": run_first_order,
    "fringe-sweep": run_fringe_sweep,
    "validate-quadrature": run_validate_quadrature,
    "validate-grid": run_validate_grid,
}


# ---------------------------------------------------------------------------
# argument handling

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="ghostdiff",
        description="Two-photon single-slit ghost diffraction scenario runner")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a named scenario")
    run_p.add_argument("scenario", choices=SCENARIOS)
    _add_common(run_p)

    val_p = sub.add_parser("validate", help="run an oracle validation")
    val_p.add_argument("target", choices=("quadrature", "grid"))
    _add_common(val_p)
    return parser


def _add_common(p):
    p.add_argument("--config", type=Path, default=None, help="JSON config file")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--scan", default=None,
                   help="profile scan as start,stop,count (units allowed)")
    p.add_argument("--z0", default=None, help="fixed detector-1 position (shifted)")
    p.add_argument("--peak-scale", type=float, default=500.0,
                   help="peak value for peak-scaled profile CSVs")
    p.add_argument("--sweep-param", choices=("slit_width", "distance"),
                   default="slit_width")
    p.add_argument("--sweep-values", default=None,
                   help="comma-separated sweep values (units allowed)")
    p.add_argument("--grid-count", type=int, default=2048)
    p.add_argument("--grid-extent", default="25mm",
                   help="grid half extent per axis (validate-grid)")
    p.add_argument("--dump-grid", action="store_true",
                   help="dump the end-to-end density grid as flat binary")
    for flag, name in (("--wavelength", "wavelength"),
                       ("--slit-width", "slit_width"),
                       ("--momentum-spread", "momentum_spread"),
                       ("--position-spread", "position_spread"),
                       ("--slit-to-detector", "slit_to_detector"),
                       ("--source-to-slit", "source_to_slit")):
        p.add_argument(flag, dest=f"cfg_{name}", default=None,
                       help=f"override config field {name}")


def _resolve_config(args) -> PhysicalConfig:
    if args.config is not None:
        config = PhysicalConfig.from_json(args.config)
    else:
        config = PhysicalConfig()
    overrides = {}
    for name in ("wavelength", "slit_width", "momentum_spread", "position_spread",
                 "slit_to_detector", "source_to_slit"):
        value = getattr(args, f"cfg_{name}")
        if value is not None:
            overrides[name] = value
    if overrides:
        merged = {f: getattr(config, f) for f in config.__dataclass_fields__}
        merged.update(overrides)
        config = PhysicalConfig.from_mapping(merged)
    return config


def _resolve_options(args):
    args.out = Path(args.out)
    args.scan = ScanSpec.parse(args.scan) if args.scan else None
    args.z0 = parse_length(args.z0, "z0") if args.z0 is not None else None
    if args.sweep_values is not None:
        parse = parse_length
        args.sweep_values = [parse(v, "sweep value") for v in str(args.sweep_values).split(",")]
    args.grid_extent = parse_length(args.grid_extent, "grid extent")
    if args.peak_scale <= 0:
        raise ValidationError("--peak-scale must be positive")
    return args


def _print_summary(summary: RunSummary):
    payload = _jsonable(asdict(summary))
    json.dump(payload, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    lines = [f"scenario            {summary.scenario}",
             f"wall time           {summary.wall_time_s:.3f} s"]
    for key, value in summary.config_si.items():
        lines.append(f"config.{key:<20} {value:.9g}")
    lines.append(f"is_entangled        {summary.derived['is_entangled']}")
    for key, value in summary.metrics.items():
        lines.append(f"metric.{key:<20} {json.dumps(_jsonable(value))[:160]}")
    for out in summary.outputs:
        lines.append(f"output              {out}")
    print("\n".join(lines), file=sys.stderr)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "validate":
        scenario = f"validate-{args.target}"
    else:
        scenario = args.scenario
    try:
        args = _resolve_options(args)
        config = _resolve_config(args)
        started = time.perf_counter()
        summary = _RUNNERS[scenario](config, args)
        summary.wall_time_s = time.perf_counter() - started
        _print_summary(summary)
    except ValidationError as exc:
        print(f"ghostdiff: invalid configuration: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"ghostdiff: numerical non-convergence: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"ghostdiff: I/O error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
