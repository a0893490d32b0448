"""Brute-force oracles: spectral propagation, slit quadrature, and their
cross-checks against the closed forms."""

import math
import warnings

import numpy as np
import pytest

from ghostdiff import (ConvergenceError, GridSpec, PhysicalConfig, QuadratureSpec,
                       ValidationError, WaveGrid, dispersion, end_to_end_density,
                       final_amplitude, initial_state, joint_density, propagate,
                       sample_initial_state, slit_integral, state_at_slit,
                       truncate_slit)
from ghostdiff.oracle import SPEED_OF_LIGHT, interior_mask, slit_integrand

REF = PhysicalConfig()


class TestDispersion:
    def test_on_axis(self):
        k0 = 2.0 * math.pi / REF.wavelength
        assert dispersion(0.0, REF) == pytest.approx(SPEED_OF_LIGHT * k0, rel=1e-15)

    def test_even(self):
        kz = np.array([1e3, 5e4, 2e5])
        assert np.array_equal(dispersion(kz, REF), dispersion(-kz, REF))

    def test_taylor_remainder(self):
        # relative error vs the exact c*sqrt(k0^2+kz^2) is (1/8)(kz/k0)^4
        k0 = 2.0 * math.pi / REF.wavelength
        kz = k0 / 100.0
        exact = SPEED_OF_LIGHT * math.hypot(k0, kz)
        rel = abs(dispersion(kz, REF) - exact) / exact
        assert rel == pytest.approx(1.25e-9, rel=1e-3)

    def test_warns_beyond_paraxial(self):
        k0 = 2.0 * math.pi / REF.wavelength
        with pytest.warns(UserWarning, match="paraxial"):
            dispersion(k0 / 5.0, REF)


class TestGridTypes:
    def test_axis_contains_zero(self):
        spec = GridSpec(count=64, half_extent=1e-3)
        axis = spec.axis()
        assert axis[32] == 0.0
        assert np.allclose(np.diff(axis), spec.spacing)

    def test_grid_spec_validation(self):
        with pytest.raises(ValidationError):
            GridSpec(count=15)
        with pytest.raises(ValidationError):
            GridSpec(count=33)
        with pytest.raises(ValidationError):
            GridSpec(half_extent=-1.0)

    def test_wave_grid_validation(self):
        z = np.linspace(0, 1, 8)
        with pytest.raises(ValidationError, match="shape"):
            WaveGrid(z, z, np.zeros((8, 7), dtype=complex))
        bad = z.copy()
        bad[3] += 0.2
        with pytest.raises(ValidationError, match="uniform"):
            WaveGrid(bad, z, np.zeros((8, 8), dtype=complex))

    def test_dump_and_load_roundtrip(self, tmp_path):
        spec = GridSpec(count=32, half_extent=2e-3)
        grid = sample_initial_state(REF, spec)
        path = tmp_path / "state.f64"
        grid.dump(path)
        assert path.exists() and path.with_suffix(".f64.json").exists()
        back = WaveGrid.load(path)
        assert np.allclose(back.amplitudes, grid.amplitudes, rtol=0, atol=0)
        assert np.allclose(back.z1_axis, grid.z1_axis)

    def test_sampled_state_is_normalized(self):
        grid = sample_initial_state(REF, GridSpec(count=512, half_extent=12e-3))
        assert grid.norm() == pytest.approx(1.0, abs=1e-6)


class TestPropagate:
    def test_zero_distance_identity(self):
        grid = sample_initial_state(REF, GridSpec(count=256, half_extent=12e-3))
        out = propagate(grid, 0.0, REF)
        assert np.allclose(out.amplitudes, grid.amplitudes, rtol=0, atol=1e-12)

    def test_unitary(self):
        grid = sample_initial_state(REF, GridSpec(count=512, half_extent=15e-3))
        out = propagate(grid, REF.source_to_slit, REF)
        assert out.norm() == pytest.approx(grid.norm(), rel=1e-9)

    def test_matches_closed_form_at_slit_plane(self):
        grid = sample_initial_state(REF, GridSpec(count=512, half_extent=15e-3))
        out = propagate(grid, REF.source_to_slit, REF)
        z = out.z1_axis
        inner = interior_mask(z, guard_fraction=0.4)
        want = state_at_slit(z[inner][:, None], z[inner][None, :], REF)
        got = out.amplitudes[np.ix_(inner, inner)]
        err = np.max(np.abs(got - want)) / np.max(np.abs(want))
        assert err < 1e-3

    def test_rejects_undersampled_chirp(self):
        grid = sample_initial_state(REF, GridSpec(count=64, half_extent=0.5e-3))
        with pytest.raises(ValidationError, match="sampling rule"):
            propagate(grid, REF.source_to_slit, REF)

    def test_transfer_function_matches_direct_convolution(self):
        # Critically sampled case (N dz^2 = lam d): the DFT of the sampled
        # spatial kernel coincides with the sampled spectral multiplier, so
        # the two discretizations must agree to roundoff.
        lam = REF.wavelength
        n = 128
        dz = 2e-5
        dist = n * dz**2 / lam
        z = (np.arange(n) - n // 2) * dz
        pulse = np.exp(-(z**2) / (2 * (2e-4) ** 2)).astype(complex)
        grid = WaveGrid(z, z, np.tile(pulse[:, None], (1, n)))
        out = propagate(grid, dist, REF)

        kernel = (np.sqrt(1.0 / (1j * lam * dist))
                  * np.exp(1j * np.pi * (z[:, None] - z[None, :]) ** 2 / (lam * dist)))
        direct = (kernel @ pulse) * dz
        inner = interior_mask(z, guard_fraction=0.4)
        # the z2 axis carried a constant, untouched by propagation
        got = out.amplitudes[:, 0][inner]
        assert np.max(np.abs(got - direct[inner])) / np.max(np.abs(direct)) < 1e-12


class TestTruncateSlit:
    def _slit_plane_grid(self):
        # slit edges exactly halfway between cell centers: the binary mask
        # then carries an effective width of exactly the slit width
        spacing = REF.slit_width / 17.0
        spec = GridSpec(count=2048, half_extent=1024 * spacing)
        z = spec.axis()
        amps = state_at_slit(z[:, None], z[None, :], REF)
        return WaveGrid(z, z, amps)

    def test_projection_properties(self):
        grid = self._slit_plane_grid()
        once = truncate_slit(grid, REF.slit_width)
        twice = truncate_slit(once, REF.slit_width)
        assert np.array_equal(once.amplitudes, twice.amplitudes)
        assert once.norm() <= grid.norm()
        outside = np.abs(grid.z1_axis) > REF.slit_width / 2.0
        assert np.all(once.amplitudes[outside, :] == 0)
        inside = ~outside
        assert np.array_equal(once.amplitudes[inside, :], grid.amplitudes[inside, :])

    def test_wide_slit_is_identity(self):
        grid = self._slit_plane_grid()
        out = truncate_slit(grid, 1.0)
        assert np.array_equal(out.amplitudes, grid.amplitudes)

    def test_rejects_unresolved_slit(self):
        grid = self._slit_plane_grid()
        with pytest.raises(ValidationError, match="under-resolved"):
            truncate_slit(grid, 7.0 * grid.spacing1)

    def test_truncated_norm_matches_quadrature(self):
        grid = truncate_slit(self._slit_plane_grid(), REF.slit_width)
        got = grid.norm() ** 2
        # independent oracle: Gauss-Legendre over the slit x trapezoid over z2
        nodes, weights = np.polynomial.legendre.leggauss(64)
        z1q = nodes * REF.slit_width / 2.0
        z = np.linspace(-20e-3, 20e-3, 4001)
        want = sum(w * np.trapezoid(np.abs(state_at_slit(zq, z, REF)) ** 2, z)
                   for zq, w in zip(z1q, weights)) * REF.slit_width / 2.0
        assert got == pytest.approx(want, rel=1e-3)


class TestSlitIntegral:
    def test_narrow_slit_midpoint_limit(self):
        cfg = REF.replace(slit_width=1e-7)
        value = slit_integral(0.4e-3, 0.7e-3, cfg)
        midpoint = complex(slit_integrand(0.0, 0.4e-3, 0.7e-3, cfg)) * cfg.slit_width
        assert value == pytest.approx(midpoint, rel=1e-6)

    def test_tolerance_controls_refinement(self):
        loose = slit_integral(0.0, 1e-3, REF, QuadratureSpec(tolerance=1e-6))
        tight = slit_integral(0.0, 1e-3, REF, QuadratureSpec(tolerance=1e-12))
        assert loose == pytest.approx(tight, rel=1e-8)

    def test_nonconvergence_reports_iterates(self):
        cfg = REF.replace(slit_width=5e-3)
        spec = QuadratureSpec(start_order=4, max_order=8, tolerance=1e-14)
        with pytest.raises(ConvergenceError, match="iterates"):
            slit_integral(0.0, 1e-3, cfg, spec)

    def test_agrees_with_closed_form_for_narrow_slit(self):
        # the narrow-slit closed form becomes accurate once the quadratic
        # slit-phase terms are negligible
        cfg = REF.replace(slit_width=2e-5)
        z2s = np.linspace(-2.5e-3, 2.5e-3, 21)
        rels = []
        for z2 in z2s:
            quad = slit_integral(0.0, z2, cfg)
            closed = complex(final_amplitude(0.0, z2, cfg))
            rels.append(abs(quad - closed) / abs(quad))
        assert max(rels) < 1e-3

    def test_error_scaling_is_quadratic_in_slit_width(self):
        # relative deviation from the closed form drops ~4x per halving in
        # the asymptotic (narrow-slit) regime
        def rel_err(width):
            cfg = REF.replace(slit_width=width)
            quad = slit_integral(0.0, 2e-3, cfg)
            closed = complex(final_amplitude(0.0, 2e-3, cfg))
            return abs(quad - closed) / abs(quad)

        ratio = rel_err(1e-4) / rel_err(5e-5)
        assert 3.0 <= ratio <= 5.0

    def test_off_axis_supports_linearized_convention(self):
        z1, z2 = 0.5e-3, 0.5e-3
        quad = slit_integral(z1, z2, REF)
        rel = {conv: abs(quad - complex(final_amplitude(z1, z2, REF, convention=conv)))
               / abs(quad)
               for conv in ("published", "linearized")}
        assert rel["linearized"] < 0.1
        assert rel["published"] > 0.5
        assert rel["linearized"] < rel["published"]


class TestEndToEnd:
    def test_no_slit_variant_stays_normalized(self):
        spec = GridSpec(count=512, half_extent=15e-3)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            dens = end_to_end_density(spec, REF, with_slit=False)
        total = float(np.sum(dens.amplitudes) * dens.spacing1 * dens.spacing2)
        grid = sample_initial_state(REF, spec)
        assert total == pytest.approx(grid.norm() ** 2, rel=1e-9)

    def test_product_state_density_is_rank_one(self):
        cfg = REF.disentangled()
        spec = GridSpec(count=1024, half_extent=25e-3)
        dens = end_to_end_density(spec, cfg).amplitudes
        n = dens.shape[0] // 2
        i, k = n + 8, n + 40
        j, l = n - 12, n + 25
        lhs = dens[i, j] * dens[k, l]
        rhs = dens[i, l] * dens[k, j]
        assert lhs == pytest.approx(rhs, rel=1e-6)

    def test_slice_tracks_joint_density(self):
        spec = GridSpec(count=1024, half_extent=25e-3)
        dens = end_to_end_density(spec, REF)
        i0 = int(np.argmin(np.abs(dens.z1_axis)))
        window = np.abs(dens.z2_axis) <= 8e-3
        z2 = dens.z2_axis[window]
        got = dens.amplitudes[i0, window]
        want = joint_density(0.0, z2, REF)
        got = got / np.trapezoid(got, z2)
        want = want / np.trapezoid(want, z2)
        assert np.max(np.abs(got - want)) / np.max(want) < 5e-2

    def test_warns_when_extent_small(self):
        # 8 mm half extent is below 8x the ~1.6 mm pattern half width; the
        # same grid also violates the sampling rule, which raises afterwards
        spec = GridSpec(count=1024, half_extent=8e-3)
        with pytest.warns(UserWarning, match="extent"):
            with pytest.raises(ValidationError):
                end_to_end_density(spec, REF)
