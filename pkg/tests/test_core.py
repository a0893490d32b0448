"""Parameter handling, derived constants, and their exact invariants."""

import math

import numpy as np
import pytest

from ghostdiff import (PhysicalConfig, ScanSpec, ValidationError, derive_params,
                       parse_inverse_length, parse_length, uncertainties)

REF = PhysicalConfig()


class TestUnits:
    def test_length_suffixes(self):
        assert parse_length("702.2nm") == pytest.approx(702.2e-9, rel=1e-15)
        assert parse_length("0.4mm") == pytest.approx(0.4e-3, rel=1e-15)
        assert parse_length("1.5um") == pytest.approx(1.5e-6, rel=1e-15)
        assert parse_length("2cm") == pytest.approx(0.02, rel=1e-15)
        assert parse_length("0.6m") == 0.6
        assert parse_length(0.6) == 0.6
        assert parse_length("0.6") == 0.6

    def test_inverse_length_forms(self):
        assert parse_inverse_length("5.0/mm") == pytest.approx(5e3, rel=1e-15)
        assert parse_inverse_length("5.0mm^-1") == pytest.approx(5e3, rel=1e-15)
        assert parse_inverse_length("1/m") == 1.0
        assert parse_inverse_length(5e3) == 5e3

    def test_rejects_garbage(self):
        with pytest.raises(ValidationError):
            parse_length("fast")
        with pytest.raises(ValidationError):
            parse_length("3.0furlong")
        with pytest.raises(ValidationError):
            parse_inverse_length("5.0/furlong")


class TestConfig:
    def test_reference_values(self):
        assert REF.wavelength == 702.2e-9
        assert REF.slit_width == 0.4e-3
        assert REF.momentum_spread == 5.0e3
        assert REF.position_spread == 2.0e-3

    @pytest.mark.parametrize("field", ["wavelength", "slit_width", "momentum_spread",
                                       "position_spread", "slit_to_detector",
                                       "source_to_slit"])
    @pytest.mark.parametrize("bad", [0.0, -1.0, float("nan"), float("inf")])
    def test_rejects_nonpositive_and_nonfinite(self, field, bad):
        with pytest.raises(ValidationError, match=field):
            PhysicalConfig(**{field: bad})

    def test_from_mapping_with_units(self):
        cfg = PhysicalConfig.from_mapping({
            "wavelength": "702.2nm", "slit_width": "0.4mm",
            "momentum_spread": "5.0/mm", "position_spread": "2.0mm",
            "slit_to_detector": "0.6m", "source_to_slit": "0.6m"})
        assert cfg == REF

    def test_from_mapping_rejects_unknown_field(self):
        with pytest.raises(ValidationError, match="unknown"):
            PhysicalConfig.from_mapping({"wavelenght": "702.2nm"})

    def test_regime_flags(self):
        assert REF.entangled_regime          # pos*sig = 10 > 5
        assert REF.fresnel_regime            # slit/distance ~ 7e-4
        assert not REF.approximation_regime  # 2*lam*L/pi = 2.7e-7 < 100/sig^2 = 4e-6
        deep = REF.replace(momentum_spread=5e4)
        assert deep.approximation_regime

    def test_disentangled_factory(self):
        d = REF.disentangled()
        assert 2.0 * d.position_spread * d.momentum_spread == 1.0


class TestDerivedParams:
    def test_reference_constants(self):
        p = derive_params(REF)
        assert p.wavenumber == pytest.approx(8947857.173425784, rel=1e-12)
        assert p.effective_distance == pytest.approx(1.8, rel=1e-12)
        assert p.sum_width_sq == pytest.approx(1.6e-5 + 2.682206424939094e-7j, rel=1e-12)
        assert p.diff_width_sq == pytest.approx(4.0e-8 + 2.682206424939094e-7j, rel=1e-12)
        assert p.sum_width_sq.imag == p.diff_width_sq.imag
        assert p.is_entangled

    def test_envelope_and_coupling_definitions(self):
        p = derive_params(REF)
        combined = p.sum_width_sq + p.diff_width_sq
        env = (p.sum_width_sq * p.diff_width_sq / combined
               + 1j * REF.wavelength * REF.slit_to_detector / math.pi)
        assert p.detector_env_sq == pytest.approx(env, rel=1e-12)
        coupling = (p.sum_width_sq - p.diff_width_sq) / combined / env
        assert p.coupling == pytest.approx(coupling, rel=1e-9)
        assert p.detector_env_sq.real > 0

    def test_product_state_point_is_exact(self):
        p = derive_params(REF.disentangled())
        assert p.coupling == 0
        assert not p.is_entangled
        # at sigma = 5000 the width parameters agree exactly in floating point
        assert p.sum_width_sq == p.diff_width_sq

    @pytest.mark.parametrize("sig", [5e3, 7777.0, 123.456, 3.0])
    def test_product_state_point_any_sigma(self, sig):
        cfg = PhysicalConfig(momentum_spread=sig,
                             position_spread=1.0 / (2.0 * sig))
        p = derive_params(cfg)
        assert abs(p.coupling) <= 1e-18
        assert not p.is_entangled

    def test_scale_consistency(self):
        s = 3.7
        base = derive_params(REF)
        scaled = derive_params(PhysicalConfig(
            wavelength=REF.wavelength * s,
            slit_width=REF.slit_width * s,
            momentum_spread=REF.momentum_spread / s,
            position_spread=REF.position_spread * s,
            slit_to_detector=REF.slit_to_detector * s,
            source_to_slit=REF.source_to_slit * s))
        assert scaled.sum_width_sq == pytest.approx(base.sum_width_sq * s**2, rel=1e-12)
        assert scaled.diff_width_sq == pytest.approx(base.diff_width_sq * s**2, rel=1e-12)
        assert scaled.detector_env_sq == pytest.approx(base.detector_env_sq * s**2, rel=1e-12)
        assert scaled.coupling == pytest.approx(base.coupling / s**2, rel=1e-12)

    def test_deterministic(self):
        assert derive_params(REF) == derive_params(PhysicalConfig())


class TestUncertainties:
    def test_reference_values(self):
        dz, dk = uncertainties(REF)
        assert dz == pytest.approx(0.0020024984394500784, rel=1e-12)
        assert dk == pytest.approx(2503.123049312598, rel=1e-12)

    def test_large_momentum_spread_limit(self):
        dz, _ = uncertainties(REF.replace(momentum_spread=1e9))
        assert dz == pytest.approx(REF.position_spread, rel=1e-9)

    def test_minimum_uncertainty_product(self):
        dz, dk = uncertainties(REF.disentangled())
        assert dz * dk == pytest.approx(0.5, rel=1e-12)

    def test_product_bound_over_random_configs(self):
        rng = np.random.default_rng(20240517)
        for _ in range(300):
            sig = 10.0 ** rng.uniform(1, 6)
            pos = 10.0 ** rng.uniform(-6, -1)
            cfg = PhysicalConfig(momentum_spread=sig, position_spread=pos)
            dz, dk = uncertainties(cfg)
            product = dz * dk
            assert product >= 0.5 * (1.0 - 1e-12)
            # equality only at the product-state point
            if abs(2.0 * pos * sig - 1.0) > 1e-3:
                assert product > 0.5 * (1.0 + 1e-7)


class TestScanSpec:
    def test_positions_inclusive_uniform(self):
        scan = ScanSpec(-1e-3, 1e-3, 5)
        pos = scan.positions()
        assert pos[0] == -1e-3 and pos[-1] == 1e-3
        assert np.allclose(np.diff(pos), 5e-4)

    def test_parse_with_units(self):
        scan = ScanSpec.parse("-10mm,10mm,401")
        assert scan.start == pytest.approx(-0.01)
        assert scan.stop == pytest.approx(0.01)
        assert scan.count == 401

    @pytest.mark.parametrize("bad", [
        {"start": 1.0, "stop": 0.0, "count": 5},
        {"start": 0.0, "stop": 1.0, "count": 1},
        {"start": float("nan"), "stop": 1.0, "count": 5},
    ])
    def test_invalid(self, bad):
        with pytest.raises(ValidationError):
            ScanSpec(**bad)
