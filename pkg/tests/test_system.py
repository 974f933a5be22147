"""Parameter container, unit conversion, and derived scalars."""

import math
from fractions import Fraction

import pytest

from qndsim.constants import HBAR, K_B, TWO_PI
from qndsim.system import (
    CONFIG_KEYS,
    SystemParams,
    cooperativities,
    params_from_mapping,
    temperature_for_occupancy,
    thermal_occupancy,
    zero_point_amplitude,
)

from conftest import REF_KW, make_ref


class TestThermalOccupancy:
    def test_two_ghz_at_sixty_millikelvin(self):
        # CODATA route computed externally: 1/expm1(hbar*w/(kB*0.060))
        n = thermal_occupancy(TWO_PI * 2e9, 0.060)
        assert n == pytest.approx(0.2530503391370289, rel=1e-12)
        # the value the docs round to
        assert abs(n - 0.25) / 0.25 < 0.02

    def test_occupancy_one_at_log_two_temperature(self):
        # hbar*w/kB*T = ln 2 makes expm1 exactly 1
        w = TWO_PI * 2e9
        t = HBAR * w / (K_B * math.log(2.0))
        assert thermal_occupancy(w, t) == pytest.approx(1.0, rel=1e-12)
        assert t == pytest.approx(0.13847688363932312, rel=1e-12)

    def test_round_trip(self):
        w = TWO_PI * 2e9
        for nbar in (1e-6, 0.25, 1.0, 17.5, 4000.0):
            t = temperature_for_occupancy(w, nbar)
            assert thermal_occupancy(w, t) == pytest.approx(nbar, rel=1e-12)

    def test_deep_quantum_regime_underflows_to_zero(self):
        assert thermal_occupancy(TWO_PI * 2e9, 1e-6) == 0.0

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            thermal_occupancy(TWO_PI * 2e9, 0.0)
        with pytest.raises(ValueError):
            thermal_occupancy(TWO_PI * 2e9, -1.0)
        with pytest.raises(ValueError):
            thermal_occupancy(-1.0, 0.1)
        with pytest.raises(ValueError):
            temperature_for_occupancy(TWO_PI * 2e9, 0.0)


class TestFromFrequencies:
    def test_radian_conversion(self, ref_params):
        assert ref_params.omega_m == pytest.approx(TWO_PI * 2e9, rel=1e-15)
        assert ref_params.kappa == pytest.approx(TWO_PI * 5e8, rel=1e-15)
        assert ref_params.g1 == pytest.approx(TWO_PI * 5e4, rel=1e-15)
        assert ref_params.delta == 0.0

    def test_kappa_e_defaults_to_half(self, ref_params):
        assert ref_params.kappa_e == pytest.approx(ref_params.kappa / 2)
        p = make_ref(kappa_e_hz=1e8)
        assert p.kappa_e == pytest.approx(TWO_PI * 1e8, rel=1e-15)

    def test_temperature_route_matches_occupancy_route(self):
        t = temperature_for_occupancy(TWO_PI * 2e9, 0.25)
        kw = dict(REF_KW)
        del kw["nbar_th"]
        p = SystemParams.from_frequencies(temperature_k=t, **kw)
        assert p.nbar_th == pytest.approx(0.25, rel=1e-12)

    def test_exactly_one_bath_spec(self):
        kw = dict(REF_KW)
        del kw["nbar_th"]
        with pytest.raises(ValueError, match="temperature_k or nbar_th"):
            SystemParams.from_frequencies(**kw)
        with pytest.raises(ValueError, match="temperature_k or nbar_th"):
            SystemParams.from_frequencies(nbar_th=0.25, temperature_k=0.06, **kw)

    def test_power_to_photon_number(self):
        # resonant critically coupled drive: nbar = 2 P / (hbar w_d kappa),
        # so 20.13 nW of 193.4 THz light sustains 100 photons
        kw = dict(REF_KW)
        del kw["nbar_photon"]
        p = SystemParams.from_frequencies(
            power_w=2.012947166633207e-08, omega_d_hz=193.4e12, **kw
        )
        assert p.nbar_photon == pytest.approx(100.0, rel=1e-12)

    def test_detuned_drive_is_lorentzian_suppressed(self):
        kw = dict(REF_KW)
        del kw["nbar_photon"]
        kw["delta_hz"] = 250e6  # half a linewidth
        p = SystemParams.from_frequencies(
            power_w=2.012947166633207e-08, omega_d_hz=193.4e12, **kw
        )
        assert p.nbar_photon == pytest.approx(50.0, rel=1e-12)

    def test_exactly_one_drive_spec(self):
        kw = dict(REF_KW)
        del kw["nbar_photon"]
        with pytest.raises(ValueError, match="nbar_photon or power_w"):
            SystemParams.from_frequencies(**kw)
        with pytest.raises(ValueError, match="nbar_photon or power_w"):
            SystemParams.from_frequencies(
                nbar_photon=100.0, power_w=1e-9, omega_d_hz=193.4e12, **kw
            )
        # power needs the drive frequency to convert to photon flux
        with pytest.raises(ValueError, match="omega_d_hz"):
            SystemParams.from_frequencies(power_w=1e-9, **kw)

    def test_rejects_nonpositive_scales(self):
        with pytest.raises(ValueError):
            make_ref(omega_m_hz=0.0)
        with pytest.raises(ValueError):
            make_ref(kappa_hz=-1.0)
        with pytest.raises(ValueError):
            make_ref(gamma_m_hz=-1e3)
        with pytest.raises(ValueError):
            make_ref(nbar_th=-0.1)
        with pytest.raises(ValueError):
            make_ref(nbar_photon=-1.0)


class TestDerivedScalars:
    def test_cooperativities_exact(self, ref_params):
        c = cooperativities(ref_params)
        # 4*100*(5e4)^2/(5e8*1e3) and its g2 counterpart are exact dyadics
        assert c.c1 == 2.0
        assert c.c2 == 8.0
        assert c.q2 == 32.0

    def test_cooperativities_scale_with_photon_number(self):
        c = cooperativities(make_ref(nbar_photon=1.0))
        assert c.c1 == pytest.approx(0.02, rel=1e-12)
        assert c.c2 == pytest.approx(0.08, rel=1e-12)

    def test_quantum_cooperativity_needs_thermal_phonons(self):
        c = cooperativities(make_ref(nbar_th=0.0))
        assert math.isinf(c.q2)

    def test_zero_point_amplitude(self):
        p = make_ref(mass_kg=1e-15)
        assert zero_point_amplitude(p) == pytest.approx(
            2.0484159588801214e-15, rel=1e-12
        )

    def test_zero_point_amplitude_needs_mass(self, ref_params):
        with pytest.raises(ValueError, match="mass"):
            zero_point_amplitude(ref_params)

    def test_hz_fraction_is_exact(self, ref_params):
        assert ref_params.hz_fraction("omega_m") == Fraction(2000000000)
        assert ref_params.hz_fraction("nbar_th") == Fraction(1, 4)
        with pytest.raises(AttributeError):
            ref_params.hz_fraction("not_a_key")


class TestMappingLoader:
    def test_round_trip(self):
        p = params_from_mapping(dict(REF_KW))
        q = make_ref()
        assert p.omega_m == q.omega_m
        assert p.nbar_photon == q.nbar_photon

    def test_unknown_key_is_named(self):
        bad = dict(REF_KW, typo_key=1.0)
        with pytest.raises(ValueError, match="typo_key"):
            params_from_mapping(bad)

    def test_missing_required_key(self):
        bad = dict(REF_KW)
        del bad["kappa_hz"]
        with pytest.raises(ValueError, match="kappa_hz"):
            params_from_mapping(bad)

    def test_bool_is_not_a_number(self):
        bad = dict(REF_KW, delta_hz=True)
        with pytest.raises(ValueError, match="delta_hz"):
            params_from_mapping(bad)

    def test_non_numeric_rejected(self):
        bad = dict(REF_KW, g1_hz="fifty kilohertz")
        with pytest.raises(ValueError, match="g1_hz"):
            params_from_mapping(bad)

    def test_config_keys_frozen(self):
        assert CONFIG_KEYS == (
            "omega_m_hz",
            "gamma_m_hz",
            "kappa_hz",
            "kappa_e_hz",
            "delta_hz",
            "g1_hz",
            "g2_hz",
            "temperature_k",
            "nbar_th",
            "nbar_photon",
            "power_w",
            "omega_d_hz",
            "mass_kg",
        )
