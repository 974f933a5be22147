"""Shared fixtures: the reference configuration used throughout the docs.

A 2 GHz mechanical mode (Q = 2e6, 0.25 thermal phonons) dispersively
read out by a 500 MHz-linewidth cavity driven on resonance with 100
photons; g1/2pi = 50 kHz, g2/2pi = 100 kHz.
"""

import pytest

from qndsim.system import SystemParams

REF_KW = dict(
    omega_m_hz=2e9,
    gamma_m_hz=1e3,
    kappa_hz=500e6,
    delta_hz=0.0,
    g1_hz=50e3,
    g2_hz=100e3,
    nbar_th=0.25,
    nbar_photon=100.0,
)


def make_ref(**overrides) -> SystemParams:
    kw = dict(REF_KW)
    kw.update(overrides)
    return SystemParams.from_frequencies(**kw)


@pytest.fixture(scope="session")
def ref_params() -> SystemParams:
    return make_ref()
