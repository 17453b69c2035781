import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lgtime.qubit_dynamics import (
    CavityParams,
    DriveParams,
    ParameterError,
    TlsParams,
    UnphysicalRatesError,
    bloch_evolve,
    bloch_steady_state,
    cavity_filter,
    dispersive_phase_shift,
    fit_rabi_decay,
    measurement_dephasing_rate,
    saturation_population,
)

KAPPA = 2.0 * np.pi * 30.3e6
CHI = 2.0 * np.pi * 1.75e6


def default_tls(**kw):
    base = dict(omega_ge=2.0 * np.pi * 5.304e9, gamma1=1.0 / 200e-9)
    base.update(kw)
    return TlsParams(**base)


class TestFrozenValues:
    def test_cavity_filter_at_10mhz(self):
        assert cavity_filter(2.0 * np.pi * 10e6, KAPPA) == pytest.approx(
            0.69653, abs=1e-5
        )

    def test_measurement_dephasing_one_photon(self):
        assert measurement_dephasing_rate(1.0, CHI, KAPPA) == pytest.approx(
            5.0805e6, rel=1e-4
        )

    def test_dispersive_phase_shift(self):
        assert dispersive_phase_shift(CHI, KAPPA) == pytest.approx(
            0.23000, abs=1e-4
        )

    def test_saturation_population(self):
        val = saturation_population(0.02, 2.0 * np.pi * 10e6, 1.0 / 200e-9,
                                    1.0 / 150e-9, 0.0)
        assert val == pytest.approx(0.496, abs=1e-3)

    def test_steady_state_z(self):
        tls = default_tls()
        drive = DriveParams(omega_rabi=2.0 * np.pi * 10e6)
        z = bloch_steady_state(tls, drive, gamma2=1.0 / 150e-9)
        assert z == pytest.approx(-0.008373, abs=1e-5)


class TestValidation:
    def test_negative_gamma1_rejected(self):
        with pytest.raises(ParameterError):
            default_tls(gamma1=-1.0)

    def test_gamma2_below_half_gamma1_rejected(self):
        tls = default_tls()
        drive = DriveParams(omega_rabi=1e6)
        with pytest.raises(UnphysicalRatesError):
            bloch_evolve(tls, drive, 0.4 * tls.gamma1, z0=-1.0,
                         times=np.linspace(0.0, 1e-6, 10))

    def test_cavity_params_reject_negative_kappa(self):
        with pytest.raises(ParameterError):
            CavityParams(omega_c=1e9, kappa=-1.0, chi0=1e6)


class TestEvolution:
    def test_relaxes_to_steady_state(self):
        tls = default_tls()
        drive = DriveParams(omega_rabi=2.0 * np.pi * 10e6)
        g2 = 1.0 / 150e-9
        times = np.linspace(0.0, 5e-6, 400)
        traj = bloch_evolve(tls, drive, g2, z0=-1.0, times=times)
        assert traj.z[-1] == pytest.approx(
            bloch_steady_state(tls, drive, g2), abs=1e-4
        )

    def test_undriven_pure_t1_decay(self):
        tls = default_tls()
        drive = DriveParams(omega_rabi=0.0)
        times = np.linspace(0.0, 1e-6, 200)
        traj = bloch_evolve(tls, drive, tls.gamma1 / 2.0, z0=1.0, times=times)
        expect = -1.0 + 2.0 * np.exp(-tls.gamma1 * times)
        np.testing.assert_allclose(traj.z, expect, atol=1e-9)

    @settings(max_examples=30, deadline=None)
    @given(
        f_rabi=st.floats(1e5, 5e7),
        g2_ratio=st.floats(0.5, 50.0),
        z0=st.floats(-1.0, 1.0),
    )
    def test_bloch_vector_stays_physical(self, f_rabi, g2_ratio, z0):
        tls = default_tls()
        drive = DriveParams(omega_rabi=2.0 * np.pi * f_rabi)
        times = np.linspace(0.0, 2e-6, 100)
        traj = bloch_evolve(tls, drive, g2_ratio * tls.gamma1, z0=z0,
                            times=times)
        assert np.all(np.linalg.norm(traj.xyz, axis=1) <= 1.0 + 1e-9)


class TestFit:
    def test_round_trip_underdamped(self):
        tls = default_tls()
        g2 = 1.0 / 150e-9
        w_r = 2.0 * np.pi * 10e6
        times = np.arange(0.0, 2e-6, 2e-9)
        traj = bloch_evolve(tls, DriveParams(omega_rabi=w_r), g2, z0=-1.0,
                            times=times)
        g2_fit, w_fit = fit_rabi_decay(traj, tls)
        assert g2_fit == pytest.approx(g2, rel=1e-6)
        assert w_fit == pytest.approx(w_r, rel=1e-6)

    def test_round_trip_overdamped(self):
        tls = default_tls()
        w_r = 2.0 * np.pi * 2.5e6
        g2 = 3e7  # overdamped: g2 > omega_rabi
        times = np.arange(0.0, 4e-6, 4e-9)
        traj = bloch_evolve(tls, DriveParams(omega_rabi=w_r), g2, z0=-1.0,
                            times=times)
        g2_fit, w_fit = fit_rabi_decay(traj, tls, omega_guess=w_r,
                                       gamma2_guess=g2)
        assert g2_fit == pytest.approx(g2, rel=1e-3)
        assert w_fit == pytest.approx(w_r, rel=1e-3)


@settings(max_examples=50, deadline=None)
@given(f=st.floats(0.0, 1e9), kappa_hz=st.floats(1e6, 1e9))
def test_cavity_filter_bounded_and_monotone(f, kappa_hz):
    kappa = 2.0 * np.pi * kappa_hz
    c = cavity_filter(2.0 * np.pi * f, kappa)
    assert 0.0 < c <= 1.0
    assert cavity_filter(2.0 * np.pi * (f + 1e6), kappa) <= c + 1e-12
