import numpy as np
import pytest

from lgtime.lindblad_engine import (
    DensityOperator,
    HilbertConfig,
    IntegrationError,
    TruncationError,
    build_generator,
    default_setup,
    ensemble_rabi,
    evolve,
    fock_dim_for,
    numeric_rabi_spectrum,
    pointer_direction,
    simulate_deltaV,
    steady_state,
    two_time_correlator,
)
from lgtime.qubit_dynamics import (
    CavityParams,
    TlsParams,
    cavity_filter,
    dispersive_phase_shift,
    fit_rabi_decay,
    measurement_dephasing_rate,
)

KAPPA = 2.0 * np.pi * 30.3e6
CHI = 2.0 * np.pi * 1.75e6


def tls_params(**kw):
    base = dict(omega_ge=2.0 * np.pi * 5.304e9, gamma1=1.0 / 200e-9,
                gamma_phi0=1.0 / 810e-9)
    base.update(kw)
    return TlsParams(**base)


def cavity_params():
    return CavityParams(omega_c=2.0 * np.pi * 5.796e9, kappa=KAPPA, chi0=CHI,
                        lam=7e-3, n_crit=31.0)


class TestStructure:
    def test_fock_dim_rule(self):
        assert fock_dim_for(0.0) == 5
        assert fock_dim_for(3.9) == int(np.ceil(3.9 + 5 * np.sqrt(3.9) + 5))

    def test_truncation_rejected_when_too_small(self):
        with pytest.raises(TruncationError):
            hilbert = HilbertConfig(fock_dim=3)
            from lgtime.lindblad_engine import DriveAmplitudes

            build_generator(tls_params(), cavity_params(), hilbert,
                            DriveAmplitudes(eps_m=KAPPA * np.sqrt(5.0) / 2.0,
                                            eps_d=0.0))

    def test_density_operator_checks(self):
        with pytest.raises(IntegrationError):
            DensityOperator(np.array([[0.5, 0.5], [0.0, 0.5]]))

    def test_generator_traceless_action(self):
        hilbert, drives = default_setup(tls_params(), cavity_params(),
                                        nbar=0.5, omega_rabi=2.0 * np.pi * 5e6,
                                        fock_dim=10)
        gen = build_generator(tls_params(), cavity_params(), hilbert, drives)
        rho = steady_state(gen)
        assert abs(np.trace(gen.apply(rho.matrix))) < 1e-8


class TestPhysics:
    def test_undriven_t1_decay_exact(self):
        tls = tls_params(gamma_phi0=0.0)
        hilbert, drives = default_setup(tls, cavity_params(), nbar=0.0,
                                        omega_rabi=0.0, fock_dim=5)
        gen = build_generator(tls, cavity_params(), hilbert, drives)
        dim = 2 * 5
        rho0 = np.zeros((dim, dim), dtype=complex)
        rho0[5, 5] = 1.0  # excited qubit, cavity vacuum
        t_grid = np.linspace(0.0, 400e-9, 41)
        states = evolve(DensityOperator(rho0), gen, t_grid)
        p_e = np.array([np.real(np.trace(s.matrix[5:, 5:])) for s in states])
        np.testing.assert_allclose(p_e, np.exp(-tls.gamma1 * t_grid),
                                   rtol=1e-5, atol=1e-7)

    def test_dispersive_phase_matches_closed_form(self):
        _, phase = simulate_deltaV(
            tls_params(), cavity_params(),
            HilbertConfig(fock_dim=10), eps_m=KAPPA * np.sqrt(0.78) / 2.0)
        assert phase == pytest.approx(dispersive_phase_shift(CHI, KAPPA),
                                      rel=1e-3)

    def test_pointer_direction_finite(self):
        ang = pointer_direction(cavity_params(), HilbertConfig(fock_dim=10),
                                eps_m=KAPPA * np.sqrt(0.78) / 2.0)
        assert np.isfinite(ang)

    def test_ensemble_rabi_fit_near_formula(self):
        """Fitted decay of the simulated Rabi protocol tracks the
        cavity-filtered dephasing formula at low photon number."""
        tls, cavity = tls_params(), cavity_params()
        nbar, w_r = 0.23, 2.0 * np.pi * 5e6
        t_grid = np.arange(0.0, 2e-6, 4e-9)
        traj = ensemble_rabi(tls, cavity, nbar, w_r, t_grid)
        g2, w_fit = fit_rabi_decay(traj, tls, omega_guess=w_r)
        g2_formula = tls.gamma1 / 2.0 + (
            tls.gamma_phi0 + measurement_dephasing_rate(nbar, CHI, KAPPA)
        ) * cavity_filter(w_r, KAPPA)
        assert w_fit == pytest.approx(w_r, rel=0.02)
        assert g2 == pytest.approx(g2_formula, rel=0.15)

    def test_spectrum_quadrature_physical(self):
        """Regression-theorem spectrum is positive with weight near the
        Rabi peak."""
        tls, cavity = tls_params(), cavity_params()
        freqs = 2.0 * np.pi * np.linspace(0.0, 15e6, 61)
        record, diag = numeric_rabi_spectrum(tls, cavity, 0.23,
                                             2.0 * np.pi * 5e6, freqs)
        assert np.all(record.density > -1e-6)
        peak = freqs[np.argmax(record.density)]
        assert abs(peak - 2.0 * np.pi * 5e6) < 2.0 * np.pi * 1e6
        assert diag["nbar_measured"] == pytest.approx(0.23, rel=0.2)

    def test_two_time_correlator_starts_near_variance(self):
        tls, cavity = tls_params(), cavity_params()
        hilbert, drives = default_setup(tls, cavity, nbar=0.23,
                                        omega_rabi=2.0 * np.pi * 5e6)
        gen = build_generator(tls, cavity, hilbert, drives)
        rho = steady_state(gen)
        taus = np.linspace(0.0, 100e-9, 11)
        corr = two_time_correlator(rho, gen, taus)
        assert corr.values.shape == taus.shape
        assert np.all(np.isfinite(corr.values))
