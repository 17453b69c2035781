"""Truncated TLS x Fock master-equation oracle.

Independent numerical reference for the analytic theory: a dispersive
Jaynes-Cummings-style generator with cavity decay, qubit relaxation, and
intrinsic dephasing.  Measurement-induced dephasing is *not* put in by hand -
it emerges from the chi * a'a * sigma_z coupling, which is the whole point of
using this engine as an oracle.

Basis ordering: TLS index major with |g> first, so
sigma_z = diag(-1, +1) (x) I_fock.  Both drives are treated in their
co-rotating frames; the qubit drive sits on the Stark-shifted line and the
cavity drive on the bare cavity resonance (see default_setup).
"""

import warnings
from dataclasses import dataclass
from math import lgamma

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .analytic_spectrum import CorrelatorSeries, SPIN_UNITS, SpectrumRecord
from .qubit_dynamics import ParameterError, SpinTrajectory


class TruncationError(ParameterError):
    """Fock truncation grossly insufficient for the requested photon number."""


class IntegrationError(RuntimeError):
    """State invariants broke during propagation."""


class DegenerateSteadyStateError(RuntimeError):
    """The generator's null space is not one-dimensional."""


def fock_dim_for(nbar):
    """Truncation rule: ceil(nbar + 5*sqrt(nbar) + 5)."""
    return int(np.ceil(nbar + 5.0 * np.sqrt(nbar) + 5.0))


@dataclass(frozen=True)
class HilbertConfig:
    """Truncation and rotating-frame detunings.

    fock_dim : photon-number cutoff (>= 2)
    delta_qubit : omega_ge - omega_d (rad/s)
    delta_cavity : omega_c - omega_m (rad/s)
    """

    fock_dim: int
    delta_qubit: float = 0.0
    delta_cavity: float = 0.0

    def __post_init__(self):
        if self.fock_dim < 2:
            raise ParameterError("fock_dim must be >= 2")


@dataclass(frozen=True)
class DriveAmplitudes:
    """Cavity and qubit drive amplitudes (rad/s), both >= 0."""

    eps_m: float
    eps_d: float

    def __post_init__(self):
        if self.eps_m < 0 or self.eps_d < 0:
            raise ParameterError("drive amplitudes must be >= 0")


class DensityOperator:
    """Validated density matrix on the TLS x Fock space."""

    def __init__(self, matrix, check=True):
        self.matrix = np.asarray(matrix, dtype=complex)
        if check:
            self.check()

    def check(self, herm_tol=1e-10, trace_tol=1e-8, eig_floor=-1e-8):
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ParameterError("density matrix must be square")
        scale = max(np.abs(m).max(), 1e-300)
        if np.abs(m - m.conj().T).max() > herm_tol * scale:
            raise IntegrationError("density matrix not Hermitian within tolerance")
        if abs(np.trace(m).real - 1.0) > trace_tol:
            raise IntegrationError(
                f"trace deviates from 1 by {abs(np.trace(m).real-1.0):.2e}"
            )
        if np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min() < eig_floor:
            raise IntegrationError("negative eigenvalue beyond floor")
        return self

    @classmethod
    def from_ket(cls, psi):
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))


def coherent_amplitudes(n):
    """Unnormalized-stable coherent-state coefficient helper: returns the
    array exp(-0.5*lgamma(k+1)) for k < n (multiplied by alpha**k later)."""
    return np.exp(-0.5 * np.array([lgamma(k + 1.0) for k in range(n)]))


class LindbladGenerator:
    """Dispersive-readout Lindblad generator.

    H = (delta_qubit/2) sz + delta_cavity a'a + chi a'a sz
        + eps_m (a + a') + eps_d (sm + sp)
    dissipators: kappa D[a] + gamma1 D[sm] + (gamma_phi/2) D[sz],
    with D[A]r = A r A' - (A'A r + r A'A)/2.

    The sign of the qubit detuning term is fixed so that driving at the
    Stark-shifted frequency (delta_qubit = -2 chi n_g) cancels the mean
    Stark term: (delta_qubit/2) sz + chi a'a sz = chi (a'a - n_g) sz.
    """

    def __init__(self, tls, cavity, hilbert, drives):
        n = hilbert.fock_dim
        self.fock_dim = n
        self.dim = 2 * n
        self.kappa = cavity.kappa
        self.gamma1 = tls.gamma1
        self.gamma_phi = tls.gamma_phi0
        self.chi = cavity.chi0
        self.hilbert = hilbert
        self.drives = drives

        a_f = np.diag(np.sqrt(np.arange(1.0, n)), 1)
        eye_f = np.eye(n)
        self.a = np.kron(np.eye(2), a_f)
        self.ad = self.a.conj().T
        self.sz = np.kron(np.diag([-1.0, 1.0]), eye_f)
        self.sm = np.kron(np.array([[0.0, 1.0], [0.0, 0.0]]), eye_f)
        self.sp = self.sm.T.copy()
        num = self.ad @ self.a

        h = (
            0.5 * hilbert.delta_qubit * self.sz
            + hilbert.delta_cavity * num
            + self.chi * num @ self.sz
            + drives.eps_m * (self.a + self.ad)
            + drives.eps_d * (self.sm + self.sp)
        )
        self.h_matrix = h
        self._a_eff = (
            -1j * h
            - 0.5
            * (
                self.kappa * num
                + self.gamma1 * self.sp @ self.sm
                + 0.5 * self.gamma_phi * np.eye(self.dim)
            )
        )
        self._h_norm = float(np.abs(np.linalg.eigvalsh(h)).max())

    def apply(self, x):
        """Action of the generator on an operator (matrix-free RHS)."""
        out = self._a_eff @ x + x @ self._a_eff.conj().T
        out += self.kappa * (self.a @ x @ self.ad)
        out += self.gamma1 * (self.sm @ x @ self.sp)
        out += 0.5 * self.gamma_phi * (self.sz @ x @ self.sz)
        return out

    def sparse(self):
        """Sparse superoperator on row-major vectorized operators."""
        def k(left, right):
            return sp.kron(sp.csr_matrix(left), sp.csr_matrix(right.T), format="csr")

        d = self.dim
        eye = np.eye(d)
        a_eff = self._a_eff
        lio = k(a_eff, eye) + k(eye, a_eff.conj().T)
        lio = lio + self.kappa * k(self.a, self.ad)
        lio = lio + self.gamma1 * k(self.sm, self.sp)
        lio = lio + 0.5 * self.gamma_phi * k(self.sz, self.sz)
        return lio.tocsr()

    def dense(self):
        """Dense superoperator; guarded to modest Hilbert sizes."""
        if self.fock_dim > 16:
            raise ParameterError("dense superoperator restricted to fock_dim <= 16")
        return self.sparse().toarray()

    def max_step(self):
        """Fixed RK4 step: min(2pi/(2*||H||), 1/kappa, 1/gamma1) / 40."""
        limits = [np.pi / max(self._h_norm, 1e-300), 1.0 / self.kappa]
        if self.gamma1 > 0:
            limits.append(1.0 / self.gamma1)
        return min(limits) / 40.0


def build_generator(tls, cavity, hilbert, drives):
    """Construct the generator, checking the Fock truncation against the
    photon number implied by the cavity drive."""
    nbar_est = (2.0 * drives.eps_m / cavity.kappa) ** 2
    needed = fock_dim_for(nbar_est)
    if hilbert.fock_dim < nbar_est + 2.0 * np.sqrt(nbar_est) + 2.0:
        raise TruncationError(
            f"fock_dim={hilbert.fock_dim} grossly insufficient for nbar~{nbar_est:.2f}"
        )
    if hilbert.fock_dim < needed:
        warnings.warn(
            f"fock_dim={hilbert.fock_dim} below the truncation rule ({needed}) "
            f"for nbar~{nbar_est:.2f}",
            stacklevel=2,
        )
    return LindbladGenerator(tls, cavity, hilbert, drives)


def default_setup(tls, cavity, nbar, omega_rabi, fock_dim=None):
    """Standard frame for the measurement experiment.

    Cavity driven on its bare resonance with eps_m = kappa*sqrt(nbar)/2; the
    qubit drive (eps_d = omega_rabi/2) sits on the Stark-shifted line, i.e.
    delta_qubit = -2 chi n_g with n_g the g-state intra-cavity photon number.
    """
    chi = cavity.chi0
    eps_m = cavity.kappa * np.sqrt(nbar) / 2.0
    n_g = eps_m ** 2 / (chi ** 2 + cavity.kappa ** 2 / 4.0)
    hilbert = HilbertConfig(
        fock_dim=fock_dim if fock_dim is not None else fock_dim_for(nbar),
        delta_qubit=-2.0 * chi * n_g,
        delta_cavity=0.0,
    )
    drives = DriveAmplitudes(eps_m=eps_m, eps_d=omega_rabi / 2.0)
    return hilbert, drives


def _rk4(gen, x, h, n_steps):
    for _ in range(n_steps):
        k1 = gen.apply(x)
        k2 = gen.apply(x + 0.5 * h * k1)
        k3 = gen.apply(x + 0.5 * h * k2)
        k4 = gen.apply(x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return x


def _propagate(gen, x0, t_grid, observe):
    """Fixed-step RK4 propagation, calling observe(x) at each grid time."""
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) <= 0):
        raise ParameterError("time grid must be strictly increasing")
    h_max = gen.max_step()
    x = x0
    out = [observe(x)]
    prev = t_grid[0]
    for t in t_grid[1:]:
        span = t - prev
        n_steps = max(1, int(np.ceil(span / h_max)))
        x = _rk4(gen, x, span / n_steps, n_steps)
        out.append(observe(x))
        prev = t
    return out, x


def evolve(rho0, gen, t_grid, check=True):
    """Master-equation trajectory; returns a DensityOperator per grid time."""
    mat0 = rho0.matrix if isinstance(rho0, DensityOperator) else np.asarray(rho0)
    try:
        states, _ = _propagate(gen, mat0.astype(complex), t_grid,
                               lambda x: DensityOperator(x.copy(), check=False))
        if check:
            states[-1].check()
    except IntegrationError as err:
        raise IntegrationError(
            f"{err}; consider a smaller step than {gen.max_step():.3e} s"
        ) from err
    return states


def steady_state(gen):
    """Unique trace-one null vector of the generator (sparse LU solve with a
    trace-constraint row)."""
    d = gen.dim
    lio = gen.sparse().tolil()
    trace_row = np.zeros(d * d)
    trace_row[:: d + 1] = 1.0
    lio[0, :] = trace_row
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0
    try:
        vec = spla.spsolve(lio.tocsc(), rhs)
    except Exception as err:  # singular system
        raise DegenerateSteadyStateError(str(err)) from err
    rho = vec.reshape(d, d)
    rho = 0.5 * (rho + rho.conj().T)
    residual = np.abs(gen.apply(rho)).max()
    scale = max(gen.kappa, gen.gamma1, gen._h_norm)
    if not np.isfinite(residual) or residual > 1e-6 * scale:
        raise DegenerateSteadyStateError(
            f"null-space solve residual too large ({residual:.2e})"
        )
    return DensityOperator(rho)


def two_time_correlator(steady, gen, tau_grid):
    """Detector-field correlator K'(tau) = kappa*(Re tr[a' X(tau)] - |<a>|^2)
    with X(0) = a rho_ss, by the quantum regression theorem.  The mean-field
    part is subtracted so K'(tau -> inf) -> 0."""
    rho = steady.matrix
    a_mean2 = abs(np.trace(gen.a @ rho)) ** 2

    def observe(x):
        return gen.kappa * (np.trace(gen.ad @ x).real - a_mean2)

    values, _ = _propagate(gen, gen.a @ rho, tau_grid, observe)
    return CorrelatorSeries(
        np.asarray(tau_grid, dtype=float),
        np.asarray(values),
        meta={"units": "field", "kappa": gen.kappa},
    )


def _pinned_cavity_mean(cavity, hilbert, eps_m, sz_value):
    """Steady <a> of the cavity alone with the qubit frozen in g or e."""
    n = hilbert.fock_dim
    a_f = np.diag(np.sqrt(np.arange(1.0, n)), 1)
    num = a_f.conj().T @ a_f
    h = (hilbert.delta_cavity + cavity.chi0 * sz_value) * num + eps_m * (
        a_f + a_f.conj().T
    )
    a_eff = -1j * h - 0.5 * cavity.kappa * num

    def k(left, right):
        return sp.kron(sp.csr_matrix(left), sp.csr_matrix(right.T), format="csr")

    lio = k(a_eff, np.eye(n)) + k(np.eye(n), a_eff.conj().T)
    lio = (lio + cavity.kappa * k(a_f, a_f.conj().T)).tolil()
    trace_row = np.zeros(n * n)
    trace_row[:: n + 1] = 1.0
    lio[0, :] = trace_row
    rhs = np.zeros(n * n, dtype=complex)
    rhs[0] = 1.0
    rho = spla.spsolve(lio.tocsc(), rhs).reshape(n, n)
    return complex(np.trace(a_f @ rho)), rho


def simulate_deltaV(tls, cavity, hilbert, eps_m):
    """Measurement contrast from the pointer states.

    Returns (delta_v, phase): delta_v = 2|<a>_g - <a>_e| in normalized field
    units, and the phase angle between the two pointer amplitudes (which
    matches 2*arctan(2 chi/kappa) up to truncation error)."""
    a_g, _ = _pinned_cavity_mean(cavity, hilbert, eps_m, -1.0)
    a_e, _ = _pinned_cavity_mean(cavity, hilbert, eps_m, +1.0)
    delta_v = 2.0 * abs(a_g - a_e)
    phase = np.angle(a_g) - np.angle(a_e)
    phase = abs((phase + np.pi) % (2.0 * np.pi) - np.pi)
    return delta_v, phase


def dispersive_correction(chi0, lam, nbar):
    """Photon-number-corrected dispersive shift chi0*(1 - lam*nbar); the same
    factor rescales the output contrast deltaV."""
    if lam * nbar >= 1.0:
        raise ParameterError("lambda*nbar >= 1: outside the dispersive validity range")
    return chi0 * (1.0 - lam * nbar)


def pointer_direction(cavity, hilbert, eps_m):
    """Angle of <a>_g - <a>_e in the quadrature plane (I/Q split of the spin
    signal in the detector model)."""
    a_g, _ = _pinned_cavity_mean(cavity, hilbert, eps_m, -1.0)
    a_e, _ = _pinned_cavity_mean(cavity, hilbert, eps_m, +1.0)
    return float(np.angle(a_g - a_e))


def ensemble_rabi(tls, cavity, nbar, omega_rabi, t_grid, fock_dim=None):
    """Ensemble-averaged Rabi trajectory under continuous measurement.

    Initial state: qubit in g, cavity in the coherent state it relaxes to
    with the qubit frozen in g (the experiment's situation just before the
    Rabi drive turns on).  Returns the Bloch components versus time.
    """
    hilbert, drives = default_setup(tls, cavity, nbar, omega_rabi, fock_dim)
    gen = build_generator(tls, cavity, hilbert, drives)
    n = hilbert.fock_dim

    if nbar > 0:
        alpha, _ = _pinned_cavity_mean(cavity, hilbert, drives.eps_m, -1.0)
    else:
        alpha = 0.0
    coeff = coherent_amplitudes(n) * (alpha ** np.arange(n) if alpha != 0 else
                                      np.eye(n)[0])
    psi = np.zeros(2 * n, dtype=complex)
    psi[:n] = coeff  # g block first
    rho0 = DensityOperator.from_ket(psi)

    sx = np.kron(np.array([[0.0, 1.0], [1.0, 0.0]]), np.eye(n))
    sy = np.kron(np.array([[0.0, -1j], [1j, 0.0]]), np.eye(n))

    def observe(x):
        return (
            np.trace(sx @ x).real,
            np.trace(sy @ x).real,
            np.trace(gen.sz @ x).real,
        )

    vals, _ = _propagate(gen, rho0.matrix, t_grid, observe)
    return SpinTrajectory(np.asarray(t_grid, dtype=float), np.asarray(vals))


def numeric_rabi_spectrum(tls, cavity, nbar, omega_rabi, freqs,
                          fock_dim=None, dtau=2e-9, tau_max=None):
    """Detector spectrum in spin units via the regression correlator.

    Computes K'(tau) from the driven steady state, converts to spin units by
    the pointer-state contrast (conversion kappa*|<a>_g - <a>_e|^2 / 4, the
    analog of the experiment's (deltaV/2)^2 calibration, with the unknown
    amplifier gain cancelling), and cosine-transforms onto `freqs` (rad/s).

    Returns (SpectrumRecord, diagnostics dict).
    """
    hilbert, drives = default_setup(tls, cavity, nbar, omega_rabi, fock_dim)
    gen = build_generator(tls, cavity, hilbert, drives)
    rho_ss = steady_state(gen)
    nbar_meas = float(np.trace(gen.ad @ gen.a @ rho_ss.matrix).real)

    a_g, _ = _pinned_cavity_mean(cavity, hilbert, drives.eps_m, -1.0)
    a_e, _ = _pinned_cavity_mean(cavity, hilbert, drives.eps_m, +1.0)
    conv = cavity.kappa * abs(a_g - a_e) ** 2 / 4.0

    if tau_max is None:
        g_phi = tls.gamma_phi0 + 8.0 * nbar * cavity.chi0 ** 2 / cavity.kappa
        g_slow = 0.5 * (tls.gamma1 + tls.gamma1 / 2.0 + g_phi)
        tau_max = min(6e-6, max(8.0 / g_slow, 1.5e-6))
    taus = np.arange(0.0, tau_max, dtau)
    corr = two_time_correlator(rho_ss, gen, taus)

    k = corr.values
    freqs = np.asarray(freqs, dtype=float)
    cosines = np.cos(freqs[:, None] * taus[None, 1:])
    density = (k[0] + 2.0 * (cosines * k[None, 1:]).sum(axis=1)) * dtau / conv
    record = SpectrumRecord(
        freqs,
        density,
        units=SPIN_UNITS,
        one_sided=True,
        meta={
            "nbar_requested": nbar,
            "nbar_measured": nbar_meas,
            "omega_rabi": omega_rabi,
            "fock_dim": hilbert.fock_dim,
            "conversion": conv,
        },
    )
    diag = {
        "nbar_measured": nbar_meas,
        "conversion": conv,
        "correlator": corr,
        "generator": gen,
    }
    return record, diag
