"""Closed-form Bloch-equation layer for a driven, damped two-level system.

Rates, the cavity bandwidth filter, steady states, and damped Rabi
trajectories (Torrey solutions).  Everything here is analytic or a direct
eigendecomposition of the 3x3 Bloch drift matrix; the functions double as
physics and as fit models for the numerical engine.

Internally all frequencies and rates are angular (rad/s or 1/s); conversion
from Hz/ns happens at the CLI boundary only.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares


class ParameterError(ValueError):
    """A physical parameter is outside its valid domain."""


class UnphysicalRatesError(ParameterError):
    """Rate combination violating gamma2 >= gamma1/2."""


class SingularParameterError(ParameterError):
    """Closed form undefined for this parameter combination."""


class FitError(RuntimeError):
    """Nonlinear fit failed to converge; message carries the residual."""


@dataclass(frozen=True)
class TlsParams:
    """Two-level-system constants.

    omega_ge : transition angular frequency (rad/s)
    gamma1 : energy relaxation rate (1/s)
    gamma_phi0 : intrinsic pure dephasing rate (1/s)
    p_e_thermal : residual excited-state population in [0, 0.5]
    """

    omega_ge: float
    gamma1: float
    gamma_phi0: float = 0.0
    p_e_thermal: float = 0.0

    def __post_init__(self):
        if self.gamma1 < 0 or self.gamma_phi0 < 0:
            raise ParameterError("rates must be >= 0")
        if not 0.0 <= self.p_e_thermal <= 0.5:
            raise ParameterError("p_e_thermal must lie in [0, 0.5]")


@dataclass(frozen=True)
class CavityParams:
    """Readout resonator constants.

    omega_c : cavity angular frequency (rad/s)
    kappa : cavity linewidth (rad/s)
    chi0 : dispersive shift at zero photons (rad/s, signed)
    lam : dispersive-correction coefficient (dimensionless)
    n_crit : critical photon number bounding the dispersive approximation
    """

    omega_c: float
    kappa: float
    chi0: float
    lam: float = 0.0
    n_crit: float = np.inf

    def __post_init__(self):
        if self.kappa <= 0:
            raise ParameterError("kappa must be > 0")
        if not 0.0 <= self.lam < 1.0:
            raise ParameterError("lambda must lie in [0, 1)")
        if self.n_crit <= 0:
            raise ParameterError("n_crit must be > 0")


@dataclass(frozen=True)
class DriveParams:
    """Drive settings: Rabi angular frequency, residual detuning, and mean
    measurement photon number."""

    omega_rabi: float
    detuning: float = 0.0
    nbar: float = 0.0

    def __post_init__(self):
        if self.omega_rabi < 0:
            raise ParameterError("omega_rabi must be >= 0")
        if self.nbar < 0:
            raise ParameterError("nbar must be >= 0")


@dataclass
class SpinTrajectory:
    """Ensemble-averaged Bloch vector samples.

    times : seconds, strictly increasing
    xyz : (len(times), 3) array of Bloch components
    """

    times: np.ndarray
    xyz: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.xyz = np.asarray(self.xyz, dtype=float)
        if self.times.ndim != 1 or np.any(np.diff(self.times) <= 0):
            raise ParameterError("times must be strictly increasing")
        if self.xyz.shape != (self.times.size, 3):
            raise ParameterError("xyz must be (n_times, 3)")

    @property
    def z(self):
        return self.xyz[:, 2]


def cavity_filter(omega, kappa):
    """Lorentzian detector bandwidth filter 1 / (1 + (2*omega/kappa)**2).

    Even in omega, equals 1 at omega=0 and 1/2 at omega=kappa/2.
    """
    if kappa <= 0:
        raise ParameterError("kappa must be > 0")
    omega = np.asarray(omega, dtype=float)
    out = 1.0 / (1.0 + (2.0 * omega / kappa) ** 2)
    return out if out.ndim else float(out)


def measurement_dephasing_rate(nbar, chi, kappa):
    """Pure dephasing induced by photon shot noise: 8*nbar*chi**2/kappa."""
    if kappa <= 0:
        raise ParameterError("kappa must be > 0")
    if nbar < 0:
        raise ParameterError("nbar must be >= 0")
    return 8.0 * nbar * chi ** 2 / kappa


def rabi_dephasing_rate(omega_rabi, nbar, chi, kappa):
    """Measurement dephasing as seen at the Rabi sideband: the shot-noise
    rate filtered by the cavity bandwidth at omega_rabi."""
    return measurement_dephasing_rate(nbar, chi, kappa) * cavity_filter(
        omega_rabi, kappa
    )


def dispersive_phase_shift(chi, kappa):
    """Phase separation 2*arctan(2*chi/kappa) between the reflected-field
    pointer states of the two qubit states."""
    if kappa <= 0:
        raise ParameterError("kappa must be > 0")
    return 2.0 * np.arctan(2.0 * chi / kappa)


def bloch_steady_state(tls, drive, gamma2):
    """Saturation value of <sigma_z> under resonant drive:
    z_st = -1 / (1 + omega_rabi**2 / (gamma1 * gamma2))."""
    w = drive.omega_rabi
    if w > 0 and (tls.gamma1 <= 0 or gamma2 <= 0):
        raise SingularParameterError(
            "z_st undefined for zero relaxation with finite drive"
        )
    if w == 0:
        return -1.0
    return -1.0 / (1.0 + w ** 2 / (tls.gamma1 * gamma2))


def saturation_population(p0, omega_rabi, gamma1, gamma2, detuning):
    """Steady-state excited population of the driven TLS with residual
    thermal population p0 and drive detuning.

    Interpolates between p0 (no drive or far detuned) and 1/2 (full
    saturation)."""
    if not 0.0 <= p0 <= 0.5:
        raise ParameterError("p0 must lie in [0, 0.5]")
    if gamma1 <= 0 or gamma2 <= 0:
        raise ParameterError("rates must be > 0")
    d2 = 1.0 + (detuning / gamma2) ** 2
    s = omega_rabi ** 2 / (gamma1 * gamma2)
    return 0.5 - (0.5 - p0) * d2 / (d2 + s)


def _bloch_drift(omega_rabi, gamma1, gamma2):
    """Drift matrix of (x, y, z) for resonant drive about the x axis."""
    return np.array(
        [
            [-gamma2, 0.0, 0.0],
            [0.0, -gamma2, -omega_rabi],
            [0.0, omega_rabi, -gamma1],
        ]
    )


def bloch_evolve(tls, drive, gamma2, z0, times):
    """Damped-driven Bloch solution (Torrey) for resonant drive.

    Starts from the z axis (x=y=0, z=z0) and evolves under drift
    dx/dt=-G2 x, dy/dt=-G2 y - wR z, dz/dt=wR y - G1 (z - z_th),
    with z_th = 2*p_e_thermal - 1.  Implemented by eigendecomposition of the
    3x3 drift; a near-degenerate (critically damped) spectrum is lifted by an
    epsilon perturbation of omega_rabi.
    """
    if gamma2 < tls.gamma1 / 2:
        raise UnphysicalRatesError("gamma2 must be >= gamma1/2")
    times = np.asarray(times, dtype=float)
    w = drive.omega_rabi
    g1 = tls.gamma1
    z_th = 2.0 * tls.p_e_thermal - 1.0

    if w == 0 and g1 == 0 and gamma2 == 0:
        xyz = np.zeros((times.size, 3))
        xyz[:, 2] = z0
        return SpinTrajectory(times, xyz)

    M = _bloch_drift(w, g1, gamma2)
    lam, V = np.linalg.eig(M)
    # lift critically damped degeneracies so V is invertible
    if w > 0 and np.min(np.abs(lam[:, None] - lam[None, :]) + np.eye(3)) < 1e-6 * max(
        w, gamma2
    ):
        M = _bloch_drift(w * (1.0 + 1e-9), g1, gamma2)
        lam, V = np.linalg.eig(M)

    b = np.array([0.0, 0.0, g1 * z_th])
    if np.any(b != 0.0):
        v_ss = np.linalg.solve(M, -b)
    else:
        v_ss = np.zeros(3)
    v0 = np.array([0.0, 0.0, float(z0)])
    c = np.linalg.solve(V, v0 - v_ss)
    modes = V[None, :, :] * np.exp(lam[None, None, :] * times[:, None, None])
    xyz = np.real(modes @ c) + v_ss[None, :]
    return SpinTrajectory(times, xyz)


def fit_rabi_decay(traj, tls, omega_guess=None, gamma2_guess=None):
    """Least-squares fit of the Torrey z(t) solution to a trajectory.

    Returns (gamma2_est, omega_est).  Multistart over the initial frequency
    guess (spectral peak of the detrended signal and scaled variants, plus an
    optional caller-supplied guess) guards against local minima in both the
    oscillatory and overdamped regimes.
    """
    t = traj.times
    zdata = traj.z
    if t.size < 8:
        raise FitError("trajectory too short to fit")
    z0 = float(zdata[0])
    dt = float(np.mean(np.diff(t)))

    # frequency guesses from the periodogram of the detrended signal
    zd = zdata - np.mean(zdata)
    freqs = np.fft.rfftfreq(t.size, dt) * 2.0 * np.pi
    power = np.abs(np.fft.rfft(zd)) ** 2
    w_peak = freqs[np.argmax(power[1:]) + 1] if power.size > 1 else 0.0
    span = 4.0 / (t[-1] - t[0])
    guesses = {max(w_peak, span)}
    guesses.update(max(f * w_peak, span) for f in (0.5, 1.5))
    if omega_guess is not None:
        guesses.add(max(float(omega_guess), 0.0))

    g2_0 = gamma2_guess if gamma2_guess is not None else max(tls.gamma1, 1.0 / t[-1])

    def residuals(p):
        g2, w = p
        model = bloch_evolve(
            tls, DriveParams(omega_rabi=w), g2, z0, t
        ).z
        return model - zdata

    best = None
    for w0 in sorted(guesses):
        try:
            res = least_squares(
                residuals,
                x0=[g2_0, w0],
                bounds=([tls.gamma1 / 2, 0.0], [np.inf, np.inf]),
                xtol=1e-8,
                ftol=1e-10,
            )
        except Exception:
            continue
        if best is None or res.cost < best.cost:
            best = res
    if best is None or not best.success and best.cost > 1e-3 * t.size:
        residual = np.nan if best is None else np.sqrt(2 * best.cost / t.size)
        raise FitError(f"Rabi fit did not converge (rms residual {residual:.3g})")
    gamma2_est, omega_est = best.x
    return float(gamma2_est), float(omega_est)
