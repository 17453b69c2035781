"""Analytic spectrum of the continuously monitored driven two-level system.

Provides the closed-form sigma_z power spectrum (and the exact
regression-theorem form it approximates), its finite-detector-bandwidth
modification, the discrete Fourier partner K(tau), and the Leggett-Garg
functional f_LG(tau) = 2K(tau) - K(2*tau).

Conventions (fixed project-wide):
    K(tau) = (1/2pi) * Int S(omega) e^{i omega tau} d omega
    S(omega) = Int K(tau) e^{-i omega tau} d tau
S is a two-sided spectral density per unit angular frequency, so the full-line
quadrature of the sigma_z spectrum equals K(0+) = 1 - z_st**2.  Discrete
transforms are DCT-I pairs on uniform grids (endpoints counted once), which
makes the forward/inverse round trip exact.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.fft import dct
from scipy.integrate import quad

from .qubit_dynamics import (
    DriveParams,
    ParameterError,
    TlsParams,
    UnphysicalRatesError,
    cavity_filter,
)

SPIN_UNITS = "spin_units"
VOLTS_SQUARED = "volts_squared"


class GridError(ValueError):
    """Frequency or tau grid does not meet the transform's requirements."""


class ConventionError(ValueError):
    """Input violates the fixed Fourier/symmetry convention."""


class DataError(ValueError):
    """Curve data unusable (e.g. all NaN)."""


def _check_uniform(grid, name):
    grid = np.asarray(grid, dtype=float)
    if grid.size < 2:
        raise GridError(f"{name} needs at least two points")
    steps = np.diff(grid)
    if np.any(steps <= 0) or np.ptp(steps) > 1e-9 * np.max(steps):
        raise GridError(f"{name} must be uniform and increasing")
    return grid, float(np.mean(steps))


@dataclass
class SpectrumRecord:
    """Spectral density on a uniform angular-frequency grid.

    freqs : rad/s; either one-sided from 0 (one_sided=True) or symmetric
    density : two-sided density per rad/s, same length as freqs
    units : SPIN_UNITS or VOLTS_SQUARED
    meta : parameter provenance
    """

    freqs: np.ndarray
    density: np.ndarray
    units: str = SPIN_UNITS
    one_sided: bool = True
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.freqs, self._step = _check_uniform(self.freqs, "freqs")
        self.density = np.asarray(self.density, dtype=float)
        if self.density.shape != self.freqs.shape:
            raise GridError("density and freqs must have matching shapes")

    @property
    def step(self):
        return self._step


@dataclass
class CorrelatorSeries:
    """K(tau) on a uniform tau grid starting at 0 (seconds)."""

    taus: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.taus, self._step = _check_uniform(self.taus, "taus")
        if abs(self.taus[0]) > 1e-15:
            raise GridError("tau grid must start at 0")
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.taus.shape:
            raise GridError("values and taus must have matching shapes")

    @property
    def step(self):
        return self._step


@dataclass
class LgCurve:
    """f_LG(tau) with statistical and systematic error fields."""

    taus: np.ndarray
    f: np.ndarray
    sigma_stat: np.ndarray
    sys_lo: np.ndarray
    sys_hi: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.taus = np.asarray(self.taus, dtype=float)
        for name in ("f", "sigma_stat", "sys_lo", "sys_hi"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != self.taus.shape:
                raise GridError(f"{name} must match taus")
            setattr(self, name, arr)


def steady_z(omega_rabi, gamma1, gamma2):
    """z_st = -1/(1 + omega_rabi**2/(gamma1*gamma2)) without dataclass
    plumbing (module-internal convenience)."""
    if omega_rabi == 0:
        return -1.0
    return -1.0 / (1.0 + omega_rabi ** 2 / (gamma1 * gamma2))


def sigma_z_spectrum(omega, omega_rabi, gamma1, gamma2):
    """Two-sided sigma_z spectral density of the driven, damped TLS.

    Valid in all damping regimes: the shifted Rabi frequency enters only
    through its square wt2 = omega_rabi**2 - (gamma2-gamma1)**2/4, kept
    signed, so the overdamped case needs no complex continuation.
    """
    if gamma1 <= 0 or gamma2 <= 0:
        raise ParameterError("rates must be > 0")
    if gamma2 < gamma1 / 2:
        raise UnphysicalRatesError("gamma2 must be >= gamma1/2")
    omega = np.asarray(omega, dtype=float)
    g = 0.5 * (gamma2 + gamma1)
    wt2 = omega_rabi ** 2 - 0.25 * (gamma2 - gamma1) ** 2
    z = steady_z(omega_rabi, gamma1, gamma2)
    one_mz2 = 1.0 - z ** 2
    A = g ** 2 + wt2
    w2 = omega ** 2
    num = g * one_mz2 * (A + w2) + (
        0.5 * one_mz2 * (gamma2 - gamma1) - omega_rabi ** 2 * z ** 2 / gamma2
    ) * (A - w2)
    den = (A + w2) ** 2 - 4.0 * w2 * wt2
    out = 2.0 * num / den
    return out if out.ndim else float(out)


def sigma_z_regression_spectrum(omega, omega_rabi, gamma1, gamma2):
    """Exact two-sided sigma_z spectrum from the regression theorem.

    Closed form of the steady-state fluctuation spectrum obtained by
    propagating sigma_z * rho_ss with the same Bloch generator that defines
    the dynamics (resonant drive, rates gamma1 and gamma2).  It shares the
    poles of sigma_z_spectrum and the same quadrature 1 - z_st**2, but the
    numerator weights differ: sigma_z_spectrum is an approximation that
    agrees with this result to about 1% near gamma2 ~ omega_rabi/10 yet
    deviates by over 15% pointwise when the drive is slow (omega_rabi within
    a few gamma2).  Kept separate so the approximate form can be compared
    against measured data exactly as acquired-analysis pipelines do.
    """
    if gamma1 <= 0 or gamma2 <= 0:
        raise ParameterError("rates must be > 0")
    if gamma2 < gamma1 / 2:
        raise UnphysicalRatesError("gamma2 must be >= gamma1/2")
    omega = np.asarray(omega, dtype=float)
    w2 = omega ** 2
    wr2 = omega_rabi ** 2
    num = 2.0 * wr2 * (
        gamma1 ** 2 * gamma2 + 2.0 * gamma1 * gamma2 ** 2
        + gamma1 * w2 + gamma2 * wr2
    )
    den = (
        gamma1 * gamma2 * (gamma1 ** 2 + w2) * (gamma2 ** 2 + w2)
        + wr2 * (3.0 * gamma1 ** 2 * gamma2 ** 2
                 + (gamma1 ** 2 + gamma2 ** 2) * w2 + w2 ** 2
                 - 2.0 * gamma1 * gamma2 * w2 + 3.0 * gamma1 * gamma2 * wr2
                 - 2.0 * w2 * wr2)
        + wr2 ** 3
    )
    out = num / den
    return out if out.ndim else float(out)


def spectrum_normalization(omega_rabi, gamma1, gamma2):
    """Full-line quadrature (1/2pi) Int S(omega) d omega.

    Adaptive quadrature on [0, Omega] plus the analytic 1/omega**2 tail;
    equals 1 - z_st**2 for the exact spectrum."""
    g = 0.5 * (gamma2 + gamma1)
    wt2 = omega_rabi ** 2 - 0.25 * (gamma2 - gamma1) ** 2
    w_peak = np.sqrt(max(wt2, 0.0))
    cutoff = 200.0 * max(g, omega_rabi, gamma2)
    pts = [p for p in (w_peak,) if 0 < p < cutoff]
    val, _ = quad(
        lambda w: sigma_z_spectrum(w, omega_rabi, gamma1, gamma2),
        0.0,
        cutoff,
        points=pts or None,
        limit=400,
    )
    z = steady_z(omega_rabi, gamma1, gamma2)
    tail_coeff = 2.0 * (
        gamma1 * (1.0 - z ** 2) + omega_rabi ** 2 * z ** 2 / gamma2
    )
    tail = tail_coeff / cutoff
    return (2.0 * val + 2.0 * tail) / (2.0 * np.pi)


def finite_bandwidth_spectrum(omega, omega_rabi, gamma1, gamma_phi, kappa):
    """Detector-bandwidth-modified spectrum.

    Two modifications to the ideal spectrum: the dephasing contribution is
    filtered, gamma2(omega) = gamma1/2 + gamma_phi * C(omega), and the result
    is multiplied by the Lorentzian filter C(omega).  gamma_phi is the total
    pure dephasing (intrinsic plus measurement-induced) at zero frequency.
    """
    omega = np.asarray(omega, dtype=float)
    C = cavity_filter(omega, kappa)
    g2 = gamma1 / 2.0 + gamma_phi * np.asarray(C)
    # vectorized re-evaluation of sigma_z_spectrum with per-point gamma2
    if np.any(g2 <= 0) or gamma1 <= 0:
        raise ParameterError("rates must be > 0")
    g = 0.5 * (g2 + gamma1)
    wt2 = omega_rabi ** 2 - 0.25 * (g2 - gamma1) ** 2
    z = -1.0 / (1.0 + omega_rabi ** 2 / (gamma1 * g2)) if omega_rabi > 0 else -1.0
    one_mz2 = 1.0 - z ** 2
    A = g ** 2 + wt2
    w2 = omega ** 2
    num = g * one_mz2 * (A + w2) + (
        0.5 * one_mz2 * (g2 - gamma1) - omega_rabi ** 2 * z ** 2 / g2
    ) * (A - w2)
    den = (A + w2) ** 2 - 4.0 * w2 * wt2
    out = 2.0 * num / den * C
    return out if out.ndim else float(out)


def _fold_two_sided(spec):
    """Return (one-sided freqs, symmetrized density) from a symmetric grid."""
    f = spec.freqs
    s = spec.density
    i0 = int(np.argmin(np.abs(f)))
    if abs(f[i0]) > 1e-9 * spec.step:
        raise GridError("two-sided grid must contain omega = 0")
    n = min(i0, f.size - 1 - i0)
    pos = s[i0 : i0 + n + 1]
    neg = s[i0 : i0 - n - 1 : -1] if i0 - n - 1 >= 0 else s[i0 :: -1]
    asym = np.max(np.abs(pos - neg))
    scale = max(np.max(np.abs(s)), 1e-300)
    if asym > 1e-10 * scale:
        raise ConventionError(
            f"two-sided spectrum not even within tolerance (residual {asym/scale:.2e})"
        )
    return f[i0 : i0 + n + 1], 0.5 * (pos + neg)


def correlator_from_spectrum(spec):
    """Discrete inverse Fourier transform of a spin-units spectrum.

    Uses the DCT-I pair: for a one-sided grid of N+1 points with step domega,
    the tau grid has step pi/(N*domega) and
        K_j = (domega/2pi) * [S_0 + (-1)^j S_N + 2 sum_k S_k cos(pi j k/N)].
    Output is exactly real by construction; an uneven two-sided input raises.
    """
    if spec.units != SPIN_UNITS:
        raise ConventionError("correlator requires a spin-units spectrum")
    if spec.one_sided:
        freqs, dens = spec.freqs, spec.density
        if abs(freqs[0]) > 1e-9 * spec.step:
            raise GridError("one-sided grid must start at 0")
    else:
        freqs, dens = _fold_two_sided(spec)
    n = freqs.size - 1
    domega = freqs[1] - freqs[0]
    dtau = np.pi / (n * domega)
    taus = np.arange(n + 1) * dtau
    values = (domega / (2.0 * np.pi)) * dct(dens, type=1)
    return CorrelatorSeries(taus, values, meta=dict(spec.meta))


def spectrum_from_correlator(corr, units=SPIN_UNITS):
    """Forward transform, the exact inverse of correlator_from_spectrum."""
    n = corr.taus.size - 1
    dtau = corr.step
    domega = np.pi / (n * dtau)
    freqs = np.arange(n + 1) * domega
    density = dtau * dct(corr.values, type=1)
    return SpectrumRecord(freqs, density, units=units, one_sided=True,
                          meta=dict(corr.meta))


def leggett_garg_curve(corr):
    """f_LG(tau_r) = 2 K(tau_r) - K(2 tau_r) with exact index doubling.

    Emitted only up to tau_max/2 so no interpolation enters; statistical and
    systematic fields are zero (filled downstream by the pipeline)."""
    n = corr.taus.size
    m = (n - 1) // 2 + 1
    idx = np.arange(m)
    f = 2.0 * corr.values[idx] - corr.values[2 * idx]
    zeros = np.zeros(m)
    return LgCurve(corr.taus[:m], f, zeros, zeros.copy(), zeros.copy(),
                   meta=dict(corr.meta))


def ideal_lg(tau, omega_rabi):
    """Decoherence-free prediction 2 cos(wR tau) - cos(2 wR tau)."""
    if omega_rabi <= 0:
        raise ParameterError("omega_rabi must be > 0")
    tau = np.asarray(tau, dtype=float)
    out = 2.0 * np.cos(omega_rabi * tau) - np.cos(2.0 * omega_rabi * tau)
    return out if out.ndim else float(out)


def lg_max(curve):
    """(tau*, f*) of an LgCurve, restricted to tau > 0.

    Grid argmax with three-point parabolic refinement; ties resolve to the
    smallest tau.  All-NaN input raises DataError."""
    mask = curve.taus > 0
    f = curve.f[mask]
    taus = curve.taus[mask]
    if f.size == 0 or np.all(np.isnan(f)):
        raise DataError("no finite f_LG values with tau > 0")
    i = int(np.nanargmax(f))
    tau_star, f_star = taus[i], f[i]
    if 0 < i < f.size - 1 and np.all(np.isfinite(f[i - 1 : i + 2])):
        y0, y1, y2 = f[i - 1 : i + 2]
        denom = y0 - 2.0 * y1 + y2
        if denom < 0:
            shift = 0.5 * (y0 - y2) / denom
            if abs(shift) <= 1.0:
                dt = taus[1] - taus[0]
                tau_star = taus[i] + shift * dt
                f_star = y1 - 0.25 * (y0 - y2) * shift
    return float(tau_star), float(f_star)
