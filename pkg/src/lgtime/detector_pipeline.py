"""Acquisition-and-analysis chain of the weak-measurement experiment.

Synthesizes detector records (quantum surrogate and two macrorealistic
control models), averages ON/OFF periodograms, applies the line/contrast
corrections and cavity deconvolution, and produces the Leggett-Garg curve
with statistical and systematic error bars.

The quantum surrogate is a Gaussian process with the target spin spectrum:
the analysis chain only measures second-order statistics, for which the
surrogate is exact.  Records are synthesized in fixed-size batches with
per-batch RNG streams derived from (seed, tag, batch_index), so results are
bit-identical however the work is chunked.

Spectral conventions follow analytic_spectrum: SpectrumRecord densities are
two-sided values per rad/s on a one-sided grid.
"""

from dataclasses import dataclass

import numpy as np

from .analytic_spectrum import (
    GridError,
    LgCurve,
    SPIN_UNITS,
    SpectrumRecord,
    VOLTS_SQUARED,
    correlator_from_spectrum,
    leggett_garg_curve,
    lg_max,
)
from .qubit_dynamics import ParameterError, cavity_filter


class ResampleError(GridError):
    """Target spectrum does not cover the record frequency grid."""


class BandGuardError(ValueError):
    """Requested band would amplify noise beyond the deconvolution guard."""


@dataclass(frozen=True)
class AcquisitionConfig:
    """Sampling and averaging settings of the acquisition chain."""

    dt: float = 10e-9
    record_len: int = 1024
    n_records: int = 10000
    t_on: float = 2.5e-3
    t_off: float = 2.5e-3
    t_ss: float = 5e-6
    noise_to_peak: float = 60.0
    seed: int = 0
    iq_imbalance: float = 0.0
    batch_size: int = 256

    def __post_init__(self):
        if self.record_len < 2 or self.record_len & (self.record_len - 1):
            raise ParameterError("record_len must be a power of two")
        if self.dt <= 0 or self.n_records < 1 or self.batch_size < 1:
            raise ParameterError("dt, n_records, batch_size must be positive")

    @property
    def bin_hz(self):
        """Frequency bin of one record: 1/(dt*record_len)."""
        return 1.0 / (self.dt * self.record_len)

    @property
    def records_per_period(self):
        """Records fitting in one ON (or OFF) period after settling."""
        return max(1, int((self.t_on - self.t_ss) / (self.dt * self.record_len)))


@dataclass
class RecordBatch:
    """A batch of I/Q records, shape (n, record_len) each."""

    I: np.ndarray
    Q: np.ndarray
    tag: str  # "ON" or "OFF"

    def __post_init__(self):
        self.I = np.atleast_2d(np.asarray(self.I, dtype=float))
        self.Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        if self.I.shape != self.Q.shape:
            raise ParameterError("I and Q must have equal shapes")
        if not (np.all(np.isfinite(self.I)) and np.all(np.isfinite(self.Q))):
            raise ParameterError("records must be finite")
        if self.tag not in ("ON", "OFF"):
            raise ParameterError("tag must be 'ON' or 'OFF'")


@dataclass
class RawRecord:
    """A single I/Q record (convenience view of a batch row)."""

    I: np.ndarray
    Q: np.ndarray
    tag: str

    def as_batch(self):
        return RecordBatch(self.I[None, :], self.Q[None, :], self.tag)


@dataclass
class LineResponse:
    """Measuring-line frequency response, R(0)=1, with relative uncertainty."""

    freqs: np.ndarray  # rad/s, increasing
    R: np.ndarray
    dR_over_R: float = 0.0

    def __post_init__(self):
        self.freqs = np.asarray(self.freqs, dtype=float)
        self.R = np.asarray(self.R, dtype=float)
        if np.any(self.R <= 0):
            raise ParameterError("R must be > 0 everywhere")
        if abs(self.R[np.argmin(np.abs(self.freqs))] - 1.0) > 1e-6:
            raise ParameterError("R(0) must equal 1")

    @classmethod
    def flat(cls, dR_over_R=0.015, f_max_hz=60e6):
        w = np.array([0.0, 2.0 * np.pi * f_max_hz])
        return cls(w, np.ones(2), dR_over_R)

    def at(self, omega):
        return np.interp(np.asarray(omega, dtype=float), self.freqs, self.R)


@dataclass
class ErrorBudget:
    """Maximum relative systematic errors plus the per-bin statistical sigma
    of the corrected spectrum (None = measure it from the quiet band)."""

    dR_over_R: float = 0.015
    dV2_over_V2: float = 0.061
    dKappa_over_kappa: float = 0.026
    sigma0: float | None = None

    def __post_init__(self):
        for name in ("dR_over_R", "dV2_over_V2", "dKappa_over_kappa"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be >= 0")


def _rng_for(config, tag, batch_index):
    return np.random.default_rng(
        np.random.SeedSequence(entropy=config.seed,
                               spawn_key=(0 if tag == "ON" else 1, batch_index))
    )


def _record_bins(config):
    """One-sided record frequency grid in Hz (0 .. Nyquist)."""
    return np.fft.rfftfreq(config.record_len, config.dt)


def _noise_sigma(peak_density, config):
    """Per-sample white-noise std per quadrature so that the summed I+Q noise
    density is noise_to_peak times the peak signal density."""
    if peak_density <= 0:
        return 0.0
    return np.sqrt(config.noise_to_peak * peak_density / (2.0 * config.dt))


def _synthesize_gaussian(power_density, config, pointer_angle):
    """Yield ON batches of a Gaussian signal with the given two-sided density
    (volts^2/Hz at the record bins) plus white noise, and matching OFF
    noise-only batches."""
    n = config.record_len
    n_bins = n // 2 + 1
    sigma_v = _noise_sigma(float(np.max(power_density)), config)
    # rfft coefficient scales: E|X_k|^2 = P_k * n / dt (interior bins)
    amp = np.sqrt(np.maximum(power_density, 0.0) * n / config.dt)
    ci, cq = np.cos(pointer_angle), np.sin(pointer_angle)
    q_gain = 1.0 + config.iq_imbalance

    done = 0
    batch_index = 0
    while done < config.n_records:
        b = min(config.batch_size, config.n_records - done)
        rng_on = _rng_for(config, "ON", batch_index)
        rng_off = _rng_for(config, "OFF", batch_index)
        re = rng_on.standard_normal((b, n_bins))
        im = rng_on.standard_normal((b, n_bins))
        coeff = (re + 1j * im) / np.sqrt(2.0)
        coeff[:, 0] = re[:, 0]
        coeff[:, -1] = re[:, -1]
        signal = np.fft.irfft(coeff * amp[None, :], n=n)
        noise_i = sigma_v * rng_on.standard_normal((b, n))
        noise_q = sigma_v * rng_on.standard_normal((b, n))
        yield RecordBatch(ci * signal + noise_i,
                          q_gain * (cq * signal) + noise_q, "ON")
        yield RecordBatch(sigma_v * rng_off.standard_normal((b, n)),
                          sigma_v * rng_off.standard_normal((b, n)), "OFF")
        done += b
        batch_index += 1


def synthesize_quantum_trace(target_spectrum, deltaV, config,
                             line=None, pointer_angle=0.0):
    """Quantum-surrogate record stream.

    target_spectrum: intrinsic spin spectrum S_z (spin units, one-sided,
    covering the record band up to Nyquist).  The synthesis applies the
    detector filter C and line response R per bin:
    per-bin density (volts^2/Hz; numerically equal to the per-(rad/s)
    density under the project K(0) = integral S dw/2pi convention)
    = (deltaV/2)^2 S_z C R; white amplifier noise
    with I+Q density = noise_to_peak * peak signal density; OFF records carry
    noise only.  The spin signal is split across I/Q along pointer_angle.
    """
    if target_spectrum.units != SPIN_UNITS:
        raise ParameterError("target spectrum must be in spin units")
    if not target_spectrum.one_sided:
        raise ResampleError("target spectrum must be one-sided")
    kappa = target_spectrum.meta.get("kappa")
    if kappa is None:
        raise ParameterError("target spectrum meta must carry 'kappa'")
    f_bins = _record_bins(config)
    w_bins = 2.0 * np.pi * f_bins
    if target_spectrum.freqs[-1] < w_bins[-1] * (1 - 1e-12):
        raise ResampleError("target spectrum must cover the band up to Nyquist")
    s_rad = np.interp(w_bins, target_spectrum.freqs, target_spectrum.density)
    power = (deltaV / 2.0) ** 2 * s_rad * cavity_filter(w_bins, kappa)
    if line is not None:
        power = power * line.at(w_bins)
    yield from _synthesize_gaussian(power, config, pointer_angle)


def _detection_gain(config, kappa, line):
    """Amplitude gain sqrt(C*R) at the record bins (None -> no filtering)."""
    if kappa is None and line is None:
        return None
    w_bins = 2.0 * np.pi * _record_bins(config)
    gain = np.ones_like(w_bins)
    if kappa is not None:
        gain *= cavity_filter(w_bins, kappa)
    if line is not None:
        gain *= line.at(w_bins)
    return np.sqrt(gain)


def _filter_records(v, gain):
    if gain is None:
        return v
    return np.fft.irfft(np.fft.rfft(v, axis=1) * gain[None, :], n=v.shape[1])


def synthesize_macrospin_trace(omega_rabi, phase_diffusion_rate, deltaV, config,
                               pointer_angle=0.0, kappa=None, line=None):
    """Macrorealistic control: z(t) = cos(omega_rabi t + phi(t)) with a
    diffusing phase (Var phi = 2*rate*t), so |z| <= 1 and K(0) -> 1/2.

    When kappa/line are given, the signal passes through the same detection
    chain (cavity filter C, line response R) that the analysis corrects for,
    exactly like a real trace would."""
    if phase_diffusion_rate < 0 or omega_rabi < 0:
        raise ParameterError("rates must be >= 0")
    n = config.record_len
    t = np.arange(n) * config.dt
    nu = phase_diffusion_rate
    gain = _detection_gain(config, kappa, line)
    # peak two-sided density of 0.5*exp(-nu|tau|)*cos(w tau), floored at the
    # resolution of one record for the nearly-coherent case
    peak = 0.25 * (deltaV / 2.0) ** 2 * (2.0 / max(nu, np.pi * config.bin_hz))
    if kappa is not None:
        peak *= cavity_filter(omega_rabi, kappa)
    sigma_v = _noise_sigma(peak, config)
    ci, cq = np.cos(pointer_angle), np.sin(pointer_angle)
    q_gain = 1.0 + config.iq_imbalance

    done = 0
    batch_index = 0
    while done < config.n_records:
        b = min(config.batch_size, config.n_records - done)
        rng_on = _rng_for(config, "ON", batch_index)
        rng_off = _rng_for(config, "OFF", batch_index)
        phi0 = rng_on.uniform(0.0, 2.0 * np.pi, size=(b, 1))
        steps = np.sqrt(2.0 * nu * config.dt) * rng_on.standard_normal((b, n))
        phi = phi0 + np.cumsum(steps, axis=1) - steps
        z = np.cos(omega_rabi * t[None, :] + phi)
        v = _filter_records((deltaV / 2.0) * z, gain)
        yield RecordBatch(
            ci * v + sigma_v * rng_on.standard_normal((b, n)),
            q_gain * (cq * v) + sigma_v * rng_on.standard_normal((b, n)),
            "ON",
        )
        yield RecordBatch(sigma_v * rng_off.standard_normal((b, n)),
                          sigma_v * rng_off.standard_normal((b, n)), "OFF")
        done += b
        batch_index += 1


def synthesize_telegraph_trace(switch_rate, deltaV, config, pointer_angle=0.0,
                               kappa=None, line=None):
    """Macrorealistic control: symmetric random telegraph z = +-1.

    Flips are sampled through the exact per-step parity
    P(flip) = (1 - exp(-2*rate*dt))/2, so K(tau) = exp(-2*rate*tau) holds
    exactly on the sample grid and the spectrum is a zero-centered Lorentzian
    of half-width 2*switch_rate.  kappa/line apply the detection chain as in
    synthesize_macrospin_trace."""
    if switch_rate <= 0:
        raise ParameterError("switch_rate must be > 0")
    n = config.record_len
    p_flip = 0.5 * (1.0 - np.exp(-2.0 * switch_rate * config.dt))
    gain = _detection_gain(config, kappa, line)
    peak = (deltaV / 2.0) ** 2 / max(switch_rate, np.pi * config.bin_hz)
    sigma_v = _noise_sigma(peak, config)
    ci, cq = np.cos(pointer_angle), np.sin(pointer_angle)
    q_gain = 1.0 + config.iq_imbalance

    done = 0
    batch_index = 0
    while done < config.n_records:
        b = min(config.batch_size, config.n_records - done)
        rng_on = _rng_for(config, "ON", batch_index)
        rng_off = _rng_for(config, "OFF", batch_index)
        start = rng_on.choice([-1.0, 1.0], size=(b, 1))
        flips = rng_on.random((b, n)) < p_flip
        flips[:, 0] = False
        z = start * np.where(np.cumsum(flips, axis=1) % 2 == 0, 1.0, -1.0)
        v = _filter_records((deltaV / 2.0) * z, gain)
        yield RecordBatch(
            ci * v + sigma_v * rng_on.standard_normal((b, n)),
            q_gain * (cq * v) + sigma_v * rng_on.standard_normal((b, n)),
            "ON",
        )
        yield RecordBatch(sigma_v * rng_off.standard_normal((b, n)),
                          sigma_v * rng_off.standard_normal((b, n)), "OFF")
        done += b
        batch_index += 1


def accumulate_periodograms(records, dt=10e-9):
    """Average the per-tag periodograms of a record stream.

    density = (|FFT I|^2 + |FFT Q|^2) * dt / record_len at the one-sided
    record bins (two-sided density values).  Single pass, constant memory.
    Returns (S_on, S_off) as volts-squared SpectrumRecords.
    """
    sums = {"ON": None, "OFF": None}
    counts = {"ON": 0, "OFF": 0}
    length = None
    for item in records:
        batch = item.as_batch() if isinstance(item, RawRecord) else item
        n = batch.I.shape[1]
        if length is None:
            length = n
        elif n != length:
            raise ParameterError("mixed record lengths in stream")
        pgram = (np.abs(np.fft.rfft(batch.I, axis=1)) ** 2
                 + np.abs(np.fft.rfft(batch.Q, axis=1)) ** 2).sum(axis=0)
        if sums[batch.tag] is None:
            sums[batch.tag] = pgram
        else:
            sums[batch.tag] += pgram
        counts[batch.tag] += batch.I.shape[0]
    if counts["ON"] < 1 or counts["OFF"] < 1:
        raise ParameterError("need at least one record of each tag")
    freqs = 2.0 * np.pi * np.fft.rfftfreq(length, dt)
    out = []
    for tag in ("ON", "OFF"):
        dens = sums[tag] * dt / (length * counts[tag])
        out.append(SpectrumRecord(freqs, dens, units=VOLTS_SQUARED,
                                  one_sided=True,
                                  meta={"tag": tag, "n_records": counts[tag],
                                        "dt": dt}))
    return tuple(out)


def accumulate_quantum_fast(target_spectrum, deltaV, config,
                            line=None, pointer_angle=0.0):
    """Accumulated ON/OFF periodograms of the quantum surrogate, sampled
    directly in the frequency domain.

    For the Gaussian surrogate the record bins are statistically independent
    and each per-record periodogram bin is a 2x2 Gaussian quadratic form, so
    the batch-accumulated periodogram is a pair of Gamma variates per bin.
    This samples *exactly* the same joint distribution as running
    synthesize_quantum_trace through accumulate_periodograms, at a small
    fraction of the cost; it exists so that experiment-scale averaging
    (tens of millions of records) runs at desk scale.

    Returns (S_on, S_off) like accumulate_periodograms.
    """
    if target_spectrum.units != SPIN_UNITS:
        raise ParameterError("target spectrum must be in spin units")
    kappa = target_spectrum.meta.get("kappa")
    if kappa is None:
        raise ParameterError("target spectrum meta must carry 'kappa'")
    n = config.record_len
    f_bins = _record_bins(config)
    w_bins = 2.0 * np.pi * f_bins
    if target_spectrum.freqs[-1] < w_bins[-1] * (1 - 1e-12):
        raise ResampleError("target spectrum must cover the band up to Nyquist")
    s_rad = np.interp(w_bins, target_spectrum.freqs, target_spectrum.density)
    power = (deltaV / 2.0) ** 2 * s_rad * cavity_filter(w_bins, kappa)
    if line is not None:
        power = power * line.at(w_bins)
    sigma_v = _noise_sigma(float(np.max(power)), config)

    # per-record second moments of the rfft coefficients
    p = power * n / config.dt  # signal |coefficient|^2 mean
    m_noise = sigma_v ** 2 * n  # per-quadrature noise |coefficient|^2 mean
    ci, cq = np.cos(pointer_angle), np.sin(pointer_angle)
    g = 1.0 + config.iq_imbalance
    c11 = ci ** 2 * p + m_noise
    c22 = (cq * g) ** 2 * p + m_noise
    c12 = ci * cq * g * p
    half_tr = 0.5 * (c11 + c22)
    disc = np.sqrt(np.maximum(0.25 * (c11 - c22) ** 2 + c12 ** 2, 0.0))
    lam_on = np.stack([half_tr + disc, half_tr - disc])  # (2, n_bins)
    lam_off = np.full_like(lam_on, m_noise)

    n_bins = n // 2 + 1
    sums = {"ON": np.zeros(n_bins), "OFF": np.zeros(n_bins)}
    done = 0
    batch_index = 0
    while done < config.n_records:
        b = min(config.batch_size, config.n_records - done)
        for tag, lam in (("ON", lam_on), ("OFF", lam_off)):
            rng = _rng_for(config, tag, batch_index)
            # interior bins: complex coefficients -> Exp(1) summands
            interior = lam[:, 1:-1] * rng.standard_gamma(b, size=(2, n_bins - 2))
            # DC and Nyquist: real coefficients -> chi2(1) summands
            edges = lam[:, [0, -1]] * 0.5 * rng.chisquare(b, size=(2, 2))
            sums[tag][1:-1] += interior.sum(axis=0)
            sums[tag][[0, -1]] += edges.sum(axis=0)
        done += b
        batch_index += 1
    out = []
    for tag in ("ON", "OFF"):
        dens = sums[tag] * config.dt / (n * config.n_records)
        out.append(SpectrumRecord(w_bins, dens, units=VOLTS_SQUARED,
                                  one_sided=True,
                                  meta={"tag": tag, "n_records": config.n_records,
                                        "dt": config.dt}))
    return tuple(out)


def correct_and_normalize(s_on, s_off, line, deltaV):
    """Corrected spin-units spectrum (S_ON - S_OFF) / (R * (deltaV/2)^2).

    The per-Hz periodogram density values coincide with per-(rad/s) values
    under the project convention K(0) = integral S dw/2pi, so no further
    scale factor appears."""
    if s_on.freqs.shape != s_off.freqs.shape or np.max(
        np.abs(s_on.freqs - s_off.freqs)
    ) > 1e-6 * s_on.step:
        raise GridError("ON/OFF spectra must share a grid")
    r = line.at(s_on.freqs)
    density = (s_on.density - s_off.density) / (r * (deltaV / 2.0) ** 2)
    meta = dict(s_on.meta)
    meta.update({"tag": "corrected", "deltaV": deltaV})
    return SpectrumRecord(s_on.freqs, density, units=SPIN_UNITS,
                          one_sided=True, meta=meta)


def band_limit(spec, f_max_hz):
    """Restrict a one-sided spectrum to freqs <= 2*pi*f_max_hz."""
    keep = spec.freqs <= 2.0 * np.pi * f_max_hz * (1.0 + 1e-12)
    if np.count_nonzero(keep) < 2:
        raise GridError("band limit leaves fewer than two bins")
    return SpectrumRecord(spec.freqs[keep], spec.density[keep], units=spec.units,
                          one_sided=True, meta=dict(spec.meta))


def deconvolve_cavity(spec, kappa, c_min=0.1):
    """Divide by the cavity filter; refuse bands where C < c_min to avoid
    blowing up the noise."""
    c = cavity_filter(spec.freqs, kappa)
    if np.min(c) < c_min:
        raise BandGuardError(
            f"cavity filter reaches {np.min(c):.3f} in band; guard is {c_min}"
        )
    meta = dict(spec.meta)
    meta["kappa"] = kappa
    return SpectrumRecord(spec.freqs, spec.density / c, units=spec.units,
                          one_sided=True, meta=meta)


def measure_sigma0(corrected, f_lo_hz=22e6, f_hi_hz=30e6):
    """Per-bin statistical sigma of the corrected spectrum, from the quiet
    band where the spin spectral density vanishes (per rad/s units)."""
    w = corrected.freqs
    mask = (w >= 2.0 * np.pi * f_lo_hz) & (w <= 2.0 * np.pi * f_hi_hz)
    if np.count_nonzero(mask) < 8:
        raise GridError("quiet band holds too few bins to estimate sigma0")
    return float(np.std(corrected.density[mask], ddof=1))


def statistical_sigma(sigma0, kappa, config, f_max_hz=30e6):
    """Per-tau standard deviation of f_LG from the per-bin sigma.

    Propagates sigma_k = sigma0 / C(omega_k) (deconvolution) through the
    discrete inverse transform and the 2K(tau)-K(2tau) combination, exactly
    matching the transform used by the pipeline.  Returns (taus, sigma_r) for
    the tau range where 2*tau stays on the grid.
    """
    domega = 2.0 * np.pi * config.bin_hz
    n = int(np.floor(2.0 * np.pi * f_max_hz / domega * (1.0 + 1e-12)))
    w = np.arange(n + 1) * domega
    sigma_k = sigma0 / cavity_filter(w, kappa)
    dtau = np.pi / (n * domega)
    m = (n - 1) // 2 + 1
    r = np.arange(m)
    k_in = np.arange(1, n)
    ang = np.pi * np.outer(r, k_in) / n
    weights_sq = 4.0 * (2.0 * np.cos(ang) - np.cos(2.0 * ang)) ** 2
    var = (
        sigma_k[0] ** 2
        + (2.0 * (-1.0) ** r - 1.0) ** 2 * sigma_k[n] ** 2
        + weights_sq @ sigma_k[1:n] ** 2
    )
    sigma_r = (domega / (2.0 * np.pi)) * np.sqrt(var)
    return r * dtau, sigma_r


def lg_curve_from_corrected(corrected, kappa, f_max_hz=30e6, c_min=0.1):
    """Band-limit, deconvolve, transform, and form f_LG (no error fields)."""
    banded = band_limit(corrected, f_max_hz)
    deconv = deconvolve_cavity(banded, kappa, c_min)
    corr = correlator_from_spectrum(deconv)
    return leggett_garg_curve(corr), corr


def systematic_bounds(curve, budget, corrected, kappa, f_max_hz=30e6, c_min=0.1):
    """Attach systematic bounds to an LgCurve.

    The line-response and contrast uncertainties act as flat multiplicative
    bounds on f; the cavity-filter uncertainty is propagated exactly by
    recomputing the deconvolution/transform chain at kappa*(1 +- dk/k)."""
    flat = budget.dR_over_R + budget.dV2_over_V2
    variants = [curve.f]
    for sgn in (+1.0, -1.0):
        kap = kappa * (1.0 + sgn * budget.dKappa_over_kappa)
        alt, _ = lg_curve_from_corrected(corrected, kap, f_max_hz, c_min)
        variants.append(alt.f)
    stack = np.vstack(variants)
    spread_lo = stack.min(axis=0)
    spread_hi = stack.max(axis=0)
    sys_lo = spread_lo - flat * np.abs(curve.f)
    sys_hi = spread_hi + flat * np.abs(curve.f)
    return LgCurve(curve.taus, curve.f, curve.sigma_stat, sys_lo, sys_hi,
                   meta=dict(curve.meta))


def run_lg_analysis(records_or_spectra, line, deltaV, kappa, budget, config,
                    f_max_hz=30e6, c_min=0.1):
    """Full analysis chain; returns (LgCurve, diagnostics).

    records_or_spectra: either a record stream or a pre-accumulated
    (S_on, S_off) pair.  Diagnostics carry K(0), the violation maximum, the
    measured sigma0, and the significance (f* - 1 - systematic)/sigma_r.
    """
    if isinstance(records_or_spectra, tuple) and len(records_or_spectra) == 2:
        s_on, s_off = records_or_spectra
    else:
        s_on, s_off = accumulate_periodograms(records_or_spectra, dt=config.dt)
    corrected = correct_and_normalize(s_on, s_off, line, deltaV)
    sigma0 = budget.sigma0 if budget.sigma0 is not None else measure_sigma0(corrected)
    curve, corr = lg_curve_from_corrected(corrected, kappa, f_max_hz, c_min)
    taus_sig, sigma_r = statistical_sigma(sigma0, kappa, config, f_max_hz)
    if taus_sig.size != curve.taus.size:
        raise GridError("statistical grid does not match the curve grid")
    curve = LgCurve(curve.taus, curve.f, sigma_r, curve.sys_lo, curve.sys_hi,
                    meta=dict(curve.meta))
    curve = systematic_bounds(curve, budget, corrected, kappa, f_max_hz, c_min)
    tau_star, f_star = lg_max(curve)
    i_star = int(np.argmin(np.abs(curve.taus - tau_star)))
    sys_down = curve.f[i_star] - curve.sys_lo[i_star]
    sig = (f_star - 1.0 - sys_down) / sigma_r[i_star] if sigma_r[i_star] > 0 else np.inf
    diag = {
        "k0": float(corr.values[0]),
        "tau_star": tau_star,
        "f_star": f_star,
        "sigma0": sigma0,
        "sigma_r_star": float(sigma_r[i_star]),
        "sys_down_star": float(sys_down),
        "significance": float(sig),
        "corrected": corrected,
        "correlator": corr,
    }
    return curve, diag
