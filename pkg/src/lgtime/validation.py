"""Acceptance suite: one callable per criterion, plus a report runner.

Each criterion function returns a dict with keys
    name, passed (bool, or None when skipped), value (short summary string),
    detail (free text / tables)
and the runner prints one PASS/FAIL line per criterion and can write the full
JSON report.

Three criteria are expected to fail with the faithful implementation; the
analysis lives in the project notes and the `detail` fields summarize it:
  - oracle_equivalence: two distinct mechanisms.  (a) The closed-form
    spectrum is itself an approximation to the exact regression result
    (sigma_z_regression_spectrum): accurate to ~1% at the reference
    operating point but off by 5% in L1 at the slowest drive, which fails
    the 2.5 MHz column at every photon number, down to nbar -> 0.  (b) The
    nbar=3.9 row and the 20 MHz column are non-Lorentzian from
    strong-measurement backaction beyond what the formula can absorb.
  - emergent_dephasing_slope: the fitted dephasing-vs-photon-number slope
    exceeds the filtered weak-measurement formula by ~16% at the fastest
    drive (2*omega_R/kappa = 1.32), the same strong-measurement physics.
  - error_formula_fidelity: the reference error budget's quoted
    cavity-filter contribution (0.8%) corresponds to half the quoted kappa
    uncertainty, so the pinned 8.4% total is unreachable at the stated 2.6%.
"""

import time

import numpy as np

from . import detector_pipeline as dp
from . import lindblad_engine as le
from .analytic_spectrum import (
    SpectrumRecord,
    correlator_from_spectrum,
    finite_bandwidth_spectrum,
    ideal_lg,
    leggett_garg_curve,
    lg_max,
    sigma_z_spectrum,
    spectrum_normalization,
    steady_z,
)
from .config import ExperimentConfig
from .qubit_dynamics import (
    DriveParams,
    cavity_filter,
    fit_rabi_decay,
    measurement_dephasing_rate,
    saturation_population,
)

NBAR_GRID = (0.23, 0.78, 1.56, 3.9)
F_RABI_GRID = (2.5e6, 5e6, 10e6, 20e6)


def _band(f_max_hz=30e6, n_points=301):
    return 2.0 * np.pi * np.linspace(0.0, f_max_hz, n_points)


def _rabi_time_grid(tls, cavity, nbar, omega_rabi, dt_out=2e-9):
    """Horizon long enough to resolve the decay in either damping regime."""
    g_phi = tls.gamma_phi0 + measurement_dephasing_rate(
        nbar, cavity.chi0, cavity.kappa
    ) * cavity_filter(omega_rabi, cavity.kappa)
    g2 = tls.gamma1 / 2.0 + g_phi
    g_slow = 0.5 * (tls.gamma1 + g2)
    if g2 > omega_rabi:  # overdamped: Zeno-slowed rate
        rate = min(g_slow, omega_rabi ** 2 / g2 + tls.gamma1)
    else:
        rate = g_slow
    t_max = min(6e-6, max(4.0 / rate, 4.0 / g_slow, 1e-6))
    return np.arange(0.0, t_max, dt_out)


def _fitted_rabi_parameters(config, nbar, f_rabi):
    """Simulate the time-domain Rabi protocol and fit (gamma2, omega)."""
    tls, cavity = config.tls(), config.cavity()
    w_r = 2.0 * np.pi * f_rabi
    t_grid = _rabi_time_grid(tls, cavity, nbar, w_r)
    traj = le.ensemble_rabi(tls, cavity, nbar, w_r, t_grid)
    g_phi = tls.gamma_phi0 + measurement_dephasing_rate(
        nbar, cavity.chi0, cavity.kappa
    ) * cavity_filter(w_r, cavity.kappa)
    g2, w_eff = fit_rabi_decay(
        traj, tls, omega_guess=w_r, gamma2_guess=tls.gamma1 / 2.0 + g_phi
    )
    return g2, w_eff, traj


def oracle_cell(config, nbar, f_rabi, freqs=None):
    """One cross-oracle cell: L1 distance between the regression-theorem
    spectrum and the bandwidth-modified formula evaluated at the fitted
    (omega, gamma2) from the simulated time-domain Rabi protocol."""
    tls, cavity = config.tls(), config.cavity()
    if freqs is None:
        freqs = _band()
    record, diag = le.numeric_rabi_spectrum(tls, cavity, nbar,
                                            2.0 * np.pi * f_rabi, freqs)
    g2_fit, w_fit, _ = _fitted_rabi_parameters(config, nbar, f_rabi)
    g_phi_total = (g2_fit - tls.gamma1 / 2.0) / cavity_filter(w_fit, cavity.kappa)
    analytic = finite_bandwidth_spectrum(freqs, w_fit, tls.gamma1, g_phi_total,
                                         cavity.kappa)
    f_hz = freqs / (2.0 * np.pi)
    l1 = np.trapezoid(np.abs(record.density - analytic), f_hz) / np.trapezoid(
        analytic, f_hz
    )
    return {
        "nbar": nbar,
        "f_rabi": f_rabi,
        "l1": float(l1),
        "numeric": record,
        "analytic": analytic,
        "omega_fit": float(w_fit),
        "gamma2_fit": float(g2_fit),
        "nbar_measured": diag["nbar_measured"],
    }


def _quantum_target(config, record_len=1024, dt=10e-9):
    """Intrinsic spin spectrum (no detector filter) over the record band."""
    w = 2.0 * np.pi * np.fft.rfftfreq(record_len, dt)
    kappa = 2.0 * np.pi * config.kappa_hz
    dens = finite_bandwidth_spectrum(
        w, 2.0 * np.pi * config.f_rabi, 1.0 / config.t1,
        config.gamma_phi_total, kappa
    ) / cavity_filter(w, kappa)
    return SpectrumRecord(w, dens, meta={"kappa": kappa})


# --------------------------------------------------------------------------
# criteria


def criterion_ideal_lg(config):
    w_r = 2.0 * np.pi * 10e6
    peak = ideal_lg(np.pi / (3.0 * w_r), w_r)
    err = abs(peak - 1.5)
    taus = np.arange(0.0, 50e-9, 1e-9)  # half a Rabi period: unique maximum
    from .analytic_spectrum import LgCurve

    curve = LgCurve(taus, ideal_lg(taus, w_r), np.zeros_like(taus),
                    np.zeros_like(taus), np.zeros_like(taus))
    tau_star, f_star = lg_max(curve)
    ok = err < 1e-9 and abs(tau_star - np.pi / (3.0 * w_r)) < 0.2e-9 and abs(
        f_star - 1.5
    ) < 1e-4
    return {
        "name": "ideal_lg_maximum",
        "passed": bool(ok),
        "value": f"f(pi/3w)={peak:.12f}, refined max {f_star:.6f} at "
                 f"{tau_star*1e9:.2f} ns",
        "detail": f"|f-1.5|={err:.2e}",
    }


def criterion_decohered_lg(config):
    kappa = 2.0 * np.pi * config.kappa_hz
    w = 2.0 * np.pi * np.fft.rfftfreq(1024, 10e-9)
    measured = finite_bandwidth_spectrum(
        w, 2.0 * np.pi * config.f_rabi, 1.0 / config.t1,
        config.gamma_phi_total, kappa
    )
    corrected = SpectrumRecord(w, measured, meta={"kappa": kappa})
    curve, corr = dp.lg_curve_from_corrected(corrected, kappa,
                                             config.f_band_hz / 1e6 * 1e6)
    tau_star, f_star = lg_max(curve)
    ok = abs(f_star - 1.36) <= 0.03 and abs(tau_star - 16.7e-9) < 4e-9
    return {
        "name": "decohered_lg_prediction",
        "passed": bool(ok),
        "value": f"max f={f_star:.4f} at tau={tau_star*1e9:.2f} ns "
                 f"(K0={corr.values[0]:.4f})",
        "detail": "target 1.36 +- 0.03 near 17 ns",
    }


def criterion_saturation(config):
    val = saturation_population(config.p_e_thermal, 2.0 * np.pi * 10e6,
                                1.0 / config.t1, 1.0 / config.t2, 0.0)
    ok = abs(val - 0.496) <= 0.001
    return {
        "name": "saturation_population",
        "passed": bool(ok),
        "value": f"p_st={val:.4f}",
        "detail": "target 0.496 +- 0.001",
    }


def criterion_oracle_equivalence(config, quick=False):
    cells = ([(0.23, 5e6), (0.78, 10e6)] if quick
             else [(n, f) for n in NBAR_GRID for f in F_RABI_GRID])
    rows = []
    for nbar, f_rabi in cells:
        t0 = time.time()
        cell = oracle_cell(config, nbar, f_rabi)
        rows.append((nbar, f_rabi, cell["l1"], time.time() - t0))
    worst = max(r[2] for r in rows)
    ok = all(r[2] < 0.03 for r in rows)
    table = "\n".join(
        f"  nbar={r[0]:<5g} fR={r[1]/1e6:>4.1f} MHz  L1={r[2]*100:5.2f}%  "
        f"({r[3]:.0f}s)" for r in rows
    )
    return {
        "name": "oracle_equivalence",
        "passed": bool(ok),
        "value": f"{sum(r[2] < 0.03 for r in rows)}/{len(rows)} cells < 3% "
                 f"(worst {worst*100:.1f}%)",
        "detail": "formula evaluated at fitted (omega, gamma2) from the "
                  "simulated Rabi protocol; the 2.5 MHz column fails from "
                  "the closed form's own slow-drive approximation error "
                  "(vs sigma_z_regression_spectrum, present as nbar -> 0) "
                  "while the nbar=3.9 row and 20 MHz column are "
                  "non-Lorentzian from strong-measurement backaction "
                  "(see notes ledger)\n" + table,
    }


def criterion_emergent_dephasing(config, f_rabi_values=F_RABI_GRID,
                                 nbars=NBAR_GRID):
    tls, cavity = config.tls(), config.cavity()
    rows = []
    for f_rabi in f_rabi_values:
        w_r = 2.0 * np.pi * f_rabi
        fitted = []
        for nbar in nbars:
            g2, _, _ = _fitted_rabi_parameters(config, nbar, f_rabi)
            fitted.append(g2)
        slope = np.polyfit(nbars, fitted, 1)[0]
        expected = measurement_dephasing_rate(1.0, cavity.chi0, cavity.kappa
                                              ) * cavity_filter(w_r, cavity.kappa)
        rows.append((f_rabi, slope, expected, slope / expected - 1.0))
    ok = all(abs(r[3]) <= 0.10 for r in rows)
    table = "\n".join(
        f"  fR={r[0]/1e6:>4.1f} MHz  slope={r[1]:.3e}  formula={r[2]:.3e}  "
        f"dev={r[3]*100:+5.1f}%" for r in rows
    )
    return {
        "name": "emergent_dephasing_slope",
        "passed": bool(ok),
        "value": f"max |dev|={max(abs(r[3]) for r in rows)*100:.1f}% "
                 "(tolerance 10%)",
        "detail": "slope of fitted Gamma2 vs photon number against the "
                  "filtered weak-measurement formula; the deviation grows "
                  "with 2*omega_R/kappa and exceeds tolerance at the fastest "
                  "drive, consistent with the lineshape findings "
                  "(see notes ledger)\n" + table,
    }


def _zeno_decay_time(config, nbar, f_rabi=2.5e6):
    """Exponential decay time of the overdamped ensemble Rabi curve."""
    from scipy.optimize import least_squares

    tls, cavity = config.tls(), config.cavity()
    w_r = 2.0 * np.pi * f_rabi
    t_grid = _rabi_time_grid(tls, cavity, nbar, w_r, dt_out=4e-9)
    traj = le.ensemble_rabi(tls, cavity, nbar, w_r, t_grid)
    z = traj.z
    z_inf = z[-1]

    def resid(p):
        a, rate, off = p
        return a * np.exp(-rate * t_grid) + off - z

    fit = least_squares(resid, [z[0] - z_inf, 2.0 / t_grid[-1], z_inf])
    return 1.0 / fit.x[1]


def criterion_zeno(config, nbars=(5.0, 10.0, 20.0)):
    times = []
    for nbar in nbars:
        t0 = time.time()
        times.append(_zeno_decay_time(config, nbar))
    ok = all(t2 > t1 for t1, t2 in zip(times, times[1:]))
    table = ", ".join(f"nbar={n:g}: {t*1e9:.0f} ns" for n, t in zip(nbars, times))
    return {
        "name": "zeno_monotonicity",
        "passed": bool(ok),
        "value": table,
        "detail": "decay time must increase with nbar at fR=2.5 MHz",
    }


def criterion_end_to_end(config, n_records=None):
    cfg = dp.AcquisitionConfig(
        n_records=n_records or config.n_records,
        noise_to_peak=config.noise_to_peak,
        seed=config.seed,
        batch_size=8192,
    )
    target = _quantum_target(config)
    line = dp.LineResponse.flat()
    budget = dp.ErrorBudget()
    kappa = 2.0 * np.pi * config.kappa_hz
    s_on, s_off = dp.accumulate_quantum_fast(target, config.deltaV, cfg, line,
                                             pointer_angle=0.55)
    curve, diag = dp.run_lg_analysis((s_on, s_off), line, config.deltaV, kappa,
                                     budget, cfg, f_max_hz=config.f_band_hz)
    sigma_ok = diag["sigma_r_star"] <= 0.1
    thresh = 1.0 + diag["sys_down_star"] + 3.0 * diag["sigma_r_star"]
    violation_ok = diag["f_star"] > thresh
    k0_ok = abs(diag["k0"] - 1.0) <= 0.1
    ok = sigma_ok and violation_ok and k0_ok
    return {
        "name": "end_to_end_violation",
        "passed": bool(ok),
        "value": f"f*={diag['f_star']:.3f} at {diag['tau_star']*1e9:.1f} ns, "
                 f"threshold {thresh:.3f}, K0={diag['k0']:.3f}, "
                 f"sigma_r*={diag['sigma_r_star']:.3f}",
        "detail": f"{cfg.n_records} records (frequency-domain surrogate), "
                  f"significance {diag['significance']:.1f} sigma",
        "_curve": curve,
        "_diag": diag,
    }


def criterion_classical_controls(config, n_seeds=20, n_records=30000):
    kappa = 2.0 * np.pi * config.kappa_hz
    line = dp.LineResponse.flat()
    budget = dp.ErrorBudget()
    w_r = 2.0 * np.pi * config.f_rabi
    macro_k0, failures = [], []
    for model in ("macrospin", "telegraph"):
        for seed in range(n_seeds):
            cfg = dp.AcquisitionConfig(n_records=n_records, noise_to_peak=1.0,
                                       seed=seed, batch_size=512)
            if model == "macrospin":
                stream = dp.synthesize_macrospin_trace(
                    w_r, 1e6, config.deltaV, cfg, pointer_angle=0.55,
                    kappa=kappa, line=line)
            else:
                stream = dp.synthesize_telegraph_trace(
                    1e7, config.deltaV, cfg, pointer_angle=0.55,
                    kappa=kappa, line=line)
            curve, diag = dp.run_lg_analysis(stream, line, config.deltaV,
                                             kappa, budget, cfg,
                                             f_max_hz=config.f_band_hz)
            if model == "macrospin":
                macro_k0.append(diag["k0"])
            if diag["f_star"] > 1.0 + 2.0 * diag["sigma_r_star"]:
                failures.append((model, seed, diag["f_star"],
                                 diag["sigma_r_star"]))
    k0_mean = float(np.mean(macro_k0))
    ok = not failures and abs(k0_mean - 0.5) <= 0.05
    return {
        "name": "classical_controls",
        "passed": bool(ok),
        "value": f"macrospin K0={k0_mean:.3f} (target 0.50 +- 0.05); "
                 f"{len(failures)} violation(s) over {2*n_seeds} seeded runs",
        "detail": f"violating runs: {failures!r}" if failures else
                  "no control run exceeded 1 + 2 sigma_r",
    }


def criterion_error_formula(config, n_reps=400, n_records=200000):
    kappa = 2.0 * np.pi * config.kappa_hz
    line = dp.LineResponse.flat()
    target = _quantum_target(config)
    curves, sigma0s = [], []
    base_cfg = dict(n_records=n_records, noise_to_peak=config.noise_to_peak,
                    batch_size=8192)
    for rep in range(n_reps):
        cfg = dp.AcquisitionConfig(seed=10_000 + rep, **base_cfg)
        s_on, s_off = dp.accumulate_quantum_fast(target, config.deltaV, cfg,
                                                 line, pointer_angle=0.55)
        corrected = dp.correct_and_normalize(s_on, s_off, line, config.deltaV)
        sigma0s.append(dp.measure_sigma0(corrected))
        curve, _ = dp.lg_curve_from_corrected(corrected, kappa,
                                              config.f_band_hz)
        curves.append(curve.f)
    curves = np.array(curves)
    mc_sigma = curves.std(axis=0, ddof=1)
    cfg = dp.AcquisitionConfig(seed=0, **base_cfg)
    taus, formula = dp.statistical_sigma(float(np.mean(sigma0s)), kappa, cfg,
                                         config.f_band_hz)
    i2 = 1  # the violation grid point (tau ~ 17 ns)
    ratio = formula[i2] / mc_sigma[i2]
    stat_ok = abs(ratio - 1.0) <= 0.10

    # systematic budget at the violation point (deterministic chain)
    w = 2.0 * np.pi * np.fft.rfftfreq(1024, 10e-9)
    measured = finite_bandwidth_spectrum(
        w, 2.0 * np.pi * config.f_rabi, 1.0 / config.t1,
        config.gamma_phi_total, kappa)
    corrected = SpectrumRecord(w, measured, meta={"kappa": kappa})
    curve0, _ = dp.lg_curve_from_corrected(corrected, kappa, config.f_band_hz)
    budget = dp.ErrorBudget()
    sides = []
    for sgn in (+1.0, -1.0):
        alt, _ = dp.lg_curve_from_corrected(
            corrected, kappa * (1.0 + sgn * budget.dKappa_over_kappa),
            config.f_band_hz)
        sides.append(abs(alt.f[i2] - curve0.f[i2]) / curve0.f[i2])
    total = budget.dR_over_R + budget.dV2_over_V2 + max(sides)
    sys_ok = abs(total - 0.084) <= 0.001
    return {
        "name": "error_formula_fidelity",
        "passed": bool(stat_ok and sys_ok),
        "value": f"sigma formula/MC at 17 ns = {ratio:.3f} "
                 f"({n_reps} reps); total systematic {total*100:.2f}% "
                 "(target 8.4 +- 0.1)",
        "detail": "cavity-filter side contributions "
                  f"{sides[0]*100:.2f}%/{sides[1]*100:.2f}% with "
                  f"dkappa/kappa={budget.dKappa_over_kappa}; the reference "
                  "budget's 0.8% corresponds to dkappa/kappa=1.3% "
                  "(see notes ledger)",
        "_stat_ok": bool(stat_ok),
        "_sys_ok": bool(sys_ok),
    }


def criterion_normalization(config, n_sets=50, seed=1):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_sets):
        g1 = 10 ** rng.uniform(4.0, 7.5)
        g2 = 0.5 * g1 * 10 ** rng.uniform(0.0, 2.5)
        w_r = 10 ** rng.uniform(4.0, 8.5)
        got = spectrum_normalization(w_r, g1, g2)
        want = 1.0 - steady_z(w_r, g1, g2) ** 2
        worst = max(worst, abs(got - want) / want)
    ok = worst < 1e-4
    return {
        "name": "spectrum_normalization",
        "passed": bool(ok),
        "value": f"worst relative quadrature error {worst:.2e} over "
                 f"{n_sets} random parameter sets",
        "detail": "quadrature of the sigma_z spectrum vs 1 - z_st^2",
    }


# --------------------------------------------------------------------------
# runner

FULL_ORDER = (
    "ideal_lg_maximum",
    "decohered_lg_prediction",
    "saturation_population",
    "oracle_equivalence",
    "emergent_dephasing_slope",
    "zeno_monotonicity",
    "end_to_end_violation",
    "classical_controls",
    "error_formula_fidelity",
    "spectrum_normalization",
)


def run_acceptance(config=None, quick=False, printer=print):
    """Run the acceptance suite; returns (report dict, all_passed)."""
    config = config or ExperimentConfig()
    jobs = [
        lambda: criterion_ideal_lg(config),
        lambda: criterion_decohered_lg(config),
        lambda: criterion_saturation(config),
        lambda: criterion_oracle_equivalence(config, quick=quick),
        (lambda: criterion_emergent_dephasing(config)) if not quick else None,
        (lambda: criterion_zeno(config)) if not quick else None,
        lambda: criterion_end_to_end(config),
        (lambda: criterion_classical_controls(config)) if not quick else None,
        lambda: criterion_error_formula(
            config, n_reps=200 if quick else 400),
        lambda: criterion_normalization(config),
    ]
    results = []
    for name, job in zip(FULL_ORDER, jobs):
        if job is None:
            results.append({"name": name, "passed": None,
                            "value": "skipped in quick mode", "detail": ""})
            printer(f"SKIP {name}: quick mode")
            continue
        t0 = time.time()
        res = job()
        res["runtime_s"] = round(time.time() - t0, 1)
        results.append(res)
        status = "PASS" if res["passed"] else "FAIL"
        printer(f"{status} {res['name']}: {res['value']} "
                f"[{res['runtime_s']}s]")
    all_passed = all(r["passed"] for r in results if r["passed"] is not None)
    report = {
        "quick": quick,
        "all_passed": all_passed,
        "criteria": [{k: v for k, v in r.items() if not k.startswith("_")}
                     for r in results],
        "config": config.provenance(),
    }
    return report, all_passed
