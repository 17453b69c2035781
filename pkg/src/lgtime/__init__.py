"""lgtime: Leggett-Garg ("Bell in time") test of a continuously and weakly
monitored driven two-level system.

Layers:
  qubit_dynamics    closed-form Bloch-sphere results and Rabi-decay fitting
  analytic_spectrum exact driven-TLS sigma_z spectrum and the LG functional
  lindblad_engine   independent TLS (x) cavity master-equation oracle
  detector_pipeline detector-trace synthesis, periodogram accumulation,
                    corrections, and the error budget
  validation        acceptance suite
  cli               command-line experiments (rabi / spectra / lg / validate)
"""

from .analytic_spectrum import (
    CorrelatorSeries,
    LgCurve,
    SpectrumRecord,
    correlator_from_spectrum,
    finite_bandwidth_spectrum,
    ideal_lg,
    leggett_garg_curve,
    lg_max,
    sigma_z_regression_spectrum,
    sigma_z_spectrum,
    spectrum_from_correlator,
    spectrum_normalization,
    steady_z,
)
from .config import ConfigError, ExperimentConfig, load_config
from .detector_pipeline import (
    AcquisitionConfig,
    ErrorBudget,
    LineResponse,
    accumulate_periodograms,
    accumulate_quantum_fast,
    correct_and_normalize,
    deconvolve_cavity,
    lg_curve_from_corrected,
    run_lg_analysis,
    statistical_sigma,
    synthesize_macrospin_trace,
    synthesize_quantum_trace,
    synthesize_telegraph_trace,
)
from .lindblad_engine import (
    build_generator,
    default_setup,
    ensemble_rabi,
    evolve,
    numeric_rabi_spectrum,
    steady_state,
    two_time_correlator,
)
from .qubit_dynamics import (
    CavityParams,
    DriveParams,
    ParameterError,
    SpinTrajectory,
    TlsParams,
    bloch_evolve,
    bloch_steady_state,
    cavity_filter,
    fit_rabi_decay,
    measurement_dephasing_rate,
    saturation_population,
)
from .validation import run_acceptance

__version__ = "0.1.0"
