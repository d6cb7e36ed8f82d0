"""Pulse-width-modulated propagators for time-dependent Schrodinger equations."""

from .operators import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    EigenSystem,
    eig_hermitian,
    expm_hermitian_scaled,
    kron_power,
    nqubit_hamiltonian,
)
from .schedule import (
    PulseInterval,
    PwmParams,
    SwitchingSequence,
    build_switching_sequence,
    eap_widths,
    gaussian_realization,
    perturb_widths,
    schedule_controls,
)
from .signals import (
    ControlSignal,
    PeriodicFourierData,
    Sawtooth,
    Sinusoid,
    SumOfSinusoids,
    Tabulated,
    Triangle,
    periodic_fourier,
)
from .propagators import (
    PropagatorCache,
    SimulationResult,
    build_cache,
    pwc_propagate,
    pwm_propagate,
    reference_propagate,
    spo_propagate,
)
from .error_analysis import (
    ErrorCurve,
    error_operator,
    error_operator_check,
    infidelity,
    priori_error_direct,
    priori_error_series,
    pwm_state_trajectory,
)
from .experiments import (
    BenchRecord,
    NoiseStudyRecord,
    SweepSpec,
    run_bench,
    run_noise_study,
    run_sweep,
)
from .spectral import (
    Spectrum,
    cancellation_sum,
    fft_spectrum,
    gaussian_train_coefficients,
    rect_train_coefficients,
    scope_deviation,
    signal_coefficients,
)

from .config import RunConfig, load_config, parse_config, parse_signal

__version__ = "0.1.0"
