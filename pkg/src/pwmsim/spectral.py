"""Fourier analysis of pulse trains and in/out-of-scope deviation metrics.

Closed-form coefficients exist for rectangular and Gaussian trains built on
one base period; sampled signals go through a normalized FFT.  Spectra are
two-sided over harmonics n of the base fundamental omega_min.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import FundamentalMismatchError, NonUniformGridError
from .schedule import PulseInterval, PwmParams
from .signals import ControlSignal, periodic_fourier

FUNDAMENTAL_RTOL = 1e-9


@dataclass(frozen=True)
class Spectrum:
    """Two-sided harmonic coefficients c_n, n in [-n_max, n_max]."""

    fundamental: float  # rad/us
    coefficients: np.ndarray  # complex, shape (2*n_max + 1,)
    scope: float  # Omega = M * omega_min, rad/us

    @property
    def n_max(self) -> int:
        return (self.coefficients.shape[0] - 1) // 2

    def indices(self) -> np.ndarray:
        return np.arange(-self.n_max, self.n_max + 1)

    def coefficient(self, n: int) -> complex:
        if abs(n) > self.n_max:
            raise IndexError(f"harmonic {n} outside [-{self.n_max}, {self.n_max}]")
        return complex(self.coefficients[n + self.n_max])

    def magnitudes(self) -> np.ndarray:
        return np.abs(self.coefficients)


def default_n_max(params: PwmParams) -> int:
    # covers the l = 1..4 sideband families at l*M +- 1
    return 5 * params.m_pulses


def _check_one_period(intervals: list[PulseInterval], params: PwmParams) -> None:
    t_end = intervals[-1].start + intervals[-1].length
    if len(intervals) > params.m_pulses or t_end > params.period * (1 + 1e-9):
        raise ValueError("train coefficients expect intervals from one base period")


def rect_train_coefficients(
    intervals: list[PulseInterval],
    params: PwmParams,
    n_max: int | None = None,
    control_index: int = 0,
) -> Spectrum:
    """Exact Fourier coefficients of the rectangular pulse train.

    c_0 = (xi/T) * sum_m s_m t_p^(m);
    c_n = sum_m s_m (xi/(n pi)) sin(n w_min t_p^(m) / 2) e^{-i n w_min c_m}.
    """
    _check_one_period(intervals, params)
    if n_max is None:
        n_max = default_n_max(params)
    xi = params.xi[control_index]
    w0 = params.omega_min
    widths = np.array([iv.width for iv in intervals])
    signs = np.array([iv.sign for iv in intervals], dtype=float)
    centers = np.array([iv.center for iv in intervals])
    coeffs = np.zeros(2 * n_max + 1, dtype=np.complex128)
    coeffs[n_max] = xi / params.period * np.sum(signs * widths)
    for n in range(1, n_max + 1):
        c = np.sum(signs * (xi / (n * math.pi)) * np.sin(0.5 * n * w0 * widths) * np.exp(-1j * n * w0 * centers))
        coeffs[n_max + n] = c
        coeffs[n_max - n] = np.conj(c)
    return Spectrum(w0, coeffs, params.scope)


def gaussian_train_coefficients(
    intervals: list[PulseInterval],
    params: PwmParams,
    n_max: int | None = None,
    control_index: int = 0,
) -> tuple[Spectrum, Spectrum]:
    """Coefficients of the Gaussian train, exact and width-damping-free.

    Exact: c_n = (xi/T) sum_m s_m t_p^(m) exp(-(n w_min t_p^(m))^2 / 4 pi)
    times the center phase.  The second spectrum drops the damping factor,
    which is the small-width approximation shared with the rectangular train.
    """
    _check_one_period(intervals, params)
    if n_max is None:
        n_max = default_n_max(params)
    xi = params.xi[control_index]
    w0 = params.omega_min
    widths = np.array([iv.width for iv in intervals])
    signs = np.array([iv.sign for iv in intervals], dtype=float)
    centers = np.array([iv.center for iv in intervals])
    exact = np.zeros(2 * n_max + 1, dtype=np.complex128)
    approx = np.zeros_like(exact)
    for n in range(-n_max, n_max + 1):
        phase = np.exp(-1j * n * w0 * centers)
        damp = np.exp(-((n * w0 * widths) ** 2) / (4.0 * math.pi))
        exact[n + n_max] = xi / params.period * np.sum(signs * widths * damp * phase)
        approx[n + n_max] = xi / params.period * np.sum(signs * widths * phase)
    return Spectrum(w0, exact, params.scope), Spectrum(w0, approx, params.scope)


def gaussian_damping_factor(n: int, omega_min: float, width: float) -> float:
    """exp(-(n w_min t_p)^2 / 4 pi), the Gaussian spectral width penalty."""
    return math.exp(-((n * omega_min * width) ** 2) / (4.0 * math.pi))


def signal_coefficients(u: ControlSignal, params: PwmParams, n_max: int | None = None) -> Spectrum:
    """Two-sided coefficients of a periodic control on the base fundamental."""
    if n_max is None:
        n_max = default_n_max(params)
    data = periodic_fourier(u, n_max)
    ratio = data.fundamental / params.omega_min
    steps_per = round(ratio)
    if abs(ratio - steps_per) > FUNDAMENTAL_RTOL * ratio or steps_per < 1:
        raise FundamentalMismatchError(
            f"signal fundamental {data.fundamental} not a harmonic of base {params.omega_min}"
        )
    coeffs = np.zeros(2 * n_max + 1, dtype=np.complex128)
    coeffs[n_max] = 0.5 * data.dc
    for n, amp, phi in data.harmonics:
        nn = n * steps_per
        if nn > n_max:
            continue
        # A sin(x + phi) = (A/2i) e^{i phi} e^{ix} + c.c.
        c = amp / 2j * np.exp(1j * phi)
        coeffs[n_max + nn] += c
        coeffs[n_max - nn] += np.conj(c)
    return Spectrum(params.omega_min, coeffs, params.scope)


def fft_spectrum(values: np.ndarray, dt: float, scope: float = math.inf) -> Spectrum:
    """DFT normalized so a unit sinusoid peaks at 0.5 at +-f.

    The fundamental is 2*pi/(N*dt); harmonics run to the Nyquist index.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size < 2:
        raise NonUniformGridError("need a 1-d uniform series of at least 2 samples")
    if dt <= 0:
        raise NonUniformGridError("sample spacing must be positive")
    n = values.size
    raw = np.fft.fft(values) / n
    n_max = (n - 1) // 2
    coeffs = np.zeros(2 * n_max + 1, dtype=np.complex128)
    coeffs[n_max] = raw[0]
    for k in range(1, n_max + 1):
        coeffs[n_max + k] = raw[k]
        coeffs[n_max - k] = raw[n - k]
    return Spectrum(2.0 * math.pi / (n * dt), coeffs, scope)


def sideband_indices(n: int, m_pulses: int, l_max: int = 10) -> bool:
    """True when |n| = l*M +- 1 for some l >= 1 (the residual peak family)."""
    a = abs(n)
    for l in range(1, l_max + 1):
        if a in (l * m_pulses - 1, l * m_pulses + 1):
            return True
        if l * m_pulses - 1 > a:
            break
    return False


def scope_deviation(target: Spectrum, approx: Spectrum, scope: float) -> tuple[float, float]:
    """Max-abs coefficient deviation inside and outside the frequency scope.

    The in-scope max skips the l*M +- 1 boundary family, which is where the
    modulation residue lives by construction.
    """
    if abs(target.fundamental - approx.fundamental) > FUNDAMENTAL_RTOL * target.fundamental:
        raise FundamentalMismatchError(
            f"fundamentals differ: {target.fundamental} vs {approx.fundamental}"
        )
    w0 = target.fundamental
    m_pulses = max(1, int(round(scope / w0)))
    n_max = min(target.n_max, approx.n_max)
    in_scope = 0.0
    out_scope = 0.0
    for n in range(-n_max, n_max + 1):
        dev = abs(target.coefficient(n) - approx.coefficient(n))
        if abs(n) * w0 < scope and not sideband_indices(n, m_pulses):
            in_scope = max(in_scope, dev)
        else:
            out_scope = max(out_scope, dev)
    return in_scope, out_scope


def cancellation_sum(m_pulses: int, n: int) -> complex:
    """sum_{m=1}^{M} exp(i 2 pi (1-n) m / M): M on resonance, else 0."""
    if m_pulses < 1:
        raise ValueError("M must be >= 1")
    m = np.arange(1, m_pulses + 1)
    # reduce the offset mod M first so the phase arguments stay small
    r = (1 - n) % m_pulses
    return complex(np.sum(np.exp(1j * 2.0 * math.pi * r * m / m_pulses)))
