"""Band-limited real control functions and their Fourier data.

Frequencies cross the API boundary as ordinary frequencies in MHz and are
converted once to angular frequencies in rad/us (omega = 2*pi*f).  All
analytic kinds expose exact integrals; tabulated signals are piecewise
linear, so their integrals are exact as well.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import integrate as _sciint

from .exceptions import NotPeriodicError, OutOfRangeError

TWO_PI = 2.0 * math.pi

# Relative Fourier amplitude below which a harmonic no longer counts toward
# the declared band of triangle/sawtooth waves.
BAND_AMPLITUDE_CUTOFF = 1e-3

# Minimum tabulated samples per fastest period 2*pi/omega_max.
MIN_SAMPLES_PER_PERIOD = 20


@dataclass(frozen=True)
class PeriodicFourierData:
    """Sine-series data: u(t) = dc/2 + sum_n A_n sin(n*w*t + phi_n)."""

    fundamental: float  # rad/us
    dc: float
    harmonics: tuple[tuple[int, float, float], ...]  # (n, amplitude, phase)

    def resynthesize(self, t: np.ndarray | float) -> np.ndarray | float:
        t = np.asarray(t, dtype=float)
        out = np.full_like(t, 0.5 * self.dc)
        for n, amp, phi in self.harmonics:
            out = out + amp * np.sin(n * self.fundamental * t + phi)
        return out


class ControlSignal:
    """Common interface for the control-function kinds.

    Subclasses define: evaluate/integrate, band (rad/us), max_abs, period
    (us, None when the components are incommensurate), and the in-period
    breakpoints where the waveform is non-smooth.
    """

    kind: str = "abstract"

    @property
    def band(self) -> tuple[float, float]:
        raise NotImplementedError

    @property
    def omega_min(self) -> float:
        return self.band[0]

    @property
    def omega_max(self) -> float:
        return self.band[1]

    @property
    def max_abs(self) -> float:
        raise NotImplementedError

    @property
    def period(self) -> float | None:
        """Fundamental period in us, or None for non-periodic signals."""
        raise NotImplementedError

    def breakpoints_in_period(self) -> tuple[float, ...]:
        return ()

    def evaluate(self, t):
        raise NotImplementedError

    def integrate(self, a: float, b: float) -> float:
        raise NotImplementedError

    def __call__(self, t):
        return self.evaluate(t)


def evaluate(u: ControlSignal, t):
    return u.evaluate(t)


def integrate(u: ControlSignal, a: float, b: float) -> float:
    if a > b:
        raise ValueError(f"integration bounds reversed: a={a} > b={b}")
    return u.integrate(a, b)


@dataclass(frozen=True)
class Sinusoid(ControlSignal):
    """u(t) = amp * sin(2*pi*freq_mhz * t + phase)."""

    amp: float = 1.0
    freq_mhz: float = 0.05
    phase: float = 0.0
    kind: str = field(default="sinusoid", init=False)

    def __post_init__(self):
        if self.freq_mhz <= 0:
            raise ValueError("sinusoid frequency must be positive")

    @property
    def omega(self) -> float:
        return TWO_PI * self.freq_mhz

    @property
    def band(self) -> tuple[float, float]:
        return (self.omega, self.omega)

    @property
    def max_abs(self) -> float:
        return abs(self.amp)

    @property
    def period(self) -> float:
        return 1.0 / self.freq_mhz

    def evaluate(self, t):
        return self.amp * np.sin(self.omega * np.asarray(t, dtype=float) + self.phase)

    def integrate(self, a: float, b: float) -> float:
        w = self.omega
        return float(self.amp / w * (math.cos(w * a + self.phase) - math.cos(w * b + self.phase)))


def _common_period(freqs_mhz: list[float]) -> float | None:
    """Fundamental period of commensurate tones; None when incommensurate."""
    fmin = min(freqs_mhz)
    fracs = []
    for f in freqs_mhz:
        r = f / fmin
        fr = Fraction(r).limit_denominator(1000)
        if abs(float(fr) - r) > 1e-9 * r:
            return None
        fracs.append(fr)
    lcm_q = math.lcm(*(fr.denominator for fr in fracs))
    ints = [fr.numerator * (lcm_q // fr.denominator) for fr in fracs]
    g = math.gcd(*ints)
    f0 = fmin * g / lcm_q
    return 1.0 / f0


@dataclass(frozen=True)
class SumOfSinusoids(ControlSignal):
    """Superposition of sinusoids, optionally normalized to max_abs = 1."""

    terms: tuple[Sinusoid, ...]
    normalize: bool = False
    kind: str = field(default="sum-of-sinusoids", init=False)

    def __post_init__(self):
        if not self.terms:
            raise ValueError("sum-of-sinusoids needs at least one term")
        object.__setattr__(self, "_norm", self._normalization())

    def _normalization(self) -> float:
        if not self.normalize:
            return 1.0
        return self._raw_sup()

    def _raw_sup(self) -> float:
        # Dense scan over the fundamental (or a long window when
        # incommensurate), refined by golden-section around the best sample.
        span = _common_period([s.freq_mhz for s in self.terms])
        if span is None:
            span = 50.0 / min(s.freq_mhz for s in self.terms)
        tt = np.linspace(0.0, span, 200_001)
        vals = np.abs(self._raw(tt))
        i = int(np.argmax(vals))
        lo, hi = tt[max(i - 1, 0)], tt[min(i + 1, tt.size - 1)]
        from scipy.optimize import minimize_scalar

        res = minimize_scalar(lambda t: -abs(float(self._raw(t))), bounds=(lo, hi), method="bounded")
        return max(float(vals[i]), -float(res.fun))

    def _raw(self, t):
        out = 0.0
        for s in self.terms:
            out = out + s.evaluate(t)
        return out

    @property
    def band(self) -> tuple[float, float]:
        omegas = [s.omega for s in self.terms]
        return (min(omegas), max(omegas))

    @property
    def max_abs(self) -> float:
        if self.normalize:
            return 1.0
        return self._raw_sup()

    @property
    def period(self) -> float | None:
        return _common_period([s.freq_mhz for s in self.terms])

    def evaluate(self, t):
        return self._raw(t) / self._norm

    def integrate(self, a: float, b: float) -> float:
        return sum(s.integrate(a, b) for s in self.terms) / self._norm


class _PiecewiseLinearPeriodic(ControlSignal):
    """Periodic piecewise-linear waveform given by in-period breakpoints."""

    def __init__(self, amp: float, freq_mhz: float, breaks: np.ndarray, values: np.ndarray):
        if freq_mhz <= 0:
            raise ValueError("frequency must be positive")
        self.amp = float(amp)
        self.freq_mhz = float(freq_mhz)
        self._T = 1.0 / freq_mhz
        self._breaks = np.asarray(breaks, dtype=float) * self._T  # includes 0 and T
        self._values = np.asarray(values, dtype=float) * self.amp
        # cumulative exact areas up to each breakpoint
        seg = 0.5 * (self._values[1:] + self._values[:-1]) * np.diff(self._breaks)
        self._cum = np.concatenate([[0.0], np.cumsum(seg)])

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self._values)))

    @property
    def period(self) -> float:
        return self._T

    @property
    def _n_band(self) -> int:
        raise NotImplementedError

    @property
    def band(self) -> tuple[float, float]:
        w0 = TWO_PI * self.freq_mhz
        return (w0, self._n_band * w0)

    def breakpoints_in_period(self) -> tuple[float, ...]:
        return tuple(b for b in self._breaks if 0.0 < b < self._T)

    def _eval_in_period(self, tau: np.ndarray) -> np.ndarray:
        return np.interp(tau, self._breaks, self._values)

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        return self._eval_in_period(np.mod(t, self._T))

    def _antiderivative(self, t: float) -> float:
        k, tau = divmod(t, self._T)
        i = int(np.searchsorted(self._breaks, tau, side="right")) - 1
        i = min(max(i, 0), len(self._breaks) - 2)
        t0, t1 = self._breaks[i], self._breaks[i + 1]
        v0, v1 = self._values[i], self._values[i + 1]
        dt = tau - t0
        slope = (v1 - v0) / (t1 - t0)
        partial = v0 * dt + 0.5 * slope * dt * dt
        return k * self._cum[-1] + self._cum[i] + partial

    def integrate(self, a: float, b: float) -> float:
        return self._antiderivative(b) - self._antiderivative(a)


class Triangle(_PiecewiseLinearPeriodic):
    """Triangle wave: 0 at t=0, peak +amp at T/4, -amp at 3T/4."""

    kind = "triangle"

    def __init__(self, amp: float = 1.0, freq_mhz: float = 0.02):
        super().__init__(amp, freq_mhz, np.array([0.0, 0.25, 0.75, 1.0]), np.array([0.0, 1.0, -1.0, 0.0]))

    @property
    def _n_band(self) -> int:
        # harmonic amplitudes fall off as 1/n^2 (odd n only)
        n = int(math.floor(1.0 / math.sqrt(BAND_AMPLITUDE_CUTOFF)))
        return n if n % 2 == 1 else n - 1


class Sawtooth(_PiecewiseLinearPeriodic):
    """Sawtooth wave: 0 at t=0, +amp at T/2-, jump to -amp, back to 0 at T."""

    kind = "sawtooth"

    def __init__(self, amp: float = 1.0, freq_mhz: float = 0.02):
        eps = 1e-12
        super().__init__(
            amp,
            freq_mhz,
            np.array([0.0, 0.5 - eps, 0.5 + eps, 1.0]),
            np.array([0.0, 1.0, -1.0, 0.0]),
        )

    @property
    def _n_band(self) -> int:
        # harmonic amplitudes fall off as 1/n
        return int(math.floor(1.0 / BAND_AMPLITUDE_CUTOFF))


class Tabulated(ControlSignal):
    """Uniformly sampled signal, linearly interpolated between samples."""

    kind = "tabulated"

    def __init__(
        self,
        times: np.ndarray,
        values: np.ndarray,
        band: tuple[float, float],
        period: float | None = None,
    ):
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or times.size < 2:
            raise ValueError("tabulated signal needs matching 1-d time/value arrays")
        dt = np.diff(times)
        if not np.allclose(dt, dt[0], rtol=1e-9, atol=1e-12):
            raise ValueError("tabulated signal requires a uniform time grid")
        w_min, w_max = band
        if not (0 < w_min <= w_max):
            raise ValueError(f"invalid band {band}")
        fastest = TWO_PI / w_max
        if dt[0] > fastest / MIN_SAMPLES_PER_PERIOD:
            raise ValueError(
                f"grid spacing {dt[0]:.4g} us too coarse for band edge {w_max:.4g} rad/us "
                f"(need >= {MIN_SAMPLES_PER_PERIOD} samples per {fastest:.4g} us)"
            )
        self.times = times
        self.values = values
        self._band = (float(w_min), float(w_max))
        self._period = period
        seg = 0.5 * (values[1:] + values[:-1]) * dt
        self._cum = np.concatenate([[0.0], np.cumsum(seg)])

    @property
    def band(self) -> tuple[float, float]:
        return self._band

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    @property
    def period(self) -> float | None:
        return self._period

    def _check_range(self, t: np.ndarray) -> None:
        slack = 1e-9 * (self.times[-1] - self.times[0])
        if np.any(t < self.times[0] - slack) or np.any(t > self.times[-1] + slack):
            raise OutOfRangeError(
                f"query outside tabulated range [{self.times[0]}, {self.times[-1]}] us"
            )

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        self._check_range(t)
        return np.interp(t, self.times, self.values)

    def _antiderivative(self, t: float) -> float:
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        i = min(max(i, 0), self.times.size - 2)
        dt = t - self.times[i]
        v0 = self.values[i]
        slope = (self.values[i + 1] - v0) / (self.times[i + 1] - self.times[i])
        return self._cum[i] + v0 * dt + 0.5 * slope * dt * dt

    def integrate(self, a: float, b: float) -> float:
        self._check_range(np.array([a, b]))
        return self._antiderivative(b) - self._antiderivative(a)


def periodic_fourier(u: ControlSignal, n_max: int, drop_below: float = 1e-12) -> PeriodicFourierData:
    """Sine-series coefficients of a periodic signal by direct quadrature.

    A_n and phi_n come from the cos/sin projections over one period; harmonics
    with amplitude below `drop_below` are omitted.
    """
    T = u.period
    if T is None:
        raise NotPeriodicError("signal has no declared fundamental period")
    w0 = TWO_PI / T
    pts = list(u.breakpoints_in_period())

    def _quad(f) -> float:
        with warnings.catch_warnings():
            # near machine precision quad reports roundoff; the result is still
            # far more accurate than the 1e-12 amplitude cutoff used below
            warnings.simplefilter("ignore", _sciint.IntegrationWarning)
            val, _ = _sciint.quad(f, 0.0, T, points=pts or None, limit=400, epsabs=1e-13, epsrel=1e-13)
        return val

    dc = (w0 / math.pi) * _quad(lambda t: float(u.evaluate(t)))
    harmonics = []
    for n in range(1, n_max + 1):
        ic = _quad(lambda t, n=n: float(u.evaluate(t)) * math.cos(n * w0 * t))
        isn = _quad(lambda t, n=n: float(u.evaluate(t)) * math.sin(n * w0 * t))
        amp = (w0 / math.pi) * math.hypot(ic, isn)
        if amp < drop_below:
            continue
        phi = math.atan2(ic, isn)
        harmonics.append((n, amp, phi))
    return PeriodicFourierData(w0, dc, tuple(harmonics))
