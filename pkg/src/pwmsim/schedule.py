"""PWM pulse schedules: equal-area widths, merged switching sequences,
Gaussian realizations, and switching-noise perturbations.

Interval m spans [(m-1)*tau, m*tau] with its pulse centered at (m-1/2)*tau,
so the area window and the pulse center refer to the same interval.  A
trailing partial interval (when t_total is not a multiple of tau) keeps the
same grid and applies the area rule over its actual length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import AmplitudeTooSmallError, GridMismatchError
from .signals import TWO_PI, ControlSignal, Tabulated

ZERO_AREA_EPS = 1e-15
EDGE_EPS = 1e-13


@dataclass(frozen=True)
class PwmParams:
    """Grid parameters of an M-step PWM transformation."""

    m_pulses: int  # pulses per base period
    xi: tuple[float, ...]  # pulse amplitude per control
    period: float  # base period T = 2*pi/omega_min, us
    t_total: float  # simulation horizon, us

    def __post_init__(self):
        if self.m_pulses < 1:
            raise ValueError("pulse number M must be >= 1")
        if self.period <= 0 or self.t_total < 0:
            raise ValueError("period must be positive and horizon non-negative")

    @property
    def tau(self) -> float:
        return self.period / self.m_pulses

    @property
    def omega_min(self) -> float:
        return TWO_PI / self.period

    @property
    def scope(self) -> float:
        """Frequency scope Omega = M * omega_min, rad/us."""
        return self.m_pulses * self.omega_min

    @classmethod
    def for_controls(
        cls,
        controls: list[ControlSignal],
        m_pulses: int,
        t_total: float,
        xi: list[float] | None = None,
    ) -> "PwmParams":
        """Grid from the controls' shared band; default xi_k = max|u_k|."""
        w_min = min(u.omega_min for u in controls)
        if xi is None:
            xi = [u.max_abs for u in controls]
        return cls(m_pulses, tuple(float(x) for x in xi), TWO_PI / w_min, t_total)


@dataclass(frozen=True)
class PulseInterval:
    """One grid interval of one control: a centered pulse of given width."""

    index: int
    start: float  # us
    length: float  # us (tau, except a trailing partial interval)
    width: float  # |t_p|, us
    sign: int  # -1, 0, +1

    @property
    def center(self) -> float:
        return self.start + 0.5 * self.length

    @property
    def area(self) -> float:
        return self.sign * self.width


def eap_widths(
    u: ControlSignal,
    params: PwmParams,
    control_index: int = 0,
    clamp: bool = False,
) -> list[PulseInterval]:
    """Pulse widths by the equal-area rule: |t_p| = |integral of u| / xi.

    With clamp=False, xi below sup|u| raises (a width could exceed the
    interval); with clamp=True such widths are clamped to the interval length
    so infeasible amplitudes can still be studied.
    """
    xi = params.xi[control_index]
    if xi <= 0:
        raise AmplitudeTooSmallError(f"pulse amplitude must be positive, got {xi}")
    if not clamp and xi < u.max_abs * (1 - 1e-12):
        raise AmplitudeTooSmallError(
            f"xi={xi} below sup|u|={u.max_abs}: equal-area widths would exceed tau"
        )
    tau = params.tau
    n_full = int(math.floor(params.t_total / tau + 1e-12))
    edges = [i * tau for i in range(n_full + 1)]
    if params.t_total - edges[-1] > EDGE_EPS:
        edges.append(params.t_total)
    intervals = []
    for i in range(len(edges) - 1):
        a, b = edges[i], edges[i + 1]
        area = u.integrate(a, b)
        length = b - a
        if abs(area) < ZERO_AREA_EPS * max(tau, 1.0):
            intervals.append(PulseInterval(i, a, length, 0.0, 0))
            continue
        width = abs(area) / xi
        if width > length:
            if not clamp and width > length * (1 + 1e-9):
                raise AmplitudeTooSmallError(
                    f"interval {i}: width {width} exceeds length {length} (xi too small)"
                )
            width = length
        intervals.append(PulseInterval(i, a, length, width, 1 if area > 0 else -1))
    return intervals


@dataclass(frozen=True)
class SwitchingSequence:
    """Merged piecewise-constant switching sequence over all controls.

    Each segment holds a duration and the active sign vector s in
    {-1,0,+1}^K; the effective Hamiltonian of a segment is
    H0 + sum_k s_k * xi_k * H_k.
    """

    durations: np.ndarray  # shape (S,)
    signs: np.ndarray  # shape (S, K), int8
    params: PwmParams
    intervals: tuple[tuple[PulseInterval, ...], ...]  # per control, for rebuilds
    clamp_events: int = 0

    @property
    def total(self) -> float:
        return float(np.sum(self.durations))

    @property
    def n_controls(self) -> int:
        return self.signs.shape[1]

    def sign_vectors(self) -> set[tuple[int, ...]]:
        return {tuple(int(s) for s in row) for row in self.signs}

    def resample(self, times: np.ndarray) -> np.ndarray:
        """Sign vector active at each query time, shape (len(times), K)."""
        edges = np.concatenate([[0.0], np.cumsum(self.durations)])
        idx = np.clip(np.searchsorted(edges, times, side="right") - 1, 0, len(self.durations) - 1)
        return self.signs[idx]


def build_switching_sequence(
    per_control: list[list[PulseInterval]],
    params: PwmParams,
    clamp_events: int = 0,
) -> SwitchingSequence:
    """Merge per-control centered pulses into one segment list.

    Segment boundaries are the sorted union of all pulse edges inside each
    interval; for a single control this is the free/pulse/free three-factor
    layout with t_f = (tau - t_p)/2.
    """
    n_intervals = len(per_control[0])
    for ivs in per_control[1:]:
        if len(ivs) != n_intervals:
            raise GridMismatchError("controls disagree on interval count")
        for a, b in zip(per_control[0], ivs):
            if abs(a.start - b.start) > EDGE_EPS or abs(a.length - b.length) > EDGE_EPS:
                raise GridMismatchError("controls disagree on the tau grid")
    durations: list[float] = []
    signs: list[tuple[int, ...]] = []
    for i in range(n_intervals):
        ivs = [pc[i] for pc in per_control]
        start = ivs[0].start
        end = start + ivs[0].length
        cuts = {start, end}
        for iv in ivs:
            if iv.width > 0.0:
                cuts.add(max(start, iv.center - 0.5 * iv.width))
                cuts.add(min(end, iv.center + 0.5 * iv.width))
        edges = sorted(cuts)
        for a, b in zip(edges[:-1], edges[1:]):
            if b - a <= EDGE_EPS:
                continue
            mid = 0.5 * (a + b)
            s = tuple(
                iv.sign if (iv.width > 0.0 and abs(mid - iv.center) < 0.5 * iv.width) else 0
                for iv in ivs
            )
            durations.append(b - a)
            signs.append(s)
    return SwitchingSequence(
        np.asarray(durations, dtype=float),
        np.asarray(signs, dtype=np.int8),
        params,
        tuple(tuple(pc) for pc in per_control),
        clamp_events,
    )


def schedule_controls(
    controls: list[ControlSignal],
    params: PwmParams,
    clamp: bool = False,
) -> SwitchingSequence:
    """eap_widths for every control followed by the segment merge."""
    per_control = [eap_widths(u, params, k, clamp=clamp) for k, u in enumerate(controls)]
    events = 0
    if clamp:
        for k, (u, ivs) in enumerate(zip(controls, per_control)):
            for iv in ivs:
                if iv.sign != 0:
                    raw = abs(u.integrate(iv.start, iv.start + iv.length)) / params.xi[k]
                    if raw > iv.length * (1 + 1e-12):
                        events += 1
    return build_switching_sequence(per_control, params, clamp_events=events)


def gaussian_realization(
    intervals: list[PulseInterval],
    params: PwmParams,
    control_index: int = 0,
    points_per_tau: int = 64,
) -> Tabulated:
    """Smooth realization: one Gaussian per pulse, same area xi*t_p.

    Each pulse becomes s*xi*exp(-pi*(t-center)^2/t_p^2), whose full-line
    integral is exactly xi*t_p; peak height equals the pulse amplitude.
    """
    xi = params.xi[control_index]
    t_end = intervals[-1].start + intervals[-1].length
    n = max(2, int(round(points_per_tau * t_end / params.tau)) + 1)
    tt = np.linspace(0.0, t_end, n)
    vals = np.zeros_like(tt)
    for iv in intervals:
        if iv.width <= 0.0:
            continue
        vals += iv.sign * xi * np.exp(-math.pi * (tt - iv.center) ** 2 / iv.width**2)
    return Tabulated(tt, vals, band=(params.omega_min, params.scope))


def perturb_widths(seq: SwitchingSequence, delta_amp: float, seed: int) -> SwitchingSequence:
    """Independent uniform width noise on every active pulse.

    Each active pulse width gets delta ~ U[-delta_amp, +delta_amp]; the
    flanking free time absorbs -delta/2 on each side so the interval still
    sums to its length.  Widths are clamped to [0, length]; clamp events are
    counted on the returned sequence, not raised.
    """
    if delta_amp < 0:
        raise ValueError("noise amplitude must be non-negative")
    rng = np.random.default_rng(seed)
    clamps = seq.clamp_events
    new_per_control = []
    for ivs in seq.intervals:
        out = []
        for iv in ivs:
            if iv.sign == 0 or delta_amp == 0.0:
                out.append(iv)
                continue
            delta = rng.uniform(-delta_amp, delta_amp)
            w = iv.width + delta
            if w < 0.0 or w > iv.length:
                clamps += 1
                w = min(max(w, 0.0), iv.length)
            out.append(PulseInterval(iv.index, iv.start, iv.length, w, iv.sign))
        new_per_control.append(out)
    return build_switching_sequence(new_per_control, seq.params, clamp_events=clamps)
