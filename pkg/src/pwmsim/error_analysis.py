"""Infidelity, the a priori error estimate (direct and series forms), and
the error-operator consistency machinery.

The a priori forms use the PWM-propagated state |psi(t')> = U_M(t')|psi0>,
which keeps them cheap; the reference propagator is only needed for the
actual infidelity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .exceptions import GridMismatchError, NotNormalizedError
from .operators import EigenSystem
from .propagators import PropagatorCache, SimulationResult, hamiltonian_at
from .schedule import SwitchingSequence
from .signals import ControlSignal, PeriodicFourierData

NORM_TOL = 1e-10


@dataclass(frozen=True)
class ErrorCurve:
    """Error values on a time grid with the run metadata that produced them."""

    times: np.ndarray
    values: np.ndarray
    form: str  # actual | priori_direct | priori_series
    meta: dict


def infidelity(psi_ref: np.ndarray, u_m: np.ndarray, psi0: np.ndarray) -> float:
    """epsilon = |1 - <psi_ref| U_M |psi0>| / 2."""
    for v in (psi_ref, psi0):
        if abs(np.linalg.norm(v) - 1.0) > NORM_TOL:
            raise NotNormalizedError(f"state norm {np.linalg.norm(v)} not within {NORM_TOL} of 1")
    return 0.5 * abs(1.0 - complex(np.vdot(psi_ref, u_m @ psi0)))


def _segments_until(
    seq: SwitchingSequence, cache: PropagatorCache, t: float
) -> Iterator[tuple[float, float, tuple[int, ...], EigenSystem, np.ndarray]]:
    """Yield (start, duration, sign, eigensystem, U(start,0)) up to time t."""
    dim = cache.dim
    u = np.eye(dim, dtype=np.complex128)
    pos = 0.0
    for dur, srow in zip(seq.durations, seq.signs):
        if pos >= t - 1e-13:
            return
        s = tuple(int(x) for x in srow)
        es = cache.get(s)
        d = min(dur, t - pos)
        yield pos, d, s, es, u
        dd = es.eigenvectors
        u = (dd * np.exp(-1j * d * es.eigenvalues)) @ (dd.conj().T @ u)
        pos += d


def _states_at(es: EigenSystem, u_start: np.ndarray, psi0: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """States inside one segment: D e^{-i dt L} D^dagger U_start psi0, batched."""
    psi_start = es.eigenvectors.conj().T @ (u_start @ psi0)
    phases = np.exp(-1j * np.outer(offsets, es.eigenvalues))
    return (phases * psi_start) @ es.eigenvectors.T


def _gl_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w  # mapped to [0, 1]


def priori_error_direct(
    seq: SwitchingSequence,
    controls: list[ControlSignal],
    hks: list[np.ndarray],
    psi0: np.ndarray,
    t: float,
    cache: PropagatorCache,
) -> float:
    """Half the time integral of <psi(t')|(H_M - H)(t')|psi(t')>.

    The integrand is discontinuous at segment edges, so the quadrature is
    Gauss-Legendre per segment with node counts scaled to the accumulated
    phase; the per-segment integrand itself is smooth.
    """
    lam_max = max(float(np.max(np.abs(es.eigenvalues))) for es in cache.entries.values())
    total = 0.0
    for start, dur, s, es, u_start in _segments_until(seq, cache, t):
        n = int(min(64, max(16, math.ceil(8.0 * dur * max(lam_max, 1.0)))))
        frac, w = _gl_nodes(n)
        offs = frac * dur
        tt = start + offs
        psis = _states_at(es, u_start, psi0, offs)
        integrand = np.zeros(n)
        for k, (uk, hk) in enumerate(zip(controls, hks)):
            coeff = s[k] * seq.params.xi[k] - np.asarray(uk.evaluate(tt), dtype=float)
            expval = np.real(np.einsum("qi,ij,qj->q", psis.conj(), hk, psis))
            integrand += coeff * expval
        total += dur * float(np.dot(w, integrand))
    return 0.5 * abs(total)


def pwm_state_trajectory(
    seq: SwitchingSequence,
    cache: PropagatorCache,
    psi0: np.ndarray,
    times: np.ndarray,
) -> np.ndarray:
    """|psi(t_j)> = U_M(t_j)|psi0> on an increasing grid, shape (n, d)."""
    times = np.asarray(times, dtype=float)
    out = np.empty((times.size, psi0.size), dtype=np.complex128)
    j = 0
    t_end = float(times[-1])
    for start, dur, _s, es, u_start in _segments_until(seq, cache, t_end + 1e-12):
        stop = start + dur
        hi = j
        while hi < times.size and times[hi] <= stop + 1e-13:
            hi += 1
        if hi > j:
            out[j:hi] = _states_at(es, u_start, psi0, times[j:hi] - start)
            j = hi
        if j >= times.size:
            break
    if j < times.size:
        raise GridMismatchError("trajectory grid extends past the sequence")
    return out


def priori_error_series(
    fourier: list[PeriodicFourierData],
    hks: list[np.ndarray],
    times: np.ndarray,
    psis: np.ndarray,
    m_pulses: int,
    omega_min: float,
    l_max: int = 50,
) -> float:
    """Series form of the a priori error, truncated at l_max.

    Term-by-term time integrals (trapezoid on the supplied grid) are summed
    over harmonics and over l; the series is integrated before summation
    because it is not absolutely convergent pointwise.
    """
    if l_max < 1:
        return 0.0
    if times.shape[0] != psis.shape[0]:
        raise GridMismatchError("time grid and state trajectory disagree")
    total = 0.0
    for data, hk in zip(fourier, hks):
        expval = np.real(np.einsum("qi,ij,qj->q", psis.conj(), hk, psis))
        for n, amp, phi in data.harmonics:
            w_h = n * data.fundamental
            slow = np.cos(w_h * times + phi + 0.25 * math.pi)
            # pulses per component period: M * omega_min / w_h
            m_eff_phi = (m_pulses * omega_min / w_h) * phi
            series = np.zeros_like(times)
            for l in range(1, l_max + 1):
                series += (-1.0) ** l * np.cos(l * (m_pulses * omega_min * times + m_eff_phi))
            total += amp * np.trapezoid(expval * slow * series, times)
    return math.sqrt(2.0) * abs(total)


def quadrature_grid(
    seq: SwitchingSequence, t: float, n_points: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Segment-aligned composite-Simpson nodes and weights over [0, t].

    Returns (times, weights, segment_ids); nodes at segment edges are
    duplicated so each segment carries its own constant H_M value.
    """
    spans = [(start, dur) for start, dur, *_ in _segments_until_plain(seq, t)]
    total = sum(d for _s, d in spans)
    times, weights, seg_ids = [], [], []
    for sid, (start, dur) in enumerate(spans):
        n_sub = max(4, int(round(n_points * dur / total / 2)) * 2)
        tt = start + np.linspace(0.0, dur, n_sub + 1)
        h = dur / n_sub
        w = np.full(n_sub + 1, 2.0)
        w[1::2] = 4.0
        w[0] = w[-1] = 1.0
        w *= h / 3.0
        times.append(tt)
        weights.append(w)
        seg_ids.append(np.full(n_sub + 1, sid))
    return np.concatenate(times), np.concatenate(weights), np.concatenate(seg_ids)


def _segments_until_plain(seq: SwitchingSequence, t: float):
    pos = 0.0
    for dur, srow in zip(seq.durations, seq.signs):
        if pos >= t - 1e-13:
            return
        d = min(dur, t - pos)
        yield pos, d, tuple(int(x) for x in srow)
        pos += d


def error_operator(
    times: np.ndarray,
    weights: np.ndarray,
    u_ref: np.ndarray,
    u_m: np.ndarray,
    h_vals: np.ndarray,
    h_m_vals: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Both forms of the error operator E(t) on a shared quadrature grid.

    Definition form: E = U_ref(t) - U_M(t).  Integral form:
    E = -i * sum_j w_j U_ref(t) U_ref(t_j)^dagger (H - H_M)(t_j) U_M(t_j).
    """
    n = times.shape[0]
    for arr in (weights, u_ref, u_m, h_vals, h_m_vals):
        if arr.shape[0] != n:
            raise GridMismatchError("quadrature arrays disagree on grid length")
    u_final = u_ref[-1]
    e_def = u_final - u_m[-1]
    integrand = np.matmul(u_ref.conj().swapaxes(1, 2), np.matmul(h_vals - h_m_vals, u_m))
    e_int = -1j * u_final @ np.tensordot(weights, integrand, axes=(0, 0))
    return e_def, e_int


def error_operator_check(
    h0: np.ndarray,
    hks: list[np.ndarray],
    controls: list[ControlSignal],
    seq: SwitchingSequence,
    cache: PropagatorCache,
    reference: "SimulationResult | None",
    t: float,
    n_points: int = 10_000,
) -> dict:
    """Evaluate both error-operator forms at time t and their disagreement."""
    from .propagators import pwm_propagate, reference_propagate

    times, weights, seg_ids = quadrature_grid(seq, t, n_points)
    uniq, inverse = np.unique(np.round(times, 13), return_inverse=True)
    cps = uniq[uniq > 1e-13]
    ref = reference_propagate(h0, hks, controls, cps)
    eye = np.eye(h0.shape[0], dtype=np.complex128)
    ref_by_time = [eye] + ref.propagators if uniq[0] <= 1e-13 else ref.propagators
    u_ref = np.array([ref_by_time[i] for i in inverse])

    # exact PWM propagators on the (duplicated) grid, one batch per segment
    dim = h0.shape[0]
    u_m = np.empty((times.size, dim, dim), dtype=np.complex128)
    for sid, (start, dur, _s, es, u_start) in enumerate(_segments_until(seq, cache, t)):
        mask = seg_ids == sid
        offs = np.clip(times[mask] - start, 0.0, dur)
        d = es.eigenvectors
        tmp = d.conj().T @ u_start
        phases = np.exp(-1j * np.outer(offs, es.eigenvalues))
        u_m[mask] = np.einsum("ij,qj,jk->qik", d, phases, tmp)

    h_vals = np.array([hamiltonian_at(h0, hks, controls, tt) for tt in times])
    h_m_vals = np.empty_like(h_vals)
    seg_signs = [s for _a, _b, s in _segments_until_plain(seq, t)]
    for j, sid in enumerate(seg_ids):
        h = h0.copy()
        for sk, x, hk in zip(seg_signs[sid], seq.params.xi, hks):
            if sk:
                h = h + sk * x * hk
        h_m_vals[j] = h
    e_def, e_int = error_operator(times, weights, u_ref, u_m, h_vals, h_m_vals)
    return {
        "e_definition": e_def,
        "e_integral": e_int,
        "max_abs_diff": float(np.max(np.abs(e_def - e_int))),
    }
