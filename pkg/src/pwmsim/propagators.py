"""Time-evolution engines.

Four steppers share the exponential-of-Hermitian primitive:

* pwm_propagate   -- switching sequence over a pre-diagonalized cache;
* pwc_propagate   -- exponential midpoint rule, fresh eigendecomposition
                     per step (the cost model under comparison);
* spo_propagate   -- symmetric second-order splitting with equal-area
                     weight on the control factor;
* reference_propagate -- Richardson-refined midpoint stepping, the ground
                     truth for error measurements.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    CacheMissError,
    DimensionMismatchError,
    NoConvergenceError,
)
from .operators import EigenSystem, check_hermitian, eig_hermitian
from .schedule import SwitchingSequence
from .signals import TWO_PI, ControlSignal

SPLIT_EPS = 1e-12
REFERENCE_TOL = 1e-10
REFERENCE_CAP = 2**14
_EIGH_CHUNK = 65536


@dataclass
class PropagatorCache:
    """Eigendecompositions of the finite constant-Hamiltonian set."""

    entries: dict[tuple[int, ...], EigenSystem]
    dim: int
    build_seconds: float = 0.0

    def __contains__(self, s: tuple[int, ...]) -> bool:
        return s in self.entries

    def get(self, s: tuple[int, ...]) -> EigenSystem:
        try:
            return self.entries[s]
        except KeyError:
            raise CacheMissError(f"no cache entry for sign vector {s}") from None


def build_cache(
    h0: np.ndarray,
    hks: list[np.ndarray],
    xi: tuple[float, ...],
    signs_needed: set[tuple[int, ...]],
) -> PropagatorCache:
    """Pre-diagonalize H0 + sum_k s_k xi_k H_k for every needed sign vector."""
    check_hermitian(h0)
    dim = h0.shape[0]
    for hk in hks:
        if hk.shape != h0.shape:
            raise DimensionMismatchError(f"control operator shape {hk.shape} != {h0.shape}")
        check_hermitian(hk)
    t0 = time.perf_counter()
    entries = {}
    for s in sorted(signs_needed):
        h = h0.copy()
        for sk, x, hk in zip(s, xi, hks):
            if sk:
                h = h + sk * x * hk
        entries[s] = eig_hermitian(h)
    return PropagatorCache(entries, dim, time.perf_counter() - t0)


@dataclass
class SimulationResult:
    """Propagators U(t,0) at the requested checkpoints, plus run metadata."""

    times: np.ndarray  # us, strictly increasing
    propagators: list[np.ndarray]
    method: str
    wall_seconds: float
    n_steps: int
    extras: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.propagators[0].shape[0] if self.propagators else 0

    def states(self, psi0: np.ndarray) -> list[np.ndarray]:
        return [u @ psi0 for u in self.propagators]

    def final(self) -> np.ndarray:
        return self.propagators[-1]


def _check_checkpoints(checkpoints, total: float) -> np.ndarray:
    cps = np.asarray(checkpoints, dtype=float)
    if cps.size == 0 or np.any(np.diff(cps) <= 0):
        raise ValueError("checkpoints must be non-empty and strictly increasing")
    if cps[0] < -SPLIT_EPS or cps[-1] > total * (1 + 1e-9) + SPLIT_EPS:
        raise ValueError(f"checkpoints outside [0, {total}]")
    return cps


def pwm_propagate(
    seq: SwitchingSequence,
    cache: PropagatorCache,
    checkpoints,
) -> SimulationResult:
    """Accumulate the segment product U = prod_j D e^{-i dur_j L} D^dagger.

    Checkpoints that fall inside a segment reuse the segment's eigensystem
    with the partial duration, which is exact.
    """
    cps = _check_checkpoints(checkpoints, seq.total)
    dim = cache.dim
    t0 = time.perf_counter()
    durs = np.asarray(seq.durations, dtype=float)
    edges = np.concatenate([[0.0], np.cumsum(durs)])
    total = float(edges[-1])

    # encode sign vectors base-3 so the segment -> eigensystem map is array work
    base = 3 ** np.arange(seq.signs.shape[1], dtype=np.int64)
    codes = (seq.signs.astype(np.int64) + 1) @ base
    by_code = {int((np.asarray(k, dtype=np.int64) + 1) @ base): es for k, es in cache.entries.items()}

    # cut the segment grid at every checkpoint, dropping empty slivers
    grid = np.concatenate([edges, np.clip(cps, 0.0, total)])
    grid.sort(kind="stable")
    grid = grid[np.concatenate([[True], np.diff(grid) > SPLIT_EPS])]
    segd = np.diff(grid)
    mids = 0.5 * (grid[:-1] + grid[1:])
    seg_codes = codes[np.clip(np.searchsorted(edges, mids) - 1, 0, durs.size - 1)]
    bounds = []
    for c in cps:
        i = int(np.argmin(np.abs(grid - min(c, total))))
        bounds.append(i)

    # one batched exponential per distinct sign vector
    mats = np.empty((segd.size, dim, dim), dtype=np.complex128)
    for code in np.unique(seg_codes):
        es = by_code.get(int(code))
        if es is None:
            s = tuple(int(d) - 1 for d in np.base_repr(int(code), 3).zfill(base.size)[::-1])
            raise CacheMissError(f"no cache entry for sign vector {s}")
        mask = seg_codes == code
        phases = np.exp(-1j * np.outer(segd[mask], es.eigenvalues))
        mats[mask] = (es.eigenvectors[None, :, :] * phases[:, None, :]) @ es.eigenvectors.conj().T

    out: list[np.ndarray] = []
    u = np.eye(dim, dtype=np.complex128)
    prev = 0
    for b in bounds:
        if b > prev:
            u = _ordered_product(mats[prev:b]) @ u
            prev = b
        out.append(u.copy())
    return SimulationResult(cps, out, "pwm", time.perf_counter() - t0, int(segd.size))


def hamiltonian_at(
    h0: np.ndarray, hks: list[np.ndarray], controls: list[ControlSignal], t: float
) -> np.ndarray:
    h = h0.copy()
    for u, hk in zip(controls, hks):
        h = h + float(u.evaluate(t)) * hk
    return h


def _step_edges(total: float, tau: float, cps: np.ndarray) -> np.ndarray:
    n = int(math.ceil(total / tau - 1e-9))
    edges = set(np.round(np.arange(n + 1) * tau, 15))
    edges.add(total)
    for c in cps:
        edges.add(float(c))
    arr = np.array(sorted(e for e in edges if -SPLIT_EPS <= e <= total + SPLIT_EPS))
    keep = np.concatenate([[True], np.diff(arr) > SPLIT_EPS])
    return arr[keep]


def pwc_propagate(
    h0: np.ndarray,
    hks: list[np.ndarray],
    controls: list[ControlSignal],
    tau: float,
    checkpoints,
    duration_noise: np.ndarray | None = None,
) -> SimulationResult:
    """Exponential midpoint rule with a fresh eigendecomposition per step.

    duration_noise, when given, adds delta_j to step j's duration while the
    midpoint stays on the nominal grid (the switching-noise model for the
    piecewise-constant baseline).
    """
    if tau <= 0:
        raise ValueError("step size must be positive")
    cps = _check_checkpoints(checkpoints, float(checkpoints[-1]))
    total = float(cps[-1])
    edges = _step_edges(total, tau, cps)
    out: list[np.ndarray] = []
    t0 = time.perf_counter()
    u = np.eye(h0.shape[0], dtype=np.complex128)
    ci = 0
    while ci < cps.size and cps[ci] <= SPLIT_EPS:
        out.append(u.copy())
        ci += 1
    for j in range(edges.size - 1):
        a, b = edges[j], edges[j + 1]
        dur = b - a
        if duration_noise is not None:
            dur = max(dur + float(duration_noise[j]), 0.0)
        h = hamiltonian_at(h0, hks, controls, 0.5 * (a + b))
        es = eig_hermitian(h)
        d = es.eigenvectors
        u = (d * np.exp(-1j * dur * es.eigenvalues)) @ (d.conj().T @ u)
        while ci < cps.size and abs(cps[ci] - b) <= SPLIT_EPS:
            out.append(u.copy())
            ci += 1
    return SimulationResult(cps, out, "pwc", time.perf_counter() - t0, edges.size - 1)


def spo_propagate(
    h0: np.ndarray,
    hks: list[np.ndarray],
    controls: list[ControlSignal],
    tau: float,
    checkpoints,
) -> SimulationResult:
    """Second-order splitting e^{-i tau/2 H0} e^{-i sum_k a_k H_k} e^{-i tau/2 H0}.

    a_k is the equal-area integral of u_k over the step, making this the
    zero-width infinite-amplitude limit of the PWM step.
    """
    if tau <= 0:
        raise ValueError("step size must be positive")
    cps = _check_checkpoints(checkpoints, float(checkpoints[-1]))
    total = float(cps[-1])
    edges = _step_edges(total, tau, cps)
    es0 = eig_hermitian(h0)
    half_cache: dict[float, np.ndarray] = {}
    out: list[np.ndarray] = []
    t0 = time.perf_counter()
    u = np.eye(h0.shape[0], dtype=np.complex128)
    ci = 0
    while ci < cps.size and cps[ci] <= SPLIT_EPS:
        out.append(u.copy())
        ci += 1
    for j in range(edges.size - 1):
        a, b = edges[j], edges[j + 1]
        dur = b - a
        key = round(dur, 15)
        if key not in half_cache:
            half_cache[key] = es0.expm_scaled(0.5 * dur)
        half = half_cache[key]
        hmid = np.zeros_like(h0)
        for uk, hk in zip(controls, hks):
            hmid = hmid + uk.integrate(a, b) * hk
        mid = eig_hermitian(hmid).expm_scaled(1.0)
        u = half @ (mid @ (half @ u))
        while ci < cps.size and abs(cps[ci] - b) <= SPLIT_EPS:
            out.append(u.copy())
            ci += 1
    return SimulationResult(cps, out, "spo", time.perf_counter() - t0, edges.size - 1)


def _ordered_product(mats: np.ndarray) -> np.ndarray:
    """mats[-1] @ ... @ mats[0] by pairwise reduction (time-ascending input)."""
    while mats.shape[0] > 1:
        if mats.shape[0] % 2 == 1:
            tail = mats[-1:]
            mats = np.concatenate([np.matmul(mats[1::2], mats[:-1:2]), tail], axis=0)
        else:
            mats = np.matmul(mats[1::2], mats[::2])
    return mats[0]


def _midpoint_product(
    h0: np.ndarray,
    hks: list[np.ndarray],
    controls: list[ControlSignal],
    t0: float,
    t1: float,
    n_steps: int,
) -> np.ndarray:
    """Batched midpoint-rule product over [t0, t1] with n_steps steps."""
    h = (t1 - t0) / n_steps
    prod = np.eye(h0.shape[0], dtype=np.complex128)
    for lo in range(0, n_steps, _EIGH_CHUNK):
        hi = min(lo + _EIGH_CHUNK, n_steps)
        mids = t0 + (np.arange(lo, hi) + 0.5) * h
        hb = np.broadcast_to(h0, (hi - lo, *h0.shape)).copy()
        for u, hk in zip(controls, hks):
            hb += np.asarray(u.evaluate(mids), dtype=float)[:, None, None] * hk
        w, v = np.linalg.eigh(hb)
        steps = (v * np.exp(-1j * h * w)[:, None, :]) @ v.conj().swapaxes(1, 2)
        prod = _ordered_product(steps) @ prod
    return prod


def reference_propagate(
    h0: np.ndarray,
    hks: list[np.ndarray],
    controls: list[ControlSignal],
    checkpoints,
    refinement: int = 1,
    tol: float = REFERENCE_TOL,
    cap: int = REFERENCE_CAP,
) -> SimulationResult:
    """High-resolution midpoint stepping with Richardson acceptance.

    Each refinement level pairs step counts R and 2R per checkpoint gap and
    Richardson-extrapolates the midpoint results (fourth order); levels are
    doubled until two successive extrapolants agree within `tol` in max
    operator norm at every checkpoint.
    """
    if refinement < 1:
        raise ValueError("refinement must be >= 1")
    cps = _check_checkpoints(checkpoints, float(checkpoints[-1]))
    w_max = max(u.omega_max for u in controls) if controls else TWO_PI
    tau_base = (TWO_PI / w_max) / 16.0
    t_wall = time.perf_counter()

    def _run(r: int) -> tuple[list[np.ndarray], int]:
        out = []
        u = np.eye(h0.shape[0], dtype=np.complex128)
        t_prev = 0.0
        steps = 0
        for c in cps:
            gap = c - t_prev
            if gap > SPLIT_EPS:
                n = max(1, int(math.ceil(gap / tau_base))) * r
                u = _midpoint_product(h0, hks, controls, t_prev, c, n) @ u
                steps += n
            out.append(u.copy())
            t_prev = c
        return out, steps

    def _extrapolated(r: int) -> tuple[list[np.ndarray], int]:
        coarse, n1 = _run(r)
        fine, n2 = _run(2 * r)
        return [(4.0 * f - c) / 3.0 for c, f in zip(coarse, fine)], n1 + n2

    r = refinement
    current, n_current = _extrapolated(r)
    while True:
        if 2 * r > cap:
            raise NoConvergenceError(f"reference did not converge below {tol} at cap R={cap}")
        finer, n_finer = _extrapolated(2 * r)
        diff = max(float(np.max(np.abs(a - b))) for a, b in zip(current, finer))
        if diff <= tol:
            return SimulationResult(
                cps, finer, "reference", time.perf_counter() - t_wall, n_finer,
                extras={"refinement": 2 * r, "richardson_diff": diff},
            )
        r *= 2
        current, n_current = finer, n_finer
