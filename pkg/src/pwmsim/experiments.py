"""Study drivers: error sweeps over t/M/xi/kappa/N, PWM-vs-PWC timing
benchmarks (equal step count and equal target error), and the switching-noise
Monte Carlo, plus deterministic CSV/JSON writers for their records.

Parameter points run in a thread pool (numpy releases the GIL in the heavy
kernels) and are merged in parameter order; timing benchmarks always run
serially so the measurements are not polluted by sibling points.
"""

from __future__ import annotations

import hashlib
import json
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .error_analysis import ErrorCurve, infidelity, priori_error_direct
from .exceptions import TimingUnstableError
from .operators import nqubit_hamiltonian
from .propagators import (
    build_cache,
    pwc_propagate,
    pwm_propagate,
    reference_propagate,
    spo_propagate,
)
from .schedule import PwmParams, perturb_widths, schedule_controls
from .signals import ControlSignal, Sinusoid

SCHEMA_VERSION = "pwmsim-csv-1"
SWEEP_AXES = ("t", "M", "xi", "kappa1", "N", "delta_amp")
METHODS = ("pwm", "pwc", "spo")
BENCH_MODES = ("equal_m", "equal_eps")
TIMING_ROUNDS = 3  # re-measure this many times before declaring instability


def default_signals() -> tuple[ControlSignal, ...]:
    """The single-control model: u(t) = sin(2 pi 0.05 t)."""
    return (Sinusoid(1.0, 0.05, 0.0),)


@dataclass(frozen=True)
class SweepSpec:
    """One study: a model, a swept axis, and the fixed remainder."""

    axis: str
    values: tuple[float, ...]
    n_qubits: int = 1
    kappa1: float = 1.0
    kappa2: float = 0.0
    signals: tuple[ControlSignal, ...] = ()
    m_pulses: int = 20
    t_total: float = 20.0
    xi: tuple[float, ...] | None = None
    methods: tuple[str, ...] = ("pwm",)
    seed: int = 0
    repetitions: int = 1
    delta_amp: float = 0.0  # us
    trials: int = 0
    n_checkpoints: int = 10
    bench_mode: str = "equal_m"
    target_error: float | None = None
    include_priori: bool = False
    priori_l_max: int = 50

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ValueError(f"unknown sweep axis {self.axis!r}, expected one of {SWEEP_AXES}")
        vals = tuple(float(v) for v in self.values)
        if not vals or any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("sweep values must be non-empty and strictly increasing")
        object.__setattr__(self, "values", vals)
        bad = [m for m in self.methods if m not in METHODS]
        if bad or not self.methods:
            raise ValueError(f"methods must be a non-empty subset of {METHODS}, got {self.methods}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.bench_mode not in BENCH_MODES:
            raise ValueError(f"bench_mode must be one of {BENCH_MODES}")
        if self.delta_amp < 0:
            raise ValueError("noise amplitude must be non-negative")

    def resolved_signals(self) -> tuple[ControlSignal, ...]:
        if self.signals:
            return self.signals
        sigs = [Sinusoid(1.0, 0.05, 0.0)]
        if self.kappa2 != 0.0:
            sigs.append(Sinusoid(1.0, 0.05, np.pi / 3))
        return tuple(sigs)


@dataclass(frozen=True)
class BenchRecord:
    """Median wall-clock cost of one method at one parameter point."""

    method: str
    point: dict
    t_c: float  # s, median over repetitions after a discarded warm-up
    error: float
    g: float | None = None  # t_c(PWM) / t_c(PWC), on the PWM record


@dataclass(frozen=True)
class NoiseStudyRecord:
    """Monte Carlo error statistics of one method at one pulse number."""

    method: str
    m_pulses: int
    delta_amp: float  # us
    trials: int
    mean_error: float
    variance: float
    seed: int


def _build_model(spec: SweepSpec, n_qubits: int | None = None, kappa1: float | None = None):
    """Hamiltonians, controls, and the initial basis state for one point."""
    n = int(n_qubits if n_qubits is not None else spec.n_qubits)
    k1 = float(kappa1 if kappa1 is not None else spec.kappa1)
    h0, h1, h2 = nqubit_hamiltonian(n, k1, spec.kappa2)
    controls = list(spec.resolved_signals())
    hks = [h1, h2][: len(controls)]
    psi0 = np.zeros(h0.shape[0], dtype=np.complex128)
    psi0[0] = 1.0
    return h0, hks, controls, psi0


def _checkpoint_grid(t_total: float, n: int) -> np.ndarray:
    return np.linspace(t_total / n, t_total, n)


def _reference_states(h0, hks, controls, times, psi0) -> list[np.ndarray]:
    ref = reference_propagate(h0, hks, controls, times)
    return [u @ psi0 for u in ref.propagators]


def _sweep_point(spec: SweepSpec, value: float) -> list[tuple[dict, ErrorCurve]]:
    m_pulses = spec.m_pulses
    t_total = spec.t_total
    xi = spec.xi
    n_qubits = kappa1 = None
    if spec.axis == "t":
        t_total = value
    elif spec.axis == "M":
        m_pulses = int(round(value))
    elif spec.axis == "xi":
        xi = (value,) * len(spec.resolved_signals())
    elif spec.axis == "kappa1":
        kappa1 = value
    elif spec.axis == "N":
        n_qubits = int(round(value))
    elif spec.axis == "delta_amp":
        raise ValueError("delta_amp sweeps belong to run_noise_study")

    h0, hks, controls, psi0 = _build_model(spec, n_qubits, kappa1)
    params = PwmParams.for_controls(controls, m_pulses, t_total, xi and list(xi))
    clamp = any(x < u.max_abs * (1 - 1e-12) for x, u in zip(params.xi, controls))
    times = _checkpoint_grid(t_total, spec.n_checkpoints)
    psi_refs = _reference_states(h0, hks, controls, times, psi0)

    meta = {
        "axis": spec.axis,
        "value": value,
        "m_pulses": m_pulses,
        "t_total_us": t_total,
        "xi": tuple(params.xi),
        "n_qubits": int(n_qubits if n_qubits is not None else spec.n_qubits),
        "kappa1": float(kappa1 if kappa1 is not None else spec.kappa1),
        "kappa2": spec.kappa2,
        "eap_infeasible": clamp,
    }
    out: list[tuple[dict, ErrorCurve]] = []
    seq = cache = None
    for method in spec.methods:
        if method == "pwm":
            seq = schedule_controls(controls, params, clamp=clamp)
            cache = build_cache(h0, hks, params.xi, seq.sign_vectors())
            res = pwm_propagate(seq, cache, times)
            m_meta = dict(meta, clamp_events=seq.clamp_events)
        elif method == "pwc":
            res = pwc_propagate(h0, hks, controls, params.tau, times)
            m_meta = dict(meta)
        else:
            res = spo_propagate(h0, hks, controls, params.tau, times)
            m_meta = dict(meta)
        eps = np.array([infidelity(pr, u, psi0) for pr, u in zip(psi_refs, res.propagators)])
        point = {spec.axis: value, "method": method}
        out.append((point, ErrorCurve(times.copy(), eps, "actual", m_meta)))
        if method == "pwm" and spec.include_priori:
            ep = np.array(
                [priori_error_direct(seq, controls, hks, psi0, float(t), cache) for t in times]
            )
            out.append(
                (
                    {spec.axis: value, "method": "pwm"},
                    ErrorCurve(times.copy(), ep, "priori_direct", dict(m_meta)),
                )
            )
    return out


def run_sweep(spec: SweepSpec) -> list[tuple[dict, ErrorCurve]]:
    """One error curve per swept value per method, in parameter order."""
    with ThreadPoolExecutor() as pool:
        chunks = list(pool.map(lambda v: _sweep_point(spec, v), spec.values))
    return [item for chunk in chunks for item in chunk]


def _timed_median(fn, repetitions: int) -> float:
    """Median wall-clock seconds, warm-up discarded, stability enforced."""
    last_spread = 0.0
    for _ in range(TIMING_ROUNDS):
        fn()  # warm-up, discarded
        samples = []
        for _ in range(repetitions):
            t0 = time.perf_counter()
            fn()
            samples.append(time.perf_counter() - t0)
        med = statistics.median(samples)
        last_spread = max(samples) - min(samples)
        if repetitions == 1 or last_spread <= 0.5 * med:
            return med
    raise TimingUnstableError(
        f"timing spread {last_spread:.3g}s exceeds 50% of the median after {TIMING_ROUNDS} rounds"
    )


def _bench_point(spec: SweepSpec, value: float) -> list[BenchRecord]:
    m_pulses = spec.m_pulses
    t_total = spec.t_total
    n_qubits = None
    if spec.axis == "M":
        m_pulses = int(round(value))
    elif spec.axis == "t":
        t_total = value
    elif spec.axis == "N":
        n_qubits = int(round(value))
    else:
        raise ValueError(f"benchmarks sweep t, M, or N, not {spec.axis!r}")

    h0, hks, controls, psi0 = _build_model(spec, n_qubits)
    cps = np.array([t_total])
    psi_ref = _reference_states(h0, hks, controls, cps, psi0)[0]

    def pwm_m(m: int):
        params = PwmParams.for_controls(controls, m, t_total, spec.xi and list(spec.xi))
        seq = schedule_controls(controls, params)
        cache = build_cache(h0, hks, params.xi, seq.sign_vectors())
        return pwm_propagate(seq, cache, cps)

    def pwc_m(m: int):
        tau = PwmParams.for_controls(controls, m, t_total).tau
        return pwc_propagate(h0, hks, controls, tau, cps)

    runners = {"pwm": pwm_m, "pwc": pwc_m}
    if spec.bench_mode == "equal_m":
        steps = {meth: m_pulses for meth in spec.methods if meth in runners}
    else:
        if spec.target_error is None or spec.target_error <= 0:
            raise ValueError("equal_eps benchmarks need a positive target_error")
        steps = {
            meth: _min_steps_for_error(runners[meth], psi_ref, psi0, spec.target_error)
            for meth in spec.methods
            if meth in runners
        }

    records: list[BenchRecord] = []
    costs: dict[str, float] = {}
    for meth, m in steps.items():
        err = infidelity(psi_ref, runners[meth](m).propagators[-1], psi0)
        t_c = _timed_median(lambda: runners[meth](m), spec.repetitions)
        costs[meth] = t_c
        point = {spec.axis: value, "M": m, "t_us": t_total}
        records.append(BenchRecord(meth, point, t_c, err))
    if "pwm" in costs and "pwc" in costs:
        g = costs["pwm"] / costs["pwc"]
        records = [replace(r, g=g) if r.method == "pwm" else r for r in records]
    return records


def _min_steps_for_error(runner, psi_ref: np.ndarray, psi0: np.ndarray, target: float) -> int:
    """Smallest step count whose end-time error is at or below the target."""

    def err(m: int) -> float:
        return infidelity(psi_ref, runner(m).propagators[-1], psi0)

    lo, hi = 1, 2
    while err(hi) > target:
        lo, hi = hi, hi * 2
        if hi > 2**20:
            raise TimingUnstableError(f"no step count up to {hi} reaches error {target}")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if err(mid) > target:
            lo = mid
        else:
            hi = mid
    return hi


def run_bench(spec: SweepSpec) -> list[BenchRecord]:
    """Serial timing study; median of >= 5 repetitions for reportable runs."""
    out: list[BenchRecord] = []
    for v in spec.values:
        out.extend(_bench_point(spec, v))
    return out


def _noise_point(spec: SweepSpec, m_pulses: int, seed_seq: np.random.SeedSequence):
    h0, hks, controls, psi0 = _build_model(spec)
    params = PwmParams.for_controls(controls, m_pulses, spec.t_total, spec.xi and list(spec.xi))
    seq = schedule_controls(controls, params)
    cache = build_cache(h0, hks, params.xi, seq.sign_vectors())
    cps = np.array([spec.t_total])
    psi_ref = _reference_states(h0, hks, controls, cps, psi0)[0]
    n_steps = int(np.ceil(spec.t_total / params.tau - 1e-9))

    trials = max(1, spec.trials)
    pwm_err = np.empty(trials)
    pwc_err = np.empty(trials)
    for j, child in enumerate(seed_seq.spawn(trials)):
        pwm_seed, pwc_seed = (int(s) for s in child.generate_state(2))
        noisy = seq if spec.delta_amp == 0.0 else perturb_widths(seq, spec.delta_amp, pwm_seed)
        u_pwm = pwm_propagate(noisy, cache, cps).propagators[-1]
        pwm_err[j] = infidelity(psi_ref, u_pwm, psi0)
        rng = np.random.default_rng(pwc_seed)
        deltas = rng.uniform(-spec.delta_amp, spec.delta_amp, n_steps)
        u_pwc = pwc_propagate(h0, hks, controls, params.tau, cps, duration_noise=deltas).propagators[-1]
        pwc_err[j] = infidelity(psi_ref, u_pwc, psi0)

    recs = []
    for meth, errs in (("pwm", pwm_err), ("pwc", pwc_err)):
        recs.append(
            NoiseStudyRecord(
                meth,
                m_pulses,
                spec.delta_amp,
                trials,
                float(np.mean(errs)),
                float(np.var(errs)),
                spec.seed,
            )
        )
    return recs


def run_noise_study(spec: SweepSpec) -> list[NoiseStudyRecord]:
    """Monte Carlo width noise (PWM) vs duration noise (PWC) per pulse number.

    The swept axis is M; every (point, trial) pair draws from its own spawned
    seed stream, so results are independent of execution order.
    """
    if spec.axis != "M":
        raise ValueError("noise studies sweep the pulse number M")
    roots = np.random.SeedSequence(spec.seed).spawn(len(spec.values))
    points = [(int(round(v)), root) for v, root in zip(spec.values, roots)]
    with ThreadPoolExecutor() as pool:
        chunks = list(pool.map(lambda pr: _noise_point(spec, pr[0], pr[1]), points))
    return [r for chunk in chunks for r in chunk]


# ---------------------------------------------------------------------------
# deterministic serialization

def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_hash(obj) -> str:
    """sha256 of the canonical JSON form, for CSV/manifest headers."""
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()[:16]


def fmt(x) -> str:
    """Deterministic scalar formatting for CSV cells."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    return str(x)


def write_csv(path: str | Path, columns: list[str], rows: list[list], meta: dict) -> None:
    """Comma-separated table with a '#'-prefixed schema/config header."""
    lines = [f"# schema={SCHEMA_VERSION}"]
    for k in sorted(meta):
        lines.append(f"# {k}={meta[k]}")
    lines.append(",".join(columns))
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row width {len(row)} != {len(columns)} columns")
        lines.append(",".join(fmt(c) for c in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path: str | Path) -> tuple[dict, list[str], list[list[str]]]:
    """Round-trip reader for this module's CSV files."""
    meta: dict = {}
    columns: list[str] = []
    rows: list[list[str]] = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                k, v = body.split("=", 1)
                meta[k.strip()] = v.strip()
        elif not columns:
            columns = line.split(",")
        elif line:
            rows.append(line.split(","))
    return meta, columns, rows


def write_manifest(path: str | Path, payload: dict, timing: dict | None = None) -> None:
    """JSON manifest; timing fields live under a separate non-deterministic key."""
    doc = dict(payload)
    doc["schema"] = SCHEMA_VERSION
    if timing:
        doc["timing"] = timing  # exempt from determinism comparisons
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
