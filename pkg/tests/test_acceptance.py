"""Acceptance suite: one test per quantitative claim the package must meet.

Criteria 1 and 4 each contain a sub-check that is not attainable with the
canonical parameters; the analysis lives in the project notes outside the
package.  Those asserts are kept faithful rather than loosened.
"""

import json
import math
import time

import numpy as np
import pytest

from pwmsim import (
    PwmParams,
    Sinusoid,
    SweepSpec,
    build_cache,
    cancellation_sum,
    error_operator_check,
    gaussian_train_coefficients,
    infidelity,
    nqubit_hamiltonian,
    priori_error_direct,
    pwm_propagate,
    rect_train_coefficients,
    reference_propagate,
    run_bench,
    run_noise_study,
    run_sweep,
    schedule_controls,
    scope_deviation,
    signal_coefficients,
    spo_propagate,
)
from pwmsim.cli import main
from pwmsim.schedule import eap_widths
from pwmsim.spectral import gaussian_damping_factor


def canonical(m_pulses: int, t_total: float):
    u = Sinusoid(1.0, 0.05, 0.0)
    h0, h1, _ = nqubit_hamiltonian(1, 1.0, 0.0)
    params = PwmParams.for_controls([u], m_pulses, t_total)
    seq = schedule_controls([u], params)
    cache = build_cache(h0, [h1], params.xi, seq.sign_vectors())
    psi0 = np.array([1.0, 0.0], dtype=np.complex128)
    return u, h0, [h1], params, seq, cache, psi0


def test_criterion_01_reference_values():
    u, h0, hks, params, seq, cache, psi0 = canonical(20, 20.0)
    ref = reference_propagate(h0, hks, [u], [10.0]).propagators[0]
    u_m = pwm_propagate(seq, cache, [10.0]).propagators[0]
    eps = infidelity(ref @ psi0, u_m, psi0)
    assert 4e-3 <= eps <= 1.6e-2
    ep = priori_error_direct(seq, [u], hks, psi0, 10.0, cache)
    assert 3.7e-3 <= ep <= 1.5e-2
    u, h0, hks, params, seq, cache, psi0 = canonical(80, 60.0)
    ep = priori_error_direct(seq, [u], hks, psi0, 60.0, cache)
    assert 1.6e-4 <= ep <= 1.5e-3


def test_criterion_02_estimate_tracks_error():
    u, h0, hks, params, seq, cache, psi0 = canonical(20, 20.0)
    times = np.linspace(2.0, 20.0, 10)
    refs = reference_propagate(h0, hks, [u], times).propagators
    res = pwm_propagate(seq, cache, times)
    for t, r, u_m in zip(times, refs, res.propagators):
        eps = infidelity(r @ psi0, u_m, psi0)
        if eps < 1e-5:
            continue
        ep = priori_error_direct(seq, [u], hks, psi0, float(t), cache)
        assert 0.1 <= ep / eps <= 10.0, f"ratio {ep / eps} at t={t}"


def test_criterion_03_pulse_number_refinement():
    spec = SweepSpec(axis="M", values=(20.0, 40.0, 60.0, 80.0, 100.0), t_total=20.0, n_checkpoints=1)
    errs = [c.values[-1] for _, c in run_sweep(spec)]
    violations = [
        (a, b) for a, b in zip(errs, errs[1:]) if b >= a and (b - a) > 0.05 * a
    ]
    assert not violations, f"refinement broken: {errs}"
    soft = sum(1 for a, b in zip(errs, errs[1:]) if b >= a)
    assert soft <= 1


def test_criterion_04_spectral_scope():
    u = Sinusoid(1.0, 0.05, 0.0)
    params = PwmParams.for_controls([u], 20, 20.0)
    seq = schedule_controls([u], params)
    sig = signal_coefficients(u, params)
    train = rect_train_coefficients(list(seq.intervals[0])[:20], params)
    sideband = max(abs(train.coefficient(19)), abs(train.coefficient(21)))
    assert sideband > 0.1
    devs = {}
    for m in (20, 80):
        p = PwmParams.for_controls([u], m, 20.0)
        s = schedule_controls([u], p)
        tr = rect_train_coefficients(list(s.intervals[0])[:m], p, n_max=2)
        devs[m] = abs(tr.coefficient(1) - (-0.5j))
    exponent = math.log(devs[20] / devs[80]) / math.log(4.0)
    assert exponent >= 1.7
    in_scope, _ = scope_deviation(sig, train, params.scope)
    assert in_scope <= 0.01


def test_criterion_05_cancellation_identities():
    for m in range(2, 51):
        n = np.arange(-200, 201)
        sums = np.array([cancellation_sum(m, int(k)) for k in n])
        resonant = (1 - n) % m == 0
        assert np.max(np.abs(sums[~resonant])) < 1e-12
        assert np.max(np.abs(sums[resonant] - m)) < 1e-12


def test_criterion_06_commuting_exactness():
    from scipy.linalg import expm

    u = Sinusoid(1.0, 0.05, 0.0)
    h0, h1, _ = nqubit_hamiltonian(2, 1.0, 0.0)  # commuting pair
    assert np.max(np.abs(h0 @ h1 - h1 @ h0)) == 0.0
    params = PwmParams.for_controls([u], 400, 20.0)
    seq = schedule_controls([u], params)
    cache = build_cache(h0, [h1], params.xi, seq.sign_vectors())
    res = pwm_propagate(seq, cache, [20.0])
    assert res.n_steps >= 1000
    exact = expm(-1j * (20.0 * h0 + u.integrate(0.0, 20.0) * h1))
    assert np.max(np.abs(res.propagators[-1] - exact)) < 1e-12


def test_criterion_07_splitting_comparison():
    from scipy.linalg import expm

    u, h0, hks, params, seq, cache, psi0 = canonical(20, 20.0)
    times = np.linspace(2.0, 20.0, 10)
    refs = reference_propagate(h0, hks, [u], times).propagators
    pwm = pwm_propagate(seq, cache, times).propagators
    spo = spo_propagate(h0, hks, [u], params.tau, times).propagators
    for r, a, b in zip(refs, pwm, spo):
        assert infidelity(r @ psi0, a, psi0) <= infidelity(r @ psi0, b, psi0) + 1e-15
    # large-amplitude limit of one pulse step against one splitting step
    xi = 1e3
    area = u.integrate(0.0, 1.0)
    tp = abs(area) / xi
    tf = 0.5 * (1.0 - tp)
    h1 = hks[0]
    step = expm(-1j * tf * h0) @ expm(-1j * tp * (h0 + xi * np.sign(area) * h1)) @ expm(-1j * tf * h0)
    spo_step = expm(-1j * 0.5 * h0) @ expm(-1j * area * h1) @ expm(-1j * 0.5 * h0)
    assert np.max(np.abs(step - spo_step)) <= 1e-6


def test_criterion_08_gaussian_equivalence():
    half = Sinusoid(0.5, 0.05, 0.0)
    # amplitude chosen so the widths sit at the documented ~0.16 us scale
    params = PwmParams(20, (3.0,), 20.0, 20.0)
    seq = schedule_controls([half], params)
    ivs = list(seq.intervals[0])[:20]
    assert max(iv.width for iv in ivs) < 0.2
    rect = rect_train_coefficients(ivs, params)
    gauss, _ = gaussian_train_coefficients(ivs, params)
    in_scope, _ = scope_deviation(rect, gauss, params.scope)
    assert in_scope <= 2e-3
    # damping factor at the canonical first-interval width
    u = Sinusoid(1.0, 0.05, 0.0)
    p0 = PwmParams.for_controls([u], 20, 20.0)
    w0 = eap_widths(u, p0)[0].width
    assert gaussian_damping_factor(1, p0.omega_min, w0) >= 0.999


def test_criterion_09_efficiency():
    t0 = time.perf_counter()
    eq = SweepSpec(axis="M", values=(50.0, 100.0, 150.0, 200.0), methods=("pwm", "pwc"), repetitions=5)
    gs = [r.g for r in run_bench(eq) if r.g is not None]
    assert float(np.median(gs)) < 0.6, f"median g {np.median(gs)}"
    nq = SweepSpec(axis="N", values=(2.0, 4.0, 6.0, 8.0), methods=("pwm", "pwc"), m_pulses=200, repetitions=5)
    gn = [r.g for r in run_bench(nq) if r.g is not None]
    assert gn[0] < 1.0, f"g at two qubits {gn[0]}"
    for a, b in zip(gn, gn[1:]):
        assert b >= 0.95 * a, f"ratio decreased: {gn}"  # 5% timing jitter allowed
    assert time.perf_counter() - t0 < 300.0


def test_criterion_10_noise_robustness():
    spec = SweepSpec(
        axis="M",
        values=(20.0, 100.0, 200.0),
        methods=("pwm", "pwc"),
        t_total=100.0,
        delta_amp=1e-3,
        trials=200,
        seed=2026,
    )
    records = run_noise_study(spec)
    assert all(r.trials >= 200 for r in records)
    largest = max(r.m_pulses for r in records)
    by = {r.method: r for r in records if r.m_pulses == largest}
    assert by["pwm"].mean_error <= by["pwc"].mean_error
    assert by["pwm"].variance <= by["pwc"].variance


def test_criterion_11_error_operator_consistency():
    u, h0, hks, params, seq, cache, psi0 = canonical(20, 20.0)
    out = error_operator_check(h0, hks, [u], seq, cache, None, 10.0, n_points=10_000)
    assert out["max_abs_diff"] <= 1e-6


def test_criterion_12_deterministic_outputs(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(
        json.dumps(
            {
                "study": {"axis": "M", "values": [10, 20], "t_total_us": 20.0, "delta_amp_us": 1e-3},
                "seed": 4,
            }
        )
    )
    blobs = []
    for d in ("run1", "run2"):
        out = tmp_path / d
        rc = main(["noise", "--config", str(cfg), "--out", str(out), "--quick", "--format", "csv,json"])
        assert rc == 0
        blobs.append((out / "noise.csv").read_bytes())
        blobs.append((out / "noise_manifest.json").read_bytes())
        rc = main(["simulate", "--config", str(cfg), "--out", str(out), "--format", "csv"])
        assert rc == 0
        blobs.append((out / "simulate.csv").read_bytes())
    assert blobs[0:3] == blobs[3:6]
