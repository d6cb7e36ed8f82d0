import math

import numpy as np
import pytest

from pwmsim import (
    PwmParams,
    Sinusoid,
    build_switching_sequence,
    eap_widths,
    gaussian_realization,
    perturb_widths,
    schedule_controls,
)
from pwmsim.exceptions import AmplitudeTooSmallError


def first_width_oracle() -> float:
    # analytic area of sin(0.1*pi*t) over [0, 1] with unit pulse amplitude
    w = 0.1 * math.pi
    return (1.0 - math.cos(w)) / w


def test_params_derived_quantities(sine):
    params = PwmParams.for_controls([sine], 20, 20.0)
    assert params.tau == pytest.approx(1.0)
    assert params.omega_min == pytest.approx(0.1 * math.pi)
    assert params.scope == pytest.approx(2.0 * math.pi)
    assert params.xi == (1.0,)  # defaults to sup|u|
    with pytest.raises(ValueError):
        PwmParams(0, (1.0,), 20.0, 20.0)


def test_equal_area_widths(sine, schedule20):
    params, _ = schedule20
    ivs = eap_widths(sine, params)
    assert len(ivs) == 20
    assert ivs[0].width == pytest.approx(first_width_oracle(), abs=1e-12)
    # every width reproduces the interval area at amplitude xi
    for iv in ivs:
        area = sine.integrate(iv.start, iv.start + iv.length)
        assert iv.sign * iv.width == pytest.approx(area, abs=1e-12)
    # sine symmetry: second half mirrors the first with flipped sign
    for a, b in zip(ivs[:10], ivs[10:]):
        assert a.width == pytest.approx(b.width, abs=1e-12)
        assert a.sign == -b.sign
    assert all(iv.center == pytest.approx(iv.start + 0.5 * iv.length) for iv in ivs)


def test_amplitude_below_sup_rejected_or_clamped(sine):
    params = PwmParams(20, (0.5,), 20.0, 20.0)
    with pytest.raises(AmplitudeTooSmallError):
        eap_widths(sine, params)
    ivs = eap_widths(sine, params, clamp=True)
    assert max(iv.width for iv in ivs) == pytest.approx(1.0)  # clamped to tau


def test_zero_signal_gives_zero_widths():
    u = Sinusoid(1e-30, 0.05, 0.0)
    params = PwmParams(20, (1.0,), 20.0, 20.0)
    ivs = eap_widths(u, params)
    assert all(iv.width == 0.0 and iv.sign == 0 for iv in ivs)


def test_trailing_partial_interval(sine):
    params = PwmParams(20, (1.0,), 20.0, 20.5)
    ivs = eap_widths(sine, params)
    assert len(ivs) == 21
    assert ivs[-1].length == pytest.approx(0.5)
    assert ivs[-1].width <= 0.5 + 1e-12


def test_switching_sequence_layout(schedule20):
    params, seq = schedule20
    assert seq.total == pytest.approx(20.0)
    # single control: free/pulse/free triple per interval with active pulse
    active = [iv for iv in seq.intervals[0] if iv.sign != 0]
    assert len(seq.durations) == 3 * len(active) + (20 - len(active))
    # pulse segments carry the interval sign, flank segments are zero
    edges = np.concatenate([[0.0], np.cumsum(seq.durations)])
    for iv in active:
        mid = iv.center
        j = np.searchsorted(edges, mid) - 1
        assert seq.signs[j, 0] == iv.sign
        assert seq.durations[j] == pytest.approx(iv.width, abs=1e-12)


def test_two_control_merge(sine):
    u2 = Sinusoid(1.0, 0.05, math.pi / 3)
    params = PwmParams.for_controls([sine, u2], 20, 20.0)
    seq = schedule_controls([sine, u2], params)
    assert seq.n_controls == 2
    assert seq.total == pytest.approx(20.0)
    # both controls reproduce their per-interval areas on the merged grid
    edges = np.concatenate([[0.0], np.cumsum(seq.durations)])
    for k, u in enumerate([sine, u2]):
        for iv in seq.intervals[k]:
            inside = (edges[:-1] >= iv.start - 1e-12) & (edges[1:] <= iv.start + iv.length + 1e-12)
            area = float(np.sum(seq.durations[inside] * seq.signs[inside, k])) * params.xi[k]
            assert area == pytest.approx(u.integrate(iv.start, iv.start + iv.length), abs=1e-9)


def test_gaussian_realization_area_and_peak(schedule20):
    params, seq = schedule20
    g = gaussian_realization(list(seq.intervals[0]), params, points_per_tau=256)
    # overlapping tails of neighboring pulses can push the peak a little past xi
    assert params.xi[0] * 0.9 <= np.max(np.abs(g.values)) <= params.xi[0] * 1.1
    # area under one isolated pulse approximates xi * width
    iv = seq.intervals[0][0]
    alone = gaussian_realization([iv], params, points_per_tau=256)
    assert alone.integrate(iv.start, iv.start + iv.length) == pytest.approx(
        params.xi[0] * iv.width, rel=5e-3
    )


def test_perturb_widths_statistics(schedule20):
    params, seq = schedule20
    noisy = perturb_widths(seq, 1e-3, seed=42)
    again = perturb_widths(seq, 1e-3, seed=42)
    other = perturb_widths(seq, 1e-3, seed=43)
    assert np.array_equal(noisy.durations, again.durations)
    assert not np.array_equal(noisy.durations, other.durations)
    assert noisy.total == pytest.approx(seq.total, abs=1e-12)
    w0 = np.array([iv.width for iv in seq.intervals[0]])
    w1 = np.array([iv.width for iv in noisy.intervals[0]])
    active = w0 > 0
    assert np.all(np.abs(w1[active] - w0[active]) <= 1e-3 + 1e-15)
    assert np.array_equal(w1[~active], w0[~active])


def test_perturb_zero_amplitude_is_identity(schedule20):
    _, seq = schedule20
    same = perturb_widths(seq, 0.0, seed=1)
    assert np.array_equal(same.durations, seq.durations)
    assert np.array_equal(same.signs, seq.signs)


def test_empty_horizon(sine):
    params = PwmParams(20, (1.0,), 20.0, 0.0)
    ivs = eap_widths(sine, params)
    assert ivs == []
    seq = build_switching_sequence([ivs], params)
    assert seq.total == 0.0
