"""Static SVG figures for schedules, spectra, error curves, noise statistics,
and timing ratios.  All plotting is headless (Agg) and file-based."""

from __future__ import annotations

from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .error_analysis import ErrorCurve  # noqa: E402
from .experiments import BenchRecord, NoiseStudyRecord  # noqa: E402
from .schedule import PwmParams, SwitchingSequence  # noqa: E402
from .signals import ControlSignal  # noqa: E402
from .spectral import Spectrum  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "pwmsim"


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def plot_schedule(
    seq: SwitchingSequence,
    controls: list[ControlSignal],
    path: str | Path,
    gaussian: ControlSignal | None = None,
) -> Path:
    """Control signals overlaid with their switching trains."""
    fig, ax = plt.subplots(figsize=(8, 3.2))
    t_end = seq.total
    tt = np.linspace(0.0, t_end, max(400, 40 * len(seq.durations)))
    for k, u in enumerate(controls):
        ax.plot(tt, u.evaluate(tt), lw=1.2, label=f"u{k + 1}(t)")
    edges = np.concatenate([[0.0], np.cumsum(seq.durations)])
    grid = np.repeat(edges, 2)[1:-1]
    for k in range(seq.n_controls):
        levels = np.repeat(seq.signs[:, k] * seq.params.xi[k], 2)
        ax.plot(grid, levels, lw=0.9, alpha=0.8, label=f"train {k + 1}")
    if gaussian is not None:
        ax.plot(tt, gaussian.evaluate(tt), lw=0.9, ls="--", label="gaussian train")
    ax.set_xlabel("t (us)")
    ax.set_ylabel("amplitude")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def plot_spectrum(spectra: dict[str, Spectrum], scope: float, path: str | Path) -> Path:
    """Coefficient magnitudes per harmonic with the scope boundary marked."""
    fig, ax = plt.subplots(figsize=(8, 3.2))
    for label, sp in spectra.items():
        ax.plot(sp.indices() * sp.fundamental, sp.magnitudes(), marker=".", ms=3, lw=0.6, label=label)
    ax.axvline(scope, color="k", ls=":", lw=1)
    ax.axvline(-scope, color="k", ls=":", lw=1)
    ax.set_xlabel("angular frequency (rad/us)")
    ax.set_ylabel("|c_n|")
    ax.set_yscale("log")
    ax.set_ylim(bottom=1e-8)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def plot_error_curves(results: list[tuple[dict, ErrorCurve]], path: str | Path) -> Path:
    """Error vs time, one line per (parameter point, method, form)."""
    fig, ax = plt.subplots(figsize=(8, 3.6))
    for point, curve in results:
        label = " ".join(f"{k}={v}" for k, v in point.items()) + f" {curve.form}"
        vals = np.maximum(curve.values, 1e-18)
        ax.plot(curve.times, vals, marker=".", ms=3, lw=1.0, label=label)
    ax.set_xlabel("t (us)")
    ax.set_ylabel("error")
    ax.set_yscale("log")
    if len(results) <= 12:
        ax.legend(fontsize=7)
    fig.tight_layout()
    return _save(fig, path)


def plot_noise(records: list[NoiseStudyRecord], path: str | Path) -> Path:
    """Mean error with sqrt-variance bars per pulse number and method."""
    fig, ax = plt.subplots(figsize=(7, 3.4))
    for meth in sorted({r.method for r in records}):
        recs = sorted((r for r in records if r.method == meth), key=lambda r: r.m_pulses)
        ms = [r.m_pulses for r in recs]
        mean = np.array([r.mean_error for r in recs])
        sd = np.sqrt([r.variance for r in recs])
        ax.errorbar(ms, mean, yerr=sd, marker="o", ms=4, capsize=3, label=meth)
    ax.set_xlabel("pulse number M")
    ax.set_ylabel("error")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def plot_bench(records: list[BenchRecord], axis: str, path: str | Path) -> Path:
    """Cost per method and the PWM/PWC ratio g against the swept axis."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.4))
    for meth in sorted({r.method for r in records}):
        recs = [r for r in records if r.method == meth]
        xs = [r.point[axis] for r in recs]
        ax1.plot(xs, [r.t_c for r in recs], marker="o", ms=4, label=meth)
    ax1.set_xlabel(axis)
    ax1.set_ylabel("median wall time (s)")
    ax1.set_yscale("log")
    ax1.legend(fontsize=8)
    gs = [(r.point[axis], r.g) for r in records if r.g is not None]
    if gs:
        ax2.plot(*zip(*gs), marker="s", ms=4, color="tab:red")
        ax2.axhline(1.0, color="k", ls=":", lw=1)
    ax2.set_xlabel(axis)
    ax2.set_ylabel("g = t_c(PWM) / t_c(PWC)")
    fig.tight_layout()
    return _save(fig, path)
