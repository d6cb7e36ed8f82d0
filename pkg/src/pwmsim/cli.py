"""Command-line frontend: config ingestion, study dispatch, and CSV/JSON/SVG
persistence.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, load_config
from .exceptions import ConfigError, PwmSimError
from .experiments import (
    canonical_json,
    config_hash,
    run_bench,
    run_noise_study,
    run_sweep,
    write_csv,
    write_manifest,
)
from .schedule import PwmParams, gaussian_realization, schedule_controls
from .spectral import (
    default_n_max,
    gaussian_train_coefficients,
    rect_train_coefficients,
    scope_deviation,
    signal_coefficients,
)

RATIO_EXCLUDE_BELOW = 1e-5  # singular points are excluded from ratio reporting


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pwmsim", description=__doc__)
    p.add_argument("--version", action="version", version=f"pwmsim {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--out", help="output directory (overrides config)")
    common.add_argument("--seed", type=int, help="seed (overrides config)")
    common.add_argument("--format", default=None, help="comma-separated subset of csv,json,svg")
    common.add_argument("--quick", action="store_true", help="cheap run: fewer trials/repetitions")
    common.add_argument("--dry-run", action="store_true", help="validate and print the plan only")
    sub = p.add_subparsers(dest="command", required=True)
    for name, doc in (
        ("schedule", "emit the switching schedule for the configured controls"),
        ("spectrum", "emit signal and pulse-train spectra with scope deviations"),
        ("simulate", "sweep the configured axis and record errors vs reference"),
        ("error", "record actual and a priori error curves"),
        ("noise", "Monte Carlo switching-noise study (seed required)"),
        ("bench", "PWM vs PWC timing benchmark"),
    ):
        sub.add_parser(name, parents=[common], help=doc)
    return p


def _resolve(args) -> tuple[RunConfig, dict]:
    cfg = load_config(args.config)
    overrides = {}
    if args.out is not None:
        overrides["out_dir"] = args.out
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.format is not None:
        fmts = tuple(args.format.split(","))
        bad = [f for f in fmts if f not in ("csv", "json", "svg")]
        if bad:
            raise ConfigError(f"unknown format(s): {', '.join(bad)}")
        overrides["formats"] = fmts
    if overrides:
        from dataclasses import replace

        cfg = replace(cfg, **overrides)
    ident = dict(cfg.raw)
    if cfg.seed is not None:
        ident["seed"] = cfg.seed
    return cfg, ident


def _manifest(cfg: RunConfig, ident: dict, command: str, outputs: list[str], extra: dict | None = None, timing: dict | None = None):
    if "json" not in cfg.formats:
        return None
    payload = {
        "command": command,
        "config_hash": config_hash(ident),
        "seed": cfg.seed,
        "version": __version__,
        "outputs": sorted(Path(p).name for p in outputs),
        "environment": f"python {platform.python_version()} on {sys.platform}",
    }
    if extra:
        payload.update(extra)
    path = Path(cfg.out_dir) / f"{command}_manifest.json"
    write_manifest(path, payload, timing)
    return path


def _meta(ident: dict, command: str) -> dict:
    return {"command": command, "config_hash": config_hash(ident)}


def cmd_schedule(cfg: RunConfig, ident: dict, quick: bool) -> int:
    controls = list(cfg.signals)
    params = PwmParams.for_controls(controls, cfg.m_pulses, cfg.t_total_us, cfg.xi and list(cfg.xi))
    seq = schedule_controls(controls, params)
    out = Path(cfg.out_dir)
    outputs = []
    rows = []
    for k, ivs in enumerate(seq.intervals):
        for iv in ivs:
            rows.append([iv.index, k, iv.start, iv.length, iv.width, iv.sign, iv.center])
    if "csv" in cfg.formats:
        path = out / "schedule.csv"
        write_csv(path, ["interval", "control", "start_us", "length_us", "width_us", "sign", "center_us"], rows, _meta(ident, "schedule"))
        outputs.append(str(path))
    gauss = None
    if cfg.gaussian and seq.durations.size:
        gauss = gaussian_realization(list(seq.intervals[0]), params)
        if "csv" in cfg.formats:
            path = out / "schedule_gaussian.csv"
            grows = [[t, v] for t, v in zip(gauss.times, gauss.values)]
            write_csv(path, ["t_us", "value"], grows, _meta(ident, "schedule"))
            outputs.append(str(path))
    if "svg" in cfg.formats and seq.durations.size:
        from .plotting import plot_schedule

        outputs.append(str(plot_schedule(seq, controls, out / "schedule.svg", gauss)))
    _manifest(cfg, ident, "schedule", outputs, {"intervals": len(rows), "t_total_us": cfg.t_total_us})
    return 0


def cmd_spectrum(cfg: RunConfig, ident: dict, quick: bool) -> int:
    controls = list(cfg.signals)
    params = PwmParams.for_controls(controls, cfg.m_pulses, cfg.t_total_us, cfg.xi and list(cfg.xi))
    seq = schedule_controls(controls, params)
    n_max = default_n_max(params)
    sig = signal_coefficients(controls[0], params, n_max)
    train = rect_train_coefficients(list(seq.intervals[0])[: params.m_pulses], params, n_max)
    in_scope, out_scope = scope_deviation(sig, train, params.scope)
    spectra = {"signal": sig, "rect train": train}
    extra = {"in_scope_deviation": in_scope, "out_scope_deviation": out_scope, "scope_rad_us": params.scope}
    if cfg.gaussian:
        gex, _gapprox = gaussian_train_coefficients(list(seq.intervals[0])[: params.m_pulses], params, n_max)
        spectra["gaussian train"] = gex
        g_in, g_out = scope_deviation(sig, gex, params.scope)
        extra.update({"gaussian_in_scope_deviation": g_in, "gaussian_out_scope_deviation": g_out})
    out = Path(cfg.out_dir)
    outputs = []
    if "csv" in cfg.formats:
        cols = ["n", "omega_rad_us"]
        for label in spectra:
            key = label.replace(" ", "_")
            cols += [f"{key}_re", f"{key}_im"]
        rows = []
        for i, n in enumerate(sig.indices()):
            row = [int(n), float(n * sig.fundamental)]
            for sp in spectra.values():
                c = sp.coefficients[i]
                row += [c.real, c.imag]
            rows.append(row)
        path = out / "spectrum.csv"
        write_csv(path, cols, rows, _meta(ident, "spectrum"))
        outputs.append(str(path))
    if "svg" in cfg.formats:
        from .plotting import plot_spectrum

        outputs.append(str(plot_spectrum(spectra, params.scope, out / "spectrum.svg")))
    _manifest(cfg, ident, "spectrum", outputs, extra)
    return 0


def _write_curves(cfg, ident, command, results) -> list[str]:
    out = Path(cfg.out_dir)
    outputs = []
    if "csv" in cfg.formats:
        rows = []
        for point, curve in results:
            axis = curve.meta["axis"]
            for t, v in zip(curve.times, curve.values):
                rows.append([axis, point[axis], point["method"], curve.form, t, v, v < RATIO_EXCLUDE_BELOW])
        path = out / f"{command}.csv"
        write_csv(path, ["axis", "value", "method", "form", "t_us", "error", "ratio_excluded"], rows, _meta(ident, command))
        outputs.append(str(path))
    if "svg" in cfg.formats:
        from .plotting import plot_error_curves

        outputs.append(str(plot_error_curves(results, out / f"{command}.svg")))
    return outputs


def cmd_simulate(cfg: RunConfig, ident: dict, quick: bool) -> int:
    spec = cfg.sweep_spec()
    results = run_sweep(spec)
    outputs = _write_curves(cfg, ident, "simulate", results)
    _manifest(cfg, ident, "simulate", outputs, {"points": len(results)})
    return 0


def cmd_error(cfg: RunConfig, ident: dict, quick: bool) -> int:
    spec = cfg.sweep_spec(include_priori=True, priori_l_max=cfg.l_max)
    results = run_sweep(spec)
    outputs = _write_curves(cfg, ident, "error", results)
    _manifest(cfg, ident, "error", outputs, {"points": len(results)})
    return 0


def cmd_noise(cfg: RunConfig, ident: dict, quick: bool) -> int:
    if cfg.seed is None:
        raise ConfigError("noise studies require an explicit seed (config key or --seed)")
    trials = cfg.trials
    if quick:
        trials = min(trials, 20)
    elif trials < 100:
        raise ConfigError("noise studies need >= 100 trials for reported statistics (or --quick)")
    spec = cfg.sweep_spec(axis="M", values=cfg.values or (float(cfg.m_pulses),), trials=trials)
    records = run_noise_study(spec)
    out = Path(cfg.out_dir)
    outputs = []
    if "csv" in cfg.formats:
        rows = [[r.method, r.m_pulses, r.delta_amp, r.trials, r.mean_error, r.variance, r.seed] for r in records]
        path = out / "noise.csv"
        write_csv(path, ["method", "m_pulses", "delta_amp_us", "trials", "mean_error", "variance", "seed"], rows, _meta(ident, "noise"))
        outputs.append(str(path))
    if "svg" in cfg.formats:
        from .plotting import plot_noise

        outputs.append(str(plot_noise(records, out / "noise.svg")))
    _manifest(cfg, ident, "noise", outputs, {"trials": trials, "delta_amp_us": cfg.delta_amp_us})
    return 0


def cmd_bench(cfg: RunConfig, ident: dict, quick: bool) -> int:
    reps = cfg.repetitions
    if quick:
        reps = 1
    elif reps < 5:
        raise ConfigError("benchmarks need >= 5 repetitions for reported medians (or --quick)")
    spec = cfg.sweep_spec(repetitions=reps, methods=tuple(cfg.methods) or ("pwm", "pwc"))
    t0 = time.perf_counter()
    records = run_bench(spec)
    wall = time.perf_counter() - t0
    out = Path(cfg.out_dir)
    outputs = []
    if "csv" in cfg.formats:
        rows = [
            [r.method, canonical_json(r.point), r.t_c, r.error, "" if r.g is None else f"{r.g:.6g}"]
            for r in records
        ]
        # timing cells are measurement noise; keep them out of determinism checks
        path = out / "bench.csv"
        write_csv(path, ["method", "point", "t_c_s", "error", "g"], rows, _meta(ident, "bench"))
        outputs.append(str(path))
    if "svg" in cfg.formats:
        from .plotting import plot_bench

        outputs.append(str(plot_bench(records, spec.axis, out / "bench.svg")))
    _manifest(cfg, ident, "bench", outputs, {"mode": spec.bench_mode}, timing={"wall_seconds": wall})
    return 0


COMMANDS = {
    "schedule": cmd_schedule,
    "spectrum": cmd_spectrum,
    "simulate": cmd_simulate,
    "error": cmd_error,
    "noise": cmd_noise,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg, ident = _resolve(args)
        if args.dry_run:
            plan = {
                "command": args.command,
                "config_hash": config_hash(ident),
                "out_dir": cfg.out_dir,
                "formats": list(cfg.formats),
                "seed": cfg.seed,
                "axis": cfg.axis,
                "values": list(cfg.values or (cfg.t_total_us,)),
                "methods": list(cfg.methods),
                "m_pulses": cfg.m_pulses,
            }
            print(json.dumps(plan, indent=2, sort_keys=True))
            return 0
        Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, ident, args.quick)
    except ConfigError as e:
        print(f"pwmsim: config error: {e}", file=sys.stderr)
        return 2
    except (PwmSimError, np.linalg.LinAlgError, FloatingPointError, ValueError) as e:
        print(f"pwmsim: numerical failure: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
