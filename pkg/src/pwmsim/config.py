"""Strict JSON run configuration: typed blocks, unit-suffixed keys, and
unknown-key rejection so study manifests stay trustworthy.

Frequencies enter in MHz and are converted to angular rad/us exactly once,
at signal construction; times are in microseconds throughout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import ConfigError
from .experiments import SweepSpec
from .signals import ControlSignal, Sawtooth, Sinusoid, SumOfSinusoids, Tabulated, Triangle

FORMATS = ("csv", "json", "svg")


def _section(raw: dict, name: str, known: set[str]) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError(f"config block {name!r} must be a JSON object, got {type(raw).__name__}")
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown key(s) in {name!r}: {', '.join(sorted(unknown))}")
    return raw


def _number(raw: dict, name: str, key: str, default=None, required=False):
    if key not in raw:
        if required:
            raise ConfigError(f"{name}.{key} is required")
        return default
    v = raw[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{name}.{key} must be a number, got {v!r}")
    return float(v)


def _integer(raw: dict, name: str, key: str, default=None, required=False):
    v = _number(raw, name, key, default, required)
    if v is None:
        return None
    if v != int(v):
        raise ConfigError(f"{name}.{key} must be an integer, got {v!r}")
    return int(v)


def parse_signal(raw: dict, name: str = "signal") -> ControlSignal:
    """One signal spec: sinusoid | sum | triangle | sawtooth | tabulated."""
    if not isinstance(raw, dict) or "kind" not in raw:
        raise ConfigError(f"{name} must be an object with a 'kind' key")
    kind = raw["kind"]
    if kind == "sinusoid":
        _section(raw, name, {"kind", "amp", "freq_mhz", "phase_rad"})
        return Sinusoid(
            _number(raw, name, "amp", 1.0),
            _number(raw, name, "freq_mhz", required=True),
            _number(raw, name, "phase_rad", 0.0),
        )
    if kind == "sum":
        _section(raw, name, {"kind", "terms", "normalize"})
        terms = raw.get("terms")
        if not isinstance(terms, list) or not terms:
            raise ConfigError(f"{name}.terms must be a non-empty list of sinusoid specs")
        parsed = []
        for i, t in enumerate(terms):
            s = parse_signal(t, f"{name}.terms[{i}]")
            if not isinstance(s, Sinusoid):
                raise ConfigError(f"{name}.terms[{i}] must be a sinusoid")
            parsed.append(s)
        normalize = raw.get("normalize", False)
        if not isinstance(normalize, bool):
            raise ConfigError(f"{name}.normalize must be a boolean")
        return SumOfSinusoids(tuple(parsed), normalize)
    if kind in ("triangle", "sawtooth"):
        _section(raw, name, {"kind", "amp", "freq_mhz"})
        cls = Triangle if kind == "triangle" else Sawtooth
        return cls(_number(raw, name, "amp", 1.0), _number(raw, name, "freq_mhz", required=True))
    if kind == "tabulated":
        _section(raw, name, {"kind", "path", "band_mhz", "period_us"})
        path = raw.get("path")
        if not isinstance(path, str):
            raise ConfigError(f"{name}.path must be a file path string")
        band = raw.get("band_mhz")
        if not (isinstance(band, list) and len(band) == 2):
            raise ConfigError(f"{name}.band_mhz must be [f_min, f_max] in MHz")
        try:
            data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
        except OSError as e:
            raise ConfigError(f"{name}.path: cannot read {path}: {e}") from e
        if data.shape[1] != 2:
            raise ConfigError(f"{name}.path: expected two columns (time_us, value)")
        w = 2.0 * np.pi * np.asarray(band, dtype=float)
        return Tabulated(data[:, 0], data[:, 1], (w[0], w[1]), _number(raw, name, "period_us"))
    raise ConfigError(f"{name}.kind {kind!r} not one of sinusoid|sum|triangle|sawtooth|tabulated")


@dataclass(frozen=True)
class RunConfig:
    """Parsed configuration for one CLI invocation."""

    n_qubits: int = 1
    kappa1: float = 1.0
    kappa2: float = 0.0
    signals: tuple[ControlSignal, ...] = (Sinusoid(1.0, 0.05, 0.0),)
    m_pulses: int = 20
    xi: tuple[float, ...] | None = None
    l_max: int = 50
    reference_refinement: int = 1
    t_total_us: float = 20.0
    axis: str = "t"
    values: tuple[float, ...] = ()
    methods: tuple[str, ...] = ("pwm",)
    repetitions: int = 5
    delta_amp_us: float = 0.0
    trials: int = 200
    n_checkpoints: int = 10
    bench_mode: str = "equal_m"
    target_error: float | None = None
    gaussian: bool = False
    out_dir: str = "out"
    formats: tuple[str, ...] = ("csv", "json")
    seed: int | None = None
    raw: dict = field(default_factory=dict, compare=False)

    def sweep_spec(self, **overrides) -> SweepSpec:
        values = self.values or (self.t_total_us,)
        kw = dict(
            axis=self.axis,
            values=values,
            n_qubits=self.n_qubits,
            kappa1=self.kappa1,
            kappa2=self.kappa2,
            signals=self.signals,
            m_pulses=self.m_pulses,
            t_total=self.t_total_us,
            xi=self.xi,
            methods=self.methods,
            seed=0 if self.seed is None else self.seed,
            repetitions=self.repetitions,
            delta_amp=self.delta_amp_us,
            trials=self.trials,
            n_checkpoints=self.n_checkpoints,
            bench_mode=self.bench_mode,
            target_error=self.target_error,
        )
        kw.update(overrides)
        try:
            return SweepSpec(**kw)
        except ValueError as e:
            raise ConfigError(str(e)) from e


def parse_config(raw: dict) -> RunConfig:
    _section(raw, "config", {"model", "method", "study", "output", "seed"})
    kw: dict = {"raw": raw}

    model = _section(raw.get("model", {}), "model", {"n_qubits", "kappa1", "kappa2", "signals"})
    kw["n_qubits"] = _integer(model, "model", "n_qubits", 1)
    kw["kappa1"] = _number(model, "model", "kappa1", 1.0)
    kw["kappa2"] = _number(model, "model", "kappa2", 0.0)
    if "signals" in model:
        sigs = model["signals"]
        if not isinstance(sigs, list) or not sigs:
            raise ConfigError("model.signals must be a non-empty list")
        try:
            kw["signals"] = tuple(parse_signal(s, f"model.signals[{i}]") for i, s in enumerate(sigs))
        except (ValueError, TypeError) as e:
            raise ConfigError(f"model.signals: {e}") from e

    method = _section(
        raw.get("method", {}), "method", {"m_pulses", "xi", "l_max", "reference_refinement"}
    )
    kw["m_pulses"] = _integer(method, "method", "m_pulses", 20)
    kw["l_max"] = _integer(method, "method", "l_max", 50)
    kw["reference_refinement"] = _integer(method, "method", "reference_refinement", 1)
    if method.get("xi") is not None:
        xi = method["xi"]
        if not isinstance(xi, list) or not all(isinstance(x, (int, float)) for x in xi):
            raise ConfigError("method.xi must be a list of numbers or null")
        kw["xi"] = tuple(float(x) for x in xi)

    study = _section(
        raw.get("study", {}),
        "study",
        {
            "axis",
            "values",
            "methods",
            "repetitions",
            "delta_amp_us",
            "trials",
            "n_checkpoints",
            "t_total_us",
            "bench_mode",
            "target_error",
            "gaussian",
        },
    )
    kw["t_total_us"] = _number(study, "study", "t_total_us", 20.0)
    if "axis" in study:
        kw["axis"] = study["axis"]
    if "values" in study:
        vals = study["values"]
        if not isinstance(vals, list) or not all(isinstance(v, (int, float)) for v in vals):
            raise ConfigError("study.values must be a list of numbers")
        kw["values"] = tuple(float(v) for v in vals)
    if "methods" in study:
        meths = study["methods"]
        if not isinstance(meths, list) or not all(isinstance(m, str) for m in meths):
            raise ConfigError("study.methods must be a list of method names")
        kw["methods"] = tuple(meths)
    kw["repetitions"] = _integer(study, "study", "repetitions", 5)
    kw["delta_amp_us"] = _number(study, "study", "delta_amp_us", 0.0)
    kw["trials"] = _integer(study, "study", "trials", 200)
    kw["n_checkpoints"] = _integer(study, "study", "n_checkpoints", 10)
    if "bench_mode" in study:
        kw["bench_mode"] = study["bench_mode"]
    if study.get("target_error") is not None:
        kw["target_error"] = _number(study, "study", "target_error")
    if "gaussian" in study:
        if not isinstance(study["gaussian"], bool):
            raise ConfigError("study.gaussian must be a boolean")
        kw["gaussian"] = study["gaussian"]

    output = _section(raw.get("output", {}), "output", {"directory", "formats"})
    if "directory" in output:
        if not isinstance(output["directory"], str):
            raise ConfigError("output.directory must be a path string")
        kw["out_dir"] = output["directory"]
    if "formats" in output:
        fmts = output["formats"]
        if not isinstance(fmts, list) or any(f not in FORMATS for f in fmts):
            raise ConfigError(f"output.formats must be a list drawn from {FORMATS}")
        kw["formats"] = tuple(fmts)

    if "seed" in raw:
        if isinstance(raw["seed"], bool) or not isinstance(raw["seed"], int) or raw["seed"] < 0:
            raise ConfigError("seed must be a non-negative integer")
        kw["seed"] = raw["seed"]

    cfg = RunConfig(**kw)
    cfg.sweep_spec()  # validate axis/values/methods eagerly
    return cfg


def load_config(path: str | Path | None) -> RunConfig:
    """Read and validate a JSON config file; None gives the defaults."""
    if path is None:
        return parse_config({})
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: line {e.lineno}: {e.msg}") from e
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    return parse_config(raw)
