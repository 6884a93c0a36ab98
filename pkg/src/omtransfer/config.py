"""Line-based scenario configuration: parsing, validation, serialization.

Format: ``[section]`` headers with ``key = value`` lines; ``#`` starts a
full-line comment.  Sections are scenario, params, schedule, initial,
pulse, sweep, and output.  Unknown sections or keys are rejected by name,
malformed numbers are reported with their line number, and a parsed
config serializes back to an equivalent file (round-trip safe).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

from .model import (
    ConstantCoupling,
    CouplingSchedule,
    ModelError,
    PiecewiseLinearSchedule,
    SystemParams,
    TanhRampSchedule,
    TrigSchedule,
)

__all__ = ["ConfigError", "Sweep", "ScenarioConfig", "parse_config", "serialize_config"]

SCENARIOS = ("convert", "spectrum", "transmit", "engineer")

_KEYS = {
    "scenario": {"type", "g_ref", "delta_f", "omega_min", "omega_max", "n_omega"},
    "params": {"kappa1", "kappa2", "gamma_m", "n_th", "omega_m", "detuning1", "detuning2"},
    "schedule": {"type", "amplitude", "duration", "g1", "g2", "points", "g_max", "center", "width"},
    "initial": {"alpha_re", "alpha_im", "r", "phi", "mech_occupation"},
    "pulse": {"sigma_omega", "amplitude", "n_points"},
    "sweep": {"parameter", "values"},
    "output": {"path"},
}

SWEEPABLE = {
    "kappa1", "kappa2", "gamma_m", "n_th",
    "alpha_re", "alpha_im", "r", "phi", "mech_occupation",
    "sigma_omega",
}


class ConfigError(ValueError):
    """Malformed or inconsistent scenario configuration."""


@dataclass(frozen=True)
class Sweep:
    parameters: tuple[str, ...]
    points: tuple[tuple[float, ...], ...]


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    params: SystemParams
    schedule: CouplingSchedule
    g_ref: float = 1.0
    alpha: complex = 1.0 + 0.0j
    r: float = 0.0
    phi: float = 0.0
    mech_occupation: float = 0.0
    sigma_omega: float | None = None
    pulse_amplitude: float = 1.0
    pulse_points: int = 4096
    omega_min: float = -0.3
    omega_max: float = 0.3
    n_omega: int = 601
    delta_f: bool = False
    sweep: Sweep | None = None
    output_path: str = ""

    @property
    def n_runs(self) -> int:
        return len(self.sweep.points) if self.sweep is not None else 1


class _RawConfig:
    def __init__(self, text: str) -> None:
        self.entries: dict[tuple[str, str], tuple[str, int]] = {}
        section = None
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1].strip().lower()
                if section not in _KEYS:
                    raise ConfigError(f"unknown section [{section}] at line {lineno}")
                continue
            if "=" not in line:
                raise ConfigError(f"expected 'key = value' at line {lineno}: {raw!r}")
            if section is None:
                raise ConfigError(f"key outside any section at line {lineno}")
            key, _, value = line.partition("=")
            key = key.strip().lower()
            value = value.strip()
            if key not in _KEYS[section]:
                raise ConfigError(f"unknown key {key} in [{section}]")
            if (section, key) in self.entries:
                raise ConfigError(f"duplicate key {key} in [{section}] at line {lineno}")
            self.entries[(section, key)] = (value, lineno)

    def get(self, section: str, key: str) -> tuple[str, int] | None:
        return self.entries.get((section, key))

    def text(self, section: str, key: str, default: str | None = None) -> str | None:
        hit = self.get(section, key)
        return default if hit is None else hit[0]

    def number(self, section: str, key: str, default: float | None = None) -> float | None:
        hit = self.get(section, key)
        if hit is None:
            return default
        value, lineno = hit
        try:
            return float(value)
        except ValueError:
            raise ConfigError(
                f"malformed number for {key} in [{section}] at line {lineno}: {value!r}"
            ) from None

    def integer(self, section: str, key: str, default: int | None = None) -> int | None:
        hit = self.get(section, key)
        if hit is None:
            return default
        value, lineno = hit
        try:
            return int(value)
        except ValueError:
            raise ConfigError(
                f"malformed integer for {key} in [{section}] at line {lineno}: {value!r}"
            ) from None

    def boolean(self, section: str, key: str, default: bool = False) -> bool:
        hit = self.get(section, key)
        if hit is None:
            return default
        value, lineno = hit
        lowered = value.lower()
        if lowered in ("true", "yes", "1"):
            return True
        if lowered in ("false", "no", "0"):
            return False
        raise ConfigError(f"malformed boolean for {key} in [{section}] at line {lineno}")


def _require(raw: _RawConfig, section: str, key: str) -> tuple[str, int]:
    hit = raw.get(section, key)
    if hit is None:
        raise ConfigError(f"missing required key {key} in [{section}]")
    return hit


def _parse_schedule(raw: _RawConfig) -> CouplingSchedule:
    kind, lineno = _require(raw, "schedule", "type")
    kind = kind.lower()
    try:
        if kind == "trig":
            amp = raw.number("schedule", "amplitude")
            dur = raw.number("schedule", "duration")
            if amp is None or dur is None:
                raise ConfigError("trig schedule needs amplitude and duration")
            return TrigSchedule(amplitude=amp, duration=dur)
        if kind == "constant":
            g1 = raw.number("schedule", "g1")
            g2 = raw.number("schedule", "g2")
            if g1 is None or g2 is None:
                raise ConfigError("constant schedule needs g1 and g2")
            dur = raw.number("schedule", "duration", math.inf)
            return ConstantCoupling(g1=g1, g2=g2, duration=dur)
        if kind == "piecewise":
            hit = raw.get("schedule", "points")
            if hit is None:
                raise ConfigError("piecewise schedule needs points = t:g1:g2, ...")
            ts, g1s, g2s = [], [], []
            for chunk in hit[0].split(","):
                parts = chunk.strip().split(":")
                if len(parts) != 3:
                    raise ConfigError(
                        f"malformed breakpoint {chunk.strip()!r} at line {hit[1]}; "
                        "expected t:g1:g2"
                    )
                try:
                    t, g1, g2 = (float(p) for p in parts)
                except ValueError:
                    raise ConfigError(
                        f"malformed number in breakpoint {chunk.strip()!r} at line {hit[1]}"
                    ) from None
                ts.append(t)
                g1s.append(g1)
                g2s.append(g2)
            return PiecewiseLinearSchedule(
                times=tuple(ts), g1_values=tuple(g1s), g2_values=tuple(g2s)
            )
        if kind == "tanh":
            vals = {k: raw.number("schedule", k) for k in ("g_max", "center", "width", "duration")}
            if any(v is None for v in vals.values()):
                raise ConfigError("tanh schedule needs g_max, center, width, duration")
            return TanhRampSchedule(**vals)
    except ModelError as exc:
        raise ConfigError(f"invalid schedule: {exc}") from exc
    raise ConfigError(f"unknown schedule type {kind!r} at line {lineno}")


def _parse_sweep(raw: _RawConfig) -> Sweep | None:
    par = raw.get("sweep", "parameter")
    vals = raw.get("sweep", "values")
    if par is None and vals is None:
        return None
    if par is None or vals is None:
        raise ConfigError("[sweep] needs both parameter and values")
    names = tuple(p.strip().lower() for p in par[0].split(","))
    for name in names:
        if name not in SWEEPABLE:
            raise ConfigError(
                f"sweep parameter {name!r} does not name a sweepable field "
                f"(choose from {sorted(SWEEPABLE)})"
            )
    points = []
    for chunk in vals[0].split(","):
        parts = chunk.strip().split(":")
        if len(parts) != len(names):
            raise ConfigError(
                f"sweep point {chunk.strip()!r} has {len(parts)} values for "
                f"{len(names)} parameter(s)"
            )
        try:
            points.append(tuple(float(p) for p in parts))
        except ValueError:
            raise ConfigError(
                f"malformed number in sweep values at line {vals[1]}: {chunk.strip()!r}"
            ) from None
    if not points:
        raise ConfigError("sweep values list is empty")
    return Sweep(parameters=names, points=tuple(points))


def parse_config(text: str) -> ScenarioConfig:
    """Parse and fully validate one scenario configuration."""
    raw = _RawConfig(text)
    scenario, _ = _require(raw, "scenario", "type")
    scenario = scenario.lower()
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario type {scenario!r}; expected one of {SCENARIOS}")

    g_ref = raw.number("scenario", "g_ref", 1.0)
    if g_ref <= 0:
        raise ConfigError("g_ref must be positive")

    try:
        params = SystemParams(
            kappa1=raw.number("params", "kappa1", 0.0),
            kappa2=raw.number("params", "kappa2", 0.0),
            gamma_m=raw.number("params", "gamma_m", 0.0),
            n_th=raw.number("params", "n_th", 0.0),
            omega_m=raw.number("params", "omega_m"),
            detuning1=raw.number("params", "detuning1"),
            detuning2=raw.number("params", "detuning2"),
        )
    except ModelError as exc:
        raise ConfigError(f"invalid [params]: {exc}") from exc

    schedule = _parse_schedule(raw)

    mech_default = params.n_th
    config = ScenarioConfig(
        scenario=scenario,
        params=params,
        schedule=schedule,
        g_ref=g_ref,
        alpha=complex(raw.number("initial", "alpha_re", 1.0), raw.number("initial", "alpha_im", 0.0)),
        r=raw.number("initial", "r", 0.0),
        phi=raw.number("initial", "phi", 0.0),
        mech_occupation=raw.number("initial", "mech_occupation", mech_default),
        sigma_omega=raw.number("pulse", "sigma_omega"),
        pulse_amplitude=raw.number("pulse", "amplitude", 1.0),
        pulse_points=raw.integer("pulse", "n_points", 4096),
        omega_min=raw.number("scenario", "omega_min", -0.3),
        omega_max=raw.number("scenario", "omega_max", 0.3),
        n_omega=raw.integer("scenario", "n_omega", 601),
        delta_f=raw.boolean("scenario", "delta_f", False),
        sweep=_parse_sweep(raw),
        output_path=raw.text("output", "path", "") or scenario,
    )
    _validate(config)
    return config


def _validate(config: ScenarioConfig) -> None:
    if config.r < 0:
        raise ConfigError("squeezing r must be non-negative")
    if config.mech_occupation < 0:
        raise ConfigError("mech_occupation must be non-negative")
    if config.scenario in ("convert", "engineer") and not math.isfinite(config.schedule.duration):
        raise ConfigError(f"{config.scenario} scenario needs a schedule with finite duration")
    if config.scenario in ("spectrum", "transmit") and not isinstance(
        config.schedule, ConstantCoupling
    ):
        raise ConfigError(f"{config.scenario} scenario needs a constant schedule")
    if config.scenario in ("transmit", "engineer"):
        if config.sigma_omega is None or config.sigma_omega <= 0:
            raise ConfigError(f"{config.scenario} scenario needs [pulse] sigma_omega > 0")
        n = config.pulse_points
        if n < 16 or (n & (n - 1)) != 0:
            raise ConfigError("[pulse] n_points must be a power of two >= 16")
    if config.scenario == "spectrum":
        if not (config.omega_min < config.omega_max) or config.n_omega < 2:
            raise ConfigError("spectrum grid needs omega_min < omega_max and n_omega >= 2")
    if config.delta_f and config.scenario != "convert":
        raise ConfigError("delta_f is only meaningful for the convert scenario")


def apply_sweep_point(config: ScenarioConfig, point_index: int) -> ScenarioConfig:
    """Materialize one sweep point as a standalone configuration.

    mech_occupation keeps its configured value even when n_th is swept:
    the parse-time default couples them once, after which the initial
    mechanical state and the bath are independent knobs.
    """
    if config.sweep is None:
        if point_index != 0:
            raise ConfigError("no sweep defined")
        return config
    names = config.sweep.parameters
    values = config.sweep.points[point_index]
    params_kw = {}
    cfg_kw: dict[str, object] = {}
    alpha_re, alpha_im = config.alpha.real, config.alpha.imag
    for name, value in zip(names, values):
        if name in ("kappa1", "kappa2", "gamma_m", "n_th"):
            params_kw[name] = value
        elif name == "alpha_re":
            alpha_re = value
        elif name == "alpha_im":
            alpha_im = value
        else:
            cfg_kw[name] = value
    if params_kw:
        try:
            cfg_kw["params"] = dataclasses.replace(config.params, **params_kw)
        except ModelError as exc:
            raise ConfigError(f"invalid sweep point {values}: {exc}") from exc
    cfg_kw["alpha"] = complex(alpha_re, alpha_im)
    cfg_kw["sweep"] = None
    return dataclasses.replace(config, **cfg_kw)


def serialize_config(config: ScenarioConfig) -> str:
    """Canonical text form; parse_config(serialize_config(c)) == c."""
    lines = ["[scenario]", f"type = {config.scenario}", f"g_ref = {config.g_ref!r}"]
    if config.delta_f:
        lines.append("delta_f = true")
    if config.scenario == "spectrum":
        lines += [
            f"omega_min = {config.omega_min!r}",
            f"omega_max = {config.omega_max!r}",
            f"n_omega = {config.n_omega}",
        ]
    p = config.params
    lines += ["", "[params]"]
    lines += [f"kappa1 = {p.kappa1!r}", f"kappa2 = {p.kappa2!r}"]
    lines += [f"gamma_m = {p.gamma_m!r}", f"n_th = {p.n_th!r}"]
    for key in ("omega_m", "detuning1", "detuning2"):
        value = getattr(p, key)
        if value is not None:
            lines.append(f"{key} = {value!r}")
    lines += ["", "[schedule]"]
    s = config.schedule
    if isinstance(s, TrigSchedule):
        lines += ["type = trig", f"amplitude = {s.amplitude!r}", f"duration = {s.duration!r}"]
    elif isinstance(s, ConstantCoupling):
        lines += ["type = constant", f"g1 = {s.g1!r}", f"g2 = {s.g2!r}"]
        if math.isfinite(s.duration):
            lines.append(f"duration = {s.duration!r}")
    elif isinstance(s, PiecewiseLinearSchedule):
        pts = ", ".join(
            f"{t!r}:{g1!r}:{g2!r}" for t, g1, g2 in zip(s.times, s.g1_values, s.g2_values)
        )
        lines += ["type = piecewise", f"points = {pts}"]
    elif isinstance(s, TanhRampSchedule):
        lines += [
            "type = tanh",
            f"g_max = {s.g_max!r}",
            f"center = {s.center!r}",
            f"width = {s.width!r}",
            f"duration = {s.duration!r}",
        ]
    else:
        raise ConfigError(f"cannot serialize schedule type {type(s).__name__}")
    lines += ["", "[initial]"]
    lines += [
        f"alpha_re = {config.alpha.real!r}",
        f"alpha_im = {config.alpha.imag!r}",
        f"r = {config.r!r}",
        f"phi = {config.phi!r}",
        f"mech_occupation = {config.mech_occupation!r}",
    ]
    if config.sigma_omega is not None:
        lines += [
            "",
            "[pulse]",
            f"sigma_omega = {config.sigma_omega!r}",
            f"amplitude = {config.pulse_amplitude!r}",
            f"n_points = {config.pulse_points}",
        ]
    if config.sweep is not None:
        lines += ["", "[sweep]", f"parameter = {', '.join(config.sweep.parameters)}"]
        pts = ", ".join(":".join(repr(v) for v in pt) for pt in config.sweep.points)
        lines.append(f"values = {pts}")
    lines += ["", "[output]", f"path = {config.output_path}", ""]
    return "\n".join(lines)
