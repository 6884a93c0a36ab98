"""Scenario execution: sweeps, CSV artifacts, and summary records.

Each run produces deterministic CSV files (see ``csvio``) plus one summary
record of the key scalars.  Sweep points may execute in parallel worker
threads; artifact assembly always happens in sweep order so repeated runs
are byte-identical.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import adiabatic, gaussian, transmission
from .config import ConfigError, ScenarioConfig, apply_sweep_point
from .csvio import build_csv, format_value, write_atomic
from .model import ConstantCoupling

__all__ = ["RunArtifacts", "SummaryRecord", "run_scenario", "emit_summary"]


@dataclass(frozen=True)
class SummaryRecord:
    label: str
    scalars: tuple[tuple[str, float], ...]

    def line(self) -> str:
        parts = [self.label]
        parts += [f"{k}={format_value(v)}" for k, v in self.scalars]
        return " ".join(parts)


@dataclass(frozen=True)
class RunArtifacts:
    files: tuple[Path, ...]
    summaries: tuple[SummaryRecord, ...]


class ScenarioError(RuntimeError):
    """A run failed; the message carries the sweep point context."""


def _check_finite(scalars: list[tuple[str, float]]) -> tuple[tuple[str, float], ...]:
    for key, value in scalars:
        if not math.isfinite(value):
            raise ScenarioError(f"summary scalar {key} is not finite: {value}")
    return tuple(scalars)


def _point_label(config: ScenarioConfig, idx: int) -> str:
    if config.sweep is None:
        return config.scenario
    names = config.sweep.parameters
    values = config.sweep.points[idx]
    inner = ",".join(f"{n}={format_value(v)}" for n, v in zip(names, values))
    return f"{config.scenario}[{inner}]"


def _base_name(config: ScenarioConfig) -> str:
    base = config.output_path or config.scenario
    if base.endswith(".csv"):
        base = base[:-4]
    return base


def _map_points(config: ScenarioConfig, worker, jobs: int) -> list:
    indices = range(config.n_runs)
    if jobs <= 1 or config.n_runs == 1:
        return [worker(i) for i in indices]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, indices))


def _run_convert(config: ScenarioConfig, out_dir: Path, jobs: int) -> RunArtifacts:
    schedule = config.schedule
    duration = schedule.duration

    def run_point(idx: int):
        cfg = apply_sweep_point(config, idx)
        initial = gaussian.make_squeezed_coherent(cfg.alpha, cfg.r, cfg.phi)
        state0 = gaussian.embed_initial(initial, cfg.mech_occupation)
        traj = gaussian.integrate(state0, cfg.params, schedule, duration)
        final = gaussian.reduce_to_mode(traj.final, 3)
        f_num = gaussian.gaussian_fidelity(initial, final)
        report = None
        try:
            report = adiabatic.analytic_fidelity(
                cfg.alpha, cfg.r, cfg.phi, cfg.params, schedule, duration
            )
        except adiabatic.AdiabaticError:
            pass  # outside the expansion regime; numeric fidelity stands alone
        f_ref = None
        if config.delta_f:
            quiet = dataclasses.replace(cfg.params, gamma_m=0.0, n_th=0.0)
            traj_ref = gaussian.integrate(state0, quiet, schedule, duration)
            f_ref = gaussian.gaussian_fidelity(
                initial, gaussian.reduce_to_mode(traj_ref.final, 3)
            )
        return cfg, f_num, report, f_ref

    results = _map_points(config, run_point, jobs)

    sweep_names = list(config.sweep.parameters) if config.sweep else []
    header = sweep_names + ["F_numeric", "F1_analytic", "F_analytic", "F2_analytic", "f0T", "fs"]
    if config.delta_f:
        header += ["F_reference", "delta_F", "fs_bound"]
    rows = []
    summaries = []
    for idx, (cfg, f_num, report, f_ref) in enumerate(results):
        row: list = [v for v in (config.sweep.points[idx] if config.sweep else [])]
        scalars = [("F", f_num)]
        if report is not None:
            row += [f_num, report.F1, report.F, report.F2, report.f0T, report.fs]
            scalars += [("F1", report.F1), ("F2", report.F2), ("F_analytic", report.F),
                        ("f0T", report.f0T), ("fs", report.fs)]
        else:
            row += [f_num, "", "", "", "", ""]
        if config.delta_f:
            fsb = adiabatic.fs_bound(cfg.params, schedule, duration)
            row += [f_ref, abs(f_num - f_ref), fsb]
            scalars += [("F_reference", f_ref), ("delta_F", abs(f_num - f_ref)),
                        ("fs_bound", fsb)]
        rows.append(row)
        summaries.append(SummaryRecord(_point_label(config, idx), _check_finite(scalars)))

    path = write_atomic(out_dir / f"{_base_name(config)}.csv", build_csv(header, rows))
    return RunArtifacts(files=(path,), summaries=tuple(summaries))


def _run_spectrum(config: ScenarioConfig, out_dir: Path, jobs: int) -> RunArtifacts:
    omegas = np.linspace(config.omega_min, config.omega_max, config.n_omega)

    def run_point(idx: int):
        cfg = apply_sweep_point(config, idx)
        sched = cfg.schedule
        assert isinstance(sched, ConstantCoupling)
        spec = transmission.transmission_spectrum(cfg.params, sched.g1, sched.g2, omegas)
        res = transmission.t31_resonant(cfg.params, sched.g1, sched.g2)
        hw_an, hw_num = transmission.half_width(cfg.params, sched.g1, sched.g2)
        return cfg, spec, res, hw_an, hw_num

    results = _map_points(config, run_point, jobs)
    base = _base_name(config)
    files = []
    summaries = []
    for idx, (cfg, spec, res, hw_an, hw_num) in enumerate(results):
        name = f"{base}.csv" if config.n_runs == 1 else f"{base}_{idx + 1:03d}.csv"
        files.append(write_atomic(out_dir / name, transmission.spectrum_to_csv(spec)))
        scalars = _check_finite(
            [
                ("t31_0", res.value),
                ("optimal", 1.0 if res.optimal else 0.0),
                ("half_width_analytic", hw_an),
                ("half_width_numeric", hw_num),
            ]
        )
        summaries.append(SummaryRecord(_point_label(config, idx), scalars))
    return RunArtifacts(files=tuple(files), summaries=tuple(summaries))


def _run_pulse(config: ScenarioConfig, out_dir: Path, jobs: int) -> RunArtifacts:
    time_domain = config.scenario == "engineer"

    def run_point(idx: int):
        cfg = apply_sweep_point(config, idx)
        p_in = transmission.gaussian_pulse(
            cfg.sigma_omega, cfg.pulse_amplitude, cfg.pulse_points
        )
        if time_domain:
            p_out = transmission.transmit_pulse_time(p_in, cfg.params, cfg.schedule)
        else:
            sched = cfg.schedule
            assert isinstance(sched, ConstantCoupling)
            p_out = transmission.transmit_pulse_freq(p_in, cfg.params, sched.g1, sched.g2)
        fp = transmission.pulse_fidelity(p_in, p_out)
        energy = transmission.pulse_energy(p_out) / transmission.pulse_energy(p_in)
        hw = None
        res = None
        if not time_domain:
            res = transmission.t31_resonant(cfg.params, cfg.schedule.g1, cfg.schedule.g2)
            hw = transmission.half_width(cfg.params, cfg.schedule.g1, cfg.schedule.g2)
        return cfg, p_in, p_out, fp, energy, res, hw

    results = _map_points(config, run_point, jobs)
    base = _base_name(config)
    files = []
    summaries = []
    summary_rows = []
    sweep_names = list(config.sweep.parameters) if config.sweep else []
    summary_header = sweep_names + ["pulse_fidelity", "energy_ratio"]
    if not time_domain:
        summary_header += ["t31_0", "half_width_analytic", "half_width_numeric"]
    for idx, (cfg, p_in, p_out, fp, energy, res, hw) in enumerate(results):
        tag = "" if config.n_runs == 1 else f"_{idx + 1:03d}"
        files.append(
            write_atomic(out_dir / f"{base}{tag}_in.csv", transmission.pulse_to_csv(p_in))
        )
        files.append(
            write_atomic(out_dir / f"{base}{tag}_out.csv", transmission.pulse_to_csv(p_out))
        )
        row: list = [v for v in (config.sweep.points[idx] if config.sweep else [])]
        row += [fp, energy]
        scalars = [("Fp", fp), ("energy_ratio", energy)]
        if not time_domain:
            row += [res.value, hw[0], hw[1]]
            scalars += [
                ("t31_0", res.value),
                ("half_width_analytic", hw[0]),
                ("half_width_numeric", hw[1]),
            ]
        summary_rows.append(row)
        summaries.append(SummaryRecord(_point_label(config, idx), _check_finite(scalars)))
    files.append(
        write_atomic(out_dir / f"{base}_summary.csv", build_csv(summary_header, summary_rows))
    )
    return RunArtifacts(files=tuple(files), summaries=tuple(summaries))


def run_scenario(config: ScenarioConfig, out_dir: Path | str = ".", jobs: int = 1) -> RunArtifacts:
    """Execute a validated configuration and write its artifacts under out_dir."""
    out = Path(out_dir)
    try:
        if config.scenario == "convert":
            return _run_convert(config, out, jobs)
        if config.scenario == "spectrum":
            return _run_spectrum(config, out, jobs)
        if config.scenario in ("transmit", "engineer"):
            return _run_pulse(config, out, jobs)
    except ScenarioError:
        raise
    except ConfigError:
        raise
    except Exception as exc:
        raise ScenarioError(f"{config.scenario} run failed: {exc}") from exc
    raise ConfigError(f"unknown scenario {config.scenario!r}")


def emit_summary(artifacts: RunArtifacts) -> int:
    """Print one line per run; the exit code contract lives in the CLI."""
    for record in artifacts.summaries:
        print(record.line())
    return 0
