"""Declarative experiment runner: polarization, depolarization, squeezing,
steady-state scans and N-sweeps with exponential fits."""

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import yaml

from .blockspace import build_block_space
from .channels import (
    LiouvillianSpec,
    collective_depolarizing_channel,
    polarizing_channel,
    symmetric_depolarizing_channel,
)
from .dynamics import (
    DEFAULT_CONFIG,
    DiagonalEvolution,
    IntegratorConfig,
    evolve,
    steady_state,
)
from .fitting import FitResult, extrapolate, fit_exponent
from .observables import (
    expectation,
    log10_purity,
    log10_symmetric_overlap,
    record_observables,
    symmetric_overlap,
    uncertainty,
)
from .operators import collective_generator, counter_twisting_hamiltonian
from .reporting import (
    write_records_csv,
    write_scan_csv,
    write_summary,
    write_sweep_csv,
)
from .states import coherent_state, mixed_collective_state

SCENARIO_KINDS = ("pump_to_f", "depolarize_to_f", "squeeze", "steady_state_scan", "sweep")
SQUEEZE_MODELS = ("symmetric", "collective", "none")
SCAN_CHANNELS = ("symmetric_depolarizing", "collective_depolarizing", "polarizing")
SWEEP_EXPERIMENTS = ("pump", "depolarize")


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete description of one reproducible run."""

    kind: str
    n: object = 50                  # int, or list of ints for scans/sweeps
    gamma: float = 1.0
    coupling: float = 0.02          # squeeze: twisting strength
    decoherence: str = "symmetric"  # squeeze: symmetric | collective | none
    target_f: float = 0.95
    horizon: float | None = None
    samples: int = 101
    experiment: str = "pump"        # sweep: pump | depolarize
    f_targets: tuple | None = None  # sweep
    channel: str = "symmetric_depolarizing"  # steady_state_scan
    rtol: float | None = None
    atol: float | None = None
    out_dir: str = "out"
    seed: int = 0
    threads: int = 1
    figures: bool = True
    fit_min_n: int | None = None    # sweep: optional small-N cutoff for fits

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise ValueError(f"kind must be one of {SCENARIO_KINDS}, got {self.kind!r}")
        if self.kind == "squeeze" and self.decoherence not in SQUEEZE_MODELS:
            raise ValueError(f"decoherence must be one of {SQUEEZE_MODELS}")
        if self.kind == "steady_state_scan" and self.channel not in SCAN_CHANNELS:
            raise ValueError(f"channel must be one of {SCAN_CHANNELS}")
        if self.kind == "sweep" and self.experiment not in SWEEP_EXPERIMENTS:
            raise ValueError(f"experiment must be one of {SWEEP_EXPERIMENTS}")
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        if self.samples < 2:
            raise ValueError("need at least two sample times")
        if self.kind in ("pump_to_f", "depolarize_to_f") and not 0.0 < self.target_f < 1.0:
            raise ValueError("target_f must lie in (0, 1)")

    def integrator(self) -> IntegratorConfig:
        cfg = DEFAULT_CONFIG
        if self.rtol is not None or self.atol is not None:
            cfg = replace(
                cfg,
                rtol=self.rtol if self.rtol is not None else cfg.rtol,
                atol=self.atol if self.atol is not None else cfg.atol,
            )
        return cfg

    def n_list(self) -> list:
        if isinstance(self.n, (list, tuple)):
            return [int(v) for v in self.n]
        return [int(self.n)]


def config_from_file(path) -> ScenarioConfig:
    """Load a ScenarioConfig from a YAML mapping (schema in the README)."""
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ValueError(f"config file {path} must contain a mapping")
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> ScenarioConfig:
    known = set(ScenarioConfig.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if "f_targets" in raw and raw["f_targets"] is not None:
        raw = dict(raw)
        raw["f_targets"] = tuple(float(f) for f in raw["f_targets"])
    return ScenarioConfig(**raw)


# ---------------------------------------------------------------------------
# single-trajectory experiments
# ---------------------------------------------------------------------------

def _auto_horizon_to_f(kind: str, target_f: float, gamma: float) -> float:
    # exponential approach rates of the pump / depolarize channels
    if kind == "pump_to_f":
        return 1.5 * (-np.log(1.0 - target_f)) / gamma + 1.0 / gamma
    return 1.5 * (-np.log(target_f)) / gamma + 1.0 / gamma


def _run_to_fraction(config: ScenarioConfig, out: Path) -> dict:
    n = int(config.n_list()[0])
    space = build_block_space(n)
    cfg = config.integrator()
    if config.kind == "pump_to_f":
        spec = polarizing_channel(config.gamma)
        initial = mixed_collective_state(space)
        direction = "rising"
    else:
        spec = symmetric_depolarizing_channel(config.gamma)
        initial = coherent_state(space, 0.0, 0.0)
        direction = "falling"
    t_max = config.horizon or _auto_horizon_to_f(config.kind, config.target_f, config.gamma)

    engine = DiagonalEvolution(spec, space)
    _, t_cross = engine.until_fraction(initial, config.target_f, direction, cfg, t_max=t_max)
    times = np.linspace(0.0, t_cross, config.samples)
    states = engine.evolve(initial, times, cfg)
    records = [record_observables(s, t) for s, t in zip(states, times)]
    write_records_csv(out / "timeseries.csv", records, space)

    final = records[-1]
    summary = {
        "kind": config.kind,
        "n": n,
        "gamma": config.gamma,
        "target_f": config.target_f,
        "t_cross": t_cross,
        "final": {
            "f": final.f,
            "log10_purity": final.log10_purity,
            "log10_symmetric_overlap": final.log10_symmetric_overlap,
            "purity": 10.0 ** final.log10_purity,
            "symmetric_overlap": 10.0 ** final.log10_symmetric_overlap,
            "delta_jx": final.delta_jx,
            "delta_jy": final.delta_jy,
        },
    }
    if config.figures:
        from .figures import render_timeseries

        render_timeseries(records, space, out / "figure_timeseries.png")
    return summary


def _squeeze_spec(config: ScenarioConfig, space) -> LiouvillianSpec:
    ham = counter_twisting_hamiltonian(space, config.coupling)
    if config.decoherence == "symmetric":
        return LiouvillianSpec(
            hamiltonian=ham,
            local_channels=symmetric_depolarizing_channel(config.gamma).local_channels,
        )
    if config.decoherence == "collective":
        return LiouvillianSpec(
            hamiltonian=ham,
            collective_channels=collective_depolarizing_channel(space, config.gamma).collective_channels,
        )
    return LiouvillianSpec(hamiltonian=ham)


def _run_squeeze(config: ScenarioConfig, out: Path) -> dict:
    n = int(config.n_list()[0])
    space = build_block_space(n)
    spec = _squeeze_spec(config, space)
    horizon = config.horizon or 2.0 / max(config.coupling * n, 1e-12)
    times = np.linspace(0.0, horizon, config.samples)
    states = evolve(spec, coherent_state(space, 0.0, 0.0), times, config.integrator())
    records = [record_observables(s, t) for s, t in zip(states, times)]
    write_records_csv(out / "timeseries.csv", records, space)

    xi = np.array([r.xi_squared for r in records])
    k_min = int(np.nanargmin(xi))
    summary = {
        "kind": "squeeze",
        "n": n,
        "gamma": config.gamma,
        "coupling": config.coupling,
        "decoherence": config.decoherence,
        "horizon": horizon,
        "min_xi_squared": float(xi[k_min]),
        "argmin_time": float(times[k_min]),
        "final": {"f": records[-1].f, "log10_purity": records[-1].log10_purity},
    }
    if config.figures:
        from .figures import render_squeezing

        render_squeezing(records, out / "figure_squeezing.png")
    return summary


# ---------------------------------------------------------------------------
# scans and sweeps
# ---------------------------------------------------------------------------

def _scan_one(args):
    n, channel, gamma = args
    space = build_block_space(n)
    if channel == "symmetric_depolarizing":
        spec = symmetric_depolarizing_channel(gamma)
        initial = None
    elif channel == "collective_depolarizing":
        spec = collective_depolarizing_channel(space, gamma)
        initial = coherent_state(space, 0.0, 0.0)  # resolves the conserved block populations
    else:
        spec = polarizing_channel(gamma)
        initial = None
    ss = steady_state(spec, space, initial=initial)
    row = {"n": n, "channel": channel}
    for axis in ("x", "y", "z"):
        row[f"delta_j{axis}"] = uncertainty(ss, collective_generator(space, axis))
    row["log10_purity"] = log10_purity(ss)
    row["symmetric_overlap"] = symmetric_overlap(ss)
    return row


def _run_steady_scan(config: ScenarioConfig, out: Path) -> dict:
    ns = config.n_list()
    jobs = [(n, config.channel, config.gamma) for n in ns]
    rows = _map_jobs(_scan_one, jobs, config.threads)
    write_scan_csv(out / "scan.csv", rows)
    summary = {
        "kind": "steady_state_scan",
        "channel": config.channel,
        "n_list": ",".join(str(n) for n in ns),
        "delta_jx": {str(r["n"]): r["delta_jx"] for r in rows},
    }
    if config.figures:
        from .figures import render_scan

        render_scan(rows, out / "figure_scan.png")
    return summary


def _sweep_one(args):
    n, experiment, gamma, targets, rtol, atol = args
    space = build_block_space(n)
    cfg = DEFAULT_CONFIG
    if rtol is not None or atol is not None:
        cfg = replace(cfg, rtol=rtol or cfg.rtol, atol=atol or cfg.atol)
    if experiment == "pump":
        spec = polarizing_channel(gamma)
        initial = mixed_collective_state(space)
        direction = "rising"
        t_max = 1.5 * (-np.log(1.0 - max(targets))) / gamma + 1.0 / gamma
    else:
        spec = symmetric_depolarizing_channel(gamma)
        initial = coherent_state(space, 0.0, 0.0)
        direction = "falling"
        t_max = 1.5 * (-np.log(min(targets))) / gamma + 1.0 / gamma
    engine = DiagonalEvolution(spec, space)
    jx = collective_generator(space, "x")
    jy = collective_generator(space, "y")
    jz = collective_generator(space, "z")
    rows = []
    for (state, t_cross), f_t in zip(engine.crossings(initial, targets, direction, cfg, t_max), targets):
        rows.append(
            {
                "n": n,
                "f_target": f_t,
                "t_cross": t_cross,
                "f": expectation(state, jz).real / (n / 2),
                "jz": expectation(state, jz).real,
                "delta_jx": uncertainty(state, jx),
                "delta_jy": uncertainty(state, jy),
                "log10_purity": log10_purity(state),
                "log10_symmetric_overlap": log10_symmetric_overlap(state),
            }
        )
    return rows


def default_sweep_grid(n_max: int = 120, n_step: int = 4, n_min: int = 4) -> list:
    return list(range(n_min, n_max + 1, n_step))


def sweep_fits(rows, f_targets, min_n: int | None = None) -> dict:
    """Per-target FitResults for purity and symmetric overlap."""
    fits = {}
    for f_t in f_targets:
        sel = [r for r in rows if abs(r["f_target"] - f_t) < 1e-12]
        if min_n is not None:
            sel = [r for r in sel if r["n"] >= min_n]
        fits[f_t] = {
            "purity": fit_exponent([(r["n"], r["log10_purity"]) for r in sel]),
            "overlap": fit_exponent([(r["n"], r["log10_symmetric_overlap"]) for r in sel]),
        }
    return fits


def _run_sweep(config: ScenarioConfig, out: Path) -> dict:
    ns = config.n_list() if isinstance(config.n, (list, tuple)) else default_sweep_grid(int(config.n))
    if config.f_targets:
        targets = list(config.f_targets)
    else:
        targets = [0.90, 0.95, 0.98] if config.experiment == "pump" else [0.90, 0.95]
    jobs = [(n, config.experiment, config.gamma, targets, config.rtol, config.atol) for n in ns]
    per_n = _map_jobs(_sweep_one, jobs, config.threads)
    rows = [row for chunk in per_n for row in chunk]
    write_sweep_csv(out / "sweep.csv", rows)

    fits = sweep_fits(rows, targets, config.fit_min_n) if len(ns) >= 4 else {}
    summary = {
        "kind": "sweep",
        "experiment": config.experiment,
        "gamma": config.gamma,
        "n_grid": ",".join(str(n) for n in ns),
        "fits": {},
    }
    for f_t, pair in fits.items():
        for which in ("purity", "overlap"):
            fr: FitResult = pair[which]
            key = f"f={f_t:g}.{which}"
            summary["fits"][key] = {
                "eta": fr.eta,
                "intercept": fr.intercept,
                "residual_rms": fr.residual_rms,
                "log10_at_1e6": extrapolate(fr, 1e6),
            }
    if config.figures:
        from .figures import render_sweep

        render_sweep(rows, fits, out / "figure_sweep.png")
    return summary


def _map_jobs(fn, jobs, threads: int):
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def run_scenario(config: ScenarioConfig) -> dict:
    """Execute a scenario, write its outputs and return the summary dict."""
    out = Path(config.out_dir)
    os.makedirs(out, exist_ok=True)
    if config.kind in ("pump_to_f", "depolarize_to_f"):
        summary = _run_to_fraction(config, out)
    elif config.kind == "squeeze":
        summary = _run_squeeze(config, out)
    elif config.kind == "steady_state_scan":
        summary = _run_steady_scan(config, out)
    else:
        summary = _run_sweep(config, out)
    summary["seed"] = config.seed
    write_summary(out / "summary.txt", summary)
    return summary
