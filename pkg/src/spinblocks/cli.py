"""Command-line interface: run configs, sweeps, fits and oracle verification."""

import argparse
import sys

import numpy as np

from .fitting import fit_exponent
from .reporting import read_sweep_csv
from .scenarios import (
    ScenarioConfig,
    config_from_file,
    default_sweep_grid,
    run_scenario,
)


def _add_common(parser):
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--threads", type=int, default=None, help="worker pool size")
    parser.add_argument("--rtol", type=float, default=None, help="integrator relative tolerance")
    parser.add_argument("--atol", type=float, default=None, help="integrator absolute tolerance")
    parser.add_argument("--no-figures", action="store_true", help="skip figure rendering")


def _apply_common(config: ScenarioConfig, args) -> ScenarioConfig:
    from dataclasses import replace

    updates = {}
    if args.out is not None:
        updates["out_dir"] = args.out
    if args.threads is not None:
        updates["threads"] = args.threads
    if args.rtol is not None:
        updates["rtol"] = args.rtol
    if args.atol is not None:
        updates["atol"] = args.atol
    if args.no_figures:
        updates["figures"] = False
    return replace(config, **updates) if updates else config


def _print_summary(summary: dict, indent=""):
    for key, val in summary.items():
        if isinstance(val, dict):
            print(f"{indent}{key}:")
            _print_summary(val, indent + "  ")
        else:
            print(f"{indent}{key} = {val}")


def cmd_run(args) -> int:
    config = _apply_common(config_from_file(args.config), args)
    summary = run_scenario(config)
    _print_summary(summary)
    return 0


def cmd_sweep(args) -> int:
    grid = default_sweep_grid(args.n_max, args.n_step, args.n_min)
    config = ScenarioConfig(
        kind="sweep",
        n=grid,
        gamma=args.gamma,
        experiment=args.experiment,
        f_targets=tuple(args.f) if args.f else None,
        fit_min_n=args.fit_min_n,
        out_dir=args.out or "out",
    )
    config = _apply_common(config, args)
    summary = run_scenario(config)
    _print_summary(summary)
    return 0


def cmd_fit(args) -> int:
    rows = read_sweep_csv(args.input)
    targets = sorted({r["f_target"] for r in rows})
    column = "log10_purity" if args.value == "purity" else "log10_symmetric_overlap"
    status = 0
    for f_t in targets:
        if args.f is not None and abs(f_t - args.f) > 1e-12:
            continue
        sel = [r for r in rows if r["f_target"] == f_t]
        if args.min_n is not None:
            sel = [r for r in sel if r["n"] >= args.min_n]
        fr = fit_exponent([(r["n"], r[column]) for r in sel])
        print(f"f={f_t:g} {args.value}: {fr}")
    return status


def cmd_verify(args) -> int:
    from .oracle import CHANNEL_SETS, INITIAL_KINDS, compare_trajectories

    times = np.linspace(0.0, args.horizon, args.samples)
    worst = 0.0
    failed = False
    for n in range(2, args.n_max + 1):
        for channel in CHANNEL_SETS:
            for initial in INITIAL_KINDS:
                rep = compare_trajectories(channel, initial, times, n)
                flag = "ok" if rep.max_deviation <= args.tol else "FAIL"
                failed = failed or flag == "FAIL"
                worst = max(worst, rep.max_deviation)
                print(
                    f"N={n} {channel:24s} {initial:8s} "
                    f"max deviation {rep.max_deviation:.3e} ({rep.worst()})  {flag}"
                )
    print(f"worst deviation overall: {worst:.3e} (tolerance {args.tol:g})")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinblocks",
        description="Spin-ensemble open-system dynamics in the block representation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a YAML scenario config")
    p_run.add_argument("config", help="path to the YAML config file")
    _add_common(p_run)
    p_run.set_defaults(fn=cmd_run)

    p_sweep = sub.add_parser("sweep", help="N-sweep of a pump/depolarize experiment")
    p_sweep.add_argument("--experiment", choices=("pump", "depolarize"), default="pump")
    p_sweep.add_argument("--n-min", type=int, default=4)
    p_sweep.add_argument("--n-max", type=int, default=120)
    p_sweep.add_argument("--n-step", type=int, default=4)
    p_sweep.add_argument("--gamma", type=float, default=1.0)
    p_sweep.add_argument("--f", type=float, action="append",
                         help="target fraction (repeatable)")
    p_sweep.add_argument("--fit-min-n", type=int, default=None)
    _add_common(p_sweep)
    p_sweep.set_defaults(fn=cmd_sweep)

    p_fit = sub.add_parser("fit", help="fit exponents from a sweep.csv")
    p_fit.add_argument("input", help="sweep.csv produced by the sweep command")
    p_fit.add_argument("--value", choices=("purity", "overlap"), default="purity")
    p_fit.add_argument("--f", type=float, default=None, help="restrict to one target")
    p_fit.add_argument("--min-n", type=int, default=None)
    p_fit.set_defaults(fn=cmd_fit)

    p_verify = sub.add_parser("verify", help="block vs full tensor-product comparison")
    p_verify.add_argument("--n-max", type=int, default=6)
    p_verify.add_argument("--tol", type=float, default=1e-8)
    p_verify.add_argument("--horizon", type=float, default=1.2)
    p_verify.add_argument("--samples", type=int, default=10)
    p_verify.set_defaults(fn=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
