"""Delimited and key-value file output for scenario runs."""

import csv
from pathlib import Path

import numpy as np

from .blockspace import BlockSpace


def _fmt(x) -> str:
    """Full round-trip precision for floats; repr is shortest-exact in py3."""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def block_trace_headers(space: BlockSpace) -> list:
    return [f"p_{j:g}" for j in space.j_values]


def write_records_csv(path, records, space: BlockSpace) -> None:
    """One row per sample time; block traces as p_J columns, descending J."""
    path = Path(path)
    header = [
        "time", "jx", "jy", "jz", "delta_jx", "delta_jy", "delta_jz",
        "f", "log10_purity", "log10_symmetric_overlap", "xi_squared",
    ] + block_trace_headers(space)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for r in records:
            row = [
                r.time, r.jx, r.jy, r.jz, r.delta_jx, r.delta_jy, r.delta_jz,
                r.f, r.log10_purity, r.log10_symmetric_overlap, r.xi_squared,
            ] + list(r.block_traces)
            writer.writerow([_fmt(x) for x in row])


SWEEP_HEADER = [
    "n", "f_target", "t_cross", "f", "jz", "delta_jx", "delta_jy",
    "log10_purity", "log10_symmetric_overlap",
]


def write_sweep_csv(path, rows) -> None:
    """Rows are dicts keyed by SWEEP_HEADER entries."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_HEADER)
        for row in rows:
            writer.writerow([_fmt(row[k]) for k in SWEEP_HEADER])


def read_sweep_csv(path) -> list:
    path = Path(path)
    out = []
    with path.open() as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            out.append({k: float(v) for k, v in row.items()})
    return out


SCAN_HEADER = [
    "n", "channel", "delta_jx", "delta_jy", "delta_jz",
    "log10_purity", "symmetric_overlap",
]


def write_scan_csv(path, rows) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SCAN_HEADER)
        for row in rows:
            writer.writerow([_fmt(row[k]) for k in SCAN_HEADER])


def write_summary(path, summary: dict) -> None:
    """Flat key = value text; nested dicts become dotted keys."""
    path = Path(path)

    def flatten(prefix, obj, out):
        for key, val in obj.items():
            name = f"{prefix}.{key}" if prefix else str(key)
            if isinstance(val, dict):
                flatten(name, val, out)
            else:
                out.append((name, val))

    lines = []
    flatten("", summary, lines)
    with path.open("w") as fh:
        for name, val in lines:
            fh.write(f"{name} = {_fmt(val)}\n")
