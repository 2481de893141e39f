"""Matplotlib rendering of run outputs, written next to the CSV files."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .fitting import extrapolate


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_timeseries(records, space, path) -> None:
    """Means/uncertainties and block populations along one trajectory."""
    t = np.array([r.time for r in records])
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))

    ax1.plot(t, [r.jz for r in records], label=r"$\langle J_z\rangle$", color="C0")
    ax1.plot(t, [r.delta_jz for r in records], label=r"$\Delta J_z$", color="C1")
    ax1.plot(t, [r.delta_jx for r in records], label=r"$\Delta J_x$", color="C2")
    ax1.plot(t, [r.delta_jy for r in records], "--", label=r"$\Delta J_y$", color="C3")
    ax1.set_xlabel("time")
    ax1.legend(fontsize=8)
    ax1.set_title(f"collective moments, N={space.n_particles}")

    traces = np.array([r.block_traces for r in records])
    shown = min(8, space.n_blocks)
    for b in range(shown):
        ax2.plot(t, traces[:, b], label=f"J={space.j_values[b]:g}")
    ax2.plot(t, [10.0 ** r.log10_purity for r in records], "k:", label="purity")
    ax2.set_xlabel("time")
    ax2.set_ylabel("block population")
    ax2.legend(fontsize=7, ncol=2)
    _save(fig, path)


def render_squeezing(records, path) -> None:
    t = np.array([r.time for r in records])
    xi = np.array([r.xi_squared for r in records])
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(t, [r.jz for r in records], label=r"$\langle J_z\rangle$")
    ax1.plot(t, [r.delta_jx for r in records], label=r"$\Delta J_x$")
    ax1.plot(t, [r.delta_jy for r in records], label=r"$\Delta J_y$")
    ax1.set_xlabel("time")
    ax1.legend(fontsize=8)
    ax2.semilogy(t, xi)
    ax2.axhline(1.0, color="k", lw=0.8, ls=":")
    ax2.set_xlabel("time")
    ax2.set_ylabel(r"$\xi^2$")
    _save(fig, path)


def render_sweep(rows, fits, path) -> None:
    """log10 purity and overlap against N with the fitted lines."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    targets = sorted({r["f_target"] for r in rows})
    for k, f_t in enumerate(targets):
        sel = sorted((r for r in rows if r["f_target"] == f_t), key=lambda r: r["n"])
        ns = np.array([r["n"] for r in sel])
        ax.plot(ns, [r["log10_purity"] for r in sel], "o", ms=3, color=f"C{k}",
                label=f"purity, f={f_t:g}")
        ax.plot(ns, [r["log10_symmetric_overlap"] for r in sel], "s", ms=3,
                mfc="none", color=f"C{k}", label=f"overlap, f={f_t:g}")
        if f_t in fits:
            grid = np.linspace(ns.min(), ns.max(), 50)
            ax.plot(grid, [extrapolate(fits[f_t]["purity"], n) for n in grid], "-",
                    lw=0.8, color=f"C{k}")
            ax.plot(grid, [extrapolate(fits[f_t]["overlap"], n) for n in grid], "--",
                    lw=0.8, color=f"C{k}")
    ax.set_xlabel("N")
    ax.set_ylabel("log10 value")
    ax.legend(fontsize=7)
    _save(fig, path)


def render_scan(rows, path) -> None:
    """Steady-state uncertainty scaling against N."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ns = np.array(sorted(r["n"] for r in rows))
    by_n = {r["n"]: r for r in rows}
    ax.plot(ns, [by_n[n]["delta_jx"] for n in ns], "o", label=r"$\Delta J_x$")
    grid = np.linspace(ns.min(), ns.max(), 100)
    ax.plot(grid, np.sqrt(grid) / 2, "-", lw=0.8, label=r"$\sqrt{N}/2$")
    ax.plot(grid, np.sqrt(grid * (grid + 2) / 12), ":", lw=0.8,
            label=r"$\sqrt{N(N+2)/12}$")
    ax.set_xlabel("N")
    ax.set_ylabel("steady-state uncertainty")
    ax.legend(fontsize=8)
    _save(fig, path)
