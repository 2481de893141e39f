"""Lindblad superoperators acting on block-diagonal states.

Two channel families are supported.  Collective channels are built from a
block-diagonal collective operator and act independently within each block.
Channels that apply the same single-particle jump operator locally to every
spin are block-diagonal too, but their sandwich term couples neighboring
total-J blocks; its action factorizes into small dense matrix products

    within J:   w_J   * T_J rho_J T_J^dag
    down  J-1:  d_J   * B_J rho_J B_J^dag
    up    J+1:  u_J   * D_J rho_J D_J^dag

where T_J is the block of the collective operator of the traceless part of
the jump and B_J / D_J carry the one-particle ladder amplitudes into the
neighboring blocks.  The weights w, d, u involve only well-scaled ratios of
block multiplicities, evaluated in log-domain.
"""

from dataclasses import dataclass

import numpy as np

from .blockspace import BlockSpace
from .errors import SpaceMismatchError
from .operators import (
    CollectiveOperator,
    SingleSpinOperator,
    coefficient,
    collective_from_single,
    collective_generator,
    spin_plus,
    spin_x,
    spin_y,
    spin_z,
)
from .states import CollectiveState, zero_state


@dataclass(frozen=True)
class LiouvillianSpec:
    """Composable description of a master-equation right-hand side.

    drho/dt = -i[H, rho] + sum_k gamma_k L^C[S_k] rho + sum_k gamma_k L^S[s_k] rho
    """

    hamiltonian: CollectiveOperator | None = None
    collective_channels: tuple = ()
    local_channels: tuple = ()

    def __post_init__(self):
        if self.hamiltonian is None and not self.collective_channels and not self.local_channels:
            raise ValueError("Liouvillian needs a Hamiltonian or at least one channel")
        for _, rate in list(self.collective_channels) + list(self.local_channels):
            if rate < 0:
                raise ValueError(f"channel rates must be nonnegative, got {rate}")

    def space_of(self) -> BlockSpace | None:
        if self.hamiltonian is not None:
            return self.hamiltonian.space
        if self.collective_channels:
            return self.collective_channels[0][0].space
        return None


def polarizing_channel(rate: float = 1.0) -> LiouvillianSpec:
    """Local raising channel that pumps every spin toward +z."""
    return LiouvillianSpec(local_channels=((spin_plus(), rate),))


def symmetric_depolarizing_channel(rate: float = 1.0) -> LiouvillianSpec:
    """Local x, y and z jumps applied with the same rate on each spin."""
    return LiouvillianSpec(
        local_channels=((spin_x(), rate), (spin_y(), rate), (spin_z(), rate))
    )


def collective_depolarizing_channel(space: BlockSpace, rate: float = 1.0) -> LiouvillianSpec:
    """Collective J_x, J_y and J_z dissipators with the same rate."""
    return LiouvillianSpec(
        collective_channels=tuple(
            (collective_generator(space, axis), rate) for axis in ("x", "y", "z")
        )
    )


# ---------------------------------------------------------------------------
# ladder matrices into the neighboring blocks
# ---------------------------------------------------------------------------

def _down_ladder(space: BlockSpace, b: int, q: str) -> np.ndarray:
    """Matrix of coefficient("B", q, J, M) mapping block J to block J-1."""
    j = space.j_values[b]
    d = int(space.block_dims[b])
    out = np.zeros((d - 2, d), dtype=complex)
    shift = {"+": 1, "-": -1, "z": 0}[q]
    for i in range(d):
        m = j - i
        amp = coefficient("B", q, j, m)
        if amp != 0.0:
            out[round((j - 1) - (m + shift)), i] = amp
    return out


def _up_ladder(space: BlockSpace, b: int, q: str) -> np.ndarray:
    """Matrix of coefficient("D", q, J, M) mapping block J to block J+1."""
    j = space.j_values[b]
    d = int(space.block_dims[b])
    out = np.zeros((d + 2, d), dtype=complex)
    shift = {"+": 1, "-": -1, "z": 0}[q]
    for i in range(d):
        m = j - i
        amp = coefficient("D", q, j, m)
        if amp != 0.0:
            out[round((j + 1) - (m + shift)), i] = amp
    return out


def block_coupling_weights(space: BlockSpace):
    """Per-block weights (within, down, up) of the local-channel sandwich.

    The weights are rate- and jump-independent ratios of block
    multiplicities; entries are zero where the corresponding term is
    absent (J = 0 for within/down, the top block for up).
    """
    nb = space.n_blocks
    within = np.zeros(nb)
    down = np.zeros(nb)
    up = np.zeros(nb)
    for b, j in enumerate(space.j_values):
        # ratio of the reduced multiplicity above J to the multiplicity at J
        ratio_up = (
            np.exp(space.log_alpha[b - 1] - space.log_degeneracy[b]) if b >= 1 else 0.0
        )
        if j > 0:
            within[b] = (1.0 + ratio_up * (2 * j + 1) / (j + 1)) / (2 * j)
            if b + 1 < nb:
                ratio_here = np.exp(space.log_alpha[b] - space.log_degeneracy[b])
                down[b] = ratio_here / (2 * j)
        if b >= 1:
            up[b] = ratio_up / (2 * (j + 1))
    return within, down, up


@dataclass(frozen=True)
class _CompiledLocal:
    """One local channel pre-assembled for repeated application."""

    rate: float
    s0: complex
    t_blocks: tuple        # T_J, traceless collective part per block
    down_blocks: tuple     # (d-2, d) ladder into J-1, None where absent
    up_blocks: tuple       # (d+2, d) ladder into J+1, None where absent
    within_coef: np.ndarray
    down_coef: np.ndarray
    up_coef: np.ndarray
    q_blocks: tuple        # blocks of sum_n (s^dag s)^(n)


def _compile_local(space: BlockSpace, s: SingleSpinOperator, rate: float) -> _CompiledLocal:
    nb = space.n_blocks
    jp = collective_generator(space, "+")
    jm = collective_generator(space, "-")
    jz = collective_generator(space, "z")
    t_blocks = tuple(
        s.sp * p + s.sm * m + s.sz * z
        for p, m, z in zip(jp.blocks, jm.blocks, jz.blocks)
    )

    within, down, up = block_coupling_weights(space)
    down_blocks: list = [None] * nb
    up_blocks: list = [None] * nb
    for b in range(nb):
        if down[b] != 0.0:
            down_blocks[b] = (
                s.sp * _down_ladder(space, b, "+")
                + s.sm * _down_ladder(space, b, "-")
                + s.sz * _down_ladder(space, b, "z")
            )
        if up[b] != 0.0:
            up_blocks[b] = (
                s.sp * _up_ladder(space, b, "+")
                + s.sm * _up_ladder(space, b, "-")
                + s.sz * _up_ladder(space, b, "z")
            )

    m = s.matrix()
    q_op = collective_from_single(space, SingleSpinOperator.from_matrix(m.conj().T @ m))
    return _CompiledLocal(
        rate=rate,
        s0=complex(s.s0),
        t_blocks=t_blocks,
        down_blocks=tuple(down_blocks),
        up_blocks=tuple(up_blocks),
        within_coef=within,
        down_coef=down,
        up_coef=up,
        q_blocks=q_op.blocks,
    )


@dataclass(frozen=True)
class CompiledLiouvillian:
    """All channel terms of a LiouvillianSpec bound to one block space."""

    space: BlockSpace
    ham_blocks: tuple | None
    collective: tuple      # (rate, S blocks, S^dag S blocks) triples
    local: tuple           # _CompiledLocal entries

    def apply(self, blocks) -> list:
        """Derivative blocks for the given state blocks."""
        nb = self.space.n_blocks
        out = [np.zeros_like(b) for b in blocks]

        if self.ham_blocks is not None:
            for b in range(nb):
                h, rho = self.ham_blocks[b], blocks[b]
                out[b] += -1j * (h @ rho - rho @ h)

        for rate, s_blocks, k_blocks in self.collective:
            for b in range(nb):
                rho = blocks[b]
                sb, kb = s_blocks[b], k_blocks[b]
                out[b] += rate * (sb @ rho @ sb.conj().T - 0.5 * (kb @ rho + rho @ kb))

        n = self.space.n_particles
        for ch in self.local:
            g = ch.rate
            for b in range(nb):
                rho = blocks[b]
                t = ch.t_blocks[b]
                if ch.within_coef[b] != 0.0:
                    out[b] += (g * ch.within_coef[b]) * (t @ rho @ t.conj().T)
                if ch.s0 != 0.0:
                    out[b] += (g * n * abs(ch.s0) ** 2) * rho
                    out[b] += (g * ch.s0) * (rho @ t.conj().T)
                    out[b] += (g * np.conj(ch.s0)) * (t @ rho)
                if ch.down_blocks[b] is not None:
                    bt = ch.down_blocks[b]
                    out[b + 1] += (g * ch.down_coef[b]) * (bt @ rho @ bt.conj().T)
                if ch.up_blocks[b] is not None:
                    dt = ch.up_blocks[b]
                    out[b - 1] += (g * ch.up_coef[b]) * (dt @ rho @ dt.conj().T)
                q = ch.q_blocks[b]
                out[b] += (-0.5 * g) * (q @ rho + rho @ q)
        return out


def compile_liouvillian(spec: LiouvillianSpec, space: BlockSpace) -> CompiledLiouvillian:
    if spec.hamiltonian is not None and spec.hamiltonian.space != space:
        raise SpaceMismatchError("Hamiltonian built for a different block space")
    collective = []
    for op, rate in spec.collective_channels:
        if op.space != space:
            raise SpaceMismatchError("collective channel built for a different block space")
        k_blocks = tuple(s.conj().T @ s for s in op.blocks)
        collective.append((rate, op.blocks, k_blocks))
    local = tuple(_compile_local(space, s, rate) for s, rate in spec.local_channels)
    ham = spec.hamiltonian.blocks if spec.hamiltonian is not None else None
    return CompiledLiouvillian(space=space, ham_blocks=ham, collective=tuple(collective), local=local)


# ---------------------------------------------------------------------------
# one-shot application entry points
# ---------------------------------------------------------------------------

def apply_collective_lindblad(op: CollectiveOperator, state: CollectiveState) -> CollectiveState:
    """Dissipator S rho S^dag - {S^dag S, rho}/2 applied per block."""
    if op.space != state.space:
        raise SpaceMismatchError("operator and state belong to different block spaces")
    out = zero_state(state.space)
    for b, (sb, rho) in enumerate(zip(op.blocks, state.blocks)):
        k = sb.conj().T @ sb
        out.blocks[b][:, :] = sb @ rho @ sb.conj().T - 0.5 * (k @ rho + rho @ k)
    return out


def apply_local_symmetric_lindblad(s: SingleSpinOperator, state: CollectiveState) -> CollectiveState:
    """Sum over particles of the local dissipator for jump operator ``s``."""
    compiled = compile_liouvillian(LiouvillianSpec(local_channels=((s, 1.0),)), state.space)
    return CollectiveState(state.space, tuple(compiled.apply(state.blocks)))


def apply_liouvillian(spec: LiouvillianSpec, state: CollectiveState) -> CollectiveState:
    """Full master-equation right-hand side at the given state."""
    compiled = compile_liouvillian(spec, state.space)
    return CollectiveState(state.space, tuple(compiled.apply(state.blocks)))
