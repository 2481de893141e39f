"""Canonical block-diagonal density operators and block rotations."""

from dataclasses import dataclass
from math import log

import numpy as np
from scipy.linalg import expm

from .blockspace import BlockSpace
from .errors import NumericError, SpaceMismatchError
from .operators import collective_generator


@dataclass(frozen=True, eq=False)
class CollectiveState:
    """Density operator stored as one Hermitian matrix per total-J block.

    The object is a plain container: physical-validity checks (trace,
    Hermiticity, positivity) live in :func:`validate` so that derivatives
    and intermediate integrator states can use the same type.
    """

    space: BlockSpace
    blocks: tuple

    def __post_init__(self):
        if len(self.blocks) != self.space.n_blocks:
            raise ValueError("state blocks do not match the block space")

    def copy(self) -> "CollectiveState":
        return CollectiveState(self.space, tuple(b.copy() for b in self.blocks))

    def trace(self) -> float:
        return float(sum(np.trace(b).real for b in self.blocks))

    def hermitized(self) -> "CollectiveState":
        return CollectiveState(self.space, tuple((b + b.conj().T) / 2 for b in self.blocks))

    def scaled(self, factor: complex) -> "CollectiveState":
        return CollectiveState(self.space, tuple(factor * b for b in self.blocks))

    def __add__(self, other: "CollectiveState") -> "CollectiveState":
        if self.space != other.space:
            raise SpaceMismatchError("states belong to different block spaces")
        return CollectiveState(self.space, tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other: "CollectiveState") -> "CollectiveState":
        if self.space != other.space:
            raise SpaceMismatchError("states belong to different block spaces")
        return CollectiveState(self.space, tuple(a - b for a, b in zip(self.blocks, other.blocks)))

    def max_abs_difference(self, other: "CollectiveState") -> float:
        if self.space != other.space:
            raise SpaceMismatchError("states belong to different block spaces")
        return max(
            np.abs(a - b).max() if a.size else 0.0
            for a, b in zip(self.blocks, other.blocks)
        )

    def to_vector(self) -> np.ndarray:
        """Flatten to the canonical Liouville vector (row-major per block)."""
        return np.concatenate([b.reshape(-1) for b in self.blocks])


def state_from_vector(space: BlockSpace, vec: np.ndarray) -> CollectiveState:
    """Inverse of :meth:`CollectiveState.to_vector`."""
    vec = np.asarray(vec, dtype=complex)
    if vec.shape != (space.vec_dim,):
        raise ValueError(f"expected vector of length {space.vec_dim}, got {vec.shape}")
    blocks = []
    for b, d in enumerate(space.block_dims):
        lo, hi = space.vec_offsets[b], space.vec_offsets[b + 1]
        blocks.append(vec[lo:hi].reshape(d, d).copy())
    return CollectiveState(space, tuple(blocks))


def zero_state(space: BlockSpace) -> CollectiveState:
    return CollectiveState(space, tuple(np.zeros((d, d), dtype=complex) for d in space.block_dims))


def coherent_state(space: BlockSpace, theta: float, phi: float) -> CollectiveState:
    """Spin coherent state: the stretched z-polarized ket rotated by (theta, phi).

    The rotation exp(-i*phi*J_z) exp(-i*theta*J_y) acts on the top block
    only; all lower-J blocks stay empty, so the state is pure and fully
    symmetric.
    """
    d = int(space.block_dims[0])
    psi = np.zeros(d, dtype=complex)
    psi[0] = 1.0  # M = N/2 comes first in the descending-M layout
    if theta != 0.0 or phi != 0.0:
        jy = collective_generator(space, "y").blocks[0]
        jz = collective_generator(space, "z").blocks[0]
        psi = expm(-1j * theta * jy) @ psi
        if phi != 0.0:
            psi = np.exp(-1j * phi * np.diag(jz)) * psi
    state = zero_state(space)
    state.blocks[0][:, :] = np.outer(psi, psi.conj())
    return state


def mixed_symmetric_state(space: BlockSpace) -> CollectiveState:
    """Maximally mixed state restricted to the fully symmetric block."""
    state = zero_state(space)
    d = int(space.block_dims[0])
    state.blocks[0][:, :] = np.eye(d) / d
    return state


def mixed_collective_state(space: BlockSpace) -> CollectiveState:
    """Maximally mixed state of all N spins in block form.

    Every diagonal entry of block J equals the block multiplicity divided
    by 2^N; evaluated in log-domain so large N cannot overflow.
    """
    n = space.n_particles
    blocks = []
    for b, d in enumerate(space.block_dims):
        weight = np.exp(space.log_degeneracy[b] - n * log(2.0))
        blocks.append(weight * np.eye(d, dtype=complex))
    return CollectiveState(space, tuple(blocks))


def rotate(state: CollectiveState, theta: float, phi: float) -> CollectiveState:
    """Apply the global rotation exp(-i*phi*J_z) exp(-i*theta*J_y) blockwise."""
    jy = collective_generator(state.space, "y")
    jz = collective_generator(state.space, "z")
    out = []
    for rho, gy, gz in zip(state.blocks, jy.blocks, jz.blocks):
        u = np.diag(np.exp(-1j * phi * np.diag(gz))) @ expm(-1j * theta * gy)
        out.append(u @ rho @ u.conj().T)
    return CollectiveState(state.space, tuple(out))


def random_state(space: BlockSpace, rng: np.random.Generator, pure_block: int | None = None) -> CollectiveState:
    """Random valid state (Hermitian, positive, trace one); testing aid.

    With ``pure_block`` set, support is restricted to that single block.
    """
    blocks = []
    weights = rng.random(space.n_blocks)
    if pure_block is not None:
        mask = np.zeros(space.n_blocks)
        mask[pure_block] = 1.0
        weights = weights * mask
    weights = weights / weights.sum()
    for w, d in zip(weights, space.block_dims):
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        h = g @ g.conj().T
        blocks.append(w * h / np.trace(h))
    return CollectiveState(space, tuple(blocks))


def validate(
    state: CollectiveState,
    trace_tol: float = 1e-10,
    herm_tol: float = 1e-10,
    psd_tol: float = -1e-9,
) -> None:
    """Check trace normalization, Hermiticity and positivity.

    Raises
    ------
    NumericError
        If any block violates the corresponding tolerance.  Positivity is
        judged on the smallest eigenvalue of each block, which costs an
        eigendecomposition and is meant for tests and debugging only.
    """
    drift = abs(state.trace() - 1.0)
    if drift > trace_tol:
        raise NumericError(f"trace drift {drift:.3e} exceeds {trace_tol:.1e}")
    for j, b in zip(state.space.j_values, state.blocks):
        res = np.abs(b - b.conj().T).max() if b.size else 0.0
        if res > herm_tol:
            raise NumericError(f"block J={j} Hermiticity residual {res:.3e}")
        if b.size:
            lo = float(np.linalg.eigvalsh((b + b.conj().T) / 2).min())
            if lo < psd_tol:
                raise NumericError(f"block J={j} smallest eigenvalue {lo:.3e}")
