"""Combinatorial layout of the total-angular-momentum block decomposition.

For an ensemble of N spin-1/2 particles the density operator splits into
blocks labeled by the total angular momentum J, ranging from N/2 down to
0 (even N) or 1/2 (odd N).  Each J occurs with a multiplicity that grows
combinatorially in N, so multiplicities and their partial sums are kept in
log-domain alongside exact integer cross-checks for moderate N.
"""

from dataclasses import dataclass, field
from math import comb, lgamma, log

import numpy as np

MAX_PARTICLES = 256


def multiplicity_int(n: int, j: float) -> int:
    """Exact integer multiplicity of the spin-J block for n spin-1/2 particles.

    Evaluates n!(2J+1) / ((n/2-J)! (n/2+J+1)!) through the equivalent
    difference of binomial coefficients, which stays in integer arithmetic.
    """
    k = round(n / 2 - j)
    if k < 0 or 2 * j > n:
        return 0
    return comb(n, k) - (comb(n, k - 1) if k >= 1 else 0)


def _log_multiplicity(n: int, j: float) -> float:
    # log of n!(2J+1)/((n/2-J)!(n/2+J+1)!); arguments are exact half-integers
    return (
        lgamma(n + 1)
        + log(2 * j + 1)
        - lgamma(n / 2 - j + 1)
        - lgamma(n / 2 + j + 2)
    )


def _log_binomial(n: int, k: float) -> float:
    return lgamma(n + 1) - lgamma(k + 1) - lgamma(n - k + 1)


@dataclass(frozen=True)
class BlockSpace:
    """Immutable index layout for the block-diagonal representation.

    Blocks are ordered by descending J (the fully symmetric block first) and
    kets within a block by descending M.  All other modules and every file
    output use this ordering.

    Attributes
    ----------
    n_particles : int
        Number of spin-1/2 particles N.
    j_values : ndarray
        Total angular momenta, descending from N/2 to (N mod 2)/2.
    block_dims : ndarray of int
        Per-block dimension 2J+1.
    degeneracy : ndarray
        Multiplicity of each J block as a float (exact while representable).
    log_degeneracy : ndarray
        Natural log of the multiplicities, computed via log-gamma.
    log_alpha : ndarray
        Natural log of the reduced multiplicities, i.e. of the partial sums
        of the multiplicities from J upward.
    """

    n_particles: int
    j_values: np.ndarray
    block_dims: np.ndarray
    degeneracy: np.ndarray
    log_degeneracy: np.ndarray
    log_alpha: np.ndarray
    ket_offsets: np.ndarray = field(repr=False)
    vec_offsets: np.ndarray = field(repr=False)

    @property
    def n_blocks(self) -> int:
        return len(self.j_values)

    @property
    def j_max(self) -> float:
        return float(self.j_values[0])

    @property
    def ket_dim(self) -> int:
        """Total number of (J, M) kets."""
        return int(self.ket_offsets[-1])

    @property
    def vec_dim(self) -> int:
        """Total number of stored density-matrix entries, sum of (2J+1)^2."""
        return int(self.vec_offsets[-1])

    def block_of(self, j: float) -> int:
        """Index of the block with angular momentum ``j``."""
        b = round(self.j_max - j)
        if b < 0 or b >= self.n_blocks or self.j_values[b] != j:
            raise IndexError(f"no block with J={j} for N={self.n_particles}")
        return b

    def __eq__(self, other) -> bool:
        return isinstance(other, BlockSpace) and other.n_particles == self.n_particles

    def __hash__(self) -> int:
        return hash(("BlockSpace", self.n_particles))


def build_block_space(n_particles: int, max_particles: int = MAX_PARTICLES) -> BlockSpace:
    """Construct the block layout for ``n_particles`` spin-1/2 particles.

    Parameters
    ----------
    n_particles : int
        Ensemble size N, 1 <= N <= ``max_particles``.

    Returns
    -------
    BlockSpace

    Raises
    ------
    ValueError
        If N is not a positive integer within the configured maximum.
    """
    n = n_particles
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise ValueError(f"particle number must be an integer, got {n!r}")
    if n < 1 or n > max_particles:
        raise ValueError(f"particle number must be in [1, {max_particles}], got {n}")
    n = int(n)

    j_min = (n % 2) / 2
    j_values = np.arange(n / 2, j_min - 0.5, -1.0)
    dims = (2 * j_values + 1).round().astype(int)

    log_deg = np.array([_log_multiplicity(n, j) for j in j_values])
    degeneracy = np.array([float(multiplicity_int(n, j)) for j in j_values])
    # alpha_J = sum of multiplicities from J to N/2 telescopes to one binomial
    log_alpha = np.array([_log_binomial(n, n / 2 - j) for j in j_values])

    ket_offsets = np.concatenate(([0], np.cumsum(dims)))
    vec_offsets = np.concatenate(([0], np.cumsum(dims**2)))

    return BlockSpace(
        n_particles=n,
        j_values=j_values,
        block_dims=dims,
        degeneracy=degeneracy,
        log_degeneracy=log_deg,
        log_alpha=log_alpha,
        ket_offsets=ket_offsets,
        vec_offsets=vec_offsets,
    )


def block_index(space: BlockSpace, j: float, m: float) -> int:
    """Flat ket offset of |J, M> in the canonical descending-(J, M) layout.

    Raises
    ------
    IndexError
        If J is not a block of ``space`` or |M| > J or M is not reachable
        from J in integer steps.
    """
    b = space.block_of(j)
    steps = j - m
    if steps != round(steps):
        raise IndexError(f"M={m} not an integer step away from J={j}")
    if m < -j or m > j:
        raise IndexError(f"|M|={abs(m)} exceeds J={j}")
    return int(space.ket_offsets[b] + round(steps))
