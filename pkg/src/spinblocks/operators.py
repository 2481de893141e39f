"""Block-diagonal collective operators and single-particle operator algebra.

Collective operators act identically on every particle and therefore never
connect different total-J blocks; they are stored as one dense complex
matrix per block.  Single-particle operators are kept as coefficients in
the four-component basis {identity, raising, lowering, z}, with the z
component normalized to eigenvalues +-1/2.
"""

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .blockspace import BlockSpace
from .errors import SpaceMismatchError

AXES = ("x", "y", "z", "+", "-")


@dataclass(frozen=True, eq=False)
class CollectiveOperator:
    """A block-diagonal operator: one dense matrix per total-J block."""

    space: BlockSpace
    blocks: tuple

    def __post_init__(self):
        if len(self.blocks) != self.space.n_blocks:
            raise ValueError("operator blocks do not match the block space")

    def __add__(self, other: "CollectiveOperator") -> "CollectiveOperator":
        _check_space(self, other)
        return CollectiveOperator(self.space, tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other: "CollectiveOperator") -> "CollectiveOperator":
        _check_space(self, other)
        return CollectiveOperator(self.space, tuple(a - b for a, b in zip(self.blocks, other.blocks)))

    def __mul__(self, scalar: complex) -> "CollectiveOperator":
        return CollectiveOperator(self.space, tuple(scalar * b for b in self.blocks))

    __rmul__ = __mul__

    def __matmul__(self, other: "CollectiveOperator") -> "CollectiveOperator":
        _check_space(self, other)
        return CollectiveOperator(self.space, tuple(a @ b for a, b in zip(self.blocks, other.blocks)))

    def dagger(self) -> "CollectiveOperator":
        return CollectiveOperator(self.space, tuple(b.conj().T for b in self.blocks))

    def hermiticity_residual(self) -> float:
        return max(np.abs(b - b.conj().T).max() if b.size else 0.0 for b in self.blocks)


def _check_space(a, b):
    if a.space != b.space:
        raise SpaceMismatchError("operands belong to different block spaces")


def identity_operator(space: BlockSpace) -> CollectiveOperator:
    return CollectiveOperator(space, tuple(np.eye(d, dtype=complex) for d in space.block_dims))


def collective_generator(space: BlockSpace, axis: str) -> CollectiveOperator:
    """Angular-momentum generator J_axis, axis in {x, y, z, +, -}.

    Within each block, kets are ordered by descending M; J_z is diagonal
    with entries M and the ladder operators carry the standard matrix
    elements sqrt((J -+ M)(J +- M + 1)).
    """
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}")
    blocks = []
    for j, d in zip(space.j_values, space.block_dims):
        m = j - np.arange(d)
        if axis == "z":
            block = np.diag(m).astype(complex)
        else:
            raising = np.zeros((d, d), dtype=complex)
            if d > 1:
                # element <M+1|J_+|M> sits one row above the diagonal
                amp = np.sqrt((j - m[1:]) * (j + m[1:] + 1))
                raising[np.arange(d - 1), np.arange(1, d)] = amp
            lowering = raising.conj().T
            if axis == "+":
                block = raising
            elif axis == "-":
                block = lowering
            elif axis == "x":
                block = (raising + lowering) / 2
            else:  # y
                block = (raising - lowering) / 2j
        blocks.append(block)
    return CollectiveOperator(space, tuple(blocks))


def counter_twisting_hamiltonian(space: BlockSpace, coupling: float) -> CollectiveOperator:
    """Two-axis counter-twisting Hamiltonian -i*coupling*(J_+^2 - J_-^2)."""
    jp = collective_generator(space, "+")
    jm = collective_generator(space, "-")
    return (-1j * coupling) * (jp @ jp - jm @ jm)


# ---------------------------------------------------------------------------
# scalar ladder coefficients for the neighbor-block coupling tensor
# ---------------------------------------------------------------------------

def coefficient(kind: str, q: str, j: float, m: float) -> float:
    """Ladder amplitude of the one-particle transfer |J,M> -> |J', M+q>.

    ``kind`` selects the target manifold: "A" stays within J, "B" couples
    down to J-1 and "D" couples up to J+1.  ``q`` is the spherical component
    of the single-particle operator, one of "+", "-", "z".  The function is
    total: it returns 0 whenever a square-root argument would be negative or
    the target (J', M+q) does not exist, so callers may probe freely with
    shifted arguments.
    """
    if (j - m) != round(j - m):
        return 0.0  # M not on the ladder of this J
    if kind == "A":
        j_target, shift = j, {"+": 1.0, "-": -1.0, "z": 0.0}[q]
        if abs(m + shift) > j_target:
            return 0.0
        if q == "+":
            t = (j - m) * (j + m + 1)
            return sqrt(t) if t > 0 else 0.0
        if q == "-":
            t = (j + m) * (j - m + 1)
            return sqrt(t) if t > 0 else 0.0
        return float(m)
    if kind == "B":
        j_target, shift = j - 1, {"+": 1.0, "-": -1.0, "z": 0.0}[q]
        if j_target < 0 or abs(m + shift) > j_target:
            return 0.0
        if q == "+":
            t = (j - m) * (j - m - 1)
            return sqrt(t) if t > 0 else 0.0
        if q == "-":
            t = (j + m) * (j + m - 1)
            return -sqrt(t) if t > 0 else 0.0
        t = (j + m) * (j - m)
        return sqrt(t) if t > 0 else 0.0
    if kind == "D":
        j_target, shift = j + 1, {"+": 1.0, "-": -1.0, "z": 0.0}[q]
        if abs(m + shift) > j_target:
            return 0.0
        if q == "+":
            t = (j + m + 1) * (j + m + 2)
            return -sqrt(t) if t > 0 else 0.0
        if q == "-":
            t = (j - m + 1) * (j - m + 2)
            return sqrt(t) if t > 0 else 0.0
        t = (j + m + 1) * (j - m + 1)
        return sqrt(t) if t > 0 else 0.0
    raise ValueError(f"kind must be 'A', 'B' or 'D', got {kind!r}")


@dataclass(frozen=True)
class SingleSpinOperator:
    """One-particle operator s0*1 + sp*j_+ + sm*j_- + sz*j_z.

    j_+/j_- have unit matrix elements and j_z eigenvalues +-1/2, so the
    2x2 matrix form is [[s0 + sz/2, sp], [sm, s0 - sz/2]].
    """

    s0: complex = 0.0
    sp: complex = 0.0
    sm: complex = 0.0
    sz: complex = 0.0

    def dagger(self) -> "SingleSpinOperator":
        # adjoint swaps the raising and lowering components
        return SingleSpinOperator(
            s0=np.conj(self.s0),
            sp=np.conj(self.sm),
            sm=np.conj(self.sp),
            sz=np.conj(self.sz),
        )

    def matrix(self) -> np.ndarray:
        """2x2 matrix in the (up, down) basis."""
        return np.array(
            [
                [self.s0 + self.sz / 2, self.sp],
                [self.sm, self.s0 - self.sz / 2],
            ],
            dtype=complex,
        )

    @staticmethod
    def from_matrix(m) -> "SingleSpinOperator":
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError("expected a 2x2 matrix")
        return SingleSpinOperator(
            s0=(m[0, 0] + m[1, 1]) / 2,
            sp=m[0, 1],
            sm=m[1, 0],
            sz=m[0, 0] - m[1, 1],
        )


def spin_plus() -> SingleSpinOperator:
    return SingleSpinOperator(sp=1.0)


def spin_minus() -> SingleSpinOperator:
    return SingleSpinOperator(sm=1.0)


def spin_x() -> SingleSpinOperator:
    return SingleSpinOperator(sp=0.5, sm=0.5)


def spin_y() -> SingleSpinOperator:
    return SingleSpinOperator(sp=-0.5j, sm=0.5j)


def spin_z() -> SingleSpinOperator:
    return SingleSpinOperator(sz=1.0)


def collective_from_single(space: BlockSpace, s: SingleSpinOperator) -> CollectiveOperator:
    """Sum of the single-particle operator over all N particles.

    The identity component contributes N*s0 per block; the traceless part
    maps onto the collective generators.
    """
    n = space.n_particles
    out = identity_operator(space) * (n * s.s0)
    for coeff, axis in ((s.sp, "+"), (s.sm, "-"), (s.sz, "z")):
        if coeff != 0:
            out = out + coeff * collective_generator(space, axis)
    return out
