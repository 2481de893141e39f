"""Scalar diagnostics of block-diagonal states.

Purity and the symmetric-block overlap decay exponentially in N, so both
are reported in log10 with the underlying sums done in log-domain.
"""

from dataclasses import dataclass
from math import log, log10, sqrt

import numpy as np
from scipy.special import logsumexp

from .errors import NumericError, SpaceMismatchError, UndefinedSqueezingError
from .operators import CollectiveOperator, collective_generator
from .states import CollectiveState

VARIANCE_FLOOR = -1e-10


def expectation(state: CollectiveState, op: CollectiveOperator) -> complex:
    """Trace pairing sum_J tr[rho_J S_J]."""
    if state.space != op.space:
        raise SpaceMismatchError("state and operator belong to different block spaces")
    total = 0.0 + 0.0j
    for rho, s in zip(state.blocks, op.blocks):
        total += np.einsum("ij,ji->", rho, s)
    return complex(total)


def variance(state: CollectiveState, op: CollectiveOperator) -> float:
    """<S^2> - <S>^2, clamped at zero for round-off within the floor."""
    mean = expectation(state, op).real
    second = expectation(state, op @ op).real
    var = second - mean * mean
    if var < 0.0:
        if var < VARIANCE_FLOOR * max(1.0, abs(second)):
            raise NumericError(f"variance {var:.3e} below round-off floor")
        var = 0.0
    return var


def uncertainty(state: CollectiveState, op: CollectiveOperator) -> float:
    return sqrt(variance(state, op))


def block_traces(state: CollectiveState) -> np.ndarray:
    """Population fraction per total-J block, descending J."""
    return np.array([np.trace(b).real for b in state.blocks])


def symmetric_overlap(state: CollectiveState) -> float:
    """Population of the fully symmetric (J = N/2) block."""
    return float(np.trace(state.blocks[0]).real)


def log10_purity(state: CollectiveState) -> float:
    """log10 tr[rho^2] with the per-block multiplicity weighting.

    tr[rho^2] = sum_J tr[rho_J^2] / multiplicity_J, accumulated with
    log-sum-exp so results far below the smallest double are exact.
    """
    log_terms = []
    for b, block in enumerate(state.blocks):
        t = float(np.vdot(block, block).real)  # tr[rho_J^2] for Hermitian rho_J
        if t > 0.0:
            log_terms.append(log(t) - state.space.log_degeneracy[b])
    if not log_terms:
        raise ValueError("purity of an all-zero state is undefined")
    return float(logsumexp(log_terms)) / log(10.0)


def log10_symmetric_overlap(state: CollectiveState) -> float:
    p = symmetric_overlap(state)
    if p <= 0.0:
        return -np.inf
    return log10(p)


def polarization_fraction(state: CollectiveState) -> float:
    """Mean z polarization relative to its maximum N/2."""
    jz = collective_generator(state.space, "z")
    return expectation(state, jz).real / (state.space.n_particles / 2)


def squeezing_parameter(state: CollectiveState) -> float:
    """N Var(J_y) / (<J_z>^2 + <J_x>^2); equals 1 for a coherent state.

    Raises
    ------
    UndefinedSqueezingError
        If the mean-spin denominator vanishes (depolarized state).
    """
    n = state.space.n_particles
    jx = collective_generator(state.space, "x")
    jy = collective_generator(state.space, "y")
    jz = collective_generator(state.space, "z")
    denom = expectation(state, jz).real ** 2 + expectation(state, jx).real ** 2
    if denom <= 1e-12 * n * n:
        raise UndefinedSqueezingError("mean spin too small to define squeezing")
    return n * variance(state, jy) / denom


@dataclass(frozen=True)
class ObservableRecord:
    """One sampled row of every scalar diagnostic."""

    time: float
    jx: float
    jy: float
    jz: float
    delta_jx: float
    delta_jy: float
    delta_jz: float
    block_traces: np.ndarray
    log10_purity: float
    log10_symmetric_overlap: float
    f: float
    xi_squared: float  # NaN when the squeezing denominator vanishes


def record_observables(state: CollectiveState, time: float) -> ObservableRecord:
    space = state.space
    jx = collective_generator(space, "x")
    jy = collective_generator(space, "y")
    jz = collective_generator(space, "z")
    mean_z = expectation(state, jz).real
    try:
        xi2 = squeezing_parameter(state)
    except UndefinedSqueezingError:
        xi2 = float("nan")
    return ObservableRecord(
        time=time,
        jx=expectation(state, jx).real,
        jy=expectation(state, jy).real,
        jz=mean_z,
        delta_jx=uncertainty(state, jx),
        delta_jy=uncertainty(state, jy),
        delta_jz=uncertainty(state, jz),
        block_traces=block_traces(state),
        log10_purity=log10_purity(state),
        log10_symmetric_overlap=log10_symmetric_overlap(state),
        f=mean_z / (space.n_particles / 2),
        xi_squared=xi2,
    )


def heisenberg_robertson_margin(state: CollectiveState) -> float:
    """Delta(J_x) Delta(J_y) - |<J_z>|/2; nonnegative up to round-off."""
    jx = collective_generator(state.space, "x")
    jy = collective_generator(state.space, "y")
    jz = collective_generator(state.space, "z")
    return uncertainty(state, jx) * uncertainty(state, jy) - abs(expectation(state, jz).real) / 2
