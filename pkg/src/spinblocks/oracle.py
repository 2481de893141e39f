"""Brute-force verification in the full 2^N tensor-product space.

Everything here is built from 2x2 primitives and explicit Kronecker
embeddings, deliberately sharing no operator construction with the block
modules, so agreement between the two code paths certifies both.  Sizes are
capped at N = 10 (states of shape 1024 x 1024).
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp

from .blockspace import BlockSpace, build_block_space
from .channels import LiouvillianSpec
from .errors import ResourceError, SpinBlocksError
from .operators import SingleSpinOperator
from .states import CollectiveState

MAX_FULL_PARTICLES = 10
MAX_EVOLVE_PARTICLES = 8

_ID = np.eye(2, dtype=complex)
_SP = np.array([[0, 1], [0, 0]], dtype=complex)   # raising
_SM = np.array([[0, 0], [1, 0]], dtype=complex)   # lowering
_SZ = np.array([[0.5, 0], [0, -0.5]], dtype=complex)
_SX = (_SP + _SM) / 2
_SY = (_SP - _SM) / 2j


def _check_size(n: int, cap: int = MAX_FULL_PARTICLES):
    if n > cap:
        raise ResourceError(f"full tensor-product path capped at N={cap}, got {n}")


def embed(op2: np.ndarray, site: int, n: int) -> np.ndarray:
    """Single-site operator extended by identities to all N sites."""
    out = np.array([[1.0 + 0j]])
    for k in range(n):
        out = np.kron(out, op2 if k == site else _ID)
    return out


def collective_sum(op2: np.ndarray, n: int) -> np.ndarray:
    return sum(embed(op2, site, n) for site in range(n))


def full_local_lindblad(s: SingleSpinOperator, rho: np.ndarray) -> np.ndarray:
    """Literal sum over sites of the single-site dissipator."""
    n = round(np.log2(rho.shape[0]))
    _check_size(n)
    s2 = s.matrix()
    k2 = s2.conj().T @ s2
    out = np.zeros_like(rho)
    for site in range(n):
        sn = embed(s2, site, n)
        kn = embed(k2, site, n)
        out += sn @ rho @ sn.conj().T - 0.5 * (kn @ rho + rho @ kn)
    return out


def full_collective_lindblad(op2: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Dissipator of the summed single-site operator."""
    n = round(np.log2(rho.shape[0]))
    _check_size(n)
    big = collective_sum(op2, n)
    k = big.conj().T @ big
    return big @ rho @ big.conj().T - 0.5 * (k @ rho + rho @ k)


def full_mixed_state(n: int) -> np.ndarray:
    _check_size(n)
    return np.eye(2**n, dtype=complex) / 2**n


def full_coherent_state(n: int, theta: float = 0.0, phi: float = 0.0) -> np.ndarray:
    """Product of identical rotated spinors; matches the block-side rotation."""
    _check_size(n)
    spinor = np.array(
        [np.exp(-0.5j * phi) * np.cos(theta / 2), np.exp(0.5j * phi) * np.sin(theta / 2)]
    )
    psi = np.array([1.0 + 0j])
    for _ in range(n):
        psi = np.kron(psi, spinor)
    return np.outer(psi, psi.conj())


# ---------------------------------------------------------------------------
# block structure of full states
# ---------------------------------------------------------------------------

class BlockExtractor:
    """Isometries from the 2^N product space onto each (J, M) manifold.

    Copies of each total-J representation are fixed once in the
    highest-weight sector (via the total J^2 restricted to fixed total
    magnetization) and propagated downward with the collective lowering
    operator, so copy labels are consistent across M and coherences map
    faithfully.
    """

    def __init__(self, n: int):
        _check_size(n)
        self.n = n
        self.space = build_block_space(n)
        dim = 2**n
        mag = np.array(
            [sum(0.5 - ((idx >> k) & 1) for k in range(n)) for idx in range(dim)]
        )
        j2 = np.zeros((dim, dim), dtype=complex)
        for op2 in (_SX, _SY, _SZ):
            big = collective_sum(op2, n)
            j2 += big @ big
        lowering = collective_sum(_SM, n)

        self.levels = {}  # J -> list over descending M of (dim, copies) matrices
        for j in self.space.j_values:
            sel = np.where(np.abs(mag - j) < 1e-9)[0]
            sub = j2[np.ix_(sel, sel)]
            w, u = np.linalg.eigh(sub)
            cols = np.where(np.abs(w - j * (j + 1)) < 1e-6)[0]
            top = np.zeros((dim, len(cols)), dtype=complex)
            top[sel, :] = u[:, cols]
            levels = [top]
            m = j
            while m > -j + 1e-9:
                amp = np.sqrt((j + m) * (j - m + 1))
                levels.append(lowering @ levels[-1] / amp)
                m -= 1
            self.levels[float(j)] = levels

    def extract(self, rho: np.ndarray) -> CollectiveState:
        """Block representation: copy-summed matrix elements per (J, M, M')."""
        blocks = []
        for j in self.space.j_values:
            levels = self.levels[float(j)]
            d = len(levels)
            blk = np.zeros((d, d), dtype=complex)
            for a in range(d):
                ra = levels[a].conj().T @ rho
                for c in range(d):
                    blk[a, c] = np.trace(ra @ levels[c])
            blocks.append(blk)
        return CollectiveState(self.space, tuple(blocks))

    def embed_state(self, state: CollectiveState) -> np.ndarray:
        """Full-space density matrix of a block state, uniform over copies."""
        dim = 2**self.n
        rho = np.zeros((dim, dim), dtype=complex)
        for b, j in enumerate(self.space.j_values):
            levels = self.levels[float(j)]
            copies = levels[0].shape[1]
            blk = state.blocks[b]
            for a in range(len(levels)):
                for c in range(len(levels)):
                    if blk[a, c] != 0:
                        rho += (blk[a, c] / copies) * (levels[a] @ levels[c].conj().T)
        return rho


def full_block_traces(rho: np.ndarray, extractor: BlockExtractor | None = None) -> np.ndarray:
    """Population per total-J manifold, descending J."""
    n = round(np.log2(rho.shape[0]))
    if extractor is None:
        extractor = BlockExtractor(n)
    return np.array([np.trace(b).real for b in extractor.extract(rho).blocks])


# ---------------------------------------------------------------------------
# full-space evolution and trajectory comparison
# ---------------------------------------------------------------------------

def _embed_sparse(op2: np.ndarray, site: int, n: int) -> sp.csr_matrix:
    out = sp.identity(1, dtype=complex, format="csr")
    for k in range(n):
        out = sp.kron(out, sp.csr_matrix(op2) if k == site else sp.identity(2, format="csr"), format="csr")
    return out


def assemble_full_liouvillian(
    n: int,
    local_channels=(),
    collective_channels=(),
    hamiltonian: np.ndarray | None = None,
) -> sp.csr_matrix:
    """Sparse Liouvillian in the product basis from 2x2 jump definitions.

    ``local_channels``: (SingleSpinOperator, rate) pairs, one dissipator per
    site.  ``collective_channels``: (2x2 matrix, rate) pairs dissipating the
    summed operator.  ``hamiltonian``: dense 2^N matrix.
    """
    _check_size(n, MAX_EVOLVE_PARTICLES)
    dim = 2**n
    eye = sp.identity(dim, dtype=complex, format="csr")
    terms = []

    if hamiltonian is not None:
        h = sp.csr_matrix(hamiltonian)
        terms.append(-1j * (sp.kron(h, eye) - sp.kron(eye, h.T)))

    for s, rate in local_channels:
        s2 = s.matrix()
        k2 = s2.conj().T @ s2
        for site in range(n):
            sn = _embed_sparse(s2, site, n)
            kn = _embed_sparse(k2, site, n)
            terms.append(
                rate
                * (
                    sp.kron(sn, sn.conj())
                    - 0.5 * (sp.kron(kn, eye) + sp.kron(eye, kn.T))
                )
            )

    for op2, rate in collective_channels:
        big = sp.csr_matrix(collective_sum(op2, n))
        k = (big.conj().T @ big).tocsr()
        terms.append(
            rate
            * (
                sp.kron(big, big.conj())
                - 0.5 * (sp.kron(k, eye) + sp.kron(eye, k.T))
            )
        )

    if not terms:
        raise ValueError("no terms supplied")
    total = terms[0]
    for t in terms[1:]:
        total = total + t
    return total.tocsr()


def evolve_full(
    lmatrix: sp.csr_matrix,
    rho0: np.ndarray,
    sample_times,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> list:
    """Integrate vec(rho) under the assembled sparse superoperator."""
    dim = rho0.shape[0]
    times = np.asarray(sample_times, dtype=float)

    def rhs(_t, y):
        return lmatrix @ y

    if times[-1] == 0.0:
        return [rho0.copy() for _ in times]
    sol = solve_ivp(
        rhs, (0.0, float(times[-1])), rho0.reshape(-1), method="RK45",
        t_eval=times, rtol=rtol, atol=atol,
    )
    if not sol.success:
        raise SpinBlocksError(f"full-space integration failed: {sol.message}")
    out = []
    for k in range(sol.y.shape[1]):
        rho = sol.y[:, k].reshape(dim, dim)
        out.append((rho + rho.conj().T) / 2)
    return out


@dataclass(frozen=True)
class ComparisonReport:
    """Largest block-vs-full deviation per observable across sample times."""

    n_particles: int
    channel: str
    initial: str
    deviations: dict

    @property
    def max_deviation(self) -> float:
        return max(self.deviations.values())

    def worst(self) -> str:
        return max(self.deviations, key=self.deviations.get)


def full_observables(rho: np.ndarray, n: int, extractor: BlockExtractor) -> dict:
    out = {}
    for name, op2 in (("jx", _SX), ("jy", _SY), ("jz", _SZ)):
        big = collective_sum(op2, n)
        mean = np.trace(big @ rho).real
        second = np.trace(big @ big @ rho).real
        out[name] = mean
        out["d" + name] = np.sqrt(max(second - mean**2, 0.0))
    out["purity"] = np.trace(rho @ rho).real
    traces = full_block_traces(rho, extractor)
    for j, p in zip(extractor.space.j_values, traces):
        out[f"p[{j:g}]"] = p
    return out


CHANNEL_SETS = ("pumping", "symmetric_depolarizing", "collective_depolarizing", "twist_symmetric")
INITIAL_KINDS = ("coherent", "mixed")


def _block_side_setup(channel: str, space: BlockSpace, gamma: float, coupling: float):
    from .channels import (
        collective_depolarizing_channel,
        polarizing_channel,
        symmetric_depolarizing_channel,
    )
    from .operators import counter_twisting_hamiltonian

    if channel == "pumping":
        return polarizing_channel(gamma)
    if channel == "symmetric_depolarizing":
        return symmetric_depolarizing_channel(gamma)
    if channel == "collective_depolarizing":
        return collective_depolarizing_channel(space, gamma)
    if channel == "twist_symmetric":
        return LiouvillianSpec(
            hamiltonian=counter_twisting_hamiltonian(space, coupling),
            local_channels=symmetric_depolarizing_channel(gamma).local_channels,
        )
    raise ValueError(f"unknown channel set {channel!r}; choose from {CHANNEL_SETS}")


def _full_side_setup(channel: str, n: int, gamma: float, coupling: float) -> sp.csr_matrix:
    from .operators import spin_plus, spin_x, spin_y, spin_z

    if channel == "pumping":
        return assemble_full_liouvillian(n, local_channels=((spin_plus(), gamma),))
    if channel == "symmetric_depolarizing":
        return assemble_full_liouvillian(
            n, local_channels=((spin_x(), gamma), (spin_y(), gamma), (spin_z(), gamma))
        )
    if channel == "collective_depolarizing":
        return assemble_full_liouvillian(
            n, collective_channels=((_SX, gamma), (_SY, gamma), (_SZ, gamma))
        )
    if channel == "twist_symmetric":
        jp = collective_sum(_SP, n)
        jm = collective_sum(_SM, n)
        ham = -1j * coupling * (jp @ jp - jm @ jm)
        return assemble_full_liouvillian(
            n,
            local_channels=((spin_x(), gamma), (spin_y(), gamma), (spin_z(), gamma)),
            hamiltonian=ham,
        )
    raise ValueError(f"unknown channel set {channel!r}; choose from {CHANNEL_SETS}")


def compare_trajectories(
    channel: str,
    initial: str,
    times,
    n: int,
    gamma: float = 1.0,
    coupling: float | None = None,
    threshold: float | None = None,
) -> ComparisonReport:
    """Evolve the block and full representations independently and compare.

    Observables compared at every sample time: the three collective means
    and uncertainties, every block population, and the purity.  Exceeding
    ``threshold`` raises :class:`VerificationError` naming the first
    divergent observable.
    """
    from .dynamics import IntegratorConfig, evolve
    from .errors import VerificationError
    from .observables import block_traces, expectation, log10_purity, uncertainty
    from .operators import collective_generator
    from .states import coherent_state, mixed_collective_state

    _check_size(n, MAX_EVOLVE_PARTICLES)
    if initial not in INITIAL_KINDS:
        raise ValueError(f"unknown initial kind {initial!r}; choose from {INITIAL_KINDS}")
    if coupling is None:
        coupling = 1.0 / n
    times = np.asarray(times, dtype=float)
    space = build_block_space(n)
    extractor = BlockExtractor(n)

    spec = _block_side_setup(channel, space, gamma, coupling)
    state0 = coherent_state(space, 0, 0) if initial == "coherent" else mixed_collective_state(space)
    cfg = IntegratorConfig(rtol=1e-10, atol=1e-12)
    block_states = evolve(spec, state0, times, cfg)

    lmat = _full_side_setup(channel, n, gamma, coupling)
    rho0 = full_coherent_state(n) if initial == "coherent" else full_mixed_state(n)
    full_states = evolve_full(lmat, rho0, times)

    ops = {a: collective_generator(space, a) for a in ("x", "y", "z")}
    deviations: dict = {}
    for state, rho in zip(block_states, full_states):
        ref = full_observables(rho, n, extractor)
        got = {}
        for a in ("x", "y", "z"):
            got["j" + a] = expectation(state, ops[a]).real
            got["dj" + a] = uncertainty(state, ops[a])
        got["purity"] = 10.0 ** log10_purity(state)
        for j, p in zip(space.j_values, block_traces(state)):
            got[f"p[{j:g}]"] = p
        for key, val in got.items():
            dev = abs(val - ref[key])
            deviations[key] = max(dev, deviations.get(key, 0.0))
            if threshold is not None and dev > threshold:
                raise VerificationError(
                    f"{channel}/{initial} N={n}: observable {key} deviates by {dev:.3e}"
                )
    return ComparisonReport(
        n_particles=n, channel=channel, initial=initial, deviations=deviations
    )
