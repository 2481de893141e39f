"""Time integration, sparse Liouvillian assembly and steady states."""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp
from scipy.sparse.linalg import ArpackError, eigs

from .blockspace import BlockSpace
from .channels import (
    CompiledLiouvillian,
    LiouvillianSpec,
    block_coupling_weights,
    compile_liouvillian,
)
from .errors import (
    DegenerateSteadyStateError,
    IntegrationError,
    NoCrossingError,
    ResourceError,
    SteadyStateError,
)
from .operators import coefficient
from .states import CollectiveState, state_from_vector

TRACE_RENORM_TOL = 1e-8
TRACE_FAIL_TOL = 1e-6


@dataclass(frozen=True)
class IntegratorConfig:
    """Adaptive Runge-Kutta settings (embedded 4/5 pair with dense output)."""

    rtol: float = 1e-8
    atol: float = 1e-10
    first_step: float | None = None
    max_step: float = np.inf
    max_steps: int = 10_000_000

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")


DEFAULT_CONFIG = IntegratorConfig()


def _split_blocks(space: BlockSpace, vec: np.ndarray) -> list:
    return [
        vec[space.vec_offsets[b]: space.vec_offsets[b + 1]].reshape(d, d)
        for b, d in enumerate(space.block_dims)
    ]


def _rhs_from(compiled: CompiledLiouvillian):
    space = compiled.space

    def rhs(_t, y):
        deriv = compiled.apply(_split_blocks(space, y))
        return np.concatenate([d.reshape(-1) for d in deriv])

    return rhs


def _finalize(space: BlockSpace, vec: np.ndarray) -> CollectiveState:
    state = state_from_vector(space, vec).hermitized()
    drift = abs(state.trace() - 1.0)
    if drift > TRACE_FAIL_TOL:
        raise IntegrationError(f"trace drift {drift:.3e} exceeds {TRACE_FAIL_TOL:.1e}")
    if drift < TRACE_RENORM_TOL:
        state = state.scaled(1.0 / state.trace())
    return state


def _solve(compiled, y0, t_span, cfg, t_eval=None, events=None):
    sol = solve_ivp(
        _rhs_from(compiled),
        t_span,
        y0,
        method="RK45",
        t_eval=t_eval,
        events=events,
        dense_output=events is not None,
        rtol=cfg.rtol,
        atol=cfg.atol,
        first_step=cfg.first_step,
        max_step=cfg.max_step,
    )
    if not sol.success:
        raise IntegrationError(f"integrator failed: {sol.message}")
    if sol.nfev > 8 * cfg.max_steps:
        raise IntegrationError(f"step budget {cfg.max_steps} exceeded")
    return sol


def evolve(
    spec: LiouvillianSpec,
    initial: CollectiveState,
    sample_times,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
) -> list:
    """Integrate the master equation and return states at the sample times.

    Sample times must be nondecreasing and start at t >= 0; the returned
    states are Hermitized and trace-renormalized (drift beyond the failure
    tolerance raises :class:`IntegrationError`).
    """
    times = np.asarray(sample_times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("sample_times must be a nonempty 1-D sequence")
    if np.any(np.diff(times) < 0) or times[0] < 0:
        raise ValueError("sample_times must be nondecreasing and nonnegative")
    compiled = compile_liouvillian(spec, initial.space)
    y0 = initial.to_vector()
    if times[-1] == 0.0:
        return [_finalize(initial.space, y0) for _ in times]
    sol = _solve(compiled, y0, (0.0, float(times[-1])), cfg, t_eval=times)
    return [_finalize(initial.space, sol.y[:, k]) for k in range(sol.y.shape[1])]


def evolve_until_fraction(
    spec: LiouvillianSpec,
    initial: CollectiveState,
    target_f: float,
    direction: str,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    t_max: float = 100.0,
):
    """Evolve until the polarization fraction <J_z>/(N/2) crosses a target.

    Parameters
    ----------
    direction : {"rising", "falling"}
        Which way the crossing must happen; the event is located on the
        integrator's dense output.

    Returns
    -------
    (CollectiveState, float)
        State at the crossing and the crossing time.

    Raises
    ------
    NoCrossingError
        If the target is not crossed before ``t_max``.
    """
    if direction not in ("rising", "falling"):
        raise ValueError("direction must be 'rising' or 'falling'")
    if not -1.0 <= target_f <= 1.0:
        raise ValueError("target fraction must lie in [-1, 1]")
    space = initial.space
    compiled = compile_liouvillian(spec, space)

    # diagonal of J_z in the flat vector layout, for a cheap f(t)
    weights = np.zeros(space.vec_dim)
    for b, (j, d) in enumerate(zip(space.j_values, space.block_dims)):
        m = j - np.arange(d)
        idx = space.vec_offsets[b] + np.arange(d) * (d + 1)
        weights[idx] = m
    half_n = space.n_particles / 2

    def crossing(_t, y):
        return (y.real @ weights) / half_n - target_f

    crossing.terminal = True
    crossing.direction = 1.0 if direction == "rising" else -1.0

    sol = _solve(compiled, initial.to_vector(), (0.0, float(t_max)), cfg, events=[crossing])
    if sol.status != 1 or len(sol.t_events[0]) == 0:
        raise NoCrossingError(
            f"fraction {target_f} not crossed ({direction}) within t_max={t_max}"
        )
    t_cross = float(sol.t_events[0][0])
    return _finalize(space, sol.y_events[0][0]), t_cross


# ---------------------------------------------------------------------------
# sparse Liouville-representation assembly
# ---------------------------------------------------------------------------

MEMORY_BUDGET_BYTES = 8 * 2**30


@dataclass(frozen=True)
class SparseLiouvillian:
    """Matrix form of a Liouvillian over the flat block-vector layout."""

    space: BlockSpace
    matrix: sp.csr_matrix

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def apply_vec(self, vec: np.ndarray) -> np.ndarray:
        return self.matrix @ vec

    def scale(self) -> float:
        """Infinity norm, used to normalize residual and gap thresholds."""
        return float(np.abs(self.matrix).sum(axis=1).max())


def _kron_block(rows, cols, data, off_r, off_c, a, b):
    """Accumulate kron(a, b) at the given block offsets in COO lists."""
    k = sp.kron(sp.csr_matrix(a), sp.csr_matrix(b), format="coo")
    if k.nnz:
        rows.append(k.row + off_r)
        cols.append(k.col + off_c)
        data.append(k.data)


def assemble_liouvillian(spec: LiouvillianSpec, space: BlockSpace) -> SparseLiouvillian:
    """Sparse matrix whose action on flattened states equals apply_liouvillian.

    Row-major vectorization per block: A rho B^dag maps to kron(A, conj(B)).
    Only |dJ| <= 1 block pairs are populated.
    """
    est = 40 * space.vec_dim * 16 * len(spec.local_channels or (1,))
    if est > MEMORY_BUDGET_BYTES:
        raise ResourceError(
            f"estimated assembly footprint {est/2**30:.1f} GiB exceeds budget"
        )
    compiled = compile_liouvillian(spec, space)
    nb = space.n_blocks
    off = space.vec_offsets
    eyes = [np.eye(int(d)) for d in space.block_dims]
    rows, cols, data = [], [], []

    if compiled.ham_blocks is not None:
        for b in range(nb):
            h = compiled.ham_blocks[b]
            _kron_block(rows, cols, data, off[b], off[b], -1j * h, eyes[b])
            _kron_block(rows, cols, data, off[b], off[b], 1j * eyes[b], h.conj())

    for rate, s_blocks, k_blocks in compiled.collective:
        for b in range(nb):
            s, k = s_blocks[b], k_blocks[b]
            _kron_block(rows, cols, data, off[b], off[b], rate * s, s.conj())
            _kron_block(rows, cols, data, off[b], off[b], -0.5 * rate * k, eyes[b])
            _kron_block(rows, cols, data, off[b], off[b], -0.5 * rate * eyes[b], k.conj())

    n = space.n_particles
    for ch in compiled.local:
        g = ch.rate
        for b in range(nb):
            t = ch.t_blocks[b]
            if ch.within_coef[b] != 0.0:
                _kron_block(rows, cols, data, off[b], off[b], (g * ch.within_coef[b]) * t, t.conj())
            if ch.s0 != 0.0:
                _kron_block(rows, cols, data, off[b], off[b],
                            (g * n * abs(ch.s0) ** 2) * eyes[b], eyes[b])
                _kron_block(rows, cols, data, off[b], off[b], (g * ch.s0) * eyes[b], t.T)
                _kron_block(rows, cols, data, off[b], off[b], (g * np.conj(ch.s0)) * t, eyes[b])
            if ch.down_blocks[b] is not None:
                bt = ch.down_blocks[b]
                _kron_block(rows, cols, data, off[b + 1], off[b], (g * ch.down_coef[b]) * bt, bt.conj())
            if ch.up_blocks[b] is not None:
                dt = ch.up_blocks[b]
                _kron_block(rows, cols, data, off[b - 1], off[b], (g * ch.up_coef[b]) * dt, dt.conj())
            q = ch.q_blocks[b]
            _kron_block(rows, cols, data, off[b], off[b], -0.5 * g * q, eyes[b])
            _kron_block(rows, cols, data, off[b], off[b], -0.5 * g * eyes[b], q.conj())

    if rows:
        mat = sp.coo_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
            shape=(space.vec_dim, space.vec_dim),
        ).tocsr()
    else:
        mat = sp.csr_matrix((space.vec_dim, space.vec_dim), dtype=complex)
    return SparseLiouvillian(space=space, matrix=mat)


# ---------------------------------------------------------------------------
# steady states
# ---------------------------------------------------------------------------

NULL_TOL = 1e-10
RESIDUAL_TOL = 1e-9


def _null_space(matrix, scale, k0=4, max_k=96, seed=1234):
    """Eigenvectors of the near-zero eigenvalues via shift-invert ARPACK.

    Grows k until at least one eigenvalue beyond the null cluster is seen,
    so the multiplicity of the zero eigenvalue is established a posteriori.
    """
    dim = matrix.shape[0]
    rng = np.random.default_rng(seed)
    v0 = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    matrix = matrix.tocsc()
    k = k0
    while True:
        k = min(k, dim - 2)
        vals = vecs = None
        err = None
        for sigma in (1e-9 * scale, 1e-7 * scale, 1e-5 * scale):
            try:
                vals, vecs = eigs(matrix, k=k, sigma=sigma, which="LM", v0=v0)
                break
            except (RuntimeError, ArpackError) as exc:  # singular shift or no convergence
                err = exc
        if vals is None:
            raise SteadyStateError(f"shift-invert eigensolve failed: {err}")
        order = np.argsort(np.abs(vals))
        vals, vecs = vals[order], vecs[:, order]
        null_mask = np.abs(vals) <= NULL_TOL * scale
        n_null = int(null_mask.sum())
        if n_null == 0:
            raise SteadyStateError(
                f"no eigenvalue within {NULL_TOL:.0e} of zero (closest {abs(vals[0]):.3e})"
            )
        if n_null < k or k >= dim - 2:
            return vals[:n_null], vecs[:, :n_null], vals[n_null] if n_null < k else None
        if k >= max_k:
            raise SteadyStateError(f"null space larger than {max_k}; aborting")
        k *= 2


def steady_state(
    spec: LiouvillianSpec,
    space: BlockSpace,
    initial: CollectiveState | None = None,
) -> CollectiveState:
    """Asymptotic state from the null space of the assembled Liouvillian.

    For a simple zero eigenvalue the (Hermitized, trace-normalized) null
    vector is returned.  When the zero eigenvalue is degenerate the flow
    conserves one functional per null direction, and the asymptotic state
    depends on the initial state; in that case ``initial`` selects the
    right combination through the left null vectors.  Without ``initial`` a
    degenerate null space raises :class:`DegenerateSteadyStateError`.
    """
    lv = assemble_liouvillian(spec, space)
    scale = lv.scale()
    if scale == 0.0:
        raise SteadyStateError("zero Liouvillian has no distinguished steady state")
    vals, vecs, _ = _null_space(lv.matrix, scale)

    if len(vals) == 1:
        rho = state_from_vector(space, vecs[:, 0]).hermitized()
        tr = rho.trace()
        if abs(tr) < 1e-12:
            raise SteadyStateError("null vector is traceless; cannot normalize")
        rho = rho.scaled(1.0 / tr)
    else:
        if initial is None:
            raise DegenerateSteadyStateError(
                f"zero eigenvalue has multiplicity {len(vals)}; supply an initial state"
            )
        # biorthogonal projection onto the null space along the flow
        lvals, lvecs, _ = _null_space(lv.matrix.conj().T, scale, k0=max(4, len(vals) + 1))
        if len(lvals) != len(vals):
            raise SteadyStateError(
                f"left/right null dimensions differ ({len(lvals)} vs {len(vals)})"
            )
        overlap = lvecs.conj().T @ vecs
        coeffs = np.linalg.solve(overlap, lvecs.conj().T @ initial.to_vector())
        rho = state_from_vector(space, vecs @ coeffs).hermitized()
        tr = rho.trace()
        if abs(tr) < 1e-12:
            raise SteadyStateError("projected steady state is traceless")
        rho = rho.scaled(1.0 / tr)

    vec = rho.to_vector()
    residual = np.linalg.norm(lv.apply_vec(vec)) / (scale * np.linalg.norm(vec))
    if residual > RESIDUAL_TOL:
        raise SteadyStateError(f"steady-state residual {residual:.3e} exceeds {RESIDUAL_TOL:.0e}")
    return rho


# ---------------------------------------------------------------------------
# diagonal fast path
# ---------------------------------------------------------------------------

class DiagonalEvolution:
    """Closed evolution of blockwise-diagonal states.

    Channels whose quadratic jump coefficients contain no +/- cross terms
    (for example the local raising channel or the isotropic local
    depolarizer) never create off-diagonal elements from a diagonal state,
    so the dynamics closes on the O(N^2) vector of blockwise populations.
    The generator is assembled once as a small sparse real matrix over the
    flat (J, M) ket layout.
    """

    def __init__(self, spec: LiouvillianSpec, space: BlockSpace):
        if spec.hamiltonian is not None or spec.collective_channels:
            raise ValueError("diagonal path supports local channels only")
        if not spec.local_channels:
            raise ValueError("diagonal path needs at least one local channel")
        cmat = np.zeros((3, 3), dtype=complex)  # quadratic jump coefficients over (+, -, z)
        qdiag_total = None  # rate-weighted diagonal of sum_n (s^dag s)^(n) per ket
        for s, rate in spec.local_channels:
            if s.s0 != 0:
                raise ValueError("diagonal path requires traceless jump operators")
            svec = np.array([s.sp, s.sm, s.sz])
            cmat += rate * np.outer(svec, svec.conj())
            m2 = s.matrix().conj().T @ s.matrix()
            if np.abs(m2[0, 1]) > 1e-14 or np.abs(m2[1, 0]) > 1e-14:
                raise ValueError("jump operator with nondiagonal s^dag s; not closed")
            c0, cz = (m2[0, 0] + m2[1, 1]).real / 2, (m2[0, 0] - m2[1, 1]).real
            per_ket = np.concatenate(
                [
                    space.n_particles * c0 + cz * (j - np.arange(d))
                    for j, d in zip(space.j_values, space.block_dims)
                ]
            )
            qdiag_total = rate * per_ket if qdiag_total is None else qdiag_total + rate * per_ket
        offdiag = cmat - np.diag(np.diag(cmat))
        if np.abs(offdiag).max() > 1e-14 * max(np.abs(cmat).max(), 1.0):
            raise ValueError("cross terms present; diagonal evolution is not closed")

        self.space = space
        self.spec = spec
        within, down, up = block_coupling_weights(space)
        rows, cols, data = [], [], []
        shifts = {"+": 1, "-": -1, "z": 0}

        def ket(b, m):
            return space.ket_offsets[b] + round(space.j_values[b] - m)

        for b, j in enumerate(space.j_values):
            d = int(space.block_dims[b])
            for i in range(d):
                m = j - i
                src = ket(b, m)
                for qi, q in enumerate(("+", "-", "z")):
                    w = cmat[qi, qi].real
                    if w == 0.0:
                        continue
                    shift = shifts[q]
                    amp = coefficient("A", q, j, m)
                    if amp != 0.0 and within[b] != 0.0:
                        rows.append(ket(b, m + shift))
                        cols.append(src)
                        data.append(w * within[b] * amp * amp)
                    amp = coefficient("B", q, j, m)
                    if amp != 0.0 and down[b] != 0.0:
                        rows.append(ket(b + 1, m + shift))
                        cols.append(src)
                        data.append(w * down[b] * amp * amp)
                    amp = coefficient("D", q, j, m)
                    if amp != 0.0 and up[b] != 0.0:
                        rows.append(ket(b - 1, m + shift))
                        cols.append(src)
                        data.append(w * up[b] * amp * amp)

        dim = space.ket_dim
        sandwich = sp.coo_matrix((data, (rows, cols)), shape=(dim, dim)).tocsr()
        self.generator = sandwich - sp.diags(qdiag_total)
        m_weights = np.zeros(dim)
        for b, (j, d) in enumerate(zip(space.j_values, space.block_dims)):
            m_weights[space.ket_offsets[b]: space.ket_offsets[b] + d] = j - np.arange(d)
        self.m_weights = m_weights
        self.half_n = space.n_particles / 2

    def fraction_of(self, diag: np.ndarray) -> float:
        return float(diag @ self.m_weights) / self.half_n

    def diagonal_of(self, state: CollectiveState) -> np.ndarray:
        out = np.zeros(self.space.ket_dim)
        for b, d in enumerate(self.space.block_dims):
            off = self.space.ket_offsets[b]
            block = state.blocks[b]
            if np.abs(block - np.diag(np.diag(block))).max() > 1e-12:
                raise ValueError("state has off-diagonal elements; diagonal path invalid")
            out[off: off + d] = np.diag(block).real
        return out

    def state_from_diagonal(self, diag: np.ndarray) -> CollectiveState:
        blocks = []
        for b, d in enumerate(self.space.block_dims):
            off = self.space.ket_offsets[b]
            blocks.append(np.diag(diag[off: off + d]).astype(complex))
        return CollectiveState(self.space, tuple(blocks))

    def _rhs(self, _t, y):
        return self.generator @ y

    def evolve(self, initial: CollectiveState, sample_times, cfg: IntegratorConfig = DEFAULT_CONFIG):
        times = np.asarray(sample_times, dtype=float)
        y0 = self.diagonal_of(initial)
        if times[-1] == 0.0:
            return [self.state_from_diagonal(y0) for _ in times]
        sol = solve_ivp(
            self._rhs, (0.0, float(times[-1])), y0, method="RK45",
            t_eval=times, rtol=cfg.rtol, atol=cfg.atol, max_step=cfg.max_step,
        )
        if not sol.success:
            raise IntegrationError(f"integrator failed: {sol.message}")
        return [self.state_from_diagonal(sol.y[:, k]) for k in range(sol.y.shape[1])]

    def until_fraction(
        self,
        initial: CollectiveState,
        target_f: float,
        direction: str,
        cfg: IntegratorConfig = DEFAULT_CONFIG,
        t_max: float = 100.0,
    ):
        if direction not in ("rising", "falling"):
            raise ValueError("direction must be 'rising' or 'falling'")

        def crossing(_t, y):
            return self.fraction_of(y) - target_f

        crossing.terminal = True
        crossing.direction = 1.0 if direction == "rising" else -1.0
        sol = solve_ivp(
            self._rhs, (0.0, float(t_max)), self.diagonal_of(initial), method="RK45",
            events=[crossing], dense_output=True, rtol=cfg.rtol, atol=cfg.atol,
            max_step=cfg.max_step,
        )
        if not sol.success:
            raise IntegrationError(f"integrator failed: {sol.message}")
        if sol.status != 1 or len(sol.t_events[0]) == 0:
            raise NoCrossingError(
                f"fraction {target_f} not crossed ({direction}) within t_max={t_max}"
            )
        t_cross = float(sol.t_events[0][0])
        return self.state_from_diagonal(sol.y_events[0][0]), t_cross

    def crossings(
        self,
        initial: CollectiveState,
        targets,
        direction: str,
        cfg: IntegratorConfig = DEFAULT_CONFIG,
        t_max: float = 100.0,
    ):
        """States and times at several fraction targets from one trajectory.

        Targets are visited in trajectory order; the run terminates at the
        extreme target.  Missing crossings raise :class:`NoCrossingError`.
        """
        targets = list(targets)
        if direction not in ("rising", "falling"):
            raise ValueError("direction must be 'rising' or 'falling'")
        sign = 1.0 if direction == "rising" else -1.0
        extreme = max(targets) if direction == "rising" else min(targets)

        events = []
        for f_t in targets:
            def crossing(_t, y, f_t=f_t):
                return self.fraction_of(y) - f_t
            crossing.terminal = bool(f_t == extreme)
            crossing.direction = sign
            events.append(crossing)

        sol = solve_ivp(
            self._rhs, (0.0, float(t_max)), self.diagonal_of(initial), method="RK45",
            events=events, dense_output=True, rtol=cfg.rtol, atol=cfg.atol,
            max_step=cfg.max_step,
        )
        if not sol.success:
            raise IntegrationError(f"integrator failed: {sol.message}")
        out = []
        for k, f_t in enumerate(targets):
            if len(sol.t_events[k]) == 0:
                raise NoCrossingError(f"fraction {f_t} not crossed within t_max={t_max}")
            t_cross = float(sol.t_events[k][0])
            out.append((self.state_from_diagonal(sol.y_events[k][0]), t_cross))
        return out
