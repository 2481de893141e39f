import numpy as np
import pytest

from spinblocks.blockspace import build_block_space
from spinblocks.channels import (
    LiouvillianSpec,
    apply_collective_lindblad,
    apply_liouvillian,
    apply_local_symmetric_lindblad,
    collective_depolarizing_channel,
    polarizing_channel,
    symmetric_depolarizing_channel,
)
from spinblocks.errors import SpaceMismatchError
from spinblocks.observables import expectation
from spinblocks.operators import (
    SingleSpinOperator,
    collective_from_single,
    collective_generator,
    counter_twisting_hamiltonian,
    spin_plus,
    spin_x,
    spin_y,
    spin_z,
)
from spinblocks.states import (
    CollectiveState,
    coherent_state,
    mixed_collective_state,
    mixed_symmetric_state,
    random_state,
    zero_state,
)

RNG = np.random.default_rng(99)

GENERIC_JUMPS = [
    spin_plus(),
    spin_x(),
    spin_z(),
    SingleSpinOperator(s0=0.3 - 0.1j, sp=0.7 + 0.2j, sm=-0.4j, sz=0.5 + 0.9j),
]


def max_block_abs(state):
    return max(np.abs(b).max() for b in state.blocks)


def test_liouvillian_spec_validation():
    space = build_block_space(2)
    with pytest.raises(ValueError):
        LiouvillianSpec()
    with pytest.raises(ValueError):
        LiouvillianSpec(local_channels=((spin_x(), -0.5),))
    spec = LiouvillianSpec(hamiltonian=counter_twisting_hamiltonian(space, 1.0))
    assert spec.space_of() is spec.hamiltonian.space


def test_collective_fixed_point_mixed_symmetric():
    space = build_block_space(8)
    st = mixed_symmetric_state(space)
    for axis in ("x", "y", "z"):
        deriv = apply_collective_lindblad(collective_generator(space, axis), st)
        assert max_block_abs(deriv) < 1e-14


def test_collective_derivative_traceless():
    space = build_block_space(6)
    st = random_state(space, RNG)
    deriv = apply_collective_lindblad(collective_generator(space, "+"), st)
    assert abs(deriv.trace()) < 1e-12


def test_collective_space_mismatch():
    with pytest.raises(SpaceMismatchError):
        apply_collective_lindblad(
            collective_generator(build_block_space(3), "x"),
            mixed_collective_state(build_block_space(4)),
        )


@pytest.mark.parametrize("s", GENERIC_JUMPS)
def test_single_particle_local_equals_collective(s):
    space = build_block_space(1)
    st = random_state(space, RNG)
    local = apply_local_symmetric_lindblad(s, st)
    collective = apply_collective_lindblad(collective_from_single(space, s), st)
    assert local.max_abs_difference(collective) < 1e-13


def test_mixed_collective_is_depolarizer_fixed_point():
    for n in (2, 5, 16, 41):
        space = build_block_space(n)
        st = mixed_collective_state(space)
        total = zero_state(space)
        for s in (spin_x(), spin_y(), spin_z()):
            total = total + apply_local_symmetric_lindblad(s, st)
        assert max_block_abs(total) < 1e-13


@pytest.mark.parametrize("n", range(2, 11))
def test_local_derivative_traceless_and_hermitian(n):
    space = build_block_space(n)
    st = random_state(space, RNG)
    for s in GENERIC_JUMPS:
        deriv = apply_local_symmetric_lindblad(s, st)
        assert abs(deriv.trace()) < 1e-10
        assert max(
            np.abs(b - b.conj().T).max() for b in deriv.blocks
        ) < 1e-10


def test_block_coupling_locality():
    # a state supported on one block drives only its immediate neighbors
    space = build_block_space(9)
    for b in range(space.n_blocks):
        st = random_state(space, RNG, pure_block=b)
        deriv = apply_local_symmetric_lindblad(spin_x(), st)
        for c, block in enumerate(deriv.blocks):
            if abs(c - b) > 1:
                assert np.abs(block).max() < 1e-14


def test_collective_channel_never_populates_empty_blocks():
    space = build_block_space(7)
    st = random_state(space, RNG, pure_block=1)
    deriv = apply_collective_lindblad(collective_generator(space, "-"), st)
    for c, block in enumerate(deriv.blocks):
        if c != 1:
            assert np.abs(block).max() == 0.0


def test_unitary_flow_preserves_purity_derivative():
    # d tr[rho^2]/dt = 2 tr[rho rhodot] with the multiplicity weighting
    space = build_block_space(8)
    st = random_state(space, RNG)
    spec = LiouvillianSpec(hamiltonian=counter_twisting_hamiltonian(space, 0.4))
    deriv = apply_liouvillian(spec, st)
    dpurity = sum(
        2 * np.einsum("ij,ji->", r, d).real / np.exp(space.log_degeneracy[b])
        for b, (r, d) in enumerate(zip(st.blocks, deriv.blocks))
    )
    assert abs(dpurity) < 1e-12


def test_depolarizing_keeps_transverse_variance_flat_at_coherent():
    space = build_block_space(30)
    st = coherent_state(space, 0.0, 0.0)
    deriv = apply_liouvillian(symmetric_depolarizing_channel(1.0), st)
    jx = collective_generator(space, "x")
    jx2 = jx @ jx
    mean_jx = expectation(st, jx).real
    dvar = (
        sum(np.einsum("ij,ji->", d, o).real for d, o in zip(deriv.blocks, jx2.blocks))
        - 2 * mean_jx
        * sum(np.einsum("ij,ji->", d, o).real for d, o in zip(deriv.blocks, jx.blocks))
    )
    assert abs(dvar) < 1e-10


def test_polarizing_raises_mean_spin_from_mixed():
    space = build_block_space(14)
    st = mixed_collective_state(space)
    deriv = apply_liouvillian(polarizing_channel(1.0), st)
    jz = collective_generator(space, "z")
    rate = sum(np.einsum("ij,ji->", d, o).real for d, o in zip(deriv.blocks, jz.blocks))
    assert rate > 0.0


def test_rates_scale_linearly():
    space = build_block_space(5)
    st = random_state(space, RNG)
    d1 = apply_liouvillian(symmetric_depolarizing_channel(1.0), st)
    d3 = apply_liouvillian(symmetric_depolarizing_channel(3.0), st)
    assert d3.max_abs_difference(CollectiveState(space, tuple(3 * b for b in d1.blocks))) < 1e-12


# ---------------------------------------------------------------------------
# elementwise agreement with the full tensor-product construction
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n", range(2, 7))
def test_local_channel_matches_brute_force(n):
    from spinblocks.oracle import BlockExtractor, full_local_lindblad

    extractor = BlockExtractor(n)
    space = extractor.space
    for state in (
        mixed_collective_state(space),
        coherent_state(space, 0.0, 0.0),
        random_state(space, RNG),
    ):
        rho_full = extractor.embed_state(state)
        for s in GENERIC_JUMPS:
            expected = extractor.extract(full_local_lindblad(s, rho_full))
            got = apply_local_symmetric_lindblad(s, state)
            assert got.max_abs_difference(expected) < 1e-10


def test_pump_on_mixed_matches_brute_force_n4():
    from spinblocks.oracle import BlockExtractor, full_local_lindblad

    extractor = BlockExtractor(4)
    space = extractor.space
    st = mixed_collective_state(space)
    expected = extractor.extract(full_local_lindblad(spin_plus(), extractor.embed_state(st)))
    got = apply_local_symmetric_lindblad(spin_plus(), st)
    assert got.max_abs_difference(expected) < 1e-10


def test_apply_liouvillian_full_composition():
    # Hamiltonian + collective + local terms sum with their rates
    space = build_block_space(4)
    st = random_state(space, RNG)
    ham = counter_twisting_hamiltonian(space, 0.2)
    spec = LiouvillianSpec(
        hamiltonian=ham,
        collective_channels=((collective_generator(space, "z"), 0.7),),
        local_channels=((spin_x(), 0.3),),
    )
    got = apply_liouvillian(spec, st)
    want = zero_state(space)
    comm = CollectiveState(
        space,
        tuple(-1j * (h @ r - r @ h) for h, r in zip(ham.blocks, st.blocks)),
    )
    want = want + comm
    coll = apply_collective_lindblad(collective_generator(space, "z"), st)
    want = want + CollectiveState(space, tuple(0.7 * b for b in coll.blocks))
    loc = apply_local_symmetric_lindblad(spin_x(), st)
    want = want + CollectiveState(space, tuple(0.3 * b for b in loc.blocks))
    assert got.max_abs_difference(want) < 1e-12
