import numpy as np
import pytest

from spinblocks.blockspace import build_block_space
from spinblocks.errors import ResourceError, VerificationError
from spinblocks.oracle import (
    BlockExtractor,
    compare_trajectories,
    collective_sum,
    embed,
    full_block_traces,
    full_coherent_state,
    full_collective_lindblad,
    full_local_lindblad,
    full_mixed_state,
)
from spinblocks.operators import spin_minus, spin_plus, spin_z
from spinblocks.states import random_state

RNG = np.random.default_rng(41)


def test_single_spin_textbook_decay():
    # one spin: the local channel is the ordinary amplitude-damping dissipator
    rho = np.array([[0.7, 0.2 + 0.1j], [0.2 - 0.1j, 0.3]], dtype=complex)
    got = full_local_lindblad(spin_minus(), rho)
    sm = np.array([[0, 0], [1, 0]], dtype=complex)
    k = sm.conj().T @ sm
    want = sm @ rho @ sm.conj().T - 0.5 * (k @ rho + rho @ k)
    assert np.abs(got - want).max() < 1e-14


def test_jz_on_maximally_mixed_vanishes():
    got = full_local_lindblad(spin_z(), full_mixed_state(2))
    assert np.abs(got).max() < 1e-14


def test_pump_annihilates_fully_polarized():
    got = full_local_lindblad(spin_plus(), full_coherent_state(4))
    assert np.abs(got).max() < 1e-14


def test_collective_matches_local_single_site():
    rho = full_coherent_state(1, 0.3, 0.8)
    sx = np.array([[0, 0.5], [0.5, 0]], dtype=complex)
    from spinblocks.operators import spin_x

    assert np.abs(
        full_collective_lindblad(sx, rho) - full_local_lindblad(spin_x(), rho)
    ).max() < 1e-14


def test_full_block_traces_reference_states():
    assert np.allclose(full_block_traces(full_coherent_state(4)), [1, 0, 0], atol=1e-10)
    space = build_block_space(4)
    want = (2 * space.j_values + 1) * space.degeneracy / 2**4
    assert np.allclose(full_block_traces(full_mixed_state(4)), want, atol=1e-10)


def test_two_spin_singlet_sits_in_j0():
    psi = np.zeros(4, dtype=complex)
    psi[1], psi[2] = 1 / np.sqrt(2), -1 / np.sqrt(2)
    rho = np.outer(psi, psi.conj())
    assert np.allclose(full_block_traces(rho), [0, 1], atol=1e-12)


def test_embedding_dims():
    op = embed(np.diag([1.0, -1.0]).astype(complex), 1, 3)
    assert op.shape == (8, 8)
    big = collective_sum(np.eye(2, dtype=complex), 3)
    assert np.allclose(big, 3 * np.eye(8))


@pytest.mark.parametrize("n", [2, 3, 5])
def test_extractor_roundtrip(n):
    extractor = BlockExtractor(n)
    st = random_state(extractor.space, RNG)
    back = extractor.extract(extractor.embed_state(st))
    assert back.max_abs_difference(st) < 1e-12


def test_purity_weighting_consistency():
    # the 1/multiplicity weighting reproduces the full-space purity exactly
    from spinblocks.observables import log10_purity

    for n in (3, 6):
        extractor = BlockExtractor(n)
        st = random_state(extractor.space, RNG)
        rho = extractor.embed_state(st)
        assert 10.0 ** log10_purity(st) == pytest.approx(
            np.trace(rho @ rho).real, abs=1e-12
        )


def test_size_cap_enforced():
    with pytest.raises(ResourceError):
        full_mixed_state(11)


def test_compare_trajectories_reference_cases():
    times = np.linspace(0.0, 1.0, 10)
    rep = compare_trajectories("symmetric_depolarizing", "coherent", times, 4)
    assert rep.max_deviation < 1e-8
    rep = compare_trajectories("pumping", "mixed", times, 6)
    assert rep.max_deviation < 1e-8
    rep = compare_trajectories("twist_symmetric", "coherent", times, 2, gamma=0.5)
    assert rep.max_deviation < 1e-8


def test_compare_trajectories_threshold_raises():
    times = np.linspace(0.0, 0.5, 4)
    with pytest.raises(VerificationError):
        compare_trajectories("pumping", "mixed", times, 3, threshold=1e-18)


def test_compare_rejects_unknown_labels():
    with pytest.raises(ValueError):
        compare_trajectories("nonsense", "mixed", [0.0, 0.1], 3)
    with pytest.raises(ValueError):
        compare_trajectories("pumping", "nonsense", [0.0, 0.1], 3)
