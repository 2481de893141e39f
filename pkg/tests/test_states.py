import math

import numpy as np
import pytest

from spinblocks.blockspace import build_block_space
from spinblocks.errors import NumericError, SpaceMismatchError
from spinblocks.observables import (
    expectation,
    log10_purity,
    symmetric_overlap,
    uncertainty,
    variance,
)
from spinblocks.operators import collective_generator
from spinblocks.states import (
    CollectiveState,
    coherent_state,
    mixed_collective_state,
    mixed_symmetric_state,
    random_state,
    rotate,
    state_from_vector,
    validate,
    zero_state,
)


def test_coherent_north_pole_is_corner_matrix():
    space = build_block_space(6)
    st = coherent_state(space, 0.0, 0.0)
    top = np.zeros((7, 7))
    top[0, 0] = 1.0
    assert np.allclose(st.blocks[0], top)
    for b in st.blocks[1:]:
        assert np.abs(b).max() == 0.0


@pytest.mark.parametrize("n", [1, 2, 9, 40])
def test_coherent_moments(n):
    space = build_block_space(n)
    st = coherent_state(space, 0.0, 0.0)
    jx = collective_generator(space, "x")
    jy = collective_generator(space, "y")
    jz = collective_generator(space, "z")
    assert expectation(st, jz).real == pytest.approx(n / 2, rel=1e-12)
    assert abs(expectation(st, jx)) < 1e-12
    assert abs(expectation(st, jy)) < 1e-12
    assert uncertainty(st, jz) == pytest.approx(0.0, abs=1e-7)
    assert variance(st, jx) == pytest.approx(n / 4, rel=1e-10)
    assert variance(st, jy) == pytest.approx(n / 4, rel=1e-10)


def test_coherent_flipped():
    space = build_block_space(11)
    st = coherent_state(space, math.pi, 0.0)
    jz = collective_generator(space, "z")
    assert expectation(st, jz).real == pytest.approx(-11 / 2, rel=1e-10)
    assert symmetric_overlap(st) == pytest.approx(1.0, rel=1e-12)


def test_coherent_tilted_direction():
    # polar/azimuthal angles steer the mean spin onto the usual unit vector
    space = build_block_space(8)
    theta, phi = 0.9, 2.3
    st = coherent_state(space, theta, phi)
    means = [
        expectation(st, collective_generator(space, a)).real for a in ("x", "y", "z")
    ]
    direction = np.array(
        [math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)]
    )
    assert np.allclose(means, 4.0 * direction, atol=1e-10)


def test_mixed_symmetric_properties():
    space = build_block_space(10)
    st = mixed_symmetric_state(space)
    assert np.allclose(st.blocks[0], np.eye(11) / 11)
    for a in ("x", "y", "z"):
        op = collective_generator(space, a)
        assert abs(expectation(st, op)) < 1e-12
        assert variance(st, op) == pytest.approx(10 * 12 / 12, rel=1e-12)


def test_mixed_symmetric_single_spin_equals_mixed_collective():
    space = build_block_space(1)
    a = mixed_symmetric_state(space)
    b = mixed_collective_state(space)
    assert a.max_abs_difference(b) < 1e-15


def test_mixed_collective_entries_n4():
    space = build_block_space(4)
    st = mixed_collective_state(space)
    b = space.block_of(1.0)
    assert np.allclose(st.blocks[b], np.eye(3) * 3 / 16)
    assert st.trace() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("n", [2, 3, 30, 120])
def test_mixed_collective_variances(n):
    space = build_block_space(n)
    st = mixed_collective_state(space)
    for a in ("x", "y", "z"):
        assert variance(st, collective_generator(space, a)) == pytest.approx(
            n / 4, rel=1e-10
        )


def test_mixed_collective_matches_coherent_transverse_noise():
    space = build_block_space(24)
    mixed = mixed_collective_state(space)
    coh = coherent_state(space, 0.0, 0.0)
    jx = collective_generator(space, "x")
    assert variance(mixed, jx) == pytest.approx(variance(coh, jx), abs=1e-10)


def test_rotation_preserves_trace_purity_support():
    space = build_block_space(9)
    st = coherent_state(space, 0.4, 1.1)
    rotated = rotate(st, 0.7, -2.0)
    assert rotated.trace() == pytest.approx(1.0, abs=1e-10)
    assert log10_purity(rotated) == pytest.approx(0.0, abs=1e-10)
    assert symmetric_overlap(rotated) == pytest.approx(1.0, abs=1e-10)


def test_rotation_preserves_mixed_state():
    space = build_block_space(7)
    st = mixed_collective_state(space)
    rotated = rotate(st, 1.2, 0.3)
    assert rotated.max_abs_difference(st) < 1e-12


def test_random_state_is_valid():
    rng = np.random.default_rng(11)
    for n in (1, 4, 9):
        validate(random_state(build_block_space(n), rng))


def test_vector_roundtrip():
    rng = np.random.default_rng(5)
    space = build_block_space(6)
    st = random_state(space, rng)
    back = state_from_vector(space, st.to_vector())
    assert back.max_abs_difference(st) == 0.0


def test_validate_flags_bad_states():
    space = build_block_space(3)
    st = mixed_collective_state(space)
    with pytest.raises(NumericError):
        validate(st.scaled(1.1))
    broken = st.copy()
    broken.blocks[0][0, 1] = 0.5  # not Hermitian
    with pytest.raises(NumericError):
        validate(broken)
    negative = mixed_symmetric_state(space).copy()
    negative.blocks[0][0, 0] -= 0.3
    negative.blocks[0][1, 1] += 0.3  # trace fine, eigenvalue negative
    with pytest.raises(NumericError):
        validate(negative)


def test_space_mismatch_raises():
    a = mixed_collective_state(build_block_space(3))
    b = mixed_collective_state(build_block_space(4))
    with pytest.raises(SpaceMismatchError):
        a.max_abs_difference(b)


def test_zero_state_shapes():
    space = build_block_space(5)
    z = zero_state(space)
    assert [b.shape for b in z.blocks] == [(6, 6), (4, 4), (2, 2)]
    assert z.trace() == 0.0


def test_state_block_count_checked():
    space = build_block_space(4)
    with pytest.raises(ValueError):
        CollectiveState(space, (np.eye(5, dtype=complex),))
