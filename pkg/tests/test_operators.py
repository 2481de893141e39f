import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinblocks.blockspace import build_block_space
from spinblocks.operators import (
    SingleSpinOperator,
    coefficient,
    collective_from_single,
    collective_generator,
    counter_twisting_hamiltonian,
    identity_operator,
    spin_minus,
    spin_plus,
    spin_x,
    spin_y,
    spin_z,
)


def test_single_spin_jz_block():
    space = build_block_space(1)
    jz = collective_generator(space, "z")
    assert np.allclose(jz.blocks[0], np.diag([0.5, -0.5]))


def test_raising_element_sqrt2():
    space = build_block_space(2)
    jp = collective_generator(space, "+")
    # top block is spin-1; <M=1|J_+|M=0> = sqrt(2) sits at (row 0, col 1)
    assert jp.blocks[0][0, 1] == pytest.approx(math.sqrt(2))
    assert jp.blocks[0][1, 2] == pytest.approx(math.sqrt(2))


@pytest.mark.parametrize("n", [1, 2, 3, 6, 37, 120])
def test_commutator_algebra(n):
    space = build_block_space(n)
    jx = collective_generator(space, "x")
    jy = collective_generator(space, "y")
    jz = collective_generator(space, "z")
    comm = jx @ jy - jy @ jx
    resid = max(
        np.abs(c - 1j * z).max() for c, z in zip(comm.blocks, jz.blocks)
    )
    assert resid < 1e-12


@pytest.mark.parametrize("n", [2, 5, 24, 120])
def test_casimir_diagonal(n):
    space = build_block_space(n)
    ops = [collective_generator(space, a) for a in ("x", "y", "z")]
    j2 = ops[0] @ ops[0] + ops[1] @ ops[1] + ops[2] @ ops[2]
    for j, block in zip(space.j_values, j2.blocks):
        target = j * (j + 1) * np.eye(block.shape[0])
        assert np.abs(block - target).max() < 1e-10


def test_counter_twisting_single_spin_vanishes():
    space = build_block_space(1)
    ham = counter_twisting_hamiltonian(space, 0.7)
    assert np.abs(ham.blocks[0]).max() == 0.0


def test_counter_twisting_n2_structure():
    space = build_block_space(2)
    ham = counter_twisting_hamiltonian(space, 0.5)
    top = ham.blocks[0]  # spin-1 block, M ordering (1, 0, -1)
    nonzero = {(i, k) for i in range(3) for k in range(3) if abs(top[i, k]) > 1e-15}
    assert nonzero == {(0, 2), (2, 0)}
    assert np.abs(ham.blocks[1]).max() == 0.0


def test_counter_twisting_hermitian_n50():
    space = build_block_space(50)
    ham = counter_twisting_hamiltonian(space, 1 / 50)
    assert ham.hermiticity_residual() < 1e-12


def test_coefficient_closed_forms():
    assert coefficient("A", "z", 3, 2) == 2.0
    assert coefficient("A", "z", 2.5, -1.5) == -1.5
    assert coefficient("A", "+", 1, 0) == pytest.approx(math.sqrt(2))
    assert coefficient("B", "z", 4, 4) == 0.0
    assert coefficient("D", "z", 0, 0) == 1.0
    assert coefficient("D", "+", 0, 0) == pytest.approx(-math.sqrt(2))
    assert coefficient("B", "-", 2, 0) == pytest.approx(-math.sqrt(2))


def test_coefficient_zero_extension():
    # probing shifted arguments outside the block must return exactly zero
    for q in ("+", "-", "z"):
        for m in (2.0, 2.5, 3.0, -2.5, -4.0):
            if abs(m) > 2:
                assert coefficient("A", q, 2, m) == 0.0
    assert coefficient("A", "z", 2, 3) == 0.0
    assert coefficient("B", "+", 2, -3) == 0.0
    assert coefficient("D", "+", 2, 3) == 0.0
    assert coefficient("B", "+", 0.5, -0.5) == 0.0  # no spin--1/2 target block


def test_coefficient_matches_spin_half_matrices():
    # the within-block amplitudes at J=1/2 are the 2x2 operator elements
    assert coefficient("A", "+", 0.5, -0.5) == 1.0
    assert coefficient("A", "-", 0.5, 0.5) == 1.0
    assert coefficient("A", "z", 0.5, 0.5) == 0.5
    assert coefficient("A", "z", 0.5, -0.5) == -0.5


def test_coefficient_rejects_unknown_kind():
    with pytest.raises(ValueError):
        coefficient("E", "+", 1, 0)


def test_single_spin_matrices():
    assert np.allclose(spin_x().matrix(), [[0, 0.5], [0.5, 0]])
    assert np.allclose(spin_y().matrix(), [[0, -0.5j], [0.5j, 0]])
    assert np.allclose(spin_z().matrix(), [[0.5, 0], [0, -0.5]])
    assert np.allclose(spin_plus().matrix(), [[0, 1], [0, 0]])
    assert np.allclose(spin_minus().matrix(), [[0, 0], [1, 0]])


complex_coeff = st.complex_numbers(
    min_magnitude=0.0, max_magnitude=5.0, allow_nan=False, allow_infinity=False
)


@given(complex_coeff, complex_coeff, complex_coeff, complex_coeff)
@settings(max_examples=80, deadline=None)
def test_single_spin_adjoint_and_roundtrip(s0, sp_, sm, sz):
    s = SingleSpinOperator(s0=s0, sp=sp_, sm=sm, sz=sz)
    # adjoint swaps raising/lowering and conjugates everything
    d = s.dagger()
    assert np.allclose(d.matrix(), s.matrix().conj().T)
    assert np.allclose(d.dagger().matrix(), s.matrix())
    back = SingleSpinOperator.from_matrix(s.matrix())
    assert np.allclose(back.matrix(), s.matrix())


def test_collective_from_single_identity_part():
    space = build_block_space(5)
    s = SingleSpinOperator(s0=2.0)
    op = collective_from_single(space, s)
    ident = identity_operator(space)
    for a, b in zip(op.blocks, ident.blocks):
        assert np.allclose(a, 10.0 * b)  # N * s0


def test_coherent_polarization_is_half_n():
    from spinblocks.observables import expectation
    from spinblocks.states import coherent_state

    for n in (1, 6, 17):
        space = build_block_space(n)
        st_ = coherent_state(space, 0.0, 0.0)
        jz = collective_generator(space, "z")
        assert expectation(st_, jz).real == pytest.approx(n / 2, rel=1e-12)
