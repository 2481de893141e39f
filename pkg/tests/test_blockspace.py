import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import logsumexp

from spinblocks.blockspace import (
    MAX_PARTICLES,
    block_index,
    build_block_space,
    multiplicity_int,
)


def test_n4_layout():
    space = build_block_space(4)
    assert list(space.j_values) == [2.0, 1.0, 0.0]
    assert list(space.block_dims) == [5, 3, 1]
    assert list(space.degeneracy) == [1.0, 3.0, 2.0]


def test_n4_sum_rule_by_hand():
    space = build_block_space(4)
    assert sum(d * g for d, g in zip(space.block_dims, space.degeneracy)) == 16


@pytest.mark.parametrize("n", [1, 2, 3, 7, 20, 41, 100])
def test_top_block_multiplicity_is_one(n):
    space = build_block_space(n)
    assert space.degeneracy[0] == 1.0
    assert space.log_degeneracy[0] == pytest.approx(0.0, abs=1e-12)


def test_n3_half_integer_blocks():
    space = build_block_space(3)
    assert list(space.j_values) == [1.5, 0.5]
    assert list(space.degeneracy) == [1.0, 2.0]
    assert list(space.block_dims) == [4, 2]


@pytest.mark.parametrize("n", range(1, 41))
def test_sum_rule_exact_integers(n):
    total = sum(
        (round(2 * j) + 1) * multiplicity_int(n, j)
        for j in build_block_space(n).j_values
    )
    assert total == 2**n


@pytest.mark.parametrize("n", [1, 2, 17, 64, 137, 256])
def test_sum_rule_log_domain(n):
    space = build_block_space(n)
    lhs = logsumexp(space.log_degeneracy + np.log(space.block_dims))
    assert lhs == pytest.approx(n * math.log(2), rel=1e-12)


@pytest.mark.parametrize("n", range(1, 121))
def test_log_multiplicity_matches_exact(n):
    space = build_block_space(n)
    for j, logd in zip(space.j_values, space.log_degeneracy):
        exact = multiplicity_int(n, j)
        assert logd == pytest.approx(math.log(exact), rel=1e-12)


def test_alpha_is_suffix_sum_and_monotone():
    for n in (6, 7, 40):
        space = build_block_space(n)
        alphas = np.exp(space.log_alpha)
        suffix = np.cumsum(space.degeneracy)
        assert np.allclose(alphas, suffix, rtol=1e-12)
        assert alphas[0] == pytest.approx(1.0)  # top block
        assert np.all(np.diff(alphas) >= 0)     # alpha grows toward smaller J


@given(st.integers(min_value=1, max_value=MAX_PARTICLES))
@settings(max_examples=60, deadline=None)
def test_dimension_counts(n):
    space = build_block_space(n)
    if n % 2 == 0:
        assert space.ket_dim == (n + 2) ** 2 // 4
    else:
        assert space.ket_dim == (n + 1) * (n + 3) // 4
    assert space.vec_dim == int(np.sum(space.block_dims**2))
    assert np.all(space.degeneracy > 0)


def test_build_rejects_bad_n():
    with pytest.raises(ValueError):
        build_block_space(0)
    with pytest.raises(ValueError):
        build_block_space(MAX_PARTICLES + 1)
    with pytest.raises(ValueError):
        build_block_space(2.5)


def test_block_index_examples():
    space = build_block_space(2)
    assert block_index(space, 1, 1) == 0
    assert block_index(space, 1, 0) == 1
    assert block_index(space, 1, -1) == 2
    assert block_index(space, 0, 0) == 3
    with pytest.raises(IndexError):
        block_index(space, 1, -2)
    with pytest.raises(IndexError):
        block_index(space, 0.5, 0.5)


def test_block_index_bijective():
    for n in (5, 8):
        space = build_block_space(n)
        seen = set()
        for j in space.j_values:
            m = j
            while m >= -j - 1e-9:
                seen.add(block_index(space, j, m))
                m -= 1
        assert seen == set(range(space.ket_dim))


def test_block_index_rejects_non_integer_step():
    space = build_block_space(4)
    with pytest.raises(IndexError):
        block_index(space, 2, 0.5)
