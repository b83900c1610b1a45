import numpy as np
import pytest
from hypothesis import given, strategies as st

from lambda_cqed.state_space import (
    BlockIndex,
    InvalidLevelError,
    build_lattice,
    chi_to_fock,
    fock_to_block,
    lattice_dimension,
)


def test_small_lattices():
    lat = build_lattice(0)
    assert lat.total_dim == 2
    slots = list(zip(lat.m1, lat.m2, lat.k))
    assert slots == [(0, 0, 2), (0, 1, 1)]
    assert build_lattice(1).total_dim == 7


def test_dimension_m0_51():
    # 52 * 157 / 2
    assert lattice_dimension(51) == 4082
    assert build_lattice(51).total_dim == 4082


@pytest.mark.parametrize("M0", range(21))
def test_dimension_matches_enumeration(M0):
    lat = build_lattice(M0)
    count = sum(BlockIndex(m1, m2).dim for m1 in range(M0 + 1) for m2 in range(m1 + 2))
    assert lat.total_dim == count == lattice_dimension(M0)


def test_chi_to_fock_examples():
    assert chi_to_fock(BlockIndex(3, 2), 1) == (2, 1, 1)
    assert chi_to_fock(BlockIndex(3, 0), 2) == (3, 0, 2)
    assert chi_to_fock(BlockIndex(3, 4), 1) == (0, 3, 1)
    with pytest.raises(InvalidLevelError):
        chi_to_fock(BlockIndex(3, 0), 1)
    with pytest.raises(InvalidLevelError):
        chi_to_fock(BlockIndex(3, 4), 3)


def test_fock_to_block_examples():
    assert fock_to_block(2, 1, 1) == (BlockIndex(3, 2), 1)
    assert fock_to_block(0, 0, 3) == (BlockIndex(1, 1), 3)
    assert fock_to_block(5, 0, 2) == (BlockIndex(5, 0), 2)


def test_block_dimension_rule():
    assert BlockIndex(4, 0).dim == 1 and BlockIndex(4, 0).levels == (2,)
    assert BlockIndex(4, 5).dim == 1 and BlockIndex(4, 5).levels == (1,)
    assert BlockIndex(4, 2).dim == 3
    with pytest.raises(ValueError):
        BlockIndex(2, 4)


@pytest.mark.parametrize("M0", range(21))
def test_round_trip_and_order(M0):
    lat = build_lattice(M0)
    keys = list(zip(lat.m1, lat.m2, lat.k))
    assert keys == sorted(keys)
    for i, (m1, m2, k) in enumerate(keys):
        n1, n2, kk = chi_to_fock(BlockIndex(int(m1), int(m2)), int(k))
        assert (n1, n2) == (lat.n1[i], lat.n2[i])
        assert fock_to_block(n1, n2, kk) == (BlockIndex(int(m1), int(m2)), int(k))
        assert lat.index(m1, m2, k) == i


@pytest.mark.parametrize("M0", [0, 3, 9])
def test_partition_of_fock_labels(M0):
    lat = build_lattice(M0)
    want = {(n1, n2, k) for n1 in range(M0 + 2) for n2 in range(M0 + 2) for k in (1, 2, 3)
            if n1 + n2 + (k == 3) <= M0}
    got = list(zip(lat.n1.tolist(), lat.n2.tolist(), lat.k.tolist()))
    assert len(got) == len(set(got))
    assert set(got) == want


@given(st.integers(0, 30), st.integers(0, 30), st.sampled_from([1, 2, 3]))
def test_fock_round_trip_property(n1, n2, k):
    block, kk = fock_to_block(n1, n2, k)
    assert chi_to_fock(block, kk) == (n1, n2, k)
    assert block.m1 == n1 + n2 + (k == 3)
    assert block.m2 == n2 + (k == 1) + (k == 3)


def test_partner_indices_share_photons():
    lat = build_lattice(6)
    for k1 in (1, 2, 3):
        for k2 in (1, 2, 3):
            i, j = lat.partner_indices(k1, k2)
            assert np.all(lat.k[i] == k1) and np.all(lat.k[j] == k2)
            assert np.array_equal(lat.n1[i], lat.n1[j]) and np.array_equal(lat.n2[i], lat.n2[j])
