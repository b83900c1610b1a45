import math

import numpy as np
import pytest
from hypothesis import example, given, settings, strategies as st
from scipy.linalg import expm

from lambda_cqed.atoms import CouplingConfig, builtin_atom, rabi_from_intensity
from lambda_cqed.dressed import dressed_block, dressed_lattice
from lambda_cqed.initial_state import FieldAmplitudes, build_packet, normalize_gamma
from lambda_cqed.observables import excitation_distributions
from lambda_cqed.propagator import (
    LatticeMismatchError,
    block_propagator,
    evolve,
    evolve_many,
    lattice_propagators,
)
from lambda_cqed.state_space import BlockIndex

from reference import block_matrix

LI = builtin_atom("li6")
MU = rabi_from_intensity(LI.gamma_bar, 3.0)


def test_identity_at_zero():
    cp = CouplingConfig.from_atom(LI, MU, MU, 0.1)
    assert np.array_equal(block_propagator(dressed_block(BlockIndex(4, 2), cp, LI), 0.0).u, np.eye(3))
    u, ph = lattice_propagators(dressed_lattice(build_small(), cp, LI), 0.0)
    assert np.array_equal(u, np.broadcast_to(np.eye(3), u.shape))
    assert np.array_equal(ph, np.ones_like(ph))


def build_small():
    from lambda_cqed.state_space import build_lattice
    return build_lattice(6)


def test_resonant_elements():
    cp = CouplingConfig.from_atom(LI, MU, 0.7 * MU, 0.0)
    block = BlockIndex(5, 2)
    db = dressed_block(block, cp, LI)
    t = 37.5
    u = block_propagator(db, t).u
    eps = db.eps2
    assert u[2, 2] == pytest.approx(np.exp(-1j * db.e0 * t) * math.cos(eps * t), abs=1e-14)
    g = MU * math.sqrt(block.m1 - block.m2 + 1)
    assert u[2, 0] == pytest.approx(-1j * np.exp(-1j * db.e0 * t) * g / eps * math.sin(eps * t), abs=1e-14)
    assert u[0, 1] == pytest.approx(u[1, 0], abs=1e-15)


blocks = st.integers(1, 40).flatmap(lambda m1: st.tuples(st.just(m1), st.integers(1, m1)))
couplings = st.tuples(st.floats(1e-4, 0.2), st.floats(1e-4, 0.2), st.floats(-0.5, 0.5))


@settings(max_examples=150, deadline=None)
@given(blocks, couplings, st.floats(0, 500), st.floats(0, 500))
@example((29, 1), (0.125, 0.125, -0.44349833084416623), 452.0, 0.0)
def test_unitary_composition_and_exponential(mb, cpl, t1, t2):
    cp = CouplingConfig.from_atom(LI, *cpl)
    block = BlockIndex(*mb)
    db = dressed_block(block, cp, LI)
    u1 = block_propagator(db, t1).u
    u2 = block_propagator(db, t2).u
    u12 = block_propagator(db, t1 + t2).u
    assert np.abs(u1.conj().T @ u1 - np.eye(3)).max() < 1e-12
    assert np.abs(u1 @ u2 - u12).max() < 1e-11
    ref = expm(-1j * block_matrix(block, cp, LI) * t1)
    assert np.abs(u1 - ref.T).max() < 1e-9


def test_small_eps_limit():
    cp = CouplingConfig.from_atom(LI, 1e-9, 1e-9, 0.0)
    u = block_propagator(dressed_block(BlockIndex(2, 1), cp, LI), 1e-3).u
    assert np.all(np.isfinite(u))
    assert np.abs(u.conj().T @ u - np.eye(3)).max() < 1e-12


def packet(nbar=(3.0, 3.0), gamma=(1, 1, 1)):
    return build_packet(FieldAmplitudes.from_mean_photons(*nbar), normalize_gamma(gamma))


def test_evolve_examples():
    cp = CouplingConfig.from_atom(LI, MU, MU, 0.05)
    pk = packet()
    dl = dressed_lattice(pk.lattice, cp, LI)
    assert np.array_equal(evolve(pk, 0.0, dl).amplitudes, pk.amplitudes)
    for t in (1.0, 10.0, 100.0):
        assert abs(evolve(pk, t, dl).norm - 1.0) < 1e-12
    # dark slot |0, n2; 1> only picks up a phase
    i = pk.lattice.index(3, 4, 1)
    many = evolve_many(pk, np.linspace(0, 400, 9), dl)
    assert np.allclose(np.abs(many[:, i]), abs(pk.amplitudes[i]), rtol=0, atol=1e-15)
    # joint distribution is time independent
    p0 = excitation_distributions(pk).joint
    pt = excitation_distributions(evolve(pk, 123.0, dl)).joint
    assert np.abs(p0 - pt).max() < 1e-12
    # evolve and evolve_many agree
    assert np.abs(many[3] - evolve(pk, 150.0, dl).amplitudes).max() < 1e-13


def test_lattice_mismatch():
    cp = CouplingConfig.from_atom(LI, MU, MU, 0.0)
    pk = packet()
    other = dressed_lattice(packet((1.0, 1.0)).lattice, cp, LI)
    with pytest.raises(LatticeMismatchError):
        evolve(pk, 1.0, other)
