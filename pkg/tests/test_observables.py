import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import gammaln

from lambda_cqed.atoms import CouplingConfig, builtin_atom, rabi_from_intensity
from lambda_cqed.dressed import dressed_lattice
from lambda_cqed.initial_state import FieldAmplitudes, build_packet, normalize_gamma
from lambda_cqed.observables import (
    GridSpec,
    VacuumModeError,
    atomic_rdm,
    autocorrelation,
    coherence,
    dark_state_closed_form,
    dark_state_probabilities,
    default_grid,
    excitation_distributions,
    field_rdm,
    fock_grid,
    husimi,
    joint_probability_closed_form,
    mandel_q,
    marginal_m1_closed_form,
    marginal_m2_closed_form,
    mean_photons,
    mode_rdm,
    mode_rdms_from_grid,
    occupation_fluctuation,
    phase_area,
    second_moment,
    second_moment_grid,
)
from lambda_cqed.oracle import FockSpace, fullspace_atomic_rdm, fullspace_evolve, fullspace_mode_rdms, lattice_to_fock
from lambda_cqed.propagator import evolve

LI = builtin_atom("li6")
MU = rabi_from_intensity(LI.gamma_bar, 3.0)


def coherent_density(alpha, n):
    k = np.arange(n)
    c = np.exp(-abs(alpha) ** 2 / 2 + k * np.log(abs(alpha) + 1e-300) - 0.5 * gammaln(k + 1)) * np.exp(1j * k * np.angle(alpha))
    if alpha == 0:
        c = np.zeros(n)
        c[0] = 1
    return np.outer(c, c.conj())


def make(nbar=(3.0, 3.0), gamma=(1, 1, 1), delta=0.05):
    cp = CouplingConfig.from_atom(LI, MU, 0.8 * MU, delta)
    pk = build_packet(FieldAmplitudes.from_mean_photons(*nbar), normalize_gamma(gamma))
    return cp, pk, dressed_lattice(pk.lattice, cp, LI)


def test_atomic_rdm_at_zero():
    g = normalize_gamma((1, 2, 3), (0, 0.5, 1.0))
    pk = build_packet(FieldAmplitudes.from_mean_photons(2, 1), g)
    rho = atomic_rdm(pk).rho
    assert np.abs(rho - np.outer(g.vector, g.vector.conj())).max() < 1e-12
    pk = build_packet(FieldAmplitudes.from_mean_photons(2, 1), normalize_gamma((0, 0, 1)))
    assert atomic_rdm(pk).populations[2] == pytest.approx(1.0, abs=1e-12)


def test_reductions_match_fullspace_oracle():
    cp, pk, dl = make()
    space = FockSpace(pk.n1_cap, pk.n2_cap)
    psi0 = lattice_to_fock(pk.lattice, pk.amplitudes, space)
    t = 77.0
    ref = fullspace_evolve(psi0, [t], space, cp, LI)[0]
    pt = evolve(pk, t, dl)
    assert np.abs(atomic_rdm(pt).rho - fullspace_atomic_rdm(ref, space)).max() < 1e-8
    r1, r2 = fullspace_mode_rdms(ref, space)
    fd = field_rdm(pt)
    assert np.abs(mode_rdm(fd, 1) - r1).max() < 1e-8
    assert np.abs(mode_rdm(fd, 2) - r2).max() < 1e-8
    assert autocorrelation(pk, pt) == pytest.approx(abs(np.vdot(psi0, ref)) ** 2, abs=1e-8)


def test_density_invariants_over_time():
    cp, pk, dl = make(gamma=(1, 0, 1))
    for t in (0.0, 13.0, 250.0):
        pt = evolve(pk, t, dl)
        rho = atomic_rdm(pt).rho
        assert abs(np.trace(rho) - 1) < 1e-12
        assert np.abs(rho - rho.conj().T).max() < 1e-14
        assert np.linalg.eigvalsh(rho).min() > -1e-12
        assert abs(atomic_rdm(pt).populations.sum() - 1) < 1e-12
        fd = field_rdm(pt)
        assert abs(np.trace(fd.rho) - 1) < 1e-10
        assert np.abs(fd.rho - fd.rho.conj().T).max() < 1e-14
        r1, r2 = mode_rdms_from_grid(fock_grid(pk.lattice, pt.amplitudes, pk.n1_cap, pk.n2_cap))
        assert np.abs(r1 - mode_rdm(fd, 1)).max() < 1e-14


def test_occupation_fluctuation():
    assert occupation_fluctuation(0.0) == 0.0
    assert occupation_fluctuation(1.0) == 0.0
    assert occupation_fluctuation(0.5) == 0.25
    with pytest.raises(ValueError):
        occupation_fluctuation(1.5)


def test_coherence_examples():
    pk = build_packet(FieldAmplitudes.from_mean_photons(3, 3), normalize_gamma((1, 0, 0)))
    assert coherence(atomic_rdm(pk)) == pytest.approx(0.0, abs=1e-15)
    pk = build_packet(FieldAmplitudes.from_mean_photons(3, 3), normalize_gamma((1, 1, 1)))
    assert coherence(atomic_rdm(pk)) == pytest.approx(2.0, abs=1e-12)


@given(st.lists(st.floats(-1, 1), min_size=18, max_size=18))
def test_coherence_bounds(x):
    m = np.array(x[:9]).reshape(3, 3) + 1j * np.array(x[9:]).reshape(3, 3)
    rho = m @ m.conj().T
    tr = np.trace(rho).real
    if tr < 1e-6:
        return
    c = coherence(rho / tr)
    assert -1e-15 <= c <= 2 + 1e-12


def test_initial_modes_are_coherent():
    pk = build_packet(FieldAmplitudes.from_mean_photons(3, 1.5), normalize_gamma((1, 1, 0)))
    fd = field_rdm(pk)
    r1 = mode_rdm(fd, 1)
    assert abs(np.trace(r1 @ r1).real - 1) < 1e-10
    assert mean_photons(r1)[0] == pytest.approx(3.0, abs=1e-10)
    assert phase_area(r1) == pytest.approx(1.0, abs=1e-10)


def test_mandel_examples():
    assert abs(mandel_q(coherent_density(1.7, 40))) < 1e-8
    fock1 = np.diag([0.0, 1.0, 0.0])
    assert mandel_q(fock1) == pytest.approx(-1.0)
    assert mandel_q(np.diag([0.5, 0, 0.5])) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(VacuumModeError):
        mandel_q(np.diag([1.0, 0, 0]))


def test_husimi_examples():
    vac = np.diag([1.0, 0, 0])
    pg = husimi(vac, GridSpec(1.0, 0.5))
    centre = pg.q[len(pg.y) // 2, len(pg.x) // 2]
    assert centre == pytest.approx(1 / math.pi, abs=1e-15)
    alpha = 1.5 - 0.5j
    rho = coherent_density(alpha, 40)
    spec = default_grid(abs(alpha) ** 2)
    pg = husimi(rho, spec)
    ix = np.argmin(np.abs(pg.x - alpha.real))
    iy = np.argmin(np.abs(pg.y - alpha.imag))
    assert pg.q[iy, ix] == pytest.approx(1 / math.pi, abs=1e-12)
    assert pg.integral() == pytest.approx(1.0, abs=1e-6)
    assert pg.q.min() >= -1e-15 and pg.q.max() <= 1 / math.pi + 1e-12


def test_husimi_no_overflow_for_large_cutoff():
    rho = coherent_density(6.0, 170)
    pg = husimi(rho, GridSpec(10.0, 0.25))
    assert np.all(np.isfinite(pg.q))


def test_phase_area_examples():
    assert phase_area(coherent_density(2.0, 40)) == pytest.approx(1.0, abs=1e-12)
    assert phase_area(np.diag([0.0, 1.0])) == pytest.approx(2.0, abs=1e-14)
    # balanced cat of well separated lobes
    a = 3.0
    n = 60
    k = np.arange(n)
    c = np.exp(-a * a / 2 + k * np.log(a) - 0.5 * gammaln(k + 1))
    cat = c + (-1.0) ** k * c
    cat /= np.linalg.norm(cat)
    assert phase_area(np.outer(cat, cat)) == pytest.approx(2.0, abs=1e-3)


@pytest.mark.parametrize("rho", [
    np.diag([0.0, 1.0, 0.0]),
    coherent_density(1.2 + 0.4j, 30),
    np.diag([0.2, 0.3, 0.5]),
])
def test_second_moment_grid_agrees(rho):
    pg = husimi(rho, default_grid(3.0))
    assert second_moment_grid(pg) == pytest.approx(second_moment(rho), abs=1e-4)


def test_second_moment_of_evolved_mode():
    cp, pk, dl = make()
    pt = evolve(pk, 60.0, dl)
    r1 = mode_rdm(field_rdm(pt), 1)
    assert second_moment_grid(husimi(r1, default_grid(3.0))) == pytest.approx(second_moment(r1), abs=1e-4)


def test_autocorrelation():
    cp, pk, dl = make()
    assert autocorrelation(pk, pk) == pytest.approx(1.0, abs=1e-13)
    # a packet confined to one dark slot only rotates its phase
    dark = build_packet(FieldAmplitudes(0, 0), normalize_gamma((1, 0, 0)))
    dl0 = dressed_lattice(dark.lattice, cp, LI)
    for t in (3.0, 300.0):
        assert autocorrelation(dark, evolve(dark, t, dl0)) == pytest.approx(1.0, abs=1e-14)
    other = build_packet(FieldAmplitudes.from_mean_photons(1, 1), normalize_gamma((1, 0, 0)))
    with pytest.raises(ValueError):
        autocorrelation(pk, other)


def test_excitation_examples():
    pk = build_packet(FieldAmplitudes(0, 0), normalize_gamma((1, 0, 0)))
    ed = excitation_distributions(pk)
    assert ed.joint[0, 1] == 1.0
    cp, pk, dl = make(gamma=(1, 2, 3))
    ed = excitation_distributions(evolve(pk, 40.0, dl))
    assert ed.m1.sum() == pytest.approx(1.0, abs=1e-12)
    assert ed.m2.sum() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("gamma", [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1), (1, 2, 3)])
def test_excitation_closed_forms(gamma):
    f = FieldAmplitudes.from_mean_photons(3, 3)
    g = normalize_gamma(gamma)
    pk = build_packet(f, g)
    ed = excitation_distributions(pk)
    m1, m2 = np.meshgrid(np.arange(ed.joint.shape[0]), np.arange(ed.joint.shape[1]), indexing="ij")
    assert np.abs(ed.joint - joint_probability_closed_form(f, g, m1, m2)).max() < 1e-10
    assert np.abs(ed.m1 - marginal_m1_closed_form(f, g, np.arange(ed.m1.size))).max() < 1e-10
    assert np.abs(ed.m2 - marginal_m2_closed_form(f, g, np.arange(ed.m2.size))).max() < 1e-10


def test_dark_state_examples():
    pk = build_packet(FieldAmplitudes.from_mean_photons(3, 3), normalize_gamma((1, 0, 0)))
    assert dark_state_probabilities(pk).total1 == pytest.approx(math.exp(-3), abs=1e-12)
    assert dark_state_probabilities(pk).total1 == pytest.approx(0.049787, abs=1e-6)
    cp, pk, dl = make(gamma=(1, 1, 1))
    d0 = dark_state_probabilities(pk)
    assert d0.total1 == pytest.approx(math.exp(-3) / 3, abs=1e-12)
    d100 = dark_state_probabilities(evolve(pk, 100.0, dl))
    assert abs(d100.total1 - d0.total1) < 1e-12 and abs(d100.total2 - d0.total2) < 1e-12
    c1, c2 = dark_state_closed_form(FieldAmplitudes.from_mean_photons(3, 3), normalize_gamma((1, 1, 1)), np.arange(d0.pd1.size))
    assert np.abs(d100.pd1 - c1).max() < 1e-12 and np.abs(d100.pd2 - c2).max() < 1e-12
    joint = excitation_distributions(evolve(pk, 100.0, dl)).joint
    n = np.arange(d0.pd1.size)
    assert np.array_equal(d100.pd1, joint[n, n + 1])
    assert np.array_equal(d100.pd2, joint[n, 0])
