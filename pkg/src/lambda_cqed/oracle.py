"""Brute-force reference dynamics.

Two routes that share nothing with the closed-form dressed states or
propagators:

* per block: dense 3x3 Hamiltonians (any pair of detunings) exponentiated
  through a Jacobi eigendecomposition;
* full space: the sparse two-mode Fock Hamiltonian with the physical
  ``-mu (a^dag A + a A^dag)`` coupling, evolved with ``expm_multiply``.

:func:`compare_evolutions` runs the closed-form path against both and
returns a JSON-serialisable report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import expm_multiply

from .atoms import AtomSpec, CouplingConfig
from .jacobi import jacobi_eigh
from .state_space import CHI_PHASE, BlockIndex, Lattice, chi_to_fock

__all__ = [
    "ORACLE_TOL",
    "ORACLE_TAIL_TOL",
    "DenseBlockHamiltonian",
    "LatticeHamiltonian",
    "assemble_block",
    "assemble_lattice",
    "numeric_propagator",
    "BlockEigensystem",
    "block_eigensystem",
    "oracle_evolve",
    "FockSpace",
    "fock_hamiltonian",
    "fullspace_evolve",
    "fullspace_atomic_rdm",
    "fullspace_mode_rdms",
    "compare_evolutions",
]

ORACLE_TOL = 1e-8
ORACLE_TAIL_TOL = 1e-10


def _bare_energy(n1, n2, k, coupling: CouplingConfig, atom: AtomSpec):
    omegas = np.asarray(atom.omegas, dtype=float)
    return omegas[np.asarray(k) - 1] + coupling.omega_field1 * np.asarray(n1) + coupling.omega_field2 * np.asarray(n2)


@dataclass(frozen=True)
class DenseBlockHamiltonian:
    block: BlockIndex
    h: np.ndarray


def assemble_block(block: BlockIndex, coupling: CouplingConfig, atom: AtomSpec) -> DenseBlockHamiltonian:
    """Block matrix in the chi_1, chi_2, chi_3 basis.

    The diagonal holds the bare energies of the three Fock kets; the level-3
    ket couples to level 1 with mu13 sqrt(n1 + 1) and to level 2 with
    mu23 sqrt(n2 + 1), where n counts photons of the level-3 ket.
    """
    levels = block.levels
    fock = [chi_to_fock(block, k) for k in levels]
    diag = [float(_bare_energy(n1, n2, k, coupling, atom)) for n1, n2, k in fock]
    if len(levels) == 1:
        return DenseBlockHamiltonian(block, np.array([[diag[0]]]))
    h = np.diag(diag)
    n1_3, n2_3, _ = fock[2]
    h[0, 2] = h[2, 0] = coupling.mu13 * math.sqrt(n1_3 + 1)
    h[1, 2] = h[2, 1] = coupling.mu23 * math.sqrt(n2_3 + 1)
    return DenseBlockHamiltonian(block, h)


@dataclass(frozen=True)
class LatticeHamiltonian:
    """All 3x3 blocks stacked (B, 3, 3) plus the energies of the dark kets."""

    lattice: Lattice
    blocks: np.ndarray
    single: np.ndarray


def assemble_lattice(lattice: Lattice, coupling: CouplingConfig, atom: AtomSpec) -> LatticeHamiltonian:
    s = lattice.triple_slots
    n1, n2, k = lattice.n1, lattice.n2, lattice.k
    bare = _bare_energy(n1, n2, k, coupling, atom)
    h = np.zeros((s.shape[0], 3, 3))
    if s.size:
        h[:, [0, 1, 2], [0, 1, 2]] = bare[s]
        x = coupling.mu13 * np.sqrt(n1[s[:, 2]] + 1.0)
        y = coupling.mu23 * np.sqrt(n2[s[:, 2]] + 1.0)
        h[:, 0, 2] = h[:, 2, 0] = x
        h[:, 1, 2] = h[:, 2, 1] = y
    return LatticeHamiltonian(lattice, h, bare[lattice.single_slots])


def numeric_propagator(h, t: float) -> np.ndarray:
    """exp(-i h t) as V diag(exp(-i w t)) V^T for real symmetric ``h``."""
    h = np.asarray(h, dtype=float)
    if t == 0:
        return np.eye(h.shape[-1], dtype=complex)
    w, v = jacobi_eigh(h)
    return (v * np.exp(-1j * w * t)[..., None, :]) @ np.swapaxes(v, -1, -2)


@dataclass(frozen=True)
class BlockEigensystem:
    hamiltonian: LatticeHamiltonian
    w: np.ndarray  # (B, 3) descending
    v: np.ndarray  # (B, 3, 3) real, columns are eigenvectors

    def propagators(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        ph = np.exp(-1j * self.w * t[..., None, None])
        u = np.einsum("bik,...bk,bjk->...bij", self.v, ph, self.v)
        u[t == 0] = np.eye(3)
        return u


def block_eigensystem(ham: LatticeHamiltonian) -> BlockEigensystem:
    if ham.blocks.shape[0] == 0:
        return BlockEigensystem(ham, np.zeros((0, 3)), np.zeros((0, 3, 3)))
    w, v = jacobi_eigh(ham.blocks)
    return BlockEigensystem(ham, w, v)


def oracle_evolve(amplitudes, times, eig: BlockEigensystem) -> np.ndarray:
    """Evolve Fock-basis amplitudes with the numeric block propagators.

    Returns shape (T, total_dim).  The chi_3 basis vector carries the phase
    that turns the Fock coupling -mu into the +mu of :func:`assemble_block`.
    """
    lat = eig.hamiltonian.lattice
    times = np.atleast_1d(np.asarray(times, dtype=float))
    sign = CHI_PHASE[lat.k - 1]
    chi = np.asarray(amplitudes, dtype=complex) * sign
    out = np.empty((times.size, lat.total_dim), dtype=complex)
    s = lat.triple_slots
    for i, t in enumerate(times):
        if s.size:
            u = eig.propagators(t)
            # coefficient of chi_j after time t: sum_i c_i U_ji (U symmetric)
            out[i, s] = np.einsum("bji,bi->bj", u, chi[s])
        out[i, lat.single_slots] = np.exp(-1j * eig.hamiltonian.single * t) * chi[lat.single_slots]
    return out * sign


# --------------------------------------------------------------------------
# full two-mode Fock space


@dataclass(frozen=True)
class FockSpace:
    n1_max: int
    n2_max: int

    @property
    def dim(self) -> int:
        return (self.n1_max + 1) * (self.n2_max + 1) * 3

    def index(self, n1, n2, k):
        return (np.asarray(n1) * (self.n2_max + 1) + np.asarray(n2)) * 3 + (np.asarray(k) - 1)

    def labels(self):
        n1, n2, k = np.meshgrid(
            np.arange(self.n1_max + 1), np.arange(self.n2_max + 1), np.arange(1, 4), indexing="ij"
        )
        return n1.ravel(), n2.ravel(), k.ravel()


def fock_hamiltonian(space: FockSpace, coupling: CouplingConfig, atom: AtomSpec, rotate: bool = True):
    """Sparse Hamiltonian on the truncated product space.

    With ``rotate=True`` the conserved part Omega1 M1 + (Omega2 - Omega1) M2
    is removed from the diagonal (it commutes with everything and only adds a
    known phase), which keeps ``t * ||H||`` small for long times.
    """
    n1, n2, k = space.labels()
    diag = _bare_energy(n1, n2, k, coupling, atom)
    if rotate:
        diag = diag - _charge_phase_rate(n1, n2, k, coupling, atom)
    rows, cols, vals = [np.arange(space.dim)], [np.arange(space.dim)], [diag]
    # -mu13 (a1^dag A13 + h.c.): |n1, n2; 3> <-> |n1 + 1, n2; 1>
    for lvl, mu, dn1, dn2 in ((1, coupling.mu13, 1, 0), (2, coupling.mu23, 0, 1)):
        m1 = np.arange(space.n1_max + 1 - dn1)
        m2 = np.arange(space.n2_max + 1 - dn2)
        a, b = np.meshgrid(m1, m2, indexing="ij")
        a, b = a.ravel(), b.ravel()
        src = space.index(a, b, 3)
        dst = space.index(a + dn1, b + dn2, lvl)
        amp = -mu * np.sqrt((a + dn1) if dn1 else (b + dn2))
        rows += [dst, src]
        cols += [src, dst]
        vals += [amp, amp]
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    v = np.concatenate(vals).astype(float)
    return sparse.csr_matrix((v, (r, c)), shape=(space.dim, space.dim))


def _charge_phase_rate(n1, n2, k, coupling: CouplingConfig, atom: AtomSpec):
    """Omega1 M1 + (Omega2 - Omega1) M2 plus a constant, per Fock ket.

    The constant makes the rotated diagonal equal {0, D13 - D23, D13} on
    every 3-dim block.
    """
    k = np.asarray(k)
    m1 = np.asarray(n1) + np.asarray(n2) + (k == 3)
    m2 = np.asarray(n2) + (k == 1) + (k == 3)
    w1, w2 = coupling.omega_field1, coupling.omega_field2
    return w1 * m1 + (w2 - w1) * m2 + (atom.omega1 + w1 - w2)


def fullspace_evolve(psi0, times, space: FockSpace, coupling: CouplingConfig, atom: AtomSpec) -> np.ndarray:
    """Evolve a product-space vector; returns (T, space.dim)."""
    h = fock_hamiltonian(space, coupling, atom, rotate=True)
    n1, n2, k = space.labels()
    rate = _charge_phase_rate(n1, n2, k, coupling, atom)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    out = np.empty((times.size, space.dim), dtype=complex)
    psi0 = np.asarray(psi0, dtype=complex)
    for i, t in enumerate(times):
        if t == 0:
            out[i] = psi0
            continue
        out[i] = expm_multiply(-1j * t * h, psi0) * np.exp(-1j * rate * t)
    return out


def lattice_to_fock(lattice: Lattice, amplitudes, space: FockSpace) -> np.ndarray:
    amps = np.asarray(amplitudes)
    sel = (lattice.n1 <= space.n1_max) & (lattice.n2 <= space.n2_max)
    out = np.zeros(amps.shape[:-1] + (space.dim,), dtype=complex)
    out[..., space.index(lattice.n1[sel], lattice.n2[sel], lattice.k[sel])] = amps[..., sel]
    return out


def fullspace_atomic_rdm(psi, space: FockSpace) -> np.ndarray:
    """Trace out both modes of |psi><psi|."""
    m = np.asarray(psi).reshape(-1, 3)
    return m.T @ m.conj()


def fullspace_mode_rdms(psi, space: FockSpace) -> tuple[np.ndarray, np.ndarray]:
    g = np.asarray(psi).reshape(space.n1_max + 1, space.n2_max + 1, 3)
    rho1 = np.tensordot(g, g.conj(), axes=([1, 2], [1, 2]))
    rho2 = np.tensordot(g, g.conj(), axes=([0, 2], [0, 2]))
    return rho1, rho2


# --------------------------------------------------------------------------
# comparison report


def compare_evolutions(
    packet,
    coupling: CouplingConfig,
    atom: AtomSpec,
    times,
    tol: float = ORACLE_TOL,
    fullspace_times=None,
) -> dict:
    """Closed-form path versus the oracle.

    Reports the max over blocks and times of the entrywise deviation between
    analytic and numeric block propagators, the packet-level state distance
    against the numeric block evolution and (for ``fullspace_times``) against
    the full Fock-space evolution.  With unequal detunings only the oracle's
    internal consistency (unitarity, full-space agreement) is checked.
    """
    from .dressed import dressed_lattice
    from .propagator import evolve_many, lattice_propagators

    lat = packet.lattice
    times = [float(t) for t in times]
    ham = assemble_lattice(lat, coupling, atom)
    eig = block_eigensystem(ham)
    report: dict = {
        "M0": lat.M0,
        "blocks": int(lat.triple_blocks.shape[0]),
        "times": times,
        "tolerance": tol,
        "equal_detuning": bool(coupling.equal_detuning),
    }

    unit = 0.0
    for t in times:
        u = eig.propagators(t)
        eye = np.eye(3)
        if u.size:
            unit = max(unit, float(np.max(np.abs(u @ np.conj(np.swapaxes(u, -1, -2)) - eye))))
    report["oracle_unitarity"] = unit

    oracle_states = oracle_evolve(packet.amplitudes, times, eig)
    checks = [unit < 1e-12]
    if coupling.equal_detuning:
        dl = dressed_lattice(lat, coupling, atom)
        per_time = []
        for t in times:
            ua, ph = lattice_propagators(dl, t)
            un = eig.propagators(t)
            dev = float(np.max(np.abs(ua - un))) if ua.size else 0.0
            dev = max(dev, float(np.max(np.abs(ph - np.exp(-1j * ham.single * t)), initial=0.0)))
            per_time.append(dev)
        report["block_deviation_per_time"] = per_time
        report["block_max_deviation"] = max(per_time)
        e_an = np.sort(np.column_stack([dl.e_plus, dl.e0, dl.e_minus]), axis=1) if lat.triple_blocks.size else np.zeros((0, 3))
        e_num = np.sort(eig.w, axis=1)
        report["spectral_max_deviation"] = float(np.max(np.abs(e_an - e_num), initial=0.0))
        analytic = evolve_many(packet, times, dl)
        report["state_distance_blocks"] = float(np.max(np.linalg.norm(analytic - oracle_states, axis=1)))
        checks += [report["block_max_deviation"] < tol, report["state_distance_blocks"] < tol]
    else:
        analytic = oracle_states
        report["block_max_deviation"] = None
        report["state_distance_blocks"] = None

    if fullspace_times:
        space = FockSpace(packet.n1_cap, packet.n2_cap)
        psi0 = lattice_to_fock(lat, packet.amplitudes, space)
        fs = fullspace_evolve(psi0, fullspace_times, space, coupling, atom)
        idx = [times.index(float(t)) for t in fullspace_times]
        ref = lattice_to_fock(lat, analytic[idx], space)
        report["fullspace_times"] = [float(t) for t in fullspace_times]
        report["state_distance_fullspace"] = float(np.max(np.linalg.norm(ref - fs, axis=1)))
        checks.append(report["state_distance_fullspace"] < tol)
    report["passed"] = bool(all(checks))
    return report
