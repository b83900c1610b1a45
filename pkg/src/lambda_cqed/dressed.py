"""Dressed states of every block under equal detunings (Delta_13 = Delta_23).

In the chi basis a 3-dimensional block reads

    H = E0 * I + [[0, 0, g], [0, 0, h], [g, h, Delta]],
    g = mu13 sqrt(m1 - m2 + 1),  h = mu23 sqrt(m2),

with E0 = omega1 + Omega1 (m1 - m2 + 1) + Omega2 (m2 - 1).  Its eigenvalues
are E0 (a dark state with no chi_3 component) and E0 + Delta/2 +- eps2,
eps2 = sqrt(Delta^2/4 + g^2 + h^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .atoms import AtomSpec, CouplingConfig
from .state_space import BlockIndex, Lattice

__all__ = [
    "DARK_THRESHOLD",
    "DegenerateBlockError",
    "UnequalDetuningError",
    "DressedBlock",
    "DressedLattice",
    "epsilon2",
    "block_energy_offset",
    "dark_energy",
    "dressed_block",
    "dressed_lattice",
]

DARK_THRESHOLD = 1e-14


class UnequalDetuningError(ValueError):
    """Closed forms exist only for Delta_13 == Delta_23; use the oracle otherwise."""


class DegenerateBlockError(ValueError):
    """Both effective couplings of a 3-dimensional block vanish."""


def epsilon2(m1, m2, delta13, mu13, mu23):
    m1 = np.asarray(m1, dtype=float)
    m2 = np.asarray(m2, dtype=float)
    return np.sqrt((delta13 / 2.0) ** 2 + (m1 - m2 + 1.0) * mu13**2 + m2 * mu23**2)


def block_energy_offset(m1, m2, coupling: CouplingConfig, atom: AtomSpec):
    """E0(m1, m2): the common diagonal shift of a block."""
    m1 = np.asarray(m1, dtype=float)
    m2 = np.asarray(m2, dtype=float)
    return atom.omega1 + coupling.omega_field1 * (m1 - m2 + 1.0) + coupling.omega_field2 * (m2 - 1.0)


def dark_energy(m1, m2, coupling: CouplingConfig, atom: AtomSpec):
    """Energy of the single ket in a 1-dimensional block.

    m2 = 0 holds |m1, 0; 2_A> with energy omega2 + Omega1 m1, and
    m2 = m1 + 1 holds |0, m1; 1_A> with energy omega1 + Omega2 m1.
    """
    m1 = np.asarray(m1, dtype=float)
    m2 = np.asarray(m2)
    return np.where(
        m2 == 0,
        atom.omega2 + coupling.omega_field1 * m1,
        atom.omega1 + coupling.omega_field2 * m1,
    )


def _split_eps(eps, delta, coupling_sq):
    """Return (eps + delta/2, eps - delta/2) without cancellation.

    Their product is g^2 + h^2, so the small member is recovered from it.
    """
    big = eps + abs(delta) / 2.0
    small = coupling_sq / big
    if delta >= 0:
        return big, small
    return small, big


@dataclass(frozen=True)
class DressedBlock:
    block: BlockIndex
    eps2: float
    e0: float
    e_plus: float
    e_minus: float
    o_matrix: np.ndarray
    degenerate: bool
    delta13: float = 0.0
    g: float = 0.0
    h: float = 0.0
    a_plus: float = 0.0
    a_minus: float = 0.0

    @property
    def energies(self) -> np.ndarray:
        if self.degenerate:
            return np.array([self.e0])
        return np.array([self.e_plus, self.e0, self.e_minus])


@dataclass(frozen=True, eq=False)
class DressedLattice:
    """Vectorised dressed data for every block of a lattice.

    Per-block arrays follow ``lattice.triple_blocks``; ``single_energy``
    follows ``lattice.single_blocks``.
    """

    lattice: Lattice
    coupling: CouplingConfig
    atom: AtomSpec
    g: np.ndarray
    h: np.ndarray
    eps2: np.ndarray
    e0: np.ndarray
    a_plus: np.ndarray
    a_minus: np.ndarray
    single_energy: np.ndarray

    @property
    def delta13(self) -> float:
        return self.coupling.delta13

    @property
    def e_plus(self) -> np.ndarray:
        return self.e0 + self.delta13 / 2.0 + self.eps2

    @property
    def e_minus(self) -> np.ndarray:
        return self.e0 + self.delta13 / 2.0 - self.eps2

    def o_matrices(self) -> np.ndarray:
        """Rows (Psi_+, Psi_0, Psi_-) expressed in (chi_1, chi_2, chi_3)."""
        g, h, eps = self.g, self.h, self.eps2
        dark = np.sqrt(g * g + h * h)
        n_plus = np.sqrt(2.0 * eps * self.a_plus)
        n_minus = np.sqrt(2.0 * eps * self.a_minus)
        o = np.zeros(g.shape + (3, 3))
        o[:, 0] = np.stack([g, h, self.a_plus], axis=-1) / n_plus[:, None]
        o[:, 1] = np.stack([-h, g, np.zeros_like(g)], axis=-1) / dark[:, None]
        o[:, 2] = np.stack([g, h, -self.a_minus], axis=-1) / n_minus[:, None]
        return o


def _require_equal(coupling: CouplingConfig):
    if not coupling.equal_detuning:
        raise UnequalDetuningError(
            f"delta13={coupling.delta13} != delta23={coupling.delta23}: "
            "no closed-form dressed states; evaluate with the oracle instead"
        )


def dressed_lattice(lattice: Lattice, coupling: CouplingConfig, atom: AtomSpec) -> DressedLattice:
    _require_equal(coupling)
    m1 = lattice.triple_blocks[:, 0].astype(float)
    m2 = lattice.triple_blocks[:, 1].astype(float)
    g = coupling.mu13 * np.sqrt(m1 - m2 + 1.0)
    h = coupling.mu23 * np.sqrt(m2)
    scale = max(coupling.mu13**2, coupling.mu23**2)
    if g.size and np.any(g * g + h * h <= DARK_THRESHOLD * scale):
        raise DegenerateBlockError("a 3-dimensional block has vanishing couplings; the dark-state normalisation is singular")
    delta = coupling.delta13
    eps = np.sqrt(delta * delta / 4.0 + g * g + h * h)
    a_plus, a_minus = _split_eps(eps, delta, g * g + h * h)
    sb = lattice.single_blocks
    return DressedLattice(
        lattice=lattice,
        coupling=coupling,
        atom=atom,
        g=g,
        h=h,
        eps2=eps,
        e0=block_energy_offset(m1, m2, coupling, atom),
        a_plus=a_plus,
        a_minus=a_minus,
        single_energy=dark_energy(sb[:, 0], sb[:, 1], coupling, atom),
    )


def dressed_block(block: BlockIndex, coupling: CouplingConfig, atom: AtomSpec) -> DressedBlock:
    _require_equal(coupling)
    if block.dim == 1:
        e = float(dark_energy(block.m1, block.m2, coupling, atom))
        return DressedBlock(block, 0.0, e, e, e, np.ones((1, 1)), True, coupling.delta13)
    g = coupling.mu13 * np.sqrt(block.m1 - block.m2 + 1.0)
    h = coupling.mu23 * np.sqrt(float(block.m2))
    if g * g + h * h <= DARK_THRESHOLD * max(coupling.mu13**2, coupling.mu23**2):
        raise DegenerateBlockError(f"block ({block.m1}, {block.m2}) is decoupled")
    delta = coupling.delta13
    eps = float(np.sqrt(delta * delta / 4.0 + g * g + h * h))
    a_plus, a_minus = _split_eps(eps, delta, g * g + h * h)
    e0 = float(block_energy_offset(block.m1, block.m2, coupling, atom))
    o = np.array(
        [
            np.array([g, h, a_plus]) / np.sqrt(2.0 * eps * a_plus),
            np.array([-h, g, 0.0]) / np.sqrt(g * g + h * h),
            np.array([g, h, -a_minus]) / np.sqrt(2.0 * eps * a_minus),
        ]
    )
    return DressedBlock(
        block=block,
        eps2=eps,
        e0=e0,
        e_plus=e0 + delta / 2.0 + eps,
        e_minus=e0 + delta / 2.0 - eps,
        o_matrix=o,
        degenerate=False,
        delta13=delta,
        g=float(g),
        h=float(h),
        a_plus=float(a_plus),
        a_minus=float(a_minus),
    )
