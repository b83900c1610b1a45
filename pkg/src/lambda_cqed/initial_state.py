"""Separable initial packets |alpha1, alpha2> x (gamma_1 |1> + gamma_2 |2> + gamma_3 |3>)."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.special import gammaln

from .atoms import AtomSpec, CouplingConfig
from .state_space import CHI_PHASE, Lattice, build_lattice, lattice_dimension

__all__ = [
    "CapacityError",
    "FieldAmplitudes",
    "AtomAmplitudes",
    "PacketState",
    "Conserved",
    "normalize_gamma",
    "truncation_level",
    "build_packet",
    "conserved_expectations",
    "conserved_series",
    "closed_form_expectations",
    "DEFAULT_TAIL_TOL",
    "MAX_LATTICE_DIM",
]

DEFAULT_TAIL_TOL = 1e-12
MAX_LATTICE_DIM = 2_000_000


class CapacityError(MemoryError):
    pass


@dataclass(frozen=True)
class FieldAmplitudes:
    alpha1: complex
    alpha2: complex

    @classmethod
    def from_mean_photons(cls, nbar1: float, nbar2: float, phase1: float = 0.0, phase2: float = 0.0):
        if nbar1 < 0 or nbar2 < 0:
            raise ValueError("mean photon numbers must be non-negative")
        return cls(cmath.rect(math.sqrt(nbar1), phase1), cmath.rect(math.sqrt(nbar2), phase2))

    @property
    def nbar1(self) -> float:
        return abs(self.alpha1) ** 2

    @property
    def nbar2(self) -> float:
        return abs(self.alpha2) ** 2


@dataclass(frozen=True)
class AtomAmplitudes:
    gamma: tuple[complex, complex, complex]

    def __post_init__(self):
        if abs(sum(abs(g) ** 2 for g in self.gamma) - 1.0) > 1e-14:
            raise ValueError("atomic amplitudes must be normalised")

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.gamma, dtype=complex)

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.vector) ** 2


def normalize_gamma(zetas, thetas=(0.0, 0.0, 0.0)) -> AtomAmplitudes:
    z = np.asarray(zetas, dtype=float)
    th = np.asarray(thetas, dtype=float)
    if z.shape != (3,) or th.shape != (3,):
        raise ValueError("need three moduli and three phases")
    if np.any(z < 0):
        raise ValueError("moduli must be non-negative")
    norm = math.sqrt(float(np.sum(z * z)))
    if norm == 0.0:
        raise ValueError("at least one atomic modulus must be non-zero")
    g = z * np.exp(1j * th) / norm
    # renormalise once more so the 1e-14 invariant holds after the complex products
    g = g / np.sqrt(np.sum(np.abs(g) ** 2))
    return AtomAmplitudes(tuple(complex(x) for x in g))


def truncation_level(nbar: float, tail_tol: float) -> int:
    """Smallest photon cutoff whose Poisson tail probability is below ``tail_tol``."""
    if nbar < 0:
        raise ValueError("nbar must be non-negative")
    if not 0.0 < tail_tol < 1.0:
        raise ValueError("tail_tol must lie in (0, 1)")
    if nbar == 0:
        return 0
    nu = max(int(nbar), 0)
    # sf(nu) = P(n > nu); decreasing in nu
    while stats.poisson.sf(nu, nbar) >= tail_tol:
        nu += 1
    while nu > 0 and stats.poisson.sf(nu - 1, nbar) < tail_tol:
        nu -= 1
    return nu


@dataclass(frozen=True, eq=False)
class PacketState:
    """Amplitudes on every lattice slot, indexed like the lattice label arrays.

    ``n1_cap``/``n2_cap`` bound the photon numbers reachable from the occupied
    blocks; field reductions only need that window.
    """

    lattice: Lattice
    amplitudes: np.ndarray
    tail_mass: float = 0.0
    n1_cap: int = -1
    n2_cap: int = -1
    meta: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.shape != (self.lattice.total_dim,):
            raise ValueError(f"amplitude vector has shape {a.shape}, lattice needs ({self.lattice.total_dim},)")
        object.__setattr__(self, "amplitudes", a)
        if self.n1_cap < 0 or self.n2_cap < 0:
            n1c, n2c = reachable_caps(self.lattice, a)
            object.__setattr__(self, "n1_cap", n1c)
            object.__setattr__(self, "n2_cap", n2c)

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def with_amplitudes(self, amplitudes) -> "PacketState":
        return PacketState(self.lattice, amplitudes, self.tail_mass, self.n1_cap, self.n2_cap, self.meta)

    def chi_amplitudes(self) -> np.ndarray:
        return self.amplitudes * CHI_PHASE[self.lattice.k - 1]


def reachable_caps(lattice: Lattice, amplitudes: np.ndarray) -> tuple[int, int]:
    """Largest n1, n2 over every slot of every block holding amplitude."""
    occupied = np.abs(amplitudes) > 0
    if not occupied.any():
        return 0, 0
    key = lattice.m1 * (lattice.M0 + 2) + lattice.m2
    live = np.isin(key, np.unique(key[occupied]))
    return int(lattice.n1[live].max()), int(lattice.n2[live].max())


def build_packet(
    field: FieldAmplitudes,
    atom: AtomAmplitudes,
    tail_tol: float = DEFAULT_TAIL_TOL,
    max_dim: int = MAX_LATTICE_DIM,
) -> PacketState:
    nu1 = truncation_level(field.nbar1, tail_tol)
    nu2 = truncation_level(field.nbar2, tail_tol)
    M0 = nu1 + nu2 + 1
    if lattice_dimension(M0) > max_dim:
        raise CapacityError(
            f"tail_tol={tail_tol} needs M0={M0} ({lattice_dimension(M0)} slots), above the budget of {max_dim}"
        )
    lattice = build_lattice(M0)
    n1, n2 = lattice.n1, lattice.n2
    inside = (n1 <= nu1) & (n2 <= nu2)
    amps = np.zeros(lattice.total_dim, dtype=complex)
    log_norm = -(field.nbar1 + field.nbar2) / 2.0 - 0.5 * (gammaln(n1 + 1.0) + gammaln(n2 + 1.0))
    with np.errstate(divide="ignore"):
        mod = np.exp(
            log_norm
            + _xlogy(n1, abs(field.alpha1))
            + _xlogy(n2, abs(field.alpha2))
        )
    phase = np.exp(1j * (n1 * cmath.phase(field.alpha1) + n2 * cmath.phase(field.alpha2)))
    gam = atom.vector[lattice.k - 1]
    amps[inside] = (mod * phase * gam)[inside]
    weight = float(np.sum(np.abs(amps) ** 2))
    # from the Poisson tails directly; 1 - weight loses everything below eps
    s1 = float(stats.poisson.sf(nu1, field.nbar1)) if field.nbar1 > 0 else 0.0
    s2 = float(stats.poisson.sf(nu2, field.nbar2)) if field.nbar2 > 0 else 0.0
    tail = s1 + s2 - s1 * s2
    amps /= math.sqrt(weight)
    return PacketState(
        lattice,
        amps,
        tail_mass=tail,
        meta={"nu1": nu1, "nu2": nu2, "field": field, "atom": atom, "tail_tol": tail_tol},
    )


def _xlogy(n, x):
    """n * log(x) with 0 * log(0) = 0."""
    n = np.asarray(n, dtype=float)
    if x == 0:
        return np.where(n == 0, 0.0, -np.inf)
    return n * math.log(x)


@dataclass(frozen=True)
class Conserved:
    energy: float
    m1: float
    m2: float


def conserved_expectations(packet: PacketState, coupling: CouplingConfig, atom: AtomSpec) -> Conserved:
    """<H>, <M1>, <M2> summed block by block from the amplitudes (any time)."""
    e, m1, m2 = conserved_series(packet.lattice, packet.amplitudes, coupling, atom)
    return Conserved(energy=float(e), m1=float(m1), m2=float(m2))


def conserved_series(lat: Lattice, amps, coupling: CouplingConfig, atom: AtomSpec):
    """Arrays of <H>, <M1>, <M2> for amplitude stacks of shape (..., total_dim)."""
    a = np.asarray(amps)
    p = np.abs(a) ** 2
    # diagonal: bare atomic + photon energy of every Fock ket
    omegas = np.array(atom.omegas)
    diag = omegas[lat.k - 1] + coupling.omega_field1 * lat.n1 + coupling.omega_field2 * lat.n2
    energy = p @ diag
    if lat.triple_slots.size:
        s = lat.triple_slots
        chi = a * CHI_PHASE[lat.k - 1]
        m1 = lat.triple_blocks[:, 0].astype(float)
        m2 = lat.triple_blocks[:, 1].astype(float)
        g = coupling.mu13 * np.sqrt(m1 - m2 + 1.0)
        h = coupling.mu23 * np.sqrt(m2)
        c1, c2, c3 = chi[..., s[:, 0]], chi[..., s[:, 1]], chi[..., s[:, 2]]
        energy = energy + np.sum(2.0 * np.real(g * np.conj(c1) * c3 + h * np.conj(c2) * c3), axis=-1)
    return energy, p @ lat.m1.astype(float), p @ lat.m2.astype(float)


def closed_form_expectations(
    field: FieldAmplitudes, atom_amps: AtomAmplitudes, coupling: CouplingConfig, atom: AtomSpec
) -> Conserved:
    g = atom_amps.vector
    a1, a2 = field.alpha1, field.alpha2
    pop = np.abs(g) ** 2
    energy = float(np.dot(atom.omegas, pop)) + coupling.omega_field1 * field.nbar1 + coupling.omega_field2 * field.nbar2
    energy -= coupling.mu13 * (np.conj(a1) * np.conj(g[0]) * g[2] + a1 * g[0] * np.conj(g[2])).real
    energy -= coupling.mu23 * (np.conj(a2) * np.conj(g[1]) * g[2] + a2 * g[1] * np.conj(g[2])).real
    return Conserved(
        energy=float(energy),
        m1=field.nbar1 + field.nbar2 + pop[2],
        m2=field.nbar2 + pop[0] + pop[2],
    )
