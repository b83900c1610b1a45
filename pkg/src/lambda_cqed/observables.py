"""Matter and field observables of a packet.

Most functions accept either a :class:`PacketState` or, through the
``*_from_amplitudes`` variants, a stack of amplitude vectors of shape
``(..., total_dim)`` so that whole time series are reduced in one pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .initial_state import AtomAmplitudes, FieldAmplitudes, PacketState
from .state_space import Lattice

__all__ = [
    "VacuumModeError",
    "AtomicDensity",
    "FieldDensity",
    "PhaseGrid",
    "GridSpec",
    "ExcitationDistributions",
    "DarkStateProbabilities",
    "atomic_rdm",
    "atomic_rdm_from_amplitudes",
    "occupation_fluctuation",
    "coherence",
    "fock_grid",
    "field_rdm",
    "mode_rdm",
    "mode_rdms_from_grid",
    "mean_photons",
    "mandel_q",
    "default_grid",
    "husimi",
    "second_moment",
    "second_moment_grid",
    "phase_area",
    "autocorrelation",
    "excitation_distributions",
    "joint_probability_closed_form",
    "marginal_m1_closed_form",
    "marginal_m2_closed_form",
    "dark_slots",
    "dark_state_probabilities",
    "dark_state_closed_form",
]


class VacuumModeError(ValueError):
    """Mandel parameter requested for a mode with no photons."""


# --------------------------------------------------------------------------
# atom


@dataclass(frozen=True)
class AtomicDensity:
    rho: np.ndarray

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.diagonal(self.rho, axis1=-2, axis2=-1))

    @property
    def chi12(self):
        return self.rho[..., 0, 1]

    @property
    def chi13(self):
        return self.rho[..., 0, 2]

    @property
    def chi23(self):
        return self.rho[..., 1, 2]


@lru_cache(maxsize=16)
def _partners(lattice: Lattice):
    return {(k1, k2): lattice.partner_indices(k1, k2) for k1 in (1, 2, 3) for k2 in (1, 2, 3)}


def atomic_rdm_from_amplitudes(lattice: Lattice, amps: np.ndarray) -> np.ndarray:
    """rho_{k1 k2} = sum over blocks of G_{k1}(m1, m2) G*_{k2}(shifted block).

    The partner of slot (m1, m2, k1) is the level-k2 slot carrying the same
    photon numbers, i.e. (m1 - d(k1,3) + d(k2,3), m2 - d(k1,1) - d(k1,3)
    + d(k2,1) + d(k2,3)).
    """
    amps = np.asarray(amps)
    rho = np.zeros(amps.shape[:-1] + (3, 3), dtype=complex)
    for (k1, k2), (i, j) in _partners(lattice).items():
        if k2 < k1:
            continue
        val = np.sum(amps[..., i] * np.conj(amps[..., j]), axis=-1)
        rho[..., k1 - 1, k2 - 1] = val
        if k1 != k2:
            rho[..., k2 - 1, k1 - 1] = np.conj(val)
        else:
            rho[..., k1 - 1, k1 - 1] = val.real
    return rho


def atomic_rdm(packet: PacketState) -> AtomicDensity:
    return AtomicDensity(atomic_rdm_from_amplitudes(packet.lattice, packet.amplitudes))


def occupation_fluctuation(p):
    p = np.asarray(p, dtype=float)
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise ValueError("probability outside [0, 1]")
    out = p * (1.0 - p)
    return float(out) if out.ndim == 0 else out


def coherence(rho_a) -> float | np.ndarray:
    rho = rho_a.rho if isinstance(rho_a, AtomicDensity) else np.asarray(rho_a)
    return 2.0 * (np.abs(rho[..., 0, 1]) + np.abs(rho[..., 0, 2]) + np.abs(rho[..., 1, 2]))


# --------------------------------------------------------------------------
# field


@dataclass(frozen=True)
class FieldDensity:
    """Two-mode density over Fock pairs; row index is n1 * dims[1] + n2."""

    rho: np.ndarray
    dims: tuple[int, int]


def fock_grid(lattice: Lattice, amps: np.ndarray, n1_cap: int, n2_cap: int) -> np.ndarray:
    """Amplitudes rearranged as psi[..., n1, n2, k-1]."""
    amps = np.asarray(amps)
    sel = (lattice.n1 <= n1_cap) & (lattice.n2 <= n2_cap)
    grid = np.zeros(amps.shape[:-1] + (n1_cap + 1, n2_cap + 1, 3), dtype=complex)
    grid[..., lattice.n1[sel], lattice.n2[sel], lattice.k[sel] - 1] = amps[..., sel]
    return grid


def _packet_grid(packet: PacketState) -> np.ndarray:
    return fock_grid(packet.lattice, packet.amplitudes, packet.n1_cap, packet.n2_cap)


def field_rdm(packet: PacketState) -> FieldDensity:
    grid = _packet_grid(packet)
    n1, n2 = grid.shape[0], grid.shape[1]
    psi = grid.reshape(n1 * n2, 3)
    return FieldDensity(psi @ psi.conj().T, (n1, n2))


def mode_rdm(fd: FieldDensity, mode: int) -> np.ndarray:
    d1, d2 = fd.dims
    r = fd.rho.reshape(d1, d2, d1, d2)
    if mode == 1:
        return np.einsum("ajbj->ab", r)
    if mode == 2:
        return np.einsum("jajb->ab", r)
    raise ValueError("mode must be 1 or 2")


def mode_rdms_from_grid(grid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    rho1 = np.einsum("...abk,...cbk->...ac", grid, np.conj(grid))
    rho2 = np.einsum("...abk,...ack->...bc", grid, np.conj(grid))
    return rho1, rho2


def mean_photons(rho_mode) -> tuple[np.ndarray, np.ndarray]:
    """(<n>, <n^2>) of single-mode densities (stack allowed)."""
    p = np.real(np.diagonal(rho_mode, axis1=-2, axis2=-1))
    n = np.arange(p.shape[-1], dtype=float)
    return p @ n, p @ (n * n)


def mandel_q(rho_mode, vacuum_tol: float = 1e-12):
    mean, second = mean_photons(rho_mode)
    if np.any(mean < vacuum_tol):
        raise VacuumModeError("mode is (numerically) in vacuum; Mandel parameter undefined")
    q = (second - mean * mean) / mean - 1.0
    return float(q) if np.ndim(q) == 0 else q


# --------------------------------------------------------------------------
# phase space


@dataclass(frozen=True)
class GridSpec:
    half_width: float
    step: float = 0.05

    @property
    def axis(self) -> np.ndarray:
        n = int(round(self.half_width / self.step))
        return np.arange(-n, n + 1) * self.step


@dataclass(frozen=True)
class PhaseGrid:
    x: np.ndarray
    y: np.ndarray
    q: np.ndarray  # q[iy, ix]

    @property
    def step(self) -> float:
        return float(self.x[1] - self.x[0])

    def integral(self) -> float:
        return float(self.q.sum() * self.step**2)

    def to_text(self) -> str:
        xx, yy = np.meshgrid(self.x, self.y)
        rows = np.column_stack([xx.ravel(), yy.ravel(), self.q.ravel()])
        return "\n".join(f"{a:.6f},{b:.6f},{c:.17g}" for a, b, c in rows) + "\n"


def default_grid(nbar_max: float, step: float = 0.05) -> GridSpec:
    return GridSpec(math.sqrt(max(nbar_max, 0.0)) + 4.0, step)


def husimi(rho_mode, spec: GridSpec) -> PhaseGrid:
    """Q(X + iY) = <beta| rho |beta> / pi evaluated on a square grid."""
    rho = np.asarray(rho_mode)
    n = rho.shape[-1]
    axis = spec.axis
    xx, yy = np.meshgrid(axis, axis)
    beta = (xx + 1j * yy).ravel()
    r2 = np.abs(beta) ** 2
    nu = np.arange(n)
    # log-domain coherent-state overlaps <nu|beta> = e^{-|b|^2/2} b^nu / sqrt(nu!)
    log_r = 0.5 * np.log(np.where(r2 > 0, r2, 1.0))
    log_mod = -0.5 * r2[:, None] + nu[None, :] * log_r[:, None] - 0.5 * gammaln(nu + 1.0)
    # at the origin only the vacuum component survives
    log_mod[(r2 == 0), 1:] = -np.inf
    v = np.exp(log_mod) * np.exp(1j * nu[None, :] * np.angle(beta)[:, None])
    q = np.real(np.einsum("gi,ij,gj->g", np.conj(v), rho, v)) / math.pi
    return PhaseGrid(axis, axis, q.reshape(xx.shape))


@lru_cache(maxsize=8)
def _binomial_weights(n: int):
    out = []
    for a in range(2 * n - 1):
        lo, hi = max(0, a - n + 1), min(a, n - 1)
        nu = np.arange(lo, hi + 1)
        logw = 0.5 * (gammaln(a + 1.0) - gammaln(nu + 1.0) - gammaln(a - nu + 1.0) - a * math.log(2.0))
        out.append((lo, hi, np.exp(logw)))
    return out


def second_moment(rho_mode):
    """2 pi * integral of Q^2, evaluated exactly in the Fock basis.

    Uses  integral e^{-2|b|^2} b*^a b^c d^2b = pi delta_{ac} a! / 2^(a+1).
    Grouping the factorials, the double sum becomes
    sum_a sum_{nu, mu} w_a(nu) w_a(mu) rho[nu, mu] rho[a - nu, a - mu]
    with w_a(nu) = sqrt(C(a, nu) / 2^a) <= 1.  The factor 2 pi (instead of
    pi) gives a coherent state the value 1.
    """
    rho = np.asarray(rho_mode)
    n = rho.shape[-1]
    total = np.zeros(rho.shape[:-2])
    for lo, hi, w in _binomial_weights(n):
        sub = rho[..., lo : hi + 1, lo : hi + 1]
        prod = sub * sub[..., ::-1, ::-1]
        total = total + np.real(np.einsum("i,...ij,j->...", w, prod, w))
    return total


def second_moment_grid(grid: PhaseGrid) -> float:
    return float(2.0 * math.pi * np.sum(grid.q**2) * grid.step**2)


def phase_area(rho_mode):
    return 1.0 / second_moment(rho_mode)


# --------------------------------------------------------------------------
# packet-level probabilities


def autocorrelation(packet0: PacketState, packet_t: PacketState) -> float:
    if not packet0.lattice.same(packet_t.lattice):
        raise ValueError("packets live on different lattices")
    return float(abs(np.vdot(packet0.amplitudes, packet_t.amplitudes)) ** 2)


@dataclass(frozen=True)
class ExcitationDistributions:
    joint: np.ndarray  # joint[m1, m2]
    m1: np.ndarray
    m2: np.ndarray


def excitation_distributions(packet: PacketState) -> ExcitationDistributions:
    lat = packet.lattice
    joint = np.zeros((lat.M0 + 1, lat.M0 + 2))
    np.add.at(joint, (lat.m1, lat.m2), np.abs(packet.amplitudes) ** 2)
    return ExcitationDistributions(joint, joint.sum(axis=1), joint.sum(axis=0))


def _pow_over_fact(x: float, k):
    """x^k / k! elementwise, zero for negative k."""
    k = np.asarray(k, dtype=float)
    safe = np.where(k >= 0, k, 0.0)
    if x == 0:
        val = np.where(safe == 0, 1.0, 0.0)
    else:
        val = np.exp(safe * math.log(x) - gammaln(safe + 1.0))
    return np.where(k >= 0, val, 0.0)


def joint_probability_closed_form(field: FieldAmplitudes, atom: AtomAmplitudes, m1, m2):
    """P(m1, m2) of a coherent-product packet (independent of time)."""
    x1, x2 = field.nbar1, field.nbar2
    p1, p2, p3 = atom.populations
    m1 = np.asarray(m1, dtype=float)
    m2 = np.asarray(m2, dtype=float)
    d = m1 - m2
    pref = math.exp(-x1 - x2)
    denom = np.exp(gammaln(d + 2.0) + gammaln(m2 + 1.0))
    # x1^(m1-m2) x2^(m2-1) times each bracket term, exponents merged so x = 0 is safe
    t1 = m2 * p1 * _xpow(x1, d + 1) * _xpow(x2, m2 - 1)
    t2 = (d + 1) * p2 * _xpow(x1, d) * _xpow(x2, m2)
    t3 = m2 * (d + 1) * p3 * _xpow(x1, d) * _xpow(x2, m2 - 1)
    valid = (m1 >= 0) & (m2 >= 0) & (d >= -1)
    return np.where(valid, pref * (t1 + t2 + t3) / denom, 0.0)


def _xpow(x: float, k):
    k = np.asarray(k, dtype=float)
    if x == 0:
        return np.where(k == 0, 1.0, 0.0)
    return np.where(k >= 0, x ** np.where(k >= 0, k, 0.0), x**k)


def marginal_m1_closed_form(field: FieldAmplitudes, atom: AtomAmplitudes, m1):
    s = field.nbar1 + field.nbar2
    p1, p2, p3 = atom.populations
    return math.exp(-s) * (_pow_over_fact(s, m1) * (p1 + p2) + _pow_over_fact(s, np.asarray(m1) - 1) * p3)


def marginal_m2_closed_form(field: FieldAmplitudes, atom: AtomAmplitudes, m2):
    x2 = field.nbar2
    p1, p2, p3 = atom.populations
    return math.exp(-x2) * (_pow_over_fact(x2, m2) * p2 + _pow_over_fact(x2, np.asarray(m2) - 1) * (p1 + p3))


@dataclass(frozen=True)
class DarkStateProbabilities:
    pd1: np.ndarray  # pd1[n] = |<0, n; 1_A|psi>|^2
    pd2: np.ndarray  # pd2[n] = |<n, 0; 2_A|psi>|^2
    total1: float
    total2: float


def dark_slots(lattice: Lattice):
    n = np.arange(lattice.M0 + 1)
    d1 = np.array([lattice.index(i, i + 1, 1) for i in n], dtype=np.intp)
    d2 = np.array([lattice.index(i, 0, 2) for i in n], dtype=np.intp)
    return d1, d2


def dark_state_probabilities(packet: PacketState) -> DarkStateProbabilities:
    d1, d2 = dark_slots(packet.lattice)
    p = np.abs(packet.amplitudes) ** 2
    pd1, pd2 = p[d1], p[d2]
    return DarkStateProbabilities(pd1, pd2, float(pd1.sum()), float(pd2.sum()))


def dark_state_closed_form(field: FieldAmplitudes, atom: AtomAmplitudes, n):
    p1, p2, _ = atom.populations
    x1, x2 = field.nbar1, field.nbar2
    pd1 = math.exp(-x1) * p1 * math.exp(-x2) * _pow_over_fact(x2, n)
    pd2 = math.exp(-x2) * p2 * math.exp(-x1) * _pow_over_fact(x1, n)
    return pd1, pd2
