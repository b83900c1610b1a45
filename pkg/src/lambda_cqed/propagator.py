"""Closed-form block propagators and packet evolution.

``u[i, j]`` follows the convention |chi_i(t)> = sum_j u_ij |chi_j>, so the
coefficients of an evolved packet are G_j = sum_i c_i u_ij.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dressed import DressedBlock, DressedLattice
from .initial_state import PacketState
from .state_space import CHI_PHASE, BlockIndex

__all__ = [
    "LatticeMismatchError",
    "BlockPropagator",
    "block_propagator",
    "propagator_elements",
    "lattice_propagators",
    "evolve",
    "evolve_many",
]


class LatticeMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class BlockPropagator:
    block: BlockIndex
    t: float
    u: np.ndarray


def _sin_over(eps, t):
    """sin(eps t) / eps, finite as eps t -> 0."""
    return t * np.sinc(eps * t / np.pi)


def propagator_elements(g, h, eps, a_plus, a_minus, e0, delta, t) -> np.ndarray:
    """The nine matrix elements for arrays of blocks, stacked as (..., 3, 3).

    ``a_plus``/``a_minus`` are eps +- delta/2, so that the printed
    denominators 2 eps^2 +- delta eps equal 2 eps a_plus and 2 eps a_minus,
    eps^2 - delta^2/4 equals g^2 + h^2, and delta/2 +- eps equal a_plus and
    -a_minus.
    """
    g, h, eps, a_plus, a_minus, e0, t = np.broadcast_arrays(
        *(np.asarray(x, dtype=float) for x in (g, h, eps, a_plus, a_minus, e0, t))
    )
    dark = g * g + h * h
    ph0 = np.exp(-1j * e0 * t)
    # relative phase from the small argument only; e0 * t can be ~1e4 rad
    half = np.exp(-1j * delta / 2.0 * t)
    ph3 = ph0 * half
    ep = np.exp(1j * eps * t)
    em = np.exp(-1j * eps * t)
    den_minus = 2.0 * eps * a_minus
    den_plus = 2.0 * eps * a_plus
    bracket = half * (ep / den_minus + em / den_plus)
    s = _sin_over(eps, t)
    gh = g * h

    u = np.empty(g.shape + (3, 3), dtype=complex)
    u[..., 0, 0] = ph0 * (h * h / dark + g * g * bracket)
    u[..., 0, 1] = ph0 * (-gh / dark + gh * bracket)
    u[..., 0, 2] = ph3 * g * (ep / den_minus * (-a_minus) + em / den_plus * a_plus)
    u[..., 1, 0] = ph0 * (-gh / dark + bracket * gh)
    u[..., 1, 1] = ph0 * (g * g / dark + bracket * h * h)
    u[..., 1, 2] = -1j * ph3 * h * s
    u[..., 2, 0] = -1j * ph3 * g * s
    u[..., 2, 1] = -1j * ph3 * h * s
    u[..., 2, 2] = ph3 * (np.cos(eps * t) - 1j * (delta / 2.0) * s)
    return u


def block_propagator(db: DressedBlock, t: float) -> BlockPropagator:
    if db.degenerate:
        return BlockPropagator(db.block, t, np.array([[np.exp(-1j * db.e0 * t)]]))
    u = propagator_elements(db.g, db.h, db.eps2, db.a_plus, db.a_minus, db.e0, db.delta13, t)
    if t == 0:
        u = np.eye(3, dtype=complex)
    return BlockPropagator(db.block, t, u)


def lattice_propagators(dl: DressedLattice, t) -> tuple[np.ndarray, np.ndarray]:
    """Propagators of all 3-dim blocks and phases of all dark kets.

    ``t`` may be a scalar or a 1-d array of times; array input yields shapes
    (T, B, 3, 3) and (T, S).
    """
    t = np.asarray(t, dtype=float)
    tt = t[..., None]
    u = propagator_elements(dl.g, dl.h, dl.eps2, dl.a_plus, dl.a_minus, dl.e0, dl.delta13, tt)
    # exact identity at t = 0 (the closed forms carry rounding there)
    u[tt[..., 0] == 0] = np.eye(3)
    phases = np.exp(-1j * dl.single_energy * tt)
    return u, phases


def _apply(dl: DressedLattice, chi: np.ndarray, t) -> np.ndarray:
    lat = dl.lattice
    u, phases = lattice_propagators(dl, t)
    out = np.empty(np.shape(t) + chi.shape, dtype=complex)
    s = lat.triple_slots
    if s.size:
        c = chi[s]  # (B, 3)
        out[..., s] = np.einsum("...bij,bi->...bj", u, c)
    out[..., lat.single_slots] = phases * chi[lat.single_slots]
    return out


def _check(packet: PacketState, dl: DressedLattice):
    if not packet.lattice.same(dl.lattice):
        raise LatticeMismatchError(
            f"packet lattice has M0={packet.lattice.M0}, dressed data was built for M0={dl.lattice.M0}"
        )


def evolve(packet: PacketState, t: float, dl: DressedLattice) -> PacketState:
    _check(packet, dl)
    if t == 0:
        return packet.with_amplitudes(packet.amplitudes.copy())
    sign = CHI_PHASE[packet.lattice.k - 1]
    chi = _apply(dl, packet.amplitudes * sign, float(t))
    return packet.with_amplitudes(chi * sign)


def evolve_many(packet: PacketState, times, dl: DressedLattice, chunk: int = 64) -> np.ndarray:
    """Amplitude vectors at every time, shape (T, total_dim)."""
    _check(packet, dl)
    times = np.asarray(times, dtype=float)
    sign = CHI_PHASE[packet.lattice.k - 1]
    chi0 = packet.amplitudes * sign
    out = np.empty((times.size, packet.lattice.total_dim), dtype=complex)
    for lo in range(0, times.size, chunk):
        ts = times[lo : lo + chunk]
        out[lo : lo + ts.size] = _apply(dl, chi0, ts) * sign
    zero = times == 0
    out[zero] = packet.amplitudes
    return out
