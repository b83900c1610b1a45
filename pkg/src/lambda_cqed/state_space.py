"""Truncated Hilbert-space lattice labelled by the two excitation numbers.

The operators M1 = n1 + n2 + A33 and M2 = n2 + A11 + A33 commute with the
Hamiltonian, so the space splits into blocks (m1, m2).  Inside a block the
three basis kets are

    chi_1 = |m1 - m2 + 1, m2 - 1; 1_A>
    chi_2 = |m1 - m2,     m2;     2_A>
    chi_3 = |m1 - m2,     m2 - 1; 3_A>

and a ket is only present when both photon numbers are non-negative.  Blocks
with m2 = 0 or m2 = m1 + 1 therefore hold a single (dark) ket.

Amplitudes are always stored against the Fock kets |n1, n2; k_A>.  The block
matrices used for the dynamics are written in a chi basis whose third ket
carries an extra sign (``CHI_PHASE``); with that phase the dipole term
``-mu (a^dag A + a A^dag)`` of the Hamiltonian produces positive
off-diagonal couplings in every 3x3 block.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CHI_PHASE",
    "BlockIndex",
    "InvalidLevelError",
    "Lattice",
    "build_lattice",
    "chi_to_fock",
    "fock_to_block",
    "lattice_dimension",
]

# chi_k = CHI_PHASE[k-1] * |Fock label of chi_k>
CHI_PHASE = np.array([1.0, 1.0, -1.0])


class InvalidLevelError(ValueError):
    """Requested atomic level has no ket in the given block."""


@dataclass(frozen=True, order=True)
class BlockIndex:
    m1: int
    m2: int

    def __post_init__(self):
        if self.m1 < 0 or self.m2 < 0 or self.m2 > self.m1 + 1:
            raise ValueError(f"invalid block (m1={self.m1}, m2={self.m2})")

    @property
    def levels(self) -> tuple[int, ...]:
        if self.m2 == 0:
            return (2,)
        if self.m2 == self.m1 + 1:
            return (1,)
        return (1, 2, 3)

    @property
    def dim(self) -> int:
        return len(self.levels)


def chi_to_fock(block: BlockIndex, k: int) -> tuple[int, int, int]:
    """Photon numbers ``(n1, n2, k)`` of the ket chi_k in ``block``."""
    if k not in block.levels:
        raise InvalidLevelError(f"level {k} is not present in block ({block.m1}, {block.m2})")
    m1, m2 = block.m1, block.m2
    if k == 1:
        return m1 - m2 + 1, m2 - 1, 1
    if k == 2:
        return m1 - m2, m2, 2
    return m1 - m2, m2 - 1, 3


def fock_to_block(n1: int, n2: int, k: int) -> tuple[BlockIndex, int]:
    if n1 < 0 or n2 < 0 or k not in (1, 2, 3):
        raise ValueError(f"invalid Fock label ({n1}, {n2}; {k})")
    m1 = n1 + n2 + (k == 3)
    m2 = n2 + (k == 1) + (k == 3)
    return BlockIndex(m1, m2), k


def lattice_dimension(M0: int) -> int:
    return (M0 + 1) * (3 * M0 + 4) // 2


def _frozen(a) -> np.ndarray:
    a = np.asarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Lattice:
    """All kets with m1 <= M0 in canonical (m1, m2, k) order.

    Besides the block list, flat per-slot label arrays are kept so that
    amplitude vectors of shape ``(..., total_dim)`` can be reduced with numpy.
    ``triple_slots`` holds the flat indices of the chi_1, chi_2, chi_3 kets of
    every 3-dimensional block, ``single_slots`` the index of every dark ket.
    """

    M0: int
    blocks: tuple[BlockIndex, ...]
    m1: np.ndarray
    m2: np.ndarray
    k: np.ndarray
    n1: np.ndarray
    n2: np.ndarray
    triple_blocks: np.ndarray
    triple_slots: np.ndarray
    single_blocks: np.ndarray
    single_slots: np.ndarray
    _lookup: dict = field(repr=False)

    @property
    def total_dim(self) -> int:
        return int(self.k.size)

    def index(self, m1: int, m2: int, k: int) -> int:
        try:
            return self._lookup[(m1, m2, k)]
        except KeyError:
            raise InvalidLevelError(f"no slot ({m1}, {m2}, {k}) in lattice with M0={self.M0}") from None

    def fock_index(self, n1: int, n2: int, k: int) -> int:
        b, k = fock_to_block(n1, n2, k)
        return self.index(b.m1, b.m2, k)

    def has(self, m1: int, m2: int, k: int) -> bool:
        return (m1, m2, k) in self._lookup

    def partner_indices(self, k1: int, k2: int) -> tuple[np.ndarray, np.ndarray]:
        """Pairs of slots (level k1, level k2) that share the same photon numbers."""
        src = np.flatnonzero(self.k == k1)
        a, b = [], []
        for i in src:
            n1, n2 = int(self.n1[i]), int(self.n2[i])
            j = self._lookup.get((n1 + n2 + (k2 == 3), n2 + (k2 in (1, 3)), k2))
            if j is not None:
                a.append(i)
                b.append(j)
        return np.asarray(a, dtype=np.intp), np.asarray(b, dtype=np.intp)

    def same(self, other: "Lattice") -> bool:
        return self is other or self.M0 == other.M0


def build_lattice(M0: int) -> Lattice:
    if M0 < 0:
        raise ValueError("M0 must be non-negative")
    blocks = []
    m1s, m2s, ks, n1s, n2s = [], [], [], [], []
    triple_b, triple_s, single_b, single_s = [], [], [], []
    lookup = {}
    for m1 in range(M0 + 1):
        for m2 in range(m1 + 2):
            b = BlockIndex(m1, m2)
            blocks.append(b)
            first = len(ks)
            for k in b.levels:
                n1, n2, _ = chi_to_fock(b, k)
                lookup[(m1, m2, k)] = len(ks)
                m1s.append(m1)
                m2s.append(m2)
                ks.append(k)
                n1s.append(n1)
                n2s.append(n2)
            if b.dim == 3:
                triple_b.append((m1, m2))
                triple_s.append((first, first + 1, first + 2))
            else:
                single_b.append((m1, m2))
                single_s.append(first)
    ints = lambda v: _frozen(np.asarray(v, dtype=np.int64))  # noqa: E731
    return Lattice(
        M0=M0,
        blocks=tuple(blocks),
        m1=ints(m1s),
        m2=ints(m2s),
        k=ints(ks),
        n1=ints(n1s),
        n2=ints(n2s),
        triple_blocks=ints(triple_b).reshape(-1, 2),
        triple_slots=_frozen(np.asarray(triple_s, dtype=np.intp).reshape(-1, 3)),
        single_blocks=ints(single_b).reshape(-1, 2),
        single_slots=_frozen(np.asarray(single_s, dtype=np.intp)),
        _lookup=lookup,
    )
