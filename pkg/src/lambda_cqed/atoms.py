"""Atomic data and conversion of laboratory settings to model parameters.

Everything downstream is dimensionless: frequencies in units of the upper
level frequency omega_3 and times in units of 1/omega_3 (hbar = 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "AtomSpec",
    "CouplingConfig",
    "UnknownAtomError",
    "BUILTIN_ATOMS",
    "builtin_atom",
    "rabi_from_intensity",
    "intensity_from_rabi",
    "detuning_from_multiple",
]


class UnknownAtomError(KeyError):
    pass


@dataclass(frozen=True)
class AtomSpec:
    label: str
    omega1: float
    omega2: float
    gamma_bar: float
    time_unit_ns: float
    omega3: float = 1.0

    def __post_init__(self):
        if self.omega3 != 1.0:
            raise ValueError("frequencies are expressed in units of omega3, so omega3 must be 1")
        if not self.omega1 < self.omega2 < self.omega3:
            raise ValueError(
                f"level ordering omega1 < omega2 < omega3 violated: "
                f"({self.omega1}, {self.omega2}, {self.omega3})"
            )
        if self.gamma_bar <= 0:
            raise ValueError("gamma_bar must be positive")
        if self.time_unit_ns <= 0:
            raise ValueError("time_unit_ns must be positive")

    @property
    def omegas(self) -> tuple[float, float, float]:
        return (self.omega1, self.omega2, self.omega3)


# D1-line three-level reductions, frequencies in units of omega_3.
BUILTIN_ATOMS = {
    "li6": AtomSpec("li6", omega1=0.0, omega2=1.0 / 3.0, gamma_bar=0.0257, time_unit_ns=0.698),
    "rb87": AtomSpec("rb87", omega1=0.0, omega2=0.375, gamma_bar=8.407e-4, time_unit_ns=2.093),
}


def builtin_atom(name: str) -> AtomSpec:
    try:
        return BUILTIN_ATOMS[name.lower()]
    except KeyError:
        raise UnknownAtomError(f"unknown atom {name!r}; known: {sorted(BUILTIN_ATOMS)}") from None


def rabi_from_intensity(gamma_bar: float, intensity_ratio: float) -> float:
    """Rabi frequency ``gamma * sqrt(I / (2 I_sat))`` for ``intensity_ratio = I / I_sat``."""
    if intensity_ratio < 0:
        raise ValueError("intensity ratio must be non-negative")
    return gamma_bar * math.sqrt(intensity_ratio / 2.0)


def intensity_from_rabi(gamma_bar: float, mu: float) -> float:
    return 2.0 * (mu / gamma_bar) ** 2


def detuning_from_multiple(gamma_bar: float, n: float) -> float:
    return n * gamma_bar


@dataclass(frozen=True)
class CouplingConfig:
    """Dipole couplings, detunings and the cavity mode frequencies they imply.

    The mode frequencies follow from omega_31 = Omega_1 + Delta_13 and
    omega_32 = Omega_2 + Delta_23.
    """

    mu13: float
    mu23: float
    delta13: float
    delta23: float
    omega_field1: float
    omega_field2: float

    def __post_init__(self):
        if self.mu13 < 0 or self.mu23 < 0:
            raise ValueError("Rabi frequencies must be non-negative")

    @classmethod
    def from_atom(
        cls,
        atom: AtomSpec,
        mu13: float,
        mu23: float,
        delta13: float,
        delta23: float | None = None,
    ) -> "CouplingConfig":
        if delta23 is None:
            delta23 = delta13
        return cls(
            mu13=mu13,
            mu23=mu23,
            delta13=delta13,
            delta23=delta23,
            omega_field1=(atom.omega3 - atom.omega1) - delta13,
            omega_field2=(atom.omega3 - atom.omega2) - delta23,
        )

    @property
    def equal_detuning(self) -> bool:
        return self.delta13 == self.delta23
