"""Entropies, mutual information and the partial-transpose test.

All entropies use the natural logarithm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .jacobi import jacobi_eigh

__all__ = [
    "CLAMP_TOL",
    "TRACE_TOL",
    "SpectrumResult",
    "spectrum",
    "linear_entropy",
    "von_neumann_entropy",
    "entropy_from_eigenvalues",
    "mutual_information",
    "partial_transpose",
    "partial_transpose_min_eigenvalue",
    "araki_lieb",
]

CLAMP_TOL = 1e-10
TRACE_TOL = 1e-8


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray
    residual: float


def spectrum(rho) -> SpectrumResult:
    rho = np.asarray(rho)
    w, v = jacobi_eigh(rho)
    residual = float(np.max(np.abs(rho @ v - v * w[..., None, :]))) if rho.size else 0.0
    return SpectrumResult(w, residual)


def _check_trace(rho):
    tr = np.real(np.trace(rho, axis1=-2, axis2=-1))
    if np.any(np.abs(tr - 1.0) > TRACE_TOL):
        raise ValueError(f"density matrix trace deviates from 1: {tr}")


def linear_entropy(rho) -> float | np.ndarray:
    """1 - Tr(rho^2); accepts stacks of matrices."""
    rho = np.asarray(rho)
    _check_trace(rho)
    purity = np.real(np.einsum("...ij,...ji->...", rho, rho))
    return 1.0 - purity


def entropy_from_eigenvalues(w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if np.any(w < -CLAMP_TOL):
        raise ValueError(f"density matrix has a negative eigenvalue {w.min():.3e}")
    w = np.clip(w, 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(w > 0, -w * np.log(np.where(w > 0, w, 1.0)), 0.0)
    return terms.sum(axis=-1)


def von_neumann_entropy(rho) -> float | np.ndarray:
    rho = np.asarray(rho)
    _check_trace(rho)
    return entropy_from_eigenvalues(jacobi_eigh(rho, vectors=False))


def mutual_information(rho_a, rho_b, rho_ab=None, known_pure: bool = False) -> float:
    """S(A) + S(B) - S(AB); pass ``known_pure=True`` to take S(AB) = 0."""
    rho_a, rho_b = np.asarray(rho_a), np.asarray(rho_b)
    s_ab = 0.0
    if not known_pure:
        if rho_ab is None:
            raise ValueError("joint density required unless the joint state is known to be pure")
        rho_ab = np.asarray(rho_ab)
        if rho_ab.shape[-1] != rho_a.shape[-1] * rho_b.shape[-1]:
            raise ValueError(
                f"dimension mismatch: {rho_a.shape[-1]} x {rho_b.shape[-1]} != {rho_ab.shape[-1]}"
            )
        s_ab = von_neumann_entropy(rho_ab)
    return von_neumann_entropy(rho_a) + von_neumann_entropy(rho_b) - s_ab


def partial_transpose(rho, dims: tuple[int, int], subsystem: int = 2) -> np.ndarray:
    """rho^{T_B}_{jm,kn} = rho_{jn,km} (subsystem 2) or the analogue on subsystem 1."""
    d1, d2 = dims
    r = np.asarray(rho).reshape(d1, d2, d1, d2)
    if subsystem == 2:
        r = r.transpose(0, 3, 2, 1)
    elif subsystem == 1:
        r = r.transpose(2, 1, 0, 3)
    else:
        raise ValueError("subsystem must be 1 or 2")
    return r.reshape(d1 * d2, d1 * d2)


def partial_transpose_min_eigenvalue(rho, dims: tuple[int, int], subsystem: int = 2) -> float:
    """Smallest eigenvalue of the partial transpose; negative means entangled."""
    w = jacobi_eigh(partial_transpose(rho, dims, subsystem), vectors=False)
    return float(w[-1])


def araki_lieb(s_a: float, s_b: float, s_ab: float, slack: float = 1e-8) -> bool:
    return abs(s_a - s_b) <= s_ab + slack and s_ab <= s_a + s_b + slack
