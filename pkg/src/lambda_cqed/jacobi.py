"""Cyclic Jacobi eigensolver for stacks of small Hermitian matrices.

Rotations follow a round-robin (tournament) ordering, so each step applies
n/2 disjoint plane rotations at once as a single matrix product.  Every matrix in a stack is frozen as
soon as its own off-diagonal norm is below tolerance, which makes the result
for one matrix independent of what else was batched with it.
"""

from __future__ import annotations

import numpy as np

__all__ = ["JacobiConvergenceError", "jacobi_eigh", "round_robin_pairs"]

OFF_TOL = 1e-13


class JacobiConvergenceError(RuntimeError):
    pass


def round_robin_pairs(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Rounds of disjoint (p, q) pairs, p < q, covering every pair once."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        p, q = [], []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a < n and b < n:
                p.append(min(a, b))
                q.append(max(a, b))
        rounds.append((np.array(p, dtype=np.intp), np.array(q, dtype=np.intp)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def _off_norm(a: np.ndarray) -> np.ndarray:
    n = a.shape[-1]
    mask = ~np.eye(n, dtype=bool)
    return np.sqrt(np.sum(np.abs(a[..., mask]) ** 2, axis=-1))


def jacobi_eigh(a, tol: float = OFF_TOL, max_sweeps: int = 60, vectors: bool = True):
    """Eigenvalues (descending) and eigenvectors (columns) of Hermitian ``a``.

    ``a`` may carry leading batch dimensions.  Iteration stops per matrix
    once the Frobenius norm of its off-diagonal part drops below
    ``tol * max(1, ||a||_F)``.
    """
    a = np.array(a, dtype=complex if np.iscomplexobj(a) else float, copy=True)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError("expected square matrices")
    n = a.shape[-1]
    batch = a.shape[:-2]
    a = a.reshape((-1, n, n))
    a = 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))
    complex_case = np.iscomplexobj(a)
    v = np.broadcast_to(np.eye(n, dtype=a.dtype), a.shape).copy() if vectors else None
    scale = np.maximum(1.0, np.sqrt(np.sum(np.abs(a) ** 2, axis=(-1, -2))))
    rounds = round_robin_pairs(n)

    for _ in range(max_sweeps + 1):
        active = _off_norm(a) >= tol * scale
        if not active.any():
            break
        idx = np.flatnonzero(active)
        sub = a[idx]
        vsub = v[idx] if vectors else None
        # pivots this small cannot affect convergence; skipping them avoids overflow
        floor = 1e-30 * scale[idx][:, None]
        for p, q in rounds:
            if p.size == 0:
                continue
            app = sub[:, p, p].real
            aqq = sub[:, q, q].real
            apq = sub[:, p, q]
            r = np.abs(apq)
            live = r > floor
            r_safe = np.where(live, r, 1.0)
            tau = (aqq - app) / (2.0 * r_safe)
            sgn = np.where(tau >= 0, 1.0, -1.0)
            t = np.where(live, sgn / (np.abs(tau) + np.sqrt(1.0 + tau * tau)), 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            e = apq / r_safe if complex_case else np.sign(apq)
            e = np.where(live, e, 1.0)
            se, sec = s * e, s * np.conj(e)

            # the round's disjoint rotations form one unitary J; A <- J^H A J
            rot = np.broadcast_to(np.eye(n, dtype=sub.dtype), sub.shape).copy()
            rot[:, p, p] = c
            rot[:, q, q] = c
            rot[:, p, q] = se
            rot[:, q, p] = -sec
            sub = np.conj(np.swapaxes(rot, -1, -2)) @ sub @ rot
            sub[:, p, q] = np.where(live, 0.0, sub[:, p, q])
            sub[:, q, p] = np.where(live, 0.0, sub[:, q, p])
            if complex_case:
                sub[:, p, p] = sub[:, p, p].real
                sub[:, q, q] = sub[:, q, q].real
            if vectors:
                vsub = vsub @ rot
        a[idx] = sub
        if vectors:
            v[idx] = vsub
    else:
        raise JacobiConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")

    w = np.real(np.diagonal(a, axis1=-2, axis2=-1)).copy()
    order = np.argsort(-w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1).reshape(batch + (n,))
    if not vectors:
        return w
    v = np.take_along_axis(v, order[:, None, :], axis=-1).reshape(batch + (n, n))
    return w, v
