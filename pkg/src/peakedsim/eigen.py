"""Largest eigenpair of a Hermitian operator by thick-restart Lanczos."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .clifford import make_rng


class EigenNonConvergence(RuntimeError):
    def __init__(self, message: str, result: "EigenResult"):
        super().__init__(message)
        self.result = result


@dataclass
class EigenResult:
    lambda1: float
    eigvec: np.ndarray
    residual: float
    iterations: int
    converged: bool
    history: list[float] = field(default_factory=list)


def _orthogonalize(Q: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two passes of classical Gram-Schmidt against the columns of Q."""
    h = Q.conj().T @ w
    w = w - Q @ h
    h2 = Q.conj().T @ w
    w = w - Q @ h2
    return w, h + h2


def largest_eigenpair(matvec: Callable[[np.ndarray], np.ndarray], dim: int, tol: float = 1e-8,
                      max_iter: int = 10_000, seed: int = 0, window: int = 64,
                      v0: np.ndarray | None = None, noise: float = 1e-3) -> EigenResult:
    """Top eigenpair of a Hermitian operator given only ``matvec``.

    Keeps the relation A Q = Q T + r b^H with orthonormal Q. The basis grows by
    one vector per matvec; once it reaches ``window`` columns it is shrunk to the
    leading Ritz vectors, which keeps the Ritz values non-decreasing.
    ``iterations`` counts matvecs spent growing the basis; one more matvec
    recomputes the residual of the returned pair.
    """
    if dim < 1:
        raise ValueError("dimension must be positive")
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    window = max(2, min(window, dim))
    keep = max(1, window // 2)
    if v0 is None:
        rng = make_rng(seed)
        v0 = np.zeros(dim, dtype=complex)
        v0[0] = 1.0
        v0 += noise * (rng.standard_normal(dim) + 1j * rng.standard_normal(dim))
    r = np.asarray(v0, dtype=complex).copy()
    Q = np.zeros((dim, 0), dtype=complex)
    T = np.zeros((0, 0), dtype=complex)
    b = np.zeros(0, dtype=complex)
    history: list[float] = []
    iters = 0
    theta = 0.0

    def ritz():
        w, Y = np.linalg.eigh((T + T.conj().T) / 2)
        return w[::-1], Y[:, ::-1]

    while True:
        beta = np.linalg.norm(r)
        exhausted = Q.shape[1] > 0 and beta <= 1e-14 * max(1.0, abs(theta))
        if not exhausted and iters < max_iter:
            if Q.shape[1] == window:
                vals, Y = ritz()
                Q = Q @ Y[:, :keep]
                T = np.diag(vals[:keep]).astype(complex)
                b = Y[:, :keep].conj().T @ b
            q = r / beta
            q, _ = _orthogonalize(Q, q)
            q /= np.linalg.norm(q)
            w = matvec(q)
            iters += 1
            w, h = _orthogonalize(np.column_stack([Q, q]), w)
            m = Q.shape[1]
            T_new = np.zeros((m + 1, m + 1), dtype=complex)
            T_new[:m, :m] = T
            T_new[:m, m] = h[:m] if m else h[:0]
            T_new[m, :m] = np.conj(h[:m])
            T_new[m, m] = h[m].real
            T = T_new
            Q = np.column_stack([Q, q])
            r = w
            b = np.zeros(m + 1, dtype=complex)
            b[m] = 1.0
        vals, Y = ritz()
        theta, y = float(vals[0]), Y[:, 0]
        history.append(theta)
        est = np.linalg.norm(r) * abs(np.vdot(b, y))
        if est <= tol or exhausted or iters >= max_iter:
            x = Q @ y
            x /= np.linalg.norm(x)
            ax = matvec(x)
            lam = float(np.vdot(x, ax).real)
            res = float(np.linalg.norm(ax - lam * x))
            if res <= tol:
                return EigenResult(lam, x, res, iters, True, history)
            if iters >= max_iter or exhausted:
                return EigenResult(lam, x, res, iters, False, history)
