"""Parent-Hamiltonian terms and the matrix-free compression G = Pi H Pi.

H = (1/n) sum_j U |0><0|_j U^+. Each term is supported on the forward
lightcone S_j of qubit j, where it equals a projector O_j of rank 2^(|S_j|-1).
Pi projects onto strings of Hamming weight at most W.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BoundedWeightBasis
from .circuit import Circuit, cone_subcircuit
from .config import LimitExceeded, block_limit
from .statevec import apply_circuit

INDEX_MEMORY_BUDGET = 2 * 1024**3


@dataclass(frozen=True, eq=False)
class LocalTerm:
    qubit: int
    support: tuple[int, ...]  # sorted; support[0] is the most significant local bit
    block: np.ndarray

    @property
    def size(self) -> int:
        return len(self.support)


def build_terms(circuit: Circuit, limit: int | None = None) -> list[LocalTerm]:
    """O_j = U_F (|0><0|_j x I) U_F^+ where U_F holds the gates of j's forward cone."""
    lim = block_limit() if limit is None else limit
    terms = []
    for j in range(circuit.n):
        support, sub = cone_subcircuit(circuit, [j], forward=True)
        f = len(support)
        if f > lim:
            raise LimitExceeded(f"forward cone of qubit {j} has {f} qubits; block limit is {lim}")
        local = support.index(j)
        dim = 2 ** f
        cols = np.array([b for b in range(dim) if not (b >> (f - 1 - local)) & 1])
        inputs = np.zeros((len(cols), dim), dtype=complex)
        inputs[np.arange(len(cols)), cols] = 1.0
        rows = apply_circuit(inputs, sub)  # row b is U_F |b>
        block = rows.T @ rows.conj()
        block.setflags(write=False)
        terms.append(LocalTerm(j, tuple(support), block))
    return terms


def _popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(np.asarray(a, dtype=np.int64)).astype(np.int64)


class ProjectedHamiltonian:
    """G = Pi H Pi on the weight-<=W basis, applied without storing G.

    For a term on support S, basis strings are grouped by their bits outside S.
    A group whose outside weight is w_out contains exactly the local patterns of
    weight <= W - w_out, so the term acts on the group as a fixed sub-block of O_j.
    """

    def __init__(self, circuit: Circuit, W: int, terms: list[LocalTerm] | None = None,
                 basis: BoundedWeightBasis | None = None, limit: int | None = None):
        self.circuit = circuit
        self.n = circuit.n
        self.W = W
        self.basis = basis if basis is not None else BoundedWeightBasis(self.n, W)
        if self.basis.W != W or self.basis.n != self.n:
            raise ValueError("basis does not match (n, W)")
        self.D = self.basis.D
        if self.n * self.D * 8 > INDEX_MEMORY_BUDGET:
            raise LimitExceeded(f"index tables for D={self.D} exceed the memory budget")
        self.terms = terms if terms is not None else build_terms(circuit, limit)
        self._plans = [self._plan(t) for t in self.terms]
        self._sparse = None

    def _plan(self, term: LocalTerm):
        """Per term: list of (index matrix, sub-block) pairs, one per remaining budget."""
        n, f = self.n, term.size
        strings = self.basis.strings()
        shifts = np.array([n - 1 - q for q in term.support], dtype=np.int64)
        mask = int(np.sum(np.int64(1) << shifts)) if f else 0
        outside = np.unique(strings & ~np.int64(mask))
        budget = self.W - _popcount(outside)
        patterns = np.arange(2 ** f, dtype=np.int64)
        pw = _popcount(patterns)
        # local pattern bit i (from the top) sits at global significance shifts[i]
        embedded = np.zeros(2 ** f, dtype=np.int64)
        for i, s in enumerate(shifts):
            embedded |= ((patterns >> (f - 1 - i)) & 1) << s
        out = []
        for r in np.unique(budget):
            allowed = np.nonzero(pw <= r)[0]
            groups = outside[budget == r]
            idx = self.basis.rank_array(groups[:, None] | embedded[allowed][None, :])
            sub = np.ascontiguousarray(term.block[np.ix_(allowed, allowed)].T)
            out.append((idx, sub))
        return out

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=complex)
        if self._sparse is not None:
            return self._sparse @ v
        out = np.zeros(self.D, dtype=complex)
        for plan in self._plans:
            for idx, sub in plan:
                out[idx] += v[idx] @ sub
        return out / self.n

    __call__ = matvec

    def nnz_estimate(self) -> int:
        return int(sum(idx.shape[0] * idx.shape[1] ** 2 for plan in self._plans for idx, _ in plan))

    def cache_sparse(self, budget_bytes: int = 512 * 1024**2) -> bool:
        """Materialize G as a CSR matrix if it fits the budget; returns whether it did."""
        from scipy import sparse

        nnz = self.nnz_estimate()
        if nnz * 32 > budget_bytes:
            return False
        rows, cols, vals = [], [], []
        for plan in self._plans:
            for idx, sub in plan:
                a = idx.shape[1]
                rows.append(np.repeat(idx, a, axis=1).ravel())
                cols.append(np.tile(idx, (1, a)).ravel())
                vals.append(np.broadcast_to(sub.T[None], (idx.shape[0], a, a)).ravel())
        mat = sparse.coo_matrix(
            (np.concatenate(vals) / self.n, (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.D, self.D)).tocsr()
        mat.sum_duplicates()
        self._sparse = mat
        return True

    def element(self, x, y) -> complex:
        """<x|H|y> for basis strings x, y."""
        xi = self.basis.unrank_int(self.basis.rank(x))
        yi = self.basis.unrank_int(self.basis.rank(y))
        total = 0j
        for t in self.terms:
            shifts = [self.n - 1 - q for q in t.support]
            mask = sum(1 << s for s in shifts)
            if (xi & ~mask) != (yi & ~mask):
                continue
            lx = sum(((xi >> s) & 1) << (t.size - 1 - i) for i, s in enumerate(shifts))
            ly = sum(((yi >> s) & 1) << (t.size - 1 - i) for i, s in enumerate(shifts))
            total += t.block[lx, ly]
        return total / self.n

    def to_dense(self, max_dim: int = 4096) -> np.ndarray:
        if self.D > max_dim:
            raise LimitExceeded(f"dense G with D={self.D} exceeds {max_dim}")
        eye = np.eye(self.D, dtype=complex)
        return np.stack([self.matvec(eye[:, i]) for i in range(self.D)], axis=1)

    def row_support_bound(self) -> int:
        return sum(2 ** t.size for t in self.terms)
