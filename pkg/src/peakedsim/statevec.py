"""Dense statevector oracle: exact amplitudes, marginals and reduced states."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit import Circuit, Gate, cone_subcircuit, bits_to_int
from .config import LimitExceeded, oracle_limit

RDM_LIMIT = 12


@dataclass
class DenseState:
    n: int
    amplitudes: np.ndarray

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def _check_size(n: int, limit: int | None = None) -> None:
    lim = oracle_limit() if limit is None else limit
    if n > lim:
        raise LimitExceeded(f"{n} qubits exceeds the dense oracle limit {lim}")


def apply_gate(batch: np.ndarray, g: Gate, n: int) -> np.ndarray:
    """Apply ``g`` to every row of ``batch`` (shape ``(B, 2**n)``)."""
    B = batch.shape[0]
    k = len(g.qubits)
    t = batch.reshape((B,) + (2,) * n)
    u = g.matrix.reshape((2,) * (2 * k))
    axes = [1 + q for q in g.qubits]
    out = np.tensordot(u, t, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    return np.ascontiguousarray(out).reshape(B, 2 ** n)


def apply_circuit(batch: np.ndarray, circuit: Circuit) -> np.ndarray:
    batch = np.asarray(batch, dtype=complex)
    squeeze = batch.ndim == 1
    if squeeze:
        batch = batch[None, :]
    for layer in circuit.layers:
        for g in layer:
            batch = apply_gate(batch, g, circuit.n)
    return batch[0] if squeeze else batch


def run(circuit: Circuit, initial: np.ndarray | None = None, limit: int | None = None) -> DenseState:
    """psi = U |0^n> (or U |initial>)."""
    _check_size(circuit.n, limit)
    if initial is None:
        psi = np.zeros(2 ** circuit.n, dtype=complex)
        psi[0] = 1.0
    else:
        psi = np.array(initial, dtype=complex)
    return DenseState(circuit.n, apply_circuit(psi, circuit))


def unitary_matrix(circuit: Circuit, limit: int = 12) -> np.ndarray:
    """Dense 2^n x 2^n matrix of the circuit (small n only)."""
    _check_size(circuit.n, limit)
    eye = np.eye(2 ** circuit.n, dtype=complex)
    # rows of the batch are input basis states, so the result is U^T
    return apply_circuit(eye, circuit).T


def output_distribution(state: DenseState) -> np.ndarray:
    return state.probabilities()


def amplitude(state: DenseState, x) -> complex:
    idx = bits_to_int(x) if isinstance(x, (str, list, tuple)) else int(x)
    return complex(state.amplitudes[idx])


def _as_tensor(state: DenseState) -> np.ndarray:
    return state.amplitudes.reshape((2,) * state.n) if state.n else state.amplitudes.reshape(())


def _check_subset(n: int, subset: Sequence[int]) -> list[int]:
    sub = [int(q) for q in subset]
    if len(set(sub)) != len(sub) or any(not 0 <= q < n for q in sub):
        raise ValueError(f"invalid qubit subset {subset} for n={n}")
    return sub


def reduced_density(state: DenseState, subset: Sequence[int]) -> np.ndarray:
    """Reduced density matrix on ``subset``; subset[0] is the most significant bit."""
    sub = _check_subset(state.n, subset)
    if len(sub) > RDM_LIMIT:
        raise LimitExceeded(f"reduced density on {len(sub)} qubits exceeds {RDM_LIMIT}")
    rest = [q for q in range(state.n) if q not in sub]
    t = np.transpose(_as_tensor(state), sub + rest).reshape(2 ** len(sub), -1)
    return t @ t.conj().T


def subset_distribution(probs: np.ndarray, n: int, subset: Sequence[int]) -> np.ndarray:
    """Marginal distribution of ``subset`` from a full probability vector."""
    sub = _check_subset(n, subset)
    rest = tuple(q for q in range(n) if q not in sub)
    t = probs.reshape((2,) * n) if n else probs
    m = t.sum(axis=rest) if rest else t
    # remaining axes are in increasing qubit order; reorder to the subset order
    order = np.argsort(np.argsort(sub))
    return np.transpose(m, order).reshape(-1) if sub else np.asarray(m).reshape(1)


def marginal(state: DenseState, subset: Sequence[int], y) -> float:
    """Tr(rho_subset |y><y|); ``y`` lists the bits of ``subset`` in its order."""
    sub = _check_subset(state.n, subset)
    yi = bits_to_int(y) if not isinstance(y, (int, np.integer)) else int(y)
    return float(subset_distribution(state.probabilities(), state.n, sub)[yi])


def cone_run(circuit: Circuit, targets: Sequence[int], limit: int | None = None):
    """Simulate only the backward cone of ``targets``; returns (cone qubits, state)."""
    qubits, sub = cone_subcircuit(circuit, targets)
    _check_size(len(qubits), limit)
    return qubits, run(sub, limit=len(qubits))


def single_qubit_means(circuit: Circuit, limit: int | None = None) -> np.ndarray:
    """m_j = E_{x ~ P}[x_j], each from a simulation of qubit j's backward cone."""
    means = np.zeros(circuit.n)
    for j in range(circuit.n):
        qubits, st = cone_run(circuit, [j], limit)
        means[j] = marginal(st, [qubits.index(j)], 1)
    return means
