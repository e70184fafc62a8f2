"""Random circuit generators used by tests, benchmarks and ensembles."""
from __future__ import annotations

import numpy as np
from scipy.linalg import expm
from scipy.stats import unitary_group

from .circuit import Circuit, Gate, from_gates, gate, unitary
from .clifford import BRICKWORK_CYCLE, brickwork_pairs, make_rng


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(dim, random_state=rng)


def random_contraction(rng: np.random.Generator) -> np.ndarray:
    """Random 2x2 matrix with operator norm at most 1."""
    m = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    return m / np.linalg.norm(m, 2) * rng.uniform(0, 1)


def random_brickwork_1d(n: int, depth: int, seed: int, single_qubit: bool = False) -> Circuit:
    """Open-boundary 1D brickwork of Haar two-qubit gates."""
    rng = make_rng(seed)
    layers = []
    for t in range(depth):
        row = [unitary(haar_unitary(4, rng), a, a + 1) for a in range(t % 2, n - 1, 2)]
        if single_qubit:
            busy = {q for g in row for q in g.qubits}
            row += [unitary(haar_unitary(2, rng), q) for q in range(n) if q not in busy]
        layers.append(tuple(row))
    return Circuit(n, tuple(layers), None, {"family": "brickwork_1d", "seed": seed})


def random_circuit(n: int, num_gates: int, seed: int, two_qubit_fraction: float = 0.6) -> Circuit:
    """Random gates on random qubits, packed greedily into layers."""
    rng = make_rng(seed)
    out: list[Gate] = []
    for _ in range(num_gates):
        if n >= 2 and rng.random() < two_qubit_fraction:
            a, b = rng.choice(n, size=2, replace=False)
            out.append(unitary(haar_unitary(4, rng), int(a), int(b)))
        else:
            out.append(unitary(haar_unitary(2, rng), int(rng.integers(n))))
    return from_gates(n, out, metadata={"family": "random", "seed": seed})


def random_clifford_circuit(n: int, depth: int, seed: int) -> Circuit:
    """Layers of named Clifford gates (h, s, cx, cz, swap, x, y, z) on random pairs."""
    rng = make_rng(seed)
    one = ["h", "s", "sdg", "x", "y", "z"]
    two = ["cx", "cz", "swap"]
    layers = []
    for _ in range(depth):
        perm = rng.permutation(n)
        row = []
        i = 0
        while i < n:
            if i + 1 < n and rng.random() < 0.5:
                row.append(gate(two[rng.integers(3)], int(perm[i]), int(perm[i + 1])))
                i += 2
            else:
                row.append(gate(one[rng.integers(len(one))], int(perm[i])))
                i += 1
        layers.append(tuple(row))
    return Circuit(n, tuple(layers), None, {"family": "random_clifford", "seed": seed})


def near_identity_grid(rows: int, cols: int, theta: float, seed: int, pattern=BRICKWORK_CYCLE,
                       depth: int | None = None, flip: bool = True) -> Circuit:
    """Grid brickwork of gates exp(-i theta H) with random unit-norm Hermitian H.

    The output is peaked near 0^n; with ``flip`` a final layer of X gates on a
    random subset moves the peak to a random string.
    """
    rng = make_rng(seed)
    depth = len(pattern) if depth is None else depth
    n = rows * cols
    layers = []
    for t in range(depth):
        row = []
        for a, b in brickwork_pairs(rows, cols, pattern[t % len(pattern)]):
            h = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
            h = (h + h.conj().T) / 2
            h /= np.linalg.norm(h, 2)
            row.append(unitary(expm(-1j * theta * h), a, b))
        layers.append(tuple(row))
    if flip:
        mask = rng.integers(2, size=n)
        row = tuple(gate("x", q) for q in range(n) if mask[q])
        if row:
            layers.append(row)
    return Circuit(n, tuple(layers), (rows, cols),
                   {"family": "near_identity", "theta": theta, "seed": seed, "pattern": list(pattern)})


def global_phase_variant(circuit: Circuit, gamma: float) -> Circuit:
    """Same circuit with the first gate multiplied by exp(i gamma)."""
    layers = [list(layer) for layer in circuit.layers]
    for li, layer in enumerate(layers):
        if layer:
            g = layer[0]
            layer[0] = unitary(np.exp(1j * gamma) * g.matrix, *g.qubits)
            break
    else:
        layers = [[unitary(np.exp(1j * gamma) * np.eye(2), 0)]]
    return Circuit(circuit.n, tuple(tuple(l) for l in layers), circuit.layout, dict(circuit.metadata))
