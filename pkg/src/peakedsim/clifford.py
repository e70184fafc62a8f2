"""Pauli propagation through Clifford circuits and the V(theta) benchmark family.

A Pauli operator is stored as ``i**phase * prod_j X_j**x_j Z_j**z_j`` (per qubit
the X factor stands to the left of the Z factor), so Y = i X Z has phase 1.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from . import gates as G
from .circuit import Circuit, Gate, unitary

CLIFFORD2_ORDER = 11520


class NonCliffordError(ValueError):
    """A gate does not map Paulis to Paulis."""


def make_rng(seed: int, index: int | None = None) -> np.random.Generator:
    """Counter-based Philox stream for ``seed`` (and optionally an instance index)."""
    key = seed if index is None else [seed, index]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


# ---------------------------------------------------------------------------
# Pauli operators


@dataclass(frozen=True, eq=False)
class PauliOperator:
    x: np.ndarray
    z: np.ndarray
    phase: int = 0

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.uint8) & 1
        z = np.asarray(self.z, dtype=np.uint8) & 1
        if x.shape != z.shape or x.ndim != 1:
            raise ValueError("x and z parts must be equal-length bit vectors")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "phase", int(self.phase) % 4)

    @property
    def n(self) -> int:
        return len(self.x)

    @classmethod
    def from_label(cls, label: str) -> "PauliOperator":
        """Hermitian Pauli from a string like ``"+XIZ"`` or ``"-iY"``."""
        phase = 0
        s = label
        if s[:1] in "+-":
            phase = 0 if s[0] == "+" else 2
            s = s[1:]
        if s[:1] == "i":
            phase += 1
            s = s[1:]
        x = np.array([c in "XY" for c in s], dtype=np.uint8)
        z = np.array([c in "ZY" for c in s], dtype=np.uint8)
        if set(s) - set("IXYZ"):
            raise ValueError(f"bad Pauli label {label!r}")
        return cls(x, z, phase + int(np.sum(x & z)))

    def label(self) -> str:
        chars = "".join("IXZY"[a + 2 * b] for a, b in zip(self.x, self.z))
        # Y contributes a factor i in the X^x Z^z form; remove it from the sign
        p = (self.phase - int(np.sum(self.x & self.z))) % 4
        return ["+", "+i", "-", "-i"][p] + chars

    def matrix(self) -> np.ndarray:
        out = np.ones((1, 1), dtype=complex)
        for a, b in zip(self.x, self.z):
            out = np.kron(out, np.linalg.matrix_power(G.X, int(a)) @ np.linalg.matrix_power(G.Z, int(b)))
        return (1j ** self.phase) * out

    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        cross = int(np.sum(self.z & other.x))
        return PauliOperator(self.x ^ other.x, self.z ^ other.z, self.phase + other.phase + 2 * cross)

    def __eq__(self, other):
        return (isinstance(other, PauliOperator) and self.phase == other.phase
                and np.array_equal(self.x, other.x) and np.array_equal(self.z, other.z))

    def __repr__(self):
        return f"PauliOperator({self.label()!r})"


def z_string(n: int) -> PauliOperator:
    return PauliOperator(np.zeros(n), np.ones(n))


@lru_cache(maxsize=None)
def _local_paulis(k: int) -> list[np.ndarray]:
    mats = []
    for bits in product((0, 1), repeat=2 * k):
        xs, zs = bits[:k], bits[k:]
        m = np.ones((1, 1), dtype=complex)
        for a, b in zip(xs, zs):
            m = np.kron(m, np.linalg.matrix_power(G.X, a) @ np.linalg.matrix_power(G.Z, b))
        mats.append(m)
    return mats


_ACTION_CACHE: dict[bytes, np.ndarray] = {}


def gate_action(matrix: np.ndarray) -> np.ndarray:
    """Table of g^+ P g for every local Pauli P = X^x Z^z.

    Row ``r`` (with ``r`` read as the bits ``x_1..x_k z_1..z_k``) holds
    ``(x'_1..x'_k, z'_1..z'_k, phase)`` of the image.
    """
    m = np.asarray(matrix, dtype=complex)
    key = np.round(m, 12).tobytes()
    hit = _ACTION_CACHE.get(key)
    if hit is not None:
        return hit
    k = int(round(np.log2(m.shape[0])))
    basis = _local_paulis(k)
    dim = 2 ** k
    table = np.zeros((4 ** k, 2 * k + 1), dtype=np.int64)
    for r, p in enumerate(basis):
        img = m.conj().T @ p @ m
        coeffs = np.array([np.trace(q.conj().T @ img) / dim for q in basis])
        best = int(np.argmax(np.abs(coeffs)))
        c = coeffs[best]
        if abs(abs(c) - 1) > 1e-8:
            raise NonCliffordError("gate does not conjugate Paulis to Paulis")
        ph = int(np.round(np.angle(c) / (np.pi / 2))) % 4
        bits = [(best >> (2 * k - 1 - i)) & 1 for i in range(2 * k)]
        table[r] = bits + [ph]
    table.setflags(write=False)
    _ACTION_CACHE[key] = table
    return table


def _conjugate_rows(xs: np.ndarray, zs: np.ndarray, ph: np.ndarray, g: Gate) -> None:
    """In place: every row P becomes g^+ P g (rows given as bit/phase arrays)."""
    table = gate_action(g.matrix)
    q = list(g.qubits)
    k = len(q)
    r = np.zeros(len(ph), dtype=np.int64)
    for i in range(k):
        r |= xs[:, q[i]].astype(np.int64) << (2 * k - 1 - i)
        r |= zs[:, q[i]].astype(np.int64) << (k - 1 - i)
    img = table[r]
    for i in range(k):
        xs[:, q[i]] = img[:, i]
        zs[:, q[i]] = img[:, k + i]
    ph += img[:, 2 * k]
    ph %= 4


def conjugate_pauli(circuit: Circuit, p: PauliOperator) -> PauliOperator:
    """U^+ p U for the Clifford circuit U, by propagating p from the last layer back."""
    if p.n != circuit.n:
        raise ValueError("Pauli and circuit sizes differ")
    xs = p.x[None, :].copy()
    zs = p.z[None, :].copy()
    ph = np.array([p.phase], dtype=np.int64)
    for layer in reversed(circuit.layers):
        for g in layer:
            _conjugate_rows(xs, zs, ph, g)
    return PauliOperator(xs[0], zs[0], int(ph[0]))


class Tableau:
    """Heisenberg images U^+ X_i U (rows 0..n-1) and U^+ Z_i U (rows n..2n-1)."""

    def __init__(self, n: int):
        self.n = n
        self.xs = np.zeros((2 * n, n), dtype=np.uint8)
        self.zs = np.zeros((2 * n, n), dtype=np.uint8)
        self.phases = np.zeros(2 * n, dtype=np.int64)
        idx = np.arange(n)
        self.xs[idx, idx] = 1
        self.zs[n + idx, idx] = 1

    @classmethod
    def from_circuit(cls, circuit: Circuit) -> "Tableau":
        t = cls(circuit.n)
        for layer in reversed(circuit.layers):
            for g in layer:
                t.prepend(g)
        return t

    def prepend(self, g: Gate) -> None:
        """Replace U by U g."""
        _conjugate_rows(self.xs, self.zs, self.phases, g)
        if not self.is_symplectic():
            raise AssertionError("tableau lost the symplectic form")

    def row(self, i: int) -> PauliOperator:
        return PauliOperator(self.xs[i], self.zs[i], int(self.phases[i]))

    def is_symplectic(self) -> bool:
        x = self.xs.astype(np.int64)
        z = self.zs.astype(np.int64)
        form = (x @ z.T + z @ x.T) % 2
        n = self.n
        omega = np.zeros((2 * n, 2 * n), dtype=np.int64)
        omega[:n, n:] = np.eye(n, dtype=np.int64)
        omega[n:, :n] = np.eye(n, dtype=np.int64)
        return bool(np.array_equal(form, omega))

    def conjugate(self, p: PauliOperator) -> PauliOperator:
        """U^+ p U as a product of stored rows."""
        out = PauliOperator(np.zeros(self.n), np.zeros(self.n), p.phase)
        for j in range(self.n):
            if p.x[j]:
                out = out * self.row(j)
            if p.z[j]:
                out = out * self.row(self.n + j)
        return out


# ---------------------------------------------------------------------------
# Clifford groups on one and two qubits


def canonical_keys(mats: np.ndarray) -> np.ndarray:
    """Global-phase-free integer fingerprints of a stack of matrices."""
    m = np.asarray(mats, dtype=complex).reshape(len(mats), -1)
    first = np.argmax(np.abs(m) > 0.1, axis=1)
    lead = m[np.arange(len(m)), first]
    m = m * (np.abs(lead) / lead)[:, None]
    ints = np.concatenate([np.round(m.real * 4096), np.round(m.imag * 4096)], axis=1).astype(np.int64)
    return ints


def _fingerprint(ints: np.ndarray) -> np.ndarray:
    weights = make_rng(1234).integers(1, 2**62, size=ints.shape[1], dtype=np.int64)
    with np.errstate(over="ignore"):
        return (ints * weights).sum(axis=1)


def fingerprints(mats: np.ndarray) -> np.ndarray:
    """One int64 per matrix; equal iff the matrices agree up to global phase."""
    return _fingerprint(canonical_keys(mats))


@lru_cache(maxsize=None)
def clifford_group(k: int) -> np.ndarray:
    """All elements of the k-qubit Clifford group (k = 1 or 2) modulo phase."""
    if k == 1:
        gens = [G.H, G.S]
    elif k == 2:
        gens = [np.kron(G.H, G.I2), np.kron(G.I2, G.H), np.kron(G.S, G.I2), np.kron(G.I2, G.S), G.CX]
    else:
        raise ValueError("only one- and two-qubit groups are enumerated")
    eye = np.eye(2 ** k, dtype=complex)
    seen = {canonical_keys(eye[None])[0].tobytes()}
    elems = [eye]
    queue = deque([eye])
    while queue:
        m = queue.popleft()
        for g in gens:
            nxt = g @ m
            key = canonical_keys(nxt[None])[0].tobytes()
            if key not in seen:
                seen.add(key)
                elems.append(nxt)
                queue.append(nxt)
    out = np.array(elems)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class TwoQubitClifford:
    index: int
    matrix: np.ndarray
    action: np.ndarray  # gate_action table: images of the 16 local Paulis


def random_two_qubit_clifford(rng: np.random.Generator) -> TwoQubitClifford:
    """Uniform draw from the 11,520-element two-qubit Clifford group."""
    group = clifford_group(2)
    i = int(rng.integers(len(group)))
    return TwoQubitClifford(i, group[i], gate_action(group[i]))


def random_two_qubit_cliffords(rng: np.random.Generator, size: int) -> np.ndarray:
    group = clifford_group(2)
    return group[rng.integers(len(group), size=size)]


# ---------------------------------------------------------------------------
# V(theta) benchmark family

BRICKWORK_CYCLE = ("h-even", "h-odd", "v-even", "v-odd")


def brickwork_pairs(rows: int, cols: int, kind: str) -> list[tuple[int, int]]:
    """Nearest-neighbour pairs of one brickwork layer on an open-boundary grid."""
    out = []
    if kind.startswith("h"):
        start = 0 if kind == "h-even" else 1
        for r in range(rows):
            for c in range(start, cols - 1, 2):
                out.append((r * cols + c, r * cols + c + 1))
    elif kind.startswith("v"):
        start = 0 if kind == "v-even" else 1
        for r in range(start, rows - 1, 2):
            for c in range(cols):
                out.append((r * cols + c, (r + 1) * cols + c))
    else:
        raise ValueError(f"unknown brickwork layer {kind!r}")
    return out


@dataclass(frozen=True, eq=False)
class VTheta:
    circuit: Circuit
    peak: str
    u: Circuit
    u0: Circuit


def build_u_theta(rows: int, cols: int, d: int, theta: float, seed: int,
                  pattern=BRICKWORK_CYCLE) -> tuple[Circuit, Circuit]:
    """U(theta) and U(0) drawn with the same Cliffords."""
    if d < 1:
        raise ValueError("depth must be at least 1")
    n = rows * cols
    rng = make_rng(seed)
    group = clifford_group(2)
    rr = G.rz(theta)
    rot = np.kron(rr, rr)
    layers, layers0 = [], []
    for t in range(d):
        pairs = brickwork_pairs(rows, cols, pattern[t % len(pattern)])
        idx = rng.integers(len(group), size=len(pairs))
        layers.append(tuple(unitary(rot @ group[i], a, b) for i, (a, b) in zip(idx, pairs)))
        layers0.append(tuple(unitary(group[i], a, b) for i, (a, b) in zip(idx, pairs)))
    dims = (rows, cols)
    return Circuit(n, tuple(layers), dims), Circuit(n, tuple(layers0), dims)


def _sandwich(u: Circuit) -> list[tuple[Gate, ...]]:
    """Layers of U^+ Z^n U with the middle three layers merged into one."""
    n = u.n
    last = u.layers[-1]
    zz = np.kron(G.Z, G.Z)
    merged = [unitary(g.matrix.conj().T @ zz @ g.matrix, *g.qubits) for g in last]
    busy = {q for g in last for q in g.qubits}
    merged += [Gate("z", (q,), G.Z) for q in range(n) if q not in busy]
    front = list(u.layers[:-1])
    back = [tuple(g.adjoint() for g in layer) for layer in reversed(front)]
    return front + [tuple(merged)] + back


def build_v_theta(rows: int, cols: int, d: int, theta: float, seed: int,
                  pattern=BRICKWORK_CYCLE) -> VTheta:
    """V(theta) = U(theta)^+ Z^n U(theta) on a rows x cols grid, with 2d - 1 layers.

    The peak string is the X part of U(0)^+ Z^n U(0), since V(0)|0^n> is then a
    computational basis state up to phase.
    """
    u, u0 = build_u_theta(rows, cols, d, theta, seed, pattern)
    img = conjugate_pauli(u0, z_string(u.n))
    peak = "".join(str(int(b)) for b in img.x)
    meta = {"family": "v_theta", "rows": rows, "cols": cols, "d": d, "theta": float(theta),
            "seed": int(seed), "peak": peak}
    if tuple(pattern) != BRICKWORK_CYCLE:
        meta["pattern"] = list(pattern)
    v = Circuit(u.n, tuple(_sandwich(u)), (rows, cols), meta)
    return VTheta(v, peak, u, u0)
