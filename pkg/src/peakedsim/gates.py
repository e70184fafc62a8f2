"""Canonical gate matrices and small Pauli helpers.

Multi-qubit matrices use the convention that the first listed qubit is the
most significant bit of the local index.
"""
from __future__ import annotations

import numpy as np

_S2 = 1 / np.sqrt(2)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) * _S2
S = np.diag([1, 1j]).astype(complex)
SDG = np.diag([1, -1j]).astype(complex)
T = np.diag([1, np.exp(1j * np.pi / 4)]).astype(complex)
TDG = np.diag([1, np.exp(-1j * np.pi / 4)]).astype(complex)

CX = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
CZ = np.diag([1, 1, 1, -1]).astype(complex)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)

PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}


def rz(theta: float) -> np.ndarray:
    """R(theta) = diag(exp(-i theta/2), exp(i theta/2))."""
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


FIXED = {
    "h": H, "x": X, "y": Y, "z": Z, "s": S, "sdg": SDG, "t": T, "tdg": TDG,
    "cx": CX, "cz": CZ, "swap": SWAP,
}
PARAMETRIC = {"rz": rz, "r": rz}

# name of the adjoint gate for each named gate
ADJOINT_NAME = {
    "h": "h", "x": "x", "y": "y", "z": "z", "s": "sdg", "sdg": "s", "t": "tdg", "tdg": "t",
    "cx": "cx", "cz": "cz", "swap": "swap", "rz": "rz", "r": "r",
}


def named_matrix(name: str, theta: float | None = None) -> np.ndarray:
    if name in FIXED:
        return FIXED[name].copy()
    if name in PARAMETRIC:
        if theta is None:
            raise ValueError(f"gate {name!r} needs an angle")
        return PARAMETRIC[name](theta)
    raise ValueError(f"unknown gate {name!r}")


def num_qubits_of(name: str) -> int:
    if name in ("cx", "cz", "swap"):
        return 2
    return 1


def unitarity_error(m: np.ndarray) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


def pauli_string_matrix(label: str) -> np.ndarray:
    """Dense matrix of a Pauli string such as ``"XIZ"`` (qubit 0 leftmost)."""
    out = np.ones((1, 1), dtype=complex)
    for ch in label:
        out = np.kron(out, PAULI[ch])
    return out


def psd_sqrt(a: np.ndarray) -> np.ndarray:
    """Square root of a Hermitian PSD matrix; tiny negative eigenvalues are clipped."""
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
