"""Quantities that reduce to one output probability of a related shallow circuit."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import gates as G
from .circuit import (Circuit, adjoint, build_mean_value_circuit, build_trace_circuit, compose,
                      unitary)
from .clifford import build_u_theta, clifford_group, make_rng
from .peaked import estimate_output_probability
from .statevec import run, unitary_matrix


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, float(x)))


@dataclass
class TraceEstimate:
    value: float
    status: str
    method: dict = field(default_factory=dict)


def trace_exact(u: Circuit) -> complex:
    """t(u) = Tr(u) / 2^n from the dense matrix."""
    return complex(np.trace(unitary_matrix(u)) / 2 ** u.n)


def _zeros(m: int) -> str:
    return "0" * m


def trace_magnitude_squared(u: Circuit, epsilon: float, mode: str = "theory", W: int | None = None,
                            exact: bool = False, seed: int = 0) -> TraceEstimate:
    """|t(u)|^2 as the all-zeros output probability of the Bell-sandwich circuit."""
    w = build_trace_circuit(u)
    meta = {"circuit_qubits": w.n, "circuit_depth": w.depth, "epsilon": epsilon, "mode": mode}
    if exact:
        amp = run(w).amplitudes[0]
        return TraceEstimate(_clamp01(abs(amp) ** 2), "ok", {**meta, "route": "oracle"})
    est = estimate_output_probability(w, _zeros(w.n), epsilon, mode, W, seed=seed)
    meta.update(route="peaked", W=est.result.params.W, lambda1=est.result.lambda1)
    return TraceEstimate(_clamp01(est.value), est.status, meta)


def frobenius_distance(u: Circuit, v: Circuit, epsilon: float, mode: str = "theory",
                       W: int | None = None, exact: bool = False) -> float:
    """2 (1 - |t(u v^+)|), with the radicand clamped to [0, 1]."""
    if u.n != v.n:
        raise ValueError("circuits act on different qubit counts")
    t2 = trace_magnitude_squared(compose(adjoint(v), u), epsilon, mode, W, exact)
    return 2 * (1 - math.sqrt(_clamp01(t2.value)))


# ---------------------------------------------------------------------------
# frame potentials

FAMILIES = ("identity", "pauli1", "clifford1", "brickwork")


@dataclass(frozen=True)
class EnsembleSpec:
    family: str
    n: int
    k: int = 1
    M: int = 100
    seed: int = 0
    rows: int | None = None
    cols: int | None = None
    d: int = 1
    theta: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.k < 1 or self.M < 1:
            raise ValueError("need k >= 1 and M >= 1")


def _product_circuit(mats: Sequence[np.ndarray]) -> Circuit:
    return Circuit(len(mats), (tuple(unitary(m, q) for q, m in enumerate(mats)),))


def _finite_family(family: str) -> np.ndarray | None:
    if family == "identity":
        return np.array([G.I2])
    if family == "pauli1":
        return np.array([G.I2, G.X, G.Y, G.Z])
    if family == "clifford1":
        return clifford_group(1)
    return None


def draw_member(spec: EnsembleSpec, rng: np.random.Generator) -> Circuit:
    elems = _finite_family(spec.family)
    if elems is not None:
        return _product_circuit([elems[rng.integers(len(elems))] for _ in range(spec.n)])
    rows = spec.rows if spec.rows is not None else 1
    cols = spec.cols if spec.cols is not None else spec.n
    u, _ = build_u_theta(rows, cols, spec.d, spec.theta, int(rng.integers(2**31)))
    return Circuit(u.n, u.layers)


@dataclass
class FramePotential:
    mean: float
    stderr: float
    pairs: int
    not_peaked_pairs: int
    lower_bound: float
    in_band: bool

    def to_dict(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "pairs": self.pairs,
                "not_peaked_pairs": self.not_peaked_pairs, "lower_bound": self.lower_bound,
                "in_band": self.in_band}


def design_lower_bound(n: int, k: int) -> float:
    return math.factorial(k) / 2 ** (2 * n * k)


def _summary(values: list[float], spec: EnsembleSpec, not_peaked: int, tol: float) -> FramePotential:
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    stderr = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
    lb = design_lower_bound(spec.n, spec.k)
    return FramePotential(mean, stderr, len(arr), not_peaked, lb, lb - tol <= mean <= 1 + tol)


def frame_potential(spec: EnsembleSpec, epsilon: float, mode: str = "theory", W: int | None = None,
                    exact: bool = False) -> FramePotential:
    """Sample mean of |t(U^+ V)|^(2k) over M independent pairs.

    Pairs whose estimate is flagged not_peaked contribute 0 and are counted.
    """
    rng = make_rng(spec.seed)
    values, flagged = [], 0
    for _ in range(spec.M):
        u = draw_member(spec, rng)
        v = draw_member(spec, rng)
        est = trace_magnitude_squared(compose(v, adjoint(u)), epsilon, mode, W, exact)
        if est.status != "ok":
            flagged += 1
            values.append(0.0)
        else:
            values.append(est.value ** spec.k)
    return _summary(values, spec, flagged, tol=0.0 if exact else epsilon)


def frame_potential_exact(family: str, n: int, k: int = 1) -> float:
    """Exact frame potential of a finite product family by enumerating all pairs.

    For product ensembles t(U^+ V) factorizes over qubits, so the n-qubit value is
    the single-qubit value to the n-th power.
    """
    elems = _finite_family(family)
    if elems is None:
        raise ValueError(f"family {family!r} is not finite")
    total = 0.0
    for a in elems:
        for b in elems:
            total += abs(np.trace(a.conj().T @ b) / 2) ** (2 * k)
    return (total / len(elems) ** 2) ** n


# ---------------------------------------------------------------------------
# mean values


def _observable_matrices(observables) -> list[np.ndarray]:
    if isinstance(observables, str):
        return [G.PAULI[c] for c in observables]
    return [G.PAULI[o] if isinstance(o, str) else np.asarray(o, dtype=complex) for o in observables]


def mean_value_exact(u: Circuit, observables) -> complex:
    """<psi| O_1 x ... x O_n |psi> with psi = u|0^n> (dense oracle)."""
    psi = run(u).amplitudes.reshape((2,) * u.n) if u.n else run(u).amplitudes
    phi = psi
    for j, o in enumerate(_observable_matrices(observables)):
        phi = np.moveaxis(np.tensordot(o, phi, axes=([1], [j])), 0, j)
    return complex(np.vdot(psi.ravel(), phi.ravel()))


def pauli_mean_magnitude(u: Circuit, pauli: str, epsilon: float, mode: str = "theory",
                         W: int | None = None, embed: bool = False, exact: bool = False) -> float:
    """|<psi|P|psi>|^2; the sign of the expectation value is not recovered."""
    if len(pauli) != u.n or set(pauli) - set("IXYZ"):
        raise ValueError(f"bad Pauli string {pauli!r} for n={u.n}")
    return _mean_magnitude(u, list(pauli), epsilon, mode, W, embed, exact)


def general_mean_magnitude(u: Circuit, observables, epsilon: float, mode: str = "theory",
                           W: int | None = None, exact: bool = False) -> float:
    """|<psi|O_1 x ... x O_n|psi>|^2 for contractions O_j, via the 2n-qubit dilation."""
    return _mean_magnitude(u, observables, epsilon, mode, W, True, exact)


def _mean_magnitude(u, observables, epsilon, mode, W, embed, exact) -> float:
    c = build_mean_value_circuit(u, _observable_matrices(observables), embed=embed or None)
    if exact:
        return _clamp01(abs(run(c).amplitudes[0]) ** 2)
    est = estimate_output_probability(c, _zeros(c.n), epsilon, mode, W)
    return _clamp01(est.value)
