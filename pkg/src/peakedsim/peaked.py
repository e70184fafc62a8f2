"""Sparse approximation of peaked shallow-circuit output states.

Pipeline: flip frame (so every qubit prefers 0), parent-Hamiltonian compression
onto the Hamming ball of radius W around 0^n, largest eigenpair, success test.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import BoundedWeightBasis, dimension
from .circuit import Circuit, Gate, bits_to_int, int_to_bits, lightcones
from .clifford import make_rng
from .eigen import EigenNonConvergence, EigenResult, largest_eigenpair
from .gates import X
from .projected_ham import ProjectedHamiltonian
from .statevec import run, single_qubit_means

MODES = ("theory", "practical")


class NotPeakedError(RuntimeError):
    """Raised by callers that require a certified state."""


def delta_for(epsilon: float, n: int) -> float:
    return epsilon ** 4 / (144 * n ** 2)


def weight_cutoff(K: int, delta: float) -> int:
    """ceil((25/6)(K+1) ln(1/delta))."""
    return math.ceil(25 / 6 * (K + 1) * math.log(1 / delta))


def success_threshold(delta: float) -> float:
    return 1 - 3 * math.sqrt(delta)


def error_bound(n: int, lambda1: float) -> float:
    """Upper bound 2 sqrt(n (1 - lambda1)) on the 1-norm error of P'."""
    return 2 * math.sqrt(n * max(0.0, 1 - lambda1))


def mean_weight_bound(K: int, p_max: float) -> float:
    return (K + 1) * math.log(1 / p_max)


def guarantee_epsilon(n: int, p_max: float) -> float:
    """Smallest epsilon for which the success test is guaranteed: 3 sqrt(n) P_max^(9/50)."""
    return 3 * math.sqrt(n) * p_max ** (9 / 50)


@dataclass(frozen=True)
class PeakedParams:
    n: int
    epsilon: float
    mode: str
    delta: float
    K: int
    W: int
    success_threshold: float
    W_formula: int | None = None
    a: float | None = None

    @property
    def D(self) -> int:
        return dimension(self.n, self.W)

    def to_dict(self) -> dict:
        return {"n": self.n, "epsilon": self.epsilon, "mode": self.mode, "delta": self.delta,
                "K": self.K, "W": self.W, "W_formula": self.W_formula, "a": self.a,
                "threshold": self.success_threshold}


def select_params(circuit: Circuit, epsilon: float, mode: str = "theory", W: int | None = None,
                  a: float | None = None) -> PeakedParams:
    """Theory mode derives W from epsilon; practical mode takes W from the caller.

    The theory cutoff is clamped to n because larger radii add no strings.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    n = circuit.n
    delta = delta_for(epsilon, n)
    K = lightcones(circuit).K
    formula = weight_cutoff(K, delta)
    if mode == "theory":
        if W is not None:
            raise ValueError("theory mode derives W; do not pass an override")
        W_used = min(formula, n)
    else:
        if W is None:
            raise ValueError("practical mode needs W")
        if not 0 <= W <= n:
            raise ValueError(f"W must lie in [0, {n}]")
        W_used = int(W)
    dimension(n, W_used)
    return PeakedParams(n, float(epsilon), mode, delta, K, W_used, success_threshold(delta), formula, a)


@dataclass(frozen=True)
class FlipFrame:
    flips: np.ndarray
    means: np.ndarray

    @property
    def mask(self) -> int:
        return bits_to_int(self.flips.tolist())

    def bitstring(self) -> str:
        return "".join(str(int(b)) for b in self.flips)


def compute_flip_frame(circuit: Circuit, limit: int | None = None) -> tuple[FlipFrame, Circuit]:
    """Flip qubit j iff m_j > 1/2; the flipped circuit appends a layer of X gates."""
    means = single_qubit_means(circuit, limit)
    flips = (means > 0.5).astype(np.uint8)
    layer = tuple(Gate("x", (j,), X) for j in range(circuit.n) if flips[j])
    layers = circuit.layers + ((layer,) if layer else ())
    flipped = Circuit(circuit.n, layers, circuit.layout, dict(circuit.metadata))
    return FlipFrame(flips, means), flipped


@dataclass
class SparseState:
    """Amplitudes over the weight-<=W strings of the flip frame."""

    basis: BoundedWeightBasis
    amplitudes: np.ndarray
    flips: FlipFrame
    lambda1: float
    error_bound: float

    @property
    def n(self) -> int:
        return self.basis.n

    def probabilities(self) -> np.ndarray:
        p = np.abs(self.amplitudes) ** 2
        return p / p.sum()

    def original_strings(self) -> np.ndarray:
        """Support strings (as integers) in the original frame, in basis order."""
        return self.basis.strings() ^ np.int64(self.flips.mask)

    def probability(self, x) -> float:
        """P'(x) for ``x`` in the original frame."""
        xi = bits_to_int(x) if not isinstance(x, (int, np.integer)) else int(x)
        y = xi ^ self.flips.mask
        if bin(y).count("1") > self.basis.W:
            return 0.0
        return float(self.probabilities()[self.basis.rank(y)])

    def to_lines(self) -> list[str]:
        out = []
        for s, amp in zip(self.original_strings(), self.amplitudes):
            out.append(f"{int_to_bits(s, self.n)} {amp.real:.17g} {amp.imag:.17g}")
        return out

    def dense_probabilities(self) -> np.ndarray:
        """P' as a full 2^n vector in the original frame (small n only)."""
        p = np.zeros(2 ** self.n)
        p[self.original_strings()] = self.probabilities()
        return p

    def dense(self) -> np.ndarray:
        """Full 2^n vector in the original frame (small n only)."""
        v = np.zeros(2 ** self.n, dtype=complex)
        v[self.original_strings()] = self.amplitudes
        return v


@dataclass
class PeakedResult:
    status: str
    params: PeakedParams
    lambda1: float
    threshold: float
    error_bound: float
    flips: FlipFrame
    state: SparseState | None
    eigen: EigenResult | None = None
    extra: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    @property
    def certified(self) -> bool:
        return self.lambda1 >= self.threshold

    def to_dict(self) -> dict:
        return {"status": self.status, "lambda1": self.lambda1, "threshold": self.threshold,
                "error_bound": self.error_bound, "W": self.params.W, "D": self.params.D,
                "flips": self.flips.bitstring(), "certified": self.certified}


def approximate_state(circuit: Circuit, params: PeakedParams, tol: float = 1e-8, seed: int = 0,
                      max_iter: int = 10_000, window: int = 64, limit: int | None = None) -> PeakedResult:
    """Run the pipeline; theory mode flags not_peaked when lambda1 < 1 - 3 sqrt(delta).

    Practical mode always returns the state together with its error bound.
    """
    frame, flipped = compute_flip_frame(circuit, limit)
    G = ProjectedHamiltonian(flipped, params.W)
    G.cache_sparse()
    eig = largest_eigenpair(G.matvec, G.D, tol=tol, max_iter=max_iter, seed=seed, window=window)
    if not eig.converged:
        raise EigenNonConvergence(
            f"eigensolver stopped at residual {eig.residual:.3g} after {eig.iterations} matvecs", eig)
    lam = min(eig.lambda1, 1.0)
    bound = error_bound(circuit.n, lam)
    passed = eig.lambda1 >= params.success_threshold
    status = "ok" if (passed or params.mode == "practical") else "not_peaked"
    state = SparseState(G.basis, eig.eigvec, frame, eig.lambda1, bound) if status == "ok" else None
    return PeakedResult(status, params, eig.lambda1, params.success_threshold, bound, frame, state, eig)


def sample(state: SparseState, count: int, seed: int = 0) -> list[str]:
    """Draw from P'(x) = |<x|phi>|^2 and map back to the original frame."""
    rng = make_rng(seed)
    cdf = np.cumsum(state.probabilities())
    u = rng.random(count) * cdf[-1]
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)
    strings = state.original_strings()[idx]
    return [int_to_bits(s, state.n) for s in strings]


@dataclass
class ProbabilityEstimate:
    value: float
    status: str
    method: str
    result: PeakedResult
    samples: int = 0


def resample_count(epsilon: float, confidence: float = 0.99) -> int:
    """Hoeffding: N draws put the frequency within epsilon/2 of P'(x) w.p. >= confidence."""
    return math.ceil(2 * math.log(2 / (1 - confidence)) / epsilon ** 2)


def estimate_output_probability(circuit: Circuit, x, epsilon: float, mode: str = "theory",
                                W: int | None = None, method: str = "direct", seed: int = 0,
                                **kwargs) -> ProbabilityEstimate:
    """Estimate P(x); returns 0 with status not_peaked when the success test fails.

    ``method="direct"`` reads P'(x) off the sparse state. ``method="resample"``
    builds the state at epsilon/2 and averages indicator samples.
    """
    if method not in ("direct", "resample"):
        raise ValueError("method must be 'direct' or 'resample'")
    eps_state = epsilon if method == "direct" else epsilon / 2
    params = select_params(circuit, eps_state, mode, W)
    res = approximate_state(circuit, params, seed=seed, **kwargs)
    if not res.ok:
        return ProbabilityEstimate(0.0, res.status, method, res)
    if method == "direct":
        return ProbabilityEstimate(res.state.probability(x), "ok", method, res)
    N = resample_count(epsilon)
    target = x if isinstance(x, str) else int_to_bits(int(x), circuit.n)
    draws = sample(res.state, N, seed)
    freq = sum(1 for s in draws if s == target) / N
    return ProbabilityEstimate(freq, "ok", method, res, N)


def hamming_tail_mass(circuit: Circuit, W: int, limit: int | None = None) -> float:
    """Exact sum of P(x) over flip-frame strings of weight > W (dense oracle)."""
    frame, _ = compute_flip_frame(circuit, limit)
    probs = run(circuit, limit=limit).probabilities()
    idx = np.arange(len(probs), dtype=np.int64) ^ np.int64(frame.mask)
    w = np.bitwise_count(idx)
    return float(probs[w > W].sum())


def flipped_mean_weight(circuit: Circuit, limit: int | None = None) -> float:
    """sum_j m_j after the flip frame, i.e. sum_j min(m_j, 1 - m_j) with ties unflipped."""
    frame, _ = compute_flip_frame(circuit, limit)
    m = np.where(frame.flips == 1, 1 - frame.means, frame.means)
    return float(m.sum())
