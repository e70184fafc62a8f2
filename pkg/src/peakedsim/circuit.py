"""Layered circuit representation, lightcones, builders and the JSON file format.

Qubit 0 is the most significant bit of every computational-basis label, so the
bitstring ``"100"`` on three qubits is index 4.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import gates as G

UNITARY_TOL = 1e-10
JSON_VERSION = 1


class CircuitError(ValueError):
    """Malformed circuit or gate."""


@dataclass(frozen=True, eq=False)
class Gate:
    name: str
    qubits: tuple[int, ...]
    matrix: np.ndarray
    theta: float | None = None

    def __post_init__(self):
        qs = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "qubits", qs)
        if len(qs) not in (1, 2):
            raise CircuitError(f"gate {self.name!r} acts on {len(qs)} qubits; only 1 or 2 allowed")
        if len(set(qs)) != len(qs):
            raise CircuitError(f"gate {self.name!r} repeats a qubit: {qs}")
        m = np.asarray(self.matrix, dtype=complex)
        dim = 2 ** len(qs)
        if m.shape != (dim, dim):
            raise CircuitError(f"gate {self.name!r} on {qs} needs a {dim}x{dim} matrix, got {m.shape}")
        err = G.unitarity_error(m)
        if err > UNITARY_TOL:
            raise CircuitError(f"gate {self.name!r} on {qs} is not unitary (error {err:.3g})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def is_named(self) -> bool:
        return self.name != "unitary"

    def adjoint(self) -> "Gate":
        if self.name in ("rz", "r"):
            return Gate(self.name, self.qubits, self.matrix.conj().T, -self.theta)
        if self.is_named:
            return Gate(G.ADJOINT_NAME[self.name], self.qubits, self.matrix.conj().T)
        return Gate("unitary", self.qubits, self.matrix.conj().T)

    def relabel(self, mapping) -> "Gate":
        return Gate(self.name, tuple(mapping[q] for q in self.qubits), self.matrix, self.theta)

    def same_as(self, other: "Gate", atol: float = 1e-12) -> bool:
        return self.qubits == other.qubits and np.allclose(self.matrix, other.matrix, atol=atol, rtol=0)

    def __repr__(self):
        t = "" if self.theta is None else f", theta={self.theta:g}"
        return f"Gate({self.name!r}, {self.qubits}{t})"


def gate(name: str, *qubits: int, theta: float | None = None) -> Gate:
    """Named gate, e.g. ``gate("cx", 0, 1)`` or ``gate("rz", 2, theta=0.3)``."""
    name = name.lower()
    mat = G.named_matrix(name, theta)
    if G.num_qubits_of(name) != len(qubits):
        raise CircuitError(f"gate {name!r} takes {G.num_qubits_of(name)} qubit(s), got {qubits}")
    return Gate(name, tuple(qubits), mat, None if theta is None else float(theta))


def unitary(matrix, *qubits: int) -> Gate:
    return Gate("unitary", tuple(qubits), np.asarray(matrix, dtype=complex))


@dataclass(frozen=True, eq=False)
class Circuit:
    """An ``n``-qubit circuit as a sequence of layers of disjoint gates.

    ``layout`` is ``None`` or the grid side lengths, e.g. ``(rows, cols)`` for a
    2D grid where qubit ``r * cols + c`` sits at row ``r``, column ``c``.
    """

    n: int
    layers: tuple[tuple[Gate, ...], ...] = ()
    layout: tuple[int, ...] | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 0:
            raise CircuitError("qubit count must be non-negative")
        layers = tuple(tuple(layer) for layer in self.layers)
        for li, layer in enumerate(layers):
            used: set[int] = set()
            for g in layer:
                for q in g.qubits:
                    if not 0 <= q < self.n:
                        raise CircuitError(f"layer {li}: qubit {q} out of range for n={self.n}")
                    if q in used:
                        raise CircuitError(f"layer {li}: overlapping gate supports on qubit {q}")
                    used.add(q)
        object.__setattr__(self, "layers", layers)
        if self.layout is not None:
            dims = tuple(int(d) for d in self.layout)
            if int(np.prod(dims)) != self.n:
                raise CircuitError(f"layout {dims} does not hold {self.n} qubits")
            object.__setattr__(self, "layout", dims)

    @property
    def depth(self) -> int:
        return len(self.layers)

    def gates(self) -> Iterable[Gate]:
        for layer in self.layers:
            yield from layer

    def num_gates(self) -> int:
        return sum(len(layer) for layer in self.layers)

    def same_as(self, other: "Circuit", atol: float = 1e-12) -> bool:
        if self.n != other.n or self.depth != other.depth:
            return False
        for la, lb in zip(self.layers, other.layers):
            if len(la) != len(lb):
                return False
            if not all(a.same_as(b, atol) for a, b in zip(la, lb)):
                return False
        return True

    def with_metadata(self, **extra) -> "Circuit":
        return Circuit(self.n, self.layers, self.layout, {**self.metadata, **extra})

    def __repr__(self):
        return f"Circuit(n={self.n}, depth={self.depth}, gates={self.num_gates()})"


def depth(circuit: Circuit) -> int:
    return circuit.depth


def from_gates(n: int, gate_list: Iterable[Gate], layout=None, metadata=None) -> Circuit:
    """Pack gates greedily into the earliest layer after their predecessors."""
    level = [0] * n
    layers: list[list[Gate]] = []
    for g in gate_list:
        t = max(level[q] for q in g.qubits)
        if t == len(layers):
            layers.append([])
        layers[t].append(g)
        for q in g.qubits:
            level[q] = t + 1
    return Circuit(n, tuple(tuple(l) for l in layers), layout, dict(metadata or {}))


def path_depth(circuit: Circuit) -> int:
    """Longest input-to-output path in the gate graph, counted in gates."""
    level = [0] * circuit.n
    for g in circuit.gates():
        t = max(level[q] for q in g.qubits) + 1
        for q in g.qubits:
            level[q] = t
    return max(level, default=0)


# ---------------------------------------------------------------------------
# lightcones


def _mask(qs: Iterable[int]) -> int:
    m = 0
    for q in qs:
        m |= 1 << q
    return m


def _bits(mask: int) -> frozenset[int]:
    out = []
    q = 0
    while mask:
        if mask & 1:
            out.append(q)
        mask >>= 1
        q += 1
    return frozenset(out)


def _cone_masks(circuit: Circuit, forward: bool) -> list[int]:
    gate_masks = [[_mask(g.qubits) for g in layer] for layer in circuit.layers]
    order = gate_masks if forward else gate_masks[::-1]
    cones = []
    for j in range(circuit.n):
        cone = 1 << j
        for layer in order:
            for gm in layer:
                if gm & cone:
                    cone |= gm
        cones.append(cone)
    return cones


@dataclass(frozen=True)
class Lightcone:
    """Backward and forward cones of every qubit.

    ``backward[j]`` is the set of input qubits that can influence output qubit
    ``j``; ``forward[j]`` is the set of outputs that input ``j`` can influence.
    ``K`` is the largest number of other qubits whose backward cone meets the
    backward cone of a given qubit.
    """

    backward: tuple[frozenset[int], ...]
    forward: tuple[frozenset[int], ...]
    K: int

    def of(self, qubits: Iterable[int]) -> frozenset[int]:
        out: set[int] = set()
        for q in qubits:
            out |= self.backward[q]
        return frozenset(out)

    def separated(self, a: Iterable[int], b: Iterable[int]) -> bool:
        return not (self.of(a) & self.of(b))

    def dependents(self, j: int) -> frozenset[int]:
        cone = self.backward[j]
        return frozenset(k for k in range(len(self.backward)) if k != j and cone & self.backward[k])


def lightcones(circuit: Circuit) -> Lightcone:
    back = _cone_masks(circuit, forward=False)
    fwd = _cone_masks(circuit, forward=True)
    K = 0
    for j, cj in enumerate(back):
        K = max(K, sum(1 for k, ck in enumerate(back) if k != j and cj & ck))
    return Lightcone(tuple(_bits(m) for m in back), tuple(_bits(m) for m in fwd), K)


def cone_subcircuit(circuit: Circuit, targets: Iterable[int], forward: bool = False):
    """Gates on a directed path to (or from) ``targets``, relabelled onto the cone.

    Returns ``(qubits, sub)`` where ``qubits`` is the sorted cone and ``sub`` acts
    on ``len(qubits)`` qubits with ``qubits[i]`` mapped to ``i``.
    """
    cone = _mask(targets)
    layers = circuit.layers if forward else circuit.layers[::-1]
    kept: list[list[Gate]] = []
    for layer in layers:
        row = []
        for g in layer:
            gm = _mask(g.qubits)
            if gm & cone:
                cone |= gm
                row.append(g)
        kept.append(row)
    if not forward:
        kept.reverse()
    qubits = sorted(_bits(cone))
    index = {q: i for i, q in enumerate(qubits)}
    sub_layers = tuple(tuple(g.relabel(index) for g in row) for row in kept if row)
    return qubits, Circuit(len(qubits), sub_layers)


# ---------------------------------------------------------------------------
# composition


def adjoint(circuit: Circuit) -> Circuit:
    layers = tuple(tuple(g.adjoint() for g in layer) for layer in reversed(circuit.layers))
    return Circuit(circuit.n, layers, circuit.layout, dict(circuit.metadata))


def compose(a: Circuit, b: Circuit) -> Circuit:
    """Circuit that applies ``a`` first and then ``b``."""
    if a.n != b.n:
        raise CircuitError(f"cannot compose circuits on {a.n} and {b.n} qubits")
    layout = a.layout if a.layout == b.layout else None
    return Circuit(a.n, a.layers + b.layers, layout, {})


def relabel(circuit: Circuit, mapping: Sequence[int] | dict, n: int) -> Circuit:
    layers = tuple(tuple(g.relabel(mapping) for g in layer) for layer in circuit.layers)
    return Circuit(n, layers)


def identity(n: int, layout=None) -> Circuit:
    return Circuit(n, (), layout)


def single_layer(n: int, gate_list: Iterable[Gate], layout=None) -> Circuit:
    row = tuple(gate_list)
    return Circuit(n, (row,) if row else (), layout)


# ---------------------------------------------------------------------------
# constructive builders


def build_trace_circuit(u: Circuit) -> Circuit:
    """2n-qubit circuit whose all-zeros amplitude equals Tr(u) / 2^n.

    Qubits ``0..n-1`` carry ``u``; qubit ``n + i`` is the Bell partner of qubit ``i``.
    """
    n = u.n
    prep_h = tuple(gate("h", n + i) for i in range(n))
    prep_cx = tuple(gate("cx", n + i, i) for i in range(n))
    layers = (prep_h, prep_cx) + u.layers + (prep_cx, prep_h)
    layers = tuple(l for l in layers if l)
    return Circuit(2 * n, layers, None, {"family": "trace", "n": n})


def embed_observable(o) -> np.ndarray:
    """Two-qubit unitary B with (I x <0|) B (I x |0>) = o, ancilla as second factor.

    Uses the block dilation [[o, sqrt(I - o o^+)], [sqrt(I - o^+ o), -o^+]].
    """
    o = np.asarray(o, dtype=complex)
    if o.shape != (2, 2):
        raise CircuitError("observable must be a 2x2 matrix")
    norm = np.linalg.norm(o, 2)
    if norm > 1 + 1e-12:
        raise CircuitError(f"observable norm {norm:.6g} exceeds 1")
    eye = np.eye(2)
    dil = np.block([
        [o, G.psd_sqrt(eye - o @ o.conj().T)],
        [G.psd_sqrt(eye - o.conj().T @ o), -o.conj().T],
    ])
    # dil is ancilla-major; reorder to system (x) ancilla
    return G.SWAP @ dil @ G.SWAP


def build_purification(v: Circuit, region_a: Sequence[int], z) -> Circuit:
    """Q(z) = (I_A x V_{A'B}^+)(V_{AB} x X(z)_{A'}).

    The original qubits keep their labels; the copy ``A'`` of ``region_a`` is
    appended as qubits ``n .. n + |A| - 1`` in the order given by ``region_a``.
    """
    n = v.n
    region_a = list(region_a)
    if len(set(region_a)) != len(region_a) or any(not 0 <= q < n for q in region_a):
        raise CircuitError(f"invalid region {region_a} for n={n}")
    zbits = _as_bits(z, len(region_a))
    m = n + len(region_a)
    prime = {q: n + i for i, q in enumerate(region_a)}
    to_prime = [prime.get(q, q) for q in range(n)]

    flips = tuple(gate("x", n + i) for i, b in enumerate(zbits) if b)
    fwd = [list(layer) for layer in v.layers]
    if flips:
        if fwd:
            fwd[0].extend(flips)
        else:
            fwd.append(list(flips))
    back = relabel(adjoint(v), to_prime, m)
    layers = tuple(tuple(l) for l in fwd) + back.layers
    return Circuit(m, layers, None, {"family": "purification", "region": region_a,
                                      "z": "".join(map(str, zbits))})


def build_mean_value_circuit(u: Circuit, observables: Sequence, embed: bool | None = None) -> Circuit:
    """Circuit whose all-zeros amplitude is <0|u^+ (O_1 x ... x O_n) u|0>.

    With unitary observables this is ``u``, one observable layer, then ``u^+``
    on ``n`` qubits. Otherwise (or with ``embed=True``) every observable is
    dilated onto an ancilla ``n + j`` by :func:`embed_observable`.
    """
    n = u.n
    if len(observables) != n:
        raise CircuitError(f"need {n} observables, got {len(observables)}")
    mats = [G.PAULI[o] if isinstance(o, str) else np.asarray(o, dtype=complex) for o in observables]
    for j, o in enumerate(mats):
        if np.linalg.norm(o, 2) > 1 + 1e-12:
            raise CircuitError(f"observable {j} has norm above 1")
    all_unitary = all(G.unitarity_error(o) <= UNITARY_TOL for o in mats)
    if embed is None:
        embed = not all_unitary
    if not embed:
        if not all_unitary:
            raise CircuitError("non-unitary observables require the embedded construction")
        middle = tuple(unitary(o, j) for j, o in enumerate(mats) if not np.allclose(o, G.I2, atol=1e-14))
        layers = u.layers + ((middle,) if middle else ()) + adjoint(u).layers
        return Circuit(n, layers, u.layout, {"family": "mean_value", "embedded": False})
    m = 2 * n
    ul = relabel(u, list(range(n)), m)
    middle = tuple(unitary(embed_observable(o), j, n + j) for j, o in enumerate(mats))
    layers = ul.layers + (middle,) + relabel(adjoint(u), list(range(n)), m).layers
    return Circuit(m, layers, None, {"family": "mean_value", "embedded": True})


# ---------------------------------------------------------------------------
# bitstrings


def _as_bits(z, length: int) -> list[int]:
    if isinstance(z, str):
        bits = [int(c) for c in z]
    elif isinstance(z, (int, np.integer)):
        bits = [(int(z) >> (length - 1 - i)) & 1 for i in range(length)]
    else:
        bits = [int(b) for b in z]
    if len(bits) != length or any(b not in (0, 1) for b in bits):
        raise CircuitError(f"expected a bitstring of length {length}, got {z!r}")
    return bits


def bits_to_int(bits) -> int:
    if isinstance(bits, str):
        return int(bits, 2) if bits else 0
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def int_to_bits(x: int, n: int) -> str:
    return format(int(x), f"0{n}b") if n else ""


# ---------------------------------------------------------------------------
# JSON


def _enc_matrix(m: np.ndarray):
    return [[float(v.real), float(v.imag)] for v in np.asarray(m).ravel()]


def _dec_matrix(entries, dim: int) -> np.ndarray:
    arr = np.asarray(entries, dtype=float)
    if arr.shape != (dim * dim, 2):
        raise CircuitError(f"matrix needs {dim * dim} [re, im] entries")
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(dim, dim)


def to_dict(circuit: Circuit) -> dict:
    layers = []
    for layer in circuit.layers:
        row = []
        for g in layer:
            entry = {"gate": g.name, "qubits": list(g.qubits)}
            if g.theta is not None:
                entry["theta"] = g.theta
            if not g.is_named:
                entry["matrix"] = _enc_matrix(g.matrix)
            row.append(entry)
        layers.append(row)
    layout = {"type": "none"} if circuit.layout is None else {"type": "grid", "dims": list(circuit.layout)}
    return {"version": JSON_VERSION, "n": circuit.n, "layout": layout, "layers": layers,
            "metadata": circuit.metadata}


def from_dict(data: dict) -> Circuit:
    if data.get("version") != JSON_VERSION:
        raise CircuitError(f"unsupported circuit version {data.get('version')!r}")
    n = int(data["n"])
    layout_spec = data.get("layout") or {"type": "none"}
    if layout_spec.get("type") == "grid":
        layout = tuple(int(d) for d in layout_spec["dims"])
    elif layout_spec.get("type") == "none":
        layout = None
    else:
        raise CircuitError(f"unknown layout type {layout_spec.get('type')!r}")
    layers = []
    for row in data.get("layers", []):
        out = []
        for entry in row:
            name = str(entry["gate"]).lower()
            qubits = tuple(int(q) for q in entry["qubits"])
            if name == "unitary":
                out.append(unitary(_dec_matrix(entry["matrix"], 2 ** len(qubits)), *qubits))
            else:
                try:
                    out.append(gate(name, *qubits, theta=entry.get("theta")))
                except ValueError as exc:
                    raise CircuitError(str(exc)) from exc
        layers.append(tuple(out))
    return Circuit(n, tuple(layers), layout, dict(data.get("metadata") or {}))


def save(circuit: Circuit, path) -> None:
    Path(path).write_text(json.dumps(to_dict(circuit), indent=1))


def load(path) -> Circuit:
    return from_dict(json.loads(Path(path).read_text()))
