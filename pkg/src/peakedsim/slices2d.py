"""Sampling 2D shallow circuits through heavy slices and a signed pseudomixture.

Grid qubit ``r * cols + c`` sits at row ``r``, column ``c``. A slice is a
full-height block of consecutive columns; it is heavy when its all-zeros
marginal is at least 0.99. Regions V^1, H^1, ..., V^T, H^T partition the
columns from left to right and heavy slices are chosen inside each H^j.

For each region the superoperator A^j sums, over nonempty subsets w of its
slices, (-1)^(|w|+1) times "reset the slices in w to |0>, measure the rest".
The diagonal of sigma = A^1 ... A^T(rho) on any set of qubits is a sum over
one subset per region. Tracing the chosen slices cuts the grid into
independent column segments, so each term is a product of segment marginals
and the sum collapses to a chain of L x L matrix products, L = 2^l - 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuit import Circuit, cone_subcircuit, int_to_bits, lightcones
from .clifford import make_rng
from .config import LimitExceeded, window_limit
from .peaked import compute_flip_frame
from .statevec import run, subset_distribution

HEAVY_THRESHOLD = 0.99
SLICE_DEFECT = 0.02


class GridTooSmall(ValueError):
    """The grid cannot host the requested region partition."""


class NotPeaked(RuntimeError):
    """Some region has fewer heavy slices than required."""


def grid_dims(circuit: Circuit) -> tuple[int, int]:
    if circuit.layout is None or len(circuit.layout) != 2:
        raise ValueError("circuit needs a 2D grid layout")
    return int(circuit.layout[0]), int(circuit.layout[1])


def column_qubits(rows: int, cols: int, c0: int, c1: int) -> list[int]:
    """Qubits of columns c0..c1 in column-major order."""
    return [r * cols + c for c in range(c0, c1 + 1) for r in range(rows)]


def column_major(rows: int, cols: int) -> list[int]:
    return column_qubits(rows, cols, 0, cols - 1)


def horizontal_reach(circuit: Circuit) -> int:
    """Largest column distance between a qubit and a member of its backward cone."""
    rows, cols = grid_dims(circuit)
    lc = lightcones(circuit)
    reach = 0
    for j, cone in enumerate(lc.backward):
        cj = j % cols
        reach = max(reach, max(abs(k % cols - cj) for k in cone))
    return reach


def ell_theory(n: int, epsilon: float) -> int:
    """ceil(ln(4 sqrt(n) / epsilon))."""
    return math.ceil(math.log(4 * math.sqrt(n) / epsilon))


def pseudomixture_bound(T: int, ell: int) -> float:
    """T 0.02^l exp(T 0.02^l): bound on the 1-norm gap between prod A^j and prod M^j."""
    x = T * SLICE_DEFECT ** ell
    return x * math.exp(x)


def ell_tight(T: int, epsilon: float) -> int:
    """Smallest l whose pseudomixture bound is at most epsilon / 2."""
    ell = 1
    while pseudomixture_bound(T, ell) > epsilon / 2:
        ell += 1
    return ell


@dataclass(frozen=True)
class RegionPartition:
    rows: int
    cols: int
    T: int
    reach: int
    width: int
    ell: int
    rule: str
    regions: tuple[tuple[str, int, int], ...]
    candidates: tuple[tuple[tuple[int, int], ...], ...]

    @property
    def W_reg(self) -> int:
        return max(c1 - c0 + 1 for _, c0, c1 in self.regions)

    @property
    def n(self) -> int:
        return self.rows * self.cols

    def covered_columns(self) -> set[int]:
        out: set[int] = set()
        for _, c0, c1 in self.regions:
            out.update(range(c0, c1 + 1))
        return out


def _regions_from_h(cols: int, h_bounds: list[tuple[int, int]]) -> tuple[tuple[str, int, int], ...]:
    regions = []
    prev = -1
    for j, (h0, h1) in enumerate(h_bounds):
        regions.append((f"V{j + 1}", prev + 1, h0 - 1))
        last = j == len(h_bounds) - 1
        regions.append((f"H{j + 1}", h0, cols - 1 if last else h1))
        prev = h1
    return tuple(regions)


def partition_regions(circuit: Circuit, epsilon: float, a: float = 1.0, rule: str = "theory",
                      T: int | None = None) -> RegionPartition:
    """Split the columns into V^1 H^1 ... V^T H^T and place candidate slices in each H^j.

    Slices are 2 r + 1 columns wide, where r is the measured horizontal reach of
    the backward lightcones, and consecutive candidates leave 2 r columns between
    them so that all candidates are lightcone-separated.

    ``rule="theory"`` uses N candidates per H region with N the smallest integer
    satisfying 2 a ln(n) / N <= ln(1/0.99) and N / 2 >= ln(4 sqrt(n) / epsilon),
    equal region widths N (w + 2r), and l = ceil(ln(4 sqrt(n) / epsilon)).
    ``rule="tight"`` packs as many candidates as fit and takes the smallest l with
    T 0.02^l exp(T 0.02^l) <= epsilon / 2.
    """
    rows, cols = grid_dims(circuit)
    n = rows * cols
    reach = horizontal_reach(circuit)
    w = 2 * reach + 1
    pitch = w + 2 * reach
    if rule == "theory":
        N = max(math.ceil(2 * a * math.log(n) / math.log(1 / HEAVY_THRESHOLD)),
                math.ceil(2 * math.log(4 * math.sqrt(n) / epsilon)))
        W_reg = N * pitch
        T_fit = cols // (2 * W_reg)
        if T_fit < 1:
            raise GridTooSmall(f"{rows}x{cols} grid cannot hold 2 regions of width {W_reg} "
                               f"({N} candidates of pitch {pitch})")
        T_used = T_fit if T is None else T
        if T_used > T_fit:
            raise GridTooSmall(f"T={T_used} regions of width {W_reg} do not fit {cols} columns")
        h_bounds, cands = [], []
        for j in range(T_used):
            h0 = (2 * j + 1) * W_reg
            h_bounds.append((h0, h0 + W_reg - 1))
            cands.append(tuple((h0 + i * pitch, h0 + i * pitch + w - 1) for i in range(N)))
        ell = ell_theory(n, epsilon)
    elif rule == "tight":
        C = (cols + 2 * reach) // pitch
        if C < 1:
            raise GridTooSmall(f"{cols} columns cannot hold a slice of width {w}")
        if T is None:
            T_used = max(t for t in range(1, C + 1) if t * ell_tight(t, epsilon) <= C) \
                if C >= ell_tight(1, epsilon) else 0
        else:
            T_used = T
        if T_used < 1 or T_used * ell_tight(T_used, epsilon) > C:
            raise GridTooSmall(f"{C} candidate slots cannot give T={T_used} regions "
                               f"of {ell_tight(max(T_used, 1), epsilon)} slices")
        ell = ell_tight(T_used, epsilon)
        span = C * pitch - 2 * reach
        offset = (cols - span) // 2
        starts = [offset + i * pitch for i in range(C)]
        N = C // T_used
        h_bounds, cands = [], []
        for j in range(T_used):
            own = starts[j * N:(j + 1) * N] if j < T_used - 1 else starts[j * N:]
            cands.append(tuple((s, s + w - 1) for s in own))
            h_bounds.append((own[0], own[-1] + w - 1))
    else:
        raise ValueError(f"unknown rule {rule!r}")
    return RegionPartition(rows, cols, T_used, reach, w, ell, rule,
                           _regions_from_h(cols, h_bounds), tuple(cands))


def manual_partition(circuit: Circuit, slices_per_region: Sequence[Sequence[tuple[int, int]]],
                     ell: int | None = None) -> RegionPartition:
    """Partition whose candidates are exactly the given slices (one list per region)."""
    rows, cols = grid_dims(circuit)
    reach = horizontal_reach(circuit)
    cands = tuple(tuple((int(a), int(b)) for a, b in region) for region in slices_per_region)
    h_bounds = [(region[0][0], region[-1][1]) for region in cands]
    ell = min(len(r) for r in cands) if ell is None else ell
    return RegionPartition(rows, cols, len(cands), reach, 2 * reach + 1, ell, "manual",
                           _regions_from_h(cols, h_bounds), cands)


# ---------------------------------------------------------------------------
# exact marginals of column blocks


class ClusterDistribution:
    """Output distribution of a qubit list, as a product over independent clusters.

    The backward cone of ``qubits`` is split into connected components of its
    gate graph; each component is simulated densely and contributes the joint
    distribution of its members of ``qubits`` (kept in the given order).
    """

    def __init__(self, circuit: Circuit, qubits: Sequence[int], limit: int | None = None):
        self.qubits = list(qubits)
        lim = window_limit() if limit is None else limit
        self.clusters: list[tuple[list[int], np.ndarray]] = []
        if not self.qubits:
            return
        cone, sub = cone_subcircuit(circuit, self.qubits)
        parent = list(range(len(cone)))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for g in sub.gates():
            if len(g.qubits) == 2:
                parent[find(g.qubits[0])] = find(g.qubits[1])
        groups: dict[int, list[int]] = {}
        for i in range(len(cone)):
            groups.setdefault(find(i), []).append(i)
        local = {q: i for i, q in enumerate(cone)}
        for members in groups.values():
            member_set = set(members)
            targets = [q for q in self.qubits if local[q] in member_set]
            if not targets:
                continue
            if len(members) > lim:
                raise LimitExceeded(f"lightcone cluster of {len(members)} qubits exceeds window limit {lim}")
            index = {m: i for i, m in enumerate(members)}
            layers = tuple(tuple(g.relabel(index) for g in layer if g.qubits[0] in member_set)
                           for layer in sub.layers)
            comp = Circuit(len(members), tuple(l for l in layers if l))
            probs = run(comp, limit=lim).probabilities()
            dist = subset_distribution(probs, len(members), [index[local[q]] for q in targets])
            self.clusters.append((targets, dist))

    def marginal(self, assign: dict[int, int]) -> float:
        out = 1.0
        for targets, dist in self.clusters:
            fixed = [(i, assign[q]) for i, q in enumerate(targets) if q in assign]
            if not fixed:
                continue
            t = dist.reshape((2,) * len(targets))
            index = tuple(assign[q] if q in assign else slice(None) for q in targets)
            out *= float(np.sum(t[index]))
        return out

    def prefix_tables(self) -> list[list[np.ndarray]]:
        """Per cluster: table[k][code] = marginal of its first k targets equal to ``code``."""
        out = []
        for targets, dist in self.clusters:
            k = len(targets)
            t = dist.reshape((2,) * k)
            tables = [np.array([float(dist.sum())])]
            for i in range(1, k + 1):
                tables.append(t.sum(axis=tuple(range(i, k))).reshape(-1) if i < k else dist.copy())
            out.append(tables)
        return out

    def evaluate(self, bits: dict[int, np.ndarray]) -> np.ndarray:
        """Joint probability of full assignments given as one bit array per qubit."""
        size = len(next(iter(bits.values())))
        out = np.ones(size)
        for targets, dist in self.clusters:
            code = np.zeros(size, dtype=np.int64)
            for q in targets:
                code = (code << 1) | bits[q].astype(np.int64)
            out *= dist[code]
        return out


def _strip_qubits(circuit: Circuit, strip) -> list[int]:
    rows, cols = grid_dims(circuit)
    if isinstance(strip, tuple) and len(strip) == 2 and all(isinstance(c, (int, np.integer)) for c in strip):
        c0, c1 = strip
        if not 0 <= c0 <= c1 < cols:
            raise ValueError(f"strip {strip} outside the {cols} columns")
        return column_qubits(rows, cols, int(c0), int(c1))
    return [int(q) for q in strip]


def strip_marginal(circuit: Circuit, strip, y, limit: int | None = None) -> float:
    """Tr(rho |y><y|) on (part of) a strip.

    ``strip`` is a column range ``(c0, c1)`` or an explicit qubit list. ``y`` is
    a dict {qubit: bit} or a bitstring over all strip qubits in column-major order.
    """
    qubits = _strip_qubits(circuit, strip)
    if isinstance(y, str):
        if len(y) != len(qubits):
            raise ValueError("bitstring length must match the strip")
        assign = {q: int(b) for q, b in zip(qubits, y)}
    else:
        assign = {int(q): int(b) for q, b in dict(y).items()}
        if set(assign) - set(qubits):
            raise ValueError("assignment mentions qubits outside the strip")
    return ClusterDistribution(circuit, sorted(assign, key=qubits.index), limit).marginal(assign)


def slice_zero_probability(circuit: Circuit, sl: tuple[int, int], limit: int | None = None) -> float:
    rows, cols = grid_dims(circuit)
    qs = column_qubits(rows, cols, *sl)
    return strip_marginal(circuit, qs, {q: 0 for q in qs}, limit)


def slice_defect(circuit: Circuit, sl: tuple[int, int], limit: int | None = None) -> float:
    """||M_s(rho) - E_s(rho)||_1, which equals 2 (1 - Pr[slice reads all zeros])."""
    return 2 * (1 - slice_zero_probability(circuit, sl, limit))


# ---------------------------------------------------------------------------
# heavy slices


@dataclass(frozen=True)
class HeavySlicePlan:
    partition: RegionPartition
    slices: tuple[tuple[tuple[int, int], ...], ...]  # per region, sorted by column
    ell: int
    heaviness: dict = field(default_factory=dict)

    @property
    def T(self) -> int:
        return len(self.slices)

    @property
    def L(self) -> int:
        return 2 ** self.ell - 1

    def all_slices(self) -> list[tuple[int, int]]:
        return [s for region in self.slices for s in region]

    def to_dict(self) -> dict:
        return {"regions": [{"name": nm, "cols": [c0, c1]} for nm, c0, c1 in self.partition.regions],
                "slices": [list(s) for s in self.all_slices()],
                "ell": self.ell, "L": self.L, "T": self.T,
                "heaviness": {f"{a}-{b}": p for (a, b), p in self.heaviness.items()},
                "rule": self.partition.rule}


def slices_separated(circuit: Circuit, slices: Sequence[tuple[int, int]]) -> bool:
    rows, cols = grid_dims(circuit)
    lc = lightcones(circuit)
    cones = [lc.of(column_qubits(rows, cols, *s)) for s in slices]
    return all(not (cones[i] & cones[j]) for i in range(len(cones)) for j in range(i + 1, len(cones)))


def find_heavy_slices(circuit: Circuit, partition: RegionPartition, epsilon: float | None = None,
                      threshold: float = HEAVY_THRESHOLD, limit: int | None = None) -> HeavySlicePlan:
    """Test every candidate; keep the l heaviest per region or raise NotPeaked."""
    chosen, heaviness = [], {}
    for j, cands in enumerate(partition.candidates):
        probs = [(slice_zero_probability(circuit, c, limit), c) for c in cands]
        for p, c in probs:
            heaviness[c] = p
        heavy = sorted((pc for pc in probs if pc[0] >= threshold), key=lambda pc: -pc[0])
        if len(heavy) < partition.ell:
            raise NotPeaked(f"region H{j + 1}: {len(heavy)} heavy slices among {len(cands)} "
                            f"candidates, need {partition.ell}")
        chosen.append(tuple(sorted(c for _, c in heavy[:partition.ell])))
    if not slices_separated(circuit, [s for r in chosen for s in r]):
        raise AssertionError("candidate slices are not lightcone-separated")
    return HeavySlicePlan(partition, tuple(chosen), partition.ell, heaviness)


def manual_plan(circuit: Circuit, slices_per_region: Sequence[Sequence[tuple[int, int]]]) -> HeavySlicePlan:
    """Plan with the given slices and no heaviness requirement (for exact identities)."""
    part = manual_partition(circuit, slices_per_region)
    ells = {len(r) for r in part.candidates}
    if len(ells) != 1:
        raise ValueError("every region needs the same number of slices")
    if not slices_separated(circuit, [s for r in part.candidates for s in r]):
        raise ValueError("slices are not lightcone-separated")
    return HeavySlicePlan(part, part.candidates, ells.pop(), {})


# ---------------------------------------------------------------------------
# pseudomixture


class PseudomixtureSpec:
    """Signed decomposition of sigma = A^1 ... A^T(rho) for a fixed plan.

    Term index a in 1..L of a region encodes the subset w of its slices as a
    bitmask; the sign is f_a = (-1)^(|w|+1).
    """

    def __init__(self, circuit: Circuit, plan: HeavySlicePlan, limit: int | None = None):
        self.circuit = circuit
        self.plan = plan
        self.rows, self.cols = grid_dims(circuit)
        self.limit = limit
        self.slices = plan.all_slices()
        self.m = len(self.slices)
        self.T = plan.T
        self.ell = plan.ell
        self.L = plan.L
        self.slice_qubits = [column_qubits(self.rows, self.cols, *s) for s in self.slices]
        self.traced: list[list[tuple[int, ...]]] = []
        for j in range(self.T):
            base = j * self.ell
            self.traced.append([tuple(base + i for i in range(self.ell) if (a >> i) & 1)
                                for a in range(1, self.L + 1)])
        self.signs = np.array([(-1) ** (bin(a).count("1") + 1) for a in range(1, self.L + 1)], dtype=float)
        self._segments: dict[tuple[int, int], ClusterDistribution] = {}

    def segment_qubits(self, i: int, k: int) -> list[int]:
        """Columns strictly between slice i and slice k (-1 and m denote the grid edges)."""
        c0 = 0 if i < 0 else self.slices[i][1] + 1
        c1 = self.cols - 1 if k >= self.m else self.slices[k][0] - 1
        return column_qubits(self.rows, self.cols, c0, c1) if c0 <= c1 else []

    def segment(self, i: int, k: int) -> ClusterDistribution:
        key = (i, k)
        if key not in self._segments:
            self._segments[key] = ClusterDistribution(self.circuit, self.segment_qubits(i, k), self.limit)
        return self._segments[key]

    def segment_keys(self) -> list[tuple[int, int]]:
        keys = set()
        for j in range(self.T):
            for tr in self.traced[j]:
                keys.update(zip(tr[:-1], tr[1:]))
                if j == 0:
                    keys.add((-1, tr[0]))
                if j == self.T - 1:
                    keys.add((tr[-1], self.m))
                if j > 0:
                    for prev in self.traced[j - 1]:
                        keys.add((prev[-1], tr[0]))
        return sorted(keys)

    def chain(self, segval, zeroval, size: int):
        """Evaluate the chain v G^2 ... G^T 1 for ``size`` assignments at once.

        ``segval(i, k)`` and ``zeroval(s)`` return arrays of shape (size,).
        Returns the values and the list [v, G^2, ..., G^T] (last factor includes the
        right edge segment).
        """
        base = []
        for j in range(self.T):
            cols = []
            for a, tr in enumerate(self.traced[j]):
                val = np.full(size, self.signs[a])
                for p, q in zip(tr[:-1], tr[1:]):
                    val = val * segval(p, q)
                for s in tr:
                    val = val * zeroval(s)
                if j == self.T - 1:
                    val = val * segval(tr[-1], self.m)
                cols.append(val)
            base.append(np.stack(cols, axis=1))
        v = base[0] * np.stack([segval(-1, tr[0]) for tr in self.traced[0]], axis=1)
        factors = [v]
        for j in range(1, self.T):
            link = np.stack([np.stack([segval(prev[-1], tr[0]) for tr in self.traced[j]], axis=1)
                             for prev in self.traced[j - 1]], axis=1)  # (size, L_prev, L)
            Gj = link * base[j][:, None, :]
            factors.append(Gj)
            v = np.einsum("bi,bij->bj", v, Gj)
        return v.sum(axis=1), factors


def pseudomixture_marginal(spec: PseudomixtureSpec, S: Sequence[int], x) -> float:
    """Tr(sigma |x><x|_S x I)."""
    S = [int(q) for q in S]
    bits = [int(b) for b in x] if not isinstance(x, str) else [int(c) for c in x]
    if len(bits) != len(S):
        raise ValueError("x must assign one bit per qubit of S")
    assign = dict(zip(S, bits))

    def segval(i, k):
        qs = spec.segment_qubits(i, k)
        sub = {q: assign[q] for q in qs if q in assign}
        return np.array([spec.segment(i, k).marginal(sub) if sub else 1.0])

    def zeroval(s):
        return np.array([1.0 if all(assign.get(q, 0) == 0 for q in spec.slice_qubits[s]) else 0.0])

    val, _ = spec.chain(segval, zeroval, 1)
    return float(val[0])


def pseudomixture_diagonal(spec: PseudomixtureSpec, limit: int = 24) -> np.ndarray:
    """All 2^n diagonal entries <y|sigma|y> (small grids only)."""
    n = spec.rows * spec.cols
    if n > limit:
        raise LimitExceeded(f"full diagonal on {n} qubits exceeds {limit}")
    idx = np.arange(2 ** n, dtype=np.int64)
    bits = {q: ((idx >> (n - 1 - q)) & 1).astype(np.uint8) for q in range(n)}

    def segval(i, k):
        seg = spec.segment(i, k)
        return seg.evaluate(bits) if seg.clusters else np.ones(len(idx))

    def zeroval(s):
        ok = np.ones(len(idx), dtype=bool)
        for q in spec.slice_qubits[s]:
            ok &= bits[q] == 0
        return ok.astype(float)

    val, _ = spec.chain(segval, zeroval, len(idx))
    return val


# ---------------------------------------------------------------------------
# sampling


class _PrefixState:
    """Per-sample prefix codes for every segment cluster, advanced one qubit at a time."""

    def __init__(self, spec: PseudomixtureSpec, size: int):
        self.spec = spec
        self.size = size
        self.entries = []  # (key, tables, targets)
        self.codes: list[np.ndarray] = []
        self.lengths: list[int] = []
        self.by_qubit: dict[int, list[int]] = {}
        self.by_key: dict[tuple[int, int], list[int]] = {}
        for key in spec.segment_keys():
            seg = spec.segment(*key)
            self.by_key[key] = []
            for (targets, _), tables in zip(seg.clusters, seg.prefix_tables()):
                e = len(self.entries)
                self.entries.append((targets, tables))
                self.codes.append(np.zeros(size, dtype=np.int64))
                self.lengths.append(0)
                self.by_key[key].append(e)
                for q in targets:
                    self.by_qubit.setdefault(q, []).append(e)
        self.zero = [np.ones(size, dtype=bool) for _ in range(spec.m)]
        self.slice_of = {q: s for s, qs in enumerate(spec.slice_qubits) for q in qs}

    def _entry_value(self, e: int, q: int, b: int) -> np.ndarray:
        targets, tables = self.entries[e]
        k = self.lengths[e]
        if k < len(targets) and targets[k] == q:
            return tables[k + 1][2 * self.codes[e] + b]
        return tables[k][self.codes[e]]

    def branch_marginal(self, q: int, b: int) -> np.ndarray:
        def segval(i, k):
            out = np.ones(self.size)
            for e in self.by_key[(i, k)]:
                out = out * self._entry_value(e, q, b)
            return out

        def zeroval(s):
            z = self.zero[s]
            if self.slice_of.get(q) == s and b == 1:
                return np.zeros(self.size)
            return z.astype(float)

        val, _ = self.spec.chain(segval, zeroval, self.size)
        return val

    def advance(self, q: int, bits: np.ndarray) -> None:
        for e in self.by_qubit.get(q, []):
            self.codes[e] = 2 * self.codes[e] + bits
            self.lengths[e] += 1
        s = self.slice_of.get(q)
        if s is not None:
            self.zero[s] &= bits == 0


def sample_pseudomixture(spec: PseudomixtureSpec, count: int, seed: int = 0) -> np.ndarray:
    """Bit-by-bit sampling in column-major order; returns a (count, n) bit array.

    Each step evaluates the two branch marginals of the current prefix, clamps
    negative values to 0 and flips a coin with the normalized weights (1/2 when
    both weights vanish).
    """
    rng = make_rng(seed)
    n = spec.rows * spec.cols
    state = _PrefixState(spec, count)
    out = np.zeros((count, n), dtype=np.uint8)
    for q in column_major(spec.rows, spec.cols):
        m0 = np.clip(state.branch_marginal(q, 0), 0, None)
        m1 = np.clip(state.branch_marginal(q, 1), 0, None)
        tot = m0 + m1
        p1 = np.where(tot > 0, m1 / np.where(tot > 0, tot, 1), 0.5)
        bits = (rng.random(count) < p1).astype(np.int64)
        out[:, q] = bits
        state.advance(q, bits)
    return out


@dataclass
class Sample2DResult:
    samples: list[str]
    status: str
    plan: HeavySlicePlan
    flips: str


def sample_2d(circuit: Circuit, epsilon: float, count: int, seed: int = 0, rule: str = "tight",
              a: float = 1.0, T: int | None = None, limit: int | None = None) -> Sample2DResult:
    """Flip frame, partition, heavy slices, then bit-by-bit sampling of sigma.

    Raises NotPeaked if a region lacks heavy slices.
    """
    frame, flipped = compute_flip_frame(circuit, limit)
    part = partition_regions(flipped, epsilon, a, rule, T)
    plan = find_heavy_slices(flipped, part, epsilon, limit=limit)
    spec = PseudomixtureSpec(flipped, plan, limit)
    bits = sample_pseudomixture(spec, count, seed)
    bits ^= frame.flips[None, :]
    n = circuit.n
    weights = np.int64(1) << np.arange(n - 1, -1, -1, dtype=np.int64)
    ints = bits.astype(np.int64) @ weights
    return Sample2DResult([int_to_bits(v, n) for v in ints], "ok", plan, frame.bitstring())
