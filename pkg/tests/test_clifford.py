import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from peakedsim import gates as G
from peakedsim.circuit import Circuit, gate, single_layer, unitary
from peakedsim.clifford import (
    NonCliffordError, PauliOperator, Tableau, brickwork_pairs, build_v_theta, clifford_group,
    conjugate_pauli, fingerprints, gate_action, make_rng, random_two_qubit_clifford,
    random_two_qubit_cliffords,
)
from peakedsim.families import random_clifford_circuit
from peakedsim.statevec import run

from _oracles import dense_unitary


def _pauli_labels(k):
    return ["".join(p) for p in itertools.product("IXYZ", repeat=k)]


def test_group_sizes():
    assert len(clifford_group(1)) == 24
    assert len(clifford_group(2)) == 11_520
    assert len(set(fingerprints(clifford_group(2)).tolist())) == 11_520


def test_random_clifford_maps_paulis_to_paulis():
    rng = make_rng(5)
    for _ in range(20):
        c = random_two_qubit_clifford(rng).matrix
        for label in _pauli_labels(2)[1:]:
            p = PauliOperator.from_label(label).matrix()
            img = c @ p @ c.conj().T
            coeffs = [np.trace(PauliOperator.from_label(q).matrix().conj().T @ img) / 4
                      for q in _pauli_labels(2)]
            mags = np.sort(np.abs(coeffs))
            assert abs(mags[-1] - 1) < 1e-10 and mags[-2] < 1e-10


def test_uniform_over_group():
    keys = fingerprints(clifford_group(2))
    lookup = {k: i for i, k in enumerate(keys.tolist())}
    counts = np.zeros(len(keys), dtype=np.int64)
    rng = make_rng(2024)
    draws = 2_000_000
    for _ in range(draws // 200_000):
        mats = random_two_qubit_cliffords(rng, 200_000)
        fp = fingerprints(mats)
        counts += np.bincount([lookup[k] for k in fp.tolist()], minlength=len(keys))
    mean = draws / len(keys)
    sigma = np.sqrt(mean * (1 - 1 / len(keys)))
    assert np.max(np.abs(counts - mean)) <= 5 * sigma


def test_fixed_seed_deterministic():
    a = random_two_qubit_clifford(make_rng(7, 3))
    b = random_two_qubit_clifford(make_rng(7, 3))
    assert a.index == b.index and np.array_equal(a.matrix, b.matrix)


def test_non_clifford_rejected():
    with pytest.raises(NonCliffordError):
        gate_action(G.T)


def test_pauli_algebra_matches_matrices():
    labels = _pauli_labels(2)
    for a, b in itertools.product(labels, repeat=2):
        pa, pb = PauliOperator.from_label(a), PauliOperator.from_label(b)
        np.testing.assert_allclose((pa * pb).matrix(), pa.matrix() @ pb.matrix(), atol=1e-12)
    assert PauliOperator.from_label("-iY").label() == "-iY"


def test_conjugate_examples():
    out = conjugate_pauli(single_layer(1, [gate("h", 0)]), PauliOperator.from_label("Z"))
    assert out == PauliOperator.from_label("+X")
    out = conjugate_pauli(single_layer(2, [gate("cx", 0, 1)]), PauliOperator.from_label("IZ"))
    assert out == PauliOperator.from_label("ZZ")


@given(st.integers(0, 10_000), st.integers(1, 5), st.sampled_from(_pauli_labels(3)[1:]))
def test_conjugation_matches_dense_n8(seed, depth, local):
    c = random_clifford_circuit(8, depth, seed)
    label = local + "IIIII"
    p = PauliOperator.from_label(label)
    u = dense_unitary(c)
    expect = u.conj().T @ p.matrix() @ u
    np.testing.assert_allclose(conjugate_pauli(c, p).matrix(), expect, atol=1e-10)
    np.testing.assert_allclose(Tableau.from_circuit(c).conjugate(p).matrix(), expect, atol=1e-10)


def test_n20_tableau_matches_dense_on_8_qubit_block():
    big = random_clifford_circuit(20, 6, seed=17)
    inside = lambda g: all(q < 8 for q in g.qubits) or all(q >= 8 for q in g.qubits)  # noqa: E731
    big = Circuit(20, tuple(tuple(g for g in layer if inside(g)) for layer in big.layers))
    small = Circuit(8, tuple(tuple(g for g in layer if g.qubits[0] < 8) for layer in big.layers))
    tab = Tableau.from_circuit(big)
    assert tab.is_symplectic()
    u = dense_unitary(small)
    for j in range(8):
        for kind in "XZ":
            label = "I" * j + kind + "I" * (19 - j)
            img = tab.conjugate(PauliOperator.from_label(label))
            assert not img.x[8:].any() and not img.z[8:].any()
            head = PauliOperator(img.x[:8], img.z[:8], img.phase)
            p = PauliOperator.from_label(label[:8]).matrix()
            np.testing.assert_allclose(head.matrix(), u.conj().T @ p @ u, atol=1e-10)


def test_brickwork_pairs_cover_grid_edges():
    rows, cols = 3, 4
    pairs = set()
    for kind in ("h-even", "h-odd", "v-even", "v-odd"):
        layer = brickwork_pairs(rows, cols, kind)
        used = [q for p in layer for q in p]
        assert len(used) == len(set(used))
        pairs |= set(layer)
    h = {(r * cols + c, r * cols + c + 1) for r in range(rows) for c in range(cols - 1)}
    v = {(r * cols + c, (r + 1) * cols + c) for r in range(rows - 1) for c in range(cols)}
    assert pairs == h | v


@pytest.mark.parametrize("rows, cols, seed", [(2, 2, 0), (3, 3, 1), (3, 4, 2), (4, 4, 3), (4, 4, 4)])
def test_v_zero_is_peaked_at_z(rows, cols, seed):
    vt = build_v_theta(rows, cols, 3, 0.0, seed)
    amp = run(vt.circuit).amplitudes[int(vt.peak, 2)]
    assert abs(abs(amp) - 1) < 1e-10


def test_v_theta_peak_decreases_with_theta():
    p = []
    for theta in (0.1, 0.2):
        vt = build_v_theta(4, 4, 3, theta, seed=11)
        p.append(abs(run(vt.circuit).amplitudes[int(vt.peak, 2)]) ** 2)
    assert 0 < p[1] < p[0] < 1


def test_v_theta_structure():
    vt = build_v_theta(3, 3, 3, 0.1, seed=2)
    assert vt.circuit.depth == 5
    assert vt.circuit.layout == (3, 3)
    assert vt.circuit.metadata["peak"] == vt.peak
    # same Cliffords at theta = 0 give the same peak
    assert build_v_theta(3, 3, 3, 0.0, seed=2).peak == vt.peak
    # V is Hermitian: V^2 = I
    u = dense_unitary(vt.circuit)
    np.testing.assert_allclose(u @ u, np.eye(2 ** 9), atol=1e-10)


def test_v_theta_custom_pattern_recorded():
    vt = build_v_theta(2, 3, 2, 0.1, seed=0, pattern=("v-even", "h-even"))
    assert vt.circuit.metadata["pattern"] == ["v-even", "h-even"]
