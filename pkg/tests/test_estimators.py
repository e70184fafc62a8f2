import numpy as np
import pytest
from hypothesis import given, strategies as st

from peakedsim import gates as G
from peakedsim.circuit import gate, identity, single_layer
from peakedsim.clifford import build_v_theta
from peakedsim.estimators import (
    EnsembleSpec, design_lower_bound, frame_potential, frame_potential_exact, frobenius_distance,
    general_mean_magnitude, mean_value_exact, pauli_mean_magnitude, trace_exact,
    trace_magnitude_squared,
)
from peakedsim.families import global_phase_variant, random_circuit, random_contraction

from _oracles import dense_unitary


def test_trace_identity():
    assert trace_magnitude_squared(identity(3), 0.05).value == pytest.approx(1, abs=1e-10)


def test_trace_z():
    assert trace_magnitude_squared(single_layer(1, [gate("z", 0)]), 0.05).value == pytest.approx(0, abs=1e-10)


def test_trace_cx():
    cx = single_layer(2, [gate("cx", 0, 1)])
    assert trace_exact(cx) == pytest.approx(0.5)
    assert trace_magnitude_squared(cx, 0.05).value == pytest.approx(0.25, abs=0.05)


@given(st.integers(1, 4), st.integers(0, 8), st.integers(0, 10_000))
def test_trace_routes_agree(n, g, seed):
    u = random_circuit(n, g, seed)
    t = np.trace(dense_unitary(u)) / 2 ** n
    assert abs(trace_magnitude_squared(u, 0.05, exact=True).value - abs(t) ** 2) < 1e-10
    assert abs(trace_magnitude_squared(u, 0.05).value - abs(t) ** 2) < 0.05


def test_frobenius_examples():
    u = random_circuit(3, 6, seed=1)
    assert frobenius_distance(u, u, 0.05) == pytest.approx(0, abs=1e-6)
    assert frobenius_distance(u, global_phase_variant(u, 0.7), 0.05) == pytest.approx(0, abs=1e-6)
    z = single_layer(2, [gate("z", 0)])
    assert frobenius_distance(identity(2), z, 0.05) == pytest.approx(2, abs=1e-9)


def test_frame_potential_identity():
    fp = frame_potential(EnsembleSpec("identity", 2, k=2, M=5), 0.05)
    assert fp.mean == pytest.approx(1, abs=1e-9)


def test_frame_potential_enumerated():
    assert frame_potential_exact("pauli1", 1, 1) == 0.25
    assert frame_potential_exact("clifford1", 1, 1) == pytest.approx(0.25, abs=1e-12)
    assert frame_potential_exact("identity", 3, 2) == 1.0
    assert design_lower_bound(1, 1) == 0.25


def test_frame_potential_sampled_clifford():
    fp = frame_potential(EnsembleSpec("clifford1", 1, k=1, M=300, seed=4), 0.05)
    assert abs(fp.mean - 0.25) <= 3 * fp.stderr
    assert fp.in_band and fp.not_peaked_pairs == 0


def test_frame_potential_brickwork_in_band():
    fp = frame_potential(EnsembleSpec("brickwork", 3, M=200, rows=1, cols=3, d=2, theta=0.2), 0.05, exact=True)
    # the ensemble value lies in the band; the sample mean may sit a few standard errors off
    assert fp.mean + 3 * fp.stderr >= fp.lower_bound and fp.mean <= 1


def test_pauli_mean_examples():
    h = single_layer(1, [gate("h", 0)])
    assert pauli_mean_magnitude(h, "X", 0.1) == pytest.approx(1, abs=1e-9)
    assert pauli_mean_magnitude(identity(1), "Z", 0.1) == pytest.approx(1, abs=1e-9)


def test_pauli_mean_v_theta_n12():
    c = build_v_theta(3, 4, 3, 0.1, seed=6).circuit
    rng = np.random.default_rng(6)
    pos = rng.choice(12, 3, replace=False)
    p = ["I"] * 12
    for q in pos:
        p[q] = str(rng.choice(list("XYZ")))
    p = "".join(p)
    oracle = abs(mean_value_exact(c, p)) ** 2
    assert abs(pauli_mean_magnitude(c, p, 0.1) - oracle) <= 0.1


def test_general_mean_examples():
    u = random_circuit(3, 6, seed=2)
    assert general_mean_magnitude(u, [G.I2] * 3, 0.1) == pytest.approx(1, abs=1e-9)
    assert general_mean_magnitude(u, [G.X, np.zeros((2, 2)), G.Z], 0.1) == pytest.approx(0, abs=1e-9)


@pytest.mark.parametrize("seed", range(3))
def test_general_mean_contractions_n5(seed):
    rng = np.random.default_rng(seed)
    u = random_circuit(5, 8, seed)
    obs = [random_contraction(rng) for _ in range(5)]
    oracle = abs(mean_value_exact(u, obs)) ** 2
    assert abs(general_mean_magnitude(u, obs, 0.1) - oracle) <= 0.1
