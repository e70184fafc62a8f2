import math

import numpy as np
import pytest

from peakedsim.circuit import Circuit, gate, unitary
from peakedsim.clifford import brickwork_pairs, build_v_theta, make_rng
from peakedsim.families import haar_unitary
from peakedsim.peaked import compute_flip_frame
from peakedsim.slices2d import (
    HEAVY_THRESHOLD, GridTooSmall, NotPeaked, PseudomixtureSpec, column_qubits, ell_tight,
    find_heavy_slices, horizontal_reach, manual_plan, partition_regions, pseudomixture_bound,
    pseudomixture_diagonal, pseudomixture_marginal, sample_2d, sample_pseudomixture, slice_defect,
    slice_zero_probability, strip_marginal,
)
from peakedsim.statevec import run, subset_distribution

from _oracles import (
    dense_state, measure_qubits, reset_qubits, sigma_diagonal_bruteforce, sigma_literal, trace_norm,
)

VERTICAL_FIRST = ("v-even", "v-odd", "h-even")


def grid_identity(rows, cols):
    return Circuit(rows * cols, (), (rows, cols))


def random_grid(rows, cols, kinds, seed, single_qubit=True):
    """Haar two-qubit gates on the given brickwork layers, then random single-qubit gates."""
    rng = make_rng(seed)
    layers = [tuple(unitary(haar_unitary(4, rng), a, b) for a, b in brickwork_pairs(rows, cols, k))
              for k in kinds]
    if single_qubit:
        layers.append(tuple(unitary(haar_unitary(2, rng), q) for q in range(rows * cols)))
    return Circuit(rows * cols, tuple(l for l in layers if l), (rows, cols))


# ---------------------------------------------------------------------------
# partition


def test_16x16_theory_rule_reports_too_small():
    c = build_v_theta(16, 16, 1, 0.1, seed=0).circuit
    reach = horizontal_reach(c)
    n, eps, a = 256, 0.1, 1.0
    # smallest N with 2 a ln n / N <= ln(1/0.99) and N / 2 >= ln(4 sqrt(n) / eps)
    N = 1
    while not (2 * a * math.log(n) / N <= math.log(1 / 0.99) and N / 2 >= math.log(4 * math.sqrt(n) / eps)):
        N += 1
    assert 2 * N * (4 * reach + 1) > 16
    with pytest.raises(GridTooSmall):
        partition_regions(c, eps, a, rule="theory")


def test_4x4_is_too_small():
    c = build_v_theta(4, 4, 3, 0.1, seed=0).circuit
    for rule in ("theory", "tight"):
        with pytest.raises(GridTooSmall):
            partition_regions(c, 0.1, rule=rule)


def test_theory_rule_coverage_on_wide_grid():
    c = grid_identity(1, 4000)
    part = partition_regions(c, 0.1, rule="theory")
    assert part.T >= 1
    assert part.W_reg * 2 * part.T >= part.cols
    assert part.covered_columns() == set(range(4000))
    N = len(part.candidates[0])
    assert 2 * math.log(part.n) / N <= math.log(1 / 0.99)
    assert N / 2 >= math.log(4 * math.sqrt(part.n) / 0.1)


@pytest.mark.parametrize("rows, cols, seed", [(4, 6, 0), (4, 8, 1), (6, 18, 2)])
def test_tight_rule_layout(rows, cols, seed):
    c = build_v_theta(rows, cols, 3, 0.02, seed, pattern=VERTICAL_FIRST).circuit
    part = partition_regions(c, 0.1, rule="tight")
    assert part.covered_columns() == set(range(cols))
    assert part.W_reg * 2 * part.T >= cols
    assert pseudomixture_bound(part.T, part.ell) <= 0.05
    assert part.ell == ell_tight(part.T, 0.1)
    for region in part.candidates:
        assert len(region) >= part.ell
        for c0, c1 in region:
            assert c1 - c0 + 1 == part.width == 2 * part.reach + 1


# ---------------------------------------------------------------------------
# strip marginals


def test_strip_marginal_identity():
    c = grid_identity(3, 5)
    assert strip_marginal(c, (1, 2), "0" * 6) == 1


def test_strip_marginal_x():
    c = Circuit(6, ((gate("x", 4),),), (2, 3))
    assert strip_marginal(c, (1, 1), {4: 0}) == 0
    assert strip_marginal(c, (1, 1), {4: 1, 1: 0}) == 1


def test_strip_marginal_matches_dense_4x6():
    c = build_v_theta(4, 6, 3, 0.1, seed=3).circuit
    probs = run(c).probabilities()
    rng = np.random.default_rng(0)
    for c0 in range(4):
        qs = column_qubits(4, 6, c0, c0 + 2)
        dist = subset_distribution(probs, 24, qs)
        for y in rng.integers(0, 2 ** 12, size=5):
            ybits = format(int(y), "012b")
            assert abs(strip_marginal(c, (c0, c0 + 2), ybits) - dist[int(y)]) <= 1e-9
        assert abs(strip_marginal(c, (c0, c0 + 2), "0" * 12) - dist[0]) <= 1e-9


def test_slice_defect_equals_literal_trace_norm():
    c = random_grid(1, 10, ["h-even"], seed=4)
    psi = dense_state(c)
    rho = np.outer(psi, psi.conj())
    for sl in [(0, 2), (3, 5), (7, 9)]:
        qs = list(range(sl[0], sl[1] + 1))
        diff = measure_qubits(rho, qs, 10) - reset_qubits(rho, qs, 10)
        assert slice_defect(c, sl) == pytest.approx(trace_norm(diff), abs=1e-10)


# ---------------------------------------------------------------------------
# heavy slices


def test_identity_every_candidate_heavy():
    c = grid_identity(2, 12)
    part = partition_regions(c, 0.1, rule="tight")
    plan = find_heavy_slices(c, part)
    assert all(p == 1 for p in plan.heaviness.values())
    assert len(plan.heaviness) == sum(len(r) for r in part.candidates)
    assert all(len(r) == part.ell for r in plan.slices)


def test_x_on_region_is_not_peaked():
    rows, cols = 2, 12
    part = partition_regions(grid_identity(rows, cols), 0.1, rule="tight")
    _, h0, h1 = part.regions[1]
    xs = tuple(gate("x", q) for q in column_qubits(rows, cols, h0, h1))
    c = Circuit(rows * cols, (xs,), (rows, cols))
    with pytest.raises(NotPeaked, match="H1"):
        find_heavy_slices(c, part)
    # the flip frame undoes the X layer
    _, flipped = compute_flip_frame(c)
    find_heavy_slices(flipped, part)


def test_v005_on_6x18_plan_reverified():
    c = build_v_theta(6, 18, 2, 0.05, seed=0, pattern=VERTICAL_FIRST).circuit
    _, flipped = compute_flip_frame(c)
    part = partition_regions(flipped, 0.1, rule="tight")
    plan = find_heavy_slices(flipped, part)
    for sl in plan.all_slices():
        qs = column_qubits(6, 18, *sl)
        assert strip_marginal(flipped, qs, "0" * len(qs)) >= HEAVY_THRESHOLD


# ---------------------------------------------------------------------------
# pseudomixture


CHAIN_CASES = [
    # rows, cols, layer kinds, slices per region
    (2, 9, ["v-even"], [[(0, 0), (1, 1), (2, 2)], [(3, 3), (4, 4), (5, 5)], [(6, 6), (7, 7), (8, 8)]]),
    (2, 8, ["v-even"], [[(0, 0), (2, 2), (3, 3)], [(5, 5), (6, 6), (7, 7)]]),
    (1, 13, ["h-even"], [[(0, 2)], [(5, 7)], [(10, 12)]]),
    (1, 18, ["h-even"], [[(0, 2), (5, 7)], [(10, 12), (15, 17)]]),
    (1, 18, ["h-even"], [[(1, 3), (6, 8), (11, 13)]]),
    (2, 8, ["v-even", "h-even"], [[(0, 2)], [(5, 7)]]),
]


@pytest.mark.parametrize("rows, cols, kinds, regions", CHAIN_CASES)
def test_chain_equals_term_by_term_sum(rows, cols, kinds, regions):
    c = random_grid(rows, cols, kinds, seed=rows * 100 + cols)
    plan = manual_plan(c, regions)
    assert plan.T <= 3 and plan.ell <= 3
    spec = PseudomixtureSpec(c, plan)
    probs = run(c).probabilities()
    brute = sigma_diagonal_bruteforce(probs, rows, cols, regions)
    chain = pseudomixture_diagonal(spec)
    assert np.max(np.abs(chain - brute)) <= 1e-10


@pytest.mark.parametrize("regions", [[[(0, 2)], [(5, 7)]], [[(0, 2), (5, 7)]]])
def test_diagonal_matches_literal_superoperators(regions):
    c = random_grid(1, 10, ["h-even"], seed=8)
    psi = dense_state(c)
    sigma = sigma_literal(np.outer(psi, psi.conj()), 1, 10, regions)
    spec = PseudomixtureSpec(c, manual_plan(c, regions))
    np.testing.assert_allclose(pseudomixture_diagonal(spec), np.real(np.diag(sigma)), atol=1e-12)
    assert abs(np.trace(sigma) - 1) < 1e-12


def test_marginal_identity():
    c = grid_identity(2, 12)
    part = partition_regions(c, 0.1, rule="tight")
    spec = PseudomixtureSpec(c, find_heavy_slices(c, part))
    assert pseudomixture_marginal(spec, [5], "0") == pytest.approx(1)
    assert pseudomixture_marginal(spec, [5], "1") == pytest.approx(0)


def test_marginal_two_paths():
    rows, cols, kinds, regions = CHAIN_CASES[3]
    c = random_grid(rows, cols, kinds, seed=5)
    spec = PseudomixtureSpec(c, manual_plan(c, regions))
    total = pseudomixture_marginal(spec, [], "")
    for q in (0, 4, 9, 17):
        split = pseudomixture_marginal(spec, [q], "0") + pseudomixture_marginal(spec, [q], "1")
        assert abs(total - split) <= 1e-9
    diag = pseudomixture_diagonal(spec)
    assert abs(total - diag.sum()) <= 1e-9
    rng = np.random.default_rng(1)
    for _ in range(10):
        S = sorted(rng.choice(cols, size=4, replace=False).tolist())
        x = rng.integers(0, 2, size=4)
        expect = diag.reshape((2,) * cols)[tuple(x[S.index(q)] if q in S else slice(None)
                                                 for q in range(cols))].sum()
        assert abs(pseudomixture_marginal(spec, S, x) - expect) <= 1e-10


# ---------------------------------------------------------------------------
# sampling


def test_sample_identity():
    res = sample_2d(grid_identity(2, 12), 0.1, 200, seed=1)
    assert set(res.samples) == {"0" * 24}


def test_sample_clifford_v0_returns_peak():
    vt = build_v_theta(4, 6, 3, 0.0, seed=4, pattern=VERTICAL_FIRST)
    res = sample_2d(vt.circuit, 0.1, 500, seed=2)
    assert set(res.samples) == {vt.peak}
    assert res.flips == vt.peak


def test_sample_v01_4x6_not_peaked():
    # with theta = 0.1 the 12-qubit candidate slices fall below the 0.99 threshold
    c = build_v_theta(4, 6, 3, 0.1, seed=0, pattern=VERTICAL_FIRST).circuit
    with pytest.raises(NotPeaked):
        sample_2d(c, 0.1, 10)
    _, flipped = compute_flip_frame(c)
    probs = run(flipped).probabilities()
    part = partition_regions(flipped, 0.1, rule="tight")
    best = max(subset_distribution(probs, 24, column_qubits(4, 6, *s))[0] for r in part.candidates for s in r)
    assert best < HEAVY_THRESHOLD


def test_sampler_matches_chain_marginals():
    rows, cols, kinds, regions = CHAIN_CASES[2]
    c = random_grid(rows, cols, kinds, seed=2, single_qubit=False)
    spec = PseudomixtureSpec(c, manual_plan(c, regions))
    N = 20_000
    bits = sample_pseudomixture(spec, N, seed=3)
    diag = pseudomixture_diagonal(spec)
    # one slice per region: every A^j is a plain reset, so sigma is a state and no clamping occurs
    assert diag.min() >= -1e-15
    for q in range(cols):
        p1 = diag.reshape((2,) * cols).sum(axis=tuple(i for i in range(cols) if i != q))[1]
        assert abs(bits[:, q].mean() - p1) <= 5 * math.sqrt(0.25 / N)
