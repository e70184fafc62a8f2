from math import comb

import numpy as np
import pytest
from hypothesis import given, strategies as st

from peakedsim.basis import BasisError, BoundedWeightBasis, DimensionError, dimension

from _oracles import weight_ordered_strings


@pytest.mark.parametrize("n, W, D", [(10, 2, 56), (4, 4, 16), (30, 4, 31_931)])
def test_dimension_examples(n, W, D):
    assert dimension(n, W) == D


def test_dimension_n50_w6():
    # direct binomial sum; 18,260,636 (not 18,009,460)
    assert dimension(50, 6) == sum(comb(50, j) for j in range(7)) == 18_260_636


def test_dimension_cap():
    with pytest.raises(DimensionError):
        dimension(50, 6, cap=10**6)


@given(st.integers(2, 40), st.integers(2, 6))
def test_dimension_at_most_n_to_the_W(n, W):
    W = min(W, n)
    assert dimension(n, W) <= n ** W


def test_rank_examples():
    b = BoundedWeightBasis(4, 2)
    assert [b.rank(x) for x in ("0000", "0001", "1000", "0011")] == [0, 1, 4, 5]


def test_rank_rejects_heavy_string():
    with pytest.raises(BasisError):
        BoundedWeightBasis(16, 3).rank("1111" + "0" * 12)


@pytest.mark.parametrize("W, count", [(3, 697), (4, 2_517)])
def test_bijection_exhaustive_n16(W, count):
    b = BoundedWeightBasis(16, W)
    strings = weight_ordered_strings(16, W)
    assert len(strings) == len(b) == count
    for i, x in enumerate(strings):
        assert b.rank(x) == i
        assert b.unrank_int(i) == x
    assert b.unrank(b.rank("0000000000000111")) == "0000000000000111"
    np.testing.assert_array_equal(b.strings(), strings)
    np.testing.assert_array_equal(b.rank_array(np.array(strings)), np.arange(count))


@given(st.integers(1, 12), st.integers(0, 4))
def test_bijection_small(n, W):
    W = min(W, n)
    b = BoundedWeightBasis(n, W)
    strings = weight_ordered_strings(n, W)
    assert [b.unrank_int(i) for i in range(len(b))] == strings
    assert b.weights().tolist() == [bin(x).count("1") for x in strings]


@given(st.integers(2, 20), st.integers(0, 4), st.data())
def test_raising_W_keeps_indices(n, W, data):
    W = min(W, n - 1)
    small, big = BoundedWeightBasis(n, W), BoundedWeightBasis(n, W + 1)
    i = data.draw(st.integers(0, len(small) - 1))
    assert big.unrank_int(i) == small.unrank_int(i)


def test_input_forms_agree():
    b = BoundedWeightBasis(6, 3)
    assert b.rank("010100") == b.rank(0b010100) == b.rank([0, 1, 0, 1, 0, 0])
    with pytest.raises(BasisError):
        b.rank("0101")
    with pytest.raises(BasisError):
        b.unrank(len(b))
