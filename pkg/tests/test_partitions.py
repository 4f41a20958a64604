from math import comb

from hypothesis import given
from hypothesis import strategies as st

from bethe_overlap import linalg
from bethe_overlap.partitions import enumerate_bipartitions, partition_sum
from bethe_overlap.rng import SplitMix64, draw_scalar
from bethe_overlap.scalars import ParamSet, Scalar
from conftest import E, pset


@given(st.integers(min_value=0, max_value=6))
def test_bipartition_count(n):
    items = pset(*range(n))
    parts = list(enumerate_bipartitions(items))
    assert len(parts) == 2 ** n
    for bp in parts:
        assert len(bp.part_i) + len(bp.part_ii) == n
        merged = sorted(x.to_json() for x in tuple(bp.part_i) + tuple(bp.part_ii))
        assert merged == sorted(x.to_json() for x in items)


@given(st.integers(min_value=0, max_value=6), st.integers(min_value=0, max_value=6))
def test_bipartition_size_filter(n, k):
    if k > n:
        return
    parts = list(enumerate_bipartitions(pset(*range(n)), size_i=k))
    assert len(parts) == comb(n, k)
    assert all(len(bp.part_i) == k for bp in parts)


def test_indices_are_sorted_positions():
    for bp in enumerate_bipartitions(pset(10, 20, 30)):
        assert list(bp.idx_i) == sorted(bp.idx_i)
        assert list(bp.idx_ii) == sorted(bp.idx_ii)
        assert sorted(bp.idx_i + bp.idx_ii) == [0, 1, 2]


def test_partition_sum_empty_set():
    out = partition_sum(ParamSet([]), lambda bp: E(7), E(0))
    assert (out - E(7)).is_zero()  # single (empty, empty) split


def test_laplace_expansion_reproduces_determinant():
    # Expansion along the first two rows of a random exact 4x4: the signed
    # sum of 2x2 minor products over column bipartitions must equal det.
    # Pins the index bookkeeping (and its parity) of the enumeration.
    rng = SplitMix64(20240817)
    mat = [[draw_scalar(rng) for _ in range(4)] for _ in range(4)]
    one = E(1)
    cols = ParamSet([E(j) for j in range(4)])
    acc = E(0)
    for bp in enumerate_bipartitions(cols, size_i=2):
        sign = E(-1) ** (sum(bp.idx_i) + 1)  # +1 row offset: rows 0,1 used
        top = [[mat[r][j] for j in bp.idx_i] for r in (0, 1)]
        bot = [[mat[r][j] for j in bp.idx_ii] for r in (2, 3)]
        acc = acc + sign * linalg.det(top, one=one) * linalg.det(bot, one=one)
    assert (acc - linalg.det(mat, one=one)).is_zero()


def test_partition_sum_matches_manual_fold():
    s = pset(1, 2)
    c = E(1)

    def term(bp):
        out = E(1)
        for x in bp.part_i:
            out = out * x
        for y in bp.part_ii:
            out = out * (y + c)
        return out

    # splits: ({},{1,2}) ({1},{2}) ({2},{1}) ({1,2},{})
    expect = E(2) * E(3) + E(1) * E(3) + E(2) * E(2) + E(2)
    got = partition_sum(s, term, E(0))
    assert (got - expect).is_zero()
