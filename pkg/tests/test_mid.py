import pytest

from bethe_overlap import linalg
from bethe_overlap.mid import (bilinear_sum_conjugate, bilinear_sum_plain,
                               detlemma_columns, mid_conjugate, mid_direct,
                               mid_dual, mid_eta_m, mid_eta_n, sum_formula)
from bethe_overlap.rng import SplitMix64, draw_scalar, draw_set, draw_z
from bethe_overlap.scalars import (ParamSet, Scalar, delta_products, kernel_f,
                                   set_product)
from conftest import E, pset

C = E(1)
ONE = E(1)


def _sets(rng, n, m, c):
    us = ParamSet(draw_set(rng, n, c))
    vs = ParamSet(draw_set(rng, m, c, avoid=list(us)))
    return us, vs


# ---------------------------------------------------------------------------
# pinned small cases

def test_empty_by_empty_is_one():
    assert (mid_direct(pset(), pset(), E(5), C) - ONE).is_zero()


def test_column_only_case():
    # single column, no rows: the lone entry is f*1*1 - z = 1 - z
    val = mid_direct(pset(), pset(2), E(3), C)
    assert (val - E(-2)).is_zero()


def test_row_only_case():
    # no columns at all: empty determinant, no prefactor on the direct form
    assert (mid_direct(pset(5), pset(), E(3), C) - ONE).is_zero()


def test_one_by_one_closed_form():
    u, v, z = E("7/2"), E("1/3"), E(4)
    expect = kernel_f(u, v, C) - z
    assert (mid_direct(pset("7/2"), pset("1/3"), z, C) - expect).is_zero()


# ---------------------------------------------------------------------------
# the four determinant representations agree

@pytest.mark.parametrize("n,m", [(0, 2), (1, 1), (2, 1), (2, 3), (3, 3)])
def test_representations_agree(n, m):
    rng = SplitMix64(1000 + 10 * n + m)
    us, vs = _sets(rng, n, m, C)
    z = draw_z(rng)
    ref = mid_direct(us, vs, z, C)
    assert (mid_dual(us, vs, z, C) - ref).is_zero()
    en = ParamSet(draw_set(rng, n, C, avoid=list(us) + list(vs)))
    em = ParamSet(draw_set(rng, m, C, avoid=list(us) + list(vs)))
    assert (mid_eta_n(us, vs, en, z, C) - ref).is_zero()
    assert (mid_eta_m(us, vs, em, z, C) - ref).is_zero()


def test_conjugate_is_coupling_reflection():
    rng = SplitMix64(77)
    us, vs = _sets(rng, 2, 3, C)
    z = draw_z(rng)
    # reflecting c negates both kernel arguments' roles
    lhs = mid_conjugate(us, vs, z, C)
    rhs = (ONE - z) ** (len(vs) - len(us)) * mid_direct(vs, us, z, C)
    assert (lhs - rhs).is_zero()


# ---------------------------------------------------------------------------
# shift relations

@pytest.mark.parametrize("n,m", [(1, 1), (2, 3), (3, 2), (0, 2)])
def test_shift_relation_direct(n, m):
    rng = SplitMix64(5000 + 10 * n + m)
    us, vs = _sets(rng, n, m, C)
    z = draw_z(rng)
    lhs = mid_direct(us.shifted(-C), vs, z, C)
    rhs = (-z) ** n * (ONE - z) ** (m - n) \
        / set_product("f", vs, us, C) * mid_direct(vs, us, ONE / z, C)
    assert (lhs - rhs).is_zero()


@pytest.mark.parametrize("n,m", [(1, 1), (2, 3), (3, 2)])
def test_shift_relation_conjugate(n, m):
    rng = SplitMix64(6000 + 10 * n + m)
    us, vs = _sets(rng, n, m, C)
    z = draw_z(rng)
    lhs = mid_conjugate(us.shifted(C), vs, z, C)
    rhs = (-z) ** n * (ONE - z) ** (m - n) \
        / set_product("f", vs, us, -C) * mid_conjugate(vs, us, ONE / z, C)
    assert (lhs - rhs).is_zero()


# ---------------------------------------------------------------------------
# bilinear composition sums

@pytest.mark.parametrize("a,b,k", [(0, 1, 1), (1, 1, 2), (2, 1, 2), (1, 2, 3), (2, 2, 2)])
def test_bilinear_plain_merges(a, b, k):
    rng = SplitMix64(8000 + 100 * a + 10 * b + k)
    us, vs = _sets(rng, a, b, C)
    xis = ParamSet(draw_set(rng, k, C, avoid=list(us) + list(vs)))
    z1, z2 = draw_z(rng), draw_z(rng)
    lhs = bilinear_sum_plain(us, vs, xis, z1, z2, C)
    rhs = mid_direct(us.concat(vs), xis, z1 * z2, C)
    assert (lhs - rhs).is_zero()


@pytest.mark.parametrize("a,b,k", [(1, 1, 2), (2, 1, 1), (1, 2, 2)])
def test_bilinear_conjugate_merges(a, b, k):
    rng = SplitMix64(9000 + 100 * a + 10 * b + k)
    us, vs = _sets(rng, a, b, C)
    xis = ParamSet(draw_set(rng, k, C, avoid=list(us) + list(vs)))
    z1, z2 = draw_z(rng), draw_z(rng)
    lhs = bilinear_sum_conjugate(us, vs, xis, z1, z2, C)
    rhs = set_product("f", xis, us, C) \
        * mid_direct(us.shifted(-C).concat(vs), xis, z2 / z1, C)
    assert (lhs - rhs).is_zero()


def test_bilinear_unit_arguments():
    rng = SplitMix64(404)
    us, vs = _sets(rng, 1, 2, C)
    xis = ParamSet(draw_set(rng, 2, C, avoid=list(us) + list(vs)))
    lhs = bilinear_sum_plain(us, vs, xis, ONE, ONE, C)
    assert (lhs - mid_direct(us.concat(vs), xis, ONE, C)).is_zero()


# ---------------------------------------------------------------------------
# column lemma and summation formula

@pytest.mark.parametrize("nn,mm", [(1, 1), (2, 1), (3, 2), (4, 4), (3, 0)])
def test_column_lemma(nn, mm):
    rng = SplitMix64(3000 + 10 * nn + mm)
    ws = ParamSet(draw_set(rng, nn, C))
    ets = ParamSet(draw_set(rng, mm, C, avoid=list(ws)))
    z = draw_z(rng)
    p1 = [draw_scalar(rng) for _ in range(nn)]
    p2 = [draw_scalar(rng) for _ in range(nn)]
    arb = [[draw_scalar(rng) for _ in range(nn - mm)] for _ in range(nn)]
    f1, f2 = detlemma_columns(p1, p2, ws, ets, z, C, arb_cols=arb)
    lhs = linalg.det(f1, one=ONE)
    rhs = (z - ONE) ** mm * linalg.det(f2, one=ONE)
    assert (lhs - rhs).is_zero()


def test_column_lemma_rejects_ragged_arb():
    ws = pset(1, 2)
    with pytest.raises(ValueError):
        detlemma_columns([E(1), E(2)], [E(3), E(4)], ws, pset(5), E(2), C,
                         arb_cols=[[E(1)], []])


@pytest.mark.parametrize("n", [1, 2, 3])
def test_summation_formula(n):
    rng = SplitMix64(7000 + n)
    ss = ParamSet(draw_set(rng, n, C))
    coefs = [(draw_scalar(rng), draw_scalar(rng)) for _ in range(2 + n)]

    def affine(ab):
        a, b = ab
        return lambda x: a + b * x

    lhs, rhs = sum_formula(affine(coefs[0]), affine(coefs[1]),
                           [affine(ab) for ab in coefs[2:]], ss, C)
    assert (lhs - rhs).is_zero()


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_auxiliary_contraction(k):
    # frozen-set contraction: ordered-product prefactors against the
    # (1/g - z h) determinant collapse to (1-z)^k
    rng = SplitMix64(1500 + k)
    ws = ParamSet(draw_set(rng, k, C))
    ets = ParamSet(draw_set(rng, k, C, avoid=list(ws)))
    z = draw_z(rng)
    rows = []
    for w in ws:
        row = []
        for t in range(k):
            comp = ets.minus_index(t)
            row.append(ONE / set_product("g", [w], comp, C)
                       - z * set_product("h", [w], comp, C))
        rows.append(row)
    lhs = delta_products(ws, C)[1] * delta_products(ets, C)[0] \
        * linalg.det(rows, one=ONE)
    assert (lhs - (ONE - z) ** k).is_zero()
