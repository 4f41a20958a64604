import pytest

from bethe_overlap.chain import (DegenerateTwist, SpinChainModel, TwistDiag,
                                 TwistGeneral, apply_operator, bethe_vector,
                                 brute_overlap, build_monodromy,
                                 dual_bethe_vector, eigenvalue_diag,
                                 modified_bethe_vector, rtt_residual,
                                 transfer_diag, transfer_general,
                                 twist_factor_check)
from bethe_overlap.rng import SplitMix64, draw_set, draw_twist_value
from bethe_overlap.scalars import ParamSet, Scalar, one_like, zero_like
from conftest import E, pset


def _model(L, seed=11):
    rng = SplitMix64(seed)
    ths = draw_set(rng, L, E(1))
    return SpinChainModel(L, E(1), tuple(ths))


def _vec_residual(a, b):
    acc = E(0)
    for x, y in zip(a, b):
        acc = acc + (x - y).abs2()
    return acc


# ---------------------------------------------------------------------------
# monodromy and vacuum structure

@pytest.mark.parametrize("L", [1, 2, 3])
def test_vacuum_weights(L):
    m = _model(L)
    u = E("13/7")
    t = build_monodromy(m, u)
    vac = [one_like(m.c) if i == 0 else zero_like(m.c) for i in range(m.dim())]
    t11 = apply_operator(t[0][0], vac)
    t22 = apply_operator(t[1][1], vac)
    t21 = apply_operator(t[1][0], vac)
    assert _vec_residual(t11, [m.lambda1(u) * x for x in vac]).is_zero()
    assert _vec_residual(t22, [m.lambda2(u) * x for x in vac]).is_zero()
    assert all(x.is_zero() for x in t21)


@pytest.mark.parametrize("L", [1, 2])
def test_rtt_exactly_zero(L):
    m = _model(L, seed=21 + L)
    rng = SplitMix64(400 + L)
    u, v = draw_set(rng, 2, E(1), avoid=list(m.theta))
    assert rtt_residual(m, u, v).is_zero()


def test_weight_products_follow_sites():
    m = _model(3, seed=61)
    u = E(5)
    l1 = E(1)
    l2 = E(1)
    for th in m.theta:
        l1 = l1 * (u - th + m.c) / m.c
        l2 = l2 * (u - th) / m.c
    assert (m.lambda1(u) - l1).is_zero()
    assert (m.lambda2(u) - l2).is_zero()


# ---------------------------------------------------------------------------
# twists

def test_twist_shift_form_satisfies_constraint():
    tw = TwistGeneral.from_shifts(E(2), E(3), E(1), E(1), E(-1))
    lhs = tw.rho1 * tw.rho2 - (tw.k * tw.rho1 + tw.kt * tw.rho2) + tw.kp * tw.km
    assert lhs.is_zero()
    assert (tw.alpha_partner() - E(1)).is_zero()


def test_twist_entry_form_roundtrip():
    tw = TwistGeneral.from_shifts(E(3), E(-2), E(5), E("1/2"), E(4))
    back = TwistGeneral.from_entries(tw.kt, tw.kp, tw.km, tw.k, tw.rho1)
    assert (back.rho2 - tw.rho2).is_zero()


def test_twist_degenerations():
    with pytest.raises(DegenerateTwist):
        TwistGeneral(E(1), E(2), E(3), E(4), E(5), E(6))  # constraint violated
    with pytest.raises(DegenerateTwist):
        TwistGeneral.from_shifts(E(2), E(1), E(1), E(1), E(-1))  # kp = 0
    # mu pole: kp*km == rho1*rho2
    with pytest.raises(DegenerateTwist):
        TwistGeneral.from_shifts(E(2), E(-2), E(1), E(2), E(-2))


def test_mu_closed_form():
    tw = TwistGeneral.from_shifts(E(2), E(3), E(1), E(1), E(-1))
    mu = one_like(tw.kt) / (one_like(tw.kt) - tw.rho1 * tw.rho2 / (tw.kp * tw.km))
    assert (tw.mu() - mu).is_zero()


@pytest.mark.parametrize("seed", range(5))
def test_twist_factorization(seed):
    rng = SplitMix64(900 + seed)
    while True:
        try:
            tw = TwistGeneral.from_shifts(*[draw_twist_value(rng) for _ in range(5)])
            break
        except DegenerateTwist:
            continue
    prod = twist_factor_check(tw)
    target = [[tw.kt, tw.kp], [tw.km, tw.k]]
    for i in range(2):
        for j in range(2):
            assert (prod[i][j] - target[i][j]).is_zero()


# ---------------------------------------------------------------------------
# states

def test_bethe_vector_symmetric_in_roots():
    m = _model(2, seed=31)
    rng = SplitMix64(55)
    u1, u2 = draw_set(rng, 2, E(1), avoid=list(m.theta))
    a = bethe_vector(m, ParamSet([u1, u2]))
    b = bethe_vector(m, ParamSet([u2, u1]))
    assert _vec_residual(a, b).is_zero()


def test_one_magnon_eigenvector():
    m = SpinChainModel.homogeneous(2, E(1))
    v = E(3)
    alpha = m.lambda1(v) / m.lambda2(v)
    vec = bethe_vector(m, ParamSet([v]))
    u = E("-5/7")
    out = apply_operator(transfer_diag(m, alpha, u), vec)
    ev = eigenvalue_diag(m, alpha, u, ParamSet([v]), m.c)
    assert _vec_residual(out, [ev * x for x in vec]).is_zero()


def test_modified_vector_differs_from_plain():
    m = SpinChainModel.homogeneous(1, E(1))
    tw = TwistGeneral.from_shifts(E(1), E(3), E(1), E(1), E(-2))
    u = E(5)
    plain = bethe_vector(m, ParamSet([u]))
    mod = modified_bethe_vector(m, tw, ParamSet([u]))
    assert not _vec_residual(plain, mod).is_zero()


# ---------------------------------------------------------------------------
# frozen overlap oracles

def test_single_site_oracle():
    m = SpinChainModel.homogeneous(1, E(1))
    tw = TwistGeneral.from_shifts(E(1), E(3), E(1), E(1), E(-2))
    val = brute_overlap(m, tw, pset(1), pset(5))
    assert (val - E("3/5")).is_zero()
    assert (val - tw.mu()).is_zero()  # n = N = 1 collapses onto mu here


def test_two_site_oracle():
    m = SpinChainModel.homogeneous(2, E(1))
    tw = TwistGeneral.from_shifts(E(2), E(3), E(1), E(1), E(-1))
    val = brute_overlap(m, tw, pset("-1/2"), pset(1))
    assert (val - E("-1/3")).is_zero()


def test_overlap_empty_sets_is_vacuum_norm():
    m = SpinChainModel.homogeneous(1, E(1))
    tw = TwistGeneral.from_shifts(E(1), E(3), E(1), E(1), E(-2))
    val = brute_overlap(m, tw, pset(), pset())
    assert (val - E(1)).is_zero()
