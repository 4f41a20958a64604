"""End-to-end acceptance checks, one test per guaranteed property.

Run with -v to get a one-line verdict per item.  Everything exact-mode
unless a tolerance is part of the statement being checked.
"""
import time
from itertools import product

import gmpy2
import pytest

from bethe_overlap import linalg
from bethe_overlap.bethe import (BetheSystem, full_sector_initial,
                                 heuristic_initial, one_magnon_twist,
                                 reduced_alpha, solve_newton)
from bethe_overlap.chain import (DegenerateTwist, SpinChainModel, TwistDiag,
                                 TwistGeneral, apply_operator, brute_overlap,
                                 build_monodromy, eigenvalue_general,
                                 modified_bethe_vector, rtt_residual,
                                 transfer_general, twist_factor_check)
from bethe_overlap.cli import main
from bethe_overlap.mid import (bilinear_sum_conjugate, bilinear_sum_plain,
                               detlemma_columns, mid_conjugate, mid_direct,
                               mid_dual, mid_eta_m, mid_eta_n, sum_formula)
from bethe_overlap.overlap import (OverlapInput, overlap_det,
                                   overlap_det_reduced, overlap_det_z,
                                   overlap_sum_offshell, overlap_sum_onshell,
                                   overlap_sum_shifted, rate_prefactor)
from bethe_overlap.rng import (SplitMix64, draw_scalar, draw_set,
                               draw_twist_value, draw_z)
from bethe_overlap.scalars import (ParamSet, Scalar, delta_products,
                                   set_product)

E = Scalar.exact
C = E(1)
ONE = E(1)
BITS = 256


def _random_twist(rng, rho1=None, rho2=None):
    while True:
        try:
            kt, k, km = (draw_twist_value(rng) for _ in range(3))
            return TwistGeneral.from_shifts(
                kt, k, km,
                rho1 if rho1 is not None else draw_twist_value(rng),
                rho2 if rho2 is not None else draw_twist_value(rng))
        except DegenerateTwist:
            continue


def test_01_kernel_representations_agree_exactly():
    start = time.time()
    for n, m in product(range(5), range(5)):
        for i in range(25):
            rng = SplitMix64(10_000 + 100 * n + 10 * m + i)
            us = ParamSet(draw_set(rng, n, C))
            vs = ParamSet(draw_set(rng, m, C, avoid=list(us)))
            z = draw_z(rng)
            ref = mid_direct(us, vs, z, C)
            assert (mid_dual(us, vs, z, C) - ref).is_zero()
            en = ParamSet(draw_set(rng, n, C, avoid=list(us) + list(vs)))
            em = ParamSet(draw_set(rng, m, C, avoid=list(us) + list(vs)))
            assert (mid_eta_n(us, vs, en, z, C) - ref).is_zero()
            assert (mid_eta_m(us, vs, em, z, C) - ref).is_zero()
    assert time.time() - start < 60


def test_02_auxiliary_contraction_collapses():
    for i in range(25):
        k = i % 4 + 1
        rng = SplitMix64(20_000 + i)
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


def test_03_conjugation_shift_and_merge_identities():
    for i in range(25):
        rng = SplitMix64(30_000 + i)
        n = rng.next_int(0, 4)
        m = rng.next_int(0, 4)
        us = ParamSet(draw_set(rng, n, C))
        vs = ParamSet(draw_set(rng, m, C, avoid=list(us)))
        z = draw_z(rng)
        # conjugation
        lhs = mid_conjugate(us, vs, z, C)
        rhs = (ONE - z) ** (m - n) * mid_direct(vs, us, z, C)
        assert (lhs - rhs).is_zero()
        # shift, plain kernel
        lhs = mid_direct(us.shifted(-C), vs, z, C)
        rhs = (-z) ** n * (ONE - z) ** (m - n) \
            / set_product("f", vs, us, C) * mid_direct(vs, us, ONE / z, C)
        assert (lhs - rhs).is_zero()
        # shift, conjugate kernel
        lhs = mid_conjugate(us.shifted(C), vs, z, C)
        rhs = (-z) ** n * (ONE - z) ** (m - n) \
            / set_product("f", vs, us, -C) * mid_conjugate(vs, us, ONE / z, C)
        assert (lhs - rhs).is_zero()
    for i in range(25):
        rng = SplitMix64(31_000 + i)
        a = rng.next_int(0, 2)
        b = rng.next_int(0, 2)
        k = rng.next_int(0, 4)
        us = ParamSet(draw_set(rng, a, C))
        vs = ParamSet(draw_set(rng, b, C, avoid=list(us)))
        xis = ParamSet(draw_set(rng, k, C, avoid=list(us) + list(vs)))
        z1, z2 = draw_z(rng), draw_z(rng)
        # two-kernel composition over partitions of xis
        lhs = bilinear_sum_plain(us, vs, xis, z1, z2, C)
        assert (lhs - mid_direct(us.concat(vs), xis, z1 * z2, C)).is_zero()
        # mixed-kernel composition
        lhs = bilinear_sum_conjugate(us, vs, xis, z1, z2, C)
        rhs = set_product("f", xis, us, C) \
            * mid_direct(us.shifted(-C).concat(vs), xis, z2 / z1, C)
        assert (lhs - rhs).is_zero()
        # unit arguments
        lhs = bilinear_sum_plain(us, vs, xis, ONE, ONE, C)
        assert (lhs - mid_direct(us.concat(vs), xis, ONE, C)).is_zero()


def test_04_column_lemma_and_summation_formula():
    for i in range(25):
        rng = SplitMix64(40_000 + i)
        nn = rng.next_int(1, 5)
        n_arb = rng.next_int(0, nn)
        mm = nn - n_arb
        ws = ParamSet(draw_set(rng, nn, C))
        ets = ParamSet(draw_set(rng, mm, C, avoid=list(ws)))
        z = draw_z(rng)
        p1 = [draw_scalar(rng) for _ in range(nn)]
        p2 = [draw_scalar(rng) for _ in range(nn)]
        arb = [[draw_scalar(rng) for _ in range(n_arb)] for _ in range(nn)]
        f1, f2 = detlemma_columns(p1, p2, ws, ets, z, C, arb)
        d1 = linalg.det(f1, one=ONE)
        d2 = linalg.det(f2, one=ONE)
        assert (d1 - (z - ONE) ** mm * d2).is_zero()
    for i in range(25):
        rng = SplitMix64(41_000 + i)
        nn = rng.next_int(1, 5)
        ss = ParamSet(draw_set(rng, nn, C))
        coefs = [(draw_scalar(rng), draw_scalar(rng)) for _ in range(2 + nn)]

        def affine(ab):
            a, b = ab
            return lambda x: a + b * x

        lhs, rhs = sum_formula(affine(coefs[0]), affine(coefs[1]),
                               [affine(ab) for ab in coefs[2:]], ss, C)
        assert (lhs - rhs).is_zero()


def test_05_chain_realization_is_exact():
    # exchange relation residual
    for L in (1, 2, 3):
        m = SpinChainModel.homogeneous(L, C)
        rng = SplitMix64(50_000 + L)
        for _ in range(5):
            u, v = draw_set(rng, 2, C)
            assert rtt_residual(m, u, v).is_zero()
    # vacuum eigenvalues against the weight closures
    for L in range(1, 7):
        m = SpinChainModel.homogeneous(L, C)
        rng = SplitMix64(51_000 + L)
        u = draw_set(rng, 1, C)[0]
        t = build_monodromy(m, u)
        vac = [ONE if i == 0 else E(0) for i in range(m.dim())]
        t11 = apply_operator(t[0][0], vac)
        t22 = apply_operator(t[1][1], vac)
        t21 = apply_operator(t[1][0], vac)
        w = m.weights()
        assert all((t11[i] - w.lambda1(u) * vac[i]).is_zero()
                   for i in range(m.dim()))
        assert all((t22[i] - w.lambda2(u) * vac[i]).is_zero()
                   for i in range(m.dim()))
        assert all(x.is_zero() for x in t21)
    # twist factorization
    rng = SplitMix64(52_000)
    for _ in range(25):
        tw = _random_twist(rng)
        prod = twist_factor_check(tw)
        target = [[tw.kt, tw.kp], [tw.km, tw.k]]
        for i in range(2):
            for j in range(2):
                assert (prod[i][j] - target[i][j]).is_zero()


def test_06_offshell_formula_matches_oracle():
    start = time.time()
    for L in (1, 2, 3):
        m = SpinChainModel.homogeneous(L, C)
        for N in range(4):
            for n in range(N + 1):
                for i in range(10):
                    rng = SplitMix64(60_000 + 1000 * L + 100 * N + 10 * n + i)
                    tw = _random_twist(rng)
                    us = ParamSet(draw_set(rng, N, C))
                    vs = ParamSet(draw_set(rng, n, C, avoid=list(us)))
                    inp = OverlapInput(m, tw, tw.alpha_partner(), vs, us, C)
                    diff = overlap_sum_offshell(inp) - brute_overlap(m, tw, vs, us)
                    assert diff.is_zero()
    assert time.time() - start < 300


def _onshell_instances():
    """Exact one-magnon on-shell inputs over every (N, L) shape, with the
    twist ratio locked to the eigenvalue ratio at the v point."""
    out = []
    for N in (1, 2, 3):
        for L in (1, 2, 3):
            for i in range(4):
                rng = SplitMix64(70_000 + 100 * N + 10 * L + i)
                m = SpinChainModel.homogeneous(L, C)
                v = draw_set(rng, 1, C, avoid=[E(0)])[0]
                alpha = one_magnon_twist(m, v)
                rho1 = draw_twist_value(rng)
                tw = _random_twist(rng, rho1=rho1, rho2=-(alpha * rho1))
                us = ParamSet(draw_set(rng, N, C, avoid=[E(0), v]))
                out.append((rng, m, tw,
                            OverlapInput(m, tw, alpha, ParamSet([v]), us, C)))
    return out


def test_07_onshell_reduction_chain():
    for rng, m, tw, inp in _onshell_instances():
        b = brute_overlap(m, tw, inp.v_set, inp.u_set)
        assert (overlap_sum_onshell(inp) - b).is_zero()
        assert (overlap_sum_onshell(inp, assume_constraint=True) - b).is_zero()
        assert (overlap_det(inp) - b).is_zero()
        nm = len(inp.v_set) - len(inp.u_set)
        for zval in (E(0), E(2), E(-3)):
            fam = (ONE - zval) ** nm * overlap_det_z(inp, zval)
            assert (fam - overlap_sum_shifted(inp, zval)).is_zero()


def test_08_auxiliary_point_independence():
    for rng, m, tw, inp in _onshell_instances():
        taken = list(inp.u_set) + list(inp.v_set)
        if len(inp.u_set) > 1:
            free = len(inp.u_set) - 1
            e1 = ParamSet(draw_set(rng, free, C, avoid=taken))
            e2 = ParamSet(draw_set(rng, free, C, avoid=taken))
            a = overlap_det(OverlapInput(m, tw, inp.alpha, inp.v_set,
                                         inp.u_set, C, eta_free=e1))
            bb = overlap_det(OverlapInput(m, tw, inp.alpha, inp.v_set,
                                          inp.u_set, C, eta_free=e2))
            assert (a - bb).is_zero()
        full1 = ParamSet(draw_set(rng, len(inp.u_set), C, avoid=taken))
        full2 = ParamSet(draw_set(rng, len(inp.u_set), C, avoid=taken))
        d1 = overlap_det_z(inp, E(2), etas=full1)
        d2 = overlap_det_z(inp, E(2), etas=full2)
        assert (d1 - d2).is_zero()


def test_09_numeric_onshell_determinant():
    start = time.time()
    m4e = SpinChainModel.homogeneous(4, C)
    m4 = m4e.to_float(BITS)
    alpha = E("3/2").to_float(BITS)
    sysd = BetheSystem("diag", m4, TwistDiag(alpha), 2, m4.c)
    rs = solve_newton(sysd, heuristic_initial(2, m4.c, BITS))
    assert rs.converged
    assert rs.residual_norm.val.real <= gmpy2.mpfr("1e-30")
    rng = SplitMix64(90_000)
    twe = _random_twist(rng, rho1=E(1), rho2=E("-3/2"))
    tw = twe.to_float(BITS)
    us = ParamSet(x.to_float(BITS) for x in draw_set(rng, 4, C))
    inp = OverlapInput(m4, tw, alpha, rs.roots, us, m4.c)
    d = overlap_det(inp)
    b = brute_overlap(m4, tw, rs.roots, us)
    rel2 = ((d - b).abs2() / b.abs2()).val.real
    assert rel2 <= gmpy2.mpfr("1e-50")
    assert time.time() - start < 120


def test_10_untwisted_reduced_determinant():
    m4e = SpinChainModel.homogeneous(4, C)
    m4 = m4e.to_float(BITS)
    one_f = ONE.to_float(BITS)
    rng = SplitMix64(100_000)
    twe = _random_twist(rng, rho1=E(1), rho2=E(-1))
    tw = twe.to_float(BITS)

    rs4 = solve_newton(BetheSystem("reduced", m4, tw, 4, m4.c),
                       full_sector_initial(m4e, reduced_alpha(twe), BITS))
    assert rs4.converged
    assert rs4.residual_norm.val.real <= gmpy2.mpfr("1e-30")

    # the constrained roots make an honest general-twist eigenvector
    zpt = E("9/8").to_float(BITS)
    vec = modified_bethe_vector(m4, tw, rs4.roots)
    av = apply_operator(transfer_general(m4, tw, zpt), vec)
    lam = eigenvalue_general(m4, tw, zpt, rs4.roots, m4.c)
    num = max((av[i] - lam * vec[i]).abs2().val.real for i in range(len(vec)))
    den = max(x.abs2().val.real for x in vec)
    assert num / den <= gmpy2.mpfr("1e-50")

    # vacuum projection: relative agreement with the oracle
    inp0 = OverlapInput(m4, tw, one_f, ParamSet([]), rs4.roots, m4.c)
    d0 = overlap_det_reduced(inp0)
    b0 = brute_overlap(m4, tw, ParamSet([]), rs4.roots)
    assert ((d0 - b0).abs2() / b0.abs2()).val.real <= gmpy2.mpfr("1e-40")

    # two on-shell magnons against four roots: both sides sit at the
    # selection-rule zero, so compare absolutely
    rs2v = solve_newton(BetheSystem("diag", m4, TwistDiag(one_f), 2, m4.c),
                        heuristic_initial(2, m4.c, BITS))
    assert rs2v.converged
    inp2 = OverlapInput(m4, tw, one_f, rs2v.roots, rs4.roots, m4.c)
    d2 = overlap_det_reduced(inp2)
    b2 = brute_overlap(m4, tw, rs2v.roots, rs4.roots)
    assert (d2 - b2).abs2().val.real <= gmpy2.mpfr("1e-40")

    # balanced case: reduced determinant against the general one; the
    # symmetric starting pair can coalesce here, so jitter on failure
    sys2u = BetheSystem("reduced", m4, tw, 2, m4.c)
    base = heuristic_initial(2, m4.c, BITS)
    rs2u = solve_newton(sys2u, base)
    attempt = 0
    while not rs2u.converged and attempt < 8:
        attempt += 1
        jr = SplitMix64(123 + attempt)
        init = ParamSet([base[j] + Scalar.floating(jr.next_int(-40, 40),
                                                   jr.next_int(-40, 40), BITS)
                         / Scalar.floating(100, 0, BITS) for j in range(2)])
        rs2u = solve_newton(sys2u, init)
    assert rs2u.converged
    inpx = OverlapInput(m4, tw, one_f, rs2v.roots, rs2u.roots, m4.c)
    dr = overlap_det_reduced(inpx)
    dd = overlap_det(inpx)
    assert ((dr - dd).abs2() / dd.abs2()).val.real <= gmpy2.mpfr("1e-40")


def test_11_rate_prefactor_derivative():
    m = SpinChainModel.homogeneous(2, C).to_float(BITS)
    alpha = Scalar.floating("1.25", 0, BITS)
    tw = TwistGeneral.from_shifts(E(3), E(5), E(2), E(1), E("-7/3")).to_float(BITS)
    vs = ParamSet([Scalar.floating(4, 0, BITS)])
    us = ParamSet([Scalar.floating(2, 0, BITS), Scalar.floating(-3, 0, BITS)])
    sval = Scalar.floating("0.8", "0.1", BITS)
    analytic = rate_prefactor(m, alpha, tw, vs, us, sval)

    one = Scalar.floating(1, 0, BITS)
    zero = Scalar.floating(0, 0, BITS)
    h = Scalar.floating("1e-20", 0, BITS)

    def lam_form(z, roots, c1, c2, c3):
        a = m.lambda1(z)
        b = m.lambda2(z)
        g = m.lambda1(z) * m.lambda2(z)
        for u in roots:
            a = a * (one + m.c / (u - z))
            b = b * (one + m.c / (z - u))
            g = g * (m.c / (z - u))
        out = c1 * a + c2 * b
        return out + c3 * g if c3 is not None else out

    def big1(z):
        return lam_form(z, vs, one, alpha, None)

    def big2(z):
        return lam_form(z, us, tw.kt - tw.rho1, tw.k - tw.rho2,
                        tw.rho1 + tw.rho2)

    dlog_fd = (big1(h) - big1(-h)) / (h + h) / big1(zero) \
        - (big2(h) - big2(-h)) / (h + h) / big2(zero)
    fd = ((m.c + m.c) * dlog_fd).abs2() * sval.abs2()
    assert ((analytic - fd).abs2() / analytic.abs2()).val.real \
        <= gmpy2.mpfr("1e-30")

    # equal eigenvalue branches: the log-derivative cancels identically
    me = SpinChainModel.homogeneous(2, C)
    rho = E(2)
    a0 = E("5/3")
    twf = TwistGeneral.from_shifts(ONE + rho, a0 - rho, ONE, rho, -rho)
    pts = ParamSet([E("-1/2")])
    assert rate_prefactor(me, a0, twf, pts, pts, E("7/11")).is_zero()


def test_12_reports_are_deterministic(tmp_path):
    a, b = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    args = ["verify", "--mode", "float", "--precision", "128", "--seed", "11",
            "--instances", "1"]
    assert main(args + ["--out", a]) == 0
    assert main(args + ["--out", b]) == 0
    assert open(a, "rb").read() == open(b, "rb").read()
