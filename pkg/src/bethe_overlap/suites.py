"""Named verification suites: deterministic seeded instances of the library's
identities, each reduced to one lhs/rhs pair.

Every draw goes through SplitMix64, so a (seed, mode, sizes) tuple fixes all
inputs bit for bit; each suite derives its own stream from the seed and the
suite name, which keeps `verify --suite mid` identical whether or not other
suites run alongside it.  Exact mode demands exact equality; float mode
compares against tolerance * max(1, |rhs|).
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import gmpy2

from . import bethe, linalg, overlap
from .chain import (SpinChainModel, TwistDiag, TwistGeneral, apply_operator,
                    bethe_vector, brute_overlap, eigenvalue_diag,
                    transfer_diag, twist_factor_check, DegenerateTwist,
                    rtt_residual)
from .mid import (bilinear_sum_conjugate, bilinear_sum_plain, detlemma_columns,
                  mid_conjugate, mid_direct, mid_dual, mid_eta_m, mid_eta_n,
                  sum_formula)
from .overlap import OverlapInput
from .rng import (SplitMix64, draw_coupling, draw_scalar, draw_set,
                  draw_twist_value, draw_z)
from .scalars import (ParamSet, Scalar, delta_products, kernel_f, kernel_g,
                      kernel_h, one_like, set_product, zero_like)

__all__ = ["SuiteConfig", "Check", "SUITES", "run_suites"]


@dataclass(frozen=True)
class SuiteConfig:
    mode: str = "exact"
    bits: int = 256
    seed: int = 1
    max_set_size: int = 3
    max_chain_length: int = 2
    instances: int = 2
    tolerance: str = "1e-25"


@dataclass(frozen=True)
class Check:
    name: str
    anchor: str
    inputs_digest: str
    lhs: Scalar
    rhs: Scalar
    residual: Scalar
    passed: bool
    detail: str = ""


def _suite_rng(cfg: SuiteConfig, name: str) -> SplitMix64:
    tag = int.from_bytes(hashlib.sha256(name.encode()).digest()[:8], "big")
    return SplitMix64((cfg.seed ^ tag) & 0xFFFFFFFFFFFFFFFF)


def _adapt(cfg, x: Scalar) -> Scalar:
    return x if cfg.mode == "exact" else x.to_float(cfg.bits)


def _adapt_set(cfg, xs) -> ParamSet:
    return ParamSet(_adapt(cfg, x) for x in xs)


def _digest(items) -> str:
    parts = []
    for it in items:
        if isinstance(it, Scalar):
            parts.append(it.to_json())
        elif isinstance(it, ParamSet):
            parts.append([x.to_json() for x in it])
        else:
            parts.append(it)
    blob = json.dumps(parts, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _check(cfg, name, anchor, inputs, lhs, rhs) -> Check:
    residual = lhs - rhs
    if cfg.mode == "exact":
        passed = residual.is_zero()
    else:
        tol = gmpy2.mpfr(cfg.tolerance, cfg.bits)
        scale = rhs.abs2().val.real
        if scale < 1:
            scale = gmpy2.mpfr(1, cfg.bits)
        passed = residual.abs2().val.real <= tol * tol * scale
    return Check(name, anchor, _digest(inputs), lhs, rhs, residual, passed)


# ---------------------------------------------------------------------------

def suite_kernels(cfg: SuiteConfig):
    rng = _suite_rng(cfg, "kernels")
    out = []
    ss = max(2, min(cfg.max_set_size, 4))
    for i in range(cfg.instances):
        ce = draw_coupling(rng)
        pts = draw_set(rng, 2, ce)
        c = _adapt(cfg, ce)
        u, v = _adapt(cfg, pts[0]), _adapt(cfg, pts[1])
        one = one_like(c)
        out.append(_check(cfg, f"kernels/decomposition/i{i}", "kernel algebra",
                          [u, v, c], kernel_f(u, v, c), one + kernel_g(u, v, c)))
        out.append(_check(cfg, f"kernels/ratio/i{i}", "kernel algebra",
                          [u, v, c], kernel_h(u, v, c) * kernel_g(u, v, c),
                          kernel_f(u, v, c)))
        out.append(_check(cfg, f"kernels/antisymmetry/i{i}", "kernel algebra",
                          [u, v, c], kernel_g(u, v, c), -kernel_g(v, u, c)))
        se = draw_set(rng, ss, ce)
        s = _adapt_set(cfg, se)
        rev = ParamSet(tuple(reversed(tuple(s))))
        out.append(_check(cfg, f"kernels/ordered-products/i{i}", "kernel algebra",
                          [s, c], delta_products(rev, c)[0],
                          delta_products(s, c)[1]))
        ae = draw_set(rng, 2, ce)
        be = draw_set(rng, 2, ce, avoid=list(ae))
        a, b = _adapt_set(cfg, ae), _adapt_set(cfg, be)
        out.append(_check(cfg, f"kernels/set-factorization/i{i}", "kernel algebra",
                          [a, b, c], set_product("f", a, b, c),
                          set_product("g", a, b, c) * set_product("h", a, b, c)))
    return out


def suite_mid(cfg: SuiteConfig):
    rng = _suite_rng(cfg, "mid")
    out = []
    top = min(cfg.max_set_size, 4)
    for i in range(cfg.instances):
        ce = draw_coupling(rng)
        c = _adapt(cfg, ce)
        one = one_like(c)
        n = rng.next_int(0, top)
        m = rng.next_int(0, top)
        use = draw_set(rng, n, ce)
        vse = draw_set(rng, m, ce, avoid=list(use))
        us, vs = _adapt_set(cfg, use), _adapt_set(cfg, vse)
        z = _adapt(cfg, draw_z(rng))
        direct = mid_direct(us, vs, z, c)
        out.append(_check(cfg, f"mid/rep-dual/i{i}", "kernel determinant forms",
                          [us, vs, z, c], mid_dual(us, vs, z, c), direct))
        ene = draw_set(rng, n, ce, avoid=list(use) + list(vse))
        out.append(_check(cfg, f"mid/rep-aux-rows/i{i}", "kernel determinant forms",
                          [us, vs, _adapt_set(cfg, ene), z, c],
                          mid_eta_n(us, vs, _adapt_set(cfg, ene), z, c), direct))
        eme = draw_set(rng, m, ce, avoid=list(use) + list(vse))
        out.append(_check(cfg, f"mid/rep-aux-cols/i{i}", "kernel determinant forms",
                          [us, vs, _adapt_set(cfg, eme), z, c],
                          mid_eta_m(us, vs, _adapt_set(cfg, eme), z, c), direct))
        out.append(_check(cfg, f"mid/reflection/i{i}", "kernel determinant forms",
                          [us, vs, z, c], mid_conjugate(us, vs, z, c),
                          (one - z) ** (m - n) * mid_direct(vs, us, z, c)))
        k = rng.next_int(1, max(1, top))
        we = draw_set(rng, k, ce)
        ete = draw_set(rng, k, ce, avoid=list(we))
        ws, ets = _adapt_set(cfg, we), _adapt_set(cfg, ete)
        rows = []
        for w in ws:
            row = []
            for t in range(k):
                ek = ets.minus_index(t)
                row.append(one / set_product("g", [w], ek, c)
                           - z * set_product("h", [w], ek, c))
            rows.append(row)
        lhs = (delta_products(ws, c)[1] * delta_products(ets, c)[0]
               * linalg.det(rows, one=one))
        out.append(_check(cfg, f"mid/aux-contraction/i{i}", "kernel determinant forms",
                          [ws, ets, z, c], lhs, (one - z) ** k))
    return out


def suite_appendix(cfg: SuiteConfig):
    rng = _suite_rng(cfg, "appendix")
    out = []
    for i in range(cfg.instances):
        ce = draw_coupling(rng)
        c = _adapt(cfg, ce)
        one = one_like(c)
        na = rng.next_int(0, 2)
        nb = rng.next_int(0, 2)
        nx = rng.next_int(1, min(cfg.max_set_size, 3))
        use = draw_set(rng, na, ce)
        vse = draw_set(rng, nb, ce, avoid=list(use))
        xie = draw_set(rng, nx, ce, avoid=list(use) + list(vse))
        us, vs, xis = (_adapt_set(cfg, use), _adapt_set(cfg, vse),
                       _adapt_set(cfg, xie))
        z1 = _adapt(cfg, draw_z(rng))
        z2 = _adapt(cfg, draw_z(rng))
        out.append(_check(cfg, f"appendix/merge-plain/i{i}", "composition sums",
                          [us, vs, xis, z1, z2, c],
                          bilinear_sum_plain(us, vs, xis, z1, z2, c),
                          mid_direct(us.concat(vs), xis, z1 * z2, c)))
        out.append(_check(cfg, f"appendix/merge-conjugate/i{i}", "composition sums",
                          [us, vs, xis, z1, z2, c],
                          bilinear_sum_conjugate(us, vs, xis, z1, z2, c),
                          set_product("f", xis, us, c)
                          * mid_direct(us.shifted(-c).concat(vs), xis, z2 / z1, c)))
        out.append(_check(cfg, f"appendix/merge-unit/i{i}", "composition sums",
                          [us, vs, xis, c],
                          bilinear_sum_plain(us, vs, xis, one, one, c),
                          mid_direct(us.concat(vs), xis, one, c)))
        # column-transformation lemma
        nn = rng.next_int(1, min(cfg.max_set_size, 3))
        mm = rng.next_int(1, nn)
        we = draw_set(rng, nn, ce)
        ete = draw_set(rng, mm, ce, avoid=list(we))
        ws, ets = _adapt_set(cfg, we), _adapt_set(cfg, ete)
        z = _adapt(cfg, draw_z(rng))
        p1 = [_adapt(cfg, draw_scalar(rng)) for _ in range(nn)]
        p2 = [_adapt(cfg, draw_scalar(rng)) for _ in range(nn)]
        arb = [[_adapt(cfg, draw_scalar(rng)) for _ in range(nn - mm)]
               for _ in range(nn)]
        f1, f2 = detlemma_columns(p1, p2, ws, ets, z, c, arb_cols=arb)
        out.append(_check(cfg, f"appendix/column-lemma/i{i}", "column transformation",
                          [ws, ets, z, c] + p1 + p2,
                          linalg.det(f1, one=one),
                          (z - one) ** mm * linalg.det(f2, one=one)))
        # shift summation formula with affine data
        ns = rng.next_int(1, min(cfg.max_set_size, 3))
        se = draw_set(rng, ns, ce)
        ss = _adapt_set(cfg, se)
        coefs = [(_adapt(cfg, draw_scalar(rng)), _adapt(cfg, draw_scalar(rng)))
                 for _ in range(2 + ns)]

        def mk(ab):
            a, b = ab
            return lambda x: a + b * x

        phi1, phi2 = mk(coefs[0]), mk(coefs[1])
        cols = [mk(ab) for ab in coefs[2:]]
        lhs, rhs = sum_formula(phi1, phi2, cols, ss, c)
        out.append(_check(cfg, f"appendix/shift-sum/i{i}", "shift summation",
                          [ss, c] + [x for ab in coefs for x in ab], lhs, rhs))
    return out


def suite_chain(cfg: SuiteConfig):
    rng = _suite_rng(cfg, "chain")
    out = []
    ll = max(1, min(cfg.max_chain_length, 3))
    for i in range(cfg.instances):
        ce = draw_coupling(rng)
        the = draw_set(rng, ll, ce)
        me = SpinChainModel(ll, ce, tuple(the))
        m = me if cfg.mode == "exact" else me.to_float(cfg.bits)
        c = m.c
        zero = zero_like(c)
        uv = draw_set(rng, 2, ce, avoid=list(the))
        u, v = _adapt(cfg, uv[0]), _adapt(cfg, uv[1])
        out.append(_check(cfg, f"chain/rtt/i{i}", "exchange relation",
                          [ParamSet(the), u, v, c], rtt_residual(m, u, v), zero))
        alpha = _adapt(cfg, draw_twist_value(rng))
        vac = [zero] * m.dim()
        vac[0] = one_like(c)
        w = apply_operator(transfer_diag(m, alpha, u), vac)
        ev = m.lambda1(u) + alpha * m.lambda2(u)
        acc = zero
        for a, b in zip(w, vac):
            acc = acc + (a - ev * b).abs2()
        out.append(_check(cfg, f"chain/vacuum-eigen/i{i}", "vacuum action",
                          [ParamSet(the), alpha, u, c], acc, zero))
        for tries in range(50):
            try:
                twe = TwistGeneral.from_shifts(draw_twist_value(rng),
                                               draw_twist_value(rng),
                                               draw_twist_value(rng),
                                               draw_twist_value(rng),
                                               draw_twist_value(rng))
                break
            except DegenerateTwist:
                continue
        tw = twe if cfg.mode == "exact" else twe.to_float(cfg.bits)
        prod = twist_factor_check(tw)
        target = [[tw.kt, tw.kp], [tw.km, tw.k]]
        acc = zero
        for r in range(2):
            for s in range(2):
                acc = acc + (prod[r][s] - target[r][s]).abs2()
        out.append(_check(cfg, f"chain/twist-factorization/i{i}", "twist factorization",
                          [tw.kt, tw.kp, tw.km, tw.k, tw.rho1, tw.rho2], acc, zero))
    # frozen single-site and two-site oracle values
    E = Scalar.exact
    m1 = SpinChainModel.homogeneous(1, E(1))
    tw1 = TwistGeneral.from_shifts(E(1), E(3), E(1), E(1), E(-2))
    if cfg.mode == "float":
        m1, tw1 = m1.to_float(cfg.bits), tw1.to_float(cfg.bits)
    b1 = brute_overlap(m1, tw1, _adapt_set(cfg, [E(1)]), _adapt_set(cfg, [E(5)]))
    out.append(_check(cfg, "chain/oracle-single-site", "frozen oracle",
                      ["L1"], b1, _adapt(cfg, E("3/5"))))
    m2 = SpinChainModel.homogeneous(2, E(1))
    tw2 = TwistGeneral.from_shifts(E(2), E(3), E(1), E(1), E(-1))
    if cfg.mode == "float":
        m2, tw2 = m2.to_float(cfg.bits), tw2.to_float(cfg.bits)
    b2 = brute_overlap(m2, tw2, _adapt_set(cfg, [E("-1/2")]),
                       _adapt_set(cfg, [E(1)]))
    out.append(_check(cfg, "chain/oracle-two-site", "frozen oracle",
                      ["L2"], b2, _adapt(cfg, E("-1/3"))))
    return out


def suite_overlap(cfg: SuiteConfig):
    rng = _suite_rng(cfg, "overlap")
    out = []
    E = Scalar.exact
    ll = max(1, min(cfg.max_chain_length, 3))
    top = min(cfg.max_set_size, 2)
    for i in range(cfg.instances):
        ce = draw_coupling(rng)
        the = draw_set(rng, ll, ce)
        me = SpinChainModel(ll, ce, tuple(the))
        m = me if cfg.mode == "exact" else me.to_float(cfg.bits)
        for tries in range(50):
            try:
                twe = TwistGeneral.from_shifts(draw_twist_value(rng),
                                               draw_twist_value(rng),
                                               draw_twist_value(rng),
                                               draw_twist_value(rng),
                                               draw_twist_value(rng))
                break
            except DegenerateTwist:
                continue
        tw = twe if cfg.mode == "exact" else twe.to_float(cfg.bits)
        nn = rng.next_int(0, min(top, ll))
        NN = rng.next_int(nn, min(top, ll))
        use = draw_set(rng, NN, ce, avoid=list(the))
        vse = draw_set(rng, nn, ce, avoid=list(the) + list(use))
        us, vs = _adapt_set(cfg, use), _adapt_set(cfg, vse)
        inp = OverlapInput(m, tw, one_like(m.c), vs, us, m.c)
        out.append(_check(cfg, f"overlap/offshell-vs-oracle/i{i}", "off-shell sum",
                          [ParamSet(the), us, vs, tw.kt, tw.rho1, tw.rho2],
                          overlap.overlap_sum_offshell(inp),
                          brute_overlap(m, tw, vs, us)))
    # one-magnon pipeline on the two-site chain, exact-style construction
    m2e = SpinChainModel.homogeneous(2, E(1))
    m2 = m2e if cfg.mode == "exact" else m2e.to_float(cfg.bits)
    for i in range(cfg.instances):
        ve = draw_set(rng, 1, E(1), avoid=[E(0)])[0]
        ue = draw_set(rng, 2, E(1), avoid=[E(0), ve])
        v = _adapt(cfg, ve)
        alpha = bethe.one_magnon_twist(m2, v)
        rho1e = draw_twist_value(rng)
        alpha_e = bethe.one_magnon_twist(m2e, ve)
        rho2e = -(alpha_e * rho1e)
        for tries in range(50):
            try:
                twe = TwistGeneral.from_shifts(draw_twist_value(rng),
                                               draw_twist_value(rng),
                                               draw_twist_value(rng),
                                               rho1e, rho2e)
                break
            except DegenerateTwist:
                continue
        tw = twe if cfg.mode == "exact" else twe.to_float(cfg.bits)
        vs = ParamSet([v])
        us = _adapt_set(cfg, ue)
        b = brute_overlap(m2, tw, vs, us)
        inp = OverlapInput(m2, tw, alpha, vs, us, m2.c)
        out.append(_check(cfg, f"overlap/onshell-plain/i{i}", "on-shell sum",
                          [vs, us, tw.rho1, tw.rho2],
                          overlap.overlap_sum_onshell(inp), b))
        out.append(_check(cfg, f"overlap/onshell-constrained/i{i}", "constrained sum",
                          [vs, us, tw.rho1, tw.rho2],
                          overlap.overlap_sum_onshell(inp, assume_constraint=True), b))
        out.append(_check(cfg, f"overlap/determinant/i{i}", "determinant limit",
                          [vs, us, tw.rho1, tw.rho2],
                          overlap.overlap_det(inp), b))
        ze = draw_z(rng)
        z = _adapt(cfg, ze)
        lhs = ((one_like(m2.c) - z) ** (len(vs) - len(us))
               * overlap.overlap_det_z(inp, z))
        out.append(_check(cfg, f"overlap/det-z-bridge/i{i}", "regularized family",
                          [vs, us, z], lhs, overlap.overlap_sum_shifted(inp, z)))
        e1 = overlap.default_eta(1, m2.c, avoid=tuple(us) + tuple(vs), start=9)
        e2 = overlap.default_eta(1, m2.c, avoid=tuple(us) + tuple(vs), start=23)
        d1 = overlap.overlap_det(OverlapInput(m2, tw, alpha, vs, us, m2.c,
                                              eta_free=e1))
        d2 = overlap.overlap_det(OverlapInput(m2, tw, alpha, vs, us, m2.c,
                                              eta_free=e2))
        out.append(_check(cfg, f"overlap/aux-independence/i{i}", "auxiliary freedom",
                          [vs, us, e1, e2], d1, d2))
    # reduced-case frozen instances
    tw2 = TwistGeneral.from_shifts(E(2), E(3), E(1), E(1), E(-1))
    twr = TwistGeneral.from_shifts(E(2), E(-5), E(1), E(1), E(-1))
    if cfg.mode == "float":
        tw2, twr = tw2.to_float(cfg.bits), twr.to_float(cfg.bits)
    one2 = one_like(m2.c)
    vb = _adapt_set(cfg, [E("-1/2")])
    inp_r1 = OverlapInput(m2, tw2, one2, vb, _adapt_set(cfg, [E(1)]), m2.c)
    out.append(_check(cfg, "overlap/reduced-oracle", "reduced determinant",
                      ["L2", "n=N=1"], overlap.overlap_det_reduced(inp_r1),
                      _adapt(cfg, E("-1/3"))))
    us_r = _adapt_set(cfg, [E("1/5"), E("-3/5")])
    inp_r2 = OverlapInput(m2, twr, one2, vb, us_r, m2.c)
    out.append(_check(cfg, "overlap/reduced-pair", "reduced determinant",
                      ["L2", "n=1", "N=2"], overlap.overlap_det_reduced(inp_r2),
                      brute_overlap(m2, twr, vb, us_r)))
    # golden-rule prefactor: identical twists give an exactly flat log-ratio
    rho = _adapt(cfg, E(2))
    alpha0 = _adapt(cfg, E("5/3"))
    twz = TwistGeneral.from_shifts(one2 + rho, alpha0 - rho, one2, rho, -rho)
    sval = _adapt(cfg, E("7/11"))
    rate = overlap.rate_prefactor(m2, alpha0, twz, vb, vb, sval)
    out.append(_check(cfg, "overlap/rate-flat", "transition prefactor",
                      [alpha0, rho, sval], rate, zero_like(m2.c)))
    return out


SUITES = {
    "kernels": suite_kernels,
    "mid": suite_mid,
    "appendix": suite_appendix,
    "chain": suite_chain,
    "overlap": suite_overlap,
}


def run_suites(cfg: SuiteConfig, names=None):
    """Run the named suites (all by default) and return checks sorted by name.

    Suites execute concurrently; each owns an independent generator stream,
    so the sorted result is identical to a sequential run.
    """
    if names is None:
        names = list(SUITES)
    for name in names:
        if name not in SUITES:
            raise KeyError(f"unknown suite {name!r}")
    checks = []
    with ThreadPoolExecutor(max_workers=len(names) or 1) as pool:
        for part in pool.map(lambda nm: SUITES[nm](cfg), names):
            checks.extend(part)
    return sorted(checks, key=lambda ch: ch.name)
