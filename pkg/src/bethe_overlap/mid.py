"""The two-set kernel determinant K and its equivalent representations.

K_{n,m}^{(z)}(u-set | v-set) is an m x m determinant built from the f/g/h
kernels with a twist parameter z.  Four representations are implemented:

* direct      -- m x m, no prefactor, valid for every z;
* dual        -- n x n with prefactor (1-z)^(m-n);
* eta_n       -- n x n with auxiliary points and prefactor (1-z)^(m-n);
* eta_m       -- m x m with auxiliary points, no prefactor.

All four agree wherever defined; the (1-z)^(m-n) prefactor makes dual and
eta_n undefined at z=1 unless n=m (PoleError).  The conjugate kernel is the
same object at -c.  Auxiliary eta points are arbitrary but must be pairwise
distinct and distinct from the set whose elements index the determinant.

The module also carries the identity toolbox the representations rest on:
Cauchy-type determinant evaluations, the interpolation sum with closed form,
the two-column determinant lemma, the bilinear composition sums, and the
shift-summation formula that turns partition sums into single determinants.
"""

from __future__ import annotations

from .linalg import det
from .partitions import partition_sum
from .scalars import (ParamSet, PoleError, Scalar, delta_products, kernel_f,
                      kernel_g, kernel_h, one_like, set_product, zero_like)

__all__ = [
    "mid_direct", "mid_dual", "mid_eta_n", "mid_eta_m", "mid_conjugate",
    "sum_G", "sum_G_closed", "cauchy_det_g", "cauchy_det_h",
    "detlemma_columns", "bilinear_sum_plain", "bilinear_sum_conjugate",
    "sum_formula",
]


def _pow_one_minus(z: Scalar, e: int) -> Scalar:
    base = one_like(z) - z
    if e < 0 and base.is_zero():
        raise PoleError("(1-z) prefactor with negative exponent at z=1")
    return base ** e


def mid_direct(us, vs, z: Scalar, c: Scalar) -> Scalar:
    """m x m representation; defined for all z, any set sizes (0 included)."""
    us = ParamSet(us)
    vs = ParamSet(vs)
    one = one_like(c)
    m = len(vs)
    rows = []
    for j in range(m):
        fj = set_product("f", us, [vs[j]], c) * set_product("f", [vs[j]], vs.minus_index(j), c)
        row = []
        for k in range(m):
            e = fj / kernel_h(vs[j], vs[k], c)
            if j == k:
                e = e - z
            row.append(e)
        rows.append(row)
    return det(rows, one=one)


def mid_dual(us, vs, z: Scalar, c: Scalar) -> Scalar:
    """n x n representation with (1-z)^(m-n) prefactor."""
    us = ParamSet(us)
    vs = ParamSet(vs)
    one = one_like(c)
    n, m = len(us), len(vs)
    rows = []
    for j in range(n):
        fj = set_product("f", [us[j]], us.minus_index(j), c)
        fv = set_product("f", [us[j]], vs, c)
        row = []
        for k in range(n):
            e = -z * fj / kernel_h(us[j], us[k], c)
            if j == k:
                e = e + fv
            row.append(e)
        rows.append(row)
    return _pow_one_minus(z, m - n) * det(rows, one=one)


def mid_eta_n(us, vs, etas, z: Scalar, c: Scalar) -> Scalar:
    """n x n auxiliary-point representation, |etas| = n, prefactor (1-z)^(m-n)."""
    us = ParamSet(us)
    vs = ParamSet(vs)
    etas = ParamSet(etas)
    if len(etas) != len(us):
        raise ValueError("eta set must match the size of the u set")
    one = one_like(c)
    n, m = len(us), len(vs)
    rows = []
    for j in range(n):
        fv = set_product("f", [us[j]], vs, c)
        row = []
        for k in range(n):
            ek = etas.minus_index(k)
            row.append(fv / set_product("g", [us[j]], ek, c)
                       - z * set_product("h", [us[j]], ek, c))
        rows.append(row)
    dl, dlp = delta_products(us, c)
    de, _ = delta_products(etas, c)
    return _pow_one_minus(z, m - n) * dlp * de * det(rows, one=one)


def mid_eta_m(us, vs, etas, z: Scalar, c: Scalar) -> Scalar:
    """m x m auxiliary-point representation, |etas| = m, no prefactor."""
    us = ParamSet(us)
    vs = ParamSet(vs)
    etas = ParamSet(etas)
    if len(etas) != len(vs):
        raise ValueError("eta set must match the size of the v set")
    one = one_like(c)
    m = len(vs)
    rows = []
    for j in range(m):
        fu = set_product("f", us, [vs[j]], c)
        row = []
        for k in range(m):
            ek = etas.minus_index(k)
            row.append(fu * set_product("h", [vs[j]], ek, c)
                       - z / set_product("g", [vs[j]], ek, c))
        rows.append(row)
    _, dvp = delta_products(vs, c)
    de, _ = delta_products(etas, c)
    return dvp * de * det(rows, one=one)


def mid_conjugate(us, vs, z: Scalar, c: Scalar, rep="direct") -> Scalar:
    """The conjugate kernel: the same determinant with c -> -c."""
    if rep == "direct":
        return mid_direct(us, vs, z, -c)
    if rep == "dual":
        return mid_dual(us, vs, z, -c)
    raise ValueError(f"unknown representation {rep!r}")


# ---------------------------------------------------------------------------
# identity toolbox
# ---------------------------------------------------------------------------

def sum_G(us, etas, c: Scalar):
    """The interpolation sum G[j][k], computed literally term by term."""
    us = ParamSet(us)
    etas = ParamSet(etas)
    n = len(us)
    out = []
    for j in range(n):
        row = []
        for k in range(n):
            acc = zero_like(c)
            for l in range(n):
                acc = acc + (kernel_g(us[l], etas[k], c)
                             / kernel_h(us[j], us[l], c)
                             * set_product("g", [us[l]], us.minus_index(l), c)
                             / set_product("g", [us[l]], etas, c))
            row.append(acc)
        out.append(row)
    return out


def sum_G_closed(us, etas, c: Scalar):
    """Closed form of the same sum: h(u_j, eta-complement_k) / h(u_j, u-set)."""
    us = ParamSet(us)
    etas = ParamSet(etas)
    n = len(us)
    out = []
    for j in range(n):
        hd = set_product("h", [us[j]], us, c)
        row = []
        for k in range(n):
            row.append(set_product("h", [us[j]], etas.minus_index(k), c) / hd)
        out.append(row)
    return out


def cauchy_det_g(us, etas, c: Scalar) -> Scalar:
    """Closed form of det[g(u_j, eta_k)]: double product over delta-products."""
    dlu, dlup = delta_products(us, c)
    de, _ = delta_products(etas, c)
    return set_product("g", us, etas, c) / (dlup * de)


def cauchy_det_h(us, etas, c: Scalar) -> Scalar:
    """Closed form of det[h(u_j, eta-complement_k)]: 1/(Δ(etas)·Δ'(us))."""
    _, dlup = delta_products(us, c)
    de, _ = delta_products(etas, c)
    return one_like(c) / (de * dlup)


def detlemma_columns(phi1_vals, phi2_vals, ws, etas, z: Scalar, c: Scalar,
                     arb_cols=None):
    """Build the two N x N matrices of the column-transformation lemma.

    Rows are indexed by the points `ws`.  The first n columns (from
    `arb_cols`, an N x n array) are shared verbatim by both matrices; the
    remaining M = |etas| columns are the paired phi-combinations, using
    complements within `etas`.  The determinants differ by (z-1)^M, which is
    what the tests assert.
    """
    ws = ParamSet(ws)
    etas = ParamSet(etas)
    nn = len(ws)
    mm = len(etas)
    n_arb = nn - mm
    if arb_cols is None:
        arb_cols = [[] for _ in range(nn)]
    if any(len(r) != n_arb for r in arb_cols):
        raise ValueError("arbitrary column block must be N x (N - |etas|)")
    sign = one_like(c) if (mm - 1) % 2 == 0 else -one_like(c)
    f1, f2 = [], []
    for j in range(nn):
        p1, p2 = phi1_vals[j], phi2_vals[j]
        row1 = list(arb_cols[j])
        row2 = list(arb_cols[j])
        for t in range(mm):
            ek = etas.minus_index(t)
            g_ew = set_product("g", ek, [ws[j]], c)
            h_ew = set_product("h", ek, [ws[j]], c)
            g_we = set_product("g", [ws[j]], ek, c)
            h_we = set_product("h", [ws[j]], ek, c)
            row1.append(p1 * (z / g_ew - h_ew) + p2 * (one_like(c) / g_we - z * h_we))
            row2.append(sign * p1 / g_we - p2 * h_we)
        f1.append(row1)
        f2.append(row2)
    return f1, f2


def bilinear_sum_plain(us, vs, xis, z1: Scalar, z2: Scalar, c: Scalar) -> Scalar:
    """Composition sum over bipartitions of `xis`:

        sum  z2^|xi_i| K^(z1)(us|xi_i) K^(z2)(vs|xi_ii) f(xi_ii,xi_i) f(us,xi_ii)

    which collapses to K^(z1 z2)(us+vs | xis).
    """
    def term(bp):
        return (z2 ** len(bp.part_i)
                * mid_direct(us, bp.part_i, z1, c)
                * mid_direct(vs, bp.part_ii, z2, c)
                * set_product("f", bp.part_ii, bp.part_i, c)
                * set_product("f", us, bp.part_ii, c))
    return partition_sum(xis, term, zero_like(c))


def bilinear_sum_conjugate(us, vs, xis, z1: Scalar, z2: Scalar, c: Scalar) -> Scalar:
    """Composition sum with a conjugate kernel on the first slot:

        sum (-z2/z1)^|xi_i| Kbar^(z1)(us|xi_i) K^(z2)(vs|xi_ii) f(xi_ii,xi_i)

    which collapses to f(xis,us) K^(z2/z1)(shift(us,-c)+vs | xis).
    """
    if z1.is_zero():
        raise PoleError("conjugate composition needs z1 != 0")
    ratio = -(z2 / z1)

    def term(bp):
        return (ratio ** len(bp.part_i)
                * mid_conjugate(us, bp.part_i, z1, c)
                * mid_direct(vs, bp.part_ii, z2, c)
                * set_product("f", bp.part_ii, bp.part_i, c))
    return partition_sum(xis, term, zero_like(c))


def sum_formula(phi1, phi2, col_fns, us, c: Scalar):
    """Shift-summation identity.  Returns (partition sum, determinant form).

    H(ws) = Δ(ws) det[col_fns[k](w_j)]; the left side sums
    phi1(u_i-block) phi2(u_ii-block) f(ii,i) H(shifted i-block + ii-block)
    over bipartitions; the right side is the single determinant with rows
    phi1(u_j) col_k(u_j - c) + phi2(u_j) col_k(u_j).
    """
    us = ParamSet(us)
    one = one_like(c)
    nn = len(us)
    if len(col_fns) != nn:
        raise ValueError("need exactly one column function per point")

    def hfun(ws):
        dl, _ = delta_products(ws, c)
        rows = [[col_fns[k](w) for k in range(nn)] for w in ws]
        return dl * det(rows, one=one)

    def term(bp):
        val = one
        for x in bp.part_i:
            val = val * phi1(x)
        for x in bp.part_ii:
            val = val * phi2(x)
        val = val * set_product("f", bp.part_ii, bp.part_i, c)
        shifted = bp.part_i.shifted(-c)
        return val * hfun(shifted.concat(bp.part_ii))

    lhs = partition_sum(us, term, zero_like(c))

    dl, _ = delta_products(us, c)
    rows = []
    for j in range(nn):
        u = us[j]
        rows.append([phi1(u) * col_fns[k](u - c) + phi2(u) * col_fns[k](u)
                     for k in range(nn)])
    rhs = dl * det(rows, one=one)
    return lhs, rhs
