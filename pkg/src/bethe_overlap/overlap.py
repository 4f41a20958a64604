"""Overlaps between a diagonally twisted Bethe state on roots v_1..v_n and a
modified state on roots u_1..u_N, in four interchangeable guises:

* ``overlap_sum_offshell``   double partition sum over both root sets, valid
                             with no on-shell assumption at all;
* ``overlap_sum_onshell``    v-roots on shell: the v-partition sum collapses
                             once (plain), or completely when the twist ratio
                             matches the shift parameters (constrained);
* ``overlap_det_z``          the one-parameter determinant family behind the
                             constrained sum, at a regularization point z != 1;
* ``overlap_det``            the z -> 1 limit taken algebraically: an N x N
                             determinant with n columns pinned to the v-roots
                             and N - n free auxiliary columns;
* ``overlap_det_reduced``    the same at alpha = 1, rho1 = -rho2, with the
                             u-roots on shell for the reduced system.

All formulas short-circuit to 0 for n > N, matching the bracket structure of
the states themselves.  On-shell preconditions are attested here, never
trusted: exact mode demands exact residual zeros, float mode allows
1e3 * solver tolerance.  ``rate_prefactor`` packages the golden-rule factor
|2c d/dz log(L1/L2)|^2 |S|^2 at z = 0 with analytic derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass

import gmpy2

from . import bethe, linalg
from .chain import SpinChainModel, TwistDiag, TwistGeneral, WeightPair
from .mid import mid_conjugate, mid_direct
from .partitions import enumerate_bipartitions
from .scalars import (ParamSet, PoleError, Scalar, delta_products, kernel_f,
                      kernel_g, kernel_h, one_like, set_product, zero_like)

__all__ = [
    "NotOnShell", "ConstraintViolated", "ReducedSystemViolated",
    "EigenvalueZeroAtOrigin", "OverlapInput", "default_eta",
    "overlap_sum_offshell", "overlap_sum_onshell", "overlap_sum_shifted",
    "overlap_det_z", "overlap_det", "overlap_det_reduced", "rate_prefactor",
]


class NotOnShell(ValueError):
    """The v-roots fail their diagonal system beyond tolerance."""


class ConstraintViolated(ValueError):
    """The twist ratio does not match the shift parameters as required."""


class ReducedSystemViolated(ValueError):
    """The u-roots fail the reduced system beyond tolerance."""


class EigenvalueZeroAtOrigin(ZeroDivisionError):
    """A transfer eigenvalue vanishes at z = 0; the log-derivative is undefined."""


def _weights(obj) -> WeightPair:
    return obj.weights() if isinstance(obj, SpinChainModel) else obj


def _theta_pool(obj):
    return tuple(obj.theta) if isinstance(obj, SpinChainModel) else ()


def _prod(fn, pts, one):
    acc = one
    for p in pts:
        acc = acc * fn(p)
    return acc


def _offsets_clear(x, pool, c):
    for a in pool:
        d = x - a
        if d.is_zero() or (d - c).is_zero() or (d + c).is_zero():
            return False
    return True


@dataclass(frozen=True)
class OverlapInput:
    """Everything the overlap formulas consume.

    weights may be a WeightPair or a SpinChainModel (the latter also feeds
    the brute-force oracle).  eta_free, when given, supplies the N - n
    auxiliary points of the determinant forms; otherwise a deterministic
    collision-free default is generated per call.
    """

    weights: object
    twist2: TwistGeneral
    alpha: Scalar
    v_set: ParamSet
    u_set: ParamSet
    c: Scalar
    eta_free: ParamSet = None

    def __post_init__(self):
        object.__setattr__(self, "v_set", ParamSet(self.v_set))
        object.__setattr__(self, "u_set", ParamSet(self.u_set))
        if self.eta_free is not None:
            object.__setattr__(self, "eta_free", ParamSet(self.eta_free))
        c = self.c
        if c.is_zero():
            raise ValueError("c must be nonzero")
        us, vs = self.u_set, self.v_set
        for i in range(len(us)):
            for j in range(i):
                if not _offsets_clear(us[i], [us[j]], c):
                    raise ValueError("u points must differ and differ from +-c shifts of each other")
        for i in range(len(vs)):
            for j in range(i):
                if (vs[i] - vs[j]).is_zero():
                    raise ValueError("v points must be pairwise distinct")
        for u in us:
            if not _offsets_clear(u, vs, c):
                raise ValueError("u and v points may not coincide or sit one c apart")
        if self.eta_free is not None and self.n <= self.N:
            if len(self.eta_free) != self.N - self.n:
                raise ValueError("eta_free must have size N - n")
            for i in range(len(self.eta_free)):
                for j in range(i):
                    if (self.eta_free[i] - self.eta_free[j]).is_zero():
                        raise ValueError("eta points must be pairwise distinct")
                for p in list(us) + list(vs):
                    if (self.eta_free[i] - p).is_zero():
                        raise ValueError("eta points must avoid u and v points")

    @property
    def n(self) -> int:
        return len(self.v_set)

    @property
    def N(self) -> int:
        return len(self.u_set)


def default_eta(count: int, c: Scalar, avoid=(), start=None) -> ParamSet:
    """Deterministic auxiliary points: integers from ``start`` (default
    count + 2) upward, skipping anything within a c-shift of ``avoid``."""
    if count < 0:
        raise ValueError("count must be >= 0")
    if start is None:
        start = count + 2
    if c.mode == "exact":
        mk = Scalar.exact
    else:
        bits = c.bits
        mk = lambda k: Scalar.floating(k, 0, bits)
    out = []
    k = start
    pool = list(avoid)
    while len(out) < count:
        x = mk(k)
        k += 1
        if _offsets_clear(x, pool, c):
            out.append(x)
    return ParamSet(out)


# ---------------------------------------------------------------------------
# attestations
# ---------------------------------------------------------------------------

def _check_small(vals, tol, exc, msg):
    if not vals:
        return
    if vals[0].mode == "exact":
        if any(not v.is_zero() for v in vals):
            raise exc(msg)
        return
    bits = vals[0].bits
    thr = gmpy2.mpfr(tol if tol is not None else bethe.DEFAULT_TOL, bits) * 1000
    thr2 = thr * thr
    if any(v.abs2().val.real > thr2 for v in vals):
        raise exc(msg)


def _attest_onshell(inp, tol, alpha=None):
    a = inp.alpha if alpha is None else alpha
    if inp.n == 0:
        return
    sysd = bethe.BetheSystem("diag", inp.weights, TwistDiag(a), inp.n, inp.c)
    _check_small(bethe.residual(sysd, inp.v_set), tol, NotOnShell,
                 "v roots do not satisfy the diagonal system")


def _attest_constraint(inp, tol):
    _check_small([inp.alpha - inp.twist2.alpha_partner()], tol, ConstraintViolated,
                 "twist ratio must equal -rho2/rho1")


def _attest_reduced(inp, tol):
    sysr = bethe.BetheSystem("reduced", inp.weights, inp.twist2, inp.N, inp.c)
    _check_small(bethe.residual(sysr, inp.u_set), tol, ReducedSystemViolated,
                 "u roots do not satisfy the reduced system")


# ---------------------------------------------------------------------------
# partition sums
# ---------------------------------------------------------------------------

def overlap_sum_offshell(inp: OverlapInput) -> Scalar:
    """Double partition sum; no on-shell assumption anywhere."""
    n, N, c = inp.n, inp.N, inp.c
    if n > N:
        return zero_like(c)
    w = _weights(inp.weights)
    tw = inp.twist2
    one = one_like(c)
    ratio = tw.rho1 / tw.rho2
    acc = zero_like(c)
    for ub in enumerate_bipartitions(inp.u_set):
        uI, uII = ub.part_i, ub.part_ii
        NI, NII = len(uI), len(uII)
        fu = set_product("f", uII, uI, c)
        lu = _prod(w.lambda1, uI, one) * _prod(w.lambda2, uII, one)
        for vb in enumerate_bipartitions(inp.v_set):
            vI, vII = vb.part_i, vb.part_ii
            nI, nII = len(vI), len(vII)
            # kernels of these shapes vanish identically at z = 1
            if NII < nII or NI < nI:
                continue
            acc = acc + (ratio ** (nII - NII)
                         * _prod(w.lambda2, vI, one) * _prod(w.lambda1, vII, one)
                         * set_product("f", vI, vII, c) * fu * lu
                         * mid_direct(uII, vII, one, c)
                         * mid_conjugate(uI, vI, one, c))
    return tw.mu() ** N * (tw.rho1 / tw.km) ** (N - n) * acc


def _sum_constrained(inp, z):
    # v-partition sum already collapsed; single u-partition sum with the
    # shifted merged set feeding one kernel determinant
    n, N, c = inp.n, inp.N, inp.c
    w = _weights(inp.weights)
    tw = inp.twist2
    one = one_like(c)
    ratio = tw.rho2 / tw.rho1
    acc = zero_like(c)
    for ub in enumerate_bipartitions(inp.u_set):
        uI, uII = ub.part_i, ub.part_ii
        merged = uI.shifted(-c).concat(uII)
        acc = acc + (ratio ** len(uII)
                     * _prod(w.lambda2, uII, one) * _prod(w.lambda1, uI, one)
                     * set_product("f", uII, uI, c)
                     * set_product("f", inp.v_set, uI, c)
                     * mid_direct(merged, inp.v_set, z, c))
    sgn = 1 if n % 2 == 0 else -1
    return (sgn * tw.mu() ** N * (tw.rho1 / tw.km) ** (N - n)
            * _prod(w.lambda2, inp.v_set, one) * acc)


def overlap_sum_onshell(inp: OverlapInput, assume_constraint: bool = False,
                        tol=None) -> Scalar:
    """Partition sum with the v-roots attested on shell.

    Without the constraint the v-partition sum survives inside a per-term
    factor G; with ``assume_constraint`` the twist ratio must equal
    -rho2/rho1 and G closes into a single shifted kernel determinant.
    """
    n, N, c = inp.n, inp.N, inp.c
    if n > N:
        return zero_like(c)
    _attest_onshell(inp, tol)
    if assume_constraint:
        _attest_constraint(inp, tol)
        return _sum_constrained(inp, one_like(c))
    w = _weights(inp.weights)
    tw = inp.twist2
    one = one_like(c)
    ratio_u = tw.rho2 / tw.rho1
    ratio_v = inp.alpha * tw.rho1 / tw.rho2
    acc = zero_like(c)
    for ub in enumerate_bipartitions(inp.u_set):
        uI, uII = ub.part_i, ub.part_ii
        NI, NII = len(uI), len(uII)
        coef = (ratio_u ** NII * _prod(w.lambda2, uII, one)
                * _prod(w.lambda1, uI, one) * set_product("f", uII, uI, c))
        gacc = zero_like(c)
        for vb in enumerate_bipartitions(inp.v_set):
            vI, vII = vb.part_i, vb.part_ii
            nI, nII = len(vI), len(vII)
            if NII < nII or NI < nI:
                continue
            gacc = gacc + (ratio_v ** nII * set_product("f", vII, vI, c)
                           * mid_direct(uII, vII, one, c)
                           * mid_conjugate(uI, vI, one, c))
        acc = acc + coef * gacc
    return (tw.mu() ** N * (tw.rho1 / tw.km) ** (N - n)
            * _prod(w.lambda2, inp.v_set, one) * acc)


def overlap_sum_shifted(inp: OverlapInput, z: Scalar, tol=None) -> Scalar:
    """The constrained on-shell sum with the kernel twisted by z; z = 1
    reproduces overlap_sum_onshell(assume_constraint=True)."""
    if inp.n > inp.N:
        return zero_like(inp.c)
    _attest_onshell(inp, tol)
    _attest_constraint(inp, tol)
    return _sum_constrained(inp, z)


# ---------------------------------------------------------------------------
# determinants
# ---------------------------------------------------------------------------

def overlap_det_z(inp: OverlapInput, z: Scalar, etas=None, tol=None) -> Scalar:
    """Pre-limit determinant family at a regularization point z != 1.

    Needs a full auxiliary set of N distinct points (defaulted
    deterministically); times (1-z)^(n-N) it reproduces overlap_sum_shifted
    at the same z, independently of the auxiliary choice.
    """
    n, N, c = inp.n, inp.N, inp.c
    if n > N:
        return zero_like(c)
    one = one_like(c)
    if (z - one).is_zero():
        raise ValueError("z = 1 is the limit point; use overlap_det instead")
    if etas is None:
        pool = tuple(inp.u_set) + tuple(inp.v_set) + _theta_pool(inp.weights)
        etas = default_eta(N, c, avoid=pool, start=N + 2)
    etas = ParamSet(etas)
    if len(etas) != N:
        raise ValueError("auxiliary set must have size N")
    for i in range(len(etas)):
        for j in range(i):
            if (etas[i] - etas[j]).is_zero():
                raise ValueError("auxiliary points must be distinct")
        for u in inp.u_set:
            if (etas[i] - u).is_zero():
                raise ValueError("auxiliary points must avoid the u points")
    w = _weights(inp.weights)
    tw = inp.twist2
    r1, r2 = tw.rho1 / tw.km, tw.rho2 / tw.km
    sgn_rows = 1 if (N - 1) % 2 == 0 else -1
    comps = [etas.minus_index(k) for k in range(N)]
    rows = []
    for u in inp.u_set:
        lh1 = sgn_rows * r1 * w.lambda1(u)
        lh2 = r2 * w.lambda2(u)
        fvu = set_product("f", inp.v_set, [u], c)
        fuv = set_product("f", [u], inp.v_set, c)
        row = []
        for k in range(N):
            ek = comps[k]
            row.append(lh1 * (set_product("h", ek, [u], c)
                              - z * fvu / set_product("g", ek, [u], c))
                       + lh2 * (fuv / set_product("g", [u], ek, c)
                                - z * set_product("h", [u], ek, c)))
        rows.append(row)
    det = linalg.det(rows, one=one)
    sgn = 1 if n % 2 == 0 else -1
    return (sgn * tw.mu() ** N * (tw.km / tw.rho1) ** n
            * _prod(w.lambda2, inp.v_set, one)
            * delta_products(etas, c)[1] * delta_products(inp.u_set, c)[0] * det)


def _free_etas(inp):
    if inp.eta_free is not None:
        return inp.eta_free
    pool = tuple(inp.u_set) + tuple(inp.v_set) + _theta_pool(inp.weights)
    return default_eta(inp.N - inp.n, inp.c, avoid=pool, start=inp.N + 2)


def overlap_det(inp: OverlapInput, tol=None) -> Scalar:
    """The z -> 1 determinant: n columns pinned to the v-roots, N - n free
    auxiliary columns.  Twist ratio constrained, v-roots on shell, u-roots
    arbitrary."""
    n, N, c = inp.n, inp.N, inp.c
    if n > N:
        return zero_like(c)
    _attest_constraint(inp, tol)
    _attest_onshell(inp, tol)
    free = _free_etas(inp)
    w = _weights(inp.weights)
    tw = inp.twist2
    one = one_like(c)
    r1, r2 = tw.rho1 / tw.km, tw.rho2 / tw.km
    sgn_rows = 1 if (N - 1) % 2 == 0 else -1
    sgn_free = 1 if (n + 1) % 2 == 0 else -1
    fcomps = [free.minus_index(t) for t in range(N - n)]
    rows = []
    for u in inp.u_set:
        lh1 = r1 * w.lambda1(u)
        lh2 = r2 * w.lambda2(u)
        hv_u = set_product("h", inp.v_set, [u], c)
        hu_v = set_product("h", [u], inp.v_set, c)
        h_eu = set_product("h", free, [u], c)
        g_eu = set_product("g", free, [u], c)
        g_ue = set_product("g", [u], free, c)
        h_ue = set_product("h", [u], free, c)
        row = []
        for k in range(n):
            vk = inp.v_set[k]
            t1 = h_eu / kernel_h(vk, u, c) - kernel_g(vk, u, c) / g_eu
            t2 = kernel_g(u, vk, c) / g_ue - h_ue / kernel_h(u, vk, c)
            row.append(sgn_rows * lh1 * hv_u * t1 + lh2 * hu_v * t2)
        for t in range(N - n):
            ek = fcomps[t]
            row.append(sgn_free * lh1 * hv_u / set_product("g", [u], ek, c)
                       - lh2 * hu_v * set_product("h", [u], ek, c))
        rows.append(row)
    det = linalg.det(rows, one=one)
    return ((-tw.mu()) ** N * (tw.km / tw.rho1) ** n
            * _prod(w.lambda2, inp.v_set, one)
            * delta_products(inp.v_set, c)[1] * delta_products(free, c)[1]
            * set_product("g", inp.v_set, free, c)
            * delta_products(inp.u_set, c)[0] * det)


def overlap_det_reduced(inp: OverlapInput, tol=None) -> Scalar:
    """Determinant at alpha = 1, rho1 = -rho2, with the u-roots on shell for
    the reduced system; the weight ratios then collapse into the V factor."""
    n, N, c = inp.n, inp.N, inp.c
    if n > N:
        return zero_like(c)
    one = one_like(c)
    tw = inp.twist2
    if not (inp.alpha - one).is_zero():
        raise ConstraintViolated("reduced determinant needs alpha = 1")
    if not (tw.rho1 + tw.rho2).is_zero():
        raise ConstraintViolated("reduced determinant needs rho1 = -rho2")
    _attest_onshell(inp, tol)
    _attest_reduced(inp, tol)
    aa = bethe.reduced_alpha(tw)
    free = _free_etas(inp)
    w = _weights(inp.weights)
    sgn_free = 1 if (N + n + 1) % 2 == 0 else -1
    fcomps = [free.minus_index(t) for t in range(N - n)]
    rows = []
    for j in range(N):
        u = inp.u_set[j]
        ucomp = inp.u_set.minus_index(j)
        hv_u = set_product("h", inp.v_set, [u], c)
        hu_v = set_product("h", [u], inp.v_set, c)
        vj = (aa * set_product("h", [u], ucomp, c) * hv_u
              / (set_product("h", ucomp, [u], c) * hu_v))
        h_eu = set_product("h", free, [u], c)
        g_eu = set_product("g", free, [u], c)
        g_ue = set_product("g", [u], free, c)
        h_ue = set_product("h", [u], free, c)
        row = []
        for k in range(n):
            vk = inp.v_set[k]
            t1 = h_eu / kernel_h(vk, u, c) - kernel_g(vk, u, c) / g_eu
            t2 = kernel_g(u, vk, c) / g_ue - h_ue / kernel_h(u, vk, c)
            row.append(t2 - vj * t1)
        for t in range(N - n):
            ek = fcomps[t]
            row.append(sgn_free * vj / set_product("g", [u], ek, c)
                       - set_product("h", [u], ek, c))
        rows.append(row)
    det = linalg.det(rows, one=one)
    rho = tw.rho1
    return (tw.mu() ** N * (rho / tw.km) ** (N - n)
            * _prod(w.lambda2, inp.v_set, one) * _prod(w.lambda2, inp.u_set, one)
            * set_product("h", inp.u_set, inp.v_set, c)
            * delta_products(inp.v_set, c)[1] * delta_products(free, c)[1]
            * set_product("g", inp.v_set, free, c)
            * delta_products(inp.u_set, c)[0] * det)


# ---------------------------------------------------------------------------
# golden-rule prefactor
# ---------------------------------------------------------------------------

def _eigen_terms(w, c1, c2, c3, z, roots, c):
    """Value and z-derivative of c1 l1(z) f(roots,z) + c2 l2(z) f(z,roots)
    + c3 l1(z) l2(z) g(z,roots), by Leibniz accumulation (division-free)."""
    one = one_like(c)
    zero = zero_like(c)
    l1, l2 = w.lambda1(z), w.lambda2(z)
    d1, d2 = w.dlambda1(z), w.dlambda2(z)

    fuz, dfuz = one, zero
    for u in roots:
        fv = kernel_f(u, z, c)
        dv = c / ((u - z) * (u - z))
        dfuz = dfuz * fv + fuz * dv
        fuz = fuz * fv
    fzu, dfzu = one, zero
    for u in roots:
        fv = kernel_f(z, u, c)
        dv = -(c / ((z - u) * (z - u)))
        dfzu = dfzu * fv + fzu * dv
        fzu = fzu * fv

    val = c1 * l1 * fuz + c2 * l2 * fzu
    der = c1 * (d1 * fuz + l1 * dfuz) + c2 * (d2 * fzu + l2 * dfzu)
    if c3 is not None and not c3.is_zero():
        gzu, dgzu = one, zero
        for u in roots:
            gv = kernel_g(z, u, c)
            dv = -(c / ((z - u) * (z - u)))
            dgzu = dgzu * gv + gzu * dv
            gzu = gzu * gv
        val = val + c3 * l1 * l2 * gzu
        der = der + c3 * ((d1 * l2 + l1 * d2) * gzu + l1 * l2 * dgzu)
    return val, der


def rate_prefactor(weights, alpha, twist2, v_roots, u_roots,
                   overlap_value: Scalar, c=None) -> Scalar:
    """|2c d/dz log(L1(z|v)/L2(z|u))|^2 |S|^2 at z = 0, derivatives taken
    analytically.  The physical 2pi/hbar and density factors are the
    caller's business."""
    if c is None:
        if isinstance(weights, SpinChainModel):
            c = weights.c
        else:
            raise ValueError("pass c explicitly when weights is not a chain model")
    w = _weights(weights)
    if w.dlambda1 is None or w.dlambda2 is None:
        raise ValueError("weights must carry derivative closures")
    z0 = zero_like(c)
    one = one_like(c)
    v_roots = ParamSet(v_roots)
    u_roots = ParamSet(u_roots)
    val1, der1 = _eigen_terms(w, one, alpha, None, z0, v_roots, c)
    val2, der2 = _eigen_terms(w, twist2.kt - twist2.rho1, twist2.k - twist2.rho2,
                              twist2.rho1 + twist2.rho2, z0, u_roots, c)
    if val1.is_zero():
        raise EigenvalueZeroAtOrigin("diagonal transfer eigenvalue vanishes at the origin")
    if val2.is_zero():
        raise EigenvalueZeroAtOrigin("general transfer eigenvalue vanishes at the origin")
    dlog = der1 / val1 - der2 / val2
    two_c = c + c
    return (two_c * dlog).abs2() * overlap_value.abs2()
