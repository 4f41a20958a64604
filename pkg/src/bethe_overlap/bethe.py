"""Root systems: residual evaluators, a damped Newton solver, and exact
on-shell constructions used by the test layer.

Three systems share one interface.  With the chain's vacuum weights
lambda_1, lambda_2 and a root set u_1..u_N:

* ``diag``      lambda1(u_j) f(u-comp_j, u_j) = alpha lambda2(u_j) f(u_j, u-comp_j)
* ``modified``  (kt - rho1) lambda1(u_j) f(u-comp_j, u_j)
                  = (k - rho2) lambda2(u_j) f(u_j, u-comp_j)
                  + (rho1 + rho2) lambda1(u_j) lambda2(u_j) g(u_j, u-comp_j)
* ``reduced``   the modified system at rho1 = -rho2, rewritten through the
                hatted weights (rho_l / km) lambda_l and h-ratios; it is
                equivalent to a diag system at the effective ratio
                (k + rho)/(kt - rho).

Residuals are the per-equation defects (lhs - rhs), so a root set is
on-shell iff every component vanishes.  The solver is plain damped Newton
on those rational defects; no logarithmic form, no branch cuts.
"""

from __future__ import annotations

from dataclasses import dataclass

import gmpy2

from . import linalg
from .chain import DegenerateTwist, SpinChainModel, TwistDiag, TwistGeneral, WeightPair
from .scalars import (ParamSet, PoleError, Scalar, _ctx, one_like,
                      set_product, zero_like)

__all__ = [
    "NoConvergence", "JacobianSingular", "BetheSystem", "RootSet",
    "residual", "solve_newton", "one_magnon_twist", "reduced_alpha",
    "heuristic_initial", "full_sector_initial", "modified_onshell_twist",
    "DEFAULT_TOL", "DEFAULT_BITS",
]

DEFAULT_TOL = "1e-30"
DEFAULT_BITS = 256
# coincident roots within 1e3*tol of each other mark a solve as failed
DEDUP_FACTOR = 1000
_DIFF_STEP = "1e-18"
_DAMP_FLOOR = 2.0 ** -20


class NoConvergence(RuntimeError):
    """A solve did not reach the tolerance; the best iterate is attached."""

    def __init__(self, msg, rootset=None):
        super().__init__(msg)
        self.rootset = rootset


class JacobianSingular(ZeroDivisionError):
    """The Newton linear system is singular at the current iterate."""


def _as_weights(w) -> WeightPair:
    if isinstance(w, SpinChainModel):
        return w.weights()
    return w


@dataclass(frozen=True)
class BetheSystem:
    """One of the three root systems, with its twist data and size."""

    kind: str
    weights: object          # WeightPair or SpinChainModel
    twist: object            # TwistDiag for diag, TwistGeneral otherwise
    root_count: int
    c: Scalar

    def __post_init__(self):
        if self.kind not in ("diag", "modified", "reduced"):
            raise ValueError(f"unknown system kind {self.kind!r}")
        if self.root_count < 0:
            raise ValueError("root_count must be >= 0")
        if self.kind == "diag":
            if not isinstance(self.twist, TwistDiag):
                raise TypeError("diag system needs a TwistDiag")
        else:
            if not isinstance(self.twist, TwistGeneral):
                raise TypeError(f"{self.kind} system needs a TwistGeneral")
        if self.kind == "reduced":
            if not (self.twist.rho1 + self.twist.rho2).is_zero():
                raise DegenerateTwist("reduced system needs rho1 + rho2 = 0")
        if isinstance(self.weights, SpinChainModel):
            # spin-1/2 realization: the modified on-shell statement holds
            # only in the full sector, so pin the count there
            if self.kind == "modified" and self.root_count != self.weights.length:
                raise ValueError("modified system on a chain needs root_count = length")
            if self.kind == "diag" and self.root_count > self.weights.length:
                raise ValueError("diag root_count exceeds chain length")


@dataclass(frozen=True)
class RootSet:
    roots: ParamSet
    residual_norm: Scalar
    iterations: int
    converged: bool

    def to_float(self, bits: int) -> "RootSet":
        return RootSet(ParamSet(x.to_float(bits) for x in self.roots),
                       self.residual_norm.to_float(bits),
                       self.iterations, self.converged)


def residual(sys: BetheSystem, roots) -> list:
    """Per-equation defect vector; all zeros means on-shell."""
    roots = ParamSet(roots)
    if len(roots) != sys.root_count:
        raise ValueError(f"expected {sys.root_count} roots, got {len(roots)}")
    w = _as_weights(sys.weights)
    c = sys.c
    nn = len(roots)
    out = []
    if sys.kind == "diag":
        a = sys.twist.alpha
        for j in range(nn):
            comp = roots.minus_index(j)
            u = roots[j]
            out.append(w.lambda1(u) * set_product("f", comp, [u], c)
                       - a * w.lambda2(u) * set_product("f", [u], comp, c))
        return out
    tw = sys.twist
    if sys.kind == "modified":
        c1 = tw.kt - tw.rho1
        c2 = tw.k - tw.rho2
        c3 = tw.rho1 + tw.rho2
        for j in range(nn):
            comp = roots.minus_index(j)
            u = roots[j]
            l1 = w.lambda1(u)
            l2 = w.lambda2(u)
            out.append(c1 * l1 * set_product("f", comp, [u], c)
                       - c2 * l2 * set_product("f", [u], comp, c)
                       - c3 * l1 * l2 * set_product("g", [u], comp, c))
        return out
    # reduced: hatted-weight defect form
    aa = reduced_alpha(tw)
    sgn = 1 if nn % 2 == 0 else -1
    r1k = tw.rho1 / tw.km
    r2k = tw.rho2 / tw.km
    for j in range(nn):
        comp = roots.minus_index(j)
        u = roots[j]
        ratio = set_product("h", [u], comp, c) / set_product("h", comp, [u], c)
        out.append(r1k * w.lambda1(u)
                   - sgn * aa * ratio * r2k * w.lambda2(u))
    return out


def reduced_alpha(tw: TwistGeneral) -> Scalar:
    """Effective diagonal ratio (k + rho1)/(kt - rho1) of the reduced system."""
    den = tw.kt - tw.rho1
    if den.is_zero():
        raise DegenerateTwist("kt = rho1 leaves the reduced system undefined")
    return (tw.k + tw.rho1) / den


def one_magnon_twist(weights, v: Scalar) -> Scalar:
    """alpha making {v} an exact diag root: alpha = lambda1(v)/lambda2(v)."""
    w = _as_weights(weights)
    return w.lambda1(v) / w.lambda2(v)


# ---------------------------------------------------------------------------
# Newton
# ---------------------------------------------------------------------------

def _sup_abs2(vals):
    worst = None
    for s in vals:
        a2 = s.abs2().val.real
        if worst is None or a2 > worst:
            worst = a2
    return worst


def _jacobian(sys, pts, bits):
    h = Scalar.floating(_DIFF_STEP, 0, bits)
    two_h = h + h
    nn = len(pts)
    cols = []
    for k in range(nn):
        up = list(pts)
        dn = list(pts)
        up[k] = up[k] + h
        dn[k] = dn[k] - h
        fu = residual(sys, ParamSet(up))
        fd = residual(sys, ParamSet(dn))
        cols.append([(a - b) / two_h for a, b in zip(fu, fd)])
    return [[cols[k][j] for k in range(nn)] for j in range(nn)]


def solve_newton(sys: BetheSystem, initial, tol=None, max_iter: int = 200) -> RootSet:
    """Damped Newton on the residual, float mode only.

    The step is halved until the sup-norm of the residual decreases (floor
    2^-20); stalls and iteration exhaustion return the best iterate with
    ``converged=False`` instead of raising.  Roots closer than 1e3*tol to
    each other also mark the solve failed: coincident roots sit on poles of
    everything downstream.
    """
    pts = list(ParamSet(initial))
    if len(pts) != sys.root_count:
        raise ValueError("initial guess size must match root_count")
    if sys.root_count == 0:
        return RootSet(ParamSet(()), zero_like(sys.c), 0, True)
    if any(p.mode != "float" for p in pts):
        raise ValueError("solve_newton needs float-mode initial points")
    bits = pts[0].bits
    ctx = _ctx(bits)
    tolf = gmpy2.mpfr(tol if tol is not None else DEFAULT_TOL, bits)
    tol2 = tolf * tolf

    fvals = residual(sys, ParamSet(pts))
    fa2 = _sup_abs2(fvals)
    best_pts, best_a2 = pts, fa2
    it = 0
    stalled = False
    while it < max_iter and fa2 > tol2 and not stalled:
        it += 1
        try:
            step = linalg.solve(_jacobian(sys, pts, bits),
                                [-v for v in fvals], one=one_like(pts[0]))
        except linalg.SingularMatrixError as e:
            raise JacobianSingular(f"singular Newton system at iteration {it}") from e
        lam = 1.0
        while True:
            lam_s = Scalar.floating(lam, 0, bits)
            cand = [p + lam_s * s for p, s in zip(pts, step)]
            try:
                cf = residual(sys, ParamSet(cand))
                ca2 = _sup_abs2(cf)
            except PoleError:
                ca2 = None
            if ca2 is not None and ca2 < fa2:
                pts, fvals, fa2 = cand, cf, ca2
                break
            lam *= 0.5
            if lam < _DAMP_FLOOR:
                stalled = True
                break
        if fa2 < best_a2:
            best_pts, best_a2 = pts, fa2

    converged = best_a2 <= tol2 and max_iter > 0
    # dedup: any pair within 1e3*tol is a failed solve, not a root set
    radius2 = (tolf * DEDUP_FACTOR) ** 2
    for i in range(len(best_pts)):
        for j in range(i):
            if (best_pts[i] - best_pts[j]).abs2().val.real <= radius2:
                converged = False
    norm = Scalar.floating(ctx.sqrt(best_a2), 0, bits)
    return RootSet(ParamSet(best_pts), norm, it, converged)


def heuristic_initial(count: int, c: Scalar, bits: int = DEFAULT_BITS) -> ParamSet:
    """Built-in starting points for the homogeneous diag case.

    Symmetric imaginary perturbations around -c/2; for two roots this is the
    usual +-0.3i*c pair.  Odd counts put the last point on -c/2 itself.
    """
    cf = c.to_float(bits)
    half = -(cf / 2)
    step = Scalar.floating(0, "0.3", bits) * cf
    out = []
    for j in range(count):
        if j == count - 1 and count % 2 == 1:
            out.append(half)
            continue
        mag = j // 2 + 1
        t = mag if j % 2 == 0 else -mag
        out.append(half + t * step)
    return ParamSet(out)


# ---------------------------------------------------------------------------
# exact sector construction (full root count N = L)
# ---------------------------------------------------------------------------

def _sector_poly(model: SpinChainModel, alpha: Scalar):
    """Exact coefficients of the monic degree-L polynomial Q whose roots are
    the full-sector diag roots at twist ratio alpha.

    The all-down state is the unique vector of that sector, so its transfer
    eigenvalue lambda2(v) + alpha lambda1(v) pins Q through the functional
    relation

        lambda1(v) (alpha Q(v) - Q(v-c)) = lambda2(v) (alpha Q(v+c) - Q(v)).

    Both sides are polynomials, so sampling at 2L integer points gives an
    exact (overdetermined) linear system for the L unknown coefficients; the
    extra equations are verified, not dropped.
    """
    if model.c.mode != "exact":
        raise ValueError("sector construction needs an exact model")
    ll = model.length
    c = model.c
    one = one_like(c)

    def powers(x, top):
        out = [one]
        for _ in range(top):
            out.append(out[-1] * x)
        return out

    rows = []
    for s in range(2 * ll):
        v = Scalar.exact(s)
        l1 = model.lambda1(v)
        l2 = model.lambda2(v)
        pv = powers(v, ll)
        pm = powers(v - c, ll)
        pp = powers(v + c, ll)
        row = [l1 * (alpha * pv[t] - pm[t]) - l2 * (alpha * pp[t] - pv[t])
               for t in range(ll)]
        rhs = -(l1 * (alpha * pv[ll] - pm[ll]) - l2 * (alpha * pp[ll] - pv[ll]))
        rows.append(row + [rhs])

    # exact elimination on the 2L x (L+1) augmented system
    nrow, ncol = len(rows), ll
    rank = 0
    where = []
    for col in range(ncol):
        piv = None
        for r in range(rank, nrow):
            if not rows[r][col].is_zero():
                piv = r
                break
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        prow = rows[rank]
        for r in range(nrow):
            if r == rank or rows[r][col].is_zero():
                continue
            factor = rows[r][col] / prow[col]
            rows[r] = [a - factor * b for a, b in zip(rows[r], prow)]
        where.append(col)
        rank += 1
    if rank < ncol:
        raise ValueError("sector system is rank-deficient; twist too special")
    for r in range(rank, nrow):
        if not rows[r][ncol].is_zero():
            raise ValueError("sector system inconsistent; no polynomial solution")
    coeffs = [None] * ncol
    for r, col in enumerate(where):
        coeffs[col] = rows[r][ncol] / rows[r][col]
    return coeffs  # Q(v) = v^L + sum_t coeffs[t] v^t


def _poly_roots(coeffs, bits, iters=400):
    """All roots of the monic polynomial with the given exact low coefficients,
    by Weierstrass simultaneous iteration at the working precision."""
    deg = len(coeffs)
    cf = [s.to_float(bits) for s in coeffs]
    one = Scalar.floating(1, 0, bits)

    def peval(x):
        acc = one
        for t in range(deg - 1, -1, -1):
            acc = acc * x + cf[t]
        return acc

    seed = Scalar.floating("0.4", "0.9", bits)
    zs = []
    p = one
    for _ in range(deg):
        p = p * seed
        zs.append(p)
    eps2 = gmpy2.mpfr("1e-60", bits) ** 2
    for _ in range(iters):
        moved = gmpy2.mpfr(0, bits)
        new = []
        for i in range(deg):
            den = one
            for j in range(deg):
                if j != i:
                    den = den * (zs[i] - zs[j])
            delta = peval(zs[i]) / den
            new.append(zs[i] - delta)
            d2 = delta.abs2().val.real
            if d2 > moved:
                moved = d2
        zs = new
        if moved <= eps2:
            break
    zs.sort(key=lambda s: (s.val.real, s.val.imag))
    return ParamSet(zs)


def full_sector_initial(model: SpinChainModel, alpha: Scalar,
                        bits: int = DEFAULT_BITS) -> ParamSet:
    """Float starting points for all L roots of the diag (or reduced, via its
    effective ratio) system on an exact chain; polish with solve_newton."""
    return _poly_roots(_sector_poly(model, alpha), bits)


def modified_onshell_twist(weights, us, rho1: Scalar, rho2: Scalar,
                           km: Scalar, c: Scalar, k=None) -> TwistGeneral:
    """Exact twist making the given roots satisfy the modified system.

    The modified equations are linear in the matrix corners kt and k once
    the shift parameters are fixed, so one root (with k supplied) or two
    roots determine them; the remaining corner comes from the constraint.
    Only sizes 1 and 2 are supported, which is all the exact tests need.
    """
    w = _as_weights(weights)
    us = ParamSet(us)
    nn = len(us)
    if nn not in (1, 2):
        raise ValueError("exact on-shell twist construction supports 1 or 2 roots")
    rows = []
    rhs = []
    for j in range(nn):
        comp = us.minus_index(j)
        u = us[j]
        l1 = w.lambda1(u)
        l2 = w.lambda2(u)
        a1 = l1 * set_product("f", comp, [u], c)
        a2 = l2 * set_product("f", [u], comp, c)
        b = (rho1 * a1 - rho2 * a2
             + (rho1 + rho2) * l1 * l2 * set_product("g", [u], comp, c))
        rows.append([a1, -a2])
        rhs.append(b)
    if nn == 1:
        if k is None:
            raise ValueError("one root leaves the system underdetermined; pass k")
        kt = (rhs[0] - rows[0][1] * k) / rows[0][0]
    else:
        kt, k = linalg.solve(rows, rhs, one=one_like(c))
    return TwistGeneral.from_shifts(kt, k, km, rho1, rho2)
