"""Finite spin-1/2 chain realization: the brute-force oracle.

Everything the determinant formulas claim is checked against literal matrix
computations built here.  The monodromy is the ordered product of one-site
L-operators L(x) = (x/c)*Id + P over an L-site chain; site k occupies bit
k-1 of the state index (site 1 is the least significant bit), index 0 is the
all-up reference state.  Vacuum eigenvalue functions for this realization:

    lambda_1(u) = prod_k h(u, theta_k),     lambda_2(u) = prod_k (u-theta_k)/c.

Dual vectors are algebraic duals (plain transposes, no complex conjugation):
every quantity here is rational in the parameters, which is what makes exact
cross-checks possible.

The general (non-diagonal) twist is parametrized by its corner entries and
the two off-diagonal shift parameters rho_1, rho_2 subject to the bilinear
constraint rho1*rho2 - (k*rho1 + kt*rho2) + kp*km = 0; the modified operator
family nu_ab is the linear combination of monodromy entries that the
factorized twist produces.  mu = 1/(1 - rho1*rho2/(kp*km)).
"""

from __future__ import annotations

from dataclasses import dataclass

from . import linalg
from .scalars import (ParamSet, PoleError, Scalar, kernel_g, one_like,
                      set_product, zero_like)

__all__ = [
    "DegenerateTwist", "SingularAtZero", "SpinChainModel", "WeightPair",
    "TwistDiag", "TwistGeneral", "build_monodromy", "transfer_diag",
    "transfer_general", "nu_operator", "twist_factor_check",
    "bethe_vector", "dual_bethe_vector", "modified_bethe_vector",
    "modified_dual_vector", "brute_overlap", "eigenvalue_diag",
    "eigenvalue_general", "hamiltonian_at_zero", "rtt_residual",
    "apply_operator", "MAX_LENGTH_EXACT", "MAX_LENGTH_FLOAT",
]

MAX_LENGTH_EXACT = 10
MAX_LENGTH_FLOAT = 12


class DegenerateTwist(ValueError):
    """Twist parameters violate a nonvanishing condition."""


class SingularAtZero(ZeroDivisionError):
    """The transfer matrix is not invertible at the origin."""


@dataclass(frozen=True)
class SpinChainModel:
    length: int
    c: Scalar
    theta: tuple

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("chain length must be >= 1")
        if self.c.is_zero():
            raise ValueError("coupling c must be nonzero")
        if len(self.theta) != self.length:
            raise ValueError("need one inhomogeneity per site")
        limit = MAX_LENGTH_EXACT if self.c.mode == "exact" else MAX_LENGTH_FLOAT
        if self.length > limit:
            raise ValueError(f"chain length {self.length} exceeds cap {limit}")

    @staticmethod
    def homogeneous(length: int, c: Scalar) -> "SpinChainModel":
        return SpinChainModel(length, c, tuple(zero_like(c) for _ in range(length)))

    def dim(self) -> int:
        return 1 << self.length

    def lambda1(self, u: Scalar) -> Scalar:
        out = one_like(self.c)
        for t in self.theta:
            out = out * ((u - t + self.c) / self.c)
        return out

    def lambda2(self, u: Scalar) -> Scalar:
        out = one_like(self.c)
        for t in self.theta:
            out = out * ((u - t) / self.c)
        return out

    def dlambda1(self, u: Scalar) -> Scalar:
        acc = zero_like(self.c)
        for l in range(self.length):
            term = one_like(self.c) / self.c
            for m, t in enumerate(self.theta):
                if m != l:
                    term = term * ((u - t + self.c) / self.c)
            acc = acc + term
        return acc

    def dlambda2(self, u: Scalar) -> Scalar:
        acc = zero_like(self.c)
        for l in range(self.length):
            term = one_like(self.c) / self.c
            for m, t in enumerate(self.theta):
                if m != l:
                    term = term * ((u - t) / self.c)
            acc = acc + term
        return acc

    def weights(self) -> "WeightPair":
        return WeightPair(self.lambda1, self.lambda2, self.dlambda1, self.dlambda2)

    def to_float(self, bits: int) -> "SpinChainModel":
        return SpinChainModel(self.length, self.c.to_float(bits),
                              tuple(t.to_float(bits) for t in self.theta))


@dataclass(frozen=True)
class WeightPair:
    """Vacuum eigenvalue evaluators, pluggable so the Bethe-system module
    never needs an actual chain.  Derivatives are optional (rate only)."""
    lambda1: object
    lambda2: object
    dlambda1: object = None
    dlambda2: object = None


@dataclass(frozen=True)
class TwistDiag:
    alpha: Scalar

    def to_float(self, bits):
        return TwistDiag(self.alpha.to_float(bits))


@dataclass(frozen=True)
class TwistGeneral:
    kt: Scalar      # upper-left entry
    kp: Scalar      # upper-right entry
    km: Scalar      # lower-left entry
    k: Scalar       # lower-right entry
    rho1: Scalar
    rho2: Scalar

    def __post_init__(self):
        for name in ("kp", "km", "rho1", "rho2"):
            if getattr(self, name).is_zero():
                raise DegenerateTwist(f"{name} must be nonzero")
        lhs = self.rho1 * self.rho2 - (self.k * self.rho1 + self.kt * self.rho2) \
            + self.kp * self.km
        if self.c_mode() == "exact":
            if not lhs.is_zero():
                raise DegenerateTwist("shift parameters violate the constraint")
        if (self.kp * self.km - self.rho1 * self.rho2).is_zero():
            raise DegenerateTwist("mu pole: kp*km = rho1*rho2")

    def c_mode(self):
        return self.kt.mode

    @staticmethod
    def from_entries(kt, kp, km, k, rho1) -> "TwistGeneral":
        """Solve rho2 from the constraint given the four matrix entries."""
        if (rho1 - kt).is_zero():
            raise DegenerateTwist("rho1 = upper-left entry leaves rho2 undetermined")
        rho2 = (k * rho1 - kp * km) / (rho1 - kt)
        if rho2.is_zero():
            raise DegenerateTwist("constraint forces rho2 = 0 for these entries")
        return TwistGeneral(kt, kp, km, k, rho1, rho2)

    @staticmethod
    def from_shifts(kt, k, km, rho1, rho2) -> "TwistGeneral":
        """Solve the upper-right entry from the constraint; lets callers fix
        the ratio rho2/rho1 exactly (needed to pair with a diagonal twist)."""
        val = (k * rho1 + kt * rho2 - rho1 * rho2) / km
        if val.is_zero():
            raise DegenerateTwist("constraint forces a vanishing upper-right entry")
        return TwistGeneral(kt, val, km, k, rho1, rho2)

    def mu(self) -> Scalar:
        one = one_like(self.kt)
        return one / (one - self.rho1 * self.rho2 / (self.kp * self.km))

    def alpha_partner(self) -> Scalar:
        """The diagonal twist ratio -rho2/rho1 this twist pairs with."""
        return -(self.rho2 / self.rho1)

    def to_float(self, bits) -> "TwistGeneral":
        return TwistGeneral(self.kt.to_float(bits), self.kp.to_float(bits),
                            self.km.to_float(bits), self.k.to_float(bits),
                            self.rho1.to_float(bits), self.rho2.to_float(bits))


# ---------------------------------------------------------------------------
# operator matrices
# ---------------------------------------------------------------------------

def _kron(a, b):
    na, nb = len(a), len(b)
    out = []
    for i in range(na):
        for p in range(nb):
            row = []
            for j in range(na):
                arij = a[i][j]
                row.extend([arij * x for x in b[p]])
            out.append(row)
    return out


def _mat_add(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def _site_blocks(x: Scalar, c: Scalar):
    """Aux-space 2x2 block decomposition of one L-operator at argument x."""
    one = one_like(c)
    zero = zero_like(c)
    d = x / c
    return {
        (0, 0): [[d + one, zero], [zero, d]],
        (0, 1): [[zero, zero], [one, zero]],
        (1, 0): [[zero, one], [zero, zero]],
        (1, 1): [[d, zero], [zero, d + one]],
    }


def build_monodromy(model: SpinChainModel, u: Scalar):
    """2x2 aux matrix of 2^L x 2^L operators: [[t11, t12], [t21, t22]].

    Site k is applied as the k-th factor from the right, landing on bit k-1,
    so the newest site always occupies the highest bit via the kron order.
    """
    one = one_like(model.c)
    zero = zero_like(model.c)
    t = [[[[one]], [[zero]]], [[[zero]], [[one]]]]
    for kk in range(model.length):
        lk = _site_blocks(u - model.theta[kk], model.c)
        new = [[None, None], [None, None]]
        for a in range(2):
            for b in range(2):
                acc = None
                for ch in range(2):
                    piece = _kron(lk[(a, ch)], t[ch][b])
                    acc = piece if acc is None else _mat_add(acc, piece)
                new[a][b] = acc
        t = new
    return t


def apply_operator(op, vec):
    return linalg.mat_vec(op, vec)


def _sumvals(it, zero):
    acc = zero
    for x in it:
        acc = acc + x
    return acc


def _vacuum(model: SpinChainModel):
    one = one_like(model.c)
    zero = zero_like(model.c)
    return [one if i == 0 else zero for i in range(model.dim())]


def transfer_diag(model: SpinChainModel, alpha: Scalar, u: Scalar):
    t = build_monodromy(model, u)
    return _mat_add(t[0][0], [[alpha * x for x in row] for row in t[1][1]])


def transfer_general(model: SpinChainModel, tw: TwistGeneral, u: Scalar):
    t = build_monodromy(model, u)
    out = []
    for i in range(model.dim()):
        row = []
        for j in range(model.dim()):
            row.append(tw.kt * t[0][0][i][j] + tw.kp * t[1][0][i][j]
                       + tw.km * t[0][1][i][j] + tw.k * t[1][1][i][j])
        out.append(row)
    return out


def nu_operator(model: SpinChainModel, tw: TwistGeneral, u: Scalar, a: int, b: int):
    """Entry (a,b) of the modified monodromy, a,b in {1,2}."""
    t = build_monodromy(model, u)
    t11, t12, t21, t22 = t[0][0], t[0][1], t[1][0], t[1][1]
    mu = tw.mu()
    r1, r2, kp, km = tw.rho1, tw.rho2, tw.kp, tw.km
    if (a, b) == (1, 2):
        combo = [(t12, one_like(mu)), (t11, r1 / km), (t22, r2 / km),
                 (t21, r1 * r2 / (km * km))]
    elif (a, b) == (2, 1):
        combo = [(t21, one_like(mu)), (t11, r1 / kp), (t22, r2 / kp),
                 (t12, r1 * r2 / (kp * kp))]
    elif (a, b) == (1, 1):
        combo = [(t11, one_like(mu)), (t12, r2 / kp), (t21, r2 / km),
                 (t22, r2 * r2 / (km * kp))]
    elif (a, b) == (2, 2):
        combo = [(t22, one_like(mu)), (t12, r1 / kp), (t21, r1 / km),
                 (t11, r1 * r1 / (km * kp))]
    else:
        raise ValueError("operator indices must be in {1,2}")
    dim = model.dim()
    out = [[zero_like(mu) for _ in range(dim)] for _ in range(dim)]
    for mat, coeff in combo:
        for i in range(dim):
            row = out[i]
            mrow = mat[i]
            for j in range(dim):
                row[j] = row[j] + mu * coeff * mrow[j]
    return out


def twist_factor_check(tw: TwistGeneral):
    """Return mu * Bbar D Abar as a plain 2x2 scalar matrix.

    The factorization behind the modified operators asserts this equals
    [[kt, kp], [km, k]]; tests compare entrywise.
    """
    one = one_like(tw.kt)
    zero = zero_like(tw.kt)
    abar = [[one, tw.rho2 / tw.km], [tw.rho1 / tw.kp, one]]
    bbar = [[one, tw.rho1 / tw.km], [tw.rho2 / tw.kp, one]]
    dmat = [[tw.kt - tw.rho1, zero], [zero, tw.k - tw.rho2]]
    prod = linalg.mat_mul(linalg.mat_mul(bbar, dmat), abar)
    mu = tw.mu()
    return [[mu * x for x in row] for row in prod]


# ---------------------------------------------------------------------------
# states and overlaps
# ---------------------------------------------------------------------------

def bethe_vector(model: SpinChainModel, us):
    vec = _vacuum(model)
    for u in us:
        t = build_monodromy(model, u)
        vec = apply_operator(t[0][1], vec)
    return vec


def dual_bethe_vector(model: SpinChainModel, vs):
    """Row vector <0| prod t21(v_j), returned as a plain list."""
    vec = _vacuum(model)
    for v in vs:
        t = build_monodromy(model, v)
        # row * M == (M^T * row^T)^T; build the transpose product directly
        vec = [_sumvals((t[1][0][i][j] * vec[i] for i in range(model.dim())),
                        zero_like(model.c)) for j in range(model.dim())]
    return vec


def modified_bethe_vector(model: SpinChainModel, tw: TwistGeneral, us):
    vec = _vacuum(model)
    for u in us:
        vec = apply_operator(nu_operator(model, tw, u, 1, 2), vec)
    return vec


def modified_dual_vector(model: SpinChainModel, tw: TwistGeneral, vs):
    vec = _vacuum(model)
    for v in vs:
        op = nu_operator(model, tw, v, 2, 1)
        vec = [_sumvals((op[i][j] * vec[i] for i in range(model.dim())),
                        zero_like(model.c)) for j in range(model.dim())]
    return vec


def brute_overlap(model: SpinChainModel, tw: TwistGeneral, vs, us) -> Scalar:
    """<0| t21(v_1)...t21(v_n) nu12(u_1)...nu12(u_N) |0> by matrix algebra."""
    ket = modified_bethe_vector(model, tw, us)
    bra = dual_bethe_vector(model, vs)
    return _sumvals((b * k for b, k in zip(bra, ket)), zero_like(model.c))


def eigenvalue_diag(model_or_weights, alpha: Scalar, v: Scalar, us, c: Scalar) -> Scalar:
    w = model_or_weights.weights() if isinstance(model_or_weights, SpinChainModel) \
        else model_or_weights
    return (w.lambda1(v) * set_product("f", us, [v], c)
            + alpha * w.lambda2(v) * set_product("f", [v], us, c))


def eigenvalue_general(model_or_weights, tw: TwistGeneral, v: Scalar, us,
                       c: Scalar) -> Scalar:
    w = model_or_weights.weights() if isinstance(model_or_weights, SpinChainModel) \
        else model_or_weights
    us = ParamSet(us)
    gprod = one_like(c)
    for u in us:
        gprod = gprod * kernel_g(v, u, c)
    return ((tw.kt - tw.rho1) * w.lambda1(v) * set_product("f", us, [v], c)
            + (tw.k - tw.rho2) * w.lambda2(v) * set_product("f", [v], us, c)
            + (tw.rho1 + tw.rho2) * w.lambda1(v) * w.lambda2(v) * gprod)


# ---------------------------------------------------------------------------
# Hamiltonian and RTT
# ---------------------------------------------------------------------------

def _transfer_at(model, twist, u):
    if isinstance(twist, TwistDiag):
        return transfer_diag(model, twist.alpha, u)
    return transfer_general(model, twist, u)


def hamiltonian_at_zero(model: SpinChainModel, twist):
    """H = 2c * t'(0) * t(0)^{-1}, derivative taken exactly.

    Transfer-matrix entries are degree-L polynomials in u, so t'(0) follows
    from Lagrange differentiation on the integer nodes 0..L.
    """
    c = model.c
    one = one_like(c)
    nodes = [zero_like(c) + m for m in range(model.length + 1)]
    mats = [_transfer_at(model, twist, x) for x in nodes]
    dim = model.dim()
    dmat = [[zero_like(c) for _ in range(dim)] for _ in range(dim)]
    npts = len(nodes)
    for m in range(npts):
        # l_m'(0) = sum_{r != m} 1/(x_m - x_r) * prod_{s != m,r} (0-x_s)/(x_m-x_s)
        wm = zero_like(c)
        for r in range(npts):
            if r == m:
                continue
            term = one / (nodes[m] - nodes[r])
            for s in range(npts):
                if s in (m, r):
                    continue
                term = term * ((-nodes[s]) / (nodes[m] - nodes[s]))
            wm = wm + term
        if wm.is_zero():
            continue
        for i in range(dim):
            for j in range(dim):
                dmat[i][j] = dmat[i][j] + wm * mats[m][i][j]
    try:
        inv0 = linalg.inverse(mats[0], one=one)
    except linalg.SingularMatrixError as e:
        raise SingularAtZero("transfer matrix not invertible at the origin") from e
    two_c = c + c
    prod = linalg.mat_mul(dmat, inv0)
    return [[two_c * x for x in row] for row in prod]


def rtt_residual(model: SpinChainModel, u: Scalar, v: Scalar):
    """Max |entry| of R12 T1 T2 - T2 T1 R12 on aux (x) aux; exact zero expected."""
    c = model.c
    tu = build_monodromy(model, u)
    tv = build_monodromy(model, v)
    dim = model.dim()
    one = one_like(c)
    zero = zero_like(c)
    x = u - v
    # R(x) = x*Id + c*P on the two aux spaces, entries scalar
    r = [[zero for _ in range(4)] for _ in range(4)]
    for a in range(2):
        for b in range(2):
            r[2 * a + b][2 * a + b] = r[2 * a + b][2 * a + b] + x
            r[2 * a + b][2 * b + a] = r[2 * a + b][2 * b + a] + c

    def block_prod(first, second):
        # (first_1 second_2)_{(a,b),(c,d)} = first_{ac} second_{bd}, operators multiply
        out = {}
        for a in range(2):
            for b in range(2):
                for cc_ in range(2):
                    for d in range(2):
                        out[(2 * a + b, 2 * cc_ + d)] = linalg.mat_mul(
                            first[a][cc_], second[b][d])
        return out

    t1t2 = block_prod(tu, tv)
    t2t1 = {}
    for a in range(2):
        for b in range(2):
            for cc_ in range(2):
                for d in range(2):
                    t2t1[(2 * a + b, 2 * cc_ + d)] = linalg.mat_mul(
                        tv[b][d], tu[a][cc_])

    worst = zero
    for i in range(4):
        for j in range(4):
            lhs = [[zero for _ in range(dim)] for _ in range(dim)]
            rhs = [[zero for _ in range(dim)] for _ in range(dim)]
            for k in range(4):
                if not r[i][k].is_zero():
                    blk = t1t2[(k, j)]
                    for p in range(dim):
                        for q in range(dim):
                            lhs[p][q] = lhs[p][q] + r[i][k] * blk[p][q]
                if not r[k][j].is_zero():
                    blk = t2t1[(i, k)]
                    for p in range(dim):
                        for q in range(dim):
                            rhs[p][q] = rhs[p][q] + blk[p][q] * r[k][j]
            for p in range(dim):
                for q in range(dim):
                    a2 = (lhs[p][q] - rhs[p][q]).abs2()
                    if _ge(a2, worst):
                        worst = a2
    return worst


def _ge(a: Scalar, b: Scalar) -> bool:
    if a.mode == "exact":
        d = a - b
        return d.re_q >= 0
    return a.val.real >= b.val.real
