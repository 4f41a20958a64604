"""Exact and high-precision complex arithmetic plus the rational kernels.

Everything downstream works over one of two scalar modes:

* ``exact``  -- Gaussian rationals, a pair of ``gmpy2.mpq`` for re/im.
  Equality is equality; there is no tolerance anywhere in this mode.
* ``float``  -- ``gmpy2.mpc`` at a fixed binary precision.  All operands in a
  computation must carry the same precision; mixing precisions (or mixing the
  two modes) raises ModeMixError rather than silently coercing.

The kernels are the standard rational building blocks

    g(u,v) = c/(u-v),    f(u,v) = (u-v+c)/(u-v) = 1 + g(u,v),
    h(u,v) = f(u,v)/g(u,v) = (u-v+c)/c,

together with the ordered pair-products Δ, Δ' and double-set products.
Coincident points (u = v for g and f, c = 0 for h) raise PoleError; no
limiting values are taken here.
"""

from __future__ import annotations

import fractions

import gmpy2

__all__ = [
    "ModeMixError",
    "PoleError",
    "Scalar",
    "ParamSet",
    "one_like",
    "zero_like",
    "kernel_g",
    "kernel_f",
    "kernel_h",
    "delta_products",
    "set_product",
]


class ModeMixError(TypeError):
    """Exact and float scalars (or different float precisions) were mixed."""


class PoleError(ZeroDivisionError):
    """A kernel or a division was evaluated at a pole."""


_CTX_CACHE: dict[int, gmpy2.context] = {}


def _ctx(bits: int) -> gmpy2.context:
    ctx = _CTX_CACHE.get(bits)
    if ctx is None:
        ctx = gmpy2.context(precision=bits)
        _CTX_CACHE[bits] = ctx
    return ctx


def _to_mpq(x) -> gmpy2.mpq:
    if isinstance(x, (int, gmpy2.mpq)):
        return gmpy2.mpq(x)
    if isinstance(x, str):
        return gmpy2.mpq(x)
    if isinstance(x, fractions.Fraction):
        return gmpy2.mpq(x.numerator, x.denominator)
    raise TypeError(f"cannot build an exact rational from {x!r}")


class Scalar:
    """A complex number in one of the two arithmetic modes.

    Arithmetic operators accept another Scalar of the same mode (and same
    precision, for floats) or a Python int.  Division checks the divisor for
    an exact zero first; gmpy2 would otherwise hand back inf+nanj silently.
    """

    __slots__ = ("mode", "re_q", "im_q", "val", "bits")

    def __init__(self, *, mode, re_q=None, im_q=None, val=None, bits=None):
        self.mode = mode
        self.re_q = re_q
        self.im_q = im_q
        self.val = val
        self.bits = bits

    # -- constructors -------------------------------------------------------

    @staticmethod
    def exact(re, im=0) -> "Scalar":
        return Scalar(mode="exact", re_q=_to_mpq(re), im_q=_to_mpq(im))

    @staticmethod
    def floating(re, im=0, bits=256) -> "Scalar":
        r = gmpy2.mpfr(re, bits) if not isinstance(re, gmpy2.mpfr) else re
        i = gmpy2.mpfr(im, bits) if not isinstance(im, gmpy2.mpfr) else im
        return Scalar(mode="float", val=gmpy2.mpc(r, i, precision=(bits, bits)), bits=bits)

    @staticmethod
    def from_mpc(z, bits) -> "Scalar":
        return Scalar(mode="float", val=z, bits=bits)

    def to_float(self, bits: int) -> "Scalar":
        if self.mode == "float":
            if bits == self.bits:
                return self
            return Scalar.floating(self.val.real, self.val.imag, bits)
        r = gmpy2.mpfr(self.re_q, bits)
        i = gmpy2.mpfr(self.im_q, bits)
        return Scalar.floating(r, i, bits)

    # -- plumbing -----------------------------------------------------------

    def _lift(self, other):
        """Coerce `other` to a compatible Scalar or raise ModeMixError."""
        if isinstance(other, int):
            if self.mode == "exact":
                return Scalar.exact(other)
            return Scalar.floating(other, 0, self.bits)
        if not isinstance(other, Scalar):
            return None
        if other.mode != self.mode:
            raise ModeMixError(f"cannot mix {self.mode} and {other.mode} scalars")
        if self.mode == "float" and other.bits != self.bits:
            raise ModeMixError(
                f"cannot mix float precisions {self.bits} and {other.bits}")
        return other

    def is_zero(self) -> bool:
        if self.mode == "exact":
            return self.re_q == 0 and self.im_q == 0
        return gmpy2.is_zero(self.val.real) and gmpy2.is_zero(self.val.imag)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        if self.mode == "exact":
            return Scalar(mode="exact", re_q=self.re_q + o.re_q, im_q=self.im_q + o.im_q)
        return Scalar.from_mpc(_ctx(self.bits).add(self.val, o.val), self.bits)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        if self.mode == "exact":
            return Scalar(mode="exact", re_q=self.re_q - o.re_q, im_q=self.im_q - o.im_q)
        return Scalar.from_mpc(_ctx(self.bits).sub(self.val, o.val), self.bits)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        if self.mode == "exact":
            # (a+bi)(c+di), four mpq multiplies
            a, b, c, d = self.re_q, self.im_q, o.re_q, o.im_q
            return Scalar(mode="exact", re_q=a * c - b * d, im_q=a * d + b * c)
        return Scalar.from_mpc(_ctx(self.bits).mul(self.val, o.val), self.bits)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        if o.is_zero():
            raise PoleError("division by zero scalar")
        if self.mode == "exact":
            a, b, c, d = self.re_q, self.im_q, o.re_q, o.im_q
            n = c * c + d * d
            return Scalar(mode="exact", re_q=(a * c + b * d) / n, im_q=(b * c - a * d) / n)
        return Scalar.from_mpc(_ctx(self.bits).div(self.val, o.val), self.bits)

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self):
        if self.mode == "exact":
            return Scalar(mode="exact", re_q=-self.re_q, im_q=-self.im_q)
        return Scalar.from_mpc(_ctx(self.bits).minus(self.val), self.bits)

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return one_like(self) / (self ** (-n))
        out = one_like(self)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conj(self) -> "Scalar":
        if self.mode == "exact":
            return Scalar(mode="exact", re_q=self.re_q, im_q=-self.im_q)
        return Scalar.from_mpc(
            gmpy2.mpc(self.val.real, _ctx(self.bits).minus(self.val.imag),
                      precision=(self.bits, self.bits)),
            self.bits)

    def abs2(self) -> "Scalar":
        """|z|^2 in the same mode (real-valued)."""
        return self * self.conj()

    # -- comparison ---------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, int):
            other = Scalar.exact(other) if self.mode == "exact" else \
                Scalar.floating(other, 0, self.bits)
        if not isinstance(other, Scalar) or other.mode != self.mode:
            return NotImplemented
        if self.mode == "exact":
            return self.re_q == other.re_q and self.im_q == other.im_q
        return self.val == other.val

    def __hash__(self):
        if self.mode == "exact":
            return hash((self.re_q, self.im_q))
        return hash(self.val)

    # -- serialization ------------------------------------------------------

    def to_json(self):
        if self.mode == "exact":
            if self.im_q == 0:
                return str(self.re_q)
            return {"re": str(self.re_q), "im": str(self.im_q)}
        return {"re": _fmt_mpfr(self.val.real, self.bits),
                "im": _fmt_mpfr(self.val.imag, self.bits)}

    @staticmethod
    def from_json(obj, mode="exact", bits=256) -> "Scalar":
        if isinstance(obj, dict):
            re, im = obj.get("re", 0), obj.get("im", 0)
        else:
            re, im = obj, 0
        if mode == "exact":
            return Scalar.exact(_to_mpq(re) if not isinstance(re, str) else re,
                                _to_mpq(im) if not isinstance(im, str) else im)
        return Scalar.floating(str(re), str(im), bits)

    def __repr__(self):
        if self.mode == "exact":
            if self.im_q == 0:
                return f"Scalar({self.re_q})"
            return f"Scalar({self.re_q}{'+' if self.im_q > 0 else ''}{self.im_q}j)"
        return f"Scalar({_fmt_mpfr(self.val.real, 53)}{'+'}{_fmt_mpfr(self.val.imag, 53)}j @{self.bits}b)"


def _fmt_mpfr(x, bits: int) -> str:
    """Deterministic decimal string with enough digits to round-trip."""
    ndig = int(bits * 0.30103) + 5
    mant, exp, _ = x.digits(10, ndig)
    neg = mant.startswith("-")
    if neg:
        mant = mant[1:]
    if mant.rstrip("0") == "":
        return "0"
    return f"{'-' if neg else ''}0.{mant}e{exp}"


def one_like(s: Scalar) -> Scalar:
    """Multiplicative unit in the mode (and precision) of `s`."""
    if s.mode == "exact":
        return Scalar.exact(1)
    return Scalar.floating(1, 0, s.bits)


def zero_like(s: Scalar) -> Scalar:
    if s.mode == "exact":
        return Scalar.exact(0)
    return Scalar.floating(0, 0, s.bits)


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

def kernel_g(u: Scalar, v: Scalar, c: Scalar) -> Scalar:
    d = u - v
    if d.is_zero():
        raise PoleError("g(u,v) pole: u = v")
    return c / d


def kernel_f(u: Scalar, v: Scalar, c: Scalar) -> Scalar:
    d = u - v
    if d.is_zero():
        raise PoleError("f(u,v) pole: u = v")
    return (d + c) / d


def kernel_h(u: Scalar, v: Scalar, c: Scalar) -> Scalar:
    if c.is_zero():
        raise PoleError("h(u,v) pole: c = 0")
    return (u - v + c) / c


_KERNELS = {"g": kernel_g, "f": kernel_f, "h": kernel_h}


# ---------------------------------------------------------------------------
# parameter sets and products
# ---------------------------------------------------------------------------

class ParamSet:
    """An ordered tuple of same-mode scalars (a 'bar' set).

    Order matters only through the sign conventions of Δ and Δ'; the
    partition machinery keeps track of it explicitly.
    """

    __slots__ = ("items",)

    def __init__(self, items):
        self.items = tuple(items)

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)

    def __getitem__(self, j):
        return self.items[j]

    def minus_index(self, j: int) -> "ParamSet":
        """The complement of the j-th element (the set 'u-bar sub j')."""
        return ParamSet(self.items[:j] + self.items[j + 1:])

    def concat(self, other) -> "ParamSet":
        return ParamSet(self.items + tuple(other))

    def shifted(self, delta: Scalar) -> "ParamSet":
        return ParamSet(tuple(x + delta for x in self.items))

    def __repr__(self):
        return f"ParamSet({list(self.items)!r})"


def _as_items(s):
    if isinstance(s, ParamSet):
        return s.items
    return tuple(s)


def delta_products(us, c: Scalar):
    """Return (Δ, Δ') for the ordered set `us`.

    Δ  = prod_{k<j} g(u_j, u_k),   Δ' = prod_{k<j} g(u_k, u_j).
    Both are 1 for sizes 0 and 1.  Duplicate entries raise PoleError.
    """
    items = _as_items(us)
    d = one_like(c)
    dp = one_like(c)
    for j in range(len(items)):
        for k in range(j):
            d = d * kernel_g(items[j], items[k], c)
            dp = dp * kernel_g(items[k], items[j], c)
    return d, dp


def set_product(kind: str, a, b, c: Scalar) -> Scalar:
    """prod_{x in a, y in b} kernel(x, y); 1 if either set is empty."""
    ker = _KERNELS[kind]
    out = one_like(c)
    for x in _as_items(a):
        for y in _as_items(b):
            out = out * ker(x, y, c)
    return out
