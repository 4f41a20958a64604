"""Deterministic SplitMix64 stream and rational parameter draws.

The generator is the standard SplitMix64: 64-bit state advanced by the odd
constant 0x9E3779B97F4A7C15, output mixed by two xor-shift-multiply rounds
(0xBF58476D1CE4E5B9, 0x94D049BB133111EB) and a final >>31 xor.  Integers in
[lo, hi] come from `lo + next64() mod (hi - lo + 1)`; the modulo bias is
irrelevant for test-point generation and keeps the mapping trivially
portable.

Parameter draws are rationals num/den with num in [-10^4, 10^4] and den in
[1, 10^2].  Set draws reject pole collisions: any difference in {0, +c, -c}
against the set drawn so far and against an avoid list forces a redraw, so
every kernel and every reciprocal of h stays finite on drawn data.
"""

from __future__ import annotations

import gmpy2

from .scalars import Scalar

__all__ = ["SplitMix64", "draw_rational", "draw_scalar", "draw_coupling",
           "draw_set", "draw_twist_value", "draw_z"]

_MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return (z ^ (z >> 31)) & _MASK

    def next_int(self, lo: int, hi: int) -> int:
        return lo + self.next64() % (hi - lo + 1)


def draw_rational(rng: SplitMix64):
    num = rng.next_int(-10_000, 10_000)
    den = rng.next_int(1, 100)
    return gmpy2.mpq(num, den)


def draw_scalar(rng: SplitMix64, with_imag=True) -> Scalar:
    re = draw_rational(rng)
    im = draw_rational(rng) if with_imag else 0
    return Scalar.exact(re, im)


def draw_coupling(rng: SplitMix64) -> Scalar:
    """A nonzero c."""
    while True:
        c = draw_scalar(rng, with_imag=False)
        if not c.is_zero():
            return c


def draw_twist_value(rng: SplitMix64, forbid=()) -> Scalar:
    """A nonzero scalar avoiding exact collisions with `forbid`."""
    while True:
        x = draw_scalar(rng)
        if x.is_zero():
            continue
        if any((x - y).is_zero() for y in forbid):
            continue
        return x


def _collides(x: Scalar, others, c: Scalar) -> bool:
    for y in others:
        d = x - y
        if d.is_zero() or (d - c).is_zero() or (d + c).is_zero():
            return True
    return False


def draw_set(rng: SplitMix64, size: int, c: Scalar, avoid=()):
    """`size` scalars in generic position w.r.t. each other and `avoid`."""
    out = []
    avoid = list(avoid)
    for _ in range(size):
        for _try in range(1000):
            x = draw_scalar(rng)
            if not _collides(x, out, c) and not _collides(x, avoid, c):
                out.append(x)
                break
        else:
            raise RuntimeError("rejection sampling failed; avoid list too dense")
    return out


def draw_z(rng: SplitMix64) -> Scalar:
    """A twist eigenvalue ratio z with z != 0 and z != 1."""
    while True:
        z = draw_scalar(rng)
        if not z.is_zero() and not (z - Scalar.exact(1)).is_zero():
            return z
