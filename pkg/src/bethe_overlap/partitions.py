"""Ordered bipartitions of parameter sets and sums over them.

A bipartition splits an ordered tuple into two ordered sub-tuples that keep
the source order.  The attached sign is the parity of the permutation that
maps the source order to (part_i followed by part_ii); for a sorted index
tuple i_0 < i_1 < ... it equals (-1)^(sum_k (i_k - k)).  This is exactly the
sign that makes Laplace expansion of a determinant along a row block work,
which is what the tests pin it against.

Enumeration order is deterministic: by |part_i| ascending, then
lexicographically in the chosen indices.  Sums fold in that order, which
keeps float-mode results byte-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .scalars import ParamSet

__all__ = ["Bipartition", "enumerate_bipartitions", "partition_sum"]


@dataclass(frozen=True)
class Bipartition:
    part_i: ParamSet
    part_ii: ParamSet
    idx_i: tuple
    idx_ii: tuple
    sign: int


def enumerate_bipartitions(items, size_i=None):
    """Yield all ordered bipartitions of `items` (2^n of them, streamed).

    With `size_i` given, only splits with |part_i| = size_i are produced.
    """
    src = tuple(items)
    n = len(src)
    sizes = range(n + 1) if size_i is None else [size_i]
    for m in sizes:
        if m < 0 or m > n:
            continue
        for idx in combinations(range(n), m):
            chosen = set(idx)
            rest = tuple(j for j in range(n) if j not in chosen)
            # sum_k (i_k - k) mod 2; idx is sorted so this is the inversion count
            par = (sum(idx) - m * (m - 1) // 2) % 2
            yield Bipartition(
                part_i=ParamSet(src[j] for j in idx),
                part_ii=ParamSet(src[j] for j in rest),
                idx_i=idx,
                idx_ii=rest,
                sign=-1 if par else 1,
            )


def partition_sum(items, term, zero, size_i=None):
    """Sum term(bipartition) over bipartitions, folding in enumeration order.

    `zero` seeds the fold and fixes the scalar mode of an empty sum.
    Evaluator errors propagate with the offending bipartition attached.
    """
    acc = zero
    for bp in enumerate_bipartitions(items, size_i=size_i):
        try:
            acc = acc + term(bp)
        except Exception as e:
            raise type(e)(f"{e} [at bipartition idx_i={bp.idx_i}]") from e
    return acc
