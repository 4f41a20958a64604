"""Dense determinants, solves and inverses over Scalar matrices.

Matrices are plain row-major lists of lists of Scalar.  Nothing here is
clever: the determinant call volume is large but the matrices are tiny
(n <= 12 by contract), so cubic algorithms with exact or 256-bit entries
are more than fast enough.

Exact mode uses the fraction-free Bareiss scheme (all divisions are exact,
entry growth stays polynomial); float mode uses ordinary elimination with
partial pivoting on |entry|^2.
"""

from __future__ import annotations

from .scalars import Scalar, one_like, zero_like

__all__ = ["SingularMatrixError", "det", "solve", "inverse", "mat_mul", "mat_vec"]


class SingularMatrixError(ZeroDivisionError):
    """The matrix was singular to working precision."""


def _copy(rows):
    return [list(r) for r in rows]


def _pivot_row(m, k, n, mode):
    """Index of the row to pivot on at step k, or None if the column is dead."""
    if mode == "exact":
        for r in range(k, n):
            if not m[r][k].is_zero():
                return r
        return None
    best, best_key = None, None
    for r in range(k, n):
        if m[r][k].is_zero():
            continue
        key = m[r][k].abs2().val.real
        if best is None or key > best_key:
            best, best_key = r, key
    return best


def det(rows, *, one: Scalar) -> Scalar:
    """Determinant; `one` fixes mode/precision and is the 0x0 answer."""
    n = len(rows)
    if n == 0:
        return one
    m = _copy(rows)
    sign = 1
    if one.mode == "exact":
        # Bareiss: m[i][j] <- (m[i][j]*m[k][k] - m[i][k]*m[k][j]) / prev
        prev = one
        for k in range(n - 1):
            p = _pivot_row(m, k, n, "exact")
            if p is None:
                return zero_like(one)
            if p != k:
                m[k], m[p] = m[p], m[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev
            prev = m[k][k]
        val = m[n - 1][n - 1]
    else:
        val = one
        for k in range(n):
            p = _pivot_row(m, k, n, "float")
            if p is None:
                return zero_like(one)
            if p != k:
                m[k], m[p] = m[p], m[k]
                sign = -sign
            piv = m[k][k]
            val = val * piv
            for i in range(k + 1, n):
                fac = m[i][k] / piv
                for j in range(k + 1, n):
                    m[i][j] = m[i][j] - fac * m[k][j]
    return val if sign > 0 else -val


def solve(rows, rhs, *, one: Scalar):
    """Solve A x = b by elimination with partial pivoting."""
    n = len(rows)
    m = _copy(rows)
    b = list(rhs)
    mode = one.mode
    for k in range(n):
        p = _pivot_row(m, k, n, mode)
        if p is None:
            raise SingularMatrixError(f"singular at column {k}")
        if p != k:
            m[k], m[p] = m[p], m[k]
            b[k], b[p] = b[p], b[k]
        piv = m[k][k]
        for i in range(k + 1, n):
            fac = m[i][k] / piv
            b[i] = b[i] - fac * b[k]
            for j in range(k + 1, n):
                m[i][j] = m[i][j] - fac * m[k][j]
    x = [zero_like(one) for _ in range(n)]
    for k in range(n - 1, -1, -1):
        acc = b[k]
        for j in range(k + 1, n):
            acc = acc - m[k][j] * x[j]
        x[k] = acc / m[k][k]
    return x


def inverse(rows, *, one: Scalar):
    """Matrix inverse via Gauss-Jordan on [A | I]."""
    n = len(rows)
    m = _copy(rows)
    zero = zero_like(one)
    aug = [[one if i == j else zero for j in range(n)] for i in range(n)]
    mode = one.mode
    for k in range(n):
        p = _pivot_row(m, k, n, mode)
        if p is None:
            raise SingularMatrixError(f"singular at column {k}")
        if p != k:
            m[k], m[p] = m[p], m[k]
            aug[k], aug[p] = aug[p], aug[k]
        piv = m[k][k]
        m[k] = [x / piv for x in m[k]]
        aug[k] = [x / piv for x in aug[k]]
        for i in range(n):
            if i == k or m[i][k].is_zero():
                continue
            fac = m[i][k]
            m[i] = [a - fac * b_ for a, b_ in zip(m[i], m[k])]
            aug[i] = [a - fac * b_ for a, b_ in zip(aug[i], aug[k])]
    return aug


def mat_mul(a, b):
    n, k, m = len(a), len(b), len(b[0]) if b else 0
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = a[i][0] * b[0][j]
            for t in range(1, k):
                acc = acc + a[i][t] * b[t][j]
            row.append(acc)
        out.append(row)
    return out


def mat_vec(a, x):
    out = []
    for row in a:
        acc = row[0] * x[0]
        for t in range(1, len(x)):
            acc = acc + row[t] * x[t]
        out.append(acc)
    return out
