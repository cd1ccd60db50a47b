"""Exact linear algebra over the rationals.

Fraction-free (Bareiss) elimination on integer matrices; rational inputs are
row-scaled to integers first. Singular systems are handled by rank logic:
columns without a pivot become free variables fixed at zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Sequence

from .core import BoundsError

__all__ = ["InconsistentSystemError", "Solution", "solve", "solve_integer",
           "solve_integer_scaled", "determinant"]


class InconsistentSystemError(BoundsError, ArithmeticError):
    pass


@dataclass(frozen=True)
class Solution:
    x: tuple[Fraction, ...]
    rank: int
    free: tuple[int, ...]
    pivots: tuple[int, ...]


def _integer_rows(a: Sequence[Sequence], b: Sequence) -> list[list[int]]:
    rows = []
    for row, rhs in zip(a, b):
        vals = [Fraction(v) for v in row] + [Fraction(rhs)]
        scale = reduce(math.lcm, (v.denominator for v in vals), 1)
        rows.append([v.numerator * (scale // v.denominator) for v in vals])
    return rows


def _bareiss(m: list[list[int]], ncols: int, order: Sequence[int]):
    """In-place fraction-free forward elimination over the columns in
    ``order``. Returns (pivot columns, free columns). Entries below each
    pivot are zeroed; every division is exact."""
    nrows = len(m)
    width = len(m[0]) if m else 0
    prev = 1
    r = 0
    pivots: list[int] = []
    free: list[int] = []
    for c in order:
        if r == nrows:
            free.append(c)
            continue
        p = next((i for i in range(r, nrows) if m[i][c]), None)
        if p is None:
            free.append(c)
            continue
        if p != r:
            m[p], m[r] = m[r], m[p]
        pr = m[r]
        piv = pr[c]
        for i in range(r + 1, nrows):
            row = m[i]
            f = row[c]
            if f:
                for j in range(width):
                    row[j] = (piv * row[j] - f * pr[j]) // prev
            else:
                for j in range(width):
                    row[j] = (piv * row[j]) // prev
        prev = piv
        pivots.append(c)
        r += 1
    return pivots, free


def solve_integer_scaled(a: Sequence[Sequence[int]], b: Sequence[int],
                         order: Sequence[int] | None = None):
    """Integer form of :func:`solve_integer`: returns (X, delta, rank, free,
    pivots) with x = X / delta. delta is the last Bareiss pivot, the
    determinant of the pivot block up to sign, so every X is an integer."""
    n = len(a[0]) if a else 0
    order = list(range(n)) if order is None else list(order)
    if sorted(order) != list(range(n)):
        raise ValueError("order must be a permutation of the column indices")
    m = [list(row) + [rhs] for row, rhs in zip(a, b)]
    pivots, free = _bareiss(m, n, order)
    rank = len(pivots)
    for row in m[rank:]:
        if row[n]:
            raise InconsistentSystemError("right-hand side is not in the column space")
    delta = m[rank - 1][pivots[-1]] if rank else 1
    X = [0] * n
    for k in range(rank - 1, -1, -1):
        row, c = m[k], pivots[k]
        acc = row[n] * delta
        for j in pivots[k + 1:]:
            if row[j]:
                acc -= row[j] * X[j]
        q, r = divmod(acc, row[c])
        if r:
            raise ArithmeticError("fraction-free back substitution lost exactness")
        X[c] = q
    return X, delta, rank, free, pivots


def solve_integer(a: Sequence[Sequence[int]], b: Sequence[int],
                  order: Sequence[int] | None = None) -> Solution:
    """Particular solution of a x = b for integer a, b.

    ``order`` is the column pivot order (default 0..n-1). Free columns are
    set to zero. Raises :class:`InconsistentSystemError` when b is not in
    the range of a.
    """
    X, delta, rank, free, pivots = solve_integer_scaled(a, b, order)
    x = tuple(Fraction(v, delta) for v in X)
    return Solution(x, rank, tuple(sorted(free)), tuple(pivots))


def solve(a: Sequence[Sequence], b: Sequence, order: Sequence[int] | None = None) -> Solution:
    """Exact solve for rational (Fraction/int/decimal-string) inputs."""
    rows = _integer_rows(a, b)
    n = len(a[0]) if a else 0
    return solve_integer([r[:n] for r in rows], [r[n] for r in rows], order)


def determinant(a: Sequence[Sequence]) -> Fraction:
    n = len(a)
    if n == 0:
        return Fraction(1)
    scale = 1
    rows = []
    for row in a:
        vals = [Fraction(v) for v in row]
        s = reduce(math.lcm, (v.denominator for v in vals), 1)
        scale *= s
        rows.append([v.numerator * (s // v.denominator) for v in vals])
    sign = 1
    prev = 1
    for k in range(n - 1):
        if rows[k][k] == 0:
            p = next((i for i in range(k + 1, n) if rows[i][k]), None)
            if p is None:
                return Fraction(0)
            rows[k], rows[p] = rows[p], rows[k]
            sign = -sign
        piv = rows[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                rows[i][j] = (piv * rows[i][j] - rows[i][k] * rows[k][j]) // prev
            rows[i][k] = 0
        prev = piv
    return Fraction(sign * rows[n - 1][n - 1], scale)
