"""Lower bounds for the probability of a finite union of events.

With integer weights (every probability scaled by the space denominator D)
the normalized Gallot-Kounias system

    sum_j P(A_iA_j) / (P(A_i) P(A_j)) * gamma_j = 1

becomes ``J y = W`` with J the integer Gram matrix, W the event weights and
``gamma_j = W_j y_j / D``. The two systems have the same rank and the same
pivot structure, so free variables coincide.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import DomainError, EventSystem
from .linalg import solve_integer, solve_integer_scaled

__all__ = [
    "GKSolution",
    "KATTerms",
    "gk_solve",
    "gk_bound",
    "gk_quotient",
    "kat_bound",
    "chung_erdos",
]


@dataclass(frozen=True)
class GKSolution:
    gamma: tuple[Fraction, ...]
    bound: Fraction
    rank: int
    free_indices: tuple[int, ...]


@dataclass(frozen=True)
class KATTerms:
    S: tuple[Fraction, ...]
    theta: tuple[Fraction, ...]
    term: tuple[Fraction, ...]


def gk_solve(sys: EventSystem, order: Sequence[int] | None = None) -> GKSolution:
    """Exact particular solution of the Gallot-Kounias system.

    ``order`` is the column pivot order; columns left without a pivot are
    zeroed and reported in ``free_indices``. The bound does not depend on
    this choice.
    """
    sys.require_positive()
    gram = sys.gram()
    w = [gram[i][i] for i in range(len(gram))]
    sol = solve_integer(gram, w, order)
    d = sys.space.denominator
    gamma = tuple(wi * yi / d for wi, yi in zip(w, sol.x))
    return GKSolution(gamma, sum(gamma, Fraction(0)), sol.rank, sol.free)


def gk_bound(sys: EventSystem) -> Fraction:
    sys.require_positive()
    return _gk_value(sys.gram(), sys.space.denominator)


def _gk_value(gram: list[list[int]], den: int) -> Fraction:
    w = [gram[i][i] for i in range(len(gram))]
    X, delta, *_ = solve_integer_scaled(gram, w)
    return Fraction(sum(wi * xi for wi, xi in zip(w, X)), delta * den)


def _kat_value(gram: list[list[int]], den: int) -> Fraction:
    num, dd = 0, 1
    for i, row in enumerate(gram):
        w = row[i]
        q, r = divmod(sum(row), w)
        # r/(q+1) + (w-r)/q
        a, b = r * q + (w - r) * (q + 1), q * (q + 1)
        num, dd = num * b + a * dd, dd * b
    return Fraction(num, dd * den)


def gk_quotient(sys: EventSystem, omega: Sequence) -> Fraction:
    """(sum w_i P(A_i))^2 / sum_ij w_i w_j P(A_iA_j), with 0/0 taken as 0.

    Every omega gives a value at most :func:`gk_bound`; omega_j =
    gamma_j / P(A_j) attains it.
    """
    gram = sys.gram()
    om = [Fraction(v) for v in omega]
    if len(om) != len(gram):
        raise ValueError("omega must have one weight per event")
    num = sum((om[i] * gram[i][i] for i in range(len(om))), Fraction(0))
    den = sum((om[i] * om[j] * gram[i][j] for i in range(len(om)) for j in range(len(om))),
              Fraction(0))
    if den == 0:
        return Fraction(0)
    return num * num / (den * sys.space.denominator)


def kat_bound(sys: EventSystem) -> tuple[Fraction, KATTerms]:
    """Kuai-Alajaji-Takahara bound and its per-event terms.

    With R_i = sum_j W(A_iA_j) = q_i W_i + r_i (0 <= r_i < W_i), the term
    for event i simplifies to (r_i/(q_i+1) + (W_i-r_i)/q_i) / D.
    """
    sys.require_positive()
    gram = sys.gram()
    d = sys.space.denominator
    S, theta, term = [], [], []
    for i, row in enumerate(gram):
        w = row[i]
        r_sum = sum(row)
        q, r = divmod(r_sum, w)  # q >= 1 since row[i] = w
        S.append(Fraction(r_sum, d))
        theta.append(Fraction(r, w))
        term.append((Fraction(r, q + 1) + Fraction(w - r, q)) / d)
    total = sum(term, Fraction(0))
    return total, KATTerms(tuple(S), tuple(theta), tuple(term))


def chung_erdos(sys: EventSystem) -> Fraction:
    """(sum P(A_i))^2 / sum_ij P(A_iA_j)."""
    gram = sys.gram()
    total = sum(sum(row) for row in gram)
    if total == 0:
        raise DomainError("every event has probability zero")
    s = sum(gram[i][i] for i in range(len(gram)))
    return Fraction(s * s, total * sys.space.denominator)
