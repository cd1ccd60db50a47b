"""Finite-prefix Erdős-Rényi and Móri-Székely functionals.

For a prefix A_{tau(1)}, ..., A_{tau(n)} of an event sequence, alpha_n is the
indicator count c(x) divided by s = sum_i P(A_{tau(i)}). Everything is kept
over integer atom weights: with T = s * D,

    E(alpha_n^p) = sum_c h_c c^p D^(p-1) / T^p

where h_c is the total weight of atoms hit exactly c times. Integer p stays
exact; other exponents are evaluated in mpmath with 64 guard bits.
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import mpmath
import numpy as np

from .core import DomainError, Event, EventSystem, FiniteSpace

__all__ = [
    "OUTPUT_BITS",
    "GUARD_BITS",
    "DEFAULT_P_GRID",
    "DEFAULT_WINDOW",
    "ctx",
    "EventSequence",
    "ExplicitSequence",
    "PeriodicSequence",
    "Subsequence",
    "PrefixMoment",
    "WindowMax",
    "MSPoint",
    "MSEstimate",
    "periodic_event",
    "alpha_moment",
    "er_prefix",
    "er_prefix_series",
    "er_estimate",
    "ms_estimate",
    "prefix_system",
    "as_exponent",
    "window_range",
]

OUTPUT_BITS = 53
GUARD_BITS = 64

# private context; the global mpmath.mp precision is never touched
ctx = mpmath.MPContext()
ctx.prec = OUTPUT_BITS + GUARD_BITS

DEFAULT_P_GRID = (Fraction(2), Fraction(1, 2), Fraction(1, 4), Fraction(1, 8),
                  Fraction(1, 16), Fraction(1, 32))
DEFAULT_WINDOW = Fraction(1, 2)


def as_exponent(p) -> Fraction:
    """Exponents are held as exact fractions; floats go through repr so
    that 0.05 means 1/20."""
    if isinstance(p, Fraction):
        return p
    if isinstance(p, float):
        if not math.isfinite(p):
            raise DomainError(f"exponent must be finite, got {p}")
        return Fraction(repr(p))
    return Fraction(p)


def _mpf(x: Fraction):
    return ctx.mpf(x.numerator) / x.denominator


# -- sequences -------------------------------------------------------------

class EventSequence:
    """Index n >= 1 -> Event, all on one space."""

    kind = "abstract"
    space: FiniteSpace

    def event(self, n: int) -> Event:
        raise NotImplementedError

    def mask(self, n: int) -> int:
        return self.event(n).mask

    def __getitem__(self, n: int) -> Event:
        return self.event(n)


class ExplicitSequence(EventSequence):
    kind = "explicit"

    def __init__(self, space: FiniteSpace, events: Sequence[Event]):
        self.space = space
        self.events = tuple(events)
        for e in self.events:
            if e.space != space:
                raise DomainError("all events must live on the sequence's space")

    def event(self, n: int) -> Event:
        if not 1 <= n <= len(self.events):
            raise DomainError(f"index {n} outside 1..{len(self.events)}")
        return self.events[n - 1]


def periodic_event(base: EventSystem, n: int) -> Event:
    if n < 1:
        raise DomainError("indices start at 1")
    return base.events[(n - 1) % len(base.events)]


class PeriodicSequence(EventSequence):
    """A_1, ..., A_m, A_1, ..., A_m, ..."""

    kind = "periodic"

    def __init__(self, base: EventSystem):
        self.base = base
        self.space = base.space
        self._masks = base.masks

    def event(self, n: int) -> Event:
        return periodic_event(self.base, n)

    def mask(self, n: int) -> int:
        if n < 1:
            raise DomainError("indices start at 1")
        return self._masks[(n - 1) % len(self._masks)]


# -- subsequences ----------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Pow: operator.pow, ast.FloorDiv: operator.floordiv}


def _compile_rule(expr: str) -> Callable[[int], int]:
    tree = ast.parse(expr.replace("^", "**"), mode="eval")

    def ev(node, n):
        if isinstance(node, ast.Expression):
            return ev(node.body, n)
        if isinstance(node, ast.Constant) and type(node.value) is int:
            return node.value
        if isinstance(node, ast.Name) and node.id == "n":
            return n
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left, n), ev(node.right, n))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -ev(node.operand, n)
        raise ValueError(f"unsupported stride expression {expr!r}")

    ev(tree, 1)  # reject bad syntax eagerly
    return lambda n: ev(tree, n)


@dataclass(frozen=True)
class Subsequence:
    """Strictly increasing tau: N -> N, as an explicit list or a rule."""

    indices: tuple[int, ...] | None = None
    rule: Callable[[int], int] | None = None
    label: str = "identity"

    @classmethod
    def identity(cls) -> "Subsequence":
        return cls(rule=lambda n: n, label="identity")

    @classmethod
    def from_list(cls, indices: Sequence[int], label: str = "list") -> "Subsequence":
        return cls(indices=tuple(int(i) for i in indices), label=label)

    @classmethod
    def stride(cls, expr: str) -> "Subsequence":
        """Rule given as an expression in n, e.g. ``2^n`` or ``3*n+1``."""
        return cls(rule=_compile_rule(expr), label=f"stride:{expr}")

    def __call__(self, i: int) -> int:
        if self.indices is not None:
            return self.indices[i - 1]
        if self.rule is None:
            return i
        return self.rule(i)

    def prefix(self, n: int) -> list[int]:
        if self.indices is not None:
            if n > len(self.indices):
                raise DomainError(f"subsequence has only {len(self.indices)} indices, {n} requested")
            out = list(self.indices[:n])
        else:
            out = [self(i) for i in range(1, n + 1)]
        prev = 0
        for t in out:
            if t <= prev:
                raise DomainError("subsequence must be strictly increasing with tau(1) >= 1")
            prev = t
        return out


IDENTITY = Subsequence.identity()


# -- prefix scanning -------------------------------------------------------

class _Scanner:
    """Running atom counts for a growing prefix."""

    def __init__(self, space: FiniteSpace):
        self.space = space
        self.size = len(space)
        self.nbytes = (self.size + 7) // 8
        self.counts = np.zeros(self.size, dtype=np.int64)
        self.total = 0
        self._bits: dict[int, np.ndarray] = {}
        classes = space._classes
        if len(classes) == 1 and classes[0][1] == space.full_mask:
            self.classes = [(classes[0][0], None)]
        else:
            self.classes = [(w, np.flatnonzero(self._unpack(m))) for w, m in classes]

    def _unpack(self, mask: int) -> np.ndarray:
        raw = np.frombuffer(mask.to_bytes(self.nbytes, "little"), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[: self.size]

    def add(self, mask: int) -> None:
        bits = self._bits.get(mask)
        if bits is None:
            bits = self._unpack(mask)
            if len(self._bits) < 4096:
                self._bits[mask] = bits
        self.counts += bits
        self.total += self.space.weight(mask)

    def histogram(self) -> dict[int, int]:
        hist: dict[int, int] = {}
        for w, idx in self.classes:
            binc = np.bincount(self.counts if idx is None else self.counts[idx])
            for c in np.flatnonzero(binc):
                c = int(c)
                hist[c] = hist.get(c, 0) + w * int(binc[c])
        return hist


def _scan(seq: EventSequence, tau: Subsequence, n_hi: int, n_lo: int = 1) -> Iterator[tuple[int, int, dict[int, int]]]:
    """Yield (n, T, histogram) for n = n_lo..n_hi."""
    if n_hi < 1:
        raise DomainError("empty prefix")
    idx = tau.prefix(n_hi)
    sc = _Scanner(seq.space)
    for n, t in enumerate(idx, start=1):
        sc.add(seq.mask(t))
        if n >= n_lo:
            if sc.total == 0:
                raise DomainError(f"prefix of length {n} has total probability zero")
            yield n, sc.total, sc.histogram()


def _moment(hist: dict[int, int], total: int, den: int, p: Fraction):
    """(exact or None, mpf value) of E(alpha^p)."""
    if p.denominator == 1:
        k = p.numerator
        num = sum(h * c ** k for c, h in hist.items()) * den ** (k - 1)
        exact = Fraction(num, total ** k)
        return exact, _mpf(exact)
    pf = _mpf(p)
    scale = ctx.mpf(den) / total
    terms = [ctx.mpf(h) * ctx.power(c * scale, pf) for c, h in hist.items() if c]
    return None, ctx.fsum(terms) / den


@dataclass(frozen=True)
class PrefixMoment:
    n: int
    p: Fraction
    value: mpmath.mpf
    exact: Fraction | None = None

    def __float__(self) -> float:
        return float(self.value)


def _check_p(p: Fraction) -> None:
    if p <= 0:
        raise DomainError(f"exponent must be positive, got {p}")


def alpha_moment(seq: EventSequence, tau: Subsequence, n: int, p) -> PrefixMoment:
    """E(alpha_n^p) for the prefix A_{tau(1)}, ..., A_{tau(n)}."""
    p = as_exponent(p)
    _check_p(p)
    *_, (_, total, hist) = _scan(seq, tau, n, n)
    exact, value = _moment(hist, total, seq.space.denominator, p)
    return PrefixMoment(n, p, value, exact)


def _er(hist: dict[int, int], total: int, den: int) -> Fraction:
    return Fraction(total * total, den * sum(h * c * c for c, h in hist.items()))


def er_prefix(seq: EventSequence, tau: Subsequence, n: int) -> Fraction:
    """1 / E(alpha_n^2), exactly."""
    *_, (_, total, hist) = _scan(seq, tau, n, n)
    return _er(hist, total, seq.space.denominator)


def er_prefix_series(seq: EventSequence, tau: Subsequence, n: int) -> Iterator[tuple[int, Fraction]]:
    """(k, er_prefix(seq, tau, k)) for every k = 1..n in one pass."""
    den = seq.space.denominator
    for k, total, hist in _scan(seq, tau, n):
        yield k, _er(hist, total, den)


def window_range(N: int, window) -> range:
    w = as_exponent(window)
    if not 0 < w <= 1:
        raise DomainError(f"window must lie in (0, 1], got {w}")
    lo = max(1, math.ceil((1 - w) * N))
    return range(lo, N + 1)


@dataclass(frozen=True)
class WindowMax:
    value: Fraction
    n: int

    def __float__(self) -> float:
        return float(self.value)


def er_estimate(seq: EventSequence, tau: Subsequence, N: int, window=DEFAULT_WINDOW) -> WindowMax:
    """Max of er_prefix over n in [ceil((1-window) N), N]."""
    if N < 2:
        raise DomainError("N must be at least 2")
    rng = window_range(N, window)
    den = seq.space.denominator
    best: WindowMax | None = None
    for n, total, hist in _scan(seq, tau, N, rng.start):
        v = _er(hist, total, den)
        if best is None or v > best.value:
            best = WindowMax(v, n)
    return best


@dataclass(frozen=True)
class MSPoint:
    p: Fraction
    value: mpmath.mpf           # max_n E(alpha_n^p)^(1/(1-p))
    value_n: int
    moment: mpmath.mpf          # max_n E(alpha_n^p)
    moment_n: int
    exact: Fraction | None = None   # value, when rational (p = 2)


@dataclass(frozen=True)
class MSEstimate:
    value: mpmath.mpf
    best_p: Fraction
    curve: tuple[MSPoint, ...]
    small_p_moment: mpmath.mpf  # limsup-surrogate of E(alpha^p) at the smallest p

    def __float__(self) -> float:
        return float(self.value)

    def point(self, p) -> MSPoint:
        p = as_exponent(p)
        return next(pt for pt in self.curve if pt.p == p)


def ms_estimate(seq: EventSequence, tau: Subsequence, N: int, window=DEFAULT_WINDOW,
                p_grid: Sequence = DEFAULT_P_GRID) -> MSEstimate:
    """Windowed surrogate of sup_p limsup_n E(alpha_n^p)^(1/(1-p)).

    The power is taken inside the window max, per n. The curve also keeps
    the windowed max of the unpowered moment so the small-p limit can be
    read off side by side.
    """
    grid = [as_exponent(p) for p in p_grid]
    if not grid:
        raise DomainError("empty exponent grid")
    for p in grid:
        _check_p(p)
        if p == 1:
            raise DomainError("exponent 1 is excluded from the grid")
    if N < 2:
        raise DomainError("N must be at least 2")
    rng = window_range(N, window)
    den = seq.space.denominator
    best_val = {p: None for p in grid}
    best_mom = {p: None for p in grid}
    for n, total, hist in _scan(seq, tau, N, rng.start):
        for p in grid:
            exact, mom = _moment(hist, total, den, p)
            if p == 2:
                pv_exact = 1 / exact
                pv = _mpf(pv_exact)
            else:
                pv_exact = None
                pv = ctx.power(mom, 1 / (1 - _mpf(p)))
            cur = best_val[p]
            if cur is None or pv > cur[0]:
                best_val[p] = (pv, n, pv_exact)
            cm = best_mom[p]
            if cm is None or mom > cm[0]:
                best_mom[p] = (mom, n)
    curve = tuple(MSPoint(p, best_val[p][0], best_val[p][1], best_mom[p][0], best_mom[p][1],
                          best_val[p][2]) for p in grid)
    top = max(curve, key=lambda pt: pt.value)
    smallest = min(curve, key=lambda pt: pt.p)
    return MSEstimate(top.value, top.p, curve, smallest.moment)


def prefix_system(seq: EventSequence, tau: Subsequence, n: int) -> EventSystem:
    """The prefix events as a finite :class:`EventSystem`."""
    idx = tau.prefix(n)
    return EventSystem(seq.space, tuple(seq.event(t) for t in idx),
                       tuple(f"A{t}" for t in idx) if len(set(idx)) == len(idx) else ())
