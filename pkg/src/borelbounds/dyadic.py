"""Dyadic-interval events on [0, 1], discretized to 2^L uniform atoms.

Event n = 2^(i-1) + k (0 <= k < 2^(i-1)) is [k/2^i, (k+1)/2^i) u [1/2, 1).
Atom j stands for [j/2^L, (j+1)/2^L); half-open intervals make every event
an exact union of atoms as long as i <= L.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .core import DomainError, Event, EventSystem, FiniteSpace
from .sequences import (
    EventSequence,
    Subsequence,
    _moment,
    _mpf,
    _scan,
    as_exponent,
    ctx,
)

__all__ = [
    "DyadicConfig",
    "DyadicSequence",
    "ChainReport",
    "RHS_SLACK",
    "level_offset",
    "dyadic_space",
    "dyadic_event",
    "left_half_mass",
    "level_system",
    "ce1_bound_rhs",
    "verify_ce1_chain",
]

# relative inflation of the high-precision right-hand side
RHS_SLACK = Fraction(1, 2 ** 40)


@dataclass(frozen=True)
class DyadicConfig:
    resolution: int

    def __post_init__(self) -> None:
        if self.resolution < 1:
            raise DomainError("resolution must be a positive integer")

    @classmethod
    def for_max_index(cls, index: int) -> "DyadicConfig":
        """Smallest aligned resolution, ceil(log2 index) + 1."""
        if index < 1:
            raise DomainError("indices start at 1")
        return cls((index - 1).bit_length() + 1)

    @property
    def atoms(self) -> int:
        return 1 << self.resolution

    @property
    def max_index(self) -> int:
        return 1 << (self.resolution - 1)


def level_offset(n: int) -> tuple[int, int]:
    """n = 2^(i-1) + k -> (i, k)."""
    if n < 1:
        raise DomainError("indices start at 1")
    i = n.bit_length()
    return i, n - (1 << (i - 1))


@lru_cache(maxsize=8)
def dyadic_space(cfg: DyadicConfig) -> FiniteSpace:
    return FiniteSpace.uniform(cfg.atoms, prefix="u")


def _left_half_mask(cfg: DyadicConfig) -> int:
    return (1 << (cfg.atoms >> 1)) - 1


def _dyadic_mask(cfg: DyadicConfig, n: int) -> int:
    if not 1 <= n <= cfg.max_index:
        raise DomainError(f"index {n} outside 1..{cfg.max_index} for resolution {cfg.resolution}")
    i, k = level_offset(n)
    width = 1 << (cfg.resolution - i)
    half = cfg.atoms >> 1
    return (((1 << width) - 1) << (k * width)) | (((1 << half) - 1) << half)


def dyadic_event(cfg: DyadicConfig, n: int) -> Event:
    return Event(dyadic_space(cfg), _dyadic_mask(cfg, n))


def left_half_mass(n: int) -> Fraction:
    """P(A_n ∩ [0, 1/2)) = 2^-i in closed form."""
    i, _ = level_offset(n)
    return Fraction(1, 1 << i)


def level_system(cfg: DyadicConfig, level: int) -> EventSystem:
    """All events of one dyadic level; their union is the whole space."""
    lo = 1 << (level - 1)
    idx = range(lo, 2 * lo)
    return EventSystem(dyadic_space(cfg), tuple(dyadic_event(cfg, n) for n in idx),
                       tuple(f"A{n}" for n in idx))


class DyadicSequence(EventSequence):
    kind = "dyadic"

    def __init__(self, cfg: DyadicConfig):
        self.cfg = cfg
        self.space = dyadic_space(cfg)

    def mask(self, n: int) -> int:
        return _dyadic_mask(self.cfg, n)

    def event(self, n: int) -> Event:
        return Event(self.space, self.mask(n))


def _check_open_unit(p: Fraction) -> None:
    if not 0 < p < 1:
        raise DomainError(f"exponent must lie in (0, 1), got {p}")


def ce1_bound_rhs(n: int, p):
    """((log2 2n)^p (1/2)^(1-p) + n^p / 2) / (n/2)^p, in high precision."""
    p = as_exponent(p)
    _check_open_unit(p)
    if n < 1:
        raise DomainError("n must be at least 1")
    pf = _mpf(p)
    half = ctx.mpf(1) / 2
    num = ctx.power(ctx.log(2 * n, 2), pf) * ctx.power(half, 1 - pf) + ctx.power(n, pf) / 2
    return num / ctx.power(ctx.mpf(n) / 2, pf)


@dataclass(frozen=True)
class ChainReport:
    n: int
    p: Fraction
    resolution: int
    tau_label: str
    min_prob: Fraction
    normalizer: Fraction            # sum_i P(A_tau(i))
    left_mass: Fraction             # integral over [0,1/2) of the indicator sum
    moment: object                  # E(alpha_n^p)
    count_moment_bound: object      # E((sum I)^p) / (n/2)^p
    holder_bound: object            # Hölder line with the actual left mass
    rhs: object                     # closed form with log2(2n)
    step_a: bool                    # every P(A_tau(i)) >= 1/2
    step_b: bool                    # left_mass <= log2(2n)
    step_c: bool                    # moment <= rhs, rhs inflated by RHS_SLACK
    left_monotone: bool             # leftmass(tau(i)) <= leftmass(i) for all i
    links: tuple[bool, bool, bool]  # moment <= count bound <= Hölder <= rhs

    @property
    def passed(self) -> bool:
        return self.step_a and self.step_b and self.step_c


def _le_log2(m: Fraction, x: int) -> bool:
    """m <= log2(x), exactly, for m >= 0 and integer x >= 1."""
    return 2 ** m.numerator <= x ** m.denominator


def verify_ce1_chain(cfg: DyadicConfig, tau: Subsequence, n: int, p) -> ChainReport:
    """Check the three-step bound E(alpha_n^p) <= ce1_bound_rhs(n, p)."""
    p = as_exponent(p)
    _check_open_unit(p)
    if n < 1:
        raise DomainError("n must be at least 1")
    idx = tau.prefix(n)
    if idx[-1] > cfg.max_index:
        raise DomainError(f"resolution {cfg.resolution} too small for index {idx[-1]}")
    seq = DyadicSequence(cfg)
    space = seq.space
    den = space.denominator
    left = _left_half_mask(cfg)

    weights = [space.weight(seq.mask(t)) for t in idx]
    min_prob = Fraction(min(weights), den)
    left_w = sum(space.weight(seq.mask(t) & left) for t in idx)
    left_mass = Fraction(left_w, den)
    left_monotone = all(left_half_mass(t) <= left_half_mass(i) for i, t in enumerate(idx, start=1))

    *_, (_, total, hist) = _scan(seq, tau, n, n)
    _, moment = _moment(hist, total, den, p)
    pf = _mpf(p)
    half_n = ctx.power(ctx.mpf(n) / 2, pf)
    count_moment = ctx.fsum(ctx.mpf(h) * ctx.power(c, pf) for c, h in hist.items() if c) / den
    count_bound = count_moment / half_n
    holder = (ctx.power(_mpf(left_mass), pf) * ctx.power(ctx.mpf(1) / 2, 1 - pf)
              + ctx.power(n, pf) / 2) / half_n
    rhs = ce1_bound_rhs(n, p)
    slack = 1 + _mpf(RHS_SLACK)

    return ChainReport(
        n=n, p=p, resolution=cfg.resolution, tau_label=tau.label,
        min_prob=min_prob, normalizer=Fraction(total, den), left_mass=left_mass,
        moment=moment, count_moment_bound=count_bound, holder_bound=holder, rhs=rhs,
        step_a=min_prob >= Fraction(1, 2),
        step_b=_le_log2(left_mass, 2 * n),
        step_c=moment <= rhs * slack,
        left_monotone=left_monotone,
        links=(moment <= count_bound * slack, count_bound <= holder * slack, holder <= rhs * slack),
    )
