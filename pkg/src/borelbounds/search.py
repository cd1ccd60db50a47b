"""Randomized search for systems where KAT strictly exceeds GK.

Each trial draws its own generator from ``SeedSequence(seed, spawn_key=(trial,))``
so trials are independent of each other and of how they are distributed
over workers. Every hit is an exact certificate.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .core import EventSystem, FiniteSpace, union_prob
from .union_bounds import _gk_value, _kat_value, gk_bound, kat_bound

__all__ = ["SearchConfig", "GapHit", "random_system", "evaluate", "search_gaps"]


@dataclass(frozen=True)
class SearchConfig:
    atoms: int
    events: int
    trials: int
    seed: int = 0
    granularity: int = 10

    def __post_init__(self) -> None:
        if self.atoms < 2 or self.events < 2:
            raise ValueError("atoms and events must both be at least 2")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.granularity < self.atoms:
            raise ValueError("granularity must be at least the number of atoms")


@dataclass(frozen=True)
class GapHit:
    system: EventSystem
    gk: Fraction
    kat: Fraction
    gap: Fraction
    union: Fraction
    source: str  # "trial:<k>" or the path of an included instance


@lru_cache(maxsize=1024)
def _space(weights: tuple[int, ...], g: int) -> FiniteSpace:
    return FiniteSpace(tuple((f"x{i + 1}", Fraction(w, g)) for i, w in enumerate(weights)))


def _rng(cfg: SearchConfig, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed, spawn_key=(trial,))))


def _draw(cfg: SearchConfig, trial: int) -> tuple[tuple[int, ...], list[int]]:
    rng = _rng(cfg, trial)
    g, a = cfg.granularity, cfg.atoms
    cuts = np.sort(rng.choice(g - 1, size=a - 1, replace=False) + 1).tolist()
    bounds = [0, *cuts, g]
    weights = tuple(bounds[i + 1] - bounds[i] for i in range(a))
    if a <= 62:
        masks = rng.integers(1, 1 << a, size=cfg.events).tolist()
    else:
        masks = []
        while len(masks) < cfg.events:
            m = int.from_bytes(rng.bytes((a + 7) // 8), "little") & ((1 << a) - 1)
            if m:
                masks.append(m)
    return weights, masks


def random_system(cfg: SearchConfig, trial: int) -> EventSystem:
    """Deterministic in (seed, trial): a random composition of the
    granularity into positive atom weights, and uniformly random nonempty
    atom subsets as events."""
    weights, masks = _draw(cfg, trial)
    return EventSystem.from_masks(_space(weights, cfg.granularity), masks)


def evaluate(system: EventSystem, source: str) -> GapHit | None:
    """Exact GK/KAT comparison; a hit is re-verified against the union."""
    gk = gk_bound(system)
    kat, _ = kat_bound(system)
    if kat <= gk:
        return None
    union = union_prob(system)
    if not (gk <= union and kat <= union):
        raise AssertionError(f"bound exceeds union probability for {source}")
    return GapHit(system, gk, kat, kat - gk, union, source)


def _screen(space: FiniteSpace, masks: list[int]) -> bool:
    """Integer-only kat > gk test; hits are re-certified by :func:`evaluate`."""
    m = len(masks)
    gram = [[0] * m for _ in range(m)]
    for i in range(m):
        gram[i][i] = space.weight(masks[i])
        for j in range(i + 1, m):
            gram[i][j] = gram[j][i] = space.weight(masks[i] & masks[j])
    den = space.denominator
    return _kat_value(gram, den) > _gk_value(gram, den)


def _run_chunk(cfg: SearchConfig, lo: int, hi: int) -> list[tuple[int, GapHit]]:
    out = []
    g = cfg.granularity
    for t in range(lo, hi):
        weights, masks = _draw(cfg, t)
        space = _space(weights, g)
        if _screen(space, masks):
            system = EventSystem.from_masks(space, masks)
            hit = evaluate(system, f"trial:{t}")
            if hit is None:
                raise AssertionError(f"screen and exact evaluation disagree on trial {t}")
            out.append((t, hit))
    return out


def _chunks(trials: int, size: int) -> Iterable[tuple[int, int]]:
    for lo in range(1, trials + 1, size):
        yield lo, min(lo + size, trials + 1)


def search_gaps(cfg: SearchConfig, include: Sequence[tuple[str, EventSystem]] = (),
                workers: int = 1, chunk_size: int = 5000) -> list[GapHit]:
    """Run trials 1..cfg.trials and return the hits, largest gap first.

    ``include`` adds extra (label, system) instances to the corpus. Ties on
    the gap are ordered by included instances first, then trial index, so
    the result is the same for any ``workers``.
    """
    keyed: list[tuple[int, GapHit]] = []
    for k, (label, system) in enumerate(include):
        hit = evaluate(system, label)
        if hit is not None:
            keyed.append((k - len(include), hit))
    chunks = list(_chunks(cfg.trials, chunk_size))
    if workers <= 1:
        for lo, hi in chunks:
            keyed.extend(_run_chunk(cfg, lo, hi))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_chunk, cfg, lo, hi) for lo, hi in chunks]
            for f in futures:
                keyed.extend(f.result())
    keyed.sort(key=lambda kh: (-kh[1].gap, kh[0]))
    return [h for _, h in keyed]
