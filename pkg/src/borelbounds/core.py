"""Finite probability spaces, events and the space-file format.

Probabilities are :class:`fractions.Fraction` throughout. Internally every
space also carries an integer weight per atom over a common denominator, so
event probabilities and pairwise intersections reduce to popcounts on
bitmasks.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

Rational = Fraction

__all__ = [
    "Rational",
    "BoundsError",
    "SpaceParseError",
    "InvalidSpaceError",
    "DomainError",
    "ZeroProbabilityWarning",
    "FiniteSpace",
    "Event",
    "EventSystem",
    "JointMatrix",
    "parse_space",
    "format_space",
    "event_prob",
    "joint_matrix",
    "union_prob",
    "format_fraction",
]


class BoundsError(Exception):
    """Base class for errors raised by this package."""


class InvalidSpaceError(BoundsError, ValueError):
    """A space or event violates its structural invariants."""


class SpaceParseError(InvalidSpaceError):
    """Malformed space file. Carries 1-based line and column."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.reason = message
        self.line = line
        self.column = column


class DomainError(BoundsError, ValueError):
    """An operation was called outside its mathematical domain."""


class ZeroProbabilityWarning(UserWarning):
    pass


def format_fraction(x: Fraction) -> str:
    """Render as ``num/den`` even for integers (``1/1``)."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class FiniteSpace:
    """Ordered atoms with exact probabilities summing to one."""

    atoms: tuple[tuple[str, Fraction], ...]
    # Derived: common denominator, integer weights, and one bitmask per
    # distinct weight so that weight(mask) is a handful of popcounts.
    denominator: int = field(init=False, compare=False, repr=False)
    weights: tuple[int, ...] = field(init=False, compare=False, repr=False)
    _classes: tuple[tuple[int, int], ...] = field(init=False, compare=False, repr=False)
    _index: dict = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        atoms = tuple((str(a), Fraction(p)) for a, p in self.atoms)
        if not atoms:
            raise InvalidSpaceError("a space needs at least one atom")
        index: dict[str, int] = {}
        for i, (a, p) in enumerate(atoms):
            if a in index:
                raise InvalidSpaceError(f"duplicate atom id {a!r}")
            if p < 0:
                raise InvalidSpaceError(f"atom {a!r} has negative probability {p}")
            index[a] = i
        distinct: dict[Fraction, int] = {}
        for _, p in atoms:
            distinct[p] = distinct.get(p, 0) + 1
        total = sum((p * k for p, k in distinct.items()), Fraction(0))
        if total != 1:
            raise InvalidSpaceError(f"probabilities sum to {total} ≠ 1")
        den = reduce(math.lcm, (p.denominator for p in distinct), 1)
        weights = tuple(p.numerator * (den // p.denominator) for _, p in atoms)
        classes: dict[int, int] = {}
        for i, w in enumerate(weights):
            if w:
                classes[w] = classes.get(w, 0) | (1 << i)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "denominator", den)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "_classes", tuple(sorted(classes.items())))
        object.__setattr__(self, "_index", index)

    @classmethod
    def uniform(cls, n: int, prefix: str = "x") -> "FiniteSpace":
        p = Fraction(1, n)
        return cls(tuple((f"{prefix}{i + 1}", p) for i in range(n)))

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(a for a, _ in self.atoms)

    @property
    def probs(self) -> tuple[Fraction, ...]:
        return tuple(p for _, p in self.atoms)

    @property
    def full_mask(self) -> int:
        return (1 << len(self.atoms)) - 1

    def index_of(self, atom_id: str) -> int:
        try:
            return self._index[atom_id]
        except KeyError:
            raise InvalidSpaceError(f"unknown atom {atom_id!r}") from None

    def weight(self, mask: int) -> int:
        """Integer mass of an atom bitmask, in units of 1/denominator."""
        return sum(w * (mask & m).bit_count() for w, m in self._classes)

    def prob(self, mask: int) -> Fraction:
        return Fraction(self.weight(mask), self.denominator)

    def event(self, atom_ids: Iterable[str]) -> "Event":
        mask = 0
        for a in atom_ids:
            mask |= 1 << self.index_of(a)
        return Event(self, mask)


@dataclass(frozen=True)
class Event:
    """A set of atoms of one space, stored as a bitmask (bit i = atom i)."""

    space: FiniteSpace
    mask: int

    def __post_init__(self) -> None:
        if self.mask < 0 or self.mask >> len(self.space):
            raise InvalidSpaceError("event references atoms outside its space")

    @classmethod
    def from_indices(cls, space: FiniteSpace, members: Iterable[int]) -> "Event":
        mask = 0
        for i in members:
            if not 0 <= i < len(space):
                raise InvalidSpaceError(f"atom index {i} out of range")
            mask |= 1 << i
        return cls(space, mask)

    @property
    def members(self) -> frozenset[int]:
        m, out, i = self.mask, [], 0
        while m:
            if m & 1:
                out.append(i)
            m >>= 1
            i += 1
        return frozenset(out)

    @property
    def weight(self) -> int:
        return self.space.weight(self.mask)

    @property
    def prob(self) -> Fraction:
        return self.space.prob(self.mask)

    def __and__(self, other: "Event") -> "Event":
        return Event(self.space, self.mask & other.mask)

    def __or__(self, other: "Event") -> "Event":
        return Event(self.space, self.mask | other.mask)


@dataclass(frozen=True)
class EventSystem:
    """Finitely many events A_1..A_m on a shared space, in order."""

    space: FiniteSpace
    events: tuple[Event, ...]
    names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        events = tuple(self.events)
        if not events:
            raise InvalidSpaceError("an event system needs at least one event")
        for e in events:
            if e.space is not self.space and e.space != self.space:
                raise InvalidSpaceError("all events must share the same space")
        names = tuple(self.names) or tuple(f"A{i + 1}" for i in range(len(events)))
        if len(names) != len(events):
            raise InvalidSpaceError("one name per event is required")
        object.__setattr__(self, "events", events)
        object.__setattr__(self, "names", names)

    @classmethod
    def from_masks(cls, space: FiniteSpace, masks: Sequence[int], names: Sequence[str] = ()) -> "EventSystem":
        return cls(space, tuple(Event(space, m) for m in masks), tuple(names))

    def __len__(self) -> int:
        return len(self.events)

    @property
    def masks(self) -> tuple[int, ...]:
        return tuple(e.mask for e in self.events)

    @property
    def probs(self) -> tuple[Fraction, ...]:
        return tuple(e.prob for e in self.events)

    def zero_events(self) -> list[int]:
        return [i for i, e in enumerate(self.events) if e.weight == 0]

    def require_positive(self) -> None:
        zero = self.zero_events()
        if zero:
            names = ", ".join(self.names[i] for i in zero)
            raise DomainError(f"events with zero probability: {names}")

    def gram(self) -> list[list[int]]:
        """Integer matrix of intersection weights, P(A_iA_j) * denominator."""
        sp, ms = self.space, self.masks
        m = len(ms)
        g = [[0] * m for _ in range(m)]
        for i in range(m):
            g[i][i] = sp.weight(ms[i])
            for j in range(i + 1, m):
                g[i][j] = g[j][i] = sp.weight(ms[i] & ms[j])
        return g

    def subsystem(self, indices: Sequence[int]) -> "EventSystem":
        return EventSystem(self.space, tuple(self.events[i] for i in indices),
                           tuple(self.names[i] for i in indices))


@dataclass(frozen=True)
class JointMatrix:
    """Exact pairwise intersection probabilities P(A_iA_j)."""

    entries: tuple[tuple[Fraction, ...], ...]

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.entries[i][j]

    def __len__(self) -> int:
        return len(self.entries)

    def is_symmetric(self) -> bool:
        m = len(self)
        return all(self.entries[i][j] == self.entries[j][i] for i in range(m) for j in range(m))

    def diagonal_dominates(self) -> bool:
        e, m = self.entries, len(self)
        return all(e[i][j] <= min(e[i][i], e[j][j]) for i in range(m) for j in range(m))

    def principal_minors(self):
        """Yield (index tuple, determinant) for every principal submatrix."""
        from itertools import combinations

        from .linalg import determinant

        m = len(self)
        for k in range(1, m + 1):
            for idx in combinations(range(m), k):
                sub = [[self.entries[i][j] for j in idx] for i in idx]
                yield idx, determinant(sub)

    def is_psd(self) -> bool:
        return all(d >= 0 for _, d in self.principal_minors())


def event_prob(e: Event) -> Fraction:
    return e.prob


def joint_matrix(sys: EventSystem) -> JointMatrix:
    d = sys.space.denominator
    return JointMatrix(tuple(tuple(Fraction(g, d) for g in row) for row in sys.gram()))


def union_prob(sys: EventSystem) -> Fraction:
    mask = 0
    for m in sys.masks:
        mask |= m
    return sys.space.prob(mask)


# -- space files -----------------------------------------------------------

_PROB_RE = re.compile(r"^(?:\d+/\d+|\d+(?:\.\d*)?|\.\d+)$")


def _parse_prob(token: str, line: int, col: int) -> Fraction:
    if not _PROB_RE.match(token):
        raise SpaceParseError(f"bad probability {token!r}", line, col)
    try:
        return Fraction(token)
    except ZeroDivisionError:
        raise SpaceParseError(f"zero denominator in {token!r}", line, col) from None


def _tokens(raw: str) -> list[tuple[str, int]]:
    return [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", raw)]


def parse_space(text: str) -> EventSystem:
    """Parse the line-oriented space format into an :class:`EventSystem`.

    ``atom <id> <prob>`` lines come first, then ``event <name> <id>...``.
    ``#`` starts a comment. Zero-probability events only warn here; the
    bound operations reject them.
    """
    atoms: list[tuple[str, Fraction]] = []
    atom_index: dict[str, int] = {}
    events: list[tuple[str, int, int]] = []  # name, mask, line
    event_lines: list[tuple[int, list[tuple[str, int]]]] = []
    last_atom_line = 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        raw = raw.split("#", 1)[0]
        toks = _tokens(raw)
        if not toks:
            continue
        kw, kcol = toks[0]
        if kw == "atom":
            if event_lines:
                raise SpaceParseError("atom declared after the first event", lineno, kcol)
            if len(toks) != 3:
                raise SpaceParseError("expected: atom <id> <prob>", lineno, kcol)
            (aid, acol), (ptok, pcol) = toks[1], toks[2]
            if aid in atom_index:
                raise SpaceParseError(f"duplicate atom id {aid!r}", lineno, acol)
            atom_index[aid] = len(atoms)
            atoms.append((aid, _parse_prob(ptok, lineno, pcol)))
            last_atom_line = lineno
        elif kw == "event":
            if len(toks) < 3:
                raise SpaceParseError("expected: event <name> <id> [<id> ...]", lineno, kcol)
            event_lines.append((lineno, toks[1:]))
        else:
            raise SpaceParseError(f"unknown directive {kw!r}", lineno, kcol)

    if not atoms:
        raise SpaceParseError("no atoms declared", max(1, len(text.splitlines())), 1)
    total = sum((p for _, p in atoms), Fraction(0))
    if total != 1:
        raise SpaceParseError(f"probabilities sum to {total} ≠ 1", last_atom_line, 1)
    if not event_lines:
        raise SpaceParseError("no events declared", max(1, len(text.splitlines())), 1)

    seen_names: set[str] = set()
    for lineno, toks in event_lines:
        (name, ncol), refs = toks[0], toks[1:]
        if name in seen_names:
            raise SpaceParseError(f"duplicate event name {name!r}", lineno, ncol)
        seen_names.add(name)
        mask = 0
        for aid, col in refs:
            if aid not in atom_index:
                raise SpaceParseError(f"event {name!r} references unknown atom {aid!r}", lineno, col)
            mask |= 1 << atom_index[aid]
        events.append((name, mask, lineno))

    space = FiniteSpace(tuple(atoms))
    for name, mask, lineno in events:
        if space.weight(mask) == 0:
            warnings.warn(f"line {lineno}: event {name!r} has probability zero",
                          ZeroProbabilityWarning, stacklevel=2)
    return EventSystem.from_masks(space, [m for _, m, _ in events], [n for n, _, _ in events])


def format_space(sys: EventSystem, header: Sequence[str] = ()) -> str:
    """Serialize to the space format; ``parse_space`` inverts this exactly."""
    lines = [f"# {h}" for h in header]
    ids = sys.space.ids
    for aid, p in sys.space.atoms:
        lines.append(f"atom {aid} {format_fraction(p)}")
    for name, e in zip(sys.names, sys.events):
        members = sorted(e.members)
        if not members:
            raise InvalidSpaceError(f"event {name!r} is empty and has no file representation")
        lines.append(f"event {name} " + " ".join(ids[i] for i in members))
    return "\n".join(lines) + "\n"
