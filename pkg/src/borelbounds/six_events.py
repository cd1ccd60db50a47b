"""The six-event gap instance: GK = 54/55 < 1 = KAT.

Five atoms of mass 0.2. The membership table and the reference joint matrix
are kept separately so a perturbed table can be checked against the
unperturbed matrix.
"""

from __future__ import annotations

from fractions import Fraction

from .core import EventSystem, FiniteSpace, format_space

ATOMS = (("x1", "0.2"), ("x2", "0.2"), ("x3", "0.2"), ("x4", "0.2"), ("x5", "0.2"))

# event -> member atoms
TABLE = {
    "A1": ("x1", "x2", "x4"),
    "A2": ("x1", "x3", "x5"),
    "A3": ("x1", "x3", "x5"),
    "A4": ("x2", "x4", "x5"),
    "A5": ("x2", "x4", "x5"),
    "A6": ("x1", "x2", "x3"),
}

MATRIX = (
    ("0.6", "0.2", "0.2", "0.4", "0.4", "0.4"),
    ("0.2", "0.6", "0.6", "0.2", "0.2", "0.4"),
    ("0.2", "0.6", "0.6", "0.2", "0.2", "0.4"),
    ("0.4", "0.2", "0.2", "0.6", "0.6", "0.2"),
    ("0.4", "0.2", "0.2", "0.6", "0.6", "0.2"),
    ("0.4", "0.4", "0.4", "0.2", "0.2", "0.6"),
)

GK_VALUE = Fraction(54, 55)
KAT_VALUE = Fraction(1)


def reference_matrix() -> tuple[tuple[Fraction, ...], ...]:
    return tuple(tuple(Fraction(v) for v in row) for row in MATRIX)


def six_event_system(table: dict[str, tuple[str, ...]] | None = None) -> EventSystem:
    table = TABLE if table is None else table
    space = FiniteSpace(tuple((a, Fraction(p)) for a, p in ATOMS))
    names = tuple(table)
    return EventSystem(space, tuple(space.event(table[n]) for n in names), names)


def space_text() -> str:
    return format_space(six_event_system(), header=("six events on five atoms of mass 1/5",))
