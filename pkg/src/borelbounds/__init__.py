"""Exact lower bounds for unions of events and Borel-Cantelli prefix functionals."""

from .core import (
    BoundsError,
    DomainError,
    Event,
    EventSystem,
    FiniteSpace,
    InvalidSpaceError,
    JointMatrix,
    Rational,
    SpaceParseError,
    event_prob,
    format_space,
    joint_matrix,
    parse_space,
    union_prob,
)
from .union_bounds import GKSolution, KATTerms, chung_erdos, gk_bound, gk_quotient, gk_solve, kat_bound

__version__ = "0.1.0"
