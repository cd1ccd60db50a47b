import warnings
from fractions import Fraction

import pytest
from hypothesis import given, settings

from borelbounds.core import (
    DomainError,
    Event,
    EventSystem,
    FiniteSpace,
    InvalidSpaceError,
    SpaceParseError,
    ZeroProbabilityWarning,
    event_prob,
    format_fraction,
    format_space,
    joint_matrix,
    parse_space,
    union_prob,
)
from borelbounds.six_events import reference_matrix

from conftest import event_systems
from oracles import brute_joint, brute_union


def test_parse_six_event_file(space_file):
    sys_ = parse_space(space_file.read_text())
    assert sys_.space.probs == (Fraction(1, 5),) * 5
    assert len(sys_) == 6
    assert sys_.names == ("A1", "A2", "A3", "A4", "A5", "A6")
    assert sys_.events[0].members == frozenset({0, 1, 3})  # x1, x2, x4


def test_decimals_parse_exactly():
    text = "atom a 0.2\natom b .3\natom c 1/2\nevent E a b\n"
    s = parse_space(text)
    assert s.space.probs == (Fraction(1, 5), Fraction(3, 10), Fraction(1, 2))
    assert event_prob(s.events[0]) == Fraction(1, 2)


def test_degenerate_single_atom():
    s = parse_space("atom only 1\nevent A only\n")
    assert event_prob(s.events[0]) == 1


def test_sum_not_one_is_reported():
    with pytest.raises(SpaceParseError, match="sum to 5/6 ≠ 1"):
        parse_space("atom a 1/2\natom b 1/3\nevent A a\n")


@pytest.mark.parametrize("text, line, col", [
    ("atom a 1/2\natom a 1/2\nevent A a\n", 2, 6),
    ("atom a 1\nevent A a b\n", 2, 11),
    ("atom a 1\nevent A\n", 2, 1),
    ("atom a -1\n", 1, 8),
    ("atom a 1/0\nevent A a\n", 1, 8),
    ("atom a 1\nfoo\n", 2, 1),
    ("atom a 1\nevent A a\natom b 0\n", 3, 1),
    ("atom a 1\nevent A a\nevent A a\n", 3, 7),
])
def test_parse_errors_carry_position(text, line, col):
    with pytest.raises(SpaceParseError) as exc:
        parse_space(text)
    assert (exc.value.line, exc.value.column) == (line, col)


def test_comments_and_blank_lines():
    text = "# header\n\natom a 1/2  # half\natom b 1/2\n\nevent A a b # all\n"
    s = parse_space(text)
    assert union_prob(s) == 1


def test_zero_probability_event_warns_but_parses():
    with pytest.warns(ZeroProbabilityWarning):
        s = parse_space("atom a 1\natom z 0\nevent Z z\n")
    assert s.zero_events() == [0]
    with pytest.raises(DomainError):
        s.require_positive()


def test_event_prob_edge_cases():
    sp = FiniteSpace.uniform(4)
    assert event_prob(Event(sp, 0)) == 0
    assert event_prob(Event(sp, sp.full_mask)) == 1
    assert event_prob(sp.event(["x1", "x3"])) == Fraction(1, 2)


def test_event_outside_space_rejected():
    with pytest.raises(InvalidSpaceError):
        Event(FiniteSpace.uniform(2), 0b100)


def test_space_invariants():
    with pytest.raises(InvalidSpaceError):
        FiniteSpace((("a", Fraction(1, 2)), ("a", Fraction(1, 2))))
    with pytest.raises(InvalidSpaceError):
        FiniteSpace((("a", Fraction(3, 2)), ("b", Fraction(-1, 2))))


def test_joint_matrix_of_six_events(six):
    assert joint_matrix(six).entries == reference_matrix()
    assert union_prob(six) == 1
    assert event_prob(six.events[0]) == Fraction(3, 5)


def test_joint_matrix_small_cases():
    sp = FiniteSpace.uniform(4)
    disjoint = EventSystem.from_masks(sp, [0b0001, 0b0010])
    assert joint_matrix(disjoint).entries == ((Fraction(1, 4), 0), (0, Fraction(1, 4)))
    twice = EventSystem.from_masks(sp, [0b0011, 0b0011])
    assert {v for row in joint_matrix(twice).entries for v in row} == {Fraction(1, 2)}


def test_union_small_cases():
    sp = FiniteSpace.uniform(6)
    assert union_prob(EventSystem.from_masks(sp, [0b1, 0b10, 0b1100])) == Fraction(4, 6)
    assert union_prob(EventSystem.from_masks(sp, [0b111])) == Fraction(1, 2)


def test_format_fraction_keeps_denominator():
    assert format_fraction(Fraction(1)) == "1/1"
    assert format_fraction(Fraction(54, 55)) == "54/55"


def test_six_event_matrix_is_psd(six):
    assert joint_matrix(six).is_psd()


@settings(max_examples=150, deadline=None)
@given(event_systems(positive=False))
def test_joint_matrix_invariants(s):
    jm = joint_matrix(s)
    assert jm.is_symmetric()
    assert jm.diagonal_dominates()
    assert [jm[i, i] for i in range(len(jm))] == list(s.probs)
    assert [list(r) for r in jm.entries] == brute_joint(s)


@settings(max_examples=40, deadline=None)
@given(event_systems(max_atoms=6, max_events=4, positive=False))
def test_joint_matrix_principal_minors_nonnegative(s):
    assert joint_matrix(s).is_psd()


@settings(max_examples=150, deadline=None)
@given(event_systems(positive=False))
def test_union_between_max_and_sum(s):
    u = union_prob(s)
    assert u == brute_union(s)
    assert u >= max(s.probs)
    assert u <= min(Fraction(1), sum(s.probs, Fraction(0)))


@settings(max_examples=150, deadline=None)
@given(event_systems(positive=False))
def test_round_trip(s):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ZeroProbabilityWarning)
        once = parse_space(format_space(s))
        twice = parse_space(format_space(once))
    assert once == twice
    assert once.masks == s.masks
    assert once.space.probs == s.space.probs
