import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from borelbounds.core import DomainError, EventSystem, FiniteSpace, union_prob
from borelbounds.union_bounds import chung_erdos, gk_bound, gk_quotient, gk_solve, kat_bound

from conftest import event_systems, random_corpus_system
from oracles import ce_oracle, gk_oracle, kat_oracle, normalized_gk_matrix, quotient_oracle


def _solves_normalized_system(system, gamma):
    m = normalized_gk_matrix(system)
    return all(sum(m[i][j] * gamma[j] for j in range(len(gamma))) == 1 for i in range(len(gamma)))


class TestSixEvents:
    def test_gk(self, six):
        sol = gk_solve(six)
        assert sol.bound == Fraction(54, 55)
        assert _solves_normalized_system(six, sol.gamma)
        assert sol.bound == gk_oracle(six)[0]
        # A2 = A3 and A4 = A5, so two columns are free
        assert sol.rank == 4
        assert sol.free_indices == (2, 4)

    def test_gamma_against_oracle(self, six):
        _, gamma = gk_oracle(six)
        assert list(gk_solve(six).gamma) == gamma

    def test_kat_terms(self, six):
        value, terms = kat_bound(six)
        assert value == 1
        assert terms.S == (Fraction(11, 5),) * 6
        assert terms.theta == (Fraction(2, 3),) * 6
        assert terms.term == (Fraction(1, 6),) * 6
        assert [t for _, _, t in kat_oracle(six)[1]] == list(terms.term)

    def test_chung_erdos(self, six):
        assert chung_erdos(six) == Fraction(54, 55)

    def test_gap(self, six):
        assert kat_bound(six)[0] - gk_bound(six) == Fraction(1, 55)


def test_single_event():
    sp = FiniteSpace((("a", Fraction(2, 7)), ("b", Fraction(5, 7))))
    s = EventSystem.from_masks(sp, [0b01])
    p = Fraction(2, 7)
    sol = gk_solve(s)
    assert sol.gamma == (p,) and sol.bound == p
    value, terms = kat_bound(s)
    assert value == p and terms.S == (p,) and terms.theta == (0,)
    assert chung_erdos(s) == p


def test_disjoint_events_are_tight():
    sp = FiniteSpace.uniform(6)
    s = EventSystem.from_masks(sp, [0b000001, 0b000110, 0b111000])
    probs = [Fraction(1, 6), Fraction(1, 3), Fraction(1, 2)]
    assert list(gk_solve(s).gamma) == probs
    assert gk_bound(s) == kat_bound(s)[0] == chung_erdos(s) == union_prob(s) == 1


def test_two_disjoint_events():
    sp = FiniteSpace.uniform(6)
    s = EventSystem.from_masks(sp, [0b000011, 0b000100])
    assert gk_bound(s) == Fraction(1, 2)


@pytest.mark.parametrize("m", [2, 3, 5])
def test_repeated_event(m):
    sp = FiniteSpace.uniform(5)
    a = 0b01011
    s = EventSystem.from_masks(sp, [a] * m)
    p = Fraction(3, 5)
    sol = gk_solve(s)
    assert sol.bound == p and sol.rank == 1
    value, terms = kat_bound(s)
    assert value == p
    assert terms.theta == (0,) * m
    assert terms.term == (p / m,) * m


def test_repeated_event_quadratic_form_oracle():
    """On a two-copy system the quotient is P(A) wherever it is defined."""
    sp = FiniteSpace.uniform(5)
    s = EventSystem.from_masks(sp, [0b01011, 0b01011])
    grid = [Fraction(k, 4) for k in range(-8, 9)]
    values = {quotient_oracle(s, (w1, w2)) for w1, w2 in itertools.product(grid, grid)}
    assert max(values) == Fraction(3, 5)
    assert values <= {0, Fraction(3, 5)}
    assert gk_bound(s) == Fraction(3, 5)


def test_independent_events_chung_erdos():
    # two fair coins on {HH, HT, TH, TT}; A1 = first heads, A2 = second heads
    sp = FiniteSpace.uniform(4)
    s = EventSystem.from_masks(sp, [0b0011, 0b0101])
    assert chung_erdos(s) == Fraction(2, 3)


def test_zero_probability_rejected():
    sp = FiniteSpace((("a", Fraction(1)), ("z", Fraction(0))))
    s = EventSystem.from_masks(sp, [0b01, 0b10])
    with pytest.raises(DomainError):
        gk_solve(s)
    with pytest.raises(DomainError):
        gk_bound(s)
    with pytest.raises(DomainError):
        kat_bound(s)
    assert chung_erdos(s) == 1


def test_chung_erdos_all_zero():
    sp = FiniteSpace((("a", Fraction(1)), ("z", Fraction(0))))
    with pytest.raises(DomainError):
        chung_erdos(EventSystem.from_masks(sp, [0b10]))


@settings(max_examples=300, deadline=None)
@given(event_systems())
def test_bounds_match_oracles_and_are_valid(s):
    gk = gk_bound(s)
    kat, terms = kat_bound(s)
    ce = chung_erdos(s)
    u = union_prob(s)
    assert gk == gk_oracle(s)[0]
    assert kat == kat_oracle(s)[0]
    assert ce == ce_oracle(s)
    assert 0 < gk <= u <= 1
    assert kat <= u
    assert gk >= ce
    for S, theta, p in zip(terms.S, terms.theta, s.probs):
        assert S >= p > 0
        assert 0 <= theta < 1
        assert S - theta * p > 0


@settings(max_examples=200, deadline=None)
@given(event_systems(), st.randoms(use_true_random=False))
def test_solution_sum_invariant_under_pivot_order(s, rnd):
    order = list(range(len(s)))
    rnd.shuffle(order)
    a, b = gk_solve(s), gk_solve(s, order)
    assert _solves_normalized_system(s, b.gamma)
    assert a.bound == b.bound
    assert a.rank == b.rank


@settings(max_examples=150, deadline=None)
@given(event_systems(max_events=4), st.data())
def test_quotient_never_exceeds_gk(s, data):
    gk = gk_bound(s)
    omega = data.draw(st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=5),
                               min_size=len(s), max_size=len(s)))
    assert gk_quotient(s, omega) <= gk
    assert gk_quotient(s, omega) == quotient_oracle(s, omega)
    maximizer = [g / p for g, p in zip(gk_solve(s).gamma, s.probs)]
    assert gk_quotient(s, maximizer) == gk


@settings(max_examples=100, deadline=None)
@given(event_systems())
def test_chung_erdos_duplication_invariant(s):
    doubled = EventSystem.from_masks(s.space, s.masks + s.masks)
    assert chung_erdos(doubled) == chung_erdos(s)
    assert gk_bound(doubled) == gk_bound(s)


def test_neither_bound_dominates():
    rng = np.random.default_rng(7)
    kat_wins = gk_wins = 0
    for _ in range(3000):
        s = random_corpus_system(rng, max_events=6, max_atoms=6)
        gk, kat = gk_bound(s), kat_bound(s)[0]
        kat_wins += kat > gk
        gk_wins += gk > kat
    assert kat_wins > 0 and gk_wins > 0
