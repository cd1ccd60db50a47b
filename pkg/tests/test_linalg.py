from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from borelbounds.linalg import InconsistentSystemError, determinant, solve, solve_integer

from oracles import gauss_jordan

small = st.integers(-4, 4)


@st.composite
def low_rank_systems(draw):
    """n x n integer matrix of rank <= r with a consistent right-hand side."""
    n = draw(st.integers(1, 6))
    r = draw(st.integers(0, n))
    u = draw(st.lists(st.lists(small, min_size=r, max_size=r), min_size=n, max_size=n))
    v = draw(st.lists(st.lists(small, min_size=n, max_size=n), min_size=r, max_size=r))
    a = [[sum(u[i][k] * v[k][j] for k in range(r)) for j in range(n)] for i in range(n)]
    x0 = draw(st.lists(small, min_size=n, max_size=n))
    b = [sum(a[i][j] * x0[j] for j in range(n)) for i in range(n)]
    return a, b


def _residual_zero(a, x, b):
    return all(sum(Fraction(a[i][j]) * x[j] for j in range(len(x))) == b[i] for i in range(len(a)))


@settings(max_examples=300, deadline=None)
@given(low_rank_systems(), st.randoms(use_true_random=False))
def test_solution_satisfies_system(ab, rnd):
    a, b = ab
    order = list(range(len(a)))
    rnd.shuffle(order)
    sol = solve_integer(a, b, order)
    assert _residual_zero(a, sol.x, b)
    assert sol.rank == sympy.Matrix(a).rank()
    assert all(sol.x[j] == 0 for j in sol.free)
    assert len(sol.free) == len(a) - sol.rank


@settings(max_examples=200, deadline=None)
@given(low_rank_systems())
def test_matches_gauss_jordan_in_natural_order(ab):
    a, b = ab
    assert list(solve_integer(a, b).x) == gauss_jordan(a, b)


def test_inconsistent_system_detected():
    with pytest.raises(InconsistentSystemError):
        solve_integer([[1, 1], [2, 2]], [1, 3])


def test_rational_inputs_are_row_scaled():
    a = [[Fraction(1, 2), Fraction(1, 3)], [Fraction(1, 4), Fraction(1, 5)]]
    sol = solve(a, ["1", "0.5"])
    assert _residual_zero(a, sol.x, [1, Fraction(1, 2)])


def test_bad_order_rejected():
    with pytest.raises(ValueError):
        solve_integer([[1, 0], [0, 1]], [1, 1], order=[0, 0])


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 5).flatmap(
    lambda n: st.lists(st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=4),
                                min_size=n, max_size=n), min_size=n, max_size=n)))
def test_determinant_matches_sympy(a):
    expected = sympy.Matrix([[sympy.Rational(v.numerator, v.denominator) for v in row] for row in a]).det()
    got = determinant(a)
    assert sympy.Rational(got.numerator, got.denominator) == expected
