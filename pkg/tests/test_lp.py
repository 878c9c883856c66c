from fractions import Fraction as F

from radialopt._rational import exact_sqrt, fmt, positive_multiple, rank, to_number
from radialopt.lp import INFEASIBLE, OPTIMAL, UNBOUNDED, linprog_exact


def test_to_number_keeps_rationals_exact():
    assert to_number("3/4") == F(3, 4)
    assert to_number(0.1) == F(1, 10)
    assert to_number(7) == F(7)


def test_exact_sqrt_perfect_square_and_irrational():
    assert exact_sqrt(F(9, 4)) == F(3, 2)
    assert isinstance(exact_sqrt(F(2)), float)


def test_rank_and_positive_multiple():
    assert rank([(1, 2), (2, 4)]) == 1
    assert rank([(1, 0), (0, 1), (1, 1)]) == 2
    assert positive_multiple((F(2), F(-2)), (F(1), F(-1))) == 2
    assert positive_multiple((F(-2), F(2)), (F(1), F(-1))) is None
    assert positive_multiple((F(1), F(0)), (F(1), F(1))) is None


def test_fmt():
    assert fmt(F(-7, 2)) == "-7/2"
    assert fmt(float("inf")) == "inf"
    assert fmt(None) is None


def test_lp_optimum_is_exact():
    # max 3x + 2y  s.t. x + y <= 4, x + 3y <= 6, x <= 3
    res = linprog_exact([3, 2], [[1, 1], [1, 3], [1, 0]], [4, 6, 3])
    assert res.status == OPTIMAL
    assert res.x == (F(3), F(1))
    assert res.objective == 11


def test_lp_unbounded_and_infeasible():
    assert linprog_exact([1], [[-1]], [-2]).status == UNBOUNDED
    assert linprog_exact([1], [[1]], [-1]).status == INFEASIBLE


def test_lp_equality_and_negative_rhs():
    # x + y = 1, x >= 1/3 written as -x <= -1/3; minimize x
    res = linprog_exact([-1, 0], [[-1, 0]], [F(-1, 3)], [[1, 1]], [1])
    assert res.status == OPTIMAL
    assert res.x == (F(1, 3), F(2, 3))


def test_lp_degenerate_does_not_cycle():
    # a classic degenerate instance (Beale); Bland's rule must terminate
    c = [F(3, 4), -150, F(1, 50), -6]
    A = [[F(1, 4), -60, F(-1, 25), 9], [F(1, 2), -90, F(-1, 50), 3], [0, 0, 1, 0]]
    res = linprog_exact(c, A, [0, 0, 1])
    assert res.status == OPTIMAL
    assert res.objective == F(1, 20)
