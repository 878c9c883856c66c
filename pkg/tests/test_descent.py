from fractions import Fraction as F

import pytest

from radialopt import certificates as cert
from radialopt import descent
from radialopt import expr as ex
from radialopt.epiderivative import Box, FiniteSet
from radialopt.problem import Problem


def _v(*xs):
    return tuple(F(x) for x in xs)


def test_find_descent_example_one(ex1):
    found = descent.find_descent_direction(ex1, (1, 2))
    assert found.direction == _v(1, -1) and found.value.value == -3
    assert descent.find_descent_direction(ex1, (2, 1)) is None


def test_constant_objective_has_no_descent():
    p = Problem(ex.const(1), 2, (), Box.of([-1, -1], [1, 1]))
    assert descent.find_descent_direction(p, (0, 0), budget=32) is None


def test_step_example_one(ex1):
    assert descent.step(ex1, (1, 2), d=(1, -1)) == _v(2, 1)
    with pytest.raises(descent.StepFailed):
        descent.step(ex1, (2, 1), d=(-1, 1))


def test_step_linear_on_box_reaches_boundary():
    p = Problem(ex.affine([1, 1]), 2, (), Box.of([-1, -1], [1, 1]))
    x = descent.step(p, (0, 0), d=(-1, -1))
    assert x == (-1.0, -1.0)


def test_step_fails_when_grid_misses_the_dip():
    # f < 0 only for |x - 5| < 1e-3; an 8-point grid cannot land there
    f = -ex.maximum(ex.const(0), F(1, 1000) - abs(ex.var(0) - 5))
    p = Problem(f, 1, (), Box.of([-10], [10]), estimator_overrides=(("count", 8),))
    with pytest.raises(descent.StepFailed):
        descent.step(p, (0,), d=(1,))


def test_solve_example_one(ex1):
    traj = descent.solve(ex1, (1, 2))
    assert traj.points == [_v(1, 2), _v(2, 1)]
    assert traj.status == descent.CONVERGED
    assert traj.certificate.status == cert.CERTIFIED


def test_solve_from_optimum_takes_no_steps(ex1):
    traj = descent.solve(ex1, (2, 1))
    assert traj.steps == 0 and traj.certificate.status == cert.CERTIFIED


def test_solve_example_two_decreases_strictly(ex2):
    traj = descent.solve(ex2, (1, 4), max_iter=4)
    vals = [float(v) for v in traj.values]
    assert len(vals) >= 2
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert all(ex2.is_feasible(x) for x in traj.points)


def test_solve_escapes_a_local_minimum():
    # local minimum at 0 (f = 0), global minimum at 6 (f = -3)
    f = ex.minimum(abs(ex.var(0)), 3 * abs(ex.var(0) - 6) - 3)
    p = Problem(f, 1, (), FiniteSet([(x,) for x in range(-3, 8)]))
    traj = descent.solve(p, (0,))
    assert traj.points[-1] == _v(6)
    assert traj.certificate.status == cert.CERTIFIED
