"""Property tests for the algebraic invariants (hypothesis, derandomized)."""

from fractions import Fraction as F

from hypothesis import given, settings
from hypothesis import strategies as st

from generators import random_finite_problem, vertex_system1
from radialopt import certificates as cert
from radialopt import cones
from radialopt import expr as ex
from radialopt.epiderivative import radial_epiderivative
from radialopt.problem import dump_problem, parse_problem

PROFILE = settings(max_examples=100, derandomize=True, deadline=None)

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)
positive = st.fractions(min_value=F(1, 8), max_value=8, max_denominator=8)


def vectors(n):
    return st.tuples(*[rationals] * n)


def nonzero(n):
    return vectors(n).filter(any)


@st.composite
def expressions(draw, n=2, depth=2):
    leaf = st.one_of(
        st.builds(ex.affine, vectors(n), rationals),
        st.builds(lambda c, k: ex.norm(c, k), vectors(n), st.sampled_from(ex.NORM_KINDS)),
        st.builds(ex.var, st.integers(0, n - 1)),
    )
    if depth == 0:
        return draw(leaf)
    sub = expressions(n, depth - 1)
    kind = draw(st.sampled_from(["leaf", "abs", "scale", "sum", "min", "max"]))
    if kind == "leaf":
        return draw(leaf)
    if kind == "abs":
        return abs(draw(sub))
    if kind == "scale":
        return draw(rationals) * draw(sub)
    parts = draw(st.lists(sub, min_size=1, max_size=3))
    return {"sum": ex.Sum, "min": ex.Min, "max": ex.Max}[kind](tuple(parts))


@PROFILE
@given(st.lists(st.tuples(vectors(2), rationals), min_size=1, max_size=5), vectors(2), nonzero(2), positive)
def test_positive_homogeneity_min_affine(forms, x, d, lam):
    f = ex.min_affine(forms)
    base = radial_epiderivative(f, x, d)
    scaled = radial_epiderivative(f, x, tuple(lam * v for v in d))
    assert base.exact and scaled.value == lam * base.value


@PROFILE
@given(vectors(2), vectors(2), st.fractions(0, 3, max_denominator=4), vectors(2), nonzero(2), positive)
def test_positive_homogeneity_max_norm_linear(a, b, c, x, d, lam):
    f = ex.affine(a, 1) - c * ex.norm(b, "max")
    base = radial_epiderivative(f, x, d).value
    assert radial_epiderivative(f, x, tuple(lam * v for v in d)).value == lam * base


@PROFILE
@given(st.lists(st.lists(rationals, min_size=2, max_size=2), min_size=1, max_size=4))
def test_gordan_exclusive_and_verified(rows):
    res = cert.gordan_alternative(rows)
    A = [[F(v) for v in r] for r in rows]
    if res.system == 1:
        assert all(x >= 0 for x in res.solution) and all(p < 0 for p in res.product)
    else:
        assert all(v >= 0 for v in res.solution) and any(res.solution)
        assert all(p >= 0 for p in res.product)
    assert (res.system == 1) == vertex_system1(A)


@PROFILE
@given(st.lists(st.lists(rationals, min_size=2, max_size=2), min_size=1, max_size=4), positive)
def test_multiplier_scale_freedom(rows, lam):
    res = cert.gordan_alternative(rows)
    if res.system == 2:
        v = [lam * x for x in res.solution]
        assert all(sum(v[i] * F(rows[i][j]) for i in range(len(rows))) >= 0 for j in range(2))


@PROFILE
@given(expressions())
def test_expression_round_trip(e):
    assert ex.from_dict(ex.to_dict(e)) == e


@PROFILE
@given(expressions(), vectors(2))
def test_batch_and_exact_evaluation_agree(e, x):
    import numpy as np

    exact = float(ex.evaluate(e, x))
    batch = float(ex.evaluate_batch(e, np.array([[float(v) for v in x]]))[0])
    assert abs(exact - batch) <= 1e-9 * (1 + abs(exact))


@PROFILE
@given(st.integers(0, 10_000))
def test_problem_round_trip_and_closed_sets(seed):
    p = random_finite_problem(seed)
    assert parse_problem(dump_problem(p)) == p
    x = next(iter(p.feasible_set))
    ctx = cones.PointContext(p, x)
    assert set(cones.descent_set(ctx)) <= set(cones.descent_set(ctx, strict=False))
    _, g1, g1t = cones.g_sets(ctx)
    assert set(g1) <= set(g1t)
