import json
from fractions import Fraction as F

import numpy as np
import pytest

from radialopt import expr as ex


def test_operators_build_and_evaluate_exactly():
    x1, x2 = ex.var(0), ex.var(1)
    e = 2 * abs(x1 - 3) + abs(x2 - 4)
    assert e((3, 2)) == 2
    assert e(("1/2", 0)) == 9
    assert isinstance(e((F(1), F(2))), F)


def test_batch_evaluation_matches_pointwise():
    e = ex.minimum(ex.affine([1, 2], 1), ex.affine([-1, 0], 0)) - ex.norm([0, 1], "max")
    rng = np.random.default_rng(1)
    X = rng.normal(size=(20, 2))
    batch = ex.evaluate_batch(e, X)
    assert np.allclose(batch, [float(e(tuple(x))) for x in X])


def test_dimension_checks():
    e = ex.affine([1, 2, 3])
    assert ex.infer_dimension(e) == 3
    with pytest.raises(ex.DimensionError):
        ex.check_dimension(e, 2)
    with pytest.raises(ex.DimensionError):
        ex.check_dimension(ex.var(4), 3)


def test_min_and_max_need_arguments():
    with pytest.raises(ValueError):
        ex.minimum()
    with pytest.raises(ValueError):
        ex.maximum()


@pytest.mark.parametrize("e, tag", [
    (ex.affine([1, -1], 2), ex.AFFINE),
    (ex.minimum(ex.affine([1, 0]), ex.affine([0, 1])), ex.MIN_AFFINE),
    (-abs(ex.var(0)), ex.MIN_AFFINE),
    (ex.affine([1, 0]) - 2 * ex.norm([1, 1]), ex.NEGATIVE_NORM_LINEAR),
    (abs(ex.var(0)) + ex.norm([0, 0]), ex.CONVEX),
    (ex.maximum(ex.minimum(ex.var(0), ex.var(1)), ex.const(0)), ex.MAX_MIN_AFFINE),
    (ex.norm([0, 0]) - ex.norm([1, 1]), ex.GENERAL),
])
def test_classify(e, tag):
    assert ex.classify(e, 2) == tag


def test_min_affine_forms_of_negative_abs():
    forms = ex.as_min_affine(-abs(ex.var(0) - 1), 1)
    assert sorted(forms) == sorted([((F(-1),), F(1)), ((F(1),), F(-1))])


def test_directional_derivative_at_kink():
    e = 2 * abs(ex.var(0) - 3) + abs(ex.var(1) - 4)
    assert ex.directional_derivative(e, (3, 2), (1, -1)) == 3
    assert ex.directional_derivative(e, (3, 2), (-1, 0)) == 2
    g = ex.minimum(ex.var(0), -ex.var(0))
    assert ex.directional_derivative(g, (0,), (1,)) == -1


def test_serialization_round_trip():
    e = ex.maximum(ex.affine(["1/2", 0], -1), 3 * abs(ex.var(1)) - ex.norm([0, 1], "max"))
    text = json.dumps(ex.to_dict(e))
    assert ex.from_dict(json.loads(text)) == e


def test_from_dict_reports_path():
    with pytest.raises(ex.ExpressionSyntaxError) as info:
        ex.from_dict({"kind": "sum", "args": [{"kind": "var", "index": 0}, {"kind": "bogus"}]})
    assert info.value.path == "$.args[1]"


def test_lower_lipschitz_probe():
    assert ex.is_lower_lipschitz_probe(-abs(ex.var(0)), (0,)).holds
    # -sqrt|x| drops faster than any linear function near 0
    probe = ex.is_lower_lipschitz_probe(lambda x: -np.sqrt(abs(x[0])), (0.0,))
    assert not probe.holds and probe.witness is not None


def test_zero_scaled_norm_is_affine_for_routing():
    e = ex.affine([1, 2], 0) - 0 * ex.norm([1, 1])
    assert ex.is_convex(e) and ex.is_concave(e)
