"""Expression trees for the function class handled by the package.

Functions are built from constants, variables, affine forms, norms
``||x - b||`` (Euclidean or max), absolute values, scalar multiples, sums
and finite min/max.  Coefficients are kept as :class:`~fractions.Fraction`
so evaluation at rational points is exact; the only source of rounding is
a Euclidean norm whose squared value is not a perfect rational square.

Example:
    >>> from fractions import Fraction
    >>> f = 2 * abs(var(0) - 3) + abs(var(1) - 4)
    >>> evaluate(f, (3, 2))
    Fraction(2, 1)
    >>> classify(f)
    'convex'
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence, Union

import numpy as np

from ._rational import (
    Number,
    Vector,
    euclidean_norm,
    fmt,
    is_exact,
    max_norm,
    to_number,
    vec,
)

NORM_KINDS = ("euclidean", "max")

# cap on the number of affine pieces produced while canonicalizing
PIECE_CAP = 512

# relative tolerance for deciding active pieces when values are floats
FLOAT_TIE_TOL = 1e-12

AFFINE = "affine"
MIN_AFFINE = "min-affine"
NEGATIVE_NORM_LINEAR = "negative-norm-linear"
CONVEX = "convex"
MAX_MIN_AFFINE = "max-min-affine"
GENERAL = "general"


class DimensionError(ValueError):
    """Point or coefficient data does not match the expression dimension."""


class Expression:
    """Base class of all expression nodes.  Nodes are immutable."""

    children: tuple = ()

    def __add__(self, other):
        return Sum((self, _lift(other)))

    def __radd__(self, other):
        return Sum((_lift(other), self))

    def __sub__(self, other):
        return Sum((self, Scale(Fraction(-1), _lift(other))))

    def __rsub__(self, other):
        return Sum((_lift(other), Scale(Fraction(-1), self)))

    def __neg__(self):
        return Scale(Fraction(-1), self)

    def __mul__(self, factor):
        if isinstance(factor, Expression):
            raise TypeError("only scalar multiples are supported")
        return Scale(to_number(factor), self)

    __rmul__ = __mul__

    def __abs__(self):
        return Abs(self)

    def __call__(self, x):
        return evaluate(self, x)


def _lift(value) -> Expression:
    return value if isinstance(value, Expression) else Const(to_number(value))


@dataclass(frozen=True)
class Const(Expression):
    value: Number


@dataclass(frozen=True)
class Var(Expression):
    index: int

    def __post_init__(self):
        if self.index < 0:
            raise ValueError("variable index must be nonnegative")


@dataclass(frozen=True)
class Affine(Expression):
    """``<coeffs, x> + offset``."""

    coeffs: Vector
    offset: Number = Fraction(0)


@dataclass(frozen=True)
class Norm(Expression):
    """``||x - center||`` in the Euclidean or max norm."""

    center: Vector
    kind: str = "euclidean"

    def __post_init__(self):
        if self.kind not in NORM_KINDS:
            raise ValueError(f"unsupported norm {self.kind!r}; use one of {NORM_KINDS}")


@dataclass(frozen=True)
class Abs(Expression):
    arg: Expression

    @property
    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Scale(Expression):
    factor: Number
    arg: Expression

    @property
    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Sum(Expression):
    args: tuple

    @property
    def children(self):
        return self.args


@dataclass(frozen=True)
class Min(Expression):
    args: tuple

    def __post_init__(self):
        if not self.args:
            raise ValueError("min needs at least one argument")

    @property
    def children(self):
        return self.args


@dataclass(frozen=True)
class Max(Expression):
    args: tuple

    def __post_init__(self):
        if not self.args:
            raise ValueError("max needs at least one argument")

    @property
    def children(self):
        return self.args


# -- constructors -----------------------------------------------------------


def const(value) -> Const:
    return Const(to_number(value))


def var(index: int) -> Var:
    return Var(index)


def affine(coeffs: Sequence, offset=0) -> Affine:
    return Affine(vec(coeffs), to_number(offset))


def norm(center: Sequence, kind: str = "euclidean") -> Norm:
    return Norm(vec(center), kind)


def minimum(*args) -> Min:
    return Min(tuple(_lift(a) for a in args))


def maximum(*args) -> Max:
    return Max(tuple(_lift(a) for a in args))


def min_affine(forms: Sequence[tuple[Sequence, object]]) -> Expression:
    """``min_j <a_j, x> + alpha_j`` from a list of ``(a_j, alpha_j)``."""
    pieces = tuple(affine(a, alpha) for a, alpha in forms)
    return pieces[0] if len(pieces) == 1 else Min(pieces)


def walk(e: Expression) -> Iterator[Expression]:
    yield e
    for c in e.children:
        yield from walk(c)


def infer_dimension(e: Expression) -> int:
    """Smallest dimension consistent with the expression's data."""
    n = 0
    for node in walk(e):
        if isinstance(node, Var):
            n = max(n, node.index + 1)
        elif isinstance(node, Affine):
            n = max(n, len(node.coeffs))
        elif isinstance(node, Norm):
            n = max(n, len(node.center))
    return n


def check_dimension(e: Expression, n: int) -> None:
    for node in walk(e):
        if isinstance(node, Var) and node.index >= n:
            raise DimensionError(f"variable index {node.index} out of range for dimension {n}")
        if isinstance(node, Affine) and len(node.coeffs) != n:
            raise DimensionError(f"affine form has {len(node.coeffs)} coefficients, expected {n}")
        if isinstance(node, Norm) and len(node.center) != n:
            raise DimensionError(f"norm center has {len(node.center)} entries, expected {n}")


# -- evaluation -------------------------------------------------------------


def _coerce_point(x) -> tuple:
    out = []
    for v in x:
        if isinstance(v, (Fraction, float)):
            out.append(v)
        elif isinstance(v, int) and not isinstance(v, bool):
            out.append(Fraction(v))
        elif hasattr(v, "item"):
            out.append(v.item() if isinstance(v.item(), float) else Fraction(v.item()))
        else:
            out.append(to_number(v))
    return tuple(out)


def evaluate(e: Expression, x: Sequence) -> Number:
    """Value of ``e`` at ``x``; exact when ``x`` and all data are rational."""
    x = _coerce_point(x)
    check_dimension(e, len(x))
    return _eval(e, x)


def _eval(e: Expression, x: tuple) -> Number:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return x[e.index]
    if isinstance(e, Affine):
        return sum((a * xi for a, xi in zip(e.coeffs, x)), e.offset)
    if isinstance(e, Norm):
        w = tuple(xi - bi for xi, bi in zip(x, e.center))
        return euclidean_norm(w) if e.kind == "euclidean" else max_norm(w)
    if isinstance(e, Abs):
        return abs(_eval(e.arg, x))
    if isinstance(e, Scale):
        return e.factor * _eval(e.arg, x)
    if isinstance(e, Sum):
        return sum((_eval(a, x) for a in e.args), Fraction(0))
    if isinstance(e, Min):
        return min(_eval(a, x) for a in e.args)
    if isinstance(e, Max):
        return max(_eval(a, x) for a in e.args)
    raise TypeError(f"unknown node {type(e).__name__}")


def evaluate_batch(e: Expression, X: np.ndarray) -> np.ndarray:
    """Vectorized float evaluation at the rows of ``X`` (shape ``(N, n)``)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DimensionError("expected a 2-D array of points")
    check_dimension(e, X.shape[1])
    return _batch(e, X)


def _batch(e: Expression, X: np.ndarray) -> np.ndarray:
    if isinstance(e, Const):
        return np.full(X.shape[0], float(e.value))
    if isinstance(e, Var):
        return X[:, e.index].copy()
    if isinstance(e, Affine):
        return X @ np.array([float(a) for a in e.coeffs]) + float(e.offset)
    if isinstance(e, Norm):
        W = X - np.array([float(b) for b in e.center])
        if e.kind == "euclidean":
            return np.sqrt(np.einsum("ij,ij->i", W, W))
        return np.abs(W).max(axis=1) if W.shape[1] else np.zeros(X.shape[0])
    if isinstance(e, Abs):
        return np.abs(_batch(e.arg, X))
    if isinstance(e, Scale):
        return float(e.factor) * _batch(e.arg, X)
    if isinstance(e, Sum):
        out = np.zeros(X.shape[0])
        for a in e.args:
            out = out + _batch(a, X)
        return out
    if isinstance(e, Min):
        return np.minimum.reduce([_batch(a, X) for a in e.args])
    if isinstance(e, Max):
        return np.maximum.reduce([_batch(a, X) for a in e.args])
    raise TypeError(f"unknown node {type(e).__name__}")


def batch_function(fun) -> Callable[[np.ndarray], np.ndarray]:
    """Adapt an Expression or a plain callable ``f(x) -> float`` to batches."""
    if isinstance(fun, Expression):
        return lambda X: evaluate_batch(fun, X)

    def call(X):
        X = np.asarray(X, dtype=float)
        return np.array([float(fun(row)) for row in X])

    return call


def point_function(fun) -> Callable:
    """Adapt an Expression or callable to single-point evaluation."""
    if isinstance(fun, Expression):
        return lambda x: evaluate(fun, x)
    return lambda x: fun(np.asarray([float(v) for v in x]))


# -- exact directional derivative -------------------------------------------


def _ties(values: list, best) -> list[int]:
    if all(isinstance(v, Fraction) for v in values):
        return [i for i, v in enumerate(values) if v == best]
    scale = max(1.0, abs(float(best)))
    return [i for i, v in enumerate(values) if abs(float(v) - float(best)) <= FLOAT_TIE_TOL * scale]


def directional_derivative(e: Expression, x: Sequence, d: Sequence) -> Number:
    """One-sided directional derivative ``lim_{t->0+} (e(x+td)-e(x))/t``.

    Every expression in the grammar is piecewise smooth, so the limit
    exists and is computed by structural recursion (exact for rational
    data away from irrational Euclidean norms).
    """
    x, d = _coerce_point(x), _coerce_point(d)
    if len(x) != len(d):
        raise DimensionError("point and direction dimensions differ")
    check_dimension(e, len(x))
    return _dd(e, x, d)[1]


def _dd(e: Expression, x: tuple, d: tuple) -> tuple[Number, Number]:
    if isinstance(e, Const):
        return e.value, Fraction(0)
    if isinstance(e, Var):
        return x[e.index], d[e.index]
    if isinstance(e, Affine):
        return _eval(e, x), sum((a * di for a, di in zip(e.coeffs, d)), Fraction(0))
    if isinstance(e, Norm):
        w = tuple(xi - bi for xi, bi in zip(x, e.center))
        if e.kind == "euclidean":
            r = euclidean_norm(w)
            if r == 0:
                return r, euclidean_norm(d)
            return r, sum((wi * di for wi, di in zip(w, d)), Fraction(0)) / r
        r = max_norm(w)
        if r == 0:
            return r, max_norm(d)
        absw = [abs(wi) for wi in w]
        active = _ties(absw, r)
        return r, max((d[k] if w[k] > 0 else -d[k]) for k in active)
    if isinstance(e, Abs):
        v, dv = _dd(e.arg, x, d)
        if v > 0:
            return v, dv
        if v < 0:
            return -v, -dv
        return abs(v), abs(dv)
    if isinstance(e, Scale):
        v, dv = _dd(e.arg, x, d)
        return e.factor * v, e.factor * dv
    if isinstance(e, Sum):
        parts = [_dd(a, x, d) for a in e.args]
        return sum((p[0] for p in parts), Fraction(0)), sum((p[1] for p in parts), Fraction(0))
    if isinstance(e, (Min, Max)):
        parts = [_dd(a, x, d) for a in e.args]
        vals = [p[0] for p in parts]
        pick = min if isinstance(e, Min) else max
        best = pick(vals)
        return best, pick(parts[i][1] for i in _ties(vals, best))
    raise TypeError(f"unknown node {type(e).__name__}")


# -- canonical piecewise-affine forms -----------------------------------------

Form = tuple  # (coeffs: Vector, offset: Number)


def _form_add(p: Form, q: Form) -> Form:
    return tuple(a + b for a, b in zip(p[0], q[0])), p[1] + q[1]


def _form_scale(c, p: Form) -> Form:
    return tuple(c * a for a in p[0]), c * p[1]


def _dedup(forms):
    seen, out = set(), []
    for f in forms:
        if f not in seen:
            seen.add(f)
            out.append(f)
    return out


def _cross(lists):
    total = math.prod(len(l) for l in lists)
    if total > PIECE_CAP:
        return None
    out = []
    for combo in itertools.product(*lists):
        acc = combo[0]
        for f in combo[1:]:
            acc = _form_add(acc, f)
        out.append(acc)
    return _dedup(out)


def _unit(n: int, i: int) -> Vector:
    return tuple(Fraction(1) if k == i else Fraction(0) for k in range(n))


def as_min_affine(e: Expression, n: int | None = None) -> list[Form] | None:
    """Pieces ``(a_j, alpha_j)`` with ``e(x) = min_j <a_j,x> + alpha_j``, or None."""
    n = infer_dimension(e) if n is None else n
    return _min_forms(e, n)


def as_max_affine(e: Expression, n: int | None = None) -> list[Form] | None:
    n = infer_dimension(e) if n is None else n
    return _max_forms(e, n)


def _affine_form(e: Expression, n: int) -> Form | None:
    if isinstance(e, Const):
        return (Fraction(0),) * n, e.value
    if isinstance(e, Var):
        return _unit(n, e.index), Fraction(0)
    if isinstance(e, Affine):
        return tuple(e.coeffs), e.offset
    return None


def _min_forms(e: Expression, n: int):
    base = _affine_form(e, n)
    if base is not None:
        return [base]
    if isinstance(e, Scale):
        if e.factor >= 0:
            inner = _min_forms(e.arg, n)
        else:
            inner = _max_forms(e.arg, n)
        return None if inner is None else _dedup(_form_scale(e.factor, f) for f in inner)
    if isinstance(e, Sum):
        parts = [_min_forms(a, n) for a in e.args]
        if any(p is None for p in parts):
            return None
        return _cross(parts) if parts else [((Fraction(0),) * n, Fraction(0))]
    if isinstance(e, Min):
        parts = [_min_forms(a, n) for a in e.args]
        if any(p is None for p in parts):
            return None
        return _dedup(f for p in parts for f in p)
    if isinstance(e, Max) and len(e.args) == 1:
        return _min_forms(e.args[0], n)
    return None


def _max_forms(e: Expression, n: int):
    base = _affine_form(e, n)
    if base is not None:
        return [base]
    if isinstance(e, Scale):
        if e.factor >= 0:
            inner = _max_forms(e.arg, n)
        else:
            inner = _min_forms(e.arg, n)
        return None if inner is None else _dedup(_form_scale(e.factor, f) for f in inner)
    if isinstance(e, Sum):
        parts = [_max_forms(a, n) for a in e.args]
        if any(p is None for p in parts):
            return None
        return _cross(parts) if parts else [((Fraction(0),) * n, Fraction(0))]
    if isinstance(e, Max):
        parts = [_max_forms(a, n) for a in e.args]
        if any(p is None for p in parts):
            return None
        return _dedup(f for p in parts for f in p)
    if isinstance(e, Min) and len(e.args) == 1:
        return _max_forms(e.args[0], n)
    if isinstance(e, Abs):
        inner = _min_forms(e.arg, n)
        if inner is not None and len(inner) == 1:
            f = inner[0]
            return _dedup([f, _form_scale(Fraction(-1), f)])
        return None
    if isinstance(e, Norm) and e.kind == "max":
        out = []
        for k in range(n):
            u = _unit(n, k)
            out.append((u, -e.center[k]))
            out.append((tuple(-a for a in u), e.center[k]))
        return _dedup(out)
    return None


def as_max_min_affine(e: Expression, n: int | None = None) -> list[list[Form]] | None:
    """Outer-max/inner-min pieces ``max_i min_j <a_ij,x> + alpha_ij``, or None."""
    n = infer_dimension(e) if n is None else n
    return _maxmin(e, n)


def _count(mm) -> int:
    return sum(len(inner) for inner in mm)


def _maxmin(e: Expression, n: int):
    mins = _min_forms(e, n)
    if mins is not None:
        return [mins]
    maxs = _max_forms(e, n)
    if maxs is not None:
        return [[f] for f in maxs]
    if isinstance(e, Max):
        parts = [_maxmin(a, n) for a in e.args]
        if any(p is None for p in parts):
            return None
        out = [inner for p in parts for inner in p]
        return out if _count(out) <= PIECE_CAP else None
    if isinstance(e, Min):
        parts = [_maxmin(a, n) for a in e.args]
        if any(p is None for p in parts):
            return None
        # min_k max_i F_ki = max over (i_1..i_K) of min_k F_k,i_k
        if math.prod(len(p) for p in parts) > PIECE_CAP:
            return None
        out = [_dedup(f for inner in combo for f in inner) for combo in itertools.product(*parts)]
        return out if _count(out) <= PIECE_CAP else None
    if isinstance(e, Sum):
        parts = [_maxmin(a, n) for a in e.args]
        if any(p is None for p in parts):
            return None
        out = [((Fraction(0),) * n, Fraction(0))]
        acc = [[out[0]]]
        for p in parts:
            nxt = []
            for left in acc:
                for right in p:
                    crossed = _cross([left, right])
                    if crossed is None:
                        return None
                    nxt.append(crossed)
            if _count(nxt) > PIECE_CAP:
                return None
            acc = nxt
        return acc
    if isinstance(e, Scale):
        inner = _maxmin(e.arg, n)
        if inner is None:
            return None
        if e.factor >= 0:
            return [[_form_scale(e.factor, f) for f in mins] for mins in inner]
        # -max_i min_j F_ij = min_i max_j (-F_ij) = max over choices of min_i (-F_i,j_i)
        if math.prod(len(m) for m in inner) > PIECE_CAP:
            return None
        out = [_dedup(_form_scale(e.factor, f) for f in combo) for combo in itertools.product(*inner)]
        return out if _count(out) <= PIECE_CAP else None
    if isinstance(e, Abs):
        pos = _maxmin(e.arg, n)
        neg = _maxmin(Scale(Fraction(-1), e.arg), n)
        if pos is None or neg is None:
            return None
        out = pos + neg
        return out if _count(out) <= PIECE_CAP else None
    return None


@dataclass(frozen=True)
class NormLinear:
    """``<a, x> - c ||x - b|| + beta`` with ``c > 0``."""

    a: Vector
    c: Number
    b: Vector
    beta: Number
    kind: str


def _linear_leaves(e: Expression, coef, out: list) -> bool:
    if isinstance(e, Sum):
        return all(_linear_leaves(a, coef, out) for a in e.args)
    if isinstance(e, Scale):
        return _linear_leaves(e.arg, coef * e.factor, out)
    if isinstance(e, (Min, Max)) and len(e.args) == 1:
        return _linear_leaves(e.args[0], coef, out)
    if isinstance(e, (Const, Var, Affine, Norm)):
        out.append((coef, e))
        return True
    return False


def as_negative_norm_linear(e: Expression, n: int | None = None) -> NormLinear | None:
    n = infer_dimension(e) if n is None else n
    leaves: list = []
    if not _linear_leaves(e, Fraction(1), leaves):
        return None
    a = [Fraction(0)] * n
    beta = Fraction(0)
    norms: dict = {}
    for coef, leaf in leaves:
        if isinstance(leaf, Norm):
            key = (leaf.center, leaf.kind)
            norms[key] = norms.get(key, Fraction(0)) + coef
            continue
        coeffs, offset = _affine_form(leaf, n)
        a = [ai + coef * ci for ai, ci in zip(a, coeffs)]
        beta = beta + coef * offset
    norms = {k: v for k, v in norms.items() if v != 0}
    if len(norms) != 1:
        return None
    (center, kind), coef = next(iter(norms.items()))
    if coef >= 0:
        return None
    return NormLinear(tuple(a), -coef, center, beta, kind)


def is_convex(e: Expression) -> bool:
    """Sound (not complete) structural convexity test."""
    if isinstance(e, (Const, Var, Affine, Norm)):
        return True
    if isinstance(e, Abs):
        inner = _min_forms(e.arg, infer_dimension(e.arg))
        return inner is not None and len(inner) == 1
    if isinstance(e, Scale):
        if e.factor == 0:
            return True
        return is_convex(e.arg) if e.factor > 0 else is_concave(e.arg)
    if isinstance(e, (Sum, Max)):
        return all(is_convex(a) for a in e.args)
    if isinstance(e, Min):
        return len(e.args) == 1 and is_convex(e.args[0])
    return False


def is_concave(e: Expression) -> bool:
    if isinstance(e, (Const, Var, Affine)):
        return True
    if isinstance(e, Scale):
        if e.factor == 0:
            return True
        return is_concave(e.arg) if e.factor > 0 else is_convex(e.arg)
    if isinstance(e, (Sum, Min)):
        return all(is_concave(a) for a in e.args)
    if isinstance(e, Max):
        return len(e.args) == 1 and is_concave(e.args[0])
    return False


def classify(e: Expression, n: int | None = None) -> str:
    """Structure tag used to route ``e`` to an epiderivative rule.

    Tags are sound, not complete: ``general`` is always a safe answer.
    """
    n = infer_dimension(e) if n is None else n
    mins = _min_forms(e, n)
    if mins is not None:
        return AFFINE if len(mins) == 1 else MIN_AFFINE
    if as_negative_norm_linear(e, n) is not None:
        return NEGATIVE_NORM_LINEAR
    if is_convex(e):
        return CONVEX
    if _maxmin(e, n) is not None:
        return MAX_MIN_AFFINE
    return GENERAL


# -- lower Lipschitz probe ----------------------------------------------------


@dataclass(frozen=True)
class LipschitzProbeConfig:
    constant: float = 1e3
    r_min: float = 1e-10
    r_max: float = 1e3
    radii: int = 64
    directions: int = 32
    seed: int = 0


@dataclass(frozen=True)
class LipschitzProbe:
    holds: bool
    witness: tuple | None = None
    worst_ratio: float = 0.0


def is_lower_lipschitz_probe(fun, xbar: Sequence, cfg: LipschitzProbeConfig = LipschitzProbeConfig()) -> LipschitzProbe:
    """Sample ``f(x) - f(xbar) >= -L ||x - xbar||`` on log-spaced shells.

    ``fun`` is an Expression or any callable on 1-D arrays.  A pass is
    evidence only; a failure carries the violating point.
    """
    f = batch_function(fun)
    x0 = np.array([float(v) for v in xbar])
    n = x0.size
    rng = np.random.default_rng(cfg.seed)
    U = rng.standard_normal((cfg.directions, n))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    if n == 1:
        U = np.array([[1.0], [-1.0]])
    radii = np.geomspace(cfg.r_min, cfg.r_max, cfg.radii)
    P = (x0[None, None, :] + radii[:, None, None] * U[None, :, :]).reshape(-1, n)
    dist = np.repeat(radii, U.shape[0])
    f0 = float(f(x0[None, :])[0])
    drop = f(P) - f0
    ratio = -drop / dist
    slack = 1e-12 * (1.0 + abs(f0))
    bad = drop < -cfg.constant * dist - slack
    worst = int(np.argmax(ratio))
    if bad.any():
        i = int(np.argmax(np.where(bad, ratio, -np.inf)))
        return LipschitzProbe(False, tuple(P[i].tolist()), float(ratio[i]))
    return LipschitzProbe(True, None, float(ratio[worst]))


# -- serialization ------------------------------------------------------------


def to_dict(e: Expression) -> dict:
    if isinstance(e, Const):
        return {"kind": "const", "value": fmt(e.value)}
    if isinstance(e, Var):
        return {"kind": "var", "index": e.index}
    if isinstance(e, Affine):
        return {"kind": "affine", "coeffs": [fmt(a) for a in e.coeffs], "offset": fmt(e.offset)}
    if isinstance(e, Norm):
        return {"kind": "norm", "center": [fmt(b) for b in e.center], "norm": e.kind}
    if isinstance(e, Abs):
        return {"kind": "abs", "arg": to_dict(e.arg)}
    if isinstance(e, Scale):
        return {"kind": "scale", "factor": fmt(e.factor), "arg": to_dict(e.arg)}
    if isinstance(e, (Sum, Min, Max)):
        kind = {Sum: "sum", Min: "min", Max: "max"}[type(e)]
        return {"kind": kind, "args": [to_dict(a) for a in e.args]}
    raise TypeError(f"unknown node {type(e).__name__}")


class ExpressionSyntaxError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def from_dict(data, path: str = "$") -> Expression:
    """Parse the nested-object expression grammar used in problem files."""
    if not isinstance(data, dict) or "kind" not in data:
        raise ExpressionSyntaxError(path, "expression must be an object with a 'kind' field")
    kind = data["kind"]
    try:
        if kind == "const":
            return Const(to_number(data["value"]))
        if kind == "var":
            return Var(int(data["index"]))
        if kind == "affine":
            return Affine(vec(data["coeffs"]), to_number(data.get("offset", 0)))
        if kind == "norm":
            return Norm(vec(data["center"]), data.get("norm", "euclidean"))
        if kind == "abs":
            return Abs(from_dict(data["arg"], f"{path}.arg"))
        if kind == "scale":
            return Scale(to_number(data["factor"]), from_dict(data["arg"], f"{path}.arg"))
        if kind in ("sum", "min", "max"):
            args = tuple(from_dict(a, f"{path}.args[{i}]") for i, a in enumerate(data["args"]))
            return {"sum": Sum, "min": Min, "max": Max}[kind](args)
    except ExpressionSyntaxError:
        raise
    except KeyError as exc:
        raise ExpressionSyntaxError(path, f"missing field {exc.args[0]!r} for kind {kind!r}") from None
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ExpressionSyntaxError(path, str(exc)) from None
    raise ExpressionSyntaxError(path, f"unknown expression kind {kind!r}")


ExpressionLike = Union[Expression, Callable]
