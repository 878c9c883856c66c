"""Radial epiderivatives ``f^r(xbar; d)`` and their domain-restricted form.

The radial epiderivative is the infimum over *all* ``t > 0`` of the
difference quotient ``(f(xbar + t u) - f(xbar)) / t`` smoothed by a liminf
over ``u -> d``.  Restricting ``t`` to ``{t > 0 : xbar + t d in X}`` gives
the version used on constrained and discrete ground sets.

:func:`radial_epiderivative` picks the cheapest sound route:

* finite ground set: exact enumeration of the points on the ray;
* structured expression on an interval ray: a closed-form rule;
* anything else: the sampling estimator.

Every returned :class:`EpiderivativeValue` records which route produced it.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import expr as ex
from ._rational import (
    Number,
    Vector,
    add_scaled,
    dot,
    euclidean_norm,
    max_norm,
    positive_multiple,
    sub,
    to_number,
    vec,
)

log = logging.getLogger(__name__)

EXACT_RULE = "exact-rule"
ENUMERATION = "finite-domain-enumeration"
ESTIMATOR = "estimator"


class EpiderivativeError(ArithmeticError):
    """Base class for epiderivatives that cannot be reported as a value."""


class UndefinedAlongRay(EpiderivativeError):
    """No admissible ``t > 0`` puts ``xbar + t d`` in the domain (the infimum is +inf)."""


class NotEpidifferentiable(EpiderivativeError):
    """The sampled quotients diverged below the configured floor."""


# -- domains ------------------------------------------------------------------


class Domain:
    is_finite = False

    def contains(self, x: Sequence) -> bool:  # pragma: no cover - interface
        raise NotImplementedError

    def ray_limit(self, xbar: Sequence, d: Sequence) -> Number:
        """Largest admissible ``t`` on the ray (``math.inf`` if unbounded)."""
        return math.inf

    def to_dict(self) -> dict:  # pragma: no cover - interface
        raise NotImplementedError


@dataclass(frozen=True)
class AllSpace(Domain):
    def contains(self, x) -> bool:
        return True

    def to_dict(self) -> dict:
        return {"kind": "all"}


@dataclass(frozen=True)
class Box(Domain):
    """Per-coordinate bounds; ``None`` marks an unbounded side."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        if len(self.lower) != len(self.upper):
            raise ValueError("box bounds have different lengths")
        for lo, hi in zip(self.lower, self.upper):
            if lo is not None and hi is not None and lo > hi:
                raise ValueError(f"box lower bound {lo} exceeds upper bound {hi}")

    @classmethod
    def of(cls, lower, upper) -> "Box":
        conv = lambda bs: tuple(None if b is None else to_number(b) for b in bs)
        return cls(conv(lower), conv(upper))

    def contains(self, x) -> bool:
        for xi, lo, hi in zip(x, self.lower, self.upper):
            if lo is not None and xi < lo:
                return False
            if hi is not None and xi > hi:
                return False
        return True

    def ray_limit(self, xbar, d) -> Number:
        T = math.inf
        for xi, di, lo, hi in zip(xbar, d, self.lower, self.upper):
            if di > 0 and hi is not None:
                T = min(T, (hi - xi) / di)
            elif di < 0 and lo is not None:
                T = min(T, (lo - xi) / di)
        return max(T, Fraction(0)) if T != math.inf else T

    def to_dict(self) -> dict:
        from ._rational import fmt

        return {
            "kind": "box",
            "lower": [fmt(b) for b in self.lower],
            "upper": [fmt(b) for b in self.upper],
        }


class FiniteSet(Domain):
    """Nonempty finite point set, deduplicated, in first-seen order."""

    is_finite = True

    def __init__(self, points: Sequence[Sequence]):
        pts = []
        seen = set()
        for p in points:
            p = vec(p)
            if p not in seen:
                seen.add(p)
                pts.append(p)
        if not pts:
            raise ValueError("finite domain must be nonempty")
        if len({len(p) for p in pts}) != 1:
            raise ValueError("finite domain points have mixed dimensions")
        self.points: tuple = tuple(pts)
        self._set = seen

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __eq__(self, other):
        return isinstance(other, FiniteSet) and self.points == other.points

    def __hash__(self):
        return hash(self.points)

    def __repr__(self):
        return f"FiniteSet({[tuple(map(str, p)) for p in self.points]})"

    def contains(self, x) -> bool:
        return vec(x) in self._set

    def ray_points(self, xbar, d) -> list[tuple[Number, Vector]]:
        """``(t, point)`` pairs with ``point = xbar + t d``, ``t > 0``, sorted by t."""
        xbar = vec(xbar)
        out = []
        for p in self.points:
            t = positive_multiple(sub(p, xbar), d)
            if t is not None:
                out.append((t, p))
        out.sort(key=lambda tp: tp[0])
        return out

    def to_dict(self) -> dict:
        from ._rational import fmt

        return {"kind": "finite", "points": [[fmt(v) for v in p] for p in self.points]}


class Region(Domain):
    """Continuous ground set cut down by ``g_i(x) <= tol``: a feasible set ``S``."""

    def __init__(self, base: Domain, constraints: Sequence, tol: float = 1e-9):
        self.base = base
        self.constraints = tuple(constraints)
        self.tol = tol

    def contains(self, x) -> bool:
        if not self.base.contains(x):
            return False
        return all(float(ex.point_function(g)(x)) <= self.tol for g in self.constraints)

    def ray_limit(self, xbar, d) -> Number:
        return self.base.ray_limit(xbar, d)

    def member_mask(self, P: np.ndarray) -> np.ndarray:
        mask = np.ones(P.shape[0], dtype=bool)
        for g in self.constraints:
            mask &= ex.batch_function(g)(P) <= self.tol
        return mask

    def to_dict(self) -> dict:
        return {"kind": "region", "base": self.base.to_dict(), "constraints": len(self.constraints)}


# -- configuration and results ----------------------------------------------


@dataclass(frozen=True)
class EstimatorConfig:
    """Discretization of the inf over t and the liminf over u.

    Defaults: 512 log-spaced t in [1e-8, 1e8], 8 perturbed directions at
    relative radius 1e-6, 3 zoom rounds of 33 points around the best t.
    """

    t_min: float = 1e-8
    t_max: float = 1e8
    count: int = 512
    perturbations: int = 8
    perturbation_radius: float = 1e-6
    refine_rounds: int = 3
    refine_points: int = 33
    divergence_floor: float = -1e12
    tol: float = 1e-6
    seed: int = 0
    # classical-derivative estimators
    small_t: float = 1e-7
    small_t_count: int = 8
    clarke_radius: float = 1e-5
    clarke_samples: int = 64

    def __post_init__(self):
        if not self.t_min > 0:
            raise ValueError("t_min must be positive")
        if self.t_max < self.t_min:
            raise ValueError("t_max must be >= t_min")
        if self.count < 2:
            raise ValueError("t-grid needs at least two points")

    def t_grid(self) -> np.ndarray:
        return np.geomspace(self.t_min, self.t_max, self.count)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


DEFAULT_CONFIG = EstimatorConfig()


@dataclass(frozen=True)
class EpiderivativeValue:
    value: Number
    method: str
    rule: str | None = None
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def exact(self) -> bool:
        return self.method != ESTIMATOR and isinstance(self.value, Fraction)

    def __float__(self):
        return float(self.value)

    def to_dict(self) -> dict:
        from ._rational import fmt

        out = {"value": fmt(self.value), "method": self.method}
        if self.rule:
            out["rule"] = self.rule
        if self.diagnostics:
            out["diagnostics"] = {k: fmt(v) if isinstance(v, (Fraction, float)) else v
                                  for k, v in sorted(self.diagnostics.items())}
        return out


# -- exact rules --------------------------------------------------------------


def radial_epiderivative_convex(e: ex.Expression, xbar: Sequence, d: Sequence) -> EpiderivativeValue:
    """Convex ``f``: the quotient is nondecreasing in t, so ``f^r = f'``."""
    return EpiderivativeValue(ex.directional_derivative(e, xbar, d), EXACT_RULE, "convex")


def radial_epiderivative_norm_linear(a: Sequence, c, xbar: Sequence, d: Sequence,
                                     kind: str = "euclidean") -> EpiderivativeValue:
    """``<a,x> - c||x-b|| + beta`` has ``f^r(xbar; d) = <a,d> - c||d||`` for every xbar, b."""
    c = to_number(c)
    if c < 0:
        raise ValueError("norm coefficient c must be nonnegative")
    a, d = vec(a), vec(d) if not _has_float(d) else tuple(d)
    nd = euclidean_norm(d) if kind == "euclidean" else max_norm(d)
    return EpiderivativeValue(dot(a, d) - c * nd, EXACT_RULE, "negative-norm-linear")


def radial_epiderivative_min_affine(forms: Sequence[tuple[Sequence, object]], xbar: Sequence,
                                    d: Sequence) -> EpiderivativeValue:
    """``min_j <a_j,x> + alpha_j`` has ``f^r(xbar; d) = min_j <a_j, d>`` for every xbar."""
    if not forms:
        raise ValueError("min-affine rule needs at least one piece")
    d = tuple(d) if _has_float(d) else vec(d)
    value = min(dot(vec(a), d) for a, _ in forms)
    return EpiderivativeValue(value, EXACT_RULE, "min-affine")


def _has_float(v) -> bool:
    return any(isinstance(x, float) for x in v)


# -- dispatch -----------------------------------------------------------------


def _coerce(v) -> tuple:
    out = []
    for x in v:
        if isinstance(x, float):
            out.append(x)
        elif hasattr(x, "item") and isinstance(x.item(), float):
            out.append(x.item())
        else:
            out.append(to_number(x))
    return tuple(out)


def radial_epiderivative(fun, xbar: Sequence, d: Sequence, dom: Domain | None = None,
                         cfg: EstimatorConfig = DEFAULT_CONFIG) -> EpiderivativeValue:
    """``f^{r_X}(xbar; d)`` for ``X = dom`` (all of R^n when ``dom`` is None).

    ``fun`` is an :class:`~radialopt.expr.Expression` or a callable on
    1-D arrays (callables always go to enumeration or the estimator).

    Raises:
        UndefinedAlongRay: no admissible ``t`` on the ray.
        NotEpidifferentiable: estimator quotients fell below the floor.
    """
    xbar, d = _coerce(xbar), _coerce(d)
    if len(xbar) != len(d):
        raise ex.DimensionError("point and direction dimensions differ")
    if all(v == 0 for v in d):
        raise ValueError("direction must be nonzero")
    dom = AllSpace() if dom is None else dom

    if isinstance(dom, FiniteSet):
        return _enumerate(fun, xbar, d, dom)

    T = dom.ray_limit(xbar, d)
    if T == 0:
        raise UndefinedAlongRay(f"ray from {xbar} along {d} leaves the domain immediately")

    if isinstance(fun, ex.Expression) and not isinstance(dom, Region):
        exact = _exact_rule(fun, xbar, d, T)
        if exact is not None:
            return exact
    return estimate(fun, xbar, d, dom, cfg)


def _exact_rule(e: ex.Expression, xbar, d, T) -> EpiderivativeValue | None:
    n = len(xbar)
    ex.check_dimension(e, n)
    bounded = T != math.inf
    forms = ex.as_min_affine(e, n)
    if forms is not None:
        if bounded:
            return _clipped(e, xbar, d, T, "min-affine (ray-clipped)")
        return radial_epiderivative_min_affine(forms, xbar, d)
    nl = ex.as_negative_norm_linear(e, n)
    if nl is not None:
        if bounded:
            return _clipped(e, xbar, d, T, "negative-norm-linear (ray-clipped)")
        return radial_epiderivative_norm_linear(nl.a, nl.c, xbar, d, nl.kind)
    if ex.is_convex(e):
        return radial_epiderivative_convex(e, xbar, d)
    return None


def _clipped(e, xbar, d, T, rule) -> EpiderivativeValue:
    # concave-type quotient is nonincreasing in t, so the inf over (0, T] sits at T
    end = add_scaled(xbar, T, d)
    value = (ex.evaluate(e, end) - ex.evaluate(e, xbar)) / T
    return EpiderivativeValue(value, EXACT_RULE, rule, {"ray_limit": T})


def _enumerate(fun, xbar, d, dom: FiniteSet) -> EpiderivativeValue:
    pts = dom.ray_points(xbar, d)
    if not pts:
        raise UndefinedAlongRay(f"no point of the finite domain lies on the ray from {xbar} along {d}")
    f = ex.point_function(fun)
    f0 = f(xbar)
    best_t, best = None, None
    for t, p in pts:
        q = (f(p) - f0) / t
        if best is None or q < best:
            best_t, best = t, q
    return EpiderivativeValue(best, ENUMERATION, None, {"points_on_ray": len(pts), "argmin_t": best_t})


# -- estimator ----------------------------------------------------------------


def _perturbed_directions(d: np.ndarray, cfg: EstimatorConfig) -> np.ndarray:
    rng = np.random.default_rng(cfg.seed)
    R = rng.standard_normal((cfg.perturbations, d.size))
    R /= np.linalg.norm(R, axis=1, keepdims=True)
    return np.vstack([d, d + cfg.perturbation_radius * np.linalg.norm(d) * R])


def admissible_ts(xbar: np.ndarray, d: np.ndarray, dom: Domain, cfg: EstimatorConfig,
                  T=None) -> np.ndarray:
    """The t-grid clipped to the ray's admissible interval (plus its endpoint)."""
    T = dom.ray_limit(xbar, d) if T is None else T
    ts = cfg.t_grid()
    if T != math.inf:
        T = float(T)
        ts = np.append(ts[ts < T], T)
    if isinstance(dom, Region) and ts.size:
        ts = ts[dom.member_mask(xbar[None, :] + ts[:, None] * d[None, :])]
    return ts


def estimate(fun, xbar: Sequence, d: Sequence, dom: Domain | None = None,
             cfg: EstimatorConfig = DEFAULT_CONFIG) -> EpiderivativeValue:
    """Sampling estimate: min of the quotient over the t-grid and perturbed u.

    Values are infima over the evaluated set, so for continuous ``f`` they
    can only overshoot the true infimum (up to the u-perturbation).
    """
    dom = AllSpace() if dom is None else dom
    f = ex.batch_function(fun)
    x0 = np.array([float(v) for v in xbar])
    dv = np.array([float(v) for v in d])
    T = dom.ray_limit(xbar, d)
    ts = admissible_ts(x0, dv, dom, cfg, T)
    if ts.size == 0:
        raise UndefinedAlongRay(f"no admissible grid t on the ray from {tuple(xbar)} along {tuple(d)}")
    f0 = float(f(x0[None, :])[0])
    U = _perturbed_directions(dv, cfg)
    P = x0[None, None, :] + ts[:, None, None] * U[None, :, :]
    Q = (f(P.reshape(-1, x0.size)).reshape(ts.size, U.shape[0]) - f0) / ts[:, None]
    q = Q.min(axis=1)
    if np.isnan(q).any():
        raise NotEpidifferentiable("difference quotient is not a number")
    samples = Q.size
    i = int(np.argmin(q))
    best, best_t = float(q[i]), float(ts[i])

    lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, ts.size - 1)]
    for _ in range(cfg.refine_rounds):
        if hi <= lo:
            break
        zoom = np.linspace(lo, hi, cfg.refine_points)
        if isinstance(dom, Region):
            zoom = zoom[dom.member_mask(x0[None, :] + zoom[:, None] * dv[None, :])]
            if zoom.size == 0:
                break
        qz = (f(x0[None, :] + zoom[:, None] * dv[None, :]) - f0) / zoom
        samples += zoom.size
        j = int(np.argmin(qz))
        if qz[j] < best:
            best, best_t = float(qz[j]), float(zoom[j])
        step = (hi - lo) / (cfg.refine_points - 1)
        lo, hi = max(lo, best_t - step), min(hi, best_t + step)

    if best < cfg.divergence_floor:
        raise NotEpidifferentiable(f"quotient {best:.3g} below divergence floor {cfg.divergence_floor:.3g}")
    diag = {
        "t_min": float(ts[0]),
        "t_max": float(ts[-1]),
        "count": int(ts.size),
        "samples": int(samples),
        "argmin_t": best_t,
    }
    log.debug("estimator %s along %s -> %r", tuple(xbar), tuple(d), best)
    return EpiderivativeValue(best, ESTIMATOR, None, diag)


# -- classical derivatives (numeric, for the comparison chain) ------------------


def _small_ts(cfg: EstimatorConfig) -> np.ndarray:
    return np.geomspace(cfg.small_t, 8 * cfg.small_t, cfg.small_t_count)


def numeric_directional_derivative(fun, xbar, d, cfg: EstimatorConfig = DEFAULT_CONFIG) -> float:
    """``f'(xbar; d)`` from the quotient at the smallest configured t."""
    f = ex.batch_function(fun)
    x0 = np.array([float(v) for v in xbar])
    dv = np.array([float(v) for v in d])
    t = cfg.small_t
    vals = f(np.vstack([x0, x0 + t * dv]))
    return float((vals[1] - vals[0]) / t)


def numeric_subderivative(fun, xbar, d, cfg: EstimatorConfig = DEFAULT_CONFIG) -> float:
    """``df(xbar; d) = liminf_{t->0+, u->d}`` of the quotient, by sampling."""
    f = ex.batch_function(fun)
    x0 = np.array([float(v) for v in xbar])
    dv = np.array([float(v) for v in d])
    ts = _small_ts(cfg)
    U = _perturbed_directions(dv, cfg)
    P = x0[None, None, :] + ts[:, None, None] * U[None, :, :]
    f0 = float(f(x0[None, :])[0])
    Q = (f(P.reshape(-1, x0.size)).reshape(ts.size, U.shape[0]) - f0) / ts[:, None]
    value = float(Q.min())
    if value < cfg.divergence_floor:
        raise NotEpidifferentiable("subderivative estimate diverged")
    return value


def numeric_clarke(fun, xbar, d, cfg: EstimatorConfig = DEFAULT_CONFIG) -> float:
    """Clarke's ``f°(xbar; d) = limsup_{y->xbar, t->0+} (f(y+td)-f(y))/t``, by sampling."""
    f = ex.batch_function(fun)
    x0 = np.array([float(v) for v in xbar])
    dv = np.array([float(v) for v in d])
    n = x0.size
    rng = np.random.default_rng(cfg.seed)
    Z = rng.standard_normal((cfg.clarke_samples, n))
    Z /= np.linalg.norm(Z, axis=1, keepdims=True)
    Z *= rng.uniform(0, 1, (cfg.clarke_samples, 1)) ** (1 / n)
    fixed = np.vstack([np.zeros(n), np.eye(n), -np.eye(n), dv / np.linalg.norm(dv), -dv / np.linalg.norm(dv)])
    Y = x0 + cfg.clarke_radius * np.vstack([fixed * 0.5, Z])
    t = cfg.small_t * 0.1
    Q = (f(Y + t * dv) - f(Y)) / t
    return float(Q.max())


def quotient(fun, xbar, d, t) -> Number:
    """Single difference quotient ``(f(xbar + t d) - f(xbar)) / t`` (exact when possible)."""
    f = ex.point_function(fun)
    xbar, d = _coerce(xbar), _coerce(d)
    t = t if isinstance(t, float) else to_number(t)
    return (f(add_scaled(xbar, t, d)) - f(xbar)) / t


__all__ = [
    "AllSpace",
    "Box",
    "DEFAULT_CONFIG",
    "Domain",
    "ENUMERATION",
    "ESTIMATOR",
    "EXACT_RULE",
    "EpiderivativeError",
    "EpiderivativeValue",
    "EstimatorConfig",
    "FiniteSet",
    "NotEpidifferentiable",
    "Region",
    "UndefinedAlongRay",
    "admissible_ts",
    "estimate",
    "numeric_clarke",
    "numeric_directional_derivative",
    "numeric_subderivative",
    "quotient",
    "radial_epiderivative",
    "radial_epiderivative_convex",
    "radial_epiderivative_min_affine",
    "radial_epiderivative_norm_linear",
]
