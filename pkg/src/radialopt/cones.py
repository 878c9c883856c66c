"""Direction sets at a feasible point and the assumptions that link them.

All sets are built from one candidate list so that inclusions between
them can be checked direction by direction:

* finite ground set: one canonical direction per ray through ``X \\ {xbar}``
  (exhaustive);
* box or all-space: the problem's listed directions followed by seeded
  random directions (sampled).

Radial epiderivatives are taken along rays restricted either to the ground
set ``X`` or to the feasible set ``S`` (see :class:`PointContext`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import expr as ex
from ._rational import fmt, is_exact, max_norm, sub
from .epiderivative import (
    ESTIMATOR,
    EpiderivativeValue,
    EstimatorConfig,
    FiniteSet,
    Region,
    UndefinedAlongRay,
    admissible_ts,
    radial_epiderivative,
)
from .problem import Problem

# set kinds
FEASIBLE = "feasible-D"
F0 = "descent-F0"
F1 = "descent-F1"
F1_TILDE = "closed-F1tilde"
G0 = "G0"
G1 = "G1"
G1_TILDE = "G1tilde"
G0A = "G0a"
G1A = "G1a"
G1A_TILDE = "G1a-tilde"

# restriction of the radial epiderivative
AUTO = "auto"
GROUND = "ground"
FEASIBLE_SET = "feasible"
RESTRICTIONS = (AUTO, GROUND, FEASIBLE_SET)

# assumption outcomes
HOLDS = "holds"
FAILS = "fails"
INCONCLUSIVE = "inconclusive"

ASSUMPTIONS = ("A1", "A2", "A3")

FLOAT_SIGN_TOL = 1e-12


def canonical(d: Sequence) -> tuple:
    """Representative of the ray through ``d``: scale to max-norm 1."""
    d = ex._coerce_point(d)
    m = max_norm(d)
    if m == 0:
        raise ValueError("direction must be nonzero")
    return tuple(v / m for v in d)


def sampled_direction_count(n: int) -> int:
    return 64 if n <= 3 else 256 * n


@dataclass(frozen=True)
class DirectionSet:
    kind: str
    directions: tuple
    exhaustive: bool

    def __post_init__(self):
        for d in self.directions:
            if all(v == 0 for v in d):
                raise ValueError("direction sets hold nonzero directions only")

    def __len__(self):
        return len(self.directions)

    def __iter__(self):
        return iter(self.directions)

    def __contains__(self, d) -> bool:
        return canonical(d) in set(self.directions)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "exhaustive": self.exhaustive,
            "directions": [[fmt(v) for v in d] for d in self.directions],
        }


@dataclass(frozen=True)
class ActiveSet:
    """0-based indices ``i`` with ``g_i(xbar) = 0`` (within ``tol``)."""

    indices: tuple
    tol: float | Fraction = 0

    def __iter__(self):
        return iter(self.indices)

    def __len__(self):
        return len(self.indices)

    def to_dict(self) -> dict:
        return {"indices": list(self.indices), "labels": [f"g{i + 1}" for i in self.indices], "tol": fmt(self.tol)}


@dataclass(frozen=True)
class AssumptionResult:
    name: str
    status: str
    witness: tuple | None = None
    exhaustive: bool = True
    statement: str = ""

    def to_dict(self) -> dict:
        out = {"name": self.name, "status": self.status, "exhaustive": self.exhaustive,
               "statement": self.statement}
        if self.witness is not None:
            out["witness"] = [fmt(v) for v in self.witness]
        return out


@dataclass(frozen=True)
class RelationCheck:
    name: str
    status: str  # holds | violated | skipped
    witness: tuple | None = None
    requires: str | None = None

    def to_dict(self) -> dict:
        out = {"name": self.name, "status": self.status}
        if self.requires:
            out["requires"] = self.requires
        if self.witness is not None:
            out["witness"] = [fmt(v) for v in self.witness]
        return out


class PointContext:
    """Everything computed at one feasible point, with a value cache.

    ``restrict`` chooses where the inf over ``t`` runs: ``"ground"`` uses
    ``X``, ``"feasible"`` uses ``S``.  ``"auto"`` picks ``S`` on finite
    ground sets (exact, and the only choice under which global minimality
    forces the multiplier systems on every basis) and ``X`` on continuous
    ones, where closed-form rules stay available.
    """

    def __init__(self, problem: Problem, xbar: Sequence, restrict: str = AUTO,
                 cfg: EstimatorConfig | None = None, tol=None, budget: int | None = None):
        if restrict not in RESTRICTIONS:
            raise ValueError(f"restrict must be one of {RESTRICTIONS}")
        self.problem = problem
        self.xbar = ex._coerce_point(xbar)
        if len(self.xbar) != problem.dimension:
            raise ex.DimensionError(f"point has {len(self.xbar)} coordinates, expected {problem.dimension}")
        problem.require_feasible(self.xbar)
        self.cfg = cfg if cfg is not None else problem.config
        if restrict == AUTO:
            restrict = FEASIBLE_SET if problem.is_finite else GROUND
        self.restrict = restrict
        self.tol = problem.tolerance_for(self.xbar) if tol is None else tol
        self.budget = budget
        self._values: dict = {}

    # -- basic data -------------------------------------------------------------

    @property
    def exhaustive(self) -> bool:
        return self.problem.is_finite

    @property
    def ray_domain(self):
        return self.problem.feasible_set if self.restrict == FEASIBLE_SET else self.problem.domain

    def function(self, key):
        return self.problem.objective if key == "f" else self.problem.constraints[key]

    @cached_property
    def base_values(self) -> dict:
        out = {"f": ex.evaluate(self.problem.objective, self.xbar)}
        for i, g in enumerate(self.problem.constraints):
            out[i] = ex.evaluate(g, self.xbar)
        return out

    @cached_property
    def active(self) -> ActiveSet:
        idx = tuple(i for i in range(self.problem.m) if abs(self.base_values[i]) <= self.tol)
        return ActiveSet(idx, self.tol)

    def value(self, key, d) -> EpiderivativeValue | None:
        """Restricted epiderivative of ``f`` (key ``"f"``) or ``g_i`` (key ``i``); None means +inf."""
        d = canonical(d)
        ck = (key, d)
        if ck not in self._values:
            try:
                self._values[ck] = radial_epiderivative(self.function(key), self.xbar, d, self.ray_domain, self.cfg)
            except UndefinedAlongRay:
                self._values[ck] = None
        return self._values[ck]

    def negative(self, v: EpiderivativeValue | None) -> bool:
        if v is None:
            return False
        if isinstance(v.value, Fraction):
            return v.value < 0
        slack = self.cfg.tol if v.method == ESTIMATOR else FLOAT_SIGN_TOL
        return v.value < -slack

    def nonpositive(self, v: EpiderivativeValue | None) -> bool:
        if v is None:
            return False
        if isinstance(v.value, Fraction):
            return v.value <= 0
        slack = self.cfg.tol if v.method == ESTIMATOR else FLOAT_SIGN_TOL
        return v.value <= slack

    # -- rays -----------------------------------------------------------------------

    def ray_points(self, d, dom=None) -> list:
        """Admissible points ``xbar + t d`` of ``dom`` (default: the restriction set)."""
        dom = self.ray_domain if dom is None else dom
        if isinstance(dom, FiniteSet):
            return [p for _, p in dom.ray_points(self.xbar, d)]
        x0 = np.array([float(v) for v in self.xbar])
        dv = np.array([float(v) for v in d])
        ts = admissible_ts(x0, dv, dom, self.cfg)
        return list(x0[None, :] + ts[:, None] * dv[None, :])

    def _values_at(self, key, pts) -> list:
        if not len(pts):
            return []
        if isinstance(pts[0], tuple):
            return [ex.evaluate(self.function(key), p) for p in pts]
        return list(ex.batch_function(self.function(key))(np.array(pts)))

    def strictly_decreases(self, keys: Iterable, d) -> bool:
        """Is there an admissible ``t`` with every listed function strictly below its value at xbar?"""
        keys = list(keys)
        pts = self.ray_points(d)
        if not pts:
            return False
        ok = np.ones(len(pts), dtype=bool)
        exact = isinstance(pts[0], tuple) and is_exact(pts[0])
        for k in keys:
            vals = self._values_at(k, pts)
            base = self.base_values[k]
            if exact:
                ok &= np.array([v < base for v in vals], dtype=bool)
            else:
                # float rounding must not manufacture a strict decrease
                v = np.asarray(vals, dtype=float)
                b = float(base)
                ok &= v < b - FLOAT_SIGN_TOL * (1 + np.abs(v) + abs(b))
        return bool(ok.any())

    # -- candidate directions -------------------------------------------------------

    @cached_property
    def candidates(self) -> tuple:
        p = self.problem
        if p.is_finite:
            rays = {canonical(sub(x, self.xbar)) for x in p.domain if x != self.xbar}
            return tuple(sorted(rays))
        out, seen = [], set()
        for d in p.directions:
            c = canonical(d)
            if c not in seen:
                seen.add(c)
                out.append(c)
        count = self.budget if self.budget is not None else sampled_direction_count(p.dimension)
        rng = np.random.default_rng(self.cfg.seed)
        Z = rng.standard_normal((count, p.dimension))
        for z in Z:
            if np.linalg.norm(z) == 0:
                continue
            c = canonical(tuple(float(v) for v in z))
            if c not in seen:
                seen.add(c)
                out.append(c)
        return tuple(out)

    def constraint_keys(self, active_only: bool) -> tuple:
        return self.active.indices if active_only else tuple(range(self.problem.m))


def as_context(p, xbar=None, **options) -> PointContext:
    if isinstance(p, PointContext):
        return p
    if xbar is None:
        raise ValueError("a point is required")
    return PointContext(p, xbar, **options)


# -- sets -------------------------------------------------------------------------


def feasible_directions(p, xbar=None, **options) -> DirectionSet:
    """``D(xbar)``: nonzero ``d`` with ``xbar + t d`` feasible for some ``t > 0``."""
    ctx = as_context(p, xbar, **options)
    S = ctx.problem.feasible_set
    if ctx.exhaustive:
        rays = {canonical(sub(x, ctx.xbar)) for x in S if x != ctx.xbar}
        return DirectionSet(FEASIBLE, tuple(sorted(rays)), True)
    keep = tuple(d for d in ctx.candidates if ctx.ray_points(d, S))
    return DirectionSet(FEASIBLE, keep, False)


def active_set(p, xbar=None, tol=None, **options) -> ActiveSet:
    if tol is not None:
        options["tol"] = tol
    return as_context(p, xbar, **options).active


def descent_set(p, xbar=None, strict: bool = True, **options) -> DirectionSet:
    """``F_1`` (``f^r < 0``) when ``strict``, else the closed version ``f^r <= 0``."""
    ctx = as_context(p, xbar, **options)
    test = ctx.negative if strict else ctx.nonpositive
    keep = tuple(d for d in ctx.candidates if test(ctx.value("f", d)))
    return DirectionSet(F1 if strict else F1_TILDE, keep, ctx.exhaustive)


def improving_set(p, xbar=None, **options) -> DirectionSet:
    """``F_0``: some admissible step along ``d`` strictly lowers ``f``."""
    ctx = as_context(p, xbar, **options)
    keep = tuple(d for d in ctx.candidates if ctx.strictly_decreases(["f"], d))
    return DirectionSet(F0, keep, ctx.exhaustive)


def g_sets(p, xbar=None, active_only: bool = False, **options) -> tuple[DirectionSet, DirectionSet, DirectionSet]:
    """``(G0, G1, G1~)`` over all constraints, or their active-constraint variants."""
    ctx = as_context(p, xbar, **options)
    keys = ctx.constraint_keys(active_only)
    k0, k1, kt = (G0A, G1A, G1A_TILDE) if active_only else (G0, G1, G1_TILDE)
    cands = ctx.candidates
    if not keys:
        # empty conjunction
        return tuple(DirectionSet(k, cands, ctx.exhaustive) for k in (k0, k1, kt))
    s0 = tuple(d for d in cands if ctx.strictly_decreases(keys, d))
    s1 = tuple(d for d in cands if all(ctx.negative(ctx.value(i, d)) for i in keys))
    st = tuple(d for d in cands if all(ctx.nonpositive(ctx.value(i, d)) for i in keys))
    return (DirectionSet(k0, s0, ctx.exhaustive), DirectionSet(k1, s1, ctx.exhaustive),
            DirectionSet(kt, st, ctx.exhaustive))


def all_sets(p, xbar=None, **options) -> dict:
    ctx = as_context(p, xbar, **options)
    out = {FEASIBLE: feasible_directions(ctx), F0: improving_set(ctx),
           F1: descent_set(ctx, strict=True), F1_TILDE: descent_set(ctx, strict=False)}
    for s in g_sets(ctx, active_only=False) + g_sets(ctx, active_only=True):
        out[s.kind] = s
    return out


# -- assumptions and relations -----------------------------------------------------


def _first_outside(a: DirectionSet, b: DirectionSet):
    inside = set(b.directions)
    return next((d for d in a.directions if d not in inside), None)


_STATEMENTS = {
    "A1": "G1 is contained in G0",
    "A2": "D is contained in G1~",
    "A3": "G1a is contained in G0a",
}


def check_assumption(p, xbar=None, which: str = "A2", **options) -> AssumptionResult:
    """Verify one qualification assumption: exhaustively on finite sets, by sampling otherwise."""
    if which not in ASSUMPTIONS:
        raise ValueError(f"unknown assumption {which!r}")
    ctx = as_context(p, xbar, **options)
    statement = _STATEMENTS[which]
    keys = ctx.constraint_keys(which == "A3")
    if not keys:
        return AssumptionResult(which, HOLDS, None, True, statement)
    if which == "A1":
        s0, s1, _ = g_sets(ctx, active_only=False)
        witness = _first_outside(s1, s0)
    elif which == "A2":
        _, _, st = g_sets(ctx, active_only=False)
        witness = _first_outside(feasible_directions(ctx), st)
    else:
        s0, s1, _ = g_sets(ctx, active_only=True)
        witness = _first_outside(s1, s0)
    if witness is not None:
        return AssumptionResult(which, FAILS, witness, ctx.exhaustive, statement)
    return AssumptionResult(which, HOLDS if ctx.exhaustive else INCONCLUSIVE, None, ctx.exhaustive, statement)


def relation_suite(p, xbar=None, **options) -> list[RelationCheck]:
    """Check the stated inclusions and equalities between the constructed sets."""
    ctx = as_context(p, xbar, **options)
    sets = all_sets(ctx)
    assumptions = {a: check_assumption(ctx, which=a) for a in ASSUMPTIONS}
    D = sets[FEASIBLE]

    def sub_check(name, a, b, requires=None):
        if requires and assumptions[requires].status == FAILS:
            return RelationCheck(name, "skipped", None, requires)
        w = _first_outside(a, b)
        return RelationCheck(name, "holds" if w is None else "violated", w, requires)

    def eq_check(name, a, b, requires=None):
        r1, r2 = sub_check(name, a, b, requires), sub_check(name, b, a, requires)
        return r1 if r1.status != "holds" else r2

    return [
        eq_check("F0 = F1", sets[F0], sets[F1]),
        sub_check("F1 <= F1~", sets[F1], sets[F1_TILDE]),
        sub_check("G0 <= G1", sets[G0], sets[G1]),
        sub_check("G0 <= D", sets[G0], D),
        sub_check("G1 <= G1~", sets[G1], sets[G1_TILDE]),
        eq_check("G0 = G1", sets[G0], sets[G1], "A1"),
        eq_check("G0a = G1a", sets[G0A], sets[G1A], "A3"),
        sub_check("G1a <= D", sets[G1A], D, "A3"),
        sub_check("D <= G1a~", D, sets[G1A_TILDE]),
        sub_check("G1a <= G1a~", sets[G1A], sets[G1A_TILDE]),
    ]


__all__ = [
    "ActiveSet",
    "AssumptionResult",
    "DirectionSet",
    "PointContext",
    "RelationCheck",
    "active_set",
    "all_sets",
    "as_context",
    "canonical",
    "check_assumption",
    "descent_set",
    "feasible_directions",
    "g_sets",
    "improving_set",
    "relation_suite",
]
