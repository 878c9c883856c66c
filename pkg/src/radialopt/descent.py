"""Global descent: find a feasible direction with a negative restricted
epiderivative, jump to the best point on that ray, repeat.

Because the radial epiderivative is an infimum over *all* step lengths,
a negative value promises a better feasible point somewhere on the ray,
not just nearby.  This lets the loop leave local minima that are not
global.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import cones
from . import expr as ex
from ._rational import fmt
from .certificates import Certificate, certify_global_min_geometric
from .cones import FEASIBLE_SET, PointContext, as_context
from .epiderivative import ENUMERATION, ESTIMATOR, EpiderivativeValue, FiniteSet, admissible_ts
from .problem import Problem

log = logging.getLogger(__name__)

DEFAULT_DIRECTION_BUDGET = 512
DEFAULT_CONTINUOUS_ITERATIONS = 100

CONVERGED = "converged"
BUDGET_EXHAUSTED = "budget-exhausted"
STEP_FAILED = "step-failed"


class StepFailed(RuntimeError):
    """No strictly better feasible point was found on the ray."""


@dataclass(frozen=True)
class DescentDirection:
    direction: tuple
    value: EpiderivativeValue
    t: object
    point: tuple
    f_value: object

    def to_dict(self) -> dict:
        return {
            "direction": [fmt(v) for v in self.direction],
            "epiderivative": self.value.to_dict(),
            "t": fmt(self.t),
            "point": [fmt(v) for v in self.point],
            "f": fmt(self.f_value),
        }


def _ray_candidates(ctx: PointContext, d) -> list:
    """``(t, point, f(point))`` for every probed feasible point on the ray."""
    S = ctx.problem.feasible_set
    f = ctx.problem.objective
    if isinstance(S, FiniteSet):
        return [(t, p, ex.evaluate(f, p)) for t, p in S.ray_points(ctx.xbar, d)]
    x0 = np.array([float(v) for v in ctx.xbar])
    dv = np.array([float(v) for v in d])
    ts = admissible_ts(x0, dv, S, ctx.cfg)
    if ts.size == 0:
        return []
    P = x0[None, :] + ts[:, None] * dv[None, :]
    vals = ex.batch_function(f)(P)
    return [(float(t), tuple(float(v) for v in p), float(val)) for t, p, val in zip(ts, P, vals)]


def _improves(value, base) -> bool:
    if isinstance(value, float) or isinstance(base, float):
        value, base = float(value), float(base)
        return value < base - cones.FLOAT_SIGN_TOL * (1 + abs(value) + abs(base))
    return value < base


def best_on_ray(ctx: PointContext, d):
    """Feasible point of least ``f`` on the ray (smallest ``t`` among ties), or None."""
    best = None
    for t, p, val in _ray_candidates(ctx, d):
        if best is None or val < best[2]:
            best = (t, p, val)
    return best


def scan_feasible_descent(ctx: PointContext, directions: Sequence) -> DescentDirection | None:
    """Most negative restricted epiderivative among directions that have an improving feasible point."""
    f0 = ctx.base_values["f"]
    best = None
    for d in directions:
        cands = _ray_candidates(ctx, d)
        if not cands:
            continue
        quotients = [(val - f0) / t for t, _, val in cands]
        j = int(np.argmin([float(q) for q in quotients]))
        q = quotients[j]
        if not _improves(cands[j][2], f0):
            continue
        if best is None or q < best[0]:
            best = (q, d, cands)
    if best is None:
        return None
    q, d, cands = best
    t, p, val = min(cands, key=lambda c: c[2])
    method = ENUMERATION if ctx.exhaustive else ESTIMATOR
    value = EpiderivativeValue(q, method, None, {"points_on_ray": len(cands)})
    return DescentDirection(d, value, t, p, val)


def find_descent_direction(p, xbar=None, budget: int | None = None, **options) -> DescentDirection | None:
    """Exhaustive on finite ground sets; otherwise ``budget`` sampled rays (default 512)."""
    if isinstance(p, Problem) and not p.is_finite and budget is None:
        budget = DEFAULT_DIRECTION_BUDGET
    if budget is not None and not isinstance(p, PointContext):
        options["budget"] = budget
    ctx = as_context(p, xbar, **options)
    if ctx.exhaustive:
        dirs = cones.feasible_directions(ctx).directions
    else:
        dirs = ctx.candidates
    return scan_feasible_descent(ctx, dirs)


def step(p, xbar=None, d=None, **options) -> tuple:
    """Best feasible point on the ray from ``xbar`` along ``d``; must strictly improve ``f``."""
    ctx = as_context(p, xbar, **options)
    if d is None:
        raise ValueError("a direction is required")
    d = cones.canonical(d)
    best = best_on_ray(ctx, d)
    if best is None or not _improves(best[2], ctx.base_values["f"]):
        raise StepFailed(f"no strictly better feasible point along {tuple(fmt(v) for v in d)}")
    return best[1]


@dataclass
class Trajectory:
    points: list
    values: list
    directions: list = field(default_factory=list)
    status: str = CONVERGED
    certificate: Certificate | None = None

    @property
    def steps(self) -> int:
        return len(self.directions)

    def to_dict(self) -> dict:
        out = {
            "status": self.status,
            "steps": self.steps,
            "points": [[fmt(v) for v in x] for x in self.points],
            "f": [fmt(v) for v in self.values],
            "directions": [d.to_dict() for d in self.directions],
        }
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_dict()
        return out


def solve(p: Problem, x0: Sequence, budget: int | None = None, max_iter: int | None = None,
          **options) -> Trajectory:
    """Alternate :func:`find_descent_direction` and :func:`step` until no descent direction remains.

    On finite ground sets the loop stops after at most ``|S|`` steps and the
    final point is certified by exhaustive enumeration.
    """
    x = ex._coerce_point(x0)
    p.require_feasible(x)
    if max_iter is None:
        max_iter = len(p.feasible_set) if p.is_finite else DEFAULT_CONTINUOUS_ITERATIONS
    traj = Trajectory([x], [ex.evaluate(p.objective, x)])
    status = BUDGET_EXHAUSTED
    for _ in range(max_iter + 1):
        ctx = PointContext(p, x, budget=None if p.is_finite else (budget or DEFAULT_DIRECTION_BUDGET), **options)
        found = find_descent_direction(ctx)
        if found is None:
            status = CONVERGED
            break
        if traj.steps >= max_iter:
            break
        try:
            x = step(ctx, d=found.direction)
        except StepFailed:
            status = STEP_FAILED
            break
        traj.directions.append(found)
        traj.points.append(x)
        traj.values.append(ex.evaluate(p.objective, x))
        log.debug("descent step to %s, f=%s", x, traj.values[-1])
    traj.status = status
    final_opts = {k: v for k, v in options.items() if k != "restrict"}
    traj.certificate = certify_global_min_geometric(p, x, restrict=FEASIBLE_SET if p.is_finite else cones.AUTO,
                                                    **final_opts)
    return traj


__all__ = [
    "BUDGET_EXHAUSTED",
    "CONVERGED",
    "DescentDirection",
    "STEP_FAILED",
    "StepFailed",
    "Trajectory",
    "best_on_ray",
    "find_descent_direction",
    "scan_feasible_descent",
    "solve",
    "step",
]
