"""Optimality certificates built from radial gradients.

A radial gradient of ``f`` at ``xbar`` is the vector of restricted radial
epiderivatives along an ordered basis of feasible directions.  Stacking the
gradients of ``f, g_1, ..., g_m`` gives a small matrix ``A`` (one row per
function, one column per basis direction).  The multiplier conditions are
then linear feasibility problems in the entries of ``A`` and are decided
exactly with :func:`radialopt.lp.linprog_exact`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import cones
from ._rational import as_fraction, fmt, rank
from .cones import FAILS, HOLDS, PointContext, as_context
from .epiderivative import EpiderivativeError, EpiderivativeValue
from .lp import INFEASIBLE, OPTIMAL, linprog_exact

FJ_NECESSARY = "FJ-necessary"
KKT_NECESSARY = "KKT-necessary"
KKT_SUFFICIENT = "KKT-sufficient"
KKT_SUFFICIENT_ACTIVE = "KKT-sufficient-active"
GLOBAL_MIN_GEOMETRIC = "global-min-geometric"

CERTIFIED = "certified"
REFUTED = "refuted"
INCONCLUSIVE = "inconclusive"

ALL_CONSTRAINTS = "all"
ACTIVE_ONLY = "active"

SAMPLED_BASES = 16
BASIS_CAP = 4096


class InternalSolverError(RuntimeError):
    """Neither alternative system solved: a bug in the LP layer, never a property of the data."""


@dataclass(frozen=True)
class RadialGradient:
    label: str
    basis: tuple
    values: tuple  # EpiderivativeValue per basis direction

    @property
    def exact(self) -> bool:
        return all(v.exact for v in self.values)

    def row(self) -> tuple:
        return tuple(as_fraction(v.value) for v in self.values)

    def to_dict(self) -> dict:
        return {"function": self.label, "values": [fmt(v.value) for v in self.values],
                "methods": [v.method for v in self.values]}


@dataclass(frozen=True)
class AlternativeMatrix:
    """Rows are radial gradients (``f`` first, then the constraints used)."""

    rows: tuple
    labels: tuple = ()
    exact: bool = True

    def __post_init__(self):
        if not self.rows:
            raise ValueError("alternative matrix needs at least one row")
        widths = {len(r) for r in self.rows}
        if len(widths) != 1:
            raise ValueError("ragged alternative matrix")

    @classmethod
    def of(cls, rows, labels=(), exact=True) -> "AlternativeMatrix":
        return cls(tuple(tuple(as_fraction(v) for v in r) for r in rows), tuple(labels), exact)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.rows[0])

    def to_dict(self) -> dict:
        return {"labels": list(self.labels), "rows": [[fmt(v) for v in r] for r in self.rows], "exact": self.exact}


@dataclass(frozen=True)
class GordanResult:
    """``system == 1``: ``x >= 0`` with ``A x < 0``.  ``system == 2``: ``v >= 0, v != 0`` with ``A^T v >= 0``."""

    system: int
    solution: tuple
    product: tuple

    def to_dict(self) -> dict:
        return {"system": self.system, "solution": [fmt(v) for v in self.solution],
                "product": [fmt(v) for v in self.product]}


@dataclass(frozen=True)
class Certificate:
    kind: str
    status: str
    multipliers: tuple | None = None
    witness: tuple | None = None
    assumptions: tuple = ()
    exact: bool = True
    conditions_met: bool | None = None
    details: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.status == CERTIFIED

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "status": self.status, "exact": self.exact}
        if self.multipliers is not None:
            out["multipliers"] = [fmt(v) for v in self.multipliers]
        if self.witness is not None:
            out["witness"] = [fmt(v) for v in self.witness]
        if self.assumptions:
            out["assumptions"] = [a.to_dict() for a in self.assumptions]
        if self.conditions_met is not None:
            out["conditions_met"] = self.conditions_met
        if self.details:
            out["details"] = self.details
        return out


# -- theorem of the alternative ----------------------------------------------------


def _matvec(rows, x):
    return tuple(sum((a * b for a, b in zip(r, x)), Fraction(0)) for r in rows)


def _tmatvec(rows, v):
    k = len(rows[0])
    return tuple(sum((rows[i][j] * v[i] for i in range(len(rows))), Fraction(0)) for j in range(k))


def gordan_alternative(A) -> GordanResult:
    """Decide which of the two alternative systems is solvable, exactly.

    System 1 is found by maximizing a margin ``s`` subject to
    ``A x <= -s``, ``x >= 0``, ``sum x = 1`` (solvable iff the optimal
    ``s`` is positive); System 2 as the feasibility of ``A^T v >= 0``,
    ``v >= 0``, ``sum v = 1``.
    """
    if not isinstance(A, AlternativeMatrix):
        A = AlternativeMatrix.of(A)
    rows = A.rows
    r, k = A.shape
    if k == 0:
        # no columns: A^T v >= 0 holds vacuously
        v = (Fraction(1),) + (Fraction(0),) * (r - 1)
        return GordanResult(2, v, ())
    # variables: x_1..x_k, s_plus, s_minus
    c = [0] * k + [1, -1]
    A_ub = [list(row) + [1, -1] for row in rows]
    b_ub = [0] * r
    res = linprog_exact(c, A_ub, b_ub, [[1] * k + [0, 0]], [1])
    if res.status == OPTIMAL and res.objective > 0:
        x = res.x[:k]
        return GordanResult(1, x, _matvec(rows, x))
    # System 2: -A^T v <= 0
    A_ub2 = [[-rows[i][j] for i in range(r)] for j in range(k)]
    res2 = linprog_exact([0] * r, A_ub2, [0] * k, [[1] * r], [1])
    if res2.status != OPTIMAL:
        raise InternalSolverError("neither alternative system solved")
    v = res2.x
    return GordanResult(2, v, _tmatvec(rows, v))


# -- bases --------------------------------------------------------------------------


def basis_select(D) -> tuple:
    """Greedy maximal linearly independent subset of the generators, in their stored order."""
    dirs = tuple(D)
    if not dirs:
        raise ValueError("cannot select a basis from an empty direction set")
    basis: list = []
    for d in dirs:
        if rank(basis + [d]) > len(basis):
            basis.append(d)
    return tuple(basis)


def all_bases(D, cap: int = BASIS_CAP):
    """Every maximal independent subset of the generators (lexicographic), up to ``cap``."""
    dirs = tuple(D)
    k = rank(dirs)
    out = []
    for combo in itertools.combinations(dirs, k):
        if rank(combo) == k:
            out.append(combo)
            if len(out) >= cap:
                return out, False
    return out, True


def sampled_bases(D, count: int = SAMPLED_BASES, seed: int = 0) -> list:
    dirs = tuple(D)
    k = rank(dirs)
    first = basis_select(dirs)
    out = [first]
    if len(dirs) <= k:
        return out
    rng = np.random.default_rng(seed)
    tries = 0
    while len(out) < count + 1 and tries < 50 * count:
        tries += 1
        idx = sorted(rng.choice(len(dirs), size=k, replace=False))
        combo = tuple(dirs[i] for i in idx)
        if rank(combo) == k and combo not in out:
            out.append(combo)
    return out


# -- radial gradients ----------------------------------------------------------------


def radial_gradient(ctx: PointContext, key, basis: Sequence) -> RadialGradient:
    vals = []
    for d in basis:
        v = ctx.value(key, d)
        if v is None:
            raise EpiderivativeError(f"epiderivative of {_label(key)} is +inf along {d}")
        vals.append(v)
    return RadialGradient(_label(key), tuple(basis), tuple(vals))


def _label(key) -> str:
    return "f" if key == "f" else f"g{key + 1}"


def alternative_matrix(ctx: PointContext, basis: Sequence, keys: Sequence) -> tuple[AlternativeMatrix, list]:
    grads = [radial_gradient(ctx, "f", basis)] + [radial_gradient(ctx, i, basis) for i in keys]
    A = AlternativeMatrix(tuple(g.row() for g in grads), tuple(g.label for g in grads),
                          all(g.exact for g in grads))
    return A, grads


def _basis_dict(basis) -> list:
    return [[fmt(v) for v in d] for d in basis]


def _descent_witness(ctx: PointContext, basis, x=None):
    """A basis direction with negative objective epiderivative (the most negative one)."""
    best = None
    for j, d in enumerate(basis):
        if x is not None and x[j] <= 0:
            continue
        v = ctx.value("f", d)
        if v is not None and v.value < 0 and (best is None or v.value < best[0]):
            best = (v.value, d)
    return None if best is None else best[1]


# -- necessity -----------------------------------------------------------------------------


def _resolve_basis(ctx: PointContext, basis):
    if basis is not None:
        return tuple(cones.canonical(d) for d in basis)
    D = cones.feasible_directions(ctx)
    return basis_select(D) if len(D) else ()


def check_fj_necessary(p, xbar=None, basis=None, **options) -> Certificate:
    """Fritz John system ``v0 grad f + sum v_i grad g_i >= 0`` along a basis of ``D(xbar)``.

    Certified when multipliers with ``v0 > 0`` exist.  When the only
    solutions have ``v0 = 0`` the objective still descends along some basis
    direction, so the point is refuted with that direction as witness.
    ``details["kkt_grade"]`` records whether the constraint gradients are
    linearly independent as well.
    """
    ctx = as_context(p, xbar, **options)
    basis = _resolve_basis(ctx, basis)
    keys = tuple(range(ctx.problem.m))
    details = {"basis": _basis_dict(basis), "restrict": ctx.restrict}
    if not basis:
        details["kkt_grade"] = True
        return Certificate(FJ_NECESSARY, CERTIFIED, (Fraction(1),) + (Fraction(0),) * len(keys),
                           details=details)
    try:
        A, grads = alternative_matrix(ctx, basis, keys)
    except EpiderivativeError as exc:
        details["error"] = str(exc)
        return Certificate(FJ_NECESSARY, INCONCLUSIVE, exact=False, details=details)
    details["matrix"] = A.to_dict()
    details["gradients"] = [g.to_dict() for g in grads]
    alt = gordan_alternative(A)
    details["alternative"] = alt.to_dict()

    if alt.system == 1:
        witness = _descent_witness(ctx, basis, alt.solution)
        status = REFUTED if A.exact else INCONCLUSIVE
        return Certificate(FJ_NECESSARY, status, witness=witness, exact=A.exact,
                           conditions_met=False, details=details)

    g_rows = A.rows[1:]
    res = _kkt_multipliers(A.rows[0], g_rows)
    if res is None:
        details["v0_positive"] = False
        witness = _descent_witness(ctx, basis)
        status = REFUTED if (A.exact and witness is not None) else INCONCLUSIVE
        return Certificate(FJ_NECESSARY, status, alt.solution, witness, exact=A.exact,
                           conditions_met=False, details=details)
    details["v0_positive"] = True
    details["kkt_grade"] = rank(g_rows) == len(g_rows)
    status = CERTIFIED if A.exact else INCONCLUSIVE
    return Certificate(FJ_NECESSARY, status, (Fraction(1),) + res, exact=A.exact,
                       conditions_met=True, details=details)


def _kkt_multipliers(f_row, g_rows) -> tuple | None:
    """``v >= 0`` with ``f + G^T v >= 0``, or None."""
    k = len(f_row)
    m = len(g_rows)
    if m == 0:
        return () if all(v >= 0 for v in f_row) else None
    A_ub = [[-g_rows[i][j] for i in range(m)] for j in range(k)]
    res = linprog_exact([0] * m, A_ub, list(f_row))
    return res.x if res.status == OPTIMAL else None


def check_kkt_necessary(p, xbar=None, basis=None, **options) -> Certificate:
    """FJ with ``v0 = 1``, certified only under linearly independent constraint gradients."""
    fj = check_fj_necessary(p, xbar, basis, **options)
    status = fj.status
    if status == CERTIFIED and not fj.details.get("kkt_grade", False):
        status = INCONCLUSIVE
    return Certificate(KKT_NECESSARY, status, fj.multipliers, fj.witness, fj.assumptions, fj.exact,
                       fj.conditions_met, fj.details)


# -- sufficiency ----------------------------------------------------------------------------


def sufficient_multipliers(f_row, g_rows) -> tuple | None:
    """Nonzero ``v >= 0`` with ``f + G^T v >= 0`` (normalized ``sum v <= 1``), or None.

    With no constraints the system reduces to ``f >= 0`` and the empty
    multiplier vector is returned.
    """
    k, m = len(f_row), len(g_rows)
    if m == 0:
        return () if all(v >= 0 for v in f_row) else None
    A_ub = [[-g_rows[i][j] for i in range(m)] for j in range(k)] + [[1] * m]
    b_ub = list(f_row) + [1]
    res = linprog_exact([1] * m, A_ub, b_ub)
    if res.status != OPTIMAL or res.objective <= 0:
        return None
    return res.x


def check_kkt_sufficient(p, xbar=None, mode: str = ALL_CONSTRAINTS, **options) -> Certificate:
    """Multiplier system on every basis of ``D(xbar)`` plus the matching qualification assumption.

    ``mode="all"`` uses every constraint with assumption A2; ``mode="active"``
    uses the active constraints with assumption A3.  The system solved is
    ``grad f + sum v_i grad g_i >= 0`` with ``v >= 0``, ``v != 0``.
    """
    if mode not in (ALL_CONSTRAINTS, ACTIVE_ONLY):
        raise ValueError(f"mode must be {ALL_CONSTRAINTS!r} or {ACTIVE_ONLY!r}")
    ctx = as_context(p, xbar, **options)
    kind = KKT_SUFFICIENT if mode == ALL_CONSTRAINTS else KKT_SUFFICIENT_ACTIVE
    keys = ctx.constraint_keys(mode == ACTIVE_ONLY)
    assumption = cones.check_assumption(ctx, which="A2" if mode == ALL_CONSTRAINTS else "A3")
    details = {"mode": mode, "restrict": ctx.restrict, "constraints": [_label(i) for i in keys]}
    if assumption.status == FAILS:
        return Certificate(kind, REFUTED, witness=assumption.witness, assumptions=(assumption,),
                           exact=ctx.exhaustive, conditions_met=False, details=details)

    D = cones.feasible_directions(ctx)
    if not len(D):
        details["bases_checked"] = 0
        status = CERTIFIED if assumption.status == HOLDS else INCONCLUSIVE
        return Certificate(kind, status, (), assumptions=(assumption,), conditions_met=True, details=details)

    if ctx.exhaustive:
        bases, complete = all_bases(D)
    else:
        bases, complete = sampled_bases(D, SAMPLED_BASES, ctx.cfg.seed), False
    first = None
    exact = True
    for basis in bases:
        try:
            A, grads = alternative_matrix(ctx, basis, keys)
        except EpiderivativeError as exc:
            details["error"] = str(exc)
            return Certificate(kind, INCONCLUSIVE, assumptions=(assumption,), exact=False, details=details)
        exact &= A.exact
        v = sufficient_multipliers(A.rows[0], A.rows[1:])
        if first is None:
            details["basis"] = _basis_dict(basis)
            details["matrix"] = A.to_dict()
            first = v
        if v is None:
            details["failing_basis"] = _basis_dict(basis)
            details["failing_matrix"] = A.to_dict()
            witness = _descent_witness(ctx, basis)
            status = REFUTED if (witness is not None and A.exact) else INCONCLUSIVE
            return Certificate(kind, status, None, witness, (assumption,), exact, False, details)
    details["bases_checked"] = len(bases)
    details["all_bases"] = complete
    decided = complete and exact and assumption.status == HOLDS
    return Certificate(kind, CERTIFIED if decided else INCONCLUSIVE, first, None, (assumption,), exact,
                       True, details)


# -- geometric certificate ---------------------------------------------------------------------


def certify_global_min_geometric(p, xbar=None, **options) -> Certificate:
    """No feasible direction may carry a strictly improving feasible point.

    Finite ground sets: exhaustive over the rays of ``D(xbar)`` with the
    epiderivative restricted to ``S``, which is a complete global test.
    Continuous sets: sampled, so the result is refuted (with a verified
    improving point) or inconclusive.
    """
    ctx = as_context(p, xbar, **options)
    D = cones.feasible_directions(ctx)
    details = {"directions_checked": len(D), "exhaustive": ctx.exhaustive}
    if ctx.exhaustive:
        sctx = ctx if ctx.restrict == cones.FEASIBLE_SET else PointContext(
            ctx.problem, ctx.xbar, cones.FEASIBLE_SET, ctx.cfg, ctx.tol, ctx.budget)
        best = None
        for d in D:
            v = sctx.value("f", d)
            if v is not None and v.value < 0 and (best is None or v.value < best[0].value):
                best = (v, d)
        if best is None:
            return Certificate(GLOBAL_MIN_GEOMETRIC, CERTIFIED, details=details)
        details["value"] = best[0].to_dict()
        return Certificate(GLOBAL_MIN_GEOMETRIC, REFUTED, witness=best[1], details=details)

    from .descent import scan_feasible_descent

    found = scan_feasible_descent(ctx, D.directions)
    if found is None:
        return Certificate(GLOBAL_MIN_GEOMETRIC, INCONCLUSIVE, exact=False, details=details)
    details["value"] = found.to_dict()
    return Certificate(GLOBAL_MIN_GEOMETRIC, REFUTED, witness=found.direction, exact=False, details=details)


__all__ = [
    "AlternativeMatrix",
    "Certificate",
    "GordanResult",
    "InternalSolverError",
    "RadialGradient",
    "all_bases",
    "alternative_matrix",
    "basis_select",
    "certify_global_min_geometric",
    "check_fj_necessary",
    "check_kkt_necessary",
    "check_kkt_sufficient",
    "gordan_alternative",
    "radial_gradient",
    "sampled_bases",
    "sufficient_multipliers",
]
