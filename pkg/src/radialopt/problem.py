"""Problem model ``min f(x) s.t. g_i(x) <= 0, x in X`` and its JSON file format."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Sequence

import jsonschema

from . import expr as ex
from ._rational import Number, fmt, is_exact, to_number, vec
from .epiderivative import AllSpace, Box, Domain, EstimatorConfig, FiniteSet, Region

FLOAT_TOL = 1e-9

FIXTURES = ("ex1", "ex2")


class ProblemError(ValueError):
    """Problem file failed validation; ``path`` locates the offending entry."""

    def __init__(self, message: str, path: str = "$", line: int | None = None):
        where = path if line is None else f"line {line}, {path}"
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line


class InfeasiblePoint(ValueError):
    pass


@dataclass(frozen=True)
class Problem:
    objective: ex.Expression
    dimension: int
    constraints: tuple = ()
    domain: Domain = field(default_factory=AllSpace)
    variables: tuple = ()
    name: str = ""
    points: tuple = ()
    directions: tuple = ()
    estimator_overrides: tuple = ()

    def __post_init__(self):
        for e in (self.objective, *self.constraints):
            ex.check_dimension(e, self.dimension)

    @property
    def m(self) -> int:
        return len(self.constraints)

    @property
    def config(self) -> EstimatorConfig:
        return EstimatorConfig(**dict(self.estimator_overrides))

    def with_config(self, **overrides) -> "Problem":
        merged = dict(self.estimator_overrides)
        merged.update(overrides)
        return Problem(self.objective, self.dimension, self.constraints, self.domain, self.variables,
                       self.name, self.points, self.directions, tuple(sorted(merged.items())))

    def constraint_values(self, x: Sequence) -> list[Number]:
        return [ex.evaluate(g, x) for g in self.constraints]

    def tolerance_for(self, x: Sequence) -> Number:
        return Fraction(0) if is_exact(x) else FLOAT_TOL

    def is_feasible(self, x: Sequence, tol=None) -> bool:
        x = ex._coerce_point(x)
        if len(x) != self.dimension:
            raise ex.DimensionError(f"point has {len(x)} coordinates, expected {self.dimension}")
        tol = self.tolerance_for(x) if tol is None else tol
        if not self.domain.contains(x):
            return False
        return all(v <= tol for v in self.constraint_values(x))

    def require_feasible(self, x: Sequence) -> None:
        if not self.is_feasible(x):
            raise InfeasiblePoint(f"point {tuple(fmt(v) for v in x)} is not feasible")

    @cached_property
    def feasible_set(self) -> Domain:
        """``S`` as a finite point set (finite ground set) or a constraint-filtered region."""
        if isinstance(self.domain, FiniteSet):
            pts = [p for p in self.domain if all(v <= 0 for v in self.constraint_values(p))]
            if not pts:
                raise InfeasiblePoint("feasible set is empty")
            return FiniteSet(pts)
        if not self.constraints:
            return self.domain
        return Region(self.domain, self.constraints, FLOAT_TOL)

    @property
    def is_finite(self) -> bool:
        return isinstance(self.domain, FiniteSet)


# -- file format ----------------------------------------------------------------


def _schema() -> dict:
    text = resources.files("radialopt").joinpath("schemas/problem.schema.json").read_text("utf-8")
    return json.loads(text)


def _json_path(parts) -> str:
    out = "$"
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def _vector(data, n: int, path: str) -> tuple:
    if len(data) != n:
        raise ProblemError(f"expected {n} entries, got {len(data)}", path)
    try:
        return vec(data)
    except (ValueError, ZeroDivisionError) as exc:
        raise ProblemError(str(exc), path) from None


def problem_from_dict(data: dict) -> Problem:
    validator = jsonschema.Draft202012Validator(_schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        raise ProblemError(err.message, _json_path(err.absolute_path))

    n = data["dimension"]
    variables = tuple(data.get("variables", ()))
    if variables and len(variables) != n:
        raise ProblemError(f"{len(variables)} variable names for dimension {n}", "$.variables")

    def parse_expr(obj, path):
        try:
            e = ex.from_dict(obj, path)
            ex.check_dimension(e, n)
        except ex.ExpressionSyntaxError as exc:
            raise ProblemError(str(exc).split(": ", 1)[-1], exc.path) from None
        except ex.DimensionError as exc:
            raise ProblemError(str(exc), path) from None
        return e

    objective = parse_expr(data["objective"], "$.objective")
    constraints = tuple(parse_expr(g, f"$.constraints[{i}]") for i, g in enumerate(data.get("constraints", [])))

    dom = data["domain"]
    kind = dom["kind"]
    if kind == "all":
        domain: Domain = AllSpace()
    elif kind == "box":
        for side in ("lower", "upper"):
            if len(dom[side]) != n:
                raise ProblemError(f"expected {n} bounds, got {len(dom[side])}", f"$.domain.{side}")
        try:
            domain = Box.of(dom["lower"], dom["upper"])
        except ValueError as exc:
            raise ProblemError(str(exc), "$.domain") from None
    else:
        pts = [_vector(p, n, f"$.domain.points[{i}]") for i, p in enumerate(dom["points"])]
        domain = FiniteSet(pts)

    points = tuple(_vector(p, n, f"$.points[{i}]") for i, p in enumerate(data.get("points", [])))
    directions = tuple(_vector(d, n, f"$.directions[{i}]") for i, d in enumerate(data.get("directions", [])))
    for i, d in enumerate(directions):
        if all(v == 0 for v in d):
            raise ProblemError("direction must be nonzero", f"$.directions[{i}]")
    overrides = tuple(sorted(data.get("estimator", {}).items()))
    try:
        EstimatorConfig(**dict(overrides))
    except ValueError as exc:
        raise ProblemError(str(exc), "$.estimator") from None
    return Problem(objective, n, constraints, domain, variables, data.get("name", ""), points, directions, overrides)


def parse_problem(text: str) -> Problem:
    """Parse and validate a UTF-8 JSON problem file."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemError(exc.msg, "$", exc.lineno) from None
    if not isinstance(data, dict):
        raise ProblemError("problem file must contain a JSON object")
    return problem_from_dict(data)


def problem_to_dict(p: Problem) -> dict:
    out: dict = {}
    if p.name:
        out["name"] = p.name
    out["dimension"] = p.dimension
    if p.variables:
        out["variables"] = list(p.variables)
    out["objective"] = ex.to_dict(p.objective)
    out["constraints"] = [ex.to_dict(g) for g in p.constraints]
    out["domain"] = p.domain.to_dict()
    if p.points:
        out["points"] = [[fmt(v) for v in x] for x in p.points]
    if p.directions:
        out["directions"] = [[fmt(v) for v in d] for d in p.directions]
    if p.estimator_overrides:
        out["estimator"] = dict(p.estimator_overrides)
    return out


def dump_problem(p: Problem) -> str:
    return json.dumps(problem_to_dict(p), indent=2, sort_keys=False) + "\n"


def load_problem(ref: str | Path) -> Problem:
    """Load a problem from a path, or a bundled fixture by name (``ex1``, ``ex2``)."""
    path = Path(ref)
    if not path.exists() and str(ref) in FIXTURES:
        text = resources.files("radialopt").joinpath(f"fixtures/{ref}.json").read_text("utf-8")
        return parse_problem(text)
    return parse_problem(path.read_text("utf-8"))
