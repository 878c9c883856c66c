"""Command-line entry point: ``radialopt {eval,cones,certify,solve,check}``.

Every command writes one JSON report (stdout or ``--out``).  Exit codes:
0 success, 1 a certificate or run that was asked to settle a question
did not settle it, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from . import __version__
from . import certificates as cert
from . import cones
from . import descent
from . import expr as ex
from ._rational import fmt, to_number
from .epiderivative import EpiderivativeError
from .problem import InfeasiblePoint, Problem, ProblemError, load_problem, problem_to_dict

EXIT_OK = 0
EXIT_UNSETTLED = 1
EXIT_INPUT = 2

COMMANDS = ("eval", "cones", "certify", "solve", "check")


class InputError(ValueError):
    pass


def parse_vector(text: str) -> tuple:
    try:
        return tuple(to_number(s) for s in text.split(","))
    except (ValueError, ZeroDivisionError, TypeError):
        raise InputError(f"cannot parse vector {text!r}; expected comma-separated numbers like 1,-1/2,0.25") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--problem", required=True,
                        help="problem file path, or a bundled example name (ex1, ex2)")
    common.add_argument("--point", action="append", default=None,
                        help="point as comma-separated numbers; repeatable (default: the problem's points)")
    common.add_argument("--restrict", choices=cones.RESTRICTIONS, default=cones.AUTO,
                        help="restrict epiderivative rays to the ground set or the feasible set (default: auto)")
    common.add_argument("--tol", type=float, default=None,
                        help="active-constraint tolerance (default: 0 for exact points, 1e-9 for float points)")
    common.add_argument("--seed", type=int, default=None, help="seed for sampling (default: problem config, 0)")
    common.add_argument("--budget", type=int, default=None,
                        help="sampled direction count on continuous domains (default: 64 for n<=3, 256n)")
    common.add_argument("--out", default=None, help="write the report here instead of stdout")

    parser = argparse.ArgumentParser(prog="radialopt", description="Radial-epiderivative optimality toolkit.")
    parser.add_argument("--version", action="version", version=f"radialopt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", parents=[common], help="radial epiderivatives of f and g_i")
    p_eval.add_argument("--direction", action="append", default=None,
                        help="direction, repeatable (default: the problem's directions, else D(x))")
    sub.add_parser("cones", parents=[common], help="direction sets D, F and G at a point")
    p_cert = sub.add_parser("certify", parents=[common], help="optimality certificates")
    p_cert.add_argument("--mode", choices=(cert.ACTIVE_ONLY, cert.ALL_CONSTRAINTS), default=cert.ALL_CONSTRAINTS,
                        help="constraints used by the sufficiency check (default: all)")
    p_solve = sub.add_parser("solve", parents=[common], help="global descent from a start point")
    p_solve.add_argument("--start", default=None, help="start point (alias of --point)")
    p_solve.add_argument("--max-iter", type=int, default=None,
                         help="step limit (default: |S| on finite sets, 100 otherwise)")
    sub.add_parser("check", parents=[common], help="assumption and set-relation suites")
    return parser


# -- commands -----------------------------------------------------------------------


def _points(args, problem: Problem) -> list:
    raw = list(args.point or [])
    if getattr(args, "start", None):
        raw.insert(0, args.start)
    pts = [parse_vector(s) for s in raw] or list(problem.points)
    if not pts:
        raise InputError("no point given and the problem lists none; use --point")
    for x in pts:
        if len(x) != problem.dimension:
            raise InputError(f"point {','.join(map(fmt, x))} has {len(x)} coordinates, expected {problem.dimension}")
    return pts


def _context(args, problem, x) -> cones.PointContext:
    return cones.PointContext(problem, x, restrict=args.restrict, tol=args.tol, budget=args.budget)


def _value_dict(v) -> dict:
    if v is None:
        return {"value": "inf", "method": "undefined-along-ray"}
    return v.to_dict()


def cmd_eval(args, problem) -> tuple[dict, int]:
    results = []
    for x in _points(args, problem):
        ctx = _context(args, problem, x)
        if args.direction:
            dirs = [parse_vector(s) for s in args.direction]
        elif problem.directions:
            dirs = list(problem.directions)
        else:
            dirs = list(cones.feasible_directions(ctx))
        for d in dirs:
            if len(d) != problem.dimension:
                raise InputError(f"direction has {len(d)} coordinates, expected {problem.dimension}")
            if all(v == 0 for v in d):
                raise InputError("direction must be nonzero")
            values = {"f": _value_dict(ctx.value("f", d))}
            for i in range(problem.m):
                values[f"g{i + 1}"] = _value_dict(ctx.value(i, d))
            results.append({"point": [fmt(v) for v in x], "direction": [fmt(v) for v in d],
                            "restrict": ctx.restrict, "values": values})
    return {"evaluations": results}, EXIT_OK


def cmd_cones(args, problem) -> tuple[dict, int]:
    out = []
    for x in _points(args, problem):
        ctx = _context(args, problem, x)
        sets = cones.all_sets(ctx)
        out.append({
            "point": [fmt(v) for v in x],
            "restrict": ctx.restrict,
            "active_set": ctx.active.to_dict(),
            "candidates": len(ctx.candidates),
            "sets": {k: s.to_dict() for k, s in sets.items()},
        })
    return {"points": out}, EXIT_OK


def cmd_certify(args, problem) -> tuple[dict, int]:
    out = []
    code = EXIT_OK
    for x in _points(args, problem):
        ctx = _context(args, problem, x)
        geo = cert.certify_global_min_geometric(ctx)
        out.append({
            "point": [fmt(v) for v in x],
            "global_min": geo.to_dict(),
            "fritz_john": cert.check_fj_necessary(ctx).to_dict(),
            "kkt_necessary": cert.check_kkt_necessary(ctx).to_dict(),
            "kkt_sufficient": cert.check_kkt_sufficient(ctx, mode=args.mode).to_dict(),
        })
        if not geo.certified:
            code = EXIT_UNSETTLED
    return {"certificates": out}, code


def cmd_solve(args, problem) -> tuple[dict, int]:
    x0 = _points(args, problem)[0]
    opts = {"tol": args.tol}
    if args.restrict != cones.AUTO:
        opts["restrict"] = args.restrict
    traj = descent.solve(problem, x0, budget=args.budget, max_iter=args.max_iter, **opts)
    code = EXIT_OK if traj.status == descent.CONVERGED else EXIT_UNSETTLED
    return {"start": [fmt(v) for v in x0], "trajectory": traj.to_dict()}, code


def cmd_check(args, problem) -> tuple[dict, int]:
    out = []
    code = EXIT_OK
    for x in _points(args, problem):
        ctx = _context(args, problem, x)
        assumptions = [cones.check_assumption(ctx, which=a).to_dict() for a in cones.ASSUMPTIONS]
        relations = cones.relation_suite(ctx)
        if ctx.exhaustive and any(r.status == "violated" for r in relations):
            code = EXIT_UNSETTLED
        out.append({"point": [fmt(v) for v in x], "restrict": ctx.restrict, "exhaustive": ctx.exhaustive,
                    "assumptions": assumptions, "relations": [r.to_dict() for r in relations]})
    return {"points": out}, code


HANDLERS = {"eval": cmd_eval, "cones": cmd_cones, "certify": cmd_certify, "solve": cmd_solve, "check": cmd_check}


# -- report plumbing -------------------------------------------------------------------


def _inputs(args) -> dict:
    keys = ("problem", "point", "direction", "start", "mode", "restrict", "tol", "seed", "budget", "max_iter")
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


def render(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_atomic(path: str, text: str) -> None:
    target = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent or Path("."))
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(argv=None) -> tuple[dict, int]:
    """Parse ``argv``, execute the command and return ``(report, exit_code)``."""
    return execute(build_parser().parse_args(argv))


def execute(args: argparse.Namespace) -> tuple[dict, int]:
    report = {"tool": "radialopt", "version": __version__, "command": args.command, "inputs": _inputs(args),
              "errors": []}
    try:
        problem = load_problem(args.problem)
        if args.seed is not None:
            if args.seed < 0:
                raise InputError("seed must be nonnegative")
            problem = problem.with_config(seed=args.seed)
        report["problem"] = problem_to_dict(problem)
        report["config"] = problem.config.to_dict()
        report["seed"] = problem.config.seed
        results, code = HANDLERS[args.command](args, problem)
        report["results"] = results
    except (ProblemError, InputError, InfeasiblePoint, ex.DimensionError, FileNotFoundError) as exc:
        report["errors"].append({"type": type(exc).__name__, "message": str(exc)})
        code = EXIT_INPUT
    except (EpiderivativeError, descent.StepFailed) as exc:
        report["errors"].append({"type": type(exc).__name__, "message": str(exc)})
        code = EXIT_UNSETTLED
    report["exit_code"] = code
    return report, code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    report, code = execute(args)
    text = render(report)
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    if report["errors"]:
        for err in report["errors"]:
            print(f"radialopt: {err['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
