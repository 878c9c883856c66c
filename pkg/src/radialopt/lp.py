"""Exact rational linear programming.

A dense two-phase tableau simplex over :class:`fractions.Fraction` with
Bland's anti-cycling rule.  The systems solved in this package are tiny
(a handful of rows and columns), so clarity beats speed here.

Problem form::

    maximize    c . x
    subject to  A_ub x <= b_ub
                A_eq x == b_eq
                x >= 0
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ._rational import as_fraction

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPResult:
    status: str
    x: tuple[Fraction, ...] | None = None
    objective: Fraction | None = None


def _pivot(T: list[list[Fraction]], basis: list[int], r: int, c: int) -> None:
    piv = T[r][c]
    T[r] = [v / piv for v in T[r]]
    for i, row in enumerate(T):
        if i != r and row[c] != 0:
            f = row[c]
            T[i] = [a - f * b for a, b in zip(row, T[r])]
    basis[r] = c


def _simplex(T, basis, obj_row: int, allowed: int) -> str:
    """Run primal simplex on tableau ``T`` (maximization).

    ``T[obj_row]`` holds reduced costs as ``-c``; the rhs is the last
    column.  Only the first ``allowed`` columns may enter the basis.
    """
    m = len(basis)
    while True:
        enter = next((j for j in range(allowed) if T[obj_row][j] < 0), None)
        if enter is None:
            return OPTIMAL
        best = None
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][-1] / a
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            return UNBOUNDED
        _pivot(T, basis, best[1], enter)


def linprog_exact(
    c: Sequence,
    A_ub: Sequence[Sequence] = (),
    b_ub: Sequence = (),
    A_eq: Sequence[Sequence] = (),
    b_eq: Sequence = (),
) -> LPResult:
    """Maximize ``c.x`` over the polyhedron above, exactly."""
    n = len(c)
    c = [as_fraction(v) for v in c]
    rows: list[tuple[list[Fraction], Fraction, bool]] = []
    for a, b in zip(A_ub, b_ub):
        rows.append(([as_fraction(v) for v in a], as_fraction(b), True))
    for a, b in zip(A_eq, b_eq):
        rows.append(([as_fraction(v) for v in a], as_fraction(b), False))
    m = len(rows)
    n_slack = sum(1 for _, _, ub in rows if ub)
    n_art = m
    width = n + n_slack + n_art + 1
    T: list[list[Fraction]] = []
    basis: list[int] = []
    slack = n
    for i, (a, b, ub) in enumerate(rows):
        row = a + [Fraction(0)] * (width - n)
        if ub:
            row[slack] = Fraction(1)
            slack += 1
        row[-1] = b
        if b < 0:
            row = [-v for v in row]
        row[n + n_slack + i] = Fraction(1)
        T.append(row)
        basis.append(n + n_slack + i)

    # phase 1: maximize -sum(artificials)
    phase1 = [Fraction(0)] * width
    for row in T:
        for j in range(n + n_slack):
            phase1[j] -= row[j]
        phase1[-1] -= row[-1]
    T.append(phase1)
    _simplex(T, basis, m, n + n_slack)
    if T[m][-1] != 0:
        return LPResult(INFEASIBLE)
    # drive zero-level artificials out of the basis
    for i in range(m):
        if basis[i] >= n + n_slack:
            col = next((j for j in range(n + n_slack) if T[i][j] != 0), None)
            if col is not None:
                _pivot(T, basis, i, col)
    T.pop()

    # phase 2
    obj = [Fraction(0)] * width
    for j in range(n):
        obj[j] = -c[j]
    for i, bcol in enumerate(basis):
        if bcol < n and c[bcol] != 0:
            f = c[bcol]
            obj = [o + f * v for o, v in zip(obj, T[i])]
    T.append(obj)
    status = _simplex(T, basis, m, n + n_slack)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED)
    x = [Fraction(0)] * n
    for i, bcol in enumerate(basis):
        if bcol < n:
            x[bcol] = T[i][-1]
    x = tuple(x)
    return LPResult(OPTIMAL, x, sum((ci * xi for ci, xi in zip(c, x)), Fraction(0)))
