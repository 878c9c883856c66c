"""Small exact-arithmetic helpers shared by the numeric modules."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence, Union

Number = Union[Fraction, float]
Vector = tuple


def to_number(value) -> Number:
    """Coerce a literal to a Fraction when it is rational, else a float.

    Strings such as ``"3/4"`` or ``"0.25"`` and Python ints/Fractions are
    kept exact.  Floats are read through their decimal repr so ``0.1``
    becomes ``1/10`` rather than the binary expansion.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    # numpy scalars and friends
    if hasattr(value, "item"):
        return to_number(value.item())
    raise TypeError(f"cannot interpret {value!r} as a number")


def vec(values: Iterable) -> Vector:
    return tuple(to_number(v) for v in values)


def is_exact(values: Iterable) -> bool:
    return all(isinstance(v, Fraction) for v in values)


def as_fraction(value: Number) -> Fraction:
    """Exact conversion; floats become their binary rational value."""
    return value if isinstance(value, Fraction) else Fraction(value)


def dot(a: Sequence[Number], b: Sequence[Number]) -> Number:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def sub(a: Sequence[Number], b: Sequence[Number]) -> Vector:
    return tuple(x - y for x, y in zip(a, b))


def add_scaled(a: Sequence[Number], t: Number, d: Sequence[Number]) -> Vector:
    return tuple(x + t * y for x, y in zip(a, d))


def scale(t: Number, a: Sequence[Number]) -> Vector:
    return tuple(t * x for x in a)


def exact_sqrt(q: Fraction) -> Number:
    """Square root that stays rational for perfect squares."""
    if q < 0:
        raise ValueError("negative radicand")
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return math.sqrt(q)


def euclidean_norm(a: Sequence[Number]) -> Number:
    if is_exact(a):
        return exact_sqrt(sum((x * x for x in a), Fraction(0)))
    return math.sqrt(sum(float(x) ** 2 for x in a))


def max_norm(a: Sequence[Number]) -> Number:
    return max((abs(x) for x in a), default=Fraction(0))


def rank(rows: Sequence[Sequence[Number]]) -> int:
    """Rank over the rationals (floats are converted exactly)."""
    m = [[as_fraction(x) for x in row] for row in rows]
    if not m:
        return 0
    r = 0
    ncols = len(m[0])
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                factor = m[i][c] / m[r][c]
                m[i] = [a - factor * b for a, b in zip(m[i], m[r])]
        r += 1
        if r == len(m):
            break
    return r


def positive_multiple(v: Sequence[Number], d: Sequence[Number]) -> Number | None:
    """Return t > 0 with v == t*d exactly, or None."""
    t = None
    for vi, di in zip(v, d):
        if di == 0:
            if vi != 0:
                return None
            continue
        ti = vi / di
        if t is None:
            t = ti
        elif ti != t:
            return None
    if t is None or t <= 0:
        return None
    return t


def fmt(value) -> str | None:
    """Serialize a number: Fractions as ``p/q`` strings, floats via repr."""
    if value is None:
        return None
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)
