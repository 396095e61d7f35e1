"""Exact rational helpers shared by every module.

All arithmetic in the package is done with ``flint.fmpq``; this module is the
single place where foreign numeric types (int, str, Fraction) are converted.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Sequence

from flint import fmpq, fmpq_mat

RATIONAL_RE = re.compile(r"-?[0-9]+(/[1-9][0-9]*)?")

ZERO = fmpq(0)
ONE = fmpq(1)


def q(x) -> fmpq:
    """Convert ``x`` to an exact rational.

    Floats are rejected: a float has already lost whatever exact value the
    caller had in mind.
    """
    if isinstance(x, fmpq):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, int):
        return fmpq(x)
    if isinstance(x, Fraction):
        return fmpq(x.numerator, x.denominator)
    if isinstance(x, str):
        return parse_rational(x)
    if hasattr(x, "numerator") and hasattr(x, "denominator") and not isinstance(x, float):
        return fmpq(int(x.numerator), int(x.denominator))
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def parse_rational(s: str) -> fmpq:
    s = s.strip()
    if not RATIONAL_RE.fullmatch(s):
        raise ValueError(f"malformed rational {s!r}")
    if "/" in s:
        num, den = s.split("/")
        return fmpq(int(num), int(den))
    return fmpq(int(s))


def qstr(x: fmpq) -> str:
    """Render as ``p`` or ``p/q``; inverse of :func:`parse_rational`."""
    x = q(x)
    if x.q == 1:
        return str(x.p)
    return f"{x.p}/{x.q}"


def matrix(rows: Sequence[Sequence]) -> fmpq_mat:
    r = len(rows)
    c = len(rows[0]) if r else 0
    return fmpq_mat(r, c, [q(v) for row in rows for v in row])


def zeros(r: int, c: int) -> fmpq_mat:
    return fmpq_mat(r, c)


def identity(n: int) -> fmpq_mat:
    m = fmpq_mat(n, n)
    for i in range(n):
        m[i, i] = 1
    return m


def is_zero_matrix(m: fmpq_mat) -> bool:
    return all(e == 0 for e in m.entries())


def mat_equal(a: fmpq_mat, b: fmpq_mat) -> bool:
    return a.nrows() == b.nrows() and a.ncols() == b.ncols() and a.entries() == b.entries()


def is_negative_definite(m: fmpq_mat) -> bool:
    """Exact test via symmetric Gaussian elimination on ``-m``."""
    n = m.nrows()
    if n == 0:
        return False
    a = [[-m[i, j] for j in range(n)] for i in range(n)]
    for k in range(n):
        piv = a[k][k]
        if piv <= 0:
            return False
        for i in range(k + 1, n):
            f = a[i][k] / piv
            if f != 0:
                for j in range(k, n):
                    a[i][j] -= f * a[k][j]
    return True


def nullspace(m: fmpq_mat) -> list[list[fmpq]]:
    """Basis of the right kernel as a list of column vectors."""
    rref, rank = m.rref()
    ncols = m.ncols()
    pivots = []
    row = 0
    for col in range(ncols):
        if row < rank and rref[row, col] != 0:
            pivots.append(col)
            row += 1
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for fc in free:
        v = [ZERO] * ncols
        v[fc] = ONE
        for r, pc in enumerate(pivots):
            v[pc] = -rref[r, fc]
        basis.append(v)
    return basis


def column(values: Iterable) -> fmpq_mat:
    vals = [q(v) for v in values]
    return fmpq_mat(len(vals), 1, vals)
