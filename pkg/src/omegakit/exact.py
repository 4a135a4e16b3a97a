"""Exact rational linear algebra on lists of :class:`fractions.Fraction`.

Everything here is small-dimensional; plain Gaussian elimination is enough.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Sequence

Vector = tuple[Fraction, ...]
Matrix = list[list[Fraction]]


def to_fraction(x) -> Fraction:
    """Convert ints, Fractions, floats (exactly) and ``"p/q"`` strings."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        return Fraction(x)
    # numpy scalars and the like
    if hasattr(x, "item"):
        return to_fraction(x.item())
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


def to_vector(xs) -> Vector:
    return tuple(to_fraction(x) for x in xs)


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def row_reduce(rows: Sequence[Sequence[Fraction]], ncols: int | None = None):
    """Reduced row echelon form. Returns ``(rref_rows, pivot_columns)``."""
    m = [list(map(to_fraction, r)) for r in rows]
    if ncols is None:
        ncols = len(m[0]) if m else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    if not rows:
        return 0
    return len(row_reduce(rows)[1])


def nullspace(rows: Sequence[Sequence[Fraction]], n: int) -> list[Vector]:
    """Basis of ``{x in Q^n : r . x = 0 for every row r}``."""
    if not rows:
        return [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
    red, piv = row_reduce(rows, n)
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        x = [Fraction(0)] * n
        x[f] = Fraction(1)
        for row, pc in zip(red, piv):
            x[pc] = -row[f]
        basis.append(tuple(x))
    return basis


def solve(a: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> Vector | None:
    """Solve a square system; ``None`` when singular."""
    n = len(a)
    aug = [list(map(to_fraction, row)) + [to_fraction(bi)] for row, bi in zip(a, b)]
    red, piv = row_reduce(aug, n)
    if len(piv) < n:
        return None
    return tuple(red[i][n] for i in range(n))


def det(a: Sequence[Sequence[Fraction]]) -> Fraction:
    m = [list(map(to_fraction, r)) for r in a]
    n = len(m)
    out = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            out = -out
        out *= m[c][c]
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] / m[c][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return out


def matmul(a: Sequence[Sequence[Fraction]], b: Sequence[Sequence[Fraction]]) -> Matrix:
    bt = list(zip(*b))
    return [[dot(row, col) for col in bt] for row in a]


def inverse(a: Sequence[Sequence[Fraction]]) -> Matrix:
    n = len(a)
    aug = [list(map(to_fraction, row)) + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(a)]
    red, piv = row_reduce(aug, n)
    if len(piv) < n:
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in red]


def format_fraction(x: Fraction) -> str:
    """``"p/q"`` (or ``"p"`` for integers); round-trips through :func:`to_fraction`."""
    x = to_fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
