"""Exact rational linear programming: two-phase tableau simplex, Bland's rule.

Used for every yes/no polyhedral question in the package (feasibility,
boundedness, positive zero-sum relations), where a floating-point LP could
misclassify boundary cases.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exact import Vector, to_fraction

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPResult:
    status: str
    x: Vector | None = None
    value: Fraction | None = None

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


class _Tableau:
    def __init__(self, rows: list[list[Fraction]], basis: list[int]):
        self.rows = rows  # each row: coefficients + [rhs]
        self.basis = basis
        self.ncols = len(rows[0]) - 1 if rows else 0
        self.cost: list[Fraction] = []
        self.obj = Fraction(0)

    def set_objective(self, c: Sequence[Fraction]) -> None:
        # reduced costs d_j = c_j - c_B B^-1 A_j, with the tableau already in B^-1 A form
        d = list(c) + [Fraction(0)]
        for r, b in enumerate(self.basis):
            cb = c[b]
            if cb:
                row = self.rows[r]
                d = [dj - cb * aj for dj, aj in zip(d, row)]
        self.cost = d[:-1]
        self.obj = -d[-1]

    def pivot(self, r: int, j: int) -> None:
        row = self.rows[r]
        inv = 1 / row[j]
        row = [x * inv for x in row]
        self.rows[r] = row
        for i, other in enumerate(self.rows):
            if i != r and other[j] != 0:
                f = other[j]
                self.rows[i] = [a - f * b for a, b in zip(other, row)]
        f = self.cost[j]
        if f:
            self.cost = [a - f * b for a, b in zip(self.cost, row[:-1])]
            self.obj += f * row[-1]
        self.basis[r] = j

    def run(self, allowed: int) -> str:
        """Maximize; only columns ``< allowed`` may enter."""
        while True:
            j = next((k for k in range(allowed) if self.cost[k] > 0), None)
            if j is None:
                return OPTIMAL
            best = None
            for i, row in enumerate(self.rows):
                if row[j] > 0:
                    key = (row[-1] / row[j], self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return UNBOUNDED
            self.pivot(best[1], j)

    def solution(self) -> list[Fraction]:
        x = [Fraction(0)] * self.ncols
        for r, b in enumerate(self.basis):
            x[b] = self.rows[r][-1]
        return x


def linprog(c, A_ub=(), b_ub=(), A_eq=(), b_eq=(), free: Sequence[int] | bool = ()) -> LPResult:
    """Maximize ``c @ x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq``.

    Variables are nonnegative except those listed in ``free`` (``free=True``
    makes every variable free). All data is converted to ``Fraction``.
    """
    c = [to_fraction(v) for v in c]
    n = len(c)
    if free is True:
        free = range(n)
    free = sorted(set(free or ()))

    # column layout: x (n), negative parts of free vars, slacks, artificials
    neg_col = {j: n + k for k, j in enumerate(free)}
    nx = n + len(free)
    ub = [[to_fraction(v) for v in row] for row in A_ub]
    eq = [[to_fraction(v) for v in row] for row in A_eq]
    bub = [to_fraction(v) for v in b_ub]
    beq = [to_fraction(v) for v in b_eq]
    m = len(ub) + len(eq)
    if m == 0:
        # nothing constrains x; bounded only if c vanishes on the feasible cone
        if any(c[j] > 0 for j in range(n)) or any(c[j] != 0 for j in free):
            return LPResult(UNBOUNDED)
        return LPResult(OPTIMAL, tuple(Fraction(0) for _ in range(n)), Fraction(0))

    nslack = len(ub)
    width = nx + nslack + m
    rows: list[list[Fraction]] = []
    for i, (a, b) in enumerate(list(zip(ub, bub)) + list(zip(eq, beq))):
        row = [Fraction(0)] * (width + 1)
        for j, v in enumerate(a):
            row[j] = v
            if j in neg_col:
                row[neg_col[j]] = -v
        if i < nslack:
            row[nx + i] = Fraction(1)
        if b < 0:
            row = [-v for v in row]
            b = -b
        row[nx + nslack + i] = Fraction(1)
        row[-1] = b
        rows.append(row)

    art0 = nx + nslack
    tab = _Tableau(rows, [art0 + i for i in range(m)])
    tab.set_objective([Fraction(0)] * art0 + [Fraction(-1)] * m)
    tab.run(width)
    if tab.obj < 0:
        return LPResult(INFEASIBLE)

    # drive zero-valued artificials out of the basis; drop redundant rows
    r = 0
    while r < len(tab.rows):
        if tab.basis[r] >= art0:
            j = next((k for k in range(art0) if tab.rows[r][k] != 0), None)
            if j is None:
                del tab.rows[r]
                del tab.basis[r]
                continue
            tab.pivot(r, j)
        r += 1

    full_c = c + [-c[j] for j in free] + [Fraction(0)] * (nslack + m)
    tab.set_objective(full_c)
    status = tab.run(art0)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED)
    sol = tab.solution()
    x = [sol[j] for j in range(n)]
    for j, k in neg_col.items():
        x[j] -= sol[k]
    return LPResult(OPTIMAL, tuple(x), tab.obj)


def feasible_point(A_ub=(), b_ub=(), A_eq=(), b_eq=(), n: int | None = None,
                   free: Sequence[int] | bool = True) -> Vector | None:
    """A point of the polyhedron, or ``None`` when it is empty."""
    if n is None:
        n = len(A_ub[0]) if len(A_ub) else len(A_eq[0])
    res = linprog([0] * n, A_ub, b_ub, A_eq, b_eq, free=free)
    return res.x if res.ok else None
