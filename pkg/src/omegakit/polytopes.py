"""Exact H-polytopes ``{v : a(v) >= b}`` with rational data.

Vertices come from exhaustive ``dim``-subset intersection of constraint
hyperplanes; volumes from a pulling triangulation of the face lattice, summed
as simplex determinants. Everything is ``Fraction``-exact, which is fine at
the dimensions used here (``dim <= 6``).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Mapping, Sequence

from .cones import Decomposition, FunctionalSet
from .exact import (Vector, det, dot, format_fraction, inverse, matmul, rank, solve,
                    to_fraction, to_vector)
from .lp import UNBOUNDED, feasible_point, linprog


class UnboundedError(ValueError):
    pass


Constraint = tuple[Vector, Fraction]


@dataclass(frozen=True)
class HPolytope:
    dim: int
    constraints: tuple[Constraint, ...]

    def __post_init__(self):
        cs = []
        for a, b in self.constraints:
            a = to_vector(a)
            if len(a) != self.dim:
                raise ValueError(f"covector {a} does not have length {self.dim}")
            cs.append((a, to_fraction(b)))
        object.__setattr__(self, "constraints", tuple(cs))

    @classmethod
    def from_arrays(cls, A, b) -> "HPolytope":
        A = [list(r) for r in A]
        return cls(len(A[0]), tuple(zip(A, b)))

    @classmethod
    def box(cls, lower: Sequence, upper: Sequence) -> "HPolytope":
        d = len(lower)
        cs = []
        for i in range(d):
            e = [0] * d
            e[i] = 1
            cs.append((tuple(e), lower[i]))
            cs.append((tuple(-x for x in e), -to_fraction(upper[i])))
        return cls(d, tuple(cs))

    def __and__(self, other: "HPolytope") -> "HPolytope":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return HPolytope(self.dim, self.constraints + other.constraints)

    def contains(self, x: Sequence) -> bool:
        x = to_vector(x)
        return all(dot(a, x) >= b for a, b in self.constraints)

    def translate(self, s: Sequence) -> "HPolytope":
        s = to_vector(s)
        return HPolytope(self.dim, tuple((a, b + dot(a, s)) for a, b in self.constraints))

    def _ub_form(self):
        return [[-x for x in a] for a, _ in self.constraints], [-b for _, b in self.constraints]

    def to_record(self) -> dict:
        return {"dim": self.dim,
                "constraints": [[[format_fraction(x) for x in a], format_fraction(b)]
                                for a, b in self.constraints]}

    @classmethod
    def from_record(cls, rec: Mapping) -> "HPolytope":
        return cls(int(rec["dim"]), tuple((tuple(a), b) for a, b in rec["constraints"]))


def is_empty(p: HPolytope) -> bool:
    if not p.constraints:
        return False
    A, b = p._ub_form()
    return feasible_point(A, b, n=p.dim) is None


def is_bounded(p: HPolytope) -> bool:
    """True when the recession cone is trivial (empty polytopes count as bounded)."""
    if is_empty(p):
        return True
    rec = [[-x for x in a] for a, _ in p.constraints]
    for i in range(p.dim):
        for sign in (1, -1):
            c = [0] * p.dim
            c[i] = sign
            cap = [Fraction(0)] * p.dim
            cap[i] = Fraction(sign)
            res = linprog(c, rec + [cap], [0] * len(rec) + [1], free=True)
            if res.status == UNBOUNDED or res.value > 0:
                return False
    return True


def _require_bounded(p: HPolytope) -> None:
    if not is_bounded(p):
        raise UnboundedError("polytope is unbounded")


def vertices(p: HPolytope) -> list[Vector]:
    """Exact, deduplicated vertex list (sorted). Empty polytopes give ``[]``."""
    _require_bounded(p)
    if is_empty(p):
        return []
    found: set[Vector] = set()
    cons = p.constraints
    for idx in combinations(range(len(cons)), p.dim):
        A = [cons[i][0] for i in idx]
        x = solve(A, [cons[i][1] for i in idx])
        if x is not None and p.contains(x):
            found.add(x)
    return sorted(found)


def _affine_dim(points: Sequence[Vector]) -> int:
    if len(points) <= 1:
        return 0
    p0 = points[0]
    return rank([[a - b for a, b in zip(q, p0)] for q in points[1:]])


def triangulate(p: HPolytope) -> list[tuple[Vector, ...]]:
    """Pulling triangulation of a full-dimensional polytope into ``dim``-simplices.

    Lower-dimensional (or empty) polytopes give ``[]``.
    """
    verts = vertices(p)
    if _affine_dim(verts) < p.dim:
        return []
    active = [frozenset(k for k, v in enumerate(verts) if dot(a, v) == b) for a, b in p.constraints]

    def facets(face: frozenset, k: int) -> list[frozenset]:
        out = set()
        for act in active:
            sub = face & act
            if sub != face and len(sub) >= k and _affine_dim([verts[i] for i in sorted(sub)]) == k - 1:
                out.add(sub)
        return sorted(out, key=sorted)

    def pull(face: frozenset, k: int) -> list[tuple[int, ...]]:
        if k == 0:
            return [(next(iter(face)),)]
        apex = min(face)
        simplices = []
        for f in facets(face, k):
            if apex in f:
                continue
            for s in pull(f, k - 1):
                simplices.append((apex,) + s)
        return simplices

    return [tuple(verts[i] for i in s) for s in pull(frozenset(range(len(verts))), p.dim)]


def simplex_volume(simplex: Sequence[Vector]) -> Fraction:
    p0 = simplex[0]
    m = [[a - b for a, b in zip(q, p0)] for q in simplex[1:]]
    return abs(det(m)) / math.factorial(len(p0))


def volume(p: HPolytope) -> Fraction:
    """Exact Lebesgue volume; 0 for empty or lower-dimensional polytopes."""
    return sum((simplex_volume(s) for s in triangulate(p)), Fraction(0))


@dataclass(frozen=True)
class VertexHull:
    """Convex hull of points given in coordinates of ``basis``."""
    basis: tuple[Vector, ...]
    points: tuple[Vector, ...]

    def ambient(self) -> list[Vector]:
        d = len(self.basis[0]) if self.basis else 0
        return [tuple(sum((c * b[i] for c, b in zip(pt, self.basis)), Fraction(0)) for i in range(d))
                for pt in self.points]


def projection_coordinates(basis: Sequence[Sequence]) -> list[list[Fraction]]:
    """Matrix ``(B^T B)^-1 B^T`` sending ``x`` to coordinates of its orthogonal projection."""
    B = [to_vector(b) for b in basis]
    gram = [[dot(u, v) for v in B] for u in B]
    return matmul(inverse(gram), B)


def projector(basis: Sequence[Sequence], metric: Sequence | None = None) -> list[list[Fraction]]:
    """Orthogonal projector onto ``span(basis)`` under a diagonal metric."""
    B = [to_vector(b) for b in basis]
    d = len(B[0])
    m = [Fraction(1)] * d if metric is None else [to_fraction(x) for x in metric]
    if not B:
        return [[Fraction(0)] * d for _ in range(d)]
    gram = [[sum(u[i] * v[i] * m[i] for i in range(d)) for v in B] for u in B]
    coeffs = matmul(inverse(gram), [[b[i] * m[i] for i in range(d)] for b in B])
    # P = B^T (B M B^T)^-1 B M
    return [[sum(B[k][i] * coeffs[k][j] for k in range(len(B))) for j in range(d)] for i in range(d)]


def project(p: HPolytope, basis: Sequence[Sequence]) -> VertexHull:
    """Orthogonal projection onto ``span(basis)``, as the hull of projected vertices."""
    coords = projection_coordinates(basis)
    pts = {tuple(dot(row, v) for row in coords) for v in vertices(p)}
    return VertexHull(tuple(to_vector(b) for b in basis), tuple(sorted(pts)))


def hull_extreme_points(points: Sequence[Vector]) -> list[Vector]:
    """Points not in the convex hull of the others (exact LP test)."""
    pts = sorted(set(to_vector(q) for q in points))
    out = []
    for i, q in enumerate(pts):
        others = pts[:i] + pts[i + 1:]
        if not others:
            out.append(q)
            continue
        A_eq = [[o[k] for o in others] for k in range(len(q))] + [[1] * len(others)]
        b_eq = list(q) + [1]
        if feasible_point(A_eq=A_eq, b_eq=b_eq, n=len(others), free=()) is None:
            out.append(q)
    return out


def split_polytope(phi: FunctionalSet, dec: Decomposition, offsets: Sequence,
                   omega) -> HPolytope:
    """Split polytope ``pi_U(Omega(phi0)) (+) (W cap raised Omega(phi1 u phi_inf))``.

    ``offsets[i]`` is the right-hand side ``b`` of ``phi[i](v) >= b`` at the
    current step; ``omega`` is added to the right-hand sides on ``phi1`` and
    ``phi_inf``. The result lives in the original coordinates: the ``phi0``
    constraints are invariant along ``W`` and the raised constraints are
    evaluated on the ``W``-component ``P_W v``.
    """
    omega = to_fraction(omega)
    b = [to_fraction(x) for x in offsets]
    if len(b) != len(phi):
        raise ValueError("one offset per covector required")
    cons: list[Constraint] = [(phi[i], b[i]) for i in dec.phi0]
    P = projector(dec.W_basis, dec.metric or None) if dec.W_basis else None
    for i in sorted(dec.phi1 + dec.phi_inf):
        if P is None:
            # W = 0: the W-slice is {0}; it is nonempty iff 0 satisfies the raised constraint
            cons.append(((Fraction(0),) * phi.dim, b[i] + omega))
            continue
        a = tuple(sum(phi[i][k] * P[k][j] for k in range(phi.dim)) for j in range(phi.dim))
        cons.append((a, b[i] + omega))
    return HPolytope(phi.dim, tuple(cons))


def omega_polytope(phi: FunctionalSet, offsets: Sequence) -> HPolytope:
    """``Omega(phi, b) = {v : phi[i](v) >= b[i]}``."""
    return HPolytope(phi.dim, tuple(zip(phi.functionals, offsets)))


def contained_in(inner: HPolytope, outer: HPolytope) -> bool:
    """Exact containment for bounded ``inner`` (checked on its vertices)."""
    return all(outer.contains(v) for v in vertices(inner))


def rational_sqrt(n, max_denominator: int = 10**9) -> Fraction:
    """Exact square root for perfect squares, close rational otherwise."""
    q = to_fraction(n)
    rn, rd = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return Fraction(math.sqrt(q)).limit_denominator(max_denominator)


@dataclass
class RatioReport:
    n_values: list[int]
    omega_values: list[Fraction]
    vol_split: list[Fraction]
    vol_full: list[Fraction]
    ratios: list[Fraction]
    contained: list[bool]

    @property
    def limit_estimate(self) -> float:
        return float(self.ratios[-1])

    @property
    def converging(self) -> bool:
        """Deviation from 1 is zero or strictly shrinking along the ladder."""
        dev = [abs(1 - r) for r in self.ratios]
        if dev[-1] == 0:
            return True
        return all(b < a for a, b in zip(dev, dev[1:]))

    def rows(self):
        for n, w, vs, vf, r in zip(self.n_values, self.omega_values, self.vol_split,
                                   self.vol_full, self.ratios):
            yield n, w, vs, vf, r

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "omega", "vol_split", "vol_full", "ratio"])
        for n, om, vs, vf, r in self.rows():
            w.writerow([n, format_fraction(om), format_fraction(vs), format_fraction(vf),
                        f"{float(r):.17g}"])
        return buf.getvalue()


def ratio_experiment(phi: FunctionalSet, dec: Decomposition,
                     offsets_at: Callable[[int], Sequence],
                     omega_rule: Callable[[int], object] = rational_sqrt,
                     n_list: Iterable[int] = (100, 1000, 10000)) -> RatioReport:
    """Volume ratio of the split polytope to ``Omega(phi, offsets_at(n))`` along ``n_list``.

    Containment of the split polytope in the full one is checked exactly for
    every ``n`` and recorded; a violation does not stop the run.
    """
    rep = RatioReport([], [], [], [], [], [])
    for n in n_list:
        b = offsets_at(n)
        om = to_fraction(omega_rule(n))
        full = omega_polytope(phi, b)
        split = split_polytope(phi, dec, b, om)
        vf = volume(full)
        vs = volume(split)
        rep.n_values.append(n)
        rep.omega_values.append(om)
        rep.vol_split.append(vs)
        rep.vol_full.append(vf)
        rep.ratios.append(vs / vf if vf else Fraction(0))
        rep.contained.append(contained_in(split, full))
    return rep
