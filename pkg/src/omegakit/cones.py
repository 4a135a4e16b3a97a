"""Decomposition of a finite set of rational covectors into Phi_0 / Phi_1 / Phi_inf.

Given covectors ``Phi`` on ``V = Q^dim`` and, for a sequence of translates, a
tag per covector saying whether its weight-space minimum diverges or stays
bounded:

* ``phi_inf``: the diverging ones;
* ``phi0``: bounded covectors that occur with a strictly positive coefficient
  in some vanishing positive combination of bounded covectors;
* ``phi1``: the remaining bounded covectors.

``W`` is the common kernel of ``phi0`` (the span of the cone cut out by the
bounded covectors) and ``U`` its orthogonal complement.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .exact import Vector, dot, format_fraction, nullspace, to_fraction, to_vector
from .lp import linprog

DIVERGES = "diverges"


class InfeasibleError(ValueError):
    """The requested relative-interior vector does not exist."""


@dataclass(frozen=True)
class FunctionalSet:
    dim: int
    functionals: tuple[Vector, ...]

    def __post_init__(self):
        if self.dim <= 0:
            raise ValueError("dim must be positive")
        fs = tuple(to_vector(f) for f in self.functionals)
        for f in fs:
            if len(f) != self.dim:
                raise ValueError(f"covector {f} does not have length {self.dim}")
        if len(set(fs)) != len(fs):
            raise ValueError("duplicate covectors")
        object.__setattr__(self, "functionals", fs)

    def __len__(self):
        return len(self.functionals)

    def __getitem__(self, i) -> Vector:
        return self.functionals[i]

    def to_record(self) -> dict:
        return {"dim": self.dim,
                "functionals": [[format_fraction(x) for x in f] for f in self.functionals]}

    @classmethod
    def from_record(cls, rec: Mapping) -> "FunctionalSet":
        return cls(int(rec["dim"]), tuple(tuple(f) for f in rec["functionals"]))


@dataclass(frozen=True)
class Decomposition:
    phi0: tuple[int, ...]
    phi1: tuple[int, ...]
    phi_inf: tuple[int, ...]
    W_basis: tuple[Vector, ...]
    U_basis: tuple[Vector, ...]
    metric: tuple[Fraction, ...] = field(default=())

    def to_record(self) -> dict:
        def vecs(vs):
            return [[format_fraction(x) for x in v] for v in vs]
        return {"phi_inf": list(self.phi_inf), "phi1": list(self.phi1), "phi0": list(self.phi0),
                "W_basis": vecs(self.W_basis), "U_basis": vecs(self.U_basis)}


def _positive_relation_weight(vectors: Sequence[Vector], target: int) -> Fraction:
    """max a_target s.t. sum a_b v_b = 0, a >= 0, a_target <= 1."""
    n = len(vectors)
    dim = len(vectors[0])
    A_eq = [[vectors[b][i] for b in range(n)] for i in range(dim)]
    bound = [[Fraction(int(b == target)) for b in range(n)]]
    c = [Fraction(int(b == target)) for b in range(n)]
    res = linprog(c, A_ub=bound, b_ub=[1], A_eq=A_eq, b_eq=[0] * dim)
    return res.value


def compute_phi0(phi: FunctionalSet, bounded_indices: Iterable[int]) -> tuple[int, ...]:
    """Indices of covectors in a strictly positive vanishing combination.

    Exact LP per covector: it belongs to Phi_0 iff its coefficient can be
    pushed to 1 (the constraint cone is scale invariant, so the optimum is 0 or 1).
    """
    bdd = sorted(set(bounded_indices))
    if not bdd:
        return ()
    for i in bdd:
        if not 0 <= i < len(phi):
            raise IndexError(i)
    vecs = [phi[i] for i in bdd]
    return tuple(i for k, i in enumerate(bdd) if _positive_relation_weight(vecs, k) == 1)


def compute_W(functionals: Sequence[Sequence], dim: int) -> tuple[Vector, ...]:
    """Exact basis of the common kernel; the whole space when no covectors."""
    return tuple(nullspace([to_vector(f) for f in functionals], dim))


def orthogonal_complement(basis: Sequence[Vector], dim: int,
                          metric: Sequence[Fraction] | None = None) -> tuple[Vector, ...]:
    """Basis of the complement of ``span(basis)`` under a diagonal metric."""
    m = [Fraction(1)] * dim if metric is None else [to_fraction(x) for x in metric]
    rows = [[w[i] * m[i] for i in range(dim)] for w in basis]
    return tuple(nullspace(rows, dim))


def interior_vector(phi: FunctionalSet, phi0: Iterable[int]) -> Vector:
    """``v`` with ``a(v) = 0`` on ``phi0`` and ``a(v) > 0`` on the rest.

    Maximizes a common slack ``s <= 1`` over ``a(v) >= s``; the slack reaches 1
    exactly when a strict solution exists.
    """
    zero = set(phi0)
    rest = [i for i in range(len(phi)) if i not in zero]
    d = phi.dim
    if not rest:
        # every constraint is an equality; the origin is the canonical answer
        return tuple(Fraction(0) for _ in range(d))
    # variables: v (d, free), s (nonnegative)
    A_ub = [[-x for x in phi[i]] + [Fraction(1)] for i in rest]
    b_ub = [0] * len(rest)
    A_ub.append([Fraction(0)] * d + [Fraction(1)])
    b_ub.append(1)
    A_eq = [list(phi[i]) + [Fraction(0)] for i in sorted(zero)]
    b_eq = [0] * len(A_eq)
    res = linprog([0] * d + [1], A_ub, b_ub, A_eq, b_eq, free=range(d))
    if not res.ok or res.value < 1:
        raise InfeasibleError("no vector is strictly positive off phi0 and zero on phi0")
    return res.x[:d]


def classify_sequence(phi: FunctionalSet, schedule: Sequence,
                      metric: Sequence | None = None) -> Decomposition:
    """Split ``phi`` according to a per-index tag.

    ``schedule[i]`` is ``"diverges"`` (or ``None``) for a diverging weight, and
    otherwise the constant offset of that covector (its value is not used).
    """
    if len(schedule) != len(phi):
        raise ValueError("schedule must tag every covector")
    diverging = tuple(i for i, s in enumerate(schedule) if s is None or s == DIVERGES)
    bounded = [i for i in range(len(phi)) if i not in diverging]
    phi0 = compute_phi0(phi, bounded)
    phi1 = tuple(i for i in bounded if i not in phi0)
    W = compute_W([phi[i] for i in phi0], phi.dim)
    met = tuple(to_fraction(x) for x in metric) if metric is not None else ()
    U = orthogonal_complement(W, phi.dim, met or None)
    return Decomposition(phi0, phi1, diverging, W, U, met)


def check_decomposition(phi: FunctionalSet, dec: Decomposition) -> None:
    """Raise ``AssertionError`` if ``dec`` violates its structural invariants."""
    idx = set(dec.phi0) | set(dec.phi1) | set(dec.phi_inf)
    assert idx == set(range(len(phi))), "indices not covered"
    assert len(dec.phi0) + len(dec.phi1) + len(dec.phi_inf) == len(phi), "overlap"
    for i in dec.phi0:
        for w in dec.W_basis:
            assert dot(phi[i], w) == 0, f"phi0 covector {i} nonzero on W"
    m = dec.metric or (Fraction(1),) * phi.dim
    for u in dec.U_basis:
        for w in dec.W_basis:
            assert sum(a * b * c for a, b, c in zip(u, w, m)) == 0, "U not orthogonal to W"
    assert len(dec.U_basis) + len(dec.W_basis) == phi.dim, "W + U does not span"
