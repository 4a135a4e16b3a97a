"""Shortest lattice vectors under a group action, and the non-divergence polytopes.

For a block ``V_a`` of a representation, ``g`` maps the standard integer
lattice of the block to the lattice spanned by the columns of a matrix ``B``.
Its first minimum enters the polytope ``Omega`` as a logarithmic offset:

    Omega(g, eps) = {t : a(t) >= ln eps - ln min_{z != 0} ||B z||}.

The minimum is found with a floating-point LLL reduction (to get a short
radius) followed by Fincke-Pohst enumeration inside a slightly inflated
radius; candidates are compared by their *exact* squared norms, computed in
rational arithmetic from the (exactly representable) float entries of ``B``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .exact import to_fraction
from .polytopes import HPolytope
from .weights import Character

EUCLIDEAN = "euclidean"
SUP = "sup"
# relative inflation of the enumeration radius; absorbs float rounding in the bounds
_RADIUS_SLACK = 1e-6
MAX_DIM = 8


class SingularMatrixError(ValueError):
    pass


def lll_reduce(B: np.ndarray, delta: float = 0.99) -> tuple[np.ndarray, np.ndarray]:
    """LLL-reduce the columns of ``B``. Returns ``(B @ T, T)`` with ``T`` unimodular."""
    B = np.array(B, dtype=float)
    m = B.shape[1]
    T = np.eye(m, dtype=np.int64)
    k = 1

    def gso(B):
        Q = np.zeros_like(B)
        mu = np.zeros((m, m))
        for i in range(m):
            v = B[:, i].copy()
            for j in range(i):
                mu[i, j] = B[:, i] @ Q[:, j] / (Q[:, j] @ Q[:, j])
                v -= mu[i, j] * Q[:, j]
            Q[:, i] = v
        return Q, mu

    Q, mu = gso(B)
    while k < m:
        for j in range(k - 1, -1, -1):
            q = round(mu[k, j])
            if q:
                B[:, k] -= q * B[:, j]
                T[:, k] -= q * T[:, j]
                Q, mu = gso(B)
        if Q[:, k] @ Q[:, k] >= (delta - mu[k, k - 1] ** 2) * (Q[:, k - 1] @ Q[:, k - 1]):
            k += 1
        else:
            B[:, [k - 1, k]] = B[:, [k, k - 1]]
            T[:, [k - 1, k]] = T[:, [k, k - 1]]
            Q, mu = gso(B)
            k = max(k - 1, 1)
    return B, T


def _exact_matrix(B) -> list[list[Fraction]]:
    rows = np.atleast_2d(np.array(B, dtype=object))
    return [[to_fraction(x) for x in row] for row in rows]


def _exact_sq_norm(Bq: list[list[Fraction]], z: Sequence[int]) -> Fraction:
    total = Fraction(0)
    for row in Bq:
        s = sum((a * zi for a, zi in zip(row, z) if zi), Fraction(0))
        total += s * s
    return total


def _exact_sup_norm(Bq: list[list[Fraction]], z: Sequence[int]) -> Fraction:
    return max(abs(sum((a * zi for a, zi in zip(row, z) if zi), Fraction(0))) for row in Bq)


def _enumerate(R: np.ndarray, radius_sq: float) -> list[tuple[int, ...]]:
    """All nonzero integer ``y`` with ``||R y||^2 <= radius_sq`` (``R`` upper triangular)."""
    m = R.shape[0]
    out: list[tuple[int, ...]] = []
    y = [0] * m

    def rec(i: int, partial: float):
        # centre and width for coordinate i given y[i+1:]
        c = -sum(R[i, j] * y[j] for j in range(i + 1, m)) / R[i, i]
        rem = radius_sq - partial
        if rem < 0:
            return
        w = math.sqrt(rem) / abs(R[i, i])
        lo, hi = math.ceil(c - w - 1e-9), math.floor(c + w + 1e-9)
        for v in range(lo, hi + 1):
            y[i] = v
            r = R[i, i] * (v - c)
            p = partial + r * r
            if i == 0:
                if any(y) and p <= radius_sq:
                    out.append(tuple(y))
            else:
                rec(i - 1, p)
        y[i] = 0

    rec(m - 1, 0.0)
    return out


@dataclass(frozen=True)
class ShortestVector:
    vector: tuple[int, ...]
    norm_exact: Fraction  # squared norm (euclidean) or norm (sup)
    kind: str = EUCLIDEAN

    @property
    def norm(self) -> float:
        return math.sqrt(self.norm_exact) if self.kind == EUCLIDEAN else float(self.norm_exact)


def shortest_vector(B, norm: str = EUCLIDEAN) -> ShortestVector:
    """Certified shortest nonzero vector of the lattice spanned by the columns of ``B``.

    Entries may be ints, Fractions, ``"p/q"`` strings or floats; norms are
    compared exactly in the given entries.
    """
    Bq = _exact_matrix(B)
    B = np.array([[float(x) for x in row] for row in Bq])
    n, m = B.shape
    if m > MAX_DIM:
        raise ValueError(f"lattice rank {m} exceeds desk-scale limit {MAX_DIM}")
    if m > n or np.linalg.matrix_rank(B) < m:
        raise SingularMatrixError("columns are linearly dependent")
    red, T = lll_reduce(B)
    R = np.linalg.qr(red, mode="r")
    if norm == EUCLIDEAN:
        cols = [tuple(int(x) for x in T[:, j]) for j in range(m)]
        bound = min(_exact_sq_norm(Bq, c) for c in cols)
        radius_sq = float(bound) * (1 + _RADIUS_SLACK) + 1e-300
        score = lambda z: _exact_sq_norm(Bq, z)  # noqa: E731
    elif norm == SUP:
        cols = [tuple(int(x) for x in T[:, j]) for j in range(m)]
        bound = min(_exact_sup_norm(Bq, c) for c in cols)
        # ||x||_2 <= sqrt(n) ||x||_inf
        radius_sq = float(bound) ** 2 * n * (1 + _RADIUS_SLACK) + 1e-300
        score = lambda z: _exact_sup_norm(Bq, z)  # noqa: E731
    else:
        raise ValueError(f"unknown norm {norm!r}")
    best = None
    for y in _enumerate(R, radius_sq):
        z = tuple(int(v) for v in T @ np.array(y, dtype=np.int64))
        s = score(z)
        if best is None or (s, z) < best:
            best = (s, z)
    if best is None:  # cannot happen: the reduced basis vectors lie inside the radius
        raise ArithmeticError("enumeration found no candidate")
    return ShortestVector(best[1], best[0], norm)


def shortest_vector_norm(B, norm: str = EUCLIDEAN) -> float:
    return shortest_vector(B, norm).norm


def mahler_membership(full_action, eta: float, norm: str = EUCLIDEAN) -> bool:
    """Whether ``g Z^n`` has no nonzero vector shorter than ``eta`` (exact comparison)."""
    sv = shortest_vector(full_action, norm)
    eta = to_fraction(eta)
    return sv.norm_exact >= (eta * eta if norm == EUCLIDEAN else eta)


@dataclass(frozen=True)
class WeightBlock:
    character: Character
    matrix: np.ndarray  # columns: g applied to the integer basis of the weight space

    @property
    def block_dim(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True)
class WeightLatticeAction:
    blocks: tuple[WeightBlock, ...]

    def __post_init__(self):
        chars = [b.character for b in self.blocks]
        if len(set(chars)) != len(chars):
            raise ValueError("characters must be distinct across blocks")
        ranks = {c.rank for c in chars}
        if len(ranks) > 1:
            raise ValueError("characters of different ranks")

    @classmethod
    def from_blocks(cls, blocks: Iterable) -> "WeightLatticeAction":
        out = []
        for ch, mat in blocks:
            ch = ch if isinstance(ch, Character) else Character(tuple(ch))
            out.append(WeightBlock(ch, np.atleast_2d(np.asarray(mat, dtype=float))))
        return cls(tuple(out))

    @classmethod
    def from_record(cls, rec: Mapping) -> "WeightLatticeAction":
        return cls.from_blocks((b["character"], [[float(to_fraction(x)) for x in row]
                                                 for row in b["matrix"]]) for b in rec["blocks"])

    @property
    def rank(self) -> int:
        return self.blocks[0].character.rank

    def characters(self) -> list[Character]:
        return [b.character for b in self.blocks]

    def torus_translate(self, s: Sequence[float]) -> "WeightLatticeAction":
        """Action of ``g exp(s)``: each block scales by ``exp(a(s))``."""
        return WeightLatticeAction(tuple(
            WeightBlock(b.character, b.matrix * math.exp(b.character.pair(s))) for b in self.blocks))


def omega_polytope(act: WeightLatticeAction, epsilon: float,
                   phi_subset: Iterable | None = None, norm: str = EUCLIDEAN) -> HPolytope:
    """``{t : a(t) >= ln eps - ln lambda_1(block_a)}`` over the chosen characters."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    wanted = None
    if phi_subset is not None:
        wanted = {c if isinstance(c, Character) else Character(tuple(c)) for c in phi_subset}
        missing = wanted - set(act.characters())
        if missing:
            raise ValueError(f"characters {sorted(missing)} not in the action")
    cons = []
    for b in act.blocks:
        if wanted is not None and b.character not in wanted:
            continue
        lam = shortest_vector_norm(b.matrix, norm)
        cons.append((b.character.coords, math.log(epsilon) - math.log(lam)))
    return HPolytope(act.rank, tuple(cons))


@dataclass(frozen=True)
class ParabolicData:
    entries: tuple[tuple[str, Character, float], ...]

    def __post_init__(self):
        for label, ch, d in self.entries:
            if not d > 0:
                raise ValueError(f"d value for {label!r} must be positive")

    @classmethod
    def of(cls, *entries) -> "ParabolicData":
        return cls(tuple((str(l), c if isinstance(c, Character) else Character(tuple(c)), float(d))
                         for l, c, d in entries))

    def scaled(self, c: float) -> "ParabolicData":
        return ParabolicData(tuple((l, ch, d * c) for l, ch, d in self.entries))


def parabolic_omega(data: ParabolicData, epsilon: float) -> HPolytope:
    """``{t : a_P(t) >= ln eps - ln d_P}`` over the parabolic labels."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    rank = data.entries[0][1].rank
    return HPolytope(rank, tuple((ch.coords, math.log(epsilon) - math.log(d))
                                 for _, ch, d in data.entries))
