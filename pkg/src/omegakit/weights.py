"""Weight systems of split-torus representations.

A representation of a split torus of rank ``r`` is determined up to
isomorphism by the multiset of its characters, each an integer vector in a
fixed basis of the character lattice. Systems are kept canonical: equal
characters merged, entries sorted.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Iterable, Mapping

# above this dimension exterior powers use the generating-function route
ENUMERATION_LIMIT = 12


class RankMismatchError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Character:
    coords: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))

    @classmethod
    def zero(cls, rank: int) -> "Character":
        return cls((0,) * rank)

    @property
    def rank(self) -> int:
        return len(self.coords)

    def __add__(self, other: "Character") -> "Character":
        if self.rank != other.rank:
            raise RankMismatchError(f"rank {self.rank} vs {other.rank}")
        return Character(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "Character":
        return Character(tuple(-a for a in self.coords))

    def __sub__(self, other: "Character") -> "Character":
        return self + (-other)

    def __mul__(self, k: int) -> "Character":
        return Character(tuple(k * a for a in self.coords))

    __rmul__ = __mul__

    def pair(self, t) -> float:
        """Evaluate the differential on a Lie algebra vector ``t``."""
        return sum(a * x for a, x in zip(self.coords, t))

    def __iter__(self):
        return iter(self.coords)

    def __repr__(self):
        return f"Character{self.coords}"


def _as_character(c) -> Character:
    return c if isinstance(c, Character) else Character(tuple(c))


@dataclass(frozen=True)
class WeightSystem:
    rank: int
    weights: tuple[tuple[Character, int], ...]

    def __post_init__(self):
        if self.rank <= 0:
            raise ValueError("rank must be positive")
        merged: Counter = Counter()
        for ch, mult in self.weights:
            ch = _as_character(ch)
            if ch.rank != self.rank:
                raise RankMismatchError(f"character {ch} has rank {ch.rank}, expected {self.rank}")
            if int(mult) <= 0:
                raise ValueError("multiplicities must be positive")
            merged[ch] += int(mult)
        if not merged:
            raise ValueError("a weight system must have positive dimension")
        object.__setattr__(self, "weights", tuple(sorted(merged.items())))

    @classmethod
    def from_counter(cls, rank: int, counts: Mapping) -> "WeightSystem":
        return cls(rank, tuple((_as_character(c), m) for c, m in counts.items() if m))

    @classmethod
    def of(cls, *chars, rank: int | None = None) -> "WeightSystem":
        """Build from characters listed with repetition: ``WeightSystem.of((1,), (-1,))``."""
        chars = [_as_character(c) for c in chars]
        rank = rank if rank is not None else chars[0].rank
        return cls.from_counter(rank, Counter(chars))

    @property
    def dim(self) -> int:
        return sum(m for _, m in self.weights)

    def counter(self) -> Counter:
        return Counter(dict(self.weights))

    def multiplicity(self, ch) -> int:
        return dict(self.weights).get(_as_character(ch), 0)

    def elements(self) -> list[Character]:
        """The weight multiset, one entry per basis vector."""
        return [ch for ch, m in self.weights for _ in range(m)]

    def total_weight(self) -> Character:
        out = Character.zero(self.rank)
        for ch, m in self.weights:
            out = out + m * ch
        return out

    def __add__(self, other: "WeightSystem") -> "WeightSystem":
        return direct_sum(self, other)

    def __mul__(self, other: "WeightSystem") -> "WeightSystem":
        return tensor(self, other)

    def to_record(self) -> dict:
        return {"rank": self.rank,
                "weights": [[list(ch.coords), m] for ch, m in self.weights]}

    @classmethod
    def from_record(cls, rec: Mapping) -> "WeightSystem":
        return cls(int(rec["rank"]), tuple((Character(tuple(c)), int(m)) for c, m in rec["weights"]))


def _check_ranks(a: WeightSystem, b: WeightSystem) -> None:
    if a.rank != b.rank:
        raise RankMismatchError(f"rank {a.rank} vs {b.rank}")


def direct_sum(a: WeightSystem, b: WeightSystem) -> WeightSystem:
    _check_ranks(a, b)
    return WeightSystem.from_counter(a.rank, a.counter() + b.counter())


def tensor(a: WeightSystem, b: WeightSystem) -> WeightSystem:
    _check_ranks(a, b)
    out: Counter = Counter()
    for ca, ma in a.weights:
        for cb, mb in b.weights:
            out[ca + cb] += ma * mb
    return WeightSystem.from_counter(a.rank, out)


def trivial(rank: int, mult: int = 1) -> WeightSystem:
    return WeightSystem(rank, ((Character.zero(rank), mult),))


def _exterior_by_subsets(a: WeightSystem, k: int) -> Counter:
    elems = a.elements()
    out: Counter = Counter()
    zero = Character.zero(a.rank)
    for sub in combinations(elems, k):
        s = zero
        for ch in sub:
            s = s + ch
        out[s] += 1
    return out


def _exterior_by_generating_function(a: WeightSystem, k: int) -> Counter:
    # coefficient of x^k in prod_chars (1 + x z^ch)^mult, truncated at degree k
    layers: list[Counter] = [Counter({Character.zero(a.rank): 1})] + [Counter() for _ in range(k)]
    for ch, mult in a.weights:
        new = [Counter() for _ in range(k + 1)]
        for deg, layer in enumerate(layers):
            for w, cnt in layer.items():
                for j in range(min(mult, k - deg) + 1):
                    new[deg + j][w + j * ch] += cnt * comb(mult, j)
        layers = new
    return layers[k]


def exterior_power(a: WeightSystem, k: int) -> WeightSystem:
    if not 0 <= k <= a.dim:
        raise ValueError(f"exterior power {k} out of range 0..{a.dim}")
    if a.dim <= ENUMERATION_LIMIT:
        counts = _exterior_by_subsets(a, k)
    else:
        counts = _exterior_by_generating_function(a, k)
    return WeightSystem.from_counter(a.rank, counts)


def wedge_closure(a: WeightSystem) -> WeightSystem:
    """Direct sum of all exterior powers, degree 0 through ``dim``."""
    out: Counter = Counter()
    for k in range(a.dim + 1):
        out += exterior_power(a, k).counter()
    return WeightSystem.from_counter(a.rank, out)


def phi_of(a: WeightSystem) -> frozenset[Character]:
    """Characters occurring with nonzero multiplicity."""
    return frozenset(ch for ch, _ in a.weights)


def standard_sp(n: int) -> WeightSystem:
    """Weights of the standard representation of Sp(2n) on its diagonal torus."""
    chars = []
    for i in range(n):
        e = [0] * n
        e[i] = 1
        chars.append(tuple(e))
    chars += [tuple(-x for x in c) for c in reversed(chars)]
    return WeightSystem.of(*chars, rank=n)


def union_of_supports(systems: Iterable[WeightSystem]) -> frozenset[Character]:
    out: frozenset[Character] = frozenset()
    for s in systems:
        out |= phi_of(s)
    return out
