"""Counting integral points of fixed characteristic polynomial in sp(2N).

The variety is ``X = {x in sp(2N) : det(tI - x) = prod_i (t^2 - d_i^2)}``
for distinct positive integers ``d_i``. The predicted count of integral
points of Frobenius norm at most ``R`` in one orbit is

    N_R = C1 * C2 * R^(N^2) * (ln R)^N,

with ``C1`` the normalized volume of the torus polytope cut out by the
isotropic index sets and ``C2`` the unipotent ball constant. This module
computes both, counts points exactly for N = 1, and runs the Monte-Carlo
checks of the ball-volume and growth estimates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

import mpmath
import numpy as np

from . import montecarlo
from .polytopes import HPolytope, is_bounded, is_empty, volume
from .weights import Character

_XI_DPS = 30


@dataclass(frozen=True)
class SymplecticSpec:
    N: int
    d: tuple[int, ...]

    def __post_init__(self):
        d = tuple(int(x) for x in self.d)
        object.__setattr__(self, "d", d)
        if self.N < 1:
            raise ValueError("N must be positive")
        if len(d) != self.N:
            raise ValueError(f"need exactly N={self.N} values of d, got {len(d)}")
        if any(x <= 0 for x in d) or len(set(d)) != len(d):
            raise ValueError("d must be distinct positive integers")

    @property
    def size(self) -> int:
        return 2 * self.N

    def base_point(self) -> np.ndarray:
        """``diag(d_1..d_N, -d_N..-d_1)``."""
        return np.diag(list(self.d) + [-x for x in reversed(self.d)]).astype(np.int64)

    def to_record(self) -> dict:
        return {"N": self.N, "d": list(self.d)}


def antidiagonal(n: int) -> np.ndarray:
    return np.fliplr(np.eye(n, dtype=np.int64))


def symplectic_form(N: int) -> np.ndarray:
    """``[[0, J_N], [-J_N, 0]]`` with ``J_N`` the antidiagonal of ones."""
    if N < 1:
        raise ValueError("N must be positive")
    J = antidiagonal(N)
    Z = np.zeros((N, N), dtype=np.int64)
    return np.block([[Z, J], [-J, Z]])


def _check_shape(X, N: int) -> np.ndarray:
    X = np.asarray(X)
    if X.shape != (2 * N, 2 * N):
        raise ValueError(f"expected a {2 * N}x{2 * N} matrix, got shape {X.shape}")
    return X


def in_lie_algebra(X, N: int, tol: float = 0.0) -> bool:
    """``X^T J + J X == 0`` (exactly for integer input, else within ``tol``)."""
    X = _check_shape(X, N)
    J = symplectic_form(N)
    res = X.T @ J + J @ X
    if X.dtype.kind in "iu" or X.dtype == object:
        return not np.any(res != 0)
    return bool(np.max(np.abs(res)) <= tol)


def charpoly(X) -> list[int | Fraction]:
    """Coefficients of ``det(tI - X)``, leading first (Faddeev-LeVerrier, exact)."""
    A = [[Fraction(int(x)) if float(x).is_integer() else Fraction(x) for x in row]
         for row in np.asarray(X).tolist()]
    n = len(A)
    coeffs = [Fraction(1)]
    M = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        # M_k = A M_{k-1} + c_{k-1} I ; c_k = -tr(A M_k) / k
        M = [[sum(A[i][l] * M[l][j] for l in range(n)) + (coeffs[-1] if i == j else 0)
              for j in range(n)] for i in range(n)]
        AM_trace = sum(sum(A[i][l] * M[l][i] for l in range(n)) for i in range(n))
        coeffs.append(-AM_trace / k)
    return [int(c) if c.denominator == 1 else c for c in coeffs]


def target_polynomial(spec: SymplecticSpec) -> list[int]:
    """Coefficients of ``prod (t^2 - d_i^2)``, leading first."""
    poly = [1]
    for di in spec.d:
        nxt = [0] * (len(poly) + 2)
        for i, c in enumerate(poly):
            nxt[i] += c
            nxt[i + 2] -= c * di * di
        poly = nxt
    return poly


def in_variety(X, spec: SymplecticSpec) -> bool:
    X = _check_shape(X, spec.N)
    if not in_lie_algebra(X, spec.N):
        return False
    return charpoly(X) == target_polynomial(spec)


@dataclass(frozen=True)
class IsotropicSet:
    I: tuple[int, ...]
    J: tuple[int, ...]
    Jprime: tuple[int, ...]

    @classmethod
    def from_indices(cls, I: Iterable[int], N: int) -> "IsotropicSet":
        I = tuple(sorted(set(int(i) for i in I)))
        if not I or I[0] < 1 or I[-1] > 2 * N:
            raise ValueError(f"{I} is not a nonempty subset of 1..{2 * N}")
        J = tuple(i for i in I if i <= N)
        Jp = tuple(sorted(2 * N + 1 - i for i in I if i > N))
        if set(J) & set(Jp):
            raise ValueError(f"{I} is not isotropic")
        return cls(I, J, Jp)


def isotropic_subsets(N: int) -> list[IsotropicSet]:
    """All nonempty ``J u (2N+1-J')`` with ``J, J'`` disjoint in ``1..N``; ``3^N - 1`` of them."""
    out = []
    for tags in product((0, 1, 2), repeat=N):
        if not any(tags):
            continue
        J = tuple(j + 1 for j, t in enumerate(tags) if t == 1)
        Jp = tuple(j + 1 for j, t in enumerate(tags) if t == 2)
        I = tuple(sorted(J + tuple(2 * N + 1 - j for j in Jp)))
        out.append(IsotropicSet(I, J, Jp))
    return sorted(out, key=lambda s: (len(s.I), s.I))


def c_of(I: IsotropicSet | Sequence[int]) -> int:
    idx = sorted(I.I if isinstance(I, IsotropicSet) else I)
    return sum(i - lam for lam, i in enumerate(idx, start=1))


def weight_of(I: IsotropicSet | Sequence[int], N: int) -> Character:
    """Torus character on ``e_I``: ``+1`` on ``J``, ``-1`` on ``J'``."""
    if not isinstance(I, IsotropicSet):
        I = IsotropicSet.from_indices(I, N)
    w = [0] * N
    for j in I.J:
        w[j - 1] += 1
    for j in I.Jprime:
        w[j - 1] -= 1
    return Character(tuple(w))


def xi(z) -> mpmath.mpf:
    """Completed zeta ``pi^(-z/2) Gamma(z/2) zeta(z)``."""
    with mpmath.workdps(_XI_DPS):
        z = mpmath.mpf(z)
        return +(mpmath.pi ** (-z / 2) * mpmath.gamma(z / 2) * mpmath.zeta(z))


def torus_haar_constant(N: int) -> float:
    """``2^((N^2+N)/2 - 1) / prod_{k<=N} xi(2k)``."""
    with mpmath.workdps(_XI_DPS):
        den = mpmath.fprod(xi(2 * k) for k in range(1, N + 1))
        return float(mpmath.mpf(2) ** (Fraction(N * N + N, 2) - 1) / den)


def c1_polytope(N: int) -> HPolytope:
    """``{t : <w_I, t> >= -c_I for every isotropic I}`` in Lie(H) = R^N."""
    return HPolytope(N, tuple((weight_of(I, N).coords, -c_of(I)) for I in isotropic_subsets(N)))


def c1_polytope_volume(N: int) -> Fraction:
    P = c1_polytope(N)
    if is_empty(P) or not is_bounded(P):
        raise ArithmeticError("torus polytope must be bounded and nonempty")
    return volume(P)


def constant_C1(spec: SymplecticSpec | int) -> float:
    N = spec.N if isinstance(spec, SymplecticSpec) else int(spec)
    if N > 3:
        raise ValueError("C1 is only computed for N <= 3")
    return torus_haar_constant(N) * float(c1_polytope_volume(N))


def jacobian_divisor(spec: SymplecticSpec) -> int:
    """``|prod_{i<j} (d_j - d_i) * prod_{i<=j} (d_j + d_i)|``."""
    d = spec.d
    out = 1
    for i in range(spec.N):
        for j in range(i, spec.N):
            if i < j:
                out *= d[j] - d[i]
            out *= d[j] + d[i]
    return abs(out)


def unit_ball_volume(n: int) -> float:
    """``pi^(n/2) / Gamma(n/2 + 1)``, via factorials so that small cases are exact."""
    k, odd = divmod(n, 2)
    if not odd:
        return math.pi ** k / math.factorial(k)
    return 2 ** n * math.factorial(k) * math.pi ** k / math.factorial(n)


def quadric_region_volume(N: int) -> float:
    """Closed-form volume of ``2 sum y^2 + 2 sum_{>} z^2 + sum_{=} z^2 <= 1``."""
    return unit_ball_volume(N * N) * 2.0 ** (-(N * N - N) / 2)


def constant_C2(spec: SymplecticSpec) -> float:
    return quadric_region_volume(spec.N) / jacobian_divisor(spec)


def asymptotic_N_R(spec: SymplecticSpec, R: float) -> float:
    if R <= 1:
        raise ValueError("R must exceed 1")
    return constant_C1(spec) * constant_C2(spec) * R ** (spec.N ** 2) * math.log(R) ** spec.N


# -- coordinates on U . x0 ---------------------------------------------------

@dataclass(frozen=True)
class UnipotentCoords:
    """Index layout of the ``(y, z)`` coordinates.

    ``y[(i, j)]`` for ``i < j <= N`` is the entry ``(i, j)`` of the upper-left
    block; ``z[(i, j)]`` for ``i + j >= N + 1`` is the entry ``(i, j)`` of the
    upper-right block (the rest of that block is fixed by ``Z J`` symmetric).
    """
    N: int

    @property
    def y_keys(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(1, self.N + 1) for j in range(i + 1, self.N + 1)]

    @property
    def z_keys(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(1, self.N + 1) for j in range(1, self.N + 1)
                if i + j >= self.N + 1]

    @property
    def dim(self) -> int:
        return self.N * self.N

    def frobenius_weights(self) -> np.ndarray:
        """How many times each coordinate appears in the matrix (its weight in ``||X||^2``)."""
        w = [2.0] * len(self.y_keys)
        w += [1.0 if i + j == self.N + 1 else 2.0 for i, j in self.z_keys]
        return np.array(w)

    def superdiagonal_indices(self) -> list[int]:
        """Coordinates sitting on the superdiagonal of the 2N x 2N matrix."""
        ys = self.y_keys
        out = [ys.index((i, i + 1)) for i in range(1, self.N)]
        out.append(len(ys) + self.z_keys.index((self.N, 1)))
        return out

    def matrix(self, spec: SymplecticSpec, coords: Sequence[float]) -> np.ndarray:
        N = self.N
        coords = list(coords)
        Y = np.zeros((N, N), dtype=object if _exactish(coords) else float)
        for k in range(N):
            Y[k, k] = spec.d[k]
        for val, (i, j) in zip(coords, self.y_keys):
            Y[i - 1, j - 1] = val
        Z = np.zeros((N, N), dtype=Y.dtype)
        for val, (i, j) in zip(coords[len(self.y_keys):], self.z_keys):
            Z[i - 1, j - 1] = val
            Z[N - j, N - i] = val  # Z[i,j] = Z[N+1-j, N+1-i]
        J = antidiagonal(N)
        lower = -(J @ Y.T @ J)
        top = np.concatenate([Y, Z], axis=1)
        bottom = np.concatenate([np.zeros((N, N), dtype=Y.dtype), lower], axis=1)
        return np.concatenate([top, bottom], axis=0)


def _exactish(coords) -> bool:
    return all(isinstance(c, (int, Fraction, np.integer)) for c in coords)


def unipotent_from_matrix(X: np.ndarray) -> np.ndarray:
    """The upper unitriangular ``u`` with ``u diag(X) u^-1 = X`` (``X`` upper triangular)."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    lam = np.diag(X)
    u = np.eye(n)
    for i in range(n):
        for k in range(i - 1, -1, -1):
            s = X[k, k + 1:i + 1] @ u[k + 1:i + 1, i]
            u[k, i] = -s / (X[k, k] - lam[i])
    return u


def wedge_norm(u: np.ndarray, I: IsotropicSet | Sequence[int]) -> float:
    """``||u e_I||`` in the exterior power: ``sqrt(det(A^T A))`` with ``A = u[:, I]``."""
    idx = [i - 1 for i in (I.I if isinstance(I, IsotropicSet) else I)]
    A = u[:, idx]
    g = A.T @ A
    return math.sqrt(max(np.linalg.det(g), 0.0))


# -- exact counting at N = 1 -------------------------------------------------

def _count_for_a(a: int, d2: int, r2) -> int:
    """Number of (b, c) with ``bc = d^2 - a^2`` and ``b^2 + c^2 <= r2``."""
    n = d2 - a * a
    if n == 0:
        # b = 0 or c = 0
        if r2 < 0:
            return 0
        k = _floor_sqrt(r2)
        return 2 * (2 * k + 1) - 1
    m = abs(n)
    total = 0
    p = 1
    while p * p <= m:
        if m % p == 0:
            q = m // p
            if p * p + q * q <= r2:
                total += 2 if p == q else 4
        p += 1
    return total


def _floor_sqrt(x) -> int:
    if isinstance(x, int):
        return math.isqrt(x) if x >= 0 else -1
    x = Fraction(x)
    k = math.isqrt(x.numerator // x.denominator)
    while (k + 1) ** 2 <= x:
        k += 1
    return k


def count_points_N1(spec: SymplecticSpec, R) -> int:
    """Exact number of integer ``[[a, b], [c, -a]]`` with ``a^2 + bc = d^2`` and norm ``<= R``."""
    if spec.N != 1:
        raise ValueError("brute-force counting is only implemented for N = 1")
    R = Fraction(R)
    R2 = R * R
    if R2.denominator == 1:
        R2 = R2.numerator
    d2 = spec.d[0] ** 2
    total = 0
    a = 0
    while 2 * a * a <= R2:
        r2 = R2 - 2 * a * a
        c = _count_for_a(a, d2, r2)
        total += c if a == 0 else 2 * c
        a += 1
    return total


def enumerate_points_N1(spec: SymplecticSpec, R) -> list[np.ndarray]:
    """The counted matrices themselves (small ``R`` only)."""
    d2 = spec.d[0] ** 2
    R2 = Fraction(R) ** 2
    out = []
    amax = _floor_sqrt(R2 / 2)
    for a in range(-amax, amax + 1):
        n = d2 - a * a
        r = _floor_sqrt(R2 - 2 * a * a)
        for b in range(-r, r + 1):
            if b == 0:
                if n == 0:
                    for c in range(-r, r + 1):
                        if 2 * a * a + c * c <= R2:
                            out.append(np.array([[a, 0], [c, -a]]))
                continue
            if n % b == 0:
                c = n // b
                if 2 * a * a + b * b + c * c <= R2:
                    out.append(np.array([[a, b], [c, -a]]))
    return out


@dataclass
class CountSeries:
    R: list[float]
    count: list[int]
    N_R: list[float]

    @property
    def fitted_constant(self) -> list[float]:
        """``count / (R^(N^2) (ln R)^N)``; at N = 1 this is ``count / (R ln R)``."""
        return [c / (r * math.log(r)) for r, c in zip(self.R, self.count)]

    def rows(self):
        for r, c, nr in zip(self.R, self.count, self.N_R):
            yield r, c, nr, c / nr


def count_series(spec: SymplecticSpec, R_list: Iterable) -> CountSeries:
    rs = list(R_list)
    return CountSeries([float(r) for r in rs], [count_points_N1(spec, r) for r in rs],
                       [asymptotic_N_R(spec, float(r)) for r in rs])


# -- Monte-Carlo checks -----------------------------------------------------

def _ball_box(coords: UnipotentCoords, R: float) -> tuple[np.ndarray, np.ndarray]:
    half = R / np.sqrt(coords.frobenius_weights())
    return -half, half


def quadric_volume_mc(N: int, samples: int, seed: int, threads: int = 1) -> tuple[float, float]:
    """Rejection estimate of the unit quadric region's volume, with standard error."""
    coords = UnipotentCoords(N)
    w = coords.frobenius_weights()
    lo, hi = _ball_box(coords, 1.0)
    return montecarlo.box_volume_estimate(lambda x: (x * x) @ w <= 1.0, lo, hi,
                                          samples, seed, threads)


@dataclass
class BallRatio:
    ratio_BRe_BR: float
    ratio_BR_C2RN2: float
    mu_BR: float
    se_mu_BR: float


def ball_ratio_mc(spec: SymplecticSpec, R: float, epsilon: float, samples: int, seed: int,
                  threads: int = 1) -> BallRatio:
    """``mu_U(B_{R,eps}) / mu_U(B_R)`` and ``mu_U(B_R) / (C2 R^(N^2))`` by rejection sampling.

    Samples are uniform in a box around ``B_R`` in the ``(y, z)`` coordinates;
    Haar measure is Lebesgue divided by the Jacobian divisor.
    """
    coords = UnipotentCoords(spec.N)
    w = coords.frobenius_weights()
    sup = coords.superdiagonal_indices()
    lo, hi = _ball_box(coords, R)
    shift = 2.0 * sum(x * x for x in spec.d)
    R2 = R * R

    def count(rng, n):
        x = lo + (hi - lo) * rng.random((n, lo.size))
        inside = (x * x) @ w + shift <= R2
        floor = np.all(np.abs(x[:, sup]) >= epsilon * R, axis=1) if epsilon > 0 else inside
        return int(inside.sum()), int((inside & floor).sum())

    parts = montecarlo.chunked(count, samples, seed, threads)
    hits = sum(p[0] for p in parts)
    hits_e = sum(p[1] for p in parts)
    box = float(np.prod(hi - lo))
    p = hits / samples
    mu = box * p / jacobian_divisor(spec)
    se = box * math.sqrt(p * (1 - p) / samples) / jacobian_divisor(spec)
    return BallRatio(hits_e / hits if hits else float("nan"),
                     mu / (constant_C2(spec) * R ** (spec.N ** 2)), mu, se)


def sample_ball(spec: SymplecticSpec, R: float, epsilon: float, samples: int, seed: int,
                threads: int = 1) -> np.ndarray:
    """Uniform points of ``B_{R,eps}`` in ``(y, z)`` coordinates, by rejection."""
    coords = UnipotentCoords(spec.N)
    w = coords.frobenius_weights()
    sup = coords.superdiagonal_indices()
    lo, hi = _ball_box(coords, R)
    shift = 2.0 * sum(x * x for x in spec.d)

    def draw(rng, n):
        x = lo + (hi - lo) * rng.random((n, lo.size))
        ok = ((x * x) @ w + shift <= R * R) & np.all(np.abs(x[:, sup]) >= epsilon * R, axis=1)
        return x[ok]

    out: list[np.ndarray] = []
    got, k = 0, 0
    batch = max(4 * samples, 1 << 12)
    while got < samples:
        # successive rounds use disjoint stream indices
        chunk = np.concatenate(montecarlo.chunked(lambda rng, n: draw(rng, n), batch,
                                                  seed + 7919 * k, threads))
        out.append(chunk)
        got += len(chunk)
        k += 1
        if k > 1000:
            raise ArithmeticError("rejection sampling accepted too few points")
    return np.concatenate(out)[:samples]


@dataclass
class GrowthReport:
    N: int
    R: list[float]
    epsilon_prime: float
    # per R: max over samples and I of |ln||u e_I|| / ln R - c_I|
    max_normalized_deviation: list[float]
    # per R: max over samples and I of |ln||u e_I|| - c_I ln R|
    max_absolute_deviation: list[float]
    # per R: max over samples and I of ln||u e_I|| / ln R
    max_log_ratio: list[float]

    @property
    def bounded(self) -> bool:
        """Normalized deviation at the top of the ladder is at most 1.5x the bottom."""
        a = self.max_normalized_deviation
        return a[-1] <= 1.5 * a[0]


def growth_deviations(spec: SymplecticSpec, points: np.ndarray, R: float) -> np.ndarray:
    """Array ``[sample, I]`` of ``ln||u e_I|| - c_I ln R``."""
    coords = UnipotentCoords(spec.N)
    sets = isotropic_subsets(spec.N)
    cs = np.array([c_of(I) for I in sets], dtype=float)
    out = np.empty((len(points), len(sets)))
    for s, p in enumerate(points):
        u = unipotent_from_matrix(coords.matrix(spec, p))
        out[s] = [math.log(wedge_norm(u, I)) for I in sets]
    return out - cs * math.log(R)


def default_spec(N: int) -> SymplecticSpec:
    return SymplecticSpec(N, tuple(range(1, N + 1)))


def growth_estimate_check(N: int, samples: int, R_list: Sequence[float], epsilon_prime: float,
                          seed: int, spec: SymplecticSpec | None = None,
                          threads: int = 1) -> GrowthReport:
    """Empirical check that ``ln||u e_I|| = c_I ln R + O(1)`` on ``B_{R, eps'}``."""
    if N > 2:
        raise ValueError("growth check is desk-scale: N <= 2")
    spec = spec or default_spec(N)
    norm_dev, abs_dev, log_ratio = [], [], []
    for k, R in enumerate(R_list):
        pts = sample_ball(spec, R, epsilon_prime, samples, seed + k, threads)
        dev = growth_deviations(spec, pts, R)
        lnR = math.log(R)
        abs_dev.append(float(np.max(np.abs(dev))))
        norm_dev.append(float(np.max(np.abs(dev))) / lnR)
        cs = np.array([c_of(I) for I in isotropic_subsets(N)], dtype=float)
        log_ratio.append(float(np.max((dev + cs * lnR) / lnR)))
    return GrowthReport(N, [float(r) for r in R_list], epsilon_prime, norm_dev, abs_dev, log_ratio)


def crafted_degenerate_point(spec: SymplecticSpec, R: float) -> np.ndarray:
    """A point of ``B_R`` with ``y_12 = 0`` and all other coordinates at scale ``R``."""
    coords = UnipotentCoords(spec.N)
    w = coords.frobenius_weights()
    x = np.full(coords.dim, 1.0)
    if spec.N >= 2:
        x[coords.y_keys.index((1, 2))] = 0.0
    budget = R * R - 2.0 * sum(v * v for v in spec.d)
    x *= math.sqrt(0.5 * budget / float((x * x) @ w))
    return x
