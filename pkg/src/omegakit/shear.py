"""The SL(2) wrapping-cord example and shearing of a divergent geodesic in SO(n, 1).

Part one: the translated torus orbit in the model ``R x R/Z`` is the curve
``y = n e^(-2x)``; equidistribution amounts to the decay of
``int f(x) exp(2 pi i m n e^(-2x)) dx`` as ``n`` grows.

Part two: closed-form hyperbolic geometry for ``Q = x_1^2 + ... + x_n^2 - y^2``
(hyperboloid to upper half-space, ``a_t``, ``u_v``) and the conjugation limit
``u_{-v_k} a_{t_k} u_{v_k} -> u_{lambda v}``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
import numpy as np

QUAD_TOL = 1e-8


@dataclass(frozen=True)
class BumpFunction:
    """``(4 s (1 - s))^order`` on ``[x0, x1]`` with ``s`` the rescaled variable; zero outside.

    ``order = 3`` is the cubic bump (C^2, peak value 1).
    """
    x0: float = 0.0
    x1: float = 1.0
    order: int = 3

    def __post_init__(self):
        if not self.x1 > self.x0:
            raise ValueError("empty support")
        if self.order < 1:
            raise ValueError("order must be at least 1")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        s = (x - self.x0) / (self.x1 - self.x0)
        inside = (s > 0) & (s < 1)
        return np.where(inside, (4.0 * s * (1.0 - s)) ** self.order, 0.0)

    def integral(self) -> Fraction:
        """Exact ``int f``: ``(x1 - x0) 4^k (k!)^2 / (2k+1)!`` (exact when the support is rational)."""
        k = self.order
        beta = Fraction(math.factorial(k) ** 2, math.factorial(2 * k + 1))
        return Fraction(self.x1 - self.x0) * 4 ** k * beta


def _phase_breaks(x0: float, x1: float, freq: float) -> np.ndarray:
    """Points where ``freq * e^(-2x)`` crosses half-integers, plus the endpoints."""
    hi_val, lo_val = freq * math.exp(-2 * x0), freq * math.exp(-2 * x1)
    k_lo, k_hi = math.floor(2 * lo_val) + 1, math.ceil(2 * hi_val) - 1
    if k_hi < k_lo:
        return np.array([x0, x1])
    ks = np.arange(k_lo, k_hi + 1, dtype=float) / 2
    inner = -0.5 * np.log(ks / freq)
    return np.unique(np.concatenate([[x0], inner[(inner > x0) & (inner < x1)], [x1]]))


# Gauss-Kronrod 7/15 on [-1, 1]
_GK_NODES = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0])
_GK_WK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_GK_WG = np.array([0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                   0.381830050505118944950369775488975, 0.417959183673469387755102040816327])
_X15 = np.concatenate([-_GK_NODES[:-1], _GK_NODES[::-1]])
_WK15 = np.concatenate([_GK_WK[:-1], _GK_WK[::-1]])
_WG15 = np.zeros(15)
_WG15[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_GK_WG[:-1], _GK_WG[::-1]])


def gauss_kronrod(fn: Callable[[np.ndarray], np.ndarray], breaks: np.ndarray, tol: float,
                  max_rounds: int = 60) -> tuple[complex, float]:
    """Adaptive G7/K15 over the intervals given by ``breaks``; ``fn`` is vectorized.

    Intervals whose Kronrod-Gauss difference exceeds their share of ``tol``
    (proportional to length) are bisected until the total estimate is below
    ``tol``. Returns ``(integral, error_estimate)``.
    """
    a, b = breaks[:-1].astype(float), breaks[1:].astype(float)
    total_len = float(breaks[-1] - breaks[0])
    done = 0.0 + 0.0j
    done_err = 0.0
    for _ in range(max_rounds):
        mid, half = (a + b) / 2, (b - a) / 2
        x = mid[:, None] + half[:, None] * _X15[None, :]
        fx = fn(x)
        k = (fx * _WK15).sum(axis=1) * half
        g = (fx * _WG15).sum(axis=1) * half
        err = np.abs(k - g)
        ok = err <= 0.5 * tol * (b - a) / total_len
        done += complex(np.sum(k[ok]))
        done_err += float(np.sum(err[ok]))
        if ok.all():
            return done, done_err
        a, b = a[~ok], b[~ok]
        m = (a + b) / 2
        a, b = np.concatenate([a, m]), np.concatenate([m, b])
    raise ArithmeticError("adaptive quadrature did not converge")


def oscillatory_integral(f: BumpFunction, m: int, n: float, tol: float = QUAD_TOL) -> complex:
    """``int f(x) exp(2 pi i m n e^(-2x)) dx`` to absolute error ``tol``.

    The support is cut wherever the phase advances by half a turn, and the
    pieces are integrated by adaptive Gauss-Kronrod.
    """
    freq = m * n
    breaks = _phase_breaks(f.x0, f.x1, abs(freq)) if freq else np.array([f.x0, f.x1])
    def integrand(x):
        return f(x) * np.exp(2j * np.pi * freq * np.exp(-2 * x))

    value, _ = gauss_kronrod(integrand, breaks, tol)
    return value


@dataclass(frozen=True)
class Mode:
    """A test function ``g`` paired with a frequency ``m`` on the circle."""
    m: int
    g: Callable[[np.ndarray], np.ndarray]


def default_modes(window: tuple[float, float] = (0.0, 1.0)) -> list[Mode]:
    g = BumpFunction(window[0], window[1], 3)
    return [Mode(m, g) for m in (1, 2, 3)]


def _window_mean(g, x0: float, x1: float) -> float:
    if isinstance(g, BumpFunction) and (g.x0, g.x1) == (x0, x1):
        return float(g.integral()) / (x1 - x0)
    value, _ = gauss_kronrod(lambda x: g(x) + 0j, np.linspace(x0, x1, 65), 1e-12)
    return value.real / (x1 - x0)


def wrap_curve_discrepancy(n: float, x_window: tuple[float, float] = (0.0, 1.0),
                           num_points: int = 1_000_000,
                           test_modes: Sequence[Mode] | None = None) -> float:
    """Max over modes of ``|mean g(x) e(m y) - delta_{m0} mean g|`` along ``y = frac(n e^(-2x))``.

    ``x`` runs over the midpoints of a uniform grid on the window.
    """
    if num_points < 1000:
        raise ValueError("num_points must be at least 1000")
    modes = list(test_modes) if test_modes is not None else default_modes(x_window)
    x0, x1 = x_window
    h = (x1 - x0) / num_points
    x = x0 + h * (np.arange(num_points) + 0.5)
    y = np.mod(n * np.exp(-2 * x), 1.0)
    worst = 0.0
    for mode in modes:
        gx = mode.g(x)
        emp = np.mean(gx * np.exp(2j * np.pi * mode.m * y))
        target = _window_mean(mode.g, x0, x1) if mode.m == 0 else 0.0
        worst = max(worst, float(abs(emp - target)))
    return worst


# -- hyperbolic geometry -------------------------------------------------------

def lorentz_form(n: int) -> np.ndarray:
    return np.diag([1.0] * n + [-1.0])


def quadratic_form(p: Sequence[float]) -> float:
    p = np.asarray(p, dtype=float)
    return float(p[:-1] @ p[:-1] - p[-1] ** 2)


class OffHyperboloidError(ValueError):
    pass


def hyperboloid_to_halfspace(p: Sequence[float], tol: float = 1e-12) -> np.ndarray:
    """Map ``{Q = -1, y > 0}`` to the upper half-space via the ball model."""
    p = np.asarray(p, dtype=float)
    y = p[-1]
    if not y > 0 or abs(quadratic_form(p) + 1) > tol * max(1.0, y * y):
        raise OffHyperboloidError("point is not on the upper sheet of Q = -1")
    x = p[:-1] / (1 + y)
    e = np.zeros_like(x)
    e[-1] = 1.0
    w = x + e
    return 2 * w / (w @ w) - e


def a_t_matrix(t: float, n: int) -> np.ndarray:
    """Hyperbolic rotation by ``t`` in the last two coordinates of ``R^(n+1)``."""
    M = np.eye(n + 1)
    c, s = math.cosh(t), math.sinh(t)
    M[n - 1, n - 1] = M[n, n] = c
    M[n - 1, n] = M[n, n - 1] = s
    return M


def u_v_matrix(v: Sequence[float]) -> np.ndarray:
    """Unipotent ``u_v`` for ``v`` in ``R^(n-1)`` (an ``(n+1) x (n+1)`` matrix)."""
    v = np.asarray(v, dtype=float)
    k = v.size
    h = float(v @ v) / 2
    M = np.eye(k + 2)
    M[:k, k] = -v
    M[:k, k + 1] = v
    M[k, :k] = v
    M[k + 1, :k] = v
    M[k, k], M[k, k + 1] = 1 - h, h
    M[k + 1, k], M[k + 1, k + 1] = -h, 1 + h
    return M


def sheared_orbit_point(t: float, v: Sequence[float]) -> np.ndarray:
    """Closed form of ``a_t u_v . o`` in the upper half-space."""
    v = np.asarray(v, dtype=float)
    s = float(v @ v)
    et = math.exp(t)
    scale = (2 + 2 * math.cosh(t) + s * et) / (s + (et + 1 + s * et) ** 2)
    return scale * np.append(v, 1.0)


def orbit_point_by_action(t: float, v: Sequence[float]) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = v.size + 1
    base = np.zeros(n + 1)
    base[-1] = 1.0
    return hyperboloid_to_halfspace(a_t_matrix(t, n) @ u_v_matrix(v) @ base, tol=1e-9)


def preserves_form(g: np.ndarray, tol: float = 1e-10) -> bool:
    Q = lorentz_form(g.shape[0] - 1)
    err = np.max(np.abs(g.T @ Q @ g - Q))
    return bool(err <= tol * max(1.0, float(np.max(np.abs(g))) ** 2))


# -- conjugation limit ------------------------------------------------------

@dataclass
class ShearConfig:
    n: int
    v: tuple[float, ...]
    lam: float
    k_list: tuple[float, ...] = (1e2, 1e3, 1e4)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        self.v = tuple(float(x) for x in self.v)
        if len(self.v) != self.n - 1:
            raise ValueError(f"v must have length {self.n - 1}")
        if not math.hypot(*self.v) > 0:
            raise ValueError("v must be nonzero")


@dataclass
class ConjugationReport:
    k: list[float] = field(default_factory=list)
    t: list[float] = field(default_factory=list)
    deviation: list[float] = field(default_factory=list)

    @property
    def decreasing(self) -> bool:
        d = self.deviation
        return all(b <= a for a, b in zip(d, d[1:]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "t_k", "deviation"])
        for k, t, d in zip(self.k, self.t, self.deviation):
            w.writerow([f"{k:.17g}", f"{t:.17g}", f"{d:.17g}"])
        return buf.getvalue()


def _mp_u(v):
    k = len(v)
    h = sum(x * x for x in v) / 2
    M = mpmath.eye(k + 2)
    for i, x in enumerate(v):
        M[i, k], M[i, k + 1] = -x, x
        M[k, i] = M[k + 1, i] = x
    M[k, k], M[k, k + 1] = 1 - h, h
    M[k + 1, k], M[k + 1, k + 1] = -h, 1 + h
    return M


def _mp_a(t, n):
    M = mpmath.eye(n + 1)
    M[n - 1, n - 1] = M[n, n] = mpmath.cosh(t)
    M[n - 1, n] = M[n, n - 1] = mpmath.sinh(t)
    return M


def even_lattice_point(x: Sequence[float]) -> tuple[int, ...]:
    """Nearest point of ``2 Z^d``."""
    return tuple(2 * int(round(c / 2)) for c in x)


def conjugation_limit_check(cfg: ShearConfig, dps: int = 50) -> ConjugationReport:
    """Frobenius distance of ``u_{-v_k} a_{t_k} u_{v_k}`` from ``u_{lam v_k/|v_k|}``.

    ``v_k`` is the point of ``2 Z^(n-1)`` nearest ``k v`` and
    ``t_k = ln(1 + lam / |v_k|)``. Products are formed in ``dps``-digit
    arithmetic: the entries of ``u_{v_k}`` grow like ``k^2`` and cancel.
    """
    norm = math.hypot(*cfg.v)
    vhat = [x / norm for x in cfg.v]
    rep = ConjugationReport()
    with mpmath.workdps(dps):
        for k in cfg.k_list:
            vk = even_lattice_point([k * x for x in vhat])
            nk = mpmath.sqrt(sum(mpmath.mpf(x) ** 2 for x in vk))
            if nk == 0:
                raise ValueError(f"k = {k}: lattice rounding gives the zero vector")
            t = mpmath.log(1 + mpmath.mpf(cfg.lam) / nk)
            M = _mp_u([-mpmath.mpf(x) for x in vk]) * _mp_a(t, cfg.n) * _mp_u([mpmath.mpf(x) for x in vk])
            target = _mp_u([mpmath.mpf(cfg.lam) * x / nk for x in vk])
            dev = mpmath.mnorm(M - target, "f")
            rep.k.append(float(k))
            rep.t.append(float(t))
            rep.deviation.append(float(dev))
    return rep
