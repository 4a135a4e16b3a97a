import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from omegakit import polytopes
from omegakit import sp_counting as sp
from omegakit.sp_counting import SymplecticSpec

from oracles import naive_count_N1, xi_even_closed_form


def test_symplectic_form_examples():
    assert sp.symplectic_form(1).tolist() == [[0, 1], [-1, 0]]
    J = sp.symplectic_form(3)
    assert (J.T == -J).all() and (J @ J == -np.eye(6)).all()


def test_lie_algebra_examples():
    for N, d in ((1, (1,)), (2, (1, 2)), (3, (1, 2, 5))):
        spec = SymplecticSpec(N, d)
        assert sp.in_lie_algebra(spec.base_point(), N)
        assert not sp.in_lie_algebra(np.eye(2 * N, dtype=np.int64), N)
        assert sp.in_lie_algebra(np.zeros((2 * N, 2 * N), dtype=np.int64), N)
    with pytest.raises(ValueError):
        sp.in_lie_algebra(np.zeros((3, 3)), 1)


def test_variety_examples():
    spec = SymplecticSpec(2, (1, 2))
    x0 = spec.base_point()
    assert x0.tolist() == np.diag([1, 2, -2, -1]).tolist()
    assert sp.in_variety(x0, spec)
    e12 = np.zeros_like(x0)
    e12[0, 1] = 1
    assert not sp.in_variety(x0 + e12, spec)
    broken = x0.copy()
    broken[0, 1] += 1
    broken[2, 3] -= 1  # keeps X in the Lie algebra, changes nothing on the diagonal
    assert sp.in_lie_algebra(broken, 2)
    assert sp.in_variety(broken, spec)  # still upper triangular: same eigenvalues
    broken[1, 0] = 1
    broken[3, 2] = -1
    assert sp.in_lie_algebra(broken, 2)
    assert not sp.in_variety(broken, spec)


def test_charpoly_convention():
    # det(tI - X), leading first
    assert sp.charpoly(np.array([[1, 0], [0, -1]])) == [1, 0, -1]
    assert sp.target_polynomial(SymplecticSpec(2, (1, 2))) == [1, 0, -5, 0, 4]


def random_symplectic(rng, N, words=8):
    """Product of integral symplectic transvections ``x -> x + k w(x, v) v``."""
    J = sp.symplectic_form(N)
    g = np.eye(2 * N, dtype=np.int64)
    ginv = np.eye(2 * N, dtype=np.int64)
    for _ in range(words):
        v = np.zeros(2 * N, dtype=np.int64)
        idx = rng.choice(2 * N, size=int(rng.integers(1, 3)), replace=False)
        v[idx] = rng.choice([-1, 1], size=len(idx))
        k = int(rng.choice([-1, 1]))
        T = np.eye(2 * N, dtype=np.int64) + k * np.outer(v, v) @ J.T
        Tinv = np.eye(2 * N, dtype=np.int64) - k * np.outer(v, v) @ J.T
        g, ginv = T @ g, ginv @ Tinv
    assert (g.T @ J @ g == J).all() and (g @ ginv == np.eye(2 * N)).all()
    return g, ginv


@pytest.mark.parametrize("N,d", [(1, (1,)), (1, (3,)), (2, (1, 2)), (2, (1, 3))])
def test_variety_conjugation_invariance(N, d):
    rng = np.random.default_rng(N * 100 + sum(d))
    spec = SymplecticSpec(N, d)
    x0 = spec.base_point()
    for _ in range(20):
        g, ginv = random_symplectic(rng, N)
        X = g @ x0 @ ginv
        assert sp.in_variety(X, spec)
        assert sp.in_lie_algebra(X, N)


def brute_isotropic(N):
    J = sp.symplectic_form(N)
    out = []
    for k in range(1, N + 1):
        for S in itertools.combinations(range(1, 2 * N + 1), k):
            if all(J[i - 1, j - 1] == 0 for i in S for j in S):
                out.append(S)
    return sorted(out)


@pytest.mark.parametrize("N", [1, 2, 3, 4, 5])
def test_isotropic_subsets(N):
    sets = sp.isotropic_subsets(N)
    assert len(sets) == 3 ** N - 1
    assert sorted(s.I for s in sets) == brute_isotropic(N)


def test_isotropic_examples():
    assert [s.I for s in sp.isotropic_subsets(1)] == [(1,), (2,)]
    assert sp.c_of((1,)) == 0
    assert sp.c_of((2,)) == 1
    assert sp.c_of((2, 4)) == 3
    assert sp.weight_of((1,), 1).coords == (1,)
    assert sp.weight_of((2,), 1).coords == (-1,)
    assert sp.weight_of((1, 3), 2).coords == (1, -1)
    with pytest.raises(ValueError):
        sp.IsotropicSet.from_indices((1, 4), 2)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_xi_against_bernoulli(k):
    assert float(sp.xi(2 * k)) == pytest.approx(xi_even_closed_form(k), rel=1e-14)


def test_xi_small_values():
    assert float(sp.xi(2)) == pytest.approx(math.pi / 6, rel=1e-15)
    assert float(sp.xi(4)) == pytest.approx(math.pi ** 2 / 90, rel=1e-15)


def test_C1_examples():
    p = sp.c1_polytope(1)
    assert polytopes.vertices(p) == [(0,), (1,)]
    assert sp.constant_C1(SymplecticSpec(1, (1,))) == pytest.approx(6 / math.pi, rel=1e-14)
    assert sp.constant_C1(SymplecticSpec(2, (1, 2))) == sp.constant_C1(SymplecticSpec(2, (3, 7)))


@pytest.mark.parametrize("N", [1, 2, 3])
def test_C1_polytope_bounded_nonempty(N):
    p = sp.c1_polytope(N)
    assert not polytopes.is_empty(p) and polytopes.is_bounded(p)
    assert sp.c1_polytope_volume(N) > 0


def test_C2_examples():
    assert sp.jacobian_divisor(SymplecticSpec(1, (3,))) == 6
    assert sp.constant_C2(SymplecticSpec(1, (3,))) == pytest.approx(1 / 3, rel=1e-15)
    assert sp.constant_C2(SymplecticSpec(1, (1,))) == 1.0
    spec = SymplecticSpec(2, (1, 2))
    assert sp.jacobian_divisor(spec) == 24
    assert sp.constant_C2(spec) == pytest.approx(math.pi ** 2 / 96, rel=1e-15)


@pytest.mark.parametrize("N", [1, 2])
def test_C2_vs_monte_carlo(N):
    vol, se = sp.quadric_volume_mc(N, 10**6, seed=N)
    assert abs(vol / sp.quadric_region_volume(N) - 1) <= 0.01


def test_N_R_examples():
    spec = SymplecticSpec(1, (1,))
    assert sp.asymptotic_N_R(spec, math.e) == pytest.approx(6 / math.pi * math.e, rel=1e-14)
    for spec in (SymplecticSpec(1, (1,)), SymplecticSpec(2, (1, 2))):
        R = 1e6
        N = spec.N
        ratio = sp.asymptotic_N_R(spec, 2 * R) / sp.asymptotic_N_R(spec, R)
        assert ratio == pytest.approx(2 ** (N * N) * (math.log(2 * R) / math.log(R)) ** N)
    with pytest.raises(ValueError):
        sp.asymptotic_N_R(spec, 1.0)


def test_count_examples():
    spec = SymplecticSpec(1, (1,))
    assert sp.count_points_N1(spec, 2) == 12
    pts = sp.enumerate_points_N1(spec, 2)
    assert len(pts) == 12
    assert all(sp.in_variety(X, spec) for X in pts)
    assert any((X == np.diag([1, -1])).all() for X in pts)
    counts = [sp.count_points_N1(spec, r) for r in range(1, 40)]
    assert counts == sorted(counts)


@pytest.mark.parametrize("d,R", [(1, 5), (1, 13), (2, 9), (3, 17), (1, 50), (2, 50)])
def test_count_vs_naive(d, R):
    assert sp.count_points_N1(SymplecticSpec(1, (d,)), R) == naive_count_N1(d, R)


def test_count_series_frozen():
    series = sp.count_series(SymplecticSpec(1, (1,)), [2 ** k for k in range(7, 13)])
    assert series.count == [2660, 5964, 13404, 29548, 64372, 139900]


def test_unipotent_coordinates():
    spec = SymplecticSpec(2, (1, 2))
    coords = sp.UnipotentCoords(2)
    rng = np.random.default_rng(0)
    x = rng.normal(size=coords.dim)
    X = coords.matrix(spec, x)
    assert sp.in_lie_algebra(X, 2, tol=1e-12)
    assert np.sum(X * X) == pytest.approx(np.sum(coords.frobenius_weights() * x * x)
                                          + 2 * sum(v * v for v in spec.d))
    u = sp.unipotent_from_matrix(X)
    assert np.allclose(u @ np.diag(np.diag(X)) @ np.linalg.inv(u), X)
    assert np.allclose(np.tril(u, -1), 0) and np.allclose(np.diag(u), 1)
    exact = coords.matrix(spec, [1, 2, 3, 4])
    assert sp.in_variety(exact.astype(np.int64), spec)


def test_ball_ratio_examples():
    br = sp.ball_ratio_mc(SymplecticSpec(1, (1,)), 100.0, 0.0, 10**5, seed=1)
    assert br.ratio_BRe_BR == 1.0
    spec = SymplecticSpec(2, (1, 2))
    ratios = [sp.ball_ratio_mc(spec, 1e3, e, 2 * 10**5, seed=2).ratio_BRe_BR
              for e in (0.2, 0.1, 0.05, 0.0)]
    assert ratios == sorted(ratios) and ratios[-1] == 1.0


def test_growth_trivial_set():
    spec = SymplecticSpec(2, (1, 2))
    pts = sp.sample_ball(spec, 1e3, 0.1, 50, seed=3)
    dev = sp.growth_deviations(spec, pts, 1e3)
    first = [s.I for s in sp.isotropic_subsets(2)].index((1,))
    assert np.allclose(dev[:, first], 0.0, atol=1e-9)


def test_growth_needs_floor():
    spec = SymplecticSpec(2, (1, 2))
    ladder = [1e2, 1e3, 1e4, 1e5]
    crafted = [float(np.max(np.abs(sp.growth_deviations(
        spec, sp.crafted_degenerate_point(spec, R)[None, :], R)))) for R in ladder]
    rep = sp.growth_estimate_check(2, 300, ladder, 0.1, seed=4)
    # without the floor the additive error keeps climbing with ln R
    assert all(b - a > 2 for a, b in zip(crafted, crafted[1:]))
    assert max(rep.max_absolute_deviation) <= 1.5 * min(rep.max_absolute_deviation)
    assert rep.bounded


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31))
def test_mc_thread_independence(seed):
    spec = SymplecticSpec(2, (1, 2))
    a = sp.ball_ratio_mc(spec, 50.0, 0.1, 140_000, seed, threads=1)
    b = sp.ball_ratio_mc(spec, 50.0, 0.1, 140_000, seed, threads=3)
    assert a == b
