import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from omegakit import lattice, polytopes
from omegakit.lattice import ParabolicData, WeightLatticeAction

from oracles import box_shortest_sq_norm, random_lattice_basis


def test_svp_examples():
    for m in (1, 2, 3, 5):
        assert lattice.shortest_vector_norm(np.eye(m)) == 1
    sv = lattice.shortest_vector([[2, 0], [0, 0.5]])
    assert sv.norm == 0.5 and sv.vector in ((0, 1), (0, -1))
    sv = lattice.shortest_vector([[1, 1], [0, 1]])
    assert sv.norm == 1 and sv.vector in ((1, 0), (-1, 0))


def test_svp_errors():
    with pytest.raises(lattice.SingularMatrixError):
        lattice.shortest_vector([[1, 2], [2, 4]])
    with pytest.raises(ValueError):
        lattice.shortest_vector(np.eye(3), norm="taxicab")


def test_sup_norm():
    sv = lattice.shortest_vector([[3, 1], [0, 1]], norm=lattice.SUP)
    assert sv.norm == 1


def unimodular(rng, m, steps=6):
    U = np.eye(m, dtype=np.int64)
    for _ in range(steps):
        i, j = rng.choice(m, size=2, replace=False) if m > 1 else (0, 0)
        if i == j:
            U[:, 0] *= -1
            continue
        U[:, j] += int(rng.integers(-2, 3)) * U[:, i]
    return U


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 3))
def test_svp_matches_box_oracle(seed, m):
    B = random_lattice_basis(np.random.default_rng(seed), m)
    assert lattice.shortest_vector(B).norm_exact == box_shortest_sq_norm(B)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 4))
def test_svp_unimodular_invariance(seed, m):
    rng = np.random.default_rng(seed)
    B = random_lattice_basis(rng, m)
    U = unimodular(rng, m)
    assert lattice.shortest_vector(B @ U).norm_exact == lattice.shortest_vector(B).norm_exact
    for eta in (0.3, 0.7, 1.0, 1.5):
        assert lattice.mahler_membership(B, eta) == lattice.mahler_membership(B @ U, eta)


def test_mahler_examples():
    assert lattice.mahler_membership(np.eye(2), 1)
    assert not lattice.mahler_membership(np.eye(2), 1.01)
    assert lattice.mahler_membership([[2, 0], [0, 0.5]], 0.5)
    assert not lattice.mahler_membership([[2, 0], [0, 0.5]], 0.6)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.floats(0.1, 2), st.floats(0.1, 2))
def test_mahler_antitone(seed, e1, e2):
    B = random_lattice_basis(np.random.default_rng(seed), 2)
    lo, hi = sorted((e1, e2))
    if lattice.mahler_membership(B, hi):
        assert lattice.mahler_membership(B, lo)


SL2_STD = [((1,), [[1], [0]]), ((-1,), [[1], [1]])]


def test_omega_examples():
    act = WeightLatticeAction.from_blocks([((1,), [[1]]), ((-1,), [[1]])])
    p = lattice.omega_polytope(act, 1.0)
    assert polytopes.vertices(p) == [(0,)]
    act = WeightLatticeAction.from_blocks(SL2_STD)
    p = lattice.omega_polytope(act, 1.0)
    assert float(polytopes.volume(p)) == pytest.approx(0.5 * math.log(2), abs=1e-15)
    small = lattice.omega_polytope(act, 0.5)
    assert polytopes.contained_in(p, small)


def test_omega_subset_and_errors():
    act = WeightLatticeAction.from_blocks(SL2_STD)
    assert len(lattice.omega_polytope(act, 1.0, phi_subset=[(1,)]).constraints) == 1
    with pytest.raises(ValueError):
        lattice.omega_polytope(act, 1.0, phi_subset=[(2,)])
    with pytest.raises(ValueError):
        lattice.omega_polytope(act, 0.0)
    with pytest.raises(ValueError):
        WeightLatticeAction.from_blocks([((1,), [[1]]), ((1,), [[2]])])


@settings(max_examples=30, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2))
def test_omega_torus_translation(s1, s2):
    act = WeightLatticeAction.from_blocks([((1, 0), [[1, 1], [0, 1]]), ((0, 1), [[2]]),
                                           ((-1, -1), [[0.5, 0], [0, 3]])])
    s = (s1, s2)
    base = lattice.omega_polytope(act, 0.7)
    moved = lattice.omega_polytope(act.torus_translate(s), 0.7)
    expected = base.translate([-s1, -s2])
    for (a, b), (a2, b2) in zip(moved.constraints, expected.constraints):
        assert a == a2
        assert float(b) == pytest.approx(float(b2), abs=1e-12)


def test_parabolic_examples():
    p = lattice.parabolic_omega(ParabolicData.of(("P1", (1,), 1)), 1.0)
    assert p.constraints == (((1,), 0),)
    p = lattice.parabolic_omega(ParabolicData.of(("P+", (2,), 1), ("P-", (-2,), 1)), 1.0)
    assert polytopes.vertices(p) == [(0,)]
    with pytest.raises(ValueError):
        ParabolicData.of(("P", (1,), 0))


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 10))
def test_parabolic_scaling(c):
    data = ParabolicData.of(("P1", (1, 0), 2.0), ("P2", (-1, 1), 0.5), ("P3", (0, -1), 1.0))
    a = lattice.parabolic_omega(data.scaled(c), 0.3)
    b = lattice.parabolic_omega(data, 0.3 / c)
    for (x, u), (y, v) in zip(a.constraints, b.constraints):
        assert x == y and float(u) == pytest.approx(float(v), abs=1e-12)
