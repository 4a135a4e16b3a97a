from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from omegakit import cones
from omegakit.cones import DIVERGES, FunctionalSet
from omegakit.exact import dot

from oracles import positive_circuit_union, positive_relation_lp

CYLINDER = FunctionalSet(3, ((0, 0, 1), (0, 0, -1), (-1, -1, 0), (1, -1, 0), (0, 1, 0)))


def test_phi0_examples():
    bounded = FunctionalSet(3, ((0, 0, 1), (-1, -1, 0), (1, -1, 0), (0, 1, 0)))
    assert cones.compute_phi0(bounded, range(4)) == (1, 2, 3)
    assert cones.compute_phi0(FunctionalSet(1, ((1,),)), [0]) == ()
    assert cones.compute_phi0(FunctionalSet(1, ((1,), (-1,))), [0, 1]) == (0, 1)
    assert cones.compute_phi0(bounded, []) == ()


def test_W_examples():
    W = cones.compute_W([(-1, -1, 0), (1, -1, 0), (0, 1, 0)], 3)
    assert W == ((0, 0, 1),)
    assert len(cones.compute_W([], 3)) == 3
    assert cones.compute_W([(1, 0, 0), (0, 1, 0), (0, 0, 1)], 3) == ()


def test_interior_vector_examples():
    bounded = FunctionalSet(3, ((0, 0, 1), (-1, -1, 0), (1, -1, 0), (0, 1, 0)))
    v = cones.interior_vector(bounded, (1, 2, 3))
    assert v[0] == v[1] == 0 and v[2] > 0
    assert cones.interior_vector(FunctionalSet(1, ((1,),)), ()) == (1,)
    assert cones.interior_vector(FunctionalSet(1, ((1,), (-1,))), (0, 1)) == (0,)
    with pytest.raises(cones.InfeasibleError):
        cones.interior_vector(FunctionalSet(1, ((1,), (-1,))), ())


def test_classify_examples():
    dec = cones.classify_sequence(CYLINDER, [0, DIVERGES, -1, -1, -1])
    assert (dec.phi_inf, dec.phi1, dec.phi0) == ((1,), (0,), (2, 3, 4))
    assert dec.W_basis == ((0, 0, 1),)
    cones.check_decomposition(CYLINDER, dec)

    simplex = FunctionalSet(2, ((1, 0), (0, 1)))
    dec = cones.classify_sequence(simplex, [0, 0])
    assert (dec.phi0, dec.phi1, dec.phi_inf) == ((), (0, 1), ())

    dec = cones.classify_sequence(CYLINDER, [DIVERGES] * 5)
    assert dec.phi_inf == (0, 1, 2, 3, 4) and len(dec.W_basis) == 3


def test_record_shape():
    rec = cones.classify_sequence(CYLINDER, [0, None, -1, -1, -1]).to_record()
    assert rec["phi_inf"] == [1] and rec["W_basis"] == [["0", "0", "1"]]
    assert FunctionalSet.from_record(CYLINDER.to_record()) == CYLINDER


def test_duplicates_rejected():
    with pytest.raises(ValueError):
        FunctionalSet(1, ((1,), (1,)))


def test_metric_changes_U_only():
    dec = cones.classify_sequence(FunctionalSet(2, ((1, 1), (-1, -1))), [0, 0], metric=[1, 2])
    assert len(dec.W_basis) == 1
    (w,), (u,) = dec.W_basis, dec.U_basis
    assert u[0] * w[0] * 1 + u[1] * w[1] * 2 == 0
    cones.check_decomposition(FunctionalSet(2, ((1, 1), (-1, -1))), dec)


functional_sets = st.integers(1, 3).flatmap(lambda d: st.lists(
    st.tuples(*[st.integers(-2, 2)] * d).filter(any), min_size=1, max_size=7, unique=True
).map(lambda fs: FunctionalSet(d, tuple(fs))))


@settings(max_examples=60, deadline=None)
@given(functional_sets)
def test_phi0_matches_scipy_subset_lp(phi):
    vecs = [[float(x) for x in f] for f in phi.functionals]
    got = cones.compute_phi0(phi, range(len(phi)))
    assert got == positive_circuit_union(vecs)
    if got:
        assert positive_relation_lp(vecs, got)
    rest = [i for i in range(len(phi)) if i not in got]
    for i in rest:
        assert not positive_relation_lp(vecs, sorted(set(got) | {i}))


@settings(max_examples=40, deadline=None)
@given(functional_sets, st.data())
def test_decomposition_invariants(phi, data):
    tags = data.draw(st.lists(st.sampled_from([0, DIVERGES]), min_size=len(phi), max_size=len(phi)))
    dec = cones.classify_sequence(phi, tags)
    cones.check_decomposition(phi, dec)
    for w in dec.W_basis:
        assert all(dot(phi[i], w) == 0 for i in dec.phi0)
    bounded = [i for i, t in enumerate(tags) if t != DIVERGES]
    sub = FunctionalSet(phi.dim, tuple(phi[i] for i in bounded)) if bounded else None
    if sub is not None:
        local0 = tuple(bounded.index(i) for i in dec.phi0)
        v = cones.interior_vector(sub, local0)
        for k in range(len(sub)):
            val = dot(sub[k], v)
            assert val == 0 if k in local0 else val > 0


@settings(max_examples=40, deadline=None)
@given(functional_sets, st.data())
def test_rescaling_invariance(phi, data):
    scales = data.draw(st.lists(st.fractions(min_value=Fraction(1, 5), max_value=5).filter(bool),
                                min_size=len(phi), max_size=len(phi)))
    tags = data.draw(st.lists(st.sampled_from([0, DIVERGES]), min_size=len(phi), max_size=len(phi)))
    scaled_vecs = tuple(tuple(s * x for x in f) for s, f in zip(scales, phi.functionals))
    if len(set(scaled_vecs)) != len(scaled_vecs):
        return
    scaled = FunctionalSet(phi.dim, scaled_vecs)
    scaled_tags = [t if t == DIVERGES else t * s for t, s in zip(tags, scales)]
    a = cones.classify_sequence(phi, tags)
    b = cones.classify_sequence(scaled, scaled_tags)
    assert (a.phi0, a.phi1, a.phi_inf) == (b.phi0, b.phi1, b.phi_inf)
    assert len(a.W_basis) == len(b.W_basis)
    if a.W_basis:
        stacked = np.array(a.W_basis + b.W_basis, dtype=float)
        assert np.linalg.matrix_rank(stacked) == len(a.W_basis)
