from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as O

from pglc import coupling as C

RELS = {
    "eq": lambda a, b: a == b,
    "le": lambda a, b: a <= b,
    "lt": lambda a, b: a < b,
    "ne": lambda a, b: a != b,
    "near": lambda a, b: abs(a - b) <= 1,
    "parity": lambda a, b: (a - b) % 2 == 0,
}


@st.composite
def dists(draw, max_size=5):
    keys = draw(st.lists(st.integers(0, 6), min_size=1, max_size=max_size, unique=True))
    weights = draw(st.lists(st.integers(1, 6), min_size=len(keys), max_size=len(keys)))
    total = sum(weights)
    return {k: Fraction(w, total) for k, w in zip(keys, weights)}


@settings(max_examples=300, deadline=None)
@given(dists(), dists(), st.sampled_from(sorted(RELS)))
def test_deciders_agree_with_hall_oracle(m1, m2, rel):
    r = RELS[rel]
    want = O.coupling_exists_dual(m1, m2, r)
    mu1, mu2 = C.FiniteDist(m1), C.FiniteDist(m2)
    assert C.strassen_check(mu1, mu2, r) is want
    assert C.lift_check_rel(mu1, mu2, r) is want


@settings(max_examples=200, deadline=None)
@given(dists(), dists(), st.sampled_from(sorted(RELS)))
def test_flow_witness_is_a_coupling(m1, m2, rel):
    r = RELS[rel]
    mu1, mu2 = C.FiniteDist(m1), C.FiniteDist(m2)
    w = C.strassen_flow(mu1, mu2, r)
    if w is None:
        assert not O.coupling_exists_dual(m1, m2, r)
        return
    assert C.marginal1(w) == mu1
    assert C.marginal2(w) == mu2
    assert all(r(a, b) for a, b in w.support())
    assert C.is_coupling(w, mu1, mu2, r)


@settings(max_examples=150, deadline=None)
@given(dists(), st.integers(0, 3))
def test_shifted_copy_always_has_a_le_witness(m1, shift):
    mu1 = C.FiniteDist(m1)
    mu2 = C.FiniteDist({k + shift: p for k, p in m1.items()})
    w = C.strassen_flow(mu1, mu2, RELS["le"])
    assert w is not None
    assert C.marginal1(w) == mu1 and C.marginal2(w) == mu2
    assert all(a <= b for a, b in w.support())


@settings(max_examples=100, deadline=None)
@given(dists(), dists())
def test_product_is_a_trivial_coupling(m1, m2):
    mu1, mu2 = C.FiniteDist(m1), C.FiniteDist(m2)
    joint = C.product(mu1, mu2)
    assert C.is_coupling(joint, mu1, mu2, lambda a, b: True)
    assert joint.total() == 1


def test_mismatched_mass_has_no_coupling():
    mu1 = C.FiniteDist({0: Fraction(1)})
    mu2 = C.FiniteDist({0: Fraction(1, 2)})
    assert not C.strassen_check(mu1, mu2, RELS["eq"])
    assert C.strassen_flow(mu1, mu2, RELS["eq"]) is None


def test_brute_force_limit():
    big = C.uniform(range(C.BRUTE_FORCE_LIMIT + 1))
    with pytest.raises(ValueError):
        C.strassen_check(big, big, RELS["eq"])
    assert C.lift_check_rel(big, big, RELS["eq"])


def test_stochastic_dominance_example():
    lo, hi = C.bernoulli(Fraction(1, 3)), C.bernoulli(Fraction(2, 3))
    assert C.lift_check_rel(lo, hi, RELS["le"])
    assert not C.lift_check_rel(hi, lo, RELS["le"])


def test_relation_as_pair_set():
    mu = C.uniform([0, 1])
    assert C.lift_check_rel(mu, mu, {(0, 1), (1, 0)})
    assert not C.lift_check_rel(mu, mu, {(0, 1)})


def test_unary_lifting():
    assert C.lift_check_un(C.uniform([2, 4]), lambda v: v % 2 == 0)
    assert not C.lift_check_un(C.uniform([2, 3]), lambda v: v % 2 == 0)


def test_finite_dist_normal_form():
    d = C.FiniteDist([(1, Fraction(1, 4)), (0, Fraction(1, 2)), (1, Fraction(1, 4)), (2, 0)])
    assert d.support() == (0, 1)
    assert d.prob(1) == Fraction(1, 2) and d.prob(7) == 0
    assert d == C.uniform([1, 0])
    assert hash(d) == hash(C.uniform([0, 1]))


def test_convex_combination_and_bind():
    mix = C.convex_combine([(Fraction(1, 2), C.unit_dist(0)), (Fraction(1, 2), C.uniform([0, 1]))])
    assert mix.prob(0) == Fraction(3, 4)
    walked = C.bind_dist(C.uniform([0, 10]), lambda x: C.uniform([x - 1, x + 1]))
    assert walked.as_dict() == O.bind(O.uniform([0, 10]), lambda x: O.uniform([x - 1, x + 1]))


def test_relation_composition():
    le = RELS["le"]
    comp = C.compose_relations(le, RELS["lt"], range(5))
    assert comp(0, 2) and not comp(2, 2)
