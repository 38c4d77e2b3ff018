from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as O
from helpers import dist, program, py_dist, stream, term, value

from pglc.evalsem import (STAR, BoxV, DistV, EvalError, Evaluator, FuelExhausted, LaterV, NumV, default_fuel,
                          evaluate, normalize, prefix, restrict, stream_of, term_eq, to_py, to_sexpr)
from pglc.evalsem import evaluator as E
from pglc.surface import parse_term


def test_random_walk_matches_path_enumeration():
    step = lambda x: O.uniform([x - 1, x + 1])
    for n in range(5):
        assert py_dist(dist("rwalk-shift", "rwalk", n)) == O.markov_prefix(0, step, n)


def test_lazy_walk_matches_path_enumeration():
    def lstep2(x):
        return O.bind(O.uniform([-1, 1]), lambda z: O.bind(O.uniform([0, 1]), lambda b: {x + 2 * z * b: 1}))
    for n in range(4):
        assert py_dist(dist("rwalk-shift", "lwalk2", n)) == O.markov_prefix(0, lstep2, n)


@pytest.mark.parametrize("src", ["rwalk4", "lwalk3"])
def test_lump_walks_are_natural(src):
    # stage 6 is out of reach for 8^n paths, so stop at the stage-4 comparison
    name = "lump-4d-3d"
    sig = program(name)[1]
    vals = [evaluate(term(name, src), sig, n) for n in range(5)]
    for n in range(4):
        assert restrict(vals[n + 1], n + 1, n) == vals[n]


def test_lump_walk_matches_oracle_at_stage_two():
    units = O.unit_vectors(4)
    to_nested = lambda v: (v[0], (v[1], (v[2], v[3])))
    step = lambda x: O.uniform([O.vadd(x, u) for u in units])
    want = {tuple(to_nested(x) for x in path): p for path, p in O.markov_prefix((0, 0, 0, 0), step, 2).items()}
    assert py_dist(dist("lump-4d-3d", "rwalk4", 2)) == want


@pytest.mark.parametrize("name, src", [
    ("zipwith", "nats"), ("cassini", "fib"), ("approx-sqrt", "newton"), ("coins", "coins (1/3)"),
    ("otp", "otp 2"),
])
def test_restriction_composes(name, src):
    v = value(name, src, 5)
    assert restrict(restrict(v, 5, 3), 3, 1) == restrict(v, 5, 1)
    assert restrict(v, 5, 5) is v


def test_restriction_cannot_go_up():
    with pytest.raises(EvalError):
        restrict(NumV(1), 1, 2)


def test_restriction_to_zero_hides_the_future():
    assert restrict(LaterV(NumV(3)), 2, 0) is STAR
    assert restrict(stream_of([1, 2, 3]), 2, 1) == stream_of([1, 2])


def test_stream_prefixes_match_oracles():
    assert stream("cassini", "fib", 6) == tuple(O.fib(k) for k in range(7))
    assert stream("approx-sqrt", "newton", 4) == O.approx_series(Fraction(1, 2), 2, 2, 4)
    assert stream("cassini", "rhs", 4, laters=1) == O.cassini_prefix(4)


def test_box_sections_are_consistent():
    sig = program("every2")[1]
    ev = Evaluator(sig)
    box = ev.eval(term("every2", "nats"), ev.env(), 0)
    assert isinstance(box, BoxV)
    secs = [ev.section_at(box, j) for j in range(6)]
    for j in range(5):
        assert restrict(secs[j + 1], j + 1, j) == secs[j]
    assert tuple(to_py(x) for x in prefix(secs[5])) == tuple(range(6))


def test_every2_drops_odd_positions():
    assert stream("every2", "every2 nats", 4) == (0, 2, 4, 6, 8)


def test_swap_moves_later_inside():
    sig = program("otp")[1]
    v = evaluate(parse_term("swap (next (bern 1/4))"), sig, 2)
    assert isinstance(v, DistV)
    assert {to_py(k): p for k, p in v.dist.items()} == {("next", 1): Fraction(1, 4), ("next", 0): Fraction(3, 4)}
    v0 = evaluate(parse_term("swap (next (bern 1/4))"), sig, 0)
    assert v0.dist.items() == ((STAR, Fraction(1)),)


def test_fuel_exhaustion_is_reported():
    sig = program("cassini")[1]
    with pytest.raises(FuelExhausted):
        evaluate(term("cassini", "fib"), sig, 8, fuel=50)


def test_fuel_comes_from_the_environment(monkeypatch):
    monkeypatch.setenv("PGLC_FUEL", "123")
    assert default_fuel() == 123
    monkeypatch.setenv("PGLC_FUEL", "nonsense")
    assert default_fuel() == E.DEFAULT_FUEL
    monkeypatch.delenv("PGLC_FUEL")
    assert default_fuel() == E.DEFAULT_FUEL


def test_sexpr_rendering():
    assert to_sexpr(stream_of([1, 2])) == "(str 1 2 *)"
    assert to_sexpr(evaluate(parse_term("(1, -2)"), program("otp")[1], 0)) == "(pair 1 -2)"


@pytest.mark.parametrize("a, b", [
    (r"(\x. x + 1) 2", "3"),
    ("fst (1, 2)", "1"),
    ("hd (4 :: next 5)", "4"),
    ("let x <~ return 2 in return (x + 1)", "return 3"),
    ("prev (next 7)", "7"),
    ("let box x = box 3 in x", "3"),
])
def test_normaliser_contracts_redexes(a, b):
    assert term_eq(parse_term(a), parse_term(b))


def test_normaliser_is_idempotent():
    t = parse_term(r"(\f. \y. f (f y)) (\z. z * 2) 3")
    n = normalize(t)
    assert normalize(n) == n


@settings(max_examples=60, deadline=None)
@given(st.lists(st.fractions(0, 1), min_size=1, max_size=4))
def test_bernoulli_sums_match_oracle(ps):
    sig = program("otp")[1]
    src = " in ".join(f"let y{i} <~ bern {p.numerator}/{p.denominator}" for i, p in enumerate(ps))
    src += " in return (" + " + ".join(f"y{i}" for i in range(len(ps))) + ")"
    d = evaluate(parse_term(src), sig, 0).dist
    want = {0: Fraction(1)}
    for p in ps:
        want = O.bind(want, lambda s, p=p: {s + k: q for k, q in O.bern(p).items()})
    assert py_dist(d) == want
