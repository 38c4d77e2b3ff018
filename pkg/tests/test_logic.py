from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import program

from pglc.evalsem import stream_of
from pglc.logic import BOX_EQ_HORIZON, StageAssertion, UnboundedQuantifier, check_formula, eval_predicate
from pglc.surface import parse_formula, parse_term


def holds(name: str, src: str, stage: int, **kw):
    prog, sig = program(name)
    return check_formula(StageAssertion(parse_formula(src, prog), stage), sig, **kw)


def truth_profile(name: str, src: str, upto: int = 6):
    return [bool(holds(name, src, n)) for n in range(upto + 1)]


PROFILE_CASES = [
    ("zipwith", "All(nats, x. x <= 3)"),
    ("zipwith", "All(ones, nats, a b. a <= b + 1)"),
    ("zipwith", "All_2_1(evens, nats, a b. a <= 4)"),
    ("zipwith", "[] (hd nats = 0)"),
    ("zipwith", "later [t <- tl nats] later [u <- tl t] (hd u = 2)"),
    ("zipwith", "later [t <- tl nats] (hd t = 7)"),
    ("zipwith", "All(evens, x. x <= 6) \\/ All(nats, x. x <= 1)"),
    ("approx-sqrt", "All(newton, slow, n1 n2. n1 <= n2)"),
    ("cassini", "All(fib, x. x <= 20)"),
]


@pytest.mark.parametrize("name, src", PROFILE_CASES)
def test_truth_is_downward_closed(name, src):
    prof = truth_profile(name, src)
    for n in range(len(prof) - 1):
        assert prof[n] or not prof[n + 1], prof


def test_all_fails_exactly_when_the_prefix_reaches_the_bad_element():
    assert truth_profile("zipwith", "All(nats, x. x <= 3)") == [True] * 4 + [False] * 3


def test_all_m_n_steps_through_both_streams():
    # evens at 0,2,4,... against nats at 0,1,2,...: 0~0, 4~1, 8~2
    assert truth_profile("zipwith", "All_2_1(evens, nats, a b. a = 4 * b)", 6) == [True] * 7
    assert not holds("zipwith", "All_2_1(evens, nats, a b. a = 2 * b)", 2)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 6), st.integers(0, 8))
def test_bounded_always_matches_direct_check(stage, bound):
    r = holds("zipwith", f"[] All(nats, x. x <= {bound})", stage)
    assert r.holds is (stage <= bound)
    assert r.bounded and r.qualifier == f"verified up to stage {stage}"


def test_plain_formula_is_not_bounded():
    r = holds("zipwith", "forall x : Nat in {0..3}. plus x 1 = plus 1 x", 2)
    assert r.holds and not r.bounded and r.qualifier == "at stage 2"


def test_declared_formulas():
    prog, sig = program("zipwith")
    for name in ("plus_comm", "zip_comm", "ones_always"):
        assert check_formula(StageAssertion(sig.formulas[name].body, 4), sig)
    prog, sig = program("cassini")
    assert check_formula(StageAssertion(sig.formulas["cassini_identity"].body, 5), sig)
    prog, sig = program("approx-sqrt")
    assert check_formula(StageAssertion(sig.formulas["closer"].body, 5), sig)


def test_unbounded_quantifier_is_refused():
    with pytest.raises(UnboundedQuantifier):
        holds("zipwith", "forall x : Nat. x = x", 1)


def test_bounds_supply_a_domain():
    prog, _ = program("zipwith")
    dom = [parse_term(str(k), prog) for k in range(3)]
    assert holds("zipwith", "forall x : Nat. plus x 0 = x", 1, bounds={"x": dom})


def test_diamonds():
    assert holds("coins", "dia [y1 <- bern 1/3, y2 <- bern 2/3] (y1 <= y2)", 0)
    assert not holds("coins", "dia [y1 <- bern 2/3, y2 <- bern 1/3] (y1 <= y2)", 0)
    assert holds("coins", "dia [y <- unif {1, 2}] (1 <= y)", 0)


def test_implication_and_negation_look_at_earlier_stages():
    assert holds("zipwith", "~ (hd nats = 1)", 3)
    assert holds("zipwith", "All(nats, x. x <= 5) => All(nats, x. x <= 9)", 6)


FROM = r"(fix (f : |>(Nat -> Str Nat)). \n. n :: next [g <- f] (g (n + 1)))"


@pytest.mark.parametrize("start, expected", [(2, True), (3, False)])
def test_box_equality_compares_sections_up_to_the_horizon(start, expected):
    r = holds("every2", f"tlhat (tlhat nats) = box ({FROM} {start})", 0)
    assert r.holds is expected
    assert r.bounded and BOX_EQ_HORIZON == 6


def test_eval_predicate_on_prefixes():
    s = stream_of([0, 1, 2, 3])
    assert eval_predicate("All", [s], lambda x: x <= 3)
    assert not eval_predicate("All", [s], lambda x: x <= 2)
    assert eval_predicate("All_2_1", [s, s], lambda a, b: a == 2 * b)
    with pytest.raises(ValueError):
        eval_predicate("Every", [s], lambda x: True)
