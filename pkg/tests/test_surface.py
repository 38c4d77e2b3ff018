from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import CORPUS, PROGRAMS

from pglc.surface import (PglcSyntaxError, parse_formula, parse_judgement, parse_program, parse_term,
                          parse_type, pretty, pretty_formula, pretty_judgement, pretty_program,
                          pretty_proof, pretty_type)
from pglc.surface import ast as A

NAMES = st.sampled_from(["x", "y", "z", "f", "g", "s1", "acc"])

base_types = st.sampled_from([A.NAT, A.INT, A.RAT])


def types():
    return st.recursive(
        base_types,
        lambda inner: st.one_of(
            st.builds(A.TProd, inner, inner), st.builds(A.TSum, inner, inner),
            st.builds(A.TArrow, inner, inner), st.builds(A.TStr, inner),
            st.builds(A.TLater, inner), st.builds(A.TBox, inner), st.builds(A.TDist, inner)),
        max_leaves=5)


atoms = st.one_of(
    st.builds(A.Var, NAMES),
    st.builds(A.NatLit, st.integers(0, 40)),
    st.builds(A.IntLit, st.integers(-40, -1)),
    st.builds(A.RatLit, st.fractions(min_value=-5, max_value=5).filter(lambda q: q.denominator != 1)),
)


def terms():
    def extend(t):
        return st.one_of(
            st.builds(A.App, t, t), st.builds(A.Pair, t, t), st.builds(A.Fst, t), st.builds(A.Snd, t),
            st.builds(A.Inl, t), st.builds(A.Inr, t), st.builds(A.Cons, t, t), st.builds(A.Head, t),
            st.builds(A.Tail, t), st.builds(A.Prev, t), st.builds(A.Box, t), st.builds(A.Return, t),
            st.builds(A.Lam, NAMES, st.none() | types(), t),
            st.builds(A.Fix, NAMES, types(), t),
            st.builds(A.LetBox, NAMES, t, t), st.builds(A.LetConst, NAMES, t, t),
            st.builds(A.MLet, NAMES, t, t),
            st.builds(lambda a, b: A.PrimOp("add", (a, b)), t, t),
            st.builds(lambda a, b: A.PrimOp("mul", (a, b)), t, t),
            st.builds(lambda a, b: A.PrimOp("splus", (a, b)), t, t),
            st.builds(lambda vs: A.Unif(tuple(vs)), st.lists(t, min_size=1, max_size=3)),
            st.builds(lambda n, a, b: A.Next((n,), (a,), b), NAMES, t, t),
            st.builds(A.Next, st.just(()), st.just(()), t),
            st.builds(lambda s, x, l, y, r: A.CaseSum(s, x, l, y, r), t, NAMES, t, NAMES, t),
        )
    return st.recursive(atoms, extend, max_leaves=8)


def formulas():
    leaf = st.one_of(st.just(A.Top()), st.just(A.Bot()), st.builds(A.Eq, terms(), terms()),
                     st.builds(A.Leq, terms(), terms()))
    return st.recursive(leaf, lambda f: st.one_of(
        st.builds(A.And, f, f), st.builds(A.Or, f, f), st.builds(A.Implies, f, f), st.builds(A.Not, f),
        st.builds(A.Always, f),
        st.builds(lambda x, ty, b: A.Forall(x, ty, None, b), NAMES, types(), f),
        st.builds(lambda x, b: A.Exists(x, A.TBase("Nat"), (A.NatLit(0), A.NatLit(1)), b), NAMES, f),
        st.builds(lambda n, a, b: A.Later((n,), (a,), b), NAMES, terms(), f)), max_leaves=4)


@settings(max_examples=300, deadline=None)
@given(terms())
def test_term_round_trip(t):
    assert A.alpha_eq(parse_term(pretty(t)), t), pretty(t)


@settings(max_examples=150, deadline=None)
@given(formulas())
def test_formula_round_trip(f):
    assert A.alpha_eq(parse_formula(pretty_formula(f)), f), pretty_formula(f)


@settings(max_examples=150, deadline=None)
@given(types())
def test_type_round_trip(ty):
    assert parse_type(pretty_type(ty)) == ty


@pytest.mark.parametrize("name", PROGRAMS)
def test_corpus_program_round_trip(name):
    src = (CORPUS / f"{name}.pgl").read_text()
    p = parse_program(src, name, with_prelude=False)
    assert parse_program(pretty_program(p), name, with_prelude=False) == p


@pytest.mark.parametrize("name", ["otp", "coins", "zipwith", "rwalk-shift", "every2"])
def test_proof_script_pretty_reparses(name):
    from helpers import script
    from pglc.surface import parse_proof
    s = script(CORPUS / f"{name}.pgp")
    again = parse_proof(f'import "{name}.pgl"\ngoal {pretty_judgement(s.goal)}\nproof\n{pretty_proof(s.root)}\n',
                        name, CORPUS)
    assert pretty_proof(again.root) == pretty_proof(s.root)


def test_alpha_equivalence_ignores_binder_names():
    assert A.alpha_eq(parse_term(r"\x. x + 1"), parse_term(r"\y. y + 1"))
    assert not A.alpha_eq(parse_term(r"\x. x + y"), parse_term(r"\y. y + y"))
    assert A.alpha_eq(parse_term("next [a <- tl s] hd a"), parse_term("next [b <- tl s] hd b"))


def test_substitution_avoids_capture():
    t = parse_term(r"\y. x + y")
    out = A.subst(t, {"x": A.Var("y")})
    assert isinstance(out, A.Lam) and out.var != "y"
    assert A.free_vars(out) == {"y"}


def test_spans_point_at_the_error():
    with pytest.raises(PglcSyntaxError) as e:
        parse_program("def a : Nat = (1 +\n", "bad.pgl")
    assert "bad.pgl:2" in str(e.value) or "bad.pgl:1" in str(e.value)


@pytest.mark.parametrize("src", ["let x <~ in 3", "fix (f). f", r"\x.", "next [x <- ] x", "(1, 2"])
def test_malformed_terms_are_rejected(src):
    with pytest.raises(PglcSyntaxError):
        parse_term(src)


def test_stream_operators_need_parentheses():
    assert isinstance(parse_term("(s <+> t)"), A.PrimOp)
    with pytest.raises(PglcSyntaxError):
        parse_term("s <+> t")


def test_judgement_round_trip():
    j = parse_judgement("rhol |- coins : Rat -> Dist (Str Nat) ~ coins : Rat -> Dist (Str Nat) | top",
                        parse_program((CORPUS / "coins.pgl").read_text()))
    assert "coins" in pretty_judgement(j)


def test_range_domain_expands():
    f = parse_formula("forall x : Nat in {0..3}. x = x")
    assert [t.value for t in f.dom] == [0, 1, 2, 3]


def test_rational_literals_are_exact():
    t = parse_term("3/4")
    assert isinstance(t, A.RatLit) and t.value == Fraction(3, 4)
