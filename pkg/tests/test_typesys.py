from __future__ import annotations

from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import PROGRAMS, program

from pglc.surface import PglcSyntaxError, parse_formula, parse_program, parse_term, parse_type, pretty_type
from pglc.surface import ast as A
from pglc.typesys import (Ctx, PglcTypeError, Signature, check_sigma, is_constant, is_discrete, typecheck,
                          typecheck_formula)

NEGATIVE = sorted((Path(__file__).parent / "fixtures" / "negative").glob("*.pgl"))
ERRORS = {"type": PglcTypeError, "syntax": PglcSyntaxError}


@pytest.mark.parametrize("name", PROGRAMS)
def test_corpus_programs_typecheck(name):
    prog, sig = program(name)
    user = [d for d in prog.decls if isinstance(d, A.Def)]
    assert user and all(d.name in sig.globals for d in user)


@pytest.mark.parametrize("path", NEGATIVE, ids=lambda p: p.stem)
def test_negative_fixture(path):
    header = path.read_text().splitlines()[0]
    kind, fragment = header.removeprefix("-- expect: ").split(": ", 1)
    with pytest.raises(ERRORS[kind]) as e:
        Signature.of_program(parse_program(path.read_text(), str(path)))
    assert fragment in str(e.value)


def test_markov_type():
    _, sig = program("otp")
    tvars, ty = sig.globals["markov"]
    assert [n for n, _ in tvars] == ["C"]
    assert ty == parse_type("C -> (C -> Dist C) -> Dist (Str C)")


def test_swap_type():
    prog, sig = program("otp")
    ty = typecheck(parse_term(r"\(x : |>Dist Nat). swap x", prog), sig)
    assert ty == parse_type("|>Dist Nat -> Dist (|>Nat)")


def test_diamond_needs_a_distribution():
    prog, sig = program("coins")
    typecheck_formula(parse_formula("dia [y1 <- bern 1/2, y2 <- bern 1/2] (y1 = y2)", prog), sig)
    with pytest.raises(PglcTypeError, match="distribution"):
        typecheck_formula(parse_formula("dia [y1 <- 3] (y1 = y1)", prog), sig)


def test_sigma_must_be_constant():
    prog, sig = program("coins")
    check_sigma([parse_formula("[] later [x <- next 1] (x = 1)", prog)], Ctx(), sig)
    with pytest.raises(PglcTypeError, match="constant"):
        check_sigma([parse_formula("later [x <- next 1] (x = 1)", prog)], Ctx(), sig)


def test_gamma_variables_are_invisible_under_box():
    _, sig = program("otp")
    ctx = Ctx(gamma={"s": parse_type("Str Nat")})
    with pytest.raises(PglcTypeError):
        typecheck(parse_term("box s"), sig, ctx)
    typecheck(parse_term("box s"), sig, Ctx(delta={"s": parse_type("Str Nat")}))


@pytest.mark.parametrize("src, ty", [
    ("3", "Nat"), ("-3", "Int"), ("1/2", "Rat"), ("(1, -1)", "Nat * Int"),
    ("bern 1/3", "Dist Nat"), (r"\(x : Nat). (x, x)", "Nat -> Nat * Nat"),
])
def test_synthesis(src, ty):
    prog, sig = program("otp")
    got = typecheck(parse_term(src, prog), sig)
    assert got == parse_type(ty)


def test_synthesis_is_deterministic():
    prog, sig = program("zipwith")
    for d in prog.decls:
        if isinstance(d, A.Def) and not d.tvars:
            a = typecheck(d.body, sig, expected=d.ty)
            b = typecheck(d.body, sig, expected=d.ty)
            assert pretty_type(a) == pretty_type(b)


@pytest.mark.parametrize("ty, const, disc", [
    ("Nat", True, True), ("Nat * Int", True, True), ("Str Nat", False, True),
    ("|>Nat", False, True), ("[]Str Nat", True, False), ("Nat -> Nat", True, False),
    ("Dist Nat", True, False), ("Dist (Str Nat)", False, False), ("Nat + |>Nat", False, True),
])
def test_constant_and_discrete(ty, const, disc):
    t = parse_type(ty)
    assert is_constant(t) is const
    assert is_discrete(t) is disc


def test_type_variables_constant_only_when_declared():
    assert not is_constant(A.TVar("A"))
    assert is_constant(A.TVar("A"), {"A"})


base = st.sampled_from(["Nat", "Int", "Rat"])


@settings(max_examples=100, deadline=None)
@given(st.recursive(base, lambda t: st.one_of(
    st.builds(lambda a: f"[]({a})", t), st.builds(lambda a: f"|>({a})", t),
    st.builds(lambda a, b: f"({a}) * ({b})", t, t), st.builds(lambda a: f"Str ({a})", t)), max_leaves=4))
def test_box_makes_any_type_constant_and_unboxed_time_is_not(src):
    assert is_constant(parse_type(f"[]({src})"))
    if ("|>" in src or "Str" in src) and "[]" not in src:
        assert not is_constant(parse_type(src))
