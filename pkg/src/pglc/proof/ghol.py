"""Guarded HOL rules: logical connectives, modalities and the diamonds."""
from __future__ import annotations

import dataclasses
from typing import List

from ..evalsem.normalize import HintError, equiv
from ..surface import ast as A
from ..surface.pretty import pretty_formula
from ..typesys import all_mn
from .common import (delayed, dist_ty, foralls, goal_as, implies, later_ty, choose, clash_set, pair_names,
                     shape, side_condition)
from .judgement import Ghol, Judgement, add_psi, add_sigma, bind_gamma, constant_part, tctx
from .kernel import Kernel, RuleError


def _g(k: Kernel, g: Judgement, n) -> Ghol:
    return goal_as(g, Ghol, n.rule)


def _with(g: Ghol, phi: A.Formula, ctx=None) -> Ghol:
    return Ghol(g.ctx if ctx is None else ctx, phi)


# ---------------------------------------------------------------- hypotheses and equality


def ax_u(k, g, n):
    g = _g(k, g, n)
    side_condition(any(k.same_form(f, g.phi) for f in g.ctx.psi), "formula is not among the Psi hypotheses")
    return []


def ax_g(k, g, n):
    g = _g(k, g, n)
    side_condition(any(k.same_form(f, g.phi) for f in g.ctx.sigma), "formula is not among the Sigma hypotheses")
    return []


def conv(k, g, n):
    g = _g(k, g, n)
    eq = shape(g.phi, A.Eq, "CONV conclusion")
    hints = k.opt(n, "hints", "hints", ())
    try:
        ok = equiv(eq.left, eq.right, hints, k.fuel, k.sig.bodies)
    except HintError as e:
        raise RuleError(str(e), "side condition")
    side_condition(ok, "the two sides are not equivalent under the given hints")
    return []


def subst_rule(k, g, n):
    g = _g(k, g, n)
    (x,) = k.need(n, "x", "names")
    phi = k.need(n, "phi", "form")
    t = k.need(n, "t", "term")
    u = k.need(n, "u", "term")
    k.expect_form(g.phi, A.subst(phi, {x: u}))
    return [_with(g, A.subst(phi, {x: t})), _with(g, A.Eq(t, u))]


def loeb(k, g, n):
    g = _g(k, g, n)
    return [Ghol(add_psi(g.ctx, A.Later((), (), g.phi)), g.phi)]


# ---------------------------------------------------------------- later and always


def _later_binds(k: Kernel, g: Judgement, lat: A.Later):
    avoid, clash = k.avoid(g), clash_set(g)
    names, binds, body = [], [], lat.body
    for x, t in zip(lat.names, lat.args):
        ty = later_ty(k.synth(g, t), f"delayed argument {x}")
        x2 = choose(x, clash, avoid)
        if x2 != x:
            body = A.subst(body, {x: A.Var(x2)})
        names.append(x2)
        binds.append((x2, ty))
    return binds, body


def _ctx_names(g: Judgement) -> set:
    return {x for x, _ in g.ctx.gamma} | {x for x, _ in g.ctx.delta}


def later_i(k, g, n):
    g = _g(k, g, n)
    lat = shape(g.phi, A.Later, "LATER_I conclusion")
    binds, body = _later_binds(k, g, lat)
    return [Ghol(bind_gamma(g.ctx, *binds), body)]


def later_e(k, g, n):
    g = _g(k, g, n)
    lat = shape(k.need(n, "phi", "form"), A.Later, "LATER_E instantiation phi")
    base = constant_part(g.ctx)
    for t in lat.args:
        try:
            k.synth(Ghol(base, A.Top()), t)
        except Exception as e:
            raise RuleError(f"delayed argument must be typable without Gamma: {e}", "side condition")
    k.expect_form(g.phi, A.subst(lat.body, {x: A.Prev(t) for x, t in zip(lat.names, lat.args)}))
    return [Ghol(base, lat)]


def later_app(k, g, n):
    g = _g(k, g, n)
    lat = shape(g.phi, A.Later, "LATER_APP conclusion")
    psi = k.need(n, "psi", "form")
    binds, body = _later_binds(k, g, lat)
    names = tuple(x for x, _ in binds)
    psi2 = A.subst(psi, {a: A.Var(b) for a, b in zip(lat.names, names) if a != b})
    return [_with(g, A.Later(lat.names, lat.args, psi)),
            Ghol(add_psi(bind_gamma(g.ctx, *binds), psi2), body)]


def box_i(k, g, n):
    g = _g(k, g, n)
    alw = shape(g.phi, A.Always, "BOX_I conclusion")
    return [Ghol(constant_part(g.ctx), alw.body)]


def box_e(k, g, n):
    g = _g(k, g, n)
    psi = k.need(n, "psi", "form")
    return [_with(g, A.Always(psi)), Ghol(add_sigma(g.ctx, psi), g.phi)]


# ---------------------------------------------------------------- connectives


def top_i(k, g, n):
    shape(_g(k, g, n).phi, A.Top, "TOP_I conclusion")
    return []


def bot_e(k, g, n):
    g = _g(k, g, n)
    return [_with(g, A.Bot())]


def and_i(k, g, n):
    g = _g(k, g, n)
    f = shape(g.phi, A.And, "AND_I conclusion")
    return [_with(g, f.left), _with(g, f.right)]


def and_e1(k, g, n):
    g = _g(k, g, n)
    return [_with(g, A.And(g.phi, k.need(n, "other", "form")))]


def and_e2(k, g, n):
    g = _g(k, g, n)
    return [_with(g, A.And(k.need(n, "other", "form"), g.phi))]


def or_i1(k, g, n):
    g = _g(k, g, n)
    return [_with(g, shape(g.phi, A.Or, "OR_I1 conclusion").left)]


def or_i2(k, g, n):
    g = _g(k, g, n)
    return [_with(g, shape(g.phi, A.Or, "OR_I2 conclusion").right)]


def or_e(k, g, n):
    g = _g(k, g, n)
    a, b = k.need(n, "left", "form"), k.need(n, "right", "form")
    return [_with(g, A.Or(a, b)), Ghol(add_psi(g.ctx, a), g.phi), Ghol(add_psi(g.ctx, b), g.phi)]


def imp_i(k, g, n):
    g = _g(k, g, n)
    f = shape(g.phi, A.Implies, "IMP_I conclusion")
    return [Ghol(add_psi(g.ctx, f.left), f.right)]


def imp_e(k, g, n):
    g = _g(k, g, n)
    h = k.need(n, "hyp", "form")
    return [_with(g, A.Implies(h, g.phi)), _with(g, h)]


def not_i(k, g, n):
    g = _g(k, g, n)
    f = shape(g.phi, A.Not, "NOT_I conclusion")
    return [Ghol(add_psi(g.ctx, f.arg), A.Bot())]


def not_e(k, g, n):
    g = _g(k, g, n)
    shape(g.phi, A.Bot, "NOT_E conclusion")
    h = k.need(n, "hyp", "form")
    return [_with(g, h), _with(g, A.Not(h))]


def all_i(k, g, n):
    g = _g(k, g, n)
    f = shape(g.phi, A.Forall, "ALL_I conclusion")
    x = choose(f.var, clash_set(g), k.avoid(g))
    body = A.subst(f.body, {f.var: A.Var(x)}) if x != f.var else f.body
    return [Ghol(bind_gamma(g.ctx, (x, f.ty)), body)]


def _in_domain(k: Kernel, dom, t: A.Term) -> bool:
    return dom is None or any(k.same_term(t, d) for d in dom)


def all_e(k, g, n):
    g = _g(k, g, n)
    f = shape(k.need(n, "forall", "form"), A.Forall, "ALL_E instantiation forall")
    t = k.need(n, "t", "term")
    side_condition(_in_domain(k, f.dom, t), "witness lies outside the quantifier's domain")
    k.expect_form(g.phi, A.subst(f.body, {f.var: t}))
    return [_with(g, f)]


def ex_i(k, g, n):
    g = _g(k, g, n)
    f = shape(g.phi, A.Exists, "EX_I conclusion")
    t = k.need(n, "t", "term")
    side_condition(_in_domain(k, f.dom, t), "witness lies outside the quantifier's domain")
    return [_with(g, A.subst(f.body, {f.var: t}))]


def ex_e(k, g, n):
    g = _g(k, g, n)
    f = shape(k.need(n, "exists", "form"), A.Exists, "EX_E instantiation exists")
    side_condition(f.var not in A.free_vars(g.phi) and f.var not in _ctx_names(g),
                   f"witness variable {f.var} must be fresh")
    return [_with(g, f), Ghol(add_psi(bind_gamma(g.ctx, (f.var, f.ty)), f.body), g.phi)]


# ---------------------------------------------------------------- axioms


def _all_cons_expected(k: Kernel, g: Ghol) -> A.Formula:
    """Rebuild the unfolding axiom of a guarded All from the goal's conclusion."""
    binds = []
    f = g.phi
    while isinstance(f, A.Forall):
        binds.append((f.var, f.ty))
        f = f.body
    hyps = []
    while isinstance(f, A.Implies):
        hyps.append(f.left)
        f = f.right
    concl = shape(f, A.Pred, "axiom conclusion")
    mn = all_mn(concl.name)
    if concl.name not in ("All", "All2") and mn != (1, 1):
        raise RuleError(f"no unfolding axiom for {concl.name}")
    ab = shape(concl.args[-1], A.FAbs, "predicate argument")
    streams = concl.args[:-1]
    m = len(streams)
    if len(binds) != 2 * m or len(hyps) != 2:
        raise RuleError(f"unfolding axiom for {m} stream(s) quantifies {2 * m} variables under two hypotheses")
    heads = [A.Var(x) for x, _ in binds[:m]]
    tails = [A.Var(x) for x, _ in binds[m:]]
    avoid = k.avoid(g)
    ys = [k.fresh(f"y{i + 1}", avoid) for i in range(m)]
    now = A.subst(ab.body, dict(zip(ab.params, heads)))
    later = A.Later(tuple(ys), tuple(tails), A.Pred(concl.name, tuple(A.Var(y) for y in ys) + (ab,)))
    result = A.Pred(concl.name, tuple(A.Cons(h, t) for h, t in zip(heads, tails)) + (ab,))
    return foralls(binds, implies(now, later, result))


def axiom(k, g, n):
    g = _g(k, g, n)
    name = k.need(n, "name", "ref")
    if name == "all_cons":
        k.expect_form(g.phi, _all_cons_expected(k, g), "unfolding axiom")
        return []
    decl = k.sig.formulas.get(name)
    if decl is None or not decl.axiom:
        raise RuleError(f"unknown axiom {name}")
    k.expect_form(g.phi, decl.body, f"axiom {name}")
    k.assume(f"axiom {name}: {pretty_formula(decl.body)}")
    return []


# ---------------------------------------------------------------- diamonds


def _dia2(g: Ghol, rule: str) -> A.Dia2:
    return shape(g.phi, A.Dia2, f"{rule} conclusion")


def _dia1(g: Ghol, rule: str) -> A.Dia1:
    return shape(g.phi, A.Dia1, f"{rule} conclusion")


def mono2(k, g, n):
    g = _g(k, g, n)
    d = _dia2(g, n.rule)
    phi = k.need(n, "phi", "form")
    c1, c2 = dist_ty(k.synth(g, d.arg1), "left"), dist_ty(k.synth(g, d.arg2), "right")
    side_condition(d.var1 not in _ctx_names(g) and d.var2 not in _ctx_names(g), "diamond binders must be fresh")
    return [_with(g, A.Dia2(d.var1, d.arg1, d.var2, d.arg2, phi)),
            Ghol(add_psi(bind_gamma(g.ctx, (d.var1, c1), (d.var2, c2)), phi), d.body)]


def unit2(k, g, n):
    g = _g(k, g, n)
    d = _dia2(g, n.rule)
    t1 = shape(k.view(d.arg1, g), A.Return, "left argument")
    t2 = shape(k.view(d.arg2, g), A.Return, "right argument")
    return [_with(g, A.subst(d.body, {d.var1: t1.arg, d.var2: t2.arg}))]


def mlet2(k, g, n):
    g = _g(k, g, n)
    d = _dia2(g, n.rule)
    m1 = shape(k.view(d.arg1, g), A.MLet, "left argument")
    m2 = shape(k.view(d.arg2, g), A.MLet, "right argument")
    phi = k.need(n, "phi", "form")
    x1, x2 = pair_names(m1.var, m2.var, clash_set(g), k.avoid(g))
    b1 = A.subst(m1.body, {m1.var: A.Var(x1)}) if x1 != m1.var else m1.body
    b2 = A.subst(m2.body, {m2.var: A.Var(x2)}) if x2 != m2.var else m2.body
    c1, c2 = dist_ty(k.synth(g, m1.bound), "left"), dist_ty(k.synth(g, m2.bound), "right")
    return [_with(g, A.Dia2(x1, m1.bound, x2, m2.bound, phi)),
            Ghol(add_psi(bind_gamma(g.ctx, (x1, c1), (x2, c2)), phi), A.Dia2(d.var1, b1, d.var2, b2, d.body))]


def _mlet_one(k, g, n, side: int):
    g = _g(k, g, n)
    d = _dia2(g, n.rule)
    arg = d.arg1 if side == 1 else d.arg2
    m = shape(k.view(arg, g), A.MLet, "the let-bound side")
    phi = k.need(n, "phi", "form")
    x = choose(m.var, clash_set(g), k.avoid(g))
    body = A.subst(m.body, {m.var: A.Var(x)}) if x != m.var else m.body
    c = dist_ty(k.synth(g, m.bound), "bound computation")
    rest = (A.Dia2(d.var1, body, d.var2, d.arg2, d.body) if side == 1
            else A.Dia2(d.var1, d.arg1, d.var2, body, d.body))
    return [_with(g, A.Dia1(x, m.bound, phi)), Ghol(add_psi(bind_gamma(g.ctx, (x, c)), phi), rest)]


def mlet_l_ghol(k, g, n):
    return _mlet_one(k, g, n, 1)


def mlet_r_ghol(k, g, n):
    return _mlet_one(k, g, n, 2)


def mono1(k, g, n):
    g = _g(k, g, n)
    d = _dia1(g, n.rule)
    phi = k.need(n, "phi", "form")
    c = dist_ty(k.synth(g, d.arg), "argument")
    side_condition(d.var not in _ctx_names(g), "diamond binder must be fresh")
    return [_with(g, A.Dia1(d.var, d.arg, phi)), Ghol(add_psi(bind_gamma(g.ctx, (d.var, c)), phi), d.body)]


def unit1(k, g, n):
    g = _g(k, g, n)
    d = _dia1(g, n.rule)
    t = shape(k.view(d.arg, g), A.Return, "argument")
    return [_with(g, A.subst(d.body, {d.var: t.arg}))]


def mlet1(k, g, n):
    g = _g(k, g, n)
    d = _dia1(g, n.rule)
    m = shape(k.view(d.arg, g), A.MLet, "argument")
    phi = k.need(n, "phi", "form")
    x = choose(m.var, clash_set(g), k.avoid(g))
    body = A.subst(m.body, {m.var: A.Var(x)}) if x != m.var else m.body
    c = dist_ty(k.synth(g, m.bound), "bound computation")
    return [_with(g, A.Dia1(x, m.bound, phi)), Ghol(add_psi(bind_gamma(g.ctx, (x, c)), phi), A.Dia1(d.var, body, d.body))]


RULES = {
    "AX_U": ax_u, "AX_G": ax_g, "CONV": conv, "SUBST": subst_rule, "LOEB": loeb,
    "LATER_I": later_i, "LATER_E": later_e, "LATER_APP": later_app, "BOX_I": box_i, "BOX_E": box_e,
    "TOP_I": top_i, "BOT_E": bot_e, "AND_I": and_i, "AND_E1": and_e1, "AND_E2": and_e2,
    "OR_I1": or_i1, "OR_I2": or_i2, "OR_E": or_e, "IMP_I": imp_i, "IMP_E": imp_e,
    "NOT_I": not_i, "NOT_E": not_e, "ALL_I": all_i, "ALL_E": all_e, "EX_I": ex_i, "EX_E": ex_e,
    "AXIOM": axiom,
    "MONO2": mono2, "UNIT2": unit2, "MLET2": mlet2, "MLET_L_GHOL": mlet_l_ghol, "MLET_R_GHOL": mlet_r_ghol,
    "MONO1": mono1, "UNIT1": unit1, "MLET1": mlet1,
}

ARITY = {
    "AX_U": 0, "AX_G": 0, "CONV": 0, "SUBST": 2, "LOEB": 1, "LATER_I": 1, "LATER_E": 1, "LATER_APP": 2,
    "BOX_I": 1, "BOX_E": 2, "TOP_I": 0, "BOT_E": 1, "AND_I": 2, "AND_E1": 1, "AND_E2": 1,
    "OR_I1": 1, "OR_I2": 1, "OR_E": 3, "IMP_I": 1, "IMP_E": 2, "NOT_I": 1, "NOT_E": 2,
    "ALL_I": 1, "ALL_E": 1, "EX_I": 1, "EX_E": 2, "AXIOM": 0,
    "MONO2": 2, "UNIT2": 1, "MLET2": 2, "MLET_L_GHOL": 2, "MLET_R_GHOL": 2,
    "MONO1": 2, "UNIT1": 1, "MLET1": 2,
}
