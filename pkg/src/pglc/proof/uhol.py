"""Unary rules (one refined term)."""
from __future__ import annotations

import dataclasses
from typing import List

from ..evalsem.normalize import HintError, equiv
from ..surface import ast as A
from ..surface.parser import ProofNode
from ..typesys import is_constant
from .common import (choose, clash_set, dist_ty, foralls, goal_as, implies, is_app_of, is_unbox_of, later_ty,
                     open_binder, replace_matching, shape, side_condition, type_shape, unbox)
from .judgement import (DISTINGUISHED, R, Ghol, Judgement, Uhol, add_psi, add_sigma, bind_delta, bind_gamma,
                        constant_part)
from .kernel import Kernel, RuleError
from .rhol import _constant_side, _derive_later_body, _later_self

V = A.Var


def _u(g: Judgement, n: ProofNode) -> Uhol:
    return goal_as(g, Uhol, n.rule)


def _at(phi: A.Formula, t: A.Term) -> A.Formula:
    return A.subst(phi, {R: t})


def u_abs(k, g, n):
    g = _u(g, n)
    lam = shape(k.view(g.term, g), A.Lam, "term")
    arr = type_shape(g.ty, A.TArrow, "term")
    q = shape(g.phi, A.Forall, "U_ABS conclusion")
    imp = shape(q.body, A.Implies, "U_ABS conclusion")
    x = q.var
    side_condition(x not in DISTINGUISHED, f"binder {x} collides with a distinguished variable")
    side_condition(x not in {y for y, _ in g.ctx.gamma + g.ctx.delta}, f"binder {x} clashes with a context variable")
    side_condition(x not in A.free_vars(lam), "bound variable captured")
    k.expect_type(q.ty, arr.dom, "quantifier type")
    phi = k.opt(n, "phi", "form")
    if phi is None:
        phi = replace_matching(imp.right, is_app_of(R, x), V(R))
    k.expect_form(imp.right, _at(phi, A.App(V(R), V(x))), "U_ABS conclusion body")
    ctx = add_psi(bind_gamma(g.ctx, (x, arr.dom)), imp.left)
    return [Uhol(ctx, open_binder(lam.var, lam.body, x), arr.cod, phi)]


def u_app(k, g, n):
    g = _u(g, n)
    t = shape(k.view(g.term, g), A.App, "term")
    arg = k.need(n, "arg", "form")
    names = k.opt(n, "names", "names")
    if names is None:
        names = (k.fresh("x", k.avoid(g, arg)),)
    (x,) = names
    phi = k.opt(n, "phi", "form", g.phi)
    k.expect_form(g.phi, A.subst(phi, {x: t.arg}), "U_APP conclusion")
    f = type_shape(k.synth(g, t.fn), A.TArrow, "function")
    k.expect_type(f.cod, g.ty, "result type")
    fun = A.Forall(x, f.dom, None, A.Implies(_at(arg, V(x)), _at(phi, A.App(V(R), V(x)))))
    return [Uhol(g.ctx, t.fn, f, fun), Uhol(g.ctx, t.arg, f.dom, arg)]


def u_var(k, g, n):
    g = _u(g, n)
    x = shape(g.term, A.Var, "term")
    side_condition(any(k.same_form(f, _at(g.phi, x)) for f in g.ctx.psi), "instance is not among the Psi hypotheses")
    return []


def u_sub(k, g, n):
    g = _u(g, n)
    phi = k.need(n, "phi", "form")
    return [dataclasses.replace(g, phi=phi), Ghol(g.ctx, A.Implies(_at(phi, g.term), _at(g.phi, g.term)))]


def u_equiv(k, g, n):
    g = _u(g, n)
    new = k.need(n, "term", "term")
    try:
        ok = equiv(g.term, new, k.opt(n, "hints", "hints", ()), k.fuel, k.sig.bodies)
    except HintError as e:
        raise RuleError(str(e), "side condition")
    side_condition(ok, "terms are not equivalent under the given hints")
    return [dataclasses.replace(g, term=new)]


def u_conj(k, g, n):
    g = _u(g, n)
    f = shape(g.phi, A.And, "U_CONJ conclusion")
    return [dataclasses.replace(g, phi=f.left), dataclasses.replace(g, phi=f.right)]


def u_next(k, g, n):
    g = _u(g, n)
    t = shape(k.view(g.term, g), A.Next, "term")
    m = len(t.names)
    invs = k.opt(n, "invs", "forms", () if m == 0 else None)
    if invs is None or len(invs) != m:
        raise RuleError(f"U_NEXT needs invs := forms [...] with {m} formula(s)", "missing instantiation")
    clash, avoid = clash_set(g), k.avoid(g)
    names = [choose(x, clash, avoid) for x in t.names]
    body = A.subst(t.body, {o: V(x) for o, x in zip(t.names, names) if o != x})
    tys = [later_ty(k.synth(g, u), "delayed argument") for u in t.args]
    phi = k.opt(n, "phi", "form")
    if phi is None:
        lat = shape(g.phi, A.Later, "U_NEXT conclusion")
        phi = _derive_later_body(k, lat, list(zip(names, t.args)) + [(R, V(R))])
    k.expect_form(g.phi, A.Later(tuple(names) + (R,), tuple(t.args) + (V(R),), phi), "U_NEXT conclusion")
    prem: List[Judgement] = [Uhol(g.ctx, u, A.TLater(s), _later_self((R,), inv)) for u, s, inv in zip(t.args, tys, invs)]
    ctx = add_psi(bind_gamma(g.ctx, *zip(names, tys)), *[_at(inv, V(x)) for inv, x in zip(invs, names)])
    return prem + [Uhol(ctx, body, later_ty(g.ty, "term"), phi)]


def u_prev(k, g, n):
    g = _u(g, n)
    s = shape(k.view(g.term, g), A.Prev, "term")
    return [Uhol(constant_part(g.ctx), s.arg, A.TLater(g.ty), _later_self((R,), g.phi))]


def u_box(k, g, n):
    g = _u(g, n)
    s = shape(k.view(g.term, g), A.Box, "term")
    inner = type_shape(g.ty, A.TBox, "term").inner
    alw = shape(g.phi, A.Always, "U_BOX conclusion")
    phi = k.opt(n, "phi", "form") or replace_matching(alw.body, is_unbox_of(R), V(R))
    k.expect_form(g.phi, A.Always(_at(phi, unbox(R))), "U_BOX conclusion")
    return [Uhol(constant_part(g.ctx), s.arg, inner, phi)]


def u_letbox(k, g, n):
    g = _u(g, n)
    lb = shape(k.view(g.term, g), A.LetBox, "term")
    phi = k.need(n, "phi", "form")
    b = type_shape(k.synth(g, lb.bound), A.TBox, "boxed term").inner
    x = choose(lb.var, clash_set(g), k.avoid(g))
    return [Uhol(g.ctx, lb.bound, A.TBox(b), A.Always(_at(phi, unbox(R)))),
            Uhol(add_sigma(bind_delta(g.ctx, (x, b)), _at(phi, V(x))), open_binder(lb.var, lb.body, x), g.ty, g.phi)]


def u_letconst(k, g, n):
    g = _u(g, n)
    lc = shape(k.view(g.term, g), A.LetConst, "term")
    phi = k.need(n, "phi", "form")
    b = k.synth(g, lc.bound)
    _constant_side(k, g, phi, b)
    x = choose(lc.var, clash_set(g), k.avoid(g))
    return [Uhol(g.ctx, lc.bound, b, phi),
            Uhol(add_sigma(bind_delta(g.ctx, (x, b)), _at(phi, V(x))), open_binder(lc.var, lc.body, x), g.ty, g.phi)]


def u_fix(k, g, n):
    g = _u(g, n)
    fx = shape(k.view(g.term, g), A.Fix, "term")
    f = choose(fx.var, clash_set(g), k.avoid(g))
    ctx = add_psi(bind_gamma(g.ctx, (f, A.TLater(g.ty))), A.Later((R,), (V(f),), g.phi))
    return [Uhol(ctx, open_binder(fx.var, fx.body, f), g.ty, g.phi)]


def _glue(k: Kernel, g: Uhol, ph, pt, elem: A.Type, tail_ty: A.Type, build) -> Ghol:
    avoid = k.avoid(g, ph, pt)
    x, xs = k.fresh("x", avoid), k.fresh("xs", avoid)
    return Ghol(g.ctx, foralls([(x, elem), (xs, tail_ty)],
                               implies(_at(ph, V(x)), _at(pt, V(xs)), _at(g.phi, build(V(x), V(xs))))))


def u_cons(k, g, n):
    g = _u(g, n)
    c = shape(k.view(g.term, g), A.Cons, "term")
    e = type_shape(g.ty, A.TStr, "term").elem
    ph, pt = k.need(n, "head", "form"), k.need(n, "tail", "form")
    tl = A.TLater(A.TStr(e))
    return [Uhol(g.ctx, c.head, e, ph), Uhol(g.ctx, c.tail, tl, pt), _glue(k, g, ph, pt, e, tl, A.Cons)]


def u_conshat(k, g, n):
    g = _u(g, n)
    t = g.term
    while isinstance(t, A.Ann):
        t = t.term
    ok = (isinstance(t, A.App) and isinstance(t.fn, A.App) and isinstance(t.fn.fn, A.Var)
          and t.fn.fn.name == "conshat" and k.is_global("conshat", g))
    side_condition(ok, "term must be an application conshat x s")
    h, s = t.fn.arg, t.arg
    st = type_shape(type_shape(g.ty, A.TBox, "term").inner, A.TStr, "term")
    e = st.elem
    side_condition(is_constant(e), "element type must be constant")
    ph, pt = k.need(n, "head", "form"), k.need(n, "tail", "form")
    _constant_side(k, g, ph)
    build = lambda x, xs: A.App(A.App(V("conshat"), x), xs)
    return [Uhol(g.ctx, h, e, ph), Uhol(g.ctx, s, g.ty, pt), _glue(k, g, ph, pt, e, g.ty, build)]


def u_head(k, g, n):
    g = _u(g, n)
    h = shape(k.view(g.term, g), A.Head, "term")
    return [Uhol(g.ctx, h.arg, A.TStr(g.ty), _at(g.phi, A.Head(V(R))))]


def u_tail(k, g, n):
    g = _u(g, n)
    s = shape(k.view(g.term, g), A.Tail, "term")
    st = type_shape(later_ty(g.ty, "term"), A.TStr, "term")
    return [Uhol(g.ctx, s.arg, st, _at(g.phi, A.Tail(V(R))))]


def _dia_r(g: Uhol, rule: str) -> A.Dia1:
    d = shape(g.phi, A.Dia1, f"{rule} conclusion")
    side_condition(isinstance(d.arg, A.Var) and d.arg.name == R, f"{rule} concludes a diamond over r")
    return d


def u_unit(k, g, n):
    g = _u(g, n)
    d = _dia_r(g, n.rule)
    s = shape(k.view(g.term, g), A.Return, "term")
    return [Uhol(g.ctx, s.arg, dist_ty(g.ty, "term"), A.subst(d.body, {d.var: V(R)}))]


def u_mlet(k, g, n):
    g = _u(g, n)
    _dia_r(g, n.rule)
    m = shape(k.view(g.term, g), A.MLet, "term")
    phi = k.need(n, "phi", "form")
    x = choose(m.var, clash_set(g), k.avoid(g))
    c = dist_ty(k.synth(g, m.bound), "bound computation")
    return [Uhol(g.ctx, m.bound, A.TDist(c), A.Dia1(x, V(R), phi)),
            Uhol(add_psi(bind_gamma(g.ctx, (x, c)), phi), open_binder(m.var, m.body, x), g.ty, g.phi)]


def supp(k, g, n):
    g = _u(g, n)
    d = _dia_r(g, n.rule)
    return [Ghol(g.ctx, A.Dia1(d.var, g.term, d.body))]


RULES = {
    "U_ABS": u_abs, "U_APP": u_app, "U_VAR": u_var, "U_SUB": u_sub, "U_EQUIV": u_equiv, "U_CONJ": u_conj,
    "U_NEXT": u_next, "U_PREV": u_prev, "U_BOX": u_box, "U_LETBOX": u_letbox, "U_LETCONST": u_letconst,
    "U_FIX": u_fix, "U_CONS": u_cons, "U_CONSHAT": u_conshat, "U_HEAD": u_head, "U_TAIL": u_tail,
    "U_UNIT": u_unit, "U_MLET": u_mlet, "SUPP": supp,
}

ARITY = {
    "U_ABS": 1, "U_APP": 2, "U_VAR": 0, "U_SUB": 2, "U_EQUIV": 1, "U_CONJ": 2,
    "U_NEXT": None, "U_PREV": 1, "U_BOX": 1, "U_LETBOX": 2, "U_LETCONST": 2,
    "U_FIX": 1, "U_CONS": 3, "U_CONSHAT": 3, "U_HEAD": 1, "U_TAIL": 1,
    "U_UNIT": 1, "U_MLET": 2, "SUPP": 1,
}
