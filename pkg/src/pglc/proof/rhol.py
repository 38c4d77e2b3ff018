"""Relational rules: core, guarded two-sided and one-sided, and probabilistic."""
from __future__ import annotations

import dataclasses
from typing import Dict, List, Optional, Sequence, Tuple

from ..evalsem.normalize import HintError, equiv
from ..surface import ast as A
from ..surface.parser import InstValue, ProofNode
from ..typesys import is_constant, is_constant_formula
from .common import (dist_ty, foralls, goal_as, implies, is_app_of, is_unbox_of, later_ty, choose, clash_set,
                     open_binder, pair_names, replace_matching, shape, side_condition, type_shape, unbox)
from .judgement import (DISTINGUISHED, R, R1, R2, Context, Ghol, Judgement, Rhol, StrassenPremise, Uhol,
                        add_psi, add_sigma, bind_delta, bind_gamma, constant_part, gamma_names, mirror,
                        swap_rel, tctx)
from .kernel import Kernel, RuleError

V = A.Var


def _r(g: Judgement, n: ProofNode) -> Rhol:
    return goal_as(g, Rhol, n.rule)


def _ctx_names(g: Judgement) -> set:
    return {x for x, _ in g.ctx.gamma} | {x for x, _ in g.ctx.delta}


def _rel(phi: A.Formula, a: A.Term, b: A.Term) -> A.Formula:
    return A.subst(phi, {R1: a, R2: b})


def _fresh_pair(k: Kernel, g: Judgement, b1: str, b2: str, *extra: A.Node) -> Tuple[str, str]:
    avoid = k.avoid(g, *extra)
    return k.fresh(b1, avoid), k.fresh(b2, avoid)


def _binder_ok(g: Judgement, *names: str) -> None:
    for x in names:
        side_condition(x not in DISTINGUISHED, f"binder {x} collides with a distinguished variable")
        side_condition(x not in _ctx_names(g), f"binder {x} clashes with a context variable")


# ---------------------------------------------------------------- core


def abs_(k, g, n):
    g = _r(g, n)
    l1 = shape(k.view(g.t1, g), A.Lam, "left term")
    l2 = shape(k.view(g.t2, g), A.Lam, "right term")
    a1 = type_shape(g.a1, A.TArrow, "left term")
    a2 = type_shape(g.a2, A.TArrow, "right term")
    q1 = shape(g.phi, A.Forall, "ABS conclusion")
    q2 = shape(q1.body, A.Forall, "ABS conclusion")
    imp = shape(q2.body, A.Implies, "ABS conclusion")
    x1, x2 = q1.var, q2.var
    _binder_ok(g, x1, x2)
    side_condition(x1 != x2, "the two bound variables must differ")
    side_condition(x1 not in A.free_vars(l1) and x2 not in A.free_vars(l2), "bound variable captured")
    k.expect_type(q1.ty, a1.dom, "left quantifier type")
    k.expect_type(q2.ty, a2.dom, "right quantifier type")
    phi = k.opt(n, "phi", "form")
    if phi is None:
        phi = replace_matching(imp.right, is_app_of(R1, x1), V(R1))
        phi = replace_matching(phi, is_app_of(R2, x2), V(R2))
    k.expect_form(imp.right, _rel(phi, A.App(V(R1), V(x1)), A.App(V(R2), V(x2))), "ABS conclusion body")
    ctx = add_psi(bind_gamma(g.ctx, (x1, a1.dom), (x2, a2.dom)), imp.left)
    return [Rhol(ctx, open_binder(l1.var, l1.body, x1), a1.cod, open_binder(l2.var, l2.body, x2), a2.cod, phi)]


def app(k, g, n):
    g = _r(g, n)
    t1 = shape(k.view(g.t1, g), A.App, "left term")
    t2 = shape(k.view(g.t2, g), A.App, "right term")
    arg = k.need(n, "arg", "form")
    names = k.opt(n, "names", "names")
    if names is None:
        names = _fresh_pair(k, g, "x1", "x2", arg)
    x1, x2 = names
    _binder_ok(g, x1, x2)
    phi = k.opt(n, "phi", "form", g.phi)
    k.expect_form(g.phi, A.subst(phi, {x1: t1.arg, x2: t2.arg}), "APP conclusion")
    f1 = type_shape(k.synth(g, t1.fn), A.TArrow, "left function")
    f2 = type_shape(k.synth(g, t2.fn), A.TArrow, "right function")
    k.expect_type(f1.cod, g.a1, "left result type")
    k.expect_type(f2.cod, g.a2, "right result type")
    fun = foralls([(x1, f1.dom), (x2, f2.dom)],
                  A.Implies(_rel(arg, V(x1), V(x2)), _rel(phi, A.App(V(R1), V(x1)), A.App(V(R2), V(x2)))))
    return [Rhol(g.ctx, t1.fn, f1, t2.fn, f2, fun), Rhol(g.ctx, t1.arg, f1.dom, t2.arg, f2.dom, arg)]


def var_(k, g, n):
    g = _r(g, n)
    shape(g.t1, A.Var, "left term")
    shape(g.t2, A.Var, "right term")
    return [Ghol(g.ctx, _rel(g.phi, g.t1, g.t2))]


def sub_(k, g, n):
    g = _r(g, n)
    phi = k.need(n, "phi", "form")
    return [dataclasses.replace(g, phi=phi),
            Ghol(g.ctx, A.Implies(_rel(phi, g.t1, g.t2), _rel(g.phi, g.t1, g.t2)))]


def uhol_l(k, g, n):
    g = _r(g, n)
    return [Uhol(g.ctx, g.t1, g.a1, A.subst(g.phi, {R1: V(R), R2: g.t2}))]


def abs_l(k, g, n):
    g = _r(g, n)
    l1 = shape(k.view(g.t1, g), A.Lam, "left term")
    a1 = type_shape(g.a1, A.TArrow, "left term")
    q = shape(g.phi, A.Forall, "ABS_L conclusion")
    imp = shape(q.body, A.Implies, "ABS_L conclusion")
    x1 = q.var
    _binder_ok(g, x1)
    side_condition(x1 not in A.free_vars(l1) and x1 not in A.free_vars(g.t2), "bound variable captured")
    k.expect_type(q.ty, a1.dom, "quantifier type")
    phi = k.opt(n, "phi", "form")
    if phi is None:
        phi = replace_matching(imp.right, is_app_of(R1, x1), V(R1))
    k.expect_form(imp.right, A.subst(phi, {R1: A.App(V(R1), V(x1))}), "ABS_L conclusion body")
    ctx = add_psi(bind_gamma(g.ctx, (x1, a1.dom)), imp.left)
    return [Rhol(ctx, open_binder(l1.var, l1.body, x1), a1.cod, g.t2, g.a2, phi)]


def app_l(k, g, n):
    g = _r(g, n)
    t1 = shape(k.view(g.t1, g), A.App, "left term")
    arg = k.need(n, "arg", "form")
    names = k.opt(n, "names", "names")
    if names is None:
        names = (k.fresh("x1", k.avoid(g, arg)),)
    (x1,) = names
    _binder_ok(g, x1)
    phi = k.opt(n, "phi", "form", g.phi)
    k.expect_form(g.phi, A.subst(phi, {x1: t1.arg}), "APP_L conclusion")
    f1 = type_shape(k.synth(g, t1.fn), A.TArrow, "left function")
    k.expect_type(f1.cod, g.a1, "left result type")
    fun = A.Forall(x1, f1.dom, None,
                   A.Implies(A.subst(arg, {R: V(x1)}), A.subst(phi, {R1: A.App(V(R1), V(x1))})))
    return [Rhol(g.ctx, t1.fn, f1, g.t2, g.a2, fun), Uhol(g.ctx, t1.arg, f1.dom, arg)]


def var_l(k, g, n):
    g = _r(g, n)
    x = shape(g.t1, A.Var, "left term")
    side_condition(R2 not in A.free_vars(g.phi), "r2 must not occur in the refinement")
    want = A.subst(g.phi, {R1: x})
    side_condition(any(k.same_form(f, want) for f in g.ctx.psi), "instance is not among the Psi hypotheses")
    return []


def _hints(k: Kernel, n: ProofNode, key: str):
    return k.opt(n, key, "hints", k.opt(n, "hints", "hints", ()))


def equiv_(k, g, n):
    g = _r(g, n)
    left = k.opt(n, "left", "term", g.t1)
    right = k.opt(n, "right", "term", g.t2)
    try:
        ok1 = equiv(g.t1, left, _hints(k, n, "hints1"), k.fuel, k.sig.bodies)
        ok2 = equiv(g.t2, right, _hints(k, n, "hints2"), k.fuel, k.sig.bodies)
    except HintError as e:
        raise RuleError(str(e), "side condition")
    side_condition(ok1, "left terms are not equivalent under the given hints")
    side_condition(ok2, "right terms are not equivalent under the given hints")
    return [dataclasses.replace(g, t1=left, t2=right)]


def conj(k, g, n):
    g = _r(g, n)
    f = shape(g.phi, A.And, "CONJ conclusion")
    return [dataclasses.replace(g, phi=f.left), dataclasses.replace(g, phi=f.right)]


# ---------------------------------------------------------------- two-sided guarded


def _later_self(names: Sequence[str], body: A.Formula) -> A.Later:
    return A.Later(tuple(names), tuple(V(x) for x in names), body)


def _derive_later_body(k: Kernel, lat: A.Later, known: Sequence[Tuple[str, A.Term]]) -> A.Formula:
    """Rename the goal's delayed binders to the rule's names by matching arguments."""
    ren: Dict[str, A.Term] = {}
    for x, a in zip(lat.names, lat.args):
        for name, t in known:
            if k.same_term(a, t):
                ren[x] = V(name)
                break
        else:
            raise RuleError(f"delayed binder {x} is not bound to any argument of the rule's conclusion")
    return A.subst(lat.body, ren)


def next_(k, g, n):
    g = _r(g, n)
    t1 = shape(k.view(g.t1, g), A.Next, "left term")
    t2 = shape(k.view(g.t2, g), A.Next, "right term")
    side_condition(len(t1.names) == len(t2.names), "both sides need the same number of delayed bindings")
    m = len(t1.names)
    invs = k.opt(n, "invs", "forms", () if m == 0 else None)
    if invs is None or len(invs) != m:
        raise RuleError(f"NEXT needs invs := forms [...] with {m} formula(s)", "missing instantiation")
    b1t, b2t = later_ty(g.a1, "left term"), later_ty(g.a2, "right term")
    avoid, clash = k.avoid(g), clash_set(g)
    names1, names2 = [], []
    for x, y in zip(t1.names, t2.names):
        a, b = pair_names(x, y, clash, avoid)
        names1.append(a)
        names2.append(b)
    body1 = A.subst(t1.body, {o: V(x) for o, x in zip(t1.names, names1) if o != x})
    body2 = A.subst(t2.body, {o: V(x) for o, x in zip(t2.names, names2) if o != x})
    tys1 = [later_ty(k.synth(g, u), "delayed argument") for u in t1.args]
    tys2 = [later_ty(k.synth(g, u), "delayed argument") for u in t2.args]
    phi = k.opt(n, "phi", "form")
    if phi is None:
        lat = shape(g.phi, A.Later, "NEXT conclusion")
        known = list(zip(names1, t1.args)) + list(zip(names2, t2.args)) + [(R1, V(R1)), (R2, V(R2))]
        phi = _derive_later_body(k, lat, known)
    expected = A.Later(tuple(names1) + tuple(names2) + (R1, R2),
                       tuple(t1.args) + tuple(t2.args) + (V(R1), V(R2)), phi)
    k.expect_form(g.phi, expected, "NEXT conclusion")
    prem = [Rhol(g.ctx, u1, A.TLater(s1), u2, A.TLater(s2), _later_self((R1, R2), inv))
            for u1, u2, s1, s2, inv in zip(t1.args, t2.args, tys1, tys2, invs)]
    binds = []
    for a, b, s1, s2 in zip(names1, names2, tys1, tys2):
        binds += [(a, s1), (b, s2)]
    hyps = [_rel(inv, V(a), V(b)) for inv, a, b in zip(invs, names1, names2)]
    ctx = add_psi(bind_gamma(g.ctx, *binds), *hyps)
    return prem + [Rhol(ctx, body1, b1t, body2, b2t, phi)]


def prev(k, g, n):
    g = _r(g, n)
    s1 = shape(k.view(g.t1, g), A.Prev, "left term")
    s2 = shape(k.view(g.t2, g), A.Prev, "right term")
    return [Rhol(constant_part(g.ctx), s1.arg, A.TLater(g.a1), s2.arg, A.TLater(g.a2),
                 _later_self((R1, R2), g.phi))]


def _unboxed(k: Kernel, n: ProofNode, f: A.Formula, names: Sequence[str]) -> A.Formula:
    phi = k.opt(n, "phi", "form")
    if phi is None:
        phi = f
        for x in names:
            phi = replace_matching(phi, is_unbox_of(x), V(x))
    return phi


def box(k, g, n):
    g = _r(g, n)
    s1 = shape(k.view(g.t1, g), A.Box, "left term")
    s2 = shape(k.view(g.t2, g), A.Box, "right term")
    a1 = type_shape(g.a1, A.TBox, "left term").inner
    a2 = type_shape(g.a2, A.TBox, "right term").inner
    alw = shape(g.phi, A.Always, "BOX conclusion")
    phi = _unboxed(k, n, alw.body, (R1, R2))
    k.expect_form(g.phi, A.Always(_rel(phi, unbox(R1), unbox(R2))), "BOX conclusion")
    return [Rhol(constant_part(g.ctx), s1.arg, a1, s2.arg, a2, phi)]


def letbox(k, g, n):
    g = _r(g, n)
    l1 = shape(k.view(g.t1, g), A.LetBox, "left term")
    l2 = shape(k.view(g.t2, g), A.LetBox, "right term")
    phi = k.need(n, "phi", "form")
    b1 = type_shape(k.synth(g, l1.bound), A.TBox, "left boxed term").inner
    b2 = type_shape(k.synth(g, l2.bound), A.TBox, "right boxed term").inner
    x1, x2 = pair_names(l1.var, l2.var, clash_set(g), k.avoid(g))
    ctx = add_sigma(bind_delta(g.ctx, (x1, b1), (x2, b2)), _rel(phi, V(x1), V(x2)))
    return [Rhol(g.ctx, l1.bound, A.TBox(b1), l2.bound, A.TBox(b2), A.Always(_rel(phi, unbox(R1), unbox(R2)))),
            Rhol(ctx, open_binder(l1.var, l1.body, x1), g.a1, open_binder(l2.var, l2.body, x2), g.a2, g.phi)]


def _constant_side(k: Kernel, g: Judgement, phi: A.Formula, *tys: A.Type) -> None:
    for ty in tys:
        side_condition(is_constant(ty), "let const binds a non-constant type")
    side_condition(is_constant_formula(phi, tctx(constant_part(g.ctx)), k.sig), "refinement must be constant")
    side_condition(not (A.free_vars(phi) & set(gamma_names(g.ctx))),
                   "refinement mentions variables of Gamma")


def letconst(k, g, n):
    g = _r(g, n)
    l1 = shape(k.view(g.t1, g), A.LetConst, "left term")
    l2 = shape(k.view(g.t2, g), A.LetConst, "right term")
    phi = k.need(n, "phi", "form")
    b1, b2 = k.synth(g, l1.bound), k.synth(g, l2.bound)
    _constant_side(k, g, phi, b1, b2)
    x1, x2 = pair_names(l1.var, l2.var, clash_set(g), k.avoid(g))
    ctx = add_sigma(bind_delta(g.ctx, (x1, b1), (x2, b2)), _rel(phi, V(x1), V(x2)))
    return [Rhol(g.ctx, l1.bound, b1, l2.bound, b2, phi),
            Rhol(ctx, open_binder(l1.var, l1.body, x1), g.a1, open_binder(l2.var, l2.body, x2), g.a2, g.phi)]


def fix(k, g, n):
    g = _r(g, n)
    f1 = shape(k.view(g.t1, g), A.Fix, "left term")
    f2 = shape(k.view(g.t2, g), A.Fix, "right term")
    x1, x2 = pair_names(f1.var, f2.var, clash_set(g), k.avoid(g))
    hyp = A.Later((R1, R2), (V(x1), V(x2)), g.phi)
    ctx = add_psi(bind_gamma(g.ctx, (x1, A.TLater(g.a1)), (x2, A.TLater(g.a2))), hyp)
    return [Rhol(ctx, open_binder(f1.var, f1.body, x1), g.a1, open_binder(f2.var, f2.body, x2), g.a2, g.phi)]


def cons(k, g, n):
    g = _r(g, n)
    c1 = shape(k.view(g.t1, g), A.Cons, "left term")
    c2 = shape(k.view(g.t2, g), A.Cons, "right term")
    e1 = type_shape(g.a1, A.TStr, "left term").elem
    e2 = type_shape(g.a2, A.TStr, "right term").elem
    ph, pt = k.need(n, "head", "form"), k.need(n, "tail", "form")
    avoid = k.avoid(g, ph, pt)
    x1, x2, s1, s2 = (k.fresh(b, avoid) for b in ("x1", "x2", "xs1", "xs2"))
    l1, l2 = A.TLater(A.TStr(e1)), A.TLater(A.TStr(e2))
    glue = foralls([(x1, e1), (x2, e2), (s1, l1), (s2, l2)],
                   implies(_rel(ph, V(x1), V(x2)), _rel(pt, V(s1), V(s2)),
                           _rel(g.phi, A.Cons(V(x1), V(s1)), A.Cons(V(x2), V(s2)))))
    return [Rhol(g.ctx, c1.head, e1, c2.head, e2, ph), Rhol(g.ctx, c1.tail, l1, c2.tail, l2, pt), Ghol(g.ctx, glue)]


def head(k, g, n):
    g = _r(g, n)
    h1 = shape(k.view(g.t1, g), A.Head, "left term")
    h2 = shape(k.view(g.t2, g), A.Head, "right term")
    return [Rhol(g.ctx, h1.arg, A.TStr(g.a1), h2.arg, A.TStr(g.a2), _rel(g.phi, A.Head(V(R1)), A.Head(V(R2))))]


def tail(k, g, n):
    g = _r(g, n)
    s1 = shape(k.view(g.t1, g), A.Tail, "left term")
    s2 = shape(k.view(g.t2, g), A.Tail, "right term")
    a1 = type_shape(later_ty(g.a1, "left term"), A.TStr, "left term")
    a2 = type_shape(later_ty(g.a2, "right term"), A.TStr, "right term")
    return [Rhol(g.ctx, s1.arg, a1, s2.arg, a2, _rel(g.phi, A.Tail(V(R1)), A.Tail(V(R2))))]


# ---------------------------------------------------------------- one-sided guarded (left)


def next_l(k, g, n):
    g = _r(g, n)
    t1 = shape(k.view(g.t1, g), A.Next, "left term")
    m = len(t1.names)
    invs = k.opt(n, "invs", "forms", () if m == 0 else None)
    if invs is None or len(invs) != m:
        raise RuleError(f"{n.rule} needs invs := forms [...] with {m} formula(s)", "missing instantiation")
    avoid, clash = k.avoid(g), clash_set(g)
    names = [choose(x, clash, avoid) for x in t1.names]
    body = A.subst(t1.body, {o: V(x) for o, x in zip(t1.names, names) if o != x})
    tys = [later_ty(k.synth(g, u), "delayed argument") for u in t1.args]
    phi = k.opt(n, "phi", "form")
    if phi is None:
        lat = shape(g.phi, A.Later, f"{n.rule} conclusion")
        phi = _derive_later_body(k, lat, list(zip(names, t1.args)) + [(R1, V(R1))])
    k.expect_form(g.phi, A.Later(tuple(names) + (R1,), tuple(t1.args) + (V(R1),), phi), f"{n.rule} conclusion")
    prem: List[Judgement] = [Uhol(g.ctx, u, A.TLater(s), _later_self((R,), inv))
                             for u, s, inv in zip(t1.args, tys, invs)]
    hyps = [A.subst(inv, {R: V(x)}) for inv, x in zip(invs, names)]
    ctx = add_psi(bind_gamma(g.ctx, *zip(names, tys)), *hyps)
    return prem + [Rhol(ctx, body, later_ty(g.a1, "left term"), g.t2, g.a2, phi)]


def prev_l(k, g, n):
    g = _r(g, n)
    s1 = shape(k.view(g.t1, g), A.Prev, "left term")
    return [Rhol(constant_part(g.ctx), s1.arg, A.TLater(g.a1), g.t2, g.a2, _later_self((R1,), g.phi))]


def box_l(k, g, n):
    g = _r(g, n)
    s1 = shape(k.view(g.t1, g), A.Box, "left term")
    a1 = type_shape(g.a1, A.TBox, "left term").inner
    keep = set(k.need(n, "keep", "names"))
    unknown = keep - set(gamma_names(g.ctx))
    side_condition(not unknown, f"keep lists names outside Gamma: {', '.join(sorted(unknown))}")
    side_condition(not (A.free_vars(s1.arg) & keep), "the boxed term must not use the kept variables")
    gnames = set(gamma_names(g.ctx))
    gamma2 = tuple(b for b in g.ctx.gamma if b[0] in keep)
    psi2 = tuple(f for f in g.ctx.psi if (A.free_vars(f) & gnames) <= keep)
    alw = shape(g.phi, A.Always, f"{n.rule} conclusion")
    phi = _unboxed(k, n, alw.body, (R1,))
    k.expect_form(g.phi, A.Always(A.subst(phi, {R1: unbox(R1)})), f"{n.rule} conclusion")
    ctx = Context(g.ctx.delta, g.ctx.sigma, gamma2, psi2)
    return [Rhol(ctx, s1.arg, a1, g.t2, g.a2, phi)]


def letbox_l(k, g, n):
    g = _r(g, n)
    l1 = shape(k.view(g.t1, g), A.LetBox, "left term")
    phi = k.need(n, "phi", "form")
    b = type_shape(k.synth(g, l1.bound), A.TBox, "boxed term").inner
    x = choose(l1.var, clash_set(g), k.avoid(g))
    ctx = add_sigma(bind_delta(g.ctx, (x, b)), A.subst(phi, {R: V(x)}))
    return [Uhol(g.ctx, l1.bound, A.TBox(b), A.Always(A.subst(phi, {R: unbox(R)}))),
            Rhol(ctx, open_binder(l1.var, l1.body, x), g.a1, g.t2, g.a2, g.phi)]


def letconst_l(k, g, n):
    g = _r(g, n)
    l1 = shape(k.view(g.t1, g), A.LetConst, "left term")
    phi = k.need(n, "phi", "form")
    b = k.synth(g, l1.bound)
    _constant_side(k, g, phi, b)
    x = choose(l1.var, clash_set(g), k.avoid(g))
    ctx = add_sigma(bind_delta(g.ctx, (x, b)), A.subst(phi, {R: V(x)}))
    return [Uhol(g.ctx, l1.bound, b, phi), Rhol(ctx, open_binder(l1.var, l1.body, x), g.a1, g.t2, g.a2, g.phi)]


def fix_l(k, g, n):
    g = _r(g, n)
    f1 = shape(k.view(g.t1, g), A.Fix, "left term")
    f = choose(f1.var, clash_set(g), k.avoid(g))
    hyp = A.Later((R1,), (V(f),), A.subst(g.phi, {R2: g.t2}))
    ctx = add_psi(bind_gamma(g.ctx, (f, A.TLater(g.a1))), hyp)
    return [Rhol(ctx, open_binder(f1.var, f1.body, f), g.a1, g.t2, g.a2, g.phi)]


def cons_l(k, g, n):
    g = _r(g, n)
    c1 = shape(k.view(g.t1, g), A.Cons, "left term")
    e1 = type_shape(g.a1, A.TStr, "left term").elem
    ph, pt = k.need(n, "head", "form"), k.need(n, "tail", "form")
    avoid = k.avoid(g, ph, pt)
    x1, x2, s1 = (k.fresh(b, avoid) for b in ("x1", "x2", "xs1"))
    l1 = A.TLater(A.TStr(e1))
    glue = foralls([(x1, e1), (x2, g.a2), (s1, l1)],
                   implies(_rel(ph, V(x1), V(x2)), _rel(pt, V(s1), V(x2)),
                           _rel(g.phi, A.Cons(V(x1), V(s1)), V(x2))))
    return [Rhol(g.ctx, c1.head, e1, g.t2, g.a2, ph), Rhol(g.ctx, c1.tail, l1, g.t2, g.a2, pt), Ghol(g.ctx, glue)]


def head_l(k, g, n):
    g = _r(g, n)
    h1 = shape(k.view(g.t1, g), A.Head, "left term")
    return [Rhol(g.ctx, h1.arg, A.TStr(g.a1), g.t2, g.a2, A.subst(g.phi, {R1: A.Head(V(R1))}))]


def tail_l(k, g, n):
    g = _r(g, n)
    s1 = shape(k.view(g.t1, g), A.Tail, "left term")
    a1 = type_shape(later_ty(g.a1, "left term"), A.TStr, "left term")
    return [Rhol(g.ctx, s1.arg, a1, g.t2, g.a2, A.subst(g.phi, {R1: A.Tail(V(R1))}))]


# ---------------------------------------------------------------- probabilistic


def _dia_rr(g: Rhol, rule: str) -> A.Dia2:
    d = shape(g.phi, A.Dia2, f"{rule} conclusion")
    ok = (isinstance(d.arg1, A.Var) and d.arg1.name == R1 and isinstance(d.arg2, A.Var) and d.arg2.name == R2)
    side_condition(ok, f"{rule} concludes a diamond over r1 and r2")
    return d


def unit_p(k, g, n):
    g = _r(g, n)
    d = _dia_rr(g, n.rule)
    s1 = shape(k.view(g.t1, g), A.Return, "left term")
    s2 = shape(k.view(g.t2, g), A.Return, "right term")
    c1, c2 = dist_ty(g.a1, "left term"), dist_ty(g.a2, "right term")
    return [Rhol(g.ctx, s1.arg, c1, s2.arg, c2, A.subst(d.body, {d.var1: V(R1), d.var2: V(R2)}))]


def mlet_p(k, g, n):
    g = _r(g, n)
    _dia_rr(g, n.rule)
    m1 = shape(k.view(g.t1, g), A.MLet, "left term")
    m2 = shape(k.view(g.t2, g), A.MLet, "right term")
    phi = k.need(n, "phi", "form")
    x1, x2 = pair_names(m1.var, m2.var, clash_set(g), k.avoid(g))
    c1 = dist_ty(k.synth(g, m1.bound), "left bound computation")
    c2 = dist_ty(k.synth(g, m2.bound), "right bound computation")
    ctx = add_psi(bind_gamma(g.ctx, (x1, c1), (x2, c2)), phi)
    return [Rhol(g.ctx, m1.bound, A.TDist(c1), m2.bound, A.TDist(c2), A.Dia2(x1, V(R1), x2, V(R2), phi)),
            Rhol(ctx, open_binder(m1.var, m1.body, x1), g.a1, open_binder(m2.var, m2.body, x2), g.a2, g.phi)]


def mlet_p_l(k, g, n):
    g = _r(g, n)
    _dia_rr(g, n.rule)
    m1 = shape(k.view(g.t1, g), A.MLet, "left term")
    phi = k.need(n, "phi", "form")
    x = choose(m1.var, clash_set(g), k.avoid(g))
    c = dist_ty(k.synth(g, m1.bound), "bound computation")
    ctx = add_psi(bind_gamma(g.ctx, (x, c)), phi)
    return [Uhol(g.ctx, m1.bound, A.TDist(c), A.Dia1(x, V(R), phi)),
            Rhol(ctx, open_binder(m1.var, m1.body, x), g.a1, g.t2, g.a2, g.phi)]


def coupling(k, g, n):
    g = _r(g, n)
    d = _dia_rr(g, n.rule)
    dist_ty(g.a1, "left term")
    dist_ty(g.a2, "right term")
    return [StrassenPremise(g.ctx, g.t1, g.t2, d.var1, d.var2, d.body)]


def _markov_parts(k: Kernel, g: Judgement, t: A.Term, what: str) -> Tuple[A.Term, A.Term]:
    while isinstance(t, A.Ann):
        t = t.term
    ok = (isinstance(t, A.App) and isinstance(t.fn, A.App) and isinstance(t.fn.fn, A.Var)
          and t.fn.fn.name == "markov" and k.is_global("markov", g))
    side_condition(ok, f"{what} must be an application markov s h")
    return t.fn.arg, t.arg


def _chain_types(g: Rhol) -> Tuple[A.Type, A.Type]:
    c1 = type_shape(dist_ty(g.a1, "left term"), A.TStr, "left term").elem
    c2 = type_shape(dist_ty(g.a2, "right term"), A.TStr, "right term").elem
    return c1, c2


def _kernel_ty(c: A.Type) -> A.Type:
    return A.TArrow(c, A.TDist(c))


def markov(k, g, n):
    g = _r(g, n)
    d = _dia_rr(g, n.rule)
    s1, h1 = _markov_parts(k, g, g.t1, "left term")
    s2, h2 = _markov_parts(k, g, g.t2, "right term")
    c1, c2 = _chain_types(g)
    phi = k.need(n, "phi", "form")
    avoid = k.avoid(g, phi)
    x1, x2, xs1, xs2, y1, y2 = (k.fresh(b, avoid) for b in ("x1", "x2", "xs1", "xs2", "y1", "y2"))
    psi3 = foralls([(x1, c1), (x2, c2)],
                   A.Implies(_rel(phi, V(x1), V(x2)),
                             A.Dia2(y1, A.App(V(R1), V(x1)), y2, A.App(V(R2), V(x2)), _rel(phi, V(y1), V(y2)))))
    psi4 = foralls([(x1, c1), (x2, c2), (xs1, A.TLater(A.TStr(c1))), (xs2, A.TLater(A.TStr(c2)))],
                   implies(_rel(phi, V(x1), V(x2)),
                           A.Later((d.var1, d.var2), (V(xs1), V(xs2)), d.body),
                           A.subst(d.body, {d.var1: A.Cons(V(x1), V(xs1)), d.var2: A.Cons(V(x2), V(xs2))})))
    return [Rhol(g.ctx, s1, c1, s2, c2, phi),
            Rhol(g.ctx, h1, _kernel_ty(c1), h2, _kernel_ty(c2), psi3),
            Ghol(g.ctx, psi4)]


def iterate_kernel(h: A.Term, times: int, avoid: set) -> A.Term:
    """``h`` composed with itself ``times`` times in the distribution monad."""
    if times == 1:
        return h
    xs = [A.fresh("x", avoid | set(A.all_names(h)))]
    for _ in range(times - 1):
        xs.append(A.fresh(xs[-1] + "'", avoid | set(xs) | set(A.all_names(h))))
    body: A.Term = A.App(h, V(xs[-1]))
    for a, b in reversed(list(zip(xs, xs[1:]))):
        body = A.MLet(b, A.App(h, V(a)), body)
    return A.Lam(xs[0], None, body)


def markov_m_n(k, g, n):
    g = _r(g, n)
    d = _dia_rr(g, n.rule)
    m, nn = k.need(n, "m", "nat"), k.need(n, "n", "nat")
    side_condition(m >= 1 and nn >= 1, "step counts must be positive")
    s1, h1 = _markov_parts(k, g, g.t1, "left term")
    s2, h2 = _markov_parts(k, g, g.t2, "right term")
    c1, c2 = _chain_types(g)
    pred = shape(d.body, A.Pred, f"{n.rule} conclusion")
    name = "All" if (m, nn) == (1, 1) and pred.name == "All" else f"All_{m}_{nn}"
    side_condition(pred.name == name, f"{n.rule} with steps ({m},{nn}) concludes {name}")
    side_condition(len(pred.args) == 3, f"{name} relates two streams")
    ab = shape(pred.args[2], A.FAbs, "predicate argument")
    z1, z2 = ab.params
    phi = k.opt(n, "phi", "form")
    if phi is None:
        phi = A.subst(ab.body, {z1: V(R1), z2: V(R2)})
    expected = A.Dia2(d.var1, V(R1), d.var2, V(R2),
                      A.Pred(name, (V(d.var1), V(d.var2), A.FAbs((z1, z2), _rel(phi, V(z1), V(z2))))))
    k.expect_form(g.phi, expected, f"{n.rule} conclusion")
    avoid = k.avoid(g, phi)
    x1, x2, y1, y2 = (k.fresh(b, avoid) for b in ("x1", "x2", "z1", "z2"))
    step = foralls([(x1, c1), (x2, c2)],
                   A.Implies(_rel(phi, V(x1), V(x2)),
                             A.Dia2(y1, A.App(V(R1), V(x1)), y2, A.App(V(R2), V(x2)), _rel(phi, V(y1), V(y2)))))
    k1 = iterate_kernel(h1, m, avoid)
    k2 = iterate_kernel(h2, nn, avoid)
    return [Rhol(g.ctx, s1, c1, s2, c2, phi), Rhol(g.ctx, k1, _kernel_ty(c1), k2, _kernel_ty(c2), step)]


def markov_fixed(m: int, nn: int):
    """MARKOV_M_N with the step counts fixed in the rule name."""
    def run(k, g, n):
        inst = dict(n.inst, m=InstValue("nat", m), n=InstValue("nat", nn))
        return markov_m_n(k, g, ProofNode(n.rule, inst, n.children, n.span))
    return run


# ---------------------------------------------------------------- right-hand variants by symmetry


def _swap_inst(iv: InstValue) -> InstValue:
    if iv.kind == "form":
        return InstValue(iv.kind, swap_rel(iv.value))
    if iv.kind == "forms":
        return InstValue(iv.kind, tuple(swap_rel(f) for f in iv.value))
    if iv.kind == "hints":
        flip = {"left": "right", "right": "left"}
        return InstValue(iv.kind, tuple(dataclasses.replace(h, side=flip.get(h.side, h.side)) for h in iv.value))
    return iv


def mirrored(rule):
    """The right-hand twin of a left-hand rule: swap the sides, apply, swap back."""
    def run(k, g, n):
        g = _r(g, n)
        n2 = ProofNode(n.rule, {key: _swap_inst(v) for key, v in n.inst.items()}, n.children, n.span)
        return [mirror(p) for p in rule(k, mirror(g), n2)]
    run.__name__ = rule.__name__.replace("_l", "_r")
    return run


def uhol_r(k, g, n):
    g = _r(g, n)
    return [Uhol(g.ctx, g.t2, g.a2, A.subst(g.phi, {R2: V(R), R1: g.t1}))]


LEFT = {
    "ABS_L": abs_l, "APP_L": app_l, "VAR_L": var_l,
    "NEXT_L": next_l, "PREV_L": prev_l, "BOX_L": box_l, "LETBOX_L": letbox_l, "LETCONST_L": letconst_l,
    "FIX_L": fix_l, "CONS_L": cons_l, "HEAD_L": head_l, "TAIL_L": tail_l, "MLET_P_L": mlet_p_l,
}

RULES = {
    "ABS": abs_, "APP": app, "VAR": var_, "SUB": sub_, "UHOL_L": uhol_l, "UHOL_R": uhol_r, "EQUIV": equiv_,
    "CONJ": conj,
    "NEXT": next_, "PREV": prev, "BOX": box, "LETBOX": letbox, "LETCONST": letconst, "FIX": fix,
    "CONS": cons, "HEAD": head, "TAIL": tail,
    "UNIT_P": unit_p, "MLET_P": mlet_p, "COUPLING": coupling, "MARKOV": markov, "MARKOV_M_N": markov_m_n,
    "MARKOV_2_1": markov_fixed(2, 1),
}
RULES.update(LEFT)
RULES.update({name[:-2] + "_R": mirrored(fn) for name, fn in LEFT.items()})

ARITY = {
    "ABS": 1, "APP": 2, "VAR": 1, "SUB": 2, "UHOL_L": 1, "UHOL_R": 1, "EQUIV": 1, "CONJ": 2,
    "NEXT": None, "PREV": 1, "BOX": 1, "LETBOX": 2, "LETCONST": 2, "FIX": 1, "CONS": 3, "HEAD": 1, "TAIL": 1,
    "UNIT_P": 1, "MLET_P": 2, "COUPLING": 1, "MARKOV": 3, "MARKOV_M_N": 2, "MARKOV_2_1": 2,
    "ABS_L": 1, "APP_L": 2, "VAR_L": 0, "NEXT_L": None, "PREV_L": 1, "BOX_L": 1, "LETBOX_L": 2,
    "LETCONST_L": 2, "FIX_L": 1, "CONS_L": 3, "HEAD_L": 1, "TAIL_L": 1, "MLET_P_L": 2,
}
ARITY.update({name[:-2] + "_R": ARITY[name] for name in LEFT})
