"""Small helpers shared by the rule modules."""
from __future__ import annotations

import dataclasses
from typing import Callable, List, Sequence, Tuple, Type, TypeVar

from ..surface import ast as A
from ..surface.pretty import pretty, pretty_formula, pretty_type
from .judgement import R, R1, R2, Ghol, Judgement, Rhol, StrassenPremise, Uhol
from .kernel import RuleError

J = TypeVar("J")


def goal_as(g: Judgement, cls: Type[J], rule: str) -> J:
    if not isinstance(g, cls):
        kind = {Ghol: "ghol", Uhol: "uhol", Rhol: "rhol", StrassenPremise: "coupling premise"}
        raise RuleError(f"{rule} concludes a {kind[cls]} judgement, goal is a {kind[type(g)]} judgement")
    return g


def shape(t: A.Node, cls, what: str):
    if not isinstance(t, cls):
        s = pretty(t) if isinstance(t, A.Term) else (pretty_formula(t) if isinstance(t, A.Formula) else str(t))
        raise RuleError(f"{what} must be a {cls.__name__}, found {s}")
    return t


def type_shape(ty: A.Type, cls, what: str):
    if not isinstance(ty, cls):
        raise RuleError(f"{what} must have a {cls.__name__} type, found {pretty_type(ty)}")
    return ty


def side_condition(ok: bool, msg: str) -> None:
    if not ok:
        raise RuleError(msg, "side condition")


def sub(phi: A.Node, **m: A.Term) -> A.Node:
    return A.subst(phi, m)


def var(n: str) -> A.Var:
    return A.Var(n)


def replace_matching(node: A.Node, match: Callable[[A.Node], bool], repl: A.Node) -> A.Node:
    """Replace every subterm accepted by ``match`` (outermost first)."""
    if match(node):
        return repl
    return A.map_children(node, lambda c, b: replace_matching(c, match, repl))


def is_app_of(fn: str, arg: str) -> Callable[[A.Node], bool]:
    def m(n: A.Node) -> bool:
        return (isinstance(n, A.App) and isinstance(n.fn, A.Var) and n.fn.name == fn
                and isinstance(n.arg, A.Var) and n.arg.name == arg)
    return m


def is_unbox_of(name: str) -> Callable[[A.Node], bool]:
    """Matches ``let box x = name in x`` for any ``x``."""
    def m(n: A.Node) -> bool:
        return (isinstance(n, A.LetBox) and isinstance(n.bound, A.Var) and n.bound.name == name
                and isinstance(n.body, A.Var) and n.body.name == n.var)
    return m


def unbox(name: str, x: str = "x") -> A.Term:
    return A.LetBox(x, A.Var(name), A.Var(x))


def clash_set(g: Judgement) -> set:
    """Names a new context binder must not take: context, reserved and free names of ``g``."""
    out = {x for x, _ in g.ctx.gamma} | {x for x, _ in g.ctx.delta} | {R, R1, R2}
    for f in g.ctx.sigma + g.ctx.psi:
        out |= A.free_vars(f)
    nodes = [g.phi] + [getattr(g, a) for a in ("term", "t1", "t2") if hasattr(g, a)]
    for x in nodes:
        out |= A.free_vars(x)
    return out


def choose(n: str, clash: set, avoid: set) -> str:
    """Keep binder ``n`` unless it clashes; otherwise pick a fresh variant."""
    if n in clash:
        n = A.fresh(n, avoid | clash)
    avoid.add(n)
    clash.add(n)
    return n


def pair_names(n1: str, n2: str, clash: set, avoid: set) -> Tuple[str, str]:
    """Binder names for the two sides; kept when distinct and unclashing, else suffixed 1/2."""
    if n1 != n2 and n1 not in clash and n2 not in clash:
        avoid |= {n1, n2}
        clash |= {n1, n2}
        return n1, n2
    a = A.fresh(n1.rstrip("0123456789") + "1", avoid | clash)
    avoid.add(a)
    b = A.fresh(n2.rstrip("0123456789") + "2", avoid | clash)
    avoid.add(b)
    clash |= {a, b}
    return a, b


def open_binder(var_: str, body: A.Node, new: str) -> A.Node:
    return body if var_ == new else A.subst(body, {var_: A.Var(new)})


def foralls(binds: Sequence[Tuple[str, A.Type]], body: A.Formula) -> A.Formula:
    for x, ty in reversed(binds):
        body = A.Forall(x, ty, None, body)
    return body


def implies(*fs: A.Formula) -> A.Formula:
    out = fs[-1]
    for f in reversed(fs[:-1]):
        out = A.Implies(f, out)
    return out


def later_ty(ty: A.Type, what: str) -> A.Type:
    return type_shape(ty, A.TLater, what).inner


def dist_ty(ty: A.Type, what: str) -> A.Type:
    return type_shape(ty, A.TDist, what).inner


def delayed(names: Sequence[str], args: Sequence[A.Term], body: A.Formula) -> A.Later:
    return A.Later(tuple(names), tuple(args), body)
