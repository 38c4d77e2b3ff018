"""Judgement forms checked by the kernel.

``Ghol`` is a plain logical sequent.  ``Uhol`` and ``Rhol`` refine one or two
terms; their formula mentions the distinguished variables ``r`` and
``r1``/``r2``.  ``StrassenPremise`` is the side judgement produced by the
coupling rule; it has no derivation rules of its own and can only be closed by
a Strassen leaf or an assumption.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Dict, Tuple, Union

from ..surface import ast as A
from ..surface.parser import Ctx, JudgementSyntax
from ..surface.pretty import pretty, pretty_formula, pretty_type
from ..typesys import Checker, PglcTypeError, Signature, check_sigma, is_constant
from ..typesys import Ctx as TCtx

R = "r"
R1 = "r1"
R2 = "r2"
DISTINGUISHED = (R, R1, R2)

Context = Ctx


@dataclass(frozen=True)
class Ghol:
    ctx: Context
    phi: A.Formula


@dataclass(frozen=True)
class Uhol:
    ctx: Context
    term: A.Term
    ty: A.Type
    phi: A.Formula


@dataclass(frozen=True)
class Rhol:
    ctx: Context
    t1: A.Term
    a1: A.Type
    t2: A.Term
    a2: A.Type
    phi: A.Formula


@dataclass(frozen=True)
class StrassenPremise:
    """For every X1 of C1: Pr[y1 in X1 | t1] <= Pr[exists y1 in X1. phi | t2]."""

    ctx: Context
    t1: A.Term
    t2: A.Term
    y1: str
    y2: str
    phi: A.Formula


Judgement = Union[Ghol, Uhol, Rhol, StrassenPremise]


# ---------------------------------------------------------------- contexts


def gamma_names(ctx: Context) -> Tuple[str, ...]:
    return tuple(n for n, _ in ctx.gamma)


def delta_names(ctx: Context) -> Tuple[str, ...]:
    return tuple(n for n, _ in ctx.delta)


def bind_gamma(ctx: Context, *binds: Tuple[str, A.Type]) -> Context:
    names = {n for n, _ in binds}
    gamma = tuple(b for b in ctx.gamma if b[0] not in names) + tuple(binds)
    return dataclasses.replace(ctx, gamma=gamma)


def bind_delta(ctx: Context, *binds: Tuple[str, A.Type]) -> Context:
    names = {n for n, _ in binds}
    delta = tuple(b for b in ctx.delta if b[0] not in names) + tuple(binds)
    gamma = tuple(b for b in ctx.gamma if b[0] not in names)
    return dataclasses.replace(ctx, delta=delta, gamma=gamma)


def add_psi(ctx: Context, *fs: A.Formula) -> Context:
    return dataclasses.replace(ctx, psi=ctx.psi + tuple(fs))


def add_sigma(ctx: Context, *fs: A.Formula) -> Context:
    return dataclasses.replace(ctx, sigma=ctx.sigma + tuple(fs))


def constant_part(ctx: Context) -> Context:
    """Delta and Sigma only: the context of box and prev premises."""
    return Context(ctx.delta, ctx.sigma, (), ())


def ctx_names(ctx: Context) -> set:
    out = set(gamma_names(ctx)) | set(delta_names(ctx))
    for f in ctx.sigma + ctx.psi:
        out |= A.all_names(f)
    return out


def tctx(ctx: Context) -> TCtx:
    return TCtx(dict(ctx.delta), dict(ctx.gamma))


def judgement_names(j: Judgement) -> set:
    out = ctx_names(j.ctx)
    for n in _nodes(j):
        out |= A.all_names(n)
    return out


def _nodes(j: Judgement):
    if isinstance(j, Ghol):
        return (j.phi,)
    if isinstance(j, Uhol):
        return (j.term, j.phi)
    if isinstance(j, Rhol):
        return (j.t1, j.t2, j.phi)
    return (j.t1, j.t2, j.phi)


# ---------------------------------------------------------------- conversions


def from_syntax(js: JudgementSyntax) -> Judgement:
    if js.kind == "ghol":
        return Ghol(js.ctx, js.formula)
    if js.kind == "uhol":
        return Uhol(js.ctx, js.terms[0], js.types[0], js.formula)
    return Rhol(js.ctx, js.terms[0], js.types[0], js.terms[1], js.types[1], js.formula)


def as_ghol(j: Judgement) -> Ghol:
    """The logical content of a judgement: its formula with the terms substituted."""
    if isinstance(j, Ghol):
        return j
    if isinstance(j, Uhol):
        return Ghol(j.ctx, A.subst(j.phi, {R: j.term}))
    if isinstance(j, Rhol):
        return Ghol(j.ctx, A.subst(j.phi, {R1: j.t1, R2: j.t2}))
    raise TypeError("a Strassen premise has no logical reading")


def swap_rel(phi: A.Formula) -> A.Formula:
    return A.subst(phi, {R1: A.Var(R2), R2: A.Var(R1)})


def mirror(j: Judgement) -> Judgement:
    """Exchange the two sides of a relational judgement."""
    if isinstance(j, Rhol):
        return Rhol(j.ctx, j.t2, j.a2, j.t1, j.a1, swap_rel(j.phi))
    return j


# ---------------------------------------------------------------- printing


def pretty_context(ctx: Context) -> str:
    parts = []
    if ctx.delta:
        parts.append("delta " + ", ".join(f"{n} : {pretty_type(t)}" for n, t in ctx.delta) + ";")
    if ctx.sigma:
        parts.append("sigma " + ", ".join(pretty_formula(f) for f in ctx.sigma) + ";")
    if ctx.gamma:
        parts.append("gamma " + ", ".join(f"{n} : {pretty_type(t)}" for n, t in ctx.gamma) + ";")
    if ctx.psi:
        parts.append("psi " + ", ".join(pretty_formula(f) for f in ctx.psi) + ";")
    return " ".join(parts)


def pretty_judgement(j: Judgement) -> str:
    c = pretty_context(j.ctx)
    c = c + " " if c else ""
    if isinstance(j, Ghol):
        return f"ghol {c}|- {pretty_formula(j.phi)}"
    if isinstance(j, Uhol):
        return f"uhol {c}|- {pretty(j.term)} : {pretty_type(j.ty)} | {pretty_formula(j.phi)}"
    if isinstance(j, Rhol):
        return (f"rhol {c}|- {pretty(j.t1)} : {pretty_type(j.a1)} ~ {pretty(j.t2)} : {pretty_type(j.a2)}"
                f" | {pretty_formula(j.phi)}")
    return (f"strassen {c}|- forall X <= supp({pretty(j.t1)}). Pr[{j.y1} in X] <= "
            f"Pr_{{{j.y2} <- {pretty(j.t2)}}}[exists {j.y1} in X. {pretty_formula(j.phi)}]")


# ---------------------------------------------------------------- well-formedness


def check_context(ctx: Context, sig: Signature) -> None:
    for n, ty in ctx.delta:
        if not is_constant(ty):
            raise PglcTypeError(f"type {pretty_type(ty)} of {n} in delta is not constant")
    check_sigma(ctx.sigma, tctx(ctx), sig)
    for f in ctx.psi:
        tc = Checker(sig)
        tc.check_formula(tctx(ctx), f)
        tc.finish(A.NAT)


def _check_term(sig: Signature, ctx: Context, t: A.Term, ty: A.Type) -> None:
    Checker(sig).check_closed(t, ty, tctx(ctx))


def _check_formula(sig: Signature, ctx: TCtx, f: A.Formula) -> None:
    tc = Checker(sig)
    tc.check_formula(ctx, f)
    tc.finish(A.NAT)


def check_judgement(j: Judgement, sig: Signature, with_context: bool = True) -> None:
    """Raise ``PglcTypeError`` unless ``j`` is well formed."""
    if with_context:
        check_context(j.ctx, sig)
    tc = tctx(j.ctx)
    if isinstance(j, Ghol):
        _check_formula(sig, tc, j.phi)
    elif isinstance(j, Uhol):
        _check_term(sig, j.ctx, j.term, j.ty)
        _check_formula(sig, tc.bind(R, j.ty), j.phi)
    elif isinstance(j, Rhol):
        _check_term(sig, j.ctx, j.t1, j.a1)
        _check_term(sig, j.ctx, j.t2, j.a2)
        _check_formula(sig, tc.bind(R1, j.a1).bind(R2, j.a2), j.phi)
    else:
        _check_formula(sig, tc, A.Dia2(j.y1, j.t1, j.y2, j.t2, j.phi))


def context_dict(ctx: Context) -> Dict[str, A.Type]:
    out = dict(ctx.delta)
    out.update(dict(ctx.gamma))
    return out
