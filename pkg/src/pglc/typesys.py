"""Bidirectional type checking for terms and formulas.

Two contexts are tracked: ``delta`` holds variables available at every stage
(bound by ``let box`` / ``let const``), ``gamma`` the ordinary ones.  ``box``
and ``prev`` bodies only see ``delta``.

Polymorphic prelude definitions carry type schemes; their variables are
instantiated with metavariables and solved by first-order unification.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .surface import ast as A
from .surface.pretty import pretty, pretty_type


class PglcTypeError(Exception):
    def __init__(self, msg: str, span: Optional[A.Span] = None):
        self.span = span
        super().__init__(f"{span}: {msg}" if span else msg)


NUMERIC = ("Nat", "Int", "Rat")


def is_discrete(ty: A.Type) -> bool:
    """Types whose values can be compared and carried by distributions."""
    if isinstance(ty, (A.TBase, A.TEnum, A.TVar)):
        return True
    if isinstance(ty, (A.TProd, A.TSum)):
        return is_discrete(ty.left) and is_discrete(ty.right)
    if isinstance(ty, A.TStr):
        return is_discrete(ty.elem)
    if isinstance(ty, A.TLater):
        return is_discrete(ty.inner)
    return False


def is_constant(ty: A.Type, const_vars: Set[str] = frozenset()) -> bool:
    """Types in which every later modality sits under a box."""
    if isinstance(ty, (A.TBase, A.TEnum)):
        return True
    if isinstance(ty, A.TVar):
        return ty.name in const_vars
    if isinstance(ty, A.TBox):
        return True
    if isinstance(ty, (A.TProd, A.TSum)):
        return is_constant(ty.left, const_vars) and is_constant(ty.right, const_vars)
    if isinstance(ty, A.TArrow):
        return is_constant(ty.dom, const_vars) and is_constant(ty.cod, const_vars)
    if isinstance(ty, A.TDist):
        return is_constant(ty.inner, const_vars)
    return False


def is_numeric(ty: A.Type) -> bool:
    return isinstance(ty, A.TBase) and ty.name in NUMERIC


# ---------------------------------------------------------------- global signature


BUILTIN_PREDS = ("All", "All2")  # All_m_n handled by name pattern


@dataclass
class Signature:
    """Global information extracted from a program."""

    globals: Dict[str, Tuple[Tuple[Tuple[str, bool], ...], A.Type]] = field(default_factory=dict)
    bodies: Dict[str, A.Term] = field(default_factory=dict)
    ctors: Dict[str, str] = field(default_factory=dict)  # ctor -> enum
    enums: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    preds: Dict[str, A.PredDecl] = field(default_factory=dict)
    formulas: Dict[str, A.FormulaDecl] = field(default_factory=dict)

    @classmethod
    def of_program(cls, prog: A.Program, check: bool = True) -> "Signature":
        sig = cls()
        for d in prog.decls:
            if isinstance(d, A.EnumDecl):
                sig.enums[d.name] = d.ctors
                for c in d.ctors:
                    sig.ctors[c] = d.name
            elif isinstance(d, A.PredDecl):
                sig.preds[d.name] = d
            elif isinstance(d, A.FormulaDecl):
                sig.formulas[d.name] = d
            elif isinstance(d, A.Def):
                if d.ty is not None:
                    sig.globals[d.name] = (d.tvars, d.ty)
                    sig.bodies[d.name] = d.body
                    if check:
                        tc = Checker(sig, const_vars={n for n, c in d.tvars if c})
                        tc.check_closed(d.body, d.ty, span=d.span)
                else:
                    tc = Checker(sig)
                    ty = tc.synth_closed(d.body, span=d.span)
                    sig.globals[d.name] = ((), ty)
                    sig.bodies[d.name] = d.body
        if check:
            for d in sig.preds.values():
                Checker(sig).check_formula(Ctx(gamma=dict(d.params)), d.body)
            for d in sig.formulas.values():
                Checker(sig).check_formula(Ctx(), d.body)
        return sig


@dataclass
class Ctx:
    delta: Dict[str, A.Type] = field(default_factory=dict)
    gamma: Dict[str, A.Type] = field(default_factory=dict)

    def with_gamma(self, **kv: A.Type) -> "Ctx":
        g = dict(self.gamma)
        g.update(kv)
        return Ctx(dict(self.delta), g)

    def bind(self, name: str, ty: A.Type) -> "Ctx":
        g = dict(self.gamma)
        g[name] = ty
        return Ctx(self.delta, g)

    def bind_delta(self, name: str, ty: A.Type) -> "Ctx":
        d = dict(self.delta)
        d[name] = ty
        g = {k: v for k, v in self.gamma.items() if k != name}
        return Ctx(d, g)

    def only_delta(self) -> "Ctx":
        return Ctx(self.delta, {})


def _is_literal(t: A.Term) -> bool:
    if isinstance(t, (A.NatLit, A.IntLit, A.RatLit)):
        return True
    if isinstance(t, A.PrimOp) and t.op in ("add", "sub", "mul", "div"):
        return all(_is_literal(a) for a in t.args)
    return False


def _lit_type(t: A.Term) -> A.Type:
    if isinstance(t, A.NatLit):
        return A.NAT
    if isinstance(t, A.IntLit):
        return A.INT
    if isinstance(t, A.RatLit):
        return A.RAT
    kinds = [_lit_type(a) for a in t.args]
    if t.op == "div" or A.RAT in kinds:
        return A.RAT
    if t.op == "sub" or A.INT in kinds:
        return A.INT
    return A.NAT


def _lit_fits(lit: A.Type, target: A.Type) -> bool:
    order = {"Nat": 0, "Int": 1, "Rat": 2}
    return is_numeric(target) and order[lit.name] <= order[target.name]


class Checker:
    """One type-checking session: holds the metavariable solution."""

    def __init__(self, sig: Signature, const_vars: Set[str] = frozenset()):
        self.sig = sig
        self.const_vars = set(const_vars)
        self.metas: Dict[int, A.Type] = {}
        self.meta_req: Dict[int, bool] = {}  # meta -> must be constant
        self.counter = 0

    # -- metavariables
    def fresh_meta(self, const: bool) -> A.TMeta:
        self.counter += 1
        self.meta_req[self.counter] = const
        return A.TMeta(self.counter)

    def resolve(self, ty: A.Type) -> A.Type:
        if isinstance(ty, A.TMeta):
            sol = self.metas.get(ty.ident)
            return ty if sol is None else self.resolve(sol)
        if isinstance(ty, (A.TProd, A.TSum)):
            return type(ty)(self.resolve(ty.left), self.resolve(ty.right))
        if isinstance(ty, A.TArrow):
            return A.TArrow(self.resolve(ty.dom), self.resolve(ty.cod))
        if isinstance(ty, A.TStr):
            return A.TStr(self.resolve(ty.elem))
        if isinstance(ty, (A.TLater, A.TBox, A.TDist)):
            return type(ty)(self.resolve(ty.inner))
        return ty

    def _occurs(self, m: int, ty: A.Type) -> bool:
        ty = self.resolve(ty)
        if isinstance(ty, A.TMeta):
            return ty.ident == m
        return any(self._occurs(m, c) for c in _type_children(ty))

    def unify(self, a: A.Type, b: A.Type, span=None, what: str = "") -> None:
        a, b = self.resolve(a), self.resolve(b)
        if a == b:
            return
        if isinstance(a, A.TMeta):
            if self._occurs(a.ident, b):
                raise PglcTypeError(f"infinite type {pretty_type(a)} = {pretty_type(b)}", span)
            self.metas[a.ident] = b
            return
        if isinstance(b, A.TMeta):
            self.unify(b, a, span, what)
            return
        if type(a) is type(b) and not isinstance(a, (A.TBase, A.TEnum, A.TVar)):
            for x, y in zip(_type_children(a), _type_children(b)):
                self.unify(x, y, span, what)
            return
        ctx = f" in {what}" if what else ""
        raise PglcTypeError(f"type mismatch{ctx}: expected {pretty_type(b)}, found {pretty_type(a)}", span)

    def instantiate(self, tvars, ty: A.Type) -> A.Type:
        sub = {n: self.fresh_meta(c) for n, c in tvars}
        return _subst_tvars(ty, sub)

    def finish(self, ty: A.Type, span=None) -> A.Type:
        for m, const in self.meta_req.items():
            sol = self.resolve(A.TMeta(m))
            if isinstance(sol, A.TMeta):
                continue
            if not is_discrete(sol):
                raise PglcTypeError(f"type {pretty_type(sol)} instantiating a scheme variable is not discrete", span)
            if const and not is_constant(sol, self.const_vars):
                raise PglcTypeError(f"type {pretty_type(sol)} instantiating a scheme variable is not constant", span)
        out = self.resolve(ty)
        if _has_meta(out):
            raise PglcTypeError(f"cannot infer a type instance: {pretty_type(out)}", span)
        return out

    # -- entry points
    def check_closed(self, t: A.Term, ty: A.Type, ctx: Optional[Ctx] = None, span=None) -> A.Type:
        self.check(ctx or Ctx(), t, ty)
        return self.finish(ty, span or t.span)

    def synth_closed(self, t: A.Term, ctx: Optional[Ctx] = None, span=None) -> A.Type:
        ty = self.synth(ctx or Ctx(), t)
        return self.finish(ty, span or t.span)

    # -- terms
    def synth(self, ctx: Ctx, t: A.Term) -> A.Type:
        sp = t.span
        if isinstance(t, A.Var):
            if t.name in ctx.gamma:
                return ctx.gamma[t.name]
            if t.name in ctx.delta:
                return ctx.delta[t.name]
            if t.name in self.sig.globals:
                tvars, ty = self.sig.globals[t.name]
                return self.instantiate(tvars, ty)
            raise PglcTypeError(f"unbound variable {t.name}", sp)
        if isinstance(t, A.Ctor):
            if t.name not in self.sig.ctors:
                raise PglcTypeError(f"unknown constructor {t.name}", sp)
            return A.TEnum(self.sig.ctors[t.name])
        if _is_literal(t):
            return _lit_type(t)
        if isinstance(t, A.Ann):
            self.check(ctx, t.term, t.ty)
            return t.ty
        if isinstance(t, A.Succ):
            self.check(ctx, t.arg, A.NAT)
            return A.NAT
        if isinstance(t, A.CaseNat):
            self.check(ctx, t.scrut, A.NAT)
            ty = self.synth(ctx, t.zero)
            self.check(ctx.bind(t.var, A.NAT), t.succ, ty)
            return ty
        if isinstance(t, A.Pair):
            return A.TProd(self.synth(ctx, t.left), self.synth(ctx, t.right))
        if isinstance(t, (A.Fst, A.Snd)):
            ty = self.resolve(self.synth(ctx, t.arg))
            if not isinstance(ty, A.TProd):
                raise PglcTypeError(f"projection from non-product {pretty_type(ty)}", sp)
            return ty.left if isinstance(t, A.Fst) else ty.right
        if isinstance(t, (A.Inl, A.Inr)):
            raise PglcTypeError("cannot infer the type of an injection; add an annotation", sp)
        if isinstance(t, A.CaseSum):
            sty = self.resolve(self.synth(ctx, t.scrut))
            if not isinstance(sty, A.TSum):
                raise PglcTypeError(f"case on non-sum {pretty_type(sty)}", sp)
            ty = self.synth(ctx.bind(t.lvar, sty.left), t.left)
            self.check(ctx.bind(t.rvar, sty.right), t.right, ty)
            return ty
        if isinstance(t, A.Lam):
            if t.ann is None:
                raise PglcTypeError(f"cannot infer the type of parameter {t.var}; add an annotation", sp)
            return A.TArrow(t.ann, self.synth(ctx.bind(t.var, t.ann), t.body))
        if isinstance(t, A.App):
            if isinstance(t.fn, A.Lam) and t.fn.ann is None:
                aty = self.synth(ctx, t.arg)
                return self.synth(ctx.bind(t.fn.var, aty), t.fn.body)
            return self._synth_app(ctx, t)
        if isinstance(t, A.Fix):
            if t.ann is None:
                raise PglcTypeError(f"cannot infer the type of {t.var}; annotate the fixed point", sp)
            ann = self.resolve(t.ann)
            if not isinstance(ann, A.TLater):
                raise PglcTypeError(f"fixed-point variable {t.var} must have a later type", sp)
            self.check(ctx.bind(t.var, ann), t.body, ann.inner)
            return ann.inner
        if isinstance(t, A.Cons):
            h = self.synth(ctx, t.head)
            self.check(ctx, t.tail, A.TLater(A.TStr(h)))
            return A.TStr(h)
        if isinstance(t, (A.Head, A.Tail)):
            ty = self.resolve(self.synth(ctx, t.arg))
            if not isinstance(ty, A.TStr):
                raise PglcTypeError(f"{'hd' if isinstance(t, A.Head) else 'tl'} of non-stream {pretty_type(ty)}", sp)
            return ty.elem if isinstance(t, A.Head) else A.TLater(ty)
        if isinstance(t, A.Next):
            inner = self._next_ctx(ctx, t.names, t.args, sp)
            return A.TLater(self.synth(inner, t.body))
        if isinstance(t, A.Prev):
            ty = self.resolve(self.synth(ctx.only_delta(), t.arg))
            if not isinstance(ty, A.TLater):
                raise PglcTypeError(f"prev of non-later {pretty_type(ty)}", sp)
            return ty.inner
        if isinstance(t, A.Box):
            return A.TBox(self.synth(ctx.only_delta(), t.arg))
        if isinstance(t, A.LetBox):
            ty = self.resolve(self.synth(ctx, t.bound))
            if not isinstance(ty, A.TBox):
                raise PglcTypeError(f"let box of non-box {pretty_type(ty)}", sp)
            return self.synth(ctx.bind_delta(t.var, ty.inner), t.body)
        if isinstance(t, A.LetConst):
            ty = self.resolve(self.synth(ctx, t.bound))
            if not is_constant(ty, self.const_vars):
                raise PglcTypeError(f"let const of non-constant type {pretty_type(ty)}", sp)
            return self.synth(ctx.bind_delta(t.var, ty), t.body)
        if isinstance(t, A.Return):
            ty = self.resolve(self.synth(ctx, t.arg))
            self._need_discrete(ty, sp)
            return A.TDist(ty)
        if isinstance(t, A.MLet):
            ty = self.resolve(self.synth(ctx, t.bound))
            if not isinstance(ty, A.TDist):
                raise PglcTypeError(f"monadic let of non-distribution {pretty_type(ty)}", sp)
            body = self.resolve(self.synth(ctx.bind(t.var, ty.inner), t.body))
            if not isinstance(body, A.TDist):
                raise PglcTypeError(f"monadic let body must be a distribution, found {pretty_type(body)}", sp)
            return body
        if isinstance(t, A.Unif):
            first = None
            for v in t.values:
                if not _is_literal(v):
                    first = self.synth(ctx, v)
                    break
            if first is None:
                kinds = [_lit_type(v) for v in t.values]
                first = A.RAT if A.RAT in kinds else (A.INT if A.INT in kinds else A.NAT)
            for v in t.values:
                self.check(ctx, v, first)
            self._need_discrete(self.resolve(first), sp)
            return A.TDist(first)
        if isinstance(t, A.Bern):
            self.check(ctx, t.prob, A.RAT)
            return A.TDist(A.NAT)
        if isinstance(t, A.PrimOp):
            return self._synth_prim(ctx, t)
        raise PglcTypeError(f"cannot synthesise a type for {pretty(t)}", sp)

    def _next_ctx(self, ctx: Ctx, names, args, sp) -> Ctx:
        inner = ctx
        for x, u in zip(names, args):
            ty = self.resolve(self.synth(ctx, u))
            if not isinstance(ty, A.TLater):
                raise PglcTypeError(f"delayed substitution {x} <- {pretty(u)} needs a later type, found {pretty_type(ty)}", sp)
            inner = inner.bind(x, ty.inner)
        return inner

    def _need_discrete(self, ty: A.Type, sp) -> None:
        if isinstance(ty, A.TMeta):
            return
        if not is_discrete(ty):
            raise PglcTypeError(f"distributions need a discrete type, found {pretty_type(ty)}", sp)

    def _synth_app(self, ctx: Ctx, t: A.App) -> A.Type:
        spine: List[A.Term] = []
        head: A.Term = t
        while isinstance(head, A.App):
            spine.append(head.arg)
            head = head.fn
        spine.reverse()
        fty = self.synth(ctx, head)
        params: List[A.Type] = []
        for arg in spine:
            r = self.resolve(fty)
            if isinstance(r, A.TMeta):
                dom, cod = self.fresh_meta(False), self.fresh_meta(False)
                self.unify(r, A.TArrow(dom, cod), t.span)
                r = A.TArrow(dom, cod)
            if not isinstance(r, A.TArrow):
                raise PglcTypeError(f"applying a non-function of type {pretty_type(r)}", arg.span or t.span)
            params.append(r.dom)
            fty = r.cod
        deferred = []
        for arg, p in zip(spine, params):
            if isinstance(self.resolve(p), A.TMeta) and (_is_literal(arg) or isinstance(arg, (A.Lam, A.Inl, A.Inr))):
                deferred.append((arg, p))
            else:
                self.check(ctx, arg, p)
        for arg, p in deferred:
            self.check(ctx, arg, p)
        return fty

    def _synth_prim(self, ctx: Ctx, t: A.PrimOp) -> A.Type:
        sp = t.span
        if t.op in ("add", "sub", "mul", "div"):
            a, b = t.args
            lead = b if _is_literal(a) and not _is_literal(b) else a
            ty = self.resolve(self.synth(ctx, lead))
            if _is_literal(a) and _is_literal(b):
                ty = _lit_type(t)
            self._arith(ty, t.op, sp)
            self.check(ctx, a, ty)
            self.check(ctx, b, ty)
            return ty
        if t.op == "xor":
            for a in t.args:
                self.check(ctx, a, A.NAT)
            return A.NAT
        if t.op == "swap":
            ty = self.resolve(self.synth(ctx, t.args[0]))
            if not (isinstance(ty, A.TLater) and isinstance(self.resolve(ty.inner), A.TDist)):
                raise PglcTypeError(f"swap expects a later distribution, found {pretty_type(ty)}", sp)
            inner = self.resolve(ty.inner).inner
            self._need_discrete(self.resolve(inner), sp)
            return A.TDist(A.TLater(inner))
        if t.op in ("splus", "stimes"):
            ty = self.resolve(self.synth(ctx, t.args[0]))
            if not (isinstance(ty, A.TStr) and is_numeric(self.resolve(ty.elem))):
                raise PglcTypeError(f"pointwise stream arithmetic expects a numeric stream, found {pretty_type(ty)}", sp)
            self.check(ctx, t.args[1], ty)
            return ty
        raise PglcTypeError(f"unknown primitive {t.op}", sp)

    def _arith(self, ty: A.Type, op: str, sp) -> None:
        if not is_numeric(ty):
            raise PglcTypeError(f"arithmetic on non-numeric type {pretty_type(ty)}", sp)
        if op == "sub" and ty == A.NAT:
            raise PglcTypeError("subtraction is not defined on Nat", sp)
        if op == "div" and ty != A.RAT:
            raise PglcTypeError("division is only defined on Rat", sp)

    def check(self, ctx: Ctx, t: A.Term, ty: A.Type) -> None:
        sp = t.span
        exp = self.resolve(ty)
        if _is_literal(t):
            lit = _lit_type(t)
            if isinstance(exp, A.TMeta):
                self.unify(exp, lit, sp)
                return
            if not _lit_fits(lit, exp):
                raise PglcTypeError(f"literal {pretty(t)} does not have type {pretty_type(exp)}", sp)
            if isinstance(t, A.PrimOp):
                self._arith(exp, t.op, sp)
            return
        if isinstance(t, A.Lam) and isinstance(exp, (A.TArrow, A.TMeta)):
            if isinstance(exp, A.TMeta):
                if t.ann is None:
                    raise PglcTypeError(f"cannot infer the type of parameter {t.var}", sp)
                self.unify(exp, A.TArrow(t.ann, self.fresh_meta(False)), sp)
                exp = self.resolve(exp)
            if t.ann is not None:
                self.unify(t.ann, exp.dom, sp, "lambda annotation")
            self.check(ctx.bind(t.var, exp.dom), t.body, exp.cod)
            return
        if isinstance(t, A.Fix) and t.ann is None:
            self.check(ctx.bind(t.var, A.TLater(exp)), t.body, exp)
            return
        if isinstance(t, (A.Inl, A.Inr)):
            if not isinstance(exp, A.TSum):
                raise PglcTypeError(f"injection checked against non-sum {pretty_type(exp)}", sp)
            self.check(ctx, t.arg, exp.left if isinstance(t, A.Inl) else exp.right)
            return
        if isinstance(t, A.Pair) and isinstance(exp, A.TProd):
            self.check(ctx, t.left, exp.left)
            self.check(ctx, t.right, exp.right)
            return
        if isinstance(t, A.CaseSum):
            sty = self.resolve(self.synth(ctx, t.scrut))
            if not isinstance(sty, A.TSum):
                raise PglcTypeError(f"case on non-sum {pretty_type(sty)}", sp)
            self.check(ctx.bind(t.lvar, sty.left), t.left, exp)
            self.check(ctx.bind(t.rvar, sty.right), t.right, exp)
            return
        if isinstance(t, A.CaseNat):
            self.check(ctx, t.scrut, A.NAT)
            self.check(ctx, t.zero, exp)
            self.check(ctx.bind(t.var, A.NAT), t.succ, exp)
            return
        if isinstance(t, A.Cons) and isinstance(exp, A.TStr):
            self.check(ctx, t.head, exp.elem)
            self.check(ctx, t.tail, A.TLater(exp))
            return
        if isinstance(t, A.Next) and isinstance(exp, A.TLater):
            inner = self._next_ctx(ctx, t.names, t.args, sp)
            self.check(inner, t.body, exp.inner)
            return
        if isinstance(t, A.Prev):
            self.check(ctx.only_delta(), t.arg, A.TLater(exp))
            return
        if isinstance(t, A.Box) and isinstance(exp, A.TBox):
            self.check(ctx.only_delta(), t.arg, exp.inner)
            return
        if isinstance(t, A.Return) and isinstance(exp, A.TDist):
            self.check(ctx, t.arg, exp.inner)
            self._need_discrete(self.resolve(exp.inner), sp)
            return
        if isinstance(t, A.Unif) and isinstance(exp, A.TDist):
            for v in t.values:
                self.check(ctx, v, exp.inner)
            self._need_discrete(self.resolve(exp.inner), sp)
            return
        if isinstance(t, A.Bern) and isinstance(exp, A.TDist) and is_numeric(self.resolve(exp.inner)):
            self.check(ctx, t.prob, A.RAT)
            return
        if isinstance(t, A.MLet) and isinstance(exp, A.TDist):
            ty = self.resolve(self.synth(ctx, t.bound))
            if not isinstance(ty, A.TDist):
                raise PglcTypeError(f"monadic let of non-distribution {pretty_type(ty)}", sp)
            self.check(ctx.bind(t.var, ty.inner), t.body, exp)
            return
        if isinstance(t, (A.LetBox, A.LetConst)):
            bty = self.resolve(self.synth(ctx, t.bound))
            if isinstance(t, A.LetBox):
                if not isinstance(bty, A.TBox):
                    raise PglcTypeError(f"let box of non-box {pretty_type(bty)}", sp)
                bty = bty.inner
            elif not is_constant(bty, self.const_vars):
                raise PglcTypeError(f"let const of non-constant type {pretty_type(bty)}", sp)
            self.check(ctx.bind_delta(t.var, bty), t.body, exp)
            return
        if isinstance(t, A.PrimOp) and t.op in ("add", "sub", "mul", "div") and is_numeric(exp):
            self._arith(exp, t.op, sp)
            for a in t.args:
                self.check(ctx, a, exp)
            return
        if isinstance(t, A.App):
            # push the expected result type into the spine first so that
            # unannotated lambdas among the arguments can be checked
            got = self._synth_app_expect(ctx, t, exp)
            self.unify(got, exp, sp, pretty(t))
            return
        got = self.synth(ctx, t)
        self.unify(got, exp, sp, pretty(t))

    def _synth_app_expect(self, ctx: Ctx, t: A.App, exp: A.Type) -> A.Type:
        if isinstance(t.fn, A.Lam) and t.fn.ann is None:
            # let-sugar: synthesise the bound term, then check the body
            aty = self.synth(ctx, t.arg)
            self.check(ctx.bind(t.fn.var, aty), t.fn.body, exp)
            return exp
        return self._synth_app(ctx, t)

    # -- formulas
    def check_formula(self, ctx: Ctx, f: A.Formula) -> None:
        sp = f.span
        if isinstance(f, (A.Top, A.Bot)):
            return
        if isinstance(f, (A.And, A.Or, A.Implies)):
            self.check_formula(ctx, f.left)
            self.check_formula(ctx, f.right)
            return
        if isinstance(f, A.Not):
            self.check_formula(ctx, f.arg)
            return
        if isinstance(f, (A.Forall, A.Exists)):
            if f.dom is not None:
                for v in f.dom:
                    self.check(Ctx(ctx.delta, {}), v, f.ty)
            self.check_formula(ctx.bind(f.var, f.ty), f.body)
            return
        if isinstance(f, (A.Eq, A.Leq)):
            a, b = f.left, f.right
            if _is_literal(a) and not _is_literal(b):
                a, b = b, a
            ty = self.resolve(self.synth(ctx, a))
            if _is_literal(a) and _is_literal(b):
                ty = _lit_type(A.PrimOp("add", (a, b)))
            self.check(ctx, b, ty)
            if isinstance(f, A.Leq) and not is_numeric(self.resolve(ty)):
                raise PglcTypeError(f"<= compares numbers, found {pretty_type(ty)}", sp)
            return
        if isinstance(f, A.Later):
            self.check_formula(self._next_ctx(ctx, f.names, f.args, sp), f.body)
            return
        if isinstance(f, A.Always):
            self.check_formula(ctx, f.body)
            return
        if isinstance(f, A.Dia2):
            t1 = self._dist_arg(ctx, f.arg1, sp)
            t2 = self._dist_arg(ctx, f.arg2, sp)
            self.check_formula(ctx.bind(f.var1, t1).bind(f.var2, t2), f.body)
            return
        if isinstance(f, A.Dia1):
            t1 = self._dist_arg(ctx, f.arg, sp)
            self.check_formula(ctx.bind(f.var, t1), f.body)
            return
        if isinstance(f, A.Pred):
            self._check_pred(ctx, f)
            return
        raise PglcTypeError(f"unexpected formula node {type(f).__name__}", sp)

    def _dist_arg(self, ctx: Ctx, t: A.Term, sp) -> A.Type:
        ty = self.resolve(self.synth(ctx, t))
        if not isinstance(ty, A.TDist):
            raise PglcTypeError(f"diamond expects a distribution, found {pretty_type(ty)}", sp)
        inner = self.resolve(ty.inner)
        if not is_discrete(inner):
            raise PglcTypeError(f"diamond over non-discrete type {pretty_type(inner)}", sp)
        return inner

    def _check_pred(self, ctx: Ctx, f: A.Pred) -> None:
        sp = f.span
        shape = predicate_shape(f.name)
        if f.name == "All":
            shape = len(f.args) - 1
            if shape not in (1, 2):
                raise PglcTypeError("All takes one or two streams and a formula abstraction", sp)
        if shape is not None:
            nstreams = shape
            if len(f.args) != nstreams + 1:
                raise PglcTypeError(f"{f.name} expects {nstreams} stream(s) and a formula abstraction", sp)
            elems = []
            for a in f.args[:nstreams]:
                if isinstance(a, A.FAbs):
                    raise PglcTypeError(f"{f.name}: stream argument expected", sp)
                ty = self.resolve(self.synth(ctx, a))
                if not isinstance(ty, A.TStr):
                    raise PglcTypeError(f"{f.name} over non-stream {pretty_type(ty)}", sp)
                elems.append(ty.elem)
            ab = f.args[-1]
            if not isinstance(ab, A.FAbs) or len(ab.params) != nstreams:
                raise PglcTypeError(f"{f.name} needs a formula abstraction of {nstreams} variable(s)", sp)
            inner = ctx
            for x, ty in zip(ab.params, elems):
                inner = inner.bind(x, ty)
            self.check_formula(inner, ab.body)
            return
        decl = self.sig.preds.get(f.name)
        if decl is None:
            raise PglcTypeError(f"unknown predicate {f.name}", sp)
        if len(decl.params) != len(f.args):
            raise PglcTypeError(f"{f.name} expects {len(decl.params)} argument(s)", sp)
        for (x, ty), a in zip(decl.params, f.args):
            if isinstance(a, A.FAbs):
                raise PglcTypeError(f"{f.name}: term argument expected for {x}", sp)
            self.check(ctx, a, ty)


def predicate_shape(name: str) -> Optional[int]:
    """Number of stream arguments of a built-in guarded predicate, or None."""
    if name == "All":
        return None  # arity-overloaded; resolved by argument count below
    if name == "All2":
        return 2
    m = _all_mn(name)
    if m is not None:
        return 2
    return None


def _all_mn(name: str) -> Optional[Tuple[int, int]]:
    parts = name.split("_")
    if len(parts) == 3 and parts[0] == "All" and parts[1].isdigit() and parts[2].isdigit():
        m, n = int(parts[1]), int(parts[2])
        if m >= 1 and n >= 1:
            return m, n
    return None


def all_mn(name: str) -> Optional[Tuple[int, int]]:
    return _all_mn(name)


def _type_children(ty: A.Type) -> Tuple[A.Type, ...]:
    if isinstance(ty, (A.TProd, A.TSum)):
        return (ty.left, ty.right)
    if isinstance(ty, A.TArrow):
        return (ty.dom, ty.cod)
    if isinstance(ty, A.TStr):
        return (ty.elem,)
    if isinstance(ty, (A.TLater, A.TBox, A.TDist)):
        return (ty.inner,)
    return ()


def _has_meta(ty: A.Type) -> bool:
    if isinstance(ty, A.TMeta):
        return True
    return any(_has_meta(c) for c in _type_children(ty))


def _subst_tvars(ty: A.Type, sub: Dict[str, A.Type]) -> A.Type:
    if isinstance(ty, A.TVar):
        return sub.get(ty.name, ty)
    if isinstance(ty, (A.TProd, A.TSum)):
        return type(ty)(_subst_tvars(ty.left, sub), _subst_tvars(ty.right, sub))
    if isinstance(ty, A.TArrow):
        return A.TArrow(_subst_tvars(ty.dom, sub), _subst_tvars(ty.cod, sub))
    if isinstance(ty, A.TStr):
        return A.TStr(_subst_tvars(ty.elem, sub))
    if isinstance(ty, (A.TLater, A.TBox, A.TDist)):
        return type(ty)(_subst_tvars(ty.inner, sub))
    return ty


# ---------------------------------------------------------------- public API


def typecheck(t: A.Term, sig: Signature, ctx: Optional[Ctx] = None,
              expected: Optional[A.Type] = None) -> A.Type:
    """Synthesise (or check against ``expected``) the type of ``t``."""
    tc = Checker(sig)
    if expected is not None:
        return tc.check_closed(t, expected, ctx)
    return tc.synth_closed(t, ctx)


def typecheck_formula(f: A.Formula, sig: Signature, ctx: Optional[Ctx] = None) -> None:
    tc = Checker(sig)
    tc.check_formula(ctx or Ctx(), f)
    tc.finish(A.NAT)


def is_constant_formula(f: A.Formula, ctx: Ctx, sig: Signature) -> bool:
    """Closed under Delta only, and every later sits under an always."""
    if A.free_vars(f) & set(ctx.gamma):
        return False
    return _later_guarded(f, False)


def _later_guarded(f: A.Node, under_box: bool) -> bool:
    if isinstance(f, A.Always):
        return _later_guarded(f.body, True)
    if isinstance(f, A.Later) and not under_box:
        return False
    if isinstance(f, A.Formula):
        return all(_later_guarded(c, under_box) for _, c, _ in A.children(f) if isinstance(c, A.Formula))
    return True


def check_sigma(sigma: Sequence[A.Formula], ctx: Ctx, sig: Signature) -> None:
    for f in sigma:
        typecheck_formula(f, sig, Ctx(ctx.delta, {}))
        if not is_constant_formula(f, Ctx(ctx.delta, {}), sig):
            raise PglcTypeError("formulas in Sigma must be constant", f.span)
