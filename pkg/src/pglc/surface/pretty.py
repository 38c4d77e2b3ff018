"""Pretty-printer producing text that the parser reads back to an equal tree."""
from __future__ import annotations

from fractions import Fraction
from typing import List

from . import ast as A

# term precedence levels
_TOP, _CONS, _ADD, _MUL, _APP, _ATOM = 0, 1, 3, 4, 5, 6


def pretty_type(ty: A.Type, level: int = 0) -> str:
    if isinstance(ty, A.TArrow):
        s, lv = f"{pretty_type(ty.dom, 1)} -> {pretty_type(ty.cod, 0)}", 0
    elif isinstance(ty, A.TSum):
        s, lv = f"{pretty_type(ty.left, 2)} + {pretty_type(ty.right, 1)}", 1
    elif isinstance(ty, A.TProd):
        s, lv = f"{pretty_type(ty.left, 3)} * {pretty_type(ty.right, 2)}", 2
    elif isinstance(ty, A.TStr):
        s, lv = f"Str {pretty_type(ty.elem, 4 if _prefixed(ty.elem) else 3)}", 3
    elif isinstance(ty, A.TDist):
        s, lv = f"Dist {pretty_type(ty.inner, 4 if _prefixed(ty.inner) else 3)}", 3
    elif isinstance(ty, A.TLater):
        s, lv = f"|>{pretty_type(ty.inner, 3)}", 3
    elif isinstance(ty, A.TBox):
        s, lv = f"[]{pretty_type(ty.inner, 3)}", 3
    elif isinstance(ty, (A.TBase, A.TEnum, A.TVar)):
        s, lv = ty.name, 3
    elif isinstance(ty, A.TMeta):
        s, lv = f"?{ty.ident}", 3
    else:
        raise TypeError(f"not a type: {ty!r}")
    return f"({s})" if lv < level else s


def _prefixed(ty: A.Type) -> bool:
    return isinstance(ty, (A.TStr, A.TDist))


def _num(v) -> str:
    if isinstance(v, Fraction):
        text = f"{abs(v.numerator)}/{v.denominator}"
        return f"(-{text})" if v < 0 else text
    return f"(-{abs(v)})" if v < 0 else str(v)


def _binds(names, args) -> str:
    return ", ".join(f"{n} <- {pretty(a)}" for n, a in zip(names, args))


def pretty(t: A.Term, level: int = 0) -> str:
    """Render a term."""
    s, lv = _term(t)
    return f"({s})" if lv < level else s


def _term(t: A.Term):
    if isinstance(t, A.Var) or isinstance(t, A.Ctor):
        return t.name, _ATOM
    if isinstance(t, A.NatLit):
        return str(t.value), _ATOM
    if isinstance(t, A.IntLit):
        return _num(t.value), _ATOM
    if isinstance(t, A.RatLit):
        return _num(Fraction(t.value)), _ATOM
    if isinstance(t, A.Pair):
        return f"({pretty(t.left)}, {pretty(t.right)})", _ATOM
    if isinstance(t, A.Ann):
        return f"({pretty(t.term)} : {pretty_type(t.ty)})", _ATOM
    if isinstance(t, A.PrimOp):
        if t.op in ("splus", "stimes"):
            sym = "<+>" if t.op == "splus" else "<.>"
            return f"({pretty(t.args[0])} {sym} {pretty(t.args[1])})", _ATOM
        if t.op in ("add", "sub"):
            sym = "+" if t.op == "add" else "-"
            return f"{pretty(t.args[0], _ADD)} {sym} {pretty(t.args[1], _MUL)}", _ADD
        if t.op in ("mul", "div"):
            sym = "*" if t.op == "mul" else "/"
            return f"{pretty(t.args[0], _MUL)} {sym} {pretty(t.args[1], _APP)}", _MUL
        if t.op == "xor":
            return f"xor {pretty(t.args[0], _ATOM)} {pretty(t.args[1], _ATOM)}", _APP
        if t.op == "swap":
            return f"swap {pretty(t.args[0], _ATOM)}", _APP
        raise ValueError(f"unknown primitive {t.op}")
    heads = {A.Fst: "fst", A.Snd: "snd", A.Inl: "inl", A.Inr: "inr", A.Head: "hd", A.Tail: "tl",
             A.Prev: "prev", A.Box: "box", A.Return: "return", A.Succ: "S"}
    for cls, kw in heads.items():
        if isinstance(t, cls):
            return f"{kw} {pretty(t.arg, _ATOM)}", _APP
    if isinstance(t, A.Bern):
        return f"bern {pretty(t.prob, _ATOM)}", _APP
    if isinstance(t, A.Unif):
        return "unif {" + ", ".join(pretty(v) for v in t.values) + "}", _APP
    if isinstance(t, A.Next):
        if not t.names:
            return f"next {pretty(t.body, _ATOM)}", _APP
        return f"next [{_binds(t.names, t.args)}] {pretty(t.body, _ATOM)}", _APP
    if isinstance(t, A.App):
        return f"{pretty(t.fn, _APP)} {pretty(t.arg, _ATOM)}", _APP
    if isinstance(t, A.Cons):
        return f"{pretty(t.head, _ADD)} :: {pretty(t.tail, _CONS)}", _CONS
    if isinstance(t, A.Lam):
        b = t.var if t.ann is None else f"({t.var} : {pretty_type(t.ann)})"
        return f"\\{b}. {pretty(t.body)}", _TOP
    if isinstance(t, A.Fix):
        b = t.var if t.ann is None else f"({t.var} : {pretty_type(t.ann)})"
        return f"fix {b}. {pretty(t.body)}", _TOP
    if isinstance(t, A.LetBox):
        return f"let box {t.var} = {pretty(t.bound)} in {pretty(t.body)}", _TOP
    if isinstance(t, A.LetConst):
        return f"let const {t.var} = {pretty(t.bound)} in {pretty(t.body)}", _TOP
    if isinstance(t, A.MLet):
        return f"let {t.var} <~ {pretty(t.bound)} in {pretty(t.body)}", _TOP
    if isinstance(t, A.CaseNat):
        return (f"case {pretty(t.scrut)} of 0 -> {pretty(t.zero, _CONS)} "
                f"| S {t.var} -> {pretty(t.succ)}"), _TOP
    if isinstance(t, A.CaseSum):
        return (f"case {pretty(t.scrut)} of inl {t.lvar} -> {pretty(t.left, _CONS)} "
                f"| inr {t.rvar} -> {pretty(t.right)}"), _TOP
    raise TypeError(f"not a term: {t!r}")


# formula levels
_FQ, _FIMP, _FOR, _FAND, _FUN, _FATOM = 0, 1, 2, 3, 4, 5


def pretty_formula(f: A.Formula, level: int = 0) -> str:
    """Render a formula."""
    s, lv = _formula(f)
    return f"({s})" if lv < level else s


def _dom(dom) -> str:
    return "" if dom is None else " in {" + ", ".join(pretty(v) for v in dom) + "}"


def _formula(f: A.Formula):
    if isinstance(f, A.Top):
        return "top", _FATOM
    if isinstance(f, A.Bot):
        return "bot", _FATOM
    if isinstance(f, (A.Forall, A.Exists)):
        kw = "forall" if isinstance(f, A.Forall) else "exists"
        return f"{kw} {f.var} : {pretty_type(f.ty)}{_dom(f.dom)}. {pretty_formula(f.body)}", _FQ
    if isinstance(f, A.Implies):
        return f"{pretty_formula(f.left, _FOR)} => {pretty_formula(f.right, _FQ)}", _FIMP
    if isinstance(f, A.Or):
        return f"{pretty_formula(f.left, _FOR)} \\/ {pretty_formula(f.right, _FAND)}", _FOR
    if isinstance(f, A.And):
        return f"{pretty_formula(f.left, _FAND)} /\\ {pretty_formula(f.right, _FUN)}", _FAND
    if isinstance(f, A.Not):
        return f"~{pretty_formula(f.arg, _FUN)}", _FUN
    if isinstance(f, A.Always):
        return f"[] {pretty_formula(f.body, _FUN)}", _FUN
    if isinstance(f, A.Later):
        if not f.names:
            return f"later {pretty_formula(f.body, _FUN)}", _FUN
        return f"later [{_binds(f.names, f.args)}] {pretty_formula(f.body, _FUN)}", _FUN
    if isinstance(f, A.Dia2):
        return (f"dia [{f.var1} <- {pretty(f.arg1)}, {f.var2} <- {pretty(f.arg2)}] "
                f"{pretty_formula(f.body, _FUN)}"), _FUN
    if isinstance(f, A.Dia1):
        return f"dia [{f.var} <- {pretty(f.arg)}] {pretty_formula(f.body, _FUN)}", _FUN
    if isinstance(f, A.Eq):
        return f"{pretty(f.left, _CONS)} = {pretty(f.right, _CONS)}", _FATOM
    if isinstance(f, A.Leq):
        return f"{pretty(f.left, _CONS)} <= {pretty(f.right, _CONS)}", _FATOM
    if isinstance(f, A.Pred):
        return f"{f.name}(" + ", ".join(_pred_arg(a) for a in f.args) + ")", _FATOM
    if isinstance(f, A.FAbs):
        return _pred_arg(f), _FQ
    raise TypeError(f"not a formula: {f!r}")


def _pred_arg(a: A.Node) -> str:
    if isinstance(a, A.FAbs):
        return " ".join(a.params) + ". " + pretty_formula(a.body)
    return pretty(a)


def pretty_decl(d: A.Decl) -> str:
    if isinstance(d, A.TypeDecl):
        return f"type {d.name} = {pretty_type(d.ty)}"
    if isinstance(d, A.EnumDecl):
        return f"enum {d.name} = " + " | ".join(d.ctors)
    if isinstance(d, A.Def):
        head = f"def {d.name}"
        if d.ty is not None:
            scheme = ""
            if d.tvars:
                scheme = "forall " + " ".join(("const " if c else "") + n for n, c in d.tvars) + ". "
            head += f" : {scheme}{pretty_type(d.ty)}"
        return f"{head} = {pretty(d.body)}"
    if isinstance(d, A.PredDecl):
        ps = ", ".join(f"{x} : {pretty_type(t)}" for x, t in d.params)
        return f"pred {d.name}({ps}) = {pretty_formula(d.body)}"
    if isinstance(d, A.FormulaDecl):
        kw = "axiom" if d.axiom else "formula"
        return f"{kw} {d.name} = {pretty_formula(d.body)}"
    raise TypeError(f"not a declaration: {d!r}")


def pretty_program(p: A.Program) -> str:
    return "\n".join(pretty_decl(d) for d in p.decls) + "\n"


def pretty_ctx(ctx) -> str:
    parts: List[str] = []
    if ctx.delta:
        parts.append("delta " + ", ".join(f"{x} : {pretty_type(t)}" for x, t in ctx.delta) + ";")
    if ctx.sigma:
        parts.append("sigma " + ", ".join(pretty_formula(f) for f in ctx.sigma) + ";")
    if ctx.gamma:
        parts.append("gamma " + ", ".join(f"{x} : {pretty_type(t)}" for x, t in ctx.gamma) + ";")
    if ctx.psi:
        parts.append("psi " + ", ".join(pretty_formula(f) for f in ctx.psi) + ";")
    return " ".join(parts)


def pretty_judgement(j) -> str:
    """Render a ``JudgementSyntax`` (or anything with the same attributes)."""
    ctx = pretty_ctx(j.ctx)
    lead = f"{j.kind} {ctx} |- " if ctx else f"{j.kind} |- "
    if j.kind == "ghol":
        return lead + pretty_formula(j.formula)
    if j.kind == "uhol":
        return f"{lead}{pretty(j.terms[0])} : {pretty_type(j.types[0])} | {pretty_formula(j.formula)}"
    return (f"{lead}{pretty(j.terms[0])} : {pretty_type(j.types[0])} ~ "
            f"{pretty(j.terms[1])} : {pretty_type(j.types[1])} | {pretty_formula(j.formula)}")


def _inst_value(iv) -> str:
    k, v = iv.kind, iv.value
    if k == "term":
        return "term " + pretty(v)
    if k == "type":
        return "type " + pretty_type(v)
    if k == "form":
        return "form " + pretty_formula(v)
    if k == "ref":
        return "ref " + v
    if k == "nat":
        return f"nat {v}"
    if k == "names":
        return "names " + " ".join(v)
    if k == "forms":
        return "forms [" + ", ".join(pretty_formula(x) for x in v) + "]"
    if k == "terms":
        return "terms [" + ", ".join(pretty(x) for x in v) + "]"
    if k == "judgement":
        return "judgement " + pretty_judgement(v)
    if k == "hints":
        hs = []
        for h in v:
            side = "" if h.side == "both" else f" {h.side}"
            hs.append(f"{h.kind} {h.target}{side}")
        return "hints [" + ", ".join(hs) + "]"
    if k == "bounds":
        return "bounds {" + ", ".join(f"{x} in {{" + ", ".join(pretty(t) for t in d) + "}" for x, d in v) + "}"
    raise ValueError(f"unknown instantiation kind {k}")


def pretty_proof(node, indent: int = 0) -> str:
    """Render a proof tree in script syntax."""
    pad = "  " * indent
    s = pad + node.rule
    if node.inst:
        s += " { " + "; ".join(f"{k} := {_inst_value(v)}" for k, v in node.inst.items()) + " }"
    if node.children:
        s += " [\n" + ",\n".join(pretty_proof(c, indent + 1) for c in node.children) + "\n" + pad + "]"
    return s
