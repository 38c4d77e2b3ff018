"""Recursive-descent parser for programs, formulas, judgements and proof scripts.

Grammar summary (ASCII surface syntax)::

    type    ::= sum ('->' type)?
    sum     ::= prod ('+' sum)?          prod ::= tatom ('*' prod)?
    tatom   ::= Nat | Int | Rat | Enum | Str tatom | Dist tatom | '|>' tatom | '[]' tatom | '(' type ')'

    term    ::= '\\' binder+ '.' term | 'fix' binder '.' term
              | 'let' x '<~' term 'in' term | 'let' 'box' x '=' term 'in' term
              | 'let' 'const' x '=' term 'in' term | 'let' x [':' type] '=' term 'in' term
              | 'case' term 'of' ... | cons
    cons    ::= star ('::' cons)?         star ::= add ('<*>' add)*
    add     ::= mul (('+'|'-') mul)*      mul  ::= app (('*'|'/') app)*
    app     ::= head atom*

A file is a sequence of declarations; proof scripts add ``goal`` and ``proof``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

from . import ast as A
from .lexer import PglcSyntaxError, Token, tokenize

KEYWORDS = {
    "def", "type", "enum", "pred", "formula", "axiom", "import", "let", "in", "box", "const",
    "fix", "case", "of", "inl", "inr", "fst", "snd", "hd", "tl", "prev", "next", "return",
    "swap", "unif", "bern", "xor", "forall", "exists", "later", "dia", "top", "bot", "goal",
    "proof", "ghol", "uhol", "rhol", "delta", "sigma", "gamma", "psi",
}

# keyword heads that take exactly one atom
_UNARY_HEADS = {
    "fst": A.Fst, "snd": A.Snd, "inl": A.Inl, "inr": A.Inr, "hd": A.Head, "tl": A.Tail,
    "prev": A.Prev, "box": A.Box, "return": A.Return,
}

_HEAD_KEYWORDS = set(_UNARY_HEADS) | {"S", "swap", "xor", "bern", "unif", "next"}


# ---------------------------------------------------------------- proof-script syntax


@dataclass(frozen=True)
class Hint:
    kind: str  # unfold | fix | eta
    target: object  # name or position
    side: str = "both"  # left | right | both


@dataclass(frozen=True)
class InstValue:
    kind: str  # term type form forms names nat hints bounds judgement
    value: object


@dataclass
class ProofNode:
    rule: str
    inst: Dict[str, InstValue]
    children: List["ProofNode"]
    span: Optional[A.Span] = field(default=None, compare=False)

    def get(self, key: str, kind: Optional[str] = None):
        iv = self.inst.get(key)
        if iv is None:
            return None
        if kind is not None and iv.kind != kind:
            raise ValueError(f"instantiation {key!r} must be a {kind}, got {iv.kind}")
        return iv.value

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)


@dataclass(frozen=True)
class Ctx:
    delta: Tuple[Tuple[str, A.Type], ...] = ()
    sigma: Tuple[A.Formula, ...] = ()
    gamma: Tuple[Tuple[str, A.Type], ...] = ()
    psi: Tuple[A.Formula, ...] = ()


@dataclass(frozen=True)
class JudgementSyntax:
    kind: str  # ghol uhol rhol
    ctx: Ctx
    formula: A.Formula
    terms: Tuple[A.Term, ...] = ()
    types: Tuple[A.Type, ...] = ()


@dataclass
class ProofScript:
    imports: List[str]
    program: A.Program
    goal: JudgementSyntax
    root: ProofNode
    path: Optional[str] = None


# rule arity table; filled in by the proof package (None means variable arity)
RULE_ARITY: Dict[str, Optional[int]] = {}


# ---------------------------------------------------------------- parser


class Parser:
    def __init__(self, src: str, file: str = "<input>", enums: Optional[Dict[str, str]] = None,
                 aliases: Optional[Dict[str, A.Type]] = None):
        self.toks = tokenize(src, file)
        self.i = 0
        self.file = file
        self.enums: Dict[str, str] = dict(enums or {})  # ctor -> enum name
        self.enum_names: set = set(self.enums.values())
        self.aliases: Dict[str, A.Type] = dict(aliases or {})
        self._gen = 0

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def span(self, t: Optional[Token] = None) -> A.Span:
        t = t or self.tok
        return A.Span(t.line, t.col, self.file)

    def error(self, msg: str, expected=(), tok: Optional[Token] = None) -> PglcSyntaxError:
        t = tok or self.tok
        return PglcSyntaxError(msg, t.line, t.col, expected, self.file)

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("SYM", "IDENT", "UIDENT") and t.text == text

    def at_kind(self, kind: str) -> bool:
        return self.tok.kind == kind

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"unexpected {self._desc()}", {repr(text)})
        t = self.tok
        self.i += 1
        return t

    def _desc(self) -> str:
        t = self.tok
        return "end of input" if t.kind == "EOF" else f"token {t.text!r}"

    def ident(self) -> str:
        t = self.tok
        if t.kind != "IDENT" or t.text in KEYWORDS:
            raise self.error(f"unexpected {self._desc()}", {"identifier"})
        self.i += 1
        return t.text

    def uident(self) -> str:
        t = self.tok
        if t.kind != "UIDENT":
            raise self.error(f"unexpected {self._desc()}", {"capitalised name"})
        self.i += 1
        return t.text

    def nat(self) -> int:
        t = self.tok
        if t.kind != "NAT":
            raise self.error(f"unexpected {self._desc()}", {"natural number"})
        self.i += 1
        return int(t.text)

    def eof(self) -> None:
        if self.tok.kind != "EOF":
            raise self.error(f"unexpected {self._desc()}", {"end of input"})

    def gensym(self, base: str) -> str:
        self._gen += 1
        return f"_{base}{self._gen}"

    # -- types
    def type_(self) -> A.Type:
        left = self.type_sum()
        if self.accept("->"):
            return A.TArrow(left, self.type_())
        return left

    def type_sum(self) -> A.Type:
        left = self.type_prod()
        if self.accept("+"):
            return A.TSum(left, self.type_sum())
        return left

    def type_prod(self) -> A.Type:
        left = self.type_atom()
        if self.accept("*"):
            return A.TProd(left, self.type_prod())
        return left

    def type_atom(self) -> A.Type:
        t = self.tok
        if self.accept("|>"):
            return A.TLater(self.type_atom())
        if self.accept("[]"):
            return A.TBox(self.type_atom())
        if self.accept("("):
            ty = self.type_()
            self.expect(")")
            return ty
        if t.kind == "UIDENT":
            self.i += 1
            if t.text in ("Nat", "Int", "Rat"):
                return A.TBase(t.text)
            if t.text == "Str":
                return A.TStr(self.type_atom())
            if t.text == "Dist":
                return A.TDist(self.type_atom())
            if t.text in self.aliases:
                return self.aliases[t.text]
            if t.text in self.enum_names:
                return A.TEnum(t.text)
            return A.TVar(t.text)
        raise self.error(f"unexpected {self._desc()}", {"type"})

    # -- terms
    def term(self) -> A.Term:
        sp = self.span()
        if self.accept("\\"):
            binders = [self.binder()]
            while not self.at("."):
                binders.append(self.binder())
            self.expect(".")
            body = self.term()
            for name, ann in reversed(binders):
                body = A.Lam(name, ann, body, span=sp)
            return body
        if self.accept("fix"):
            name, ann = self.binder()
            self.expect(".")
            return A.Fix(name, ann, self.term(), span=sp)
        if self.accept("let"):
            if self.accept("box"):
                x = self.ident()
                self.expect("=")
                u = self.term()
                self.expect("in")
                return A.LetBox(x, u, self.term(), span=sp)
            if self.accept("const"):
                x = self.ident()
                self.expect("=")
                u = self.term()
                self.expect("in")
                return A.LetConst(x, u, self.term(), span=sp)
            x = self.ident()
            if self.accept("<~"):
                u = self.term()
                self.expect("in")
                return A.MLet(x, u, self.term(), span=sp)
            ann = None
            if self.accept(":"):
                ann = self.type_()
            if not self.at("="):
                raise self.error(f"unexpected {self._desc()}", {"'='", "'<~'", "':'"})
            self.i += 1
            u = self.term()
            self.expect("in")
            body = self.term()
            return A.App(A.Lam(x, ann, body, span=sp), u, span=sp)
        if self.accept("case"):
            scrut = self.term()
            self.expect("of")
            if self.accept("inl"):
                x = self.ident()
                self.expect("->")
                left = self.term()
                self.expect("|")
                self.expect("inr")
                y = self.ident()
                self.expect("->")
                return A.CaseSum(scrut, x, left, y, self.term(), span=sp)
            if self.at_kind("NAT") and self.tok.text == "0":
                self.i += 1
                self.expect("->")
                zero = self.term()
                self.expect("|")
                self.expect("S")
                x = self.ident()
                self.expect("->")
                return A.CaseNat(scrut, zero, x, self.term(), span=sp)
            raise self.error(f"unexpected {self._desc()}", {"'inl'", "'0'"})
        return self.cons()

    def binder(self) -> Tuple[str, Optional[A.Type]]:
        if self.accept("("):
            x = self.ident()
            self.expect(":")
            ty = self.type_()
            self.expect(")")
            return x, ty
        return self.ident(), None

    def cons(self) -> A.Term:
        sp = self.span()
        h = self.star()
        if self.accept("::"):
            return A.Cons(h, self.cons(), span=sp)
        return h

    def star(self) -> A.Term:
        sp = self.span()
        t = self.add()
        while self.accept("<*>"):
            u = self.add()
            f, x = self.gensym("f"), self.gensym("x")
            t = A.Next((f, x), (t, u), A.App(A.Var(f), A.Var(x)), span=sp)
        return t

    def add(self) -> A.Term:
        sp = self.span()
        t = self.mul()
        while self.at("+") or self.at("-"):
            op = "add" if self.tok.text == "+" else "sub"
            self.i += 1
            t = A.PrimOp(op, (t, self.mul()), span=sp)
        return t

    def mul(self) -> A.Term:
        sp = self.span()
        t = self.app()
        while self.at("*") or self.at("/"):
            op = "mul" if self.tok.text == "*" else "div"
            self.i += 1
            t = A.PrimOp(op, (t, self.app()), span=sp)
        return t

    def starts_atom(self) -> bool:
        t = self.tok
        if t.kind in ("NAT", "RAT"):
            return True
        if t.kind == "IDENT":
            return t.text not in KEYWORDS
        if t.kind == "UIDENT":
            return t.text != "S"
        return t.kind == "SYM" and t.text == "("

    def app(self) -> A.Term:
        sp = self.span()
        t = self.head()
        while self.starts_atom():
            t = A.App(t, self.atom(), span=sp)
        return t

    def head(self) -> A.Term:
        sp = self.span()
        t = self.tok
        if t.kind == "IDENT" and t.text in _UNARY_HEADS:
            self.i += 1
            return _UNARY_HEADS[t.text](self.atom(), span=sp)
        if t.kind == "UIDENT" and t.text == "S":
            self.i += 1
            return A.Succ(self.atom(), span=sp)
        if self.accept("swap"):
            return A.PrimOp("swap", (self.atom(),), span=sp)
        if self.accept("xor"):
            a = self.atom()
            return A.PrimOp("xor", (a, self.atom()), span=sp)
        if self.accept("bern"):
            return A.Bern(self.atom(), span=sp)
        if self.accept("unif"):
            self.expect("{")
            vals = [self.term()]
            while self.accept(","):
                vals.append(self.term())
            if self.accept(".."):
                lo = vals[0]
                hi = self.term()
                vals = _expand_range(lo, hi, self, sp)
            self.expect("}")
            return A.Unif(tuple(vals), span=sp)
        if self.accept("next"):
            names: List[str] = []
            args: List[A.Term] = []
            if self.accept("["):
                if not self.at("]"):
                    names, args = self.delayed_binds()
                self.expect("]")
            elif self.at("[]"):
                self.i += 1
            return A.Next(tuple(names), tuple(args), self.atom(), span=sp)
        return self.atom()

    def delayed_binds(self) -> Tuple[List[str], List[A.Term]]:
        names, args = [], []
        while True:
            names.append(self.ident())
            self.expect("<-")
            args.append(self.term())
            if not self.accept(","):
                return names, args

    def atom(self) -> A.Term:
        sp = self.span()
        t = self.tok
        if t.kind == "NAT":
            self.i += 1
            return A.NatLit(int(t.text), span=sp)
        if t.kind == "RAT":
            self.i += 1
            return A.RatLit(Fraction(t.text), span=sp)
        if t.kind == "SYM" and t.text == "-" and self.peek().kind in ("NAT", "RAT"):
            self.i += 1
            n = self.tok
            self.i += 1
            if n.kind == "NAT":
                v = -int(n.text)
                return A.IntLit(v, span=sp) if v else A.NatLit(0, span=sp)
            return A.RatLit(-Fraction(n.text), span=sp)
        if t.kind == "IDENT" and t.text not in KEYWORDS:
            self.i += 1
            return A.Var(t.text, span=sp)
        if t.kind == "UIDENT" and t.text != "S":
            self.i += 1
            return A.Ctor(t.text, span=sp)
        if self.accept("("):
            inner = self.term()
            if self.accept(","):
                right = self.term()
                self.expect(")")
                return A.Pair(inner, right, span=sp)
            if self.accept(":"):
                ty = self.type_()
                self.expect(")")
                return A.Ann(inner, ty, span=sp)
            if self.at("<+>") or self.at("<.>"):
                op = "splus" if self.tok.text == "<+>" else "stimes"
                self.i += 1
                right = self.term()
                self.expect(")")
                return A.PrimOp(op, (inner, right), span=sp)
            self.expect(")")
            return inner
        if t.text in _HEAD_KEYWORDS and t.kind in ("IDENT", "UIDENT"):
            # a keyword-headed form directly under another head, as in `hd tl xs`
            return self.head()
        raise self.error(f"unexpected {self._desc()}", {"identifier", "number", "'('"})

    # -- formulas
    def formula(self) -> A.Formula:
        sp = self.span()
        for kw, cls in (("forall", A.Forall), ("exists", A.Exists)):
            if self.accept(kw):
                x = self.ident()
                self.expect(":")
                ty = self.type_()
                dom = None
                if self.accept("in"):
                    dom = self.domain()
                self.expect(".")
                return cls(x, ty, dom, self.formula(), span=sp)
        left = self.disj()
        if self.accept("=>"):
            return A.Implies(left, self.formula(), span=sp)
        return left

    def domain(self) -> Tuple[A.Term, ...]:
        sp = self.span()
        self.expect("{")
        vals = [self.term()]
        while self.accept(","):
            vals.append(self.term())
        if self.accept(".."):
            vals = _expand_range(vals[0], self.term(), self, sp)
        self.expect("}")
        return tuple(vals)

    def disj(self) -> A.Formula:
        sp = self.span()
        f = self.conj()
        while self.accept("\\/"):
            f = A.Or(f, self.conj(), span=sp)
        return f

    def conj(self) -> A.Formula:
        sp = self.span()
        f = self.funary()
        while self.accept("/\\"):
            f = A.And(f, self.funary(), span=sp)
        return f

    def funary(self) -> A.Formula:
        sp = self.span()
        if self.accept("~"):
            return A.Not(self.funary(), span=sp)
        if self.accept("[]"):
            return A.Always(self.funary(), span=sp)
        if self.accept("later"):
            names: List[str] = []
            args: List[A.Term] = []
            if self.accept("["):
                if not self.at("]"):
                    names, args = self.delayed_binds()
                self.expect("]")
            elif self.at("[]"):
                self.i += 1
            return A.Later(tuple(names), tuple(args), self.funary(), span=sp)
        if self.accept("dia"):
            self.expect("[")
            y1 = self.ident()
            self.expect("<-")
            t1 = self.term()
            if self.accept(","):
                y2 = self.ident()
                self.expect("<-")
                t2 = self.term()
                self.expect("]")
                return A.Dia2(y1, t1, y2, t2, self.funary(), span=sp)
            self.expect("]")
            return A.Dia1(y1, t1, self.funary(), span=sp)
        if self.at("forall") or self.at("exists"):
            return self.formula()
        return self.fprimary()

    def fprimary(self) -> A.Formula:
        sp = self.span()
        if self.accept("top"):
            return A.Top(span=sp)
        if self.accept("bot"):
            return A.Bot(span=sp)
        t = self.tok
        if t.kind == "UIDENT" and self.peek().kind == "SYM" and self.peek().text == "(" \
                and t.text not in self.enums and t.text != "S":
            name = t.text
            self.i += 2
            args: List[A.Node] = []
            if not self.at(")"):
                args.append(self.pred_arg())
                while self.accept(","):
                    args.append(self.pred_arg())
            self.expect(")")
            return A.Pred(name, tuple(args), span=sp)
        if self.at("("):
            save = self.i
            try:
                self.i += 1
                f = self.formula()
                self.expect(")")
                if not (self.at("=") or self.at("<=")):
                    return f
            except PglcSyntaxError:
                pass
            self.i = save
        left = self.term()
        if self.accept("="):
            return A.Eq(left, self.term(), span=sp)
        if self.accept("<="):
            return A.Leq(left, self.term(), span=sp)
        raise self.error(f"unexpected {self._desc()}", {"'='", "'<='"})

    def pred_arg(self) -> A.Node:
        # formula abstraction: ident+ '.'
        j = self.i
        while self.toks[j].kind == "IDENT" and self.toks[j].text not in KEYWORDS:
            j += 1
        if j > self.i and self.toks[j].kind == "SYM" and self.toks[j].text == ".":
            sp = self.span()
            params = tuple(t.text for t in self.toks[self.i:j])
            self.i = j + 1
            return A.FAbs(params, self.formula(), span=sp)
        return self.term()

    # -- declarations
    def program(self, stop: Callable[[], bool] = lambda: False) -> Tuple[List[str], List[A.Decl]]:
        imports: List[str] = []
        decls: List[A.Decl] = []
        while self.tok.kind != "EOF" and not stop():
            sp = self.span()
            if self.accept("import"):
                t = self.tok
                if t.kind != "STRING":
                    raise self.error(f"unexpected {self._desc()}", {"string literal"})
                self.i += 1
                imports.append(t.text)
            elif self.accept("def"):
                decls.append(self.def_decl(sp))
            elif self.accept("type"):
                name = self.uident()
                self.expect("=")
                ty = self.type_()
                self.aliases[name] = ty
                decls.append(A.TypeDecl(name, ty, sp))
            elif self.accept("enum"):
                name = self.uident()
                self.expect("=")
                ctors = [self.uident()]
                while self.accept("|"):
                    ctors.append(self.uident())
                self.enum_names.add(name)
                for c in ctors:
                    self.enums[c] = name
                decls.append(A.EnumDecl(name, tuple(ctors), sp))
            elif self.accept("pred"):
                name = self.uident()
                self.expect("(")
                params = []
                if not self.at(")"):
                    while True:
                        x = self.ident()
                        self.expect(":")
                        params.append((x, self.type_()))
                        if not self.accept(","):
                            break
                self.expect(")")
                self.expect("=")
                decls.append(A.PredDecl(name, tuple(params), self.formula(), sp))
            elif self.at("formula") or self.at("axiom"):
                is_ax = self.tok.text == "axiom"
                self.i += 1
                name = self.ident()
                self.expect("=")
                decls.append(A.FormulaDecl(name, self.formula(), is_ax, sp))
            else:
                raise self.error(f"unexpected {self._desc()}",
                                 {"'def'", "'type'", "'enum'", "'pred'", "'formula'", "'axiom'", "'import'"})
        return imports, decls

    def def_decl(self, sp: A.Span) -> A.Def:
        name = self.ident()
        tvars: List[Tuple[str, bool]] = []
        ty = None
        if self.accept(":"):
            if self.accept("forall"):
                while not self.at("."):
                    const = self.accept("const")
                    tvars.append((self.uident(), const))
                self.expect(".")
            ty = self.type_()
        self.expect("=")
        return A.Def(name, tuple(tvars), ty, self.term(), sp)

    # -- judgements and proofs
    def judgement(self) -> JudgementSyntax:
        if not (self.at("ghol") or self.at("uhol") or self.at("rhol")):
            raise self.error(f"unexpected {self._desc()}", {"'ghol'", "'uhol'", "'rhol'"})
        kind = self.tok.text
        self.i += 1
        delta: List[Tuple[str, A.Type]] = []
        gamma: List[Tuple[str, A.Type]] = []
        sigma: List[A.Formula] = []
        psi: List[A.Formula] = []
        while not self.at("|-"):
            if self.at("delta") or self.at("gamma"):
                target = delta if self.tok.text == "delta" else gamma
                self.i += 1
                if not self.at(";"):
                    while True:
                        x = self.ident()
                        self.expect(":")
                        target.append((x, self.type_()))
                        if not self.accept(","):
                            break
                self.expect(";")
            elif self.at("sigma") or self.at("psi"):
                target = sigma if self.tok.text == "sigma" else psi
                self.i += 1
                if not self.at(";"):
                    while True:
                        target.append(self.formula())
                        if not self.accept(","):
                            break
                self.expect(";")
            else:
                raise self.error(f"unexpected {self._desc()}",
                                 {"'delta'", "'sigma'", "'gamma'", "'psi'", "'|-'"})
        self.expect("|-")
        ctx = Ctx(tuple(delta), tuple(sigma), tuple(gamma), tuple(psi))
        if kind == "ghol":
            return JudgementSyntax(kind, ctx, self.formula())
        t1 = self.term()
        self.expect(":")
        a1 = self.type_()
        if kind == "uhol":
            self.expect("|")
            return JudgementSyntax(kind, ctx, self.formula(), (t1,), (a1,))
        self.expect("~")
        t2 = self.term()
        self.expect(":")
        a2 = self.type_()
        self.expect("|")
        return JudgementSyntax(kind, ctx, self.formula(), (t1, t2), (a1, a2))

    def proof_node(self) -> ProofNode:
        sp = self.span()
        t = self.tok
        if t.kind not in ("UIDENT", "IDENT"):
            raise self.error(f"unexpected {self._desc()}", {"rule name"})
        rule = t.text
        if RULE_ARITY and rule not in RULE_ARITY:
            raise self.error(f"unknown rule {rule!r}", tok=t)
        self.i += 1
        inst: Dict[str, InstValue] = {}
        if self.accept("{"):
            if not self.at("}"):
                while True:
                    if self.tok.kind == "IDENT":  # keywords are fine as keys
                        key = self.tok.text
                        self.i += 1
                    else:
                        key = self.uident()
                    self.expect(":=")
                    inst[key] = self.inst_value()
                    if not self.accept(";"):
                        break
            self.expect("}")
        kids: List[ProofNode] = []
        if self.accept("["):
            if not self.at("]"):
                while True:
                    kids.append(self.proof_node())
                    if not self.accept(","):
                        break
            self.expect("]")
        arity = RULE_ARITY.get(rule)
        if arity is not None and len(kids) != arity:
            raise PglcSyntaxError(
                f"arity mismatch: rule {rule} takes {arity} premise(s), got {len(kids)}",
                t.line, t.col, (), self.file)
        return ProofNode(rule, inst, kids, sp)

    def inst_value(self) -> InstValue:
        t = self.tok
        kinds = {"term", "type", "form", "forms", "names", "nat", "hints", "bounds", "judgement", "terms", "ref"}
        if t.kind != "IDENT" or t.text not in kinds:
            raise self.error(f"unexpected {self._desc()}", {repr(k) for k in kinds})
        self.i += 1
        k = t.text
        if k == "term":
            return InstValue(k, self.term())
        if k == "type":
            return InstValue(k, self.type_())
        if k == "form":
            return InstValue(k, self.formula())
        if k == "ref":
            return InstValue(k, self.ident())
        if k == "nat":
            return InstValue(k, self.nat())
        if k == "names":
            names = []
            while self.tok.kind == "IDENT" and self.tok.text not in KEYWORDS:
                names.append(self.ident())
            return InstValue(k, tuple(names))
        if k == "judgement":
            return InstValue(k, self.judgement())
        if k in ("forms", "terms"):
            self.expect("[")
            items = []
            if not self.at("]"):
                while True:
                    items.append(self.formula() if k == "forms" else self.term())
                    if not self.accept(","):
                        break
            self.expect("]")
            return InstValue(k, tuple(items))
        if k == "hints":
            self.expect("[")
            hints = []
            if not self.at("]"):
                while True:
                    hints.append(self.hint())
                    if not self.accept(","):
                        break
            self.expect("]")
            return InstValue(k, tuple(hints))
        # bounds
        self.expect("{")
        bounds = []
        if not self.at("}"):
            while True:
                x = self.ident()
                self.expect("in")
                bounds.append((x, self.domain()))
                if not self.accept(","):
                    break
        self.expect("}")
        return InstValue(k, tuple(bounds))

    def hint(self) -> Hint:
        if self.accept("unfold"):
            target: object = self.ident()
            kind = "unfold"
        elif self.accept("fix"):
            kind, target = "fix", self.nat()
        elif self.accept("eta"):
            kind, target = "eta", self.nat()
        else:
            raise self.error(f"unexpected {self._desc()}", {"'unfold'", "'fix'", "'eta'"})
        side = "both"
        if self.at("left") or self.at("right"):
            side = self.tok.text
            self.i += 1
        return Hint(kind, target, side)


def _expand_range(lo: A.Term, hi: A.Term, p: Parser, sp: A.Span) -> List[A.Term]:
    def num(t: A.Term) -> int:
        if isinstance(t, (A.NatLit, A.IntLit)):
            return t.value
        raise p.error("range bounds must be integer literals")
    a, b = num(lo), num(hi)
    return [A.IntLit(k, span=sp) if k < 0 else A.NatLit(k, span=sp) for k in range(a, b + 1)]


# ---------------------------------------------------------------- entry points


def prelude_source() -> str:
    return resources.files("pglc").joinpath("prelude.pgl").read_text()


def _prelude_parser_state() -> Tuple[List[A.Decl], Dict[str, str], Dict[str, A.Type]]:
    p = Parser(prelude_source(), "<prelude>")
    _, decls = p.program()
    p.eof()
    return decls, p.enums, p.aliases


def parse_program(src: str, file: str = "<input>", with_prelude: bool = True,
                  search_dir: Optional[Path] = None) -> A.Program:
    """Parse a program; prelude and imported files are prepended to the declarations."""
    decls: List[A.Decl] = []
    enums: Dict[str, str] = {}
    aliases: Dict[str, A.Type] = {}
    if with_prelude:
        decls, enums, aliases = _prelude_parser_state()
    p = Parser(src, file, enums, aliases)
    imports, own = p.program()
    p.eof()
    imported = _load_imports(imports, search_dir, enums, aliases)
    if imported:
        # re-parse so that enum and alias names from imports are visible
        env_enums = dict(enums)
        env_aliases = dict(aliases)
        for prog in imported:
            for d in prog:
                if isinstance(d, A.EnumDecl):
                    for c in d.ctors:
                        env_enums[c] = d.name
                elif isinstance(d, A.TypeDecl):
                    env_aliases[d.name] = d.ty
        p = Parser(src, file, env_enums, env_aliases)
        _, own = p.program()
        for prog in imported:
            decls.extend(prog)
    decls.extend(own)
    return A.Program(tuple(decls))


def _load_imports(imports: List[str], search_dir: Optional[Path], enums, aliases) -> List[List[A.Decl]]:
    out = []
    for name in imports:
        path = _resolve(name, search_dir)
        src = path.read_text()
        p = Parser(src, str(path), enums, aliases)
        sub_imports, decls = p.program()
        p.eof()
        for sub in _load_imports(sub_imports, path.parent, p.enums, p.aliases):
            out.append(sub)
        enums.update(p.enums)
        aliases.update(p.aliases)
        out.append(decls)
    return out


def _resolve(name: str, search_dir: Optional[Path]) -> Path:
    cands = []
    if search_dir is not None:
        cands.append(Path(search_dir) / name)
    cands.append(Path(name))
    cands.append(Path(str(resources.files("pglc").joinpath("corpus"))) / name)
    for c in cands:
        if c.is_file():
            return c
    raise FileNotFoundError(f"cannot resolve import {name!r}")


def parse_term(src: str, program: Optional[A.Program] = None, file: str = "<input>") -> A.Term:
    p = _parser_for(src, program, file)
    t = p.term()
    p.eof()
    return t


def parse_type(src: str, program: Optional[A.Program] = None, file: str = "<input>") -> A.Type:
    p = _parser_for(src, program, file)
    t = p.type_()
    p.eof()
    return t


def parse_formula(src: str, program: Optional[A.Program] = None, file: str = "<input>") -> A.Formula:
    p = _parser_for(src, program, file)
    f = p.formula()
    p.eof()
    return f


def parse_judgement(src: str, program: Optional[A.Program] = None, file: str = "<input>") -> JudgementSyntax:
    p = _parser_for(src, program, file)
    j = p.judgement()
    p.eof()
    return j


def _parser_for(src: str, program: Optional[A.Program], file: str) -> Parser:
    enums: Dict[str, str] = {}
    aliases: Dict[str, A.Type] = {}
    if program is not None:
        for d in program.decls:
            if isinstance(d, A.EnumDecl):
                for c in d.ctors:
                    enums[c] = d.name
            elif isinstance(d, A.TypeDecl):
                aliases[d.name] = d.ty
    return Parser(src, file, enums, aliases)


def parse_proof(src: str, file: str = "<input>", search_dir: Optional[Path] = None) -> ProofScript:
    """Parse a proof script: imports and local declarations, then ``goal`` and ``proof``."""
    prelude, enums, aliases = _prelude_parser_state()
    # first pass to collect imports
    p0 = Parser(src, file, enums, aliases)
    imports, _ = p0.program(stop=lambda: p0.at("goal"))
    imported = _load_imports(imports, search_dir, dict(enums), dict(aliases))
    env_enums, env_aliases = dict(enums), dict(aliases)
    for prog in imported:
        for d in prog:
            if isinstance(d, A.EnumDecl):
                for c in d.ctors:
                    env_enums[c] = d.name
            elif isinstance(d, A.TypeDecl):
                env_aliases[d.name] = d.ty
    p = Parser(src, file, env_enums, env_aliases)
    _, local = p.program(stop=lambda: p.at("goal"))
    p.expect("goal")
    goal = p.judgement()
    p.expect("proof")
    root = p.proof_node()
    p.eof()
    decls: List[A.Decl] = list(prelude)
    for prog in imported:
        decls.extend(prog)
    decls.extend(local)
    return ProofScript(imports, A.Program(tuple(decls)), goal, root, file)
