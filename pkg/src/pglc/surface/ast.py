"""Abstract syntax for types, terms, formulas and declarations.

Every node is a frozen dataclass.  Source spans are carried but excluded from
equality, so structurally identical trees from different files compare equal.

Binding structure is declared per class in ``_scopes``: a map from a child
field to the binder fields whose names scope over it.  The generic helpers at
the bottom of this module (free variables, capture-avoiding substitution,
alpha-equality) are driven entirely by that table.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from fractions import Fraction
from typing import ClassVar, Dict, FrozenSet, Iterable, Iterator, Mapping, Optional, Tuple, Union


@dataclass(frozen=True)
class Span:
    line: int
    col: int
    file: str = "<input>"

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"


# ---------------------------------------------------------------- types


class Type:
    """Base class of type expressions."""


@dataclass(frozen=True)
class TBase(Type):
    name: str  # Nat, Int, Rat


@dataclass(frozen=True)
class TEnum(Type):
    name: str


@dataclass(frozen=True)
class TVar(Type):
    name: str


@dataclass(frozen=True)
class TMeta(Type):
    ident: int


@dataclass(frozen=True)
class TProd(Type):
    left: Type
    right: Type


@dataclass(frozen=True)
class TSum(Type):
    left: Type
    right: Type


@dataclass(frozen=True)
class TArrow(Type):
    dom: Type
    cod: Type


@dataclass(frozen=True)
class TStr(Type):
    elem: Type


@dataclass(frozen=True)
class TLater(Type):
    inner: Type


@dataclass(frozen=True)
class TBox(Type):
    inner: Type


@dataclass(frozen=True)
class TDist(Type):
    inner: Type


NAT = TBase("Nat")
INT = TBase("Int")
RAT = TBase("Rat")


# ---------------------------------------------------------------- nodes


@dataclass(frozen=True)
class Node:
    span: Optional[Span] = field(default=None, compare=False, repr=False, kw_only=True)
    _scopes: ClassVar[Dict[str, Tuple[str, ...]]] = {}
    # fields never traversed as children (closed data, ignored by alpha_eq)
    _data: ClassVar[Tuple[str, ...]] = ()


class Term(Node):
    pass


class Formula(Node):
    pass


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class Ctor(Term):
    name: str


@dataclass(frozen=True)
class NatLit(Term):
    value: int


@dataclass(frozen=True)
class IntLit(Term):
    value: int


@dataclass(frozen=True)
class RatLit(Term):
    value: Fraction


@dataclass(frozen=True)
class Succ(Term):
    arg: Term


@dataclass(frozen=True)
class CaseNat(Term):
    scrut: Term
    zero: Term
    var: str
    succ: Term
    _scopes: ClassVar = {"succ": ("var",)}


@dataclass(frozen=True)
class Pair(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Fst(Term):
    arg: Term


@dataclass(frozen=True)
class Snd(Term):
    arg: Term


@dataclass(frozen=True)
class Inl(Term):
    arg: Term


@dataclass(frozen=True)
class Inr(Term):
    arg: Term


@dataclass(frozen=True)
class CaseSum(Term):
    scrut: Term
    lvar: str
    left: Term
    rvar: str
    right: Term
    _scopes: ClassVar = {"left": ("lvar",), "right": ("rvar",)}


@dataclass(frozen=True)
class Lam(Term):
    var: str
    ann: Optional[Type]
    body: Term
    _scopes: ClassVar = {"body": ("var",)}


@dataclass(frozen=True)
class App(Term):
    fn: Term
    arg: Term


@dataclass(frozen=True)
class Ann(Term):
    term: Term
    ty: Type


@dataclass(frozen=True)
class Fix(Term):
    var: str
    ann: Optional[Type]
    body: Term
    _scopes: ClassVar = {"body": ("var",)}


@dataclass(frozen=True)
class Cons(Term):
    head: Term
    tail: Term


@dataclass(frozen=True)
class Head(Term):
    arg: Term


@dataclass(frozen=True)
class Tail(Term):
    arg: Term


@dataclass(frozen=True)
class Next(Term):
    names: Tuple[str, ...]
    args: Tuple[Term, ...]
    body: Term
    _scopes: ClassVar = {"body": ("names",)}


@dataclass(frozen=True)
class Prev(Term):
    arg: Term


@dataclass(frozen=True)
class Box(Term):
    arg: Term


@dataclass(frozen=True)
class LetBox(Term):
    var: str
    bound: Term
    body: Term
    _scopes: ClassVar = {"body": ("var",)}


@dataclass(frozen=True)
class LetConst(Term):
    var: str
    bound: Term
    body: Term
    _scopes: ClassVar = {"body": ("var",)}


@dataclass(frozen=True)
class Return(Term):
    arg: Term


@dataclass(frozen=True)
class MLet(Term):
    var: str
    bound: Term
    body: Term
    _scopes: ClassVar = {"body": ("var",)}


@dataclass(frozen=True)
class Unif(Term):
    values: Tuple[Term, ...]


@dataclass(frozen=True)
class Bern(Term):
    prob: Term


@dataclass(frozen=True)
class PrimOp(Term):
    """Built-in operator: add sub mul div xor swap splus stimes."""

    op: str
    args: Tuple[Term, ...]


# ---------------------------------------------------------------- formulas


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bot(Formula):
    pass


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    ty: Type
    dom: Optional[Tuple[Term, ...]]
    body: Formula
    _scopes: ClassVar = {"body": ("var",)}
    _data: ClassVar = ("dom",)


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    ty: Type
    dom: Optional[Tuple[Term, ...]]
    body: Formula
    _scopes: ClassVar = {"body": ("var",)}
    _data: ClassVar = ("dom",)


@dataclass(frozen=True)
class Eq(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Leq(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Later(Formula):
    names: Tuple[str, ...]
    args: Tuple[Term, ...]
    body: Formula
    _scopes: ClassVar = {"body": ("names",)}


@dataclass(frozen=True)
class Always(Formula):
    body: Formula


@dataclass(frozen=True)
class Dia2(Formula):
    var1: str
    arg1: Term
    var2: str
    arg2: Term
    body: Formula
    _scopes: ClassVar = {"body": ("var1", "var2")}


@dataclass(frozen=True)
class Dia1(Formula):
    var: str
    arg: Term
    body: Formula
    _scopes: ClassVar = {"body": ("var",)}


@dataclass(frozen=True)
class FAbs(Formula):
    """Formula abstraction ``x y. phi`` passed to predicates such as All."""

    params: Tuple[str, ...]
    body: Formula
    _scopes: ClassVar = {"body": ("params",)}


@dataclass(frozen=True)
class Pred(Formula):
    name: str
    args: Tuple[Node, ...]


# ---------------------------------------------------------------- declarations


@dataclass(frozen=True)
class TypeDecl:
    name: str
    ty: Type
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class EnumDecl:
    name: str
    ctors: Tuple[str, ...]
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Def:
    name: str
    tvars: Tuple[Tuple[str, bool], ...]  # (name, must_be_constant)
    ty: Optional[Type]
    body: Term
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class PredDecl:
    name: str
    params: Tuple[Tuple[str, Type], ...]
    body: Formula
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class FormulaDecl:
    name: str
    body: Formula
    axiom: bool = False
    span: Optional[Span] = field(default=None, compare=False, repr=False)


Decl = Union[TypeDecl, EnumDecl, Def, PredDecl, FormulaDecl]


@dataclass(frozen=True)
class Program:
    decls: Tuple[Decl, ...]

    def defs(self) -> Dict[str, Def]:
        return {d.name: d for d in self.decls if isinstance(d, Def)}

    def enums(self) -> Dict[str, EnumDecl]:
        return {d.name: d for d in self.decls if isinstance(d, EnumDecl)}

    def preds(self) -> Dict[str, PredDecl]:
        return {d.name: d for d in self.decls if isinstance(d, PredDecl)}

    def formulas(self) -> Dict[str, FormulaDecl]:
        return {d.name: d for d in self.decls if isinstance(d, FormulaDecl)}

    def lookup(self, name: str) -> Optional[Decl]:
        for d in reversed(self.decls):
            if getattr(d, "name", None) == name:
                return d
        return None


# ---------------------------------------------------------------- generic binder machinery

_FIELD_CACHE: Dict[type, Tuple[Tuple[str, ...], Tuple[str, ...]]] = {}


def _layout(cls: type) -> Tuple[Tuple[str, ...], Tuple[str, ...]]:
    """(all field names except span, binder field names) for a node class."""
    hit = _FIELD_CACHE.get(cls)
    if hit is None:
        names = tuple(f.name for f in dataclasses.fields(cls) if f.name != "span")
        binders = tuple(sorted({b for bs in cls._scopes.values() for b in bs}))
        hit = (names, binders)
        _FIELD_CACHE[cls] = hit
    return hit


def _is_child(name: str, value: object, cls: type) -> bool:
    if name in cls._data:
        return False
    if isinstance(value, Node):
        return True
    return isinstance(value, tuple) and bool(value) and all(isinstance(x, Node) for x in value)


def _names_of(node: Node, binder_field: str) -> Tuple[str, ...]:
    v = getattr(node, binder_field)
    return (v,) if isinstance(v, str) else tuple(v)


def bound_in(node: Node, child_field: str) -> Tuple[str, ...]:
    out: Tuple[str, ...] = ()
    for bf in type(node)._scopes.get(child_field, ()):
        out += _names_of(node, bf)
    return out


def children(node: Node) -> Iterator[Tuple[str, Node, Tuple[str, ...]]]:
    """Yield (field, child, names bound over it); tuple fields yield each element."""
    cls = type(node)
    names, _ = _layout(cls)
    for n in names:
        v = getattr(node, n)
        if not _is_child(n, v, cls):
            continue
        b = bound_in(node, n)
        if isinstance(v, Node):
            yield n, v, b
        else:
            for x in v:
                yield n, x, b


def map_children(node: Node, fn) -> Node:
    """Rebuild ``node`` with ``fn(child, bound_names)`` applied to every child."""
    cls = type(node)
    names, _ = _layout(cls)
    changes = {}
    for n in names:
        v = getattr(node, n)
        if not _is_child(n, v, cls):
            continue
        b = bound_in(node, n)
        if isinstance(v, Node):
            nv = fn(v, b)
        else:
            nv = tuple(fn(x, b) for x in v)
        if nv is not v and nv != v:
            changes[n] = nv
    if not changes:
        return node
    return dataclasses.replace(node, **changes)


def free_vars(node: Node) -> FrozenSet[str]:
    if isinstance(node, Var):
        return frozenset((node.name,))
    acc: set = set()
    for _, c, b in children(node):
        fv = free_vars(c)
        if b:
            fv = fv - set(b)
        acc |= fv
    return frozenset(acc)


def fresh(base: str, avoid: Iterable[str]) -> str:
    avoid = set(avoid)
    stem = base.rstrip("0123456789'") or "v"
    if base not in avoid:
        return base
    i = 1
    while f"{stem}{i}" in avoid:
        i += 1
    return f"{stem}{i}"


def all_names(node: Node) -> FrozenSet[str]:
    """Every variable name occurring in ``node``, bound or free."""
    acc = set()
    stack = [node]
    while stack:
        n = stack.pop()
        if isinstance(n, Var):
            acc.add(n.name)
            continue
        cls = type(n)
        _, bfs = _layout(cls)
        for bf in bfs:
            acc.update(_names_of(n, bf))
        for _, c, _b in children(n):
            stack.append(c)
    return frozenset(acc)


def subst(node: Node, mapping: Mapping[str, Term]) -> Node:
    """Simultaneous capture-avoiding substitution of terms for variables."""
    fv = free_vars(node)
    sigma = {k: v for k, v in mapping.items() if k in fv}
    if not sigma:
        return node
    if isinstance(node, Var):
        return sigma[node.name]
    cls = type(node)
    _, bfs = _layout(cls)
    if not bfs:
        return map_children(node, lambda c, b: subst(c, sigma))
    danger = set()
    for v in sigma.values():
        danger |= free_vars(v)
    avoid = danger | fv | set(sigma) | all_names(node)
    renames: Dict[str, str] = {}
    new_binders = {}
    for bf in bfs:
        old = getattr(node, bf)
        olds = (old,) if isinstance(old, str) else tuple(old)
        news = []
        for nm in olds:
            if nm in danger:
                nn = fresh(nm, avoid)
                avoid.add(nn)
                renames[nm] = nn
                news.append(nn)
            else:
                news.append(nm)
        new_binders[bf] = news[0] if isinstance(old, str) else tuple(news)

    def go(child: Node, bound: Tuple[str, ...]) -> Node:
        local = {k: v for k, v in sigma.items() if k not in bound}
        for nm in bound:
            if nm in renames:
                local[nm] = Var(renames[nm])
        return subst(child, local) if local else child

    out = map_children(node, go)
    if renames:
        out = dataclasses.replace(out, **new_binders)
    return out


def rename_var(node: Node, old: str, new: str) -> Node:
    return subst(node, {old: Var(new)})


def alpha_eq(a: Node, b: Node) -> bool:
    """Alpha-equivalence; type annotations and quantifier bounds are ignored."""
    return _aeq(a, b, {}, {}, [0])


def _aeq(a: Node, b: Node, ea: Dict[str, int], eb: Dict[str, int], ctr: list) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, Var):
        la, lb = ea.get(a.name), eb.get(b.name)
        if la is None and lb is None:
            return a.name == b.name
        return la == lb
    cls = type(a)
    names, bfs = _layout(cls)
    for n in names:
        va, vb = getattr(a, n), getattr(b, n)
        if n in bfs:
            if isinstance(va, tuple) and len(va) != len(vb):
                return False
            continue
        if n in cls._data or isinstance(va, Type) or isinstance(vb, Type) or va is None or vb is None:
            continue
        if _is_child(n, va, cls) or _is_child(n, vb, cls):
            if isinstance(va, Node) != isinstance(vb, Node):
                return False
            la = (va,) if isinstance(va, Node) else va
            lb = (vb,) if isinstance(vb, Node) else vb
            if len(la) != len(lb):
                return False
            bound_a = bound_in(a, n)
            bound_b = bound_in(b, n)
            if len(bound_a) != len(bound_b):
                return False
            na, nb = dict(ea), dict(eb)
            for x, y in zip(bound_a, bound_b):
                ctr[0] += 1
                na[x] = ctr[0]
                nb[y] = ctr[0]
            for ca, cb in zip(la, lb):
                if not _aeq(ca, cb, na, nb, ctr):
                    return False
            continue
        if va != vb:
            return False
    return True


def strip_spans(node):
    """Copy of ``node`` with every span erased (structural equality ignores spans anyway)."""
    if isinstance(node, Node):
        node = map_children(node, lambda c, b: strip_spans(c))
        return dataclasses.replace(node, span=None)
    return node


def subterms(node: Node) -> Iterator[Node]:
    """Pre-order traversal."""
    yield node
    for _, c, _b in children(node):
        yield from subterms(c)


def _cache_hashes() -> None:
    # terms are immutable and hashed repeatedly as memo keys; keep the first result
    def wrap(cls):
        base = cls.__dict__.get("__hash__")
        if base is None:
            return

        def __hash__(self, _base=base):
            h = self.__dict__.get("_h")
            if h is None:
                h = _base(self)
                object.__setattr__(self, "_h", h)
            return h
        cls.__hash__ = __hash__

    todo = [Node]
    while todo:
        c = todo.pop()
        todo.extend(c.__subclasses__())
        if dataclasses.is_dataclass(c):
            wrap(c)


_cache_hashes()
