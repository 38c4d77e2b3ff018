"""Stage values: the finite approximations computed by the evaluator.

A value computed at stage ``i`` lives in the ``i``-th approximation of its
type.  ``LaterV`` wraps a stage ``i-1`` value; at stage 0 the later modality
collapses to :data:`STAR`.  Closures remember the stage they were built at so
that restriction can re-tag them without re-running anything.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Mapping, Optional, Tuple, Union

from ..coupling import FiniteDist, canon_key
from ..surface import ast as A


class Value:
    def sort_key(self) -> tuple:  # pragma: no cover - overridden
        raise NotImplementedError


def _memoized(cls):
    """Cache hash and sort key on an immutable composite value.

    Prefix distributions hash the same nested streams many times; without the
    cache every lookup re-walks the whole value.
    """
    names = [f.name for f in dataclasses.fields(cls)]
    eq, sk = cls.__eq__, cls.sort_key

    def __hash__(self) -> int:
        h = self.__dict__.get("_h")
        if h is None:
            h = hash((cls.__name__,) + tuple(getattr(self, n) for n in names))
            object.__setattr__(self, "_h", h)
        return h

    def __eq__(self, other: object):
        if self is other:
            return True
        if type(other) is cls and hash(self) != hash(other):
            return False
        return eq(self, other)

    def sort_key(self) -> tuple:
        k = self.__dict__.get("_sk")
        if k is None:
            k = sk(self)
            object.__setattr__(self, "_sk", k)
        return k

    cls.__hash__, cls.__eq__, cls.sort_key = __hash__, __eq__, sort_key
    return cls


@dataclass(frozen=True)
class StarV(Value):
    def sort_key(self) -> tuple:
        return (0,)

    def __repr__(self) -> str:
        return "Star"


STAR = StarV()


Num = Union[int, Fraction]


def _norm_num(x: Any) -> Num:
    q = Fraction(x)
    return q.numerator if q.denominator == 1 else q


@dataclass(frozen=True)
class NumV(Value):
    """Nat, Int and Rat values share this class; the type checker keeps them apart."""

    n: Num

    def __init__(self, n: Any):
        object.__setattr__(self, "n", _norm_num(n))

    def sort_key(self) -> tuple:
        return (1, self.n)

    def __repr__(self) -> str:
        return str(self.n)


@dataclass(frozen=True)
class EnumV(Value):
    name: str

    def sort_key(self) -> tuple:
        return (2, self.name)


@_memoized
@dataclass(frozen=True)
class PairV(Value):
    left: Value
    right: Value

    def sort_key(self) -> tuple:
        return (3, self.left.sort_key(), self.right.sort_key())


@_memoized
@dataclass(frozen=True)
class InlV(Value):
    arg: Value

    def sort_key(self) -> tuple:
        return (4, self.arg.sort_key())


@_memoized
@dataclass(frozen=True)
class InrV(Value):
    arg: Value

    def sort_key(self) -> tuple:
        return (5, self.arg.sort_key())


@_memoized
@dataclass(frozen=True)
class StreamV(Value):
    head: Value
    tail: Value  # LaterV(StreamV) or STAR

    def sort_key(self) -> tuple:
        return (6, self.head.sort_key(), self.tail.sort_key())

    def __repr__(self) -> str:
        return "(" + ",".join(repr(x) for x in prefix(self)) + ",Star)" if _ends_in_star(self) \
            else "(" + ",".join(repr(x) for x in prefix(self)) + ")"


@_memoized
@dataclass(frozen=True)
class LaterV(Value):
    arg: Value

    def sort_key(self) -> tuple:
        return (7, self.arg.sort_key())


@_memoized
@dataclass(frozen=True)
class DistV(Value):
    dist: FiniteDist

    def sort_key(self) -> tuple:
        return (8, self.dist.sort_key())


_FV: Dict[Tuple[int, str], Tuple[A.Term, Tuple[str, ...]]] = {}


def _captured_names(body: A.Term, var: str) -> Tuple[str, ...]:
    hit = _FV.get((id(body), var))
    if hit is None or hit[0] is not body:
        hit = (body, tuple(sorted(A.free_vars(body) - {var})))
        _FV[(id(body), var)] = hit
    return hit[1]


@dataclass(eq=False)
class ClosV(Value):
    """Lambda closure.  Equality compares code and the captured values."""

    env: Any  # evaluator.Env
    var: str
    body: A.Term
    stage: int

    def captured(self) -> Tuple[Tuple[str, Any], ...]:
        names = _captured_names(self.body, self.var)
        return tuple((n, self.env.peek(n, self.stage)) for n in names)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ClosV):
            return NotImplemented
        if self is other:
            return True
        return (self.var == other.var and self.stage == other.stage and self.body == other.body
                and self.captured() == other.captured())

    def __hash__(self) -> int:
        return hash((self.var, self.body, self.stage))

    def sort_key(self) -> tuple:
        from ..surface.pretty import pretty
        return (9, pretty(self.body), self.stage)

    def __repr__(self) -> str:
        return f"<closure \\{self.var} @{self.stage}>"


@dataclass(eq=False)
class ConstFnV(Value):
    """A closure of constant type promoted beyond the stage it was built at."""

    inner: ClosV

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ConstFnV) and self.inner == other.inner

    def __hash__(self) -> int:
        return hash(("constfn", self.inner))

    def sort_key(self) -> tuple:
        return (10,) + self.inner.sort_key()


@dataclass(eq=False)
class BoxV(Value):
    """A global section ``box t``: evaluated on demand at any stage."""

    term: A.Term
    delta: Mapping[str, Any]
    program: Any = None
    cache: Dict[int, Value] = field(default_factory=dict, repr=False)

    def key(self) -> tuple:
        names = sorted(A.free_vars(self.term) & set(self.delta))
        return (self.term, tuple((n, self.delta[n]) for n in names))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BoxV):
            return NotImplemented
        return self is other or self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.term)

    def sort_key(self) -> tuple:
        from ..surface.pretty import pretty
        return (11, pretty(self.term))

    def __repr__(self) -> str:
        from ..surface.pretty import pretty
        return f"<box {pretty(self.term)}>"


@dataclass(frozen=True)
class ConstG:
    """A let-const binding: a value of constant type valid at every stage."""

    value: Value
    stage: int


# ---------------------------------------------------------------- helpers


def prefix(v: Value) -> Tuple[Value, ...]:
    """Heads of a stream prefix, in order."""
    out = []
    while isinstance(v, StreamV):
        out.append(v.head)
        t = v.tail
        v = t.arg if isinstance(t, LaterV) else None
    return tuple(out)


def _ends_in_star(v: Value) -> bool:
    while isinstance(v, StreamV):
        if v.tail is STAR or isinstance(v.tail, StarV):
            return True
        v = v.tail.arg if isinstance(v.tail, LaterV) else None
    return False


def stream_of(items, tail: Optional[Value] = None) -> Value:
    """Build a stage-``len(items)-1`` stream prefix from Python numbers or values."""
    vals = [x if isinstance(x, Value) else NumV(x) for x in items]
    if not vals:
        raise ValueError("a stream prefix has at least one element")
    acc: Value = StreamV(vals[-1], STAR if tail is None else tail)
    for x in reversed(vals[:-1]):
        acc = StreamV(x, LaterV(acc))
    return acc


def to_py(v: Value) -> Any:
    """Plain Python rendering: numbers, enum names, tuples for pairs and stream prefixes."""
    if isinstance(v, NumV):
        return v.n
    if isinstance(v, EnumV):
        return v.name
    if isinstance(v, StarV):
        return "*"
    if isinstance(v, PairV):
        return (to_py(v.left), to_py(v.right))
    if isinstance(v, InlV):
        return ("inl", to_py(v.arg))
    if isinstance(v, InrV):
        return ("inr", to_py(v.arg))
    if isinstance(v, StreamV):
        return tuple(to_py(x) for x in prefix(v))
    if isinstance(v, LaterV):
        return ("next", to_py(v.arg))
    if isinstance(v, DistV):
        return v.dist.map(to_py)
    return v


def to_sexpr(v: Value) -> str:
    """Canonical s-expression text used by the CLI and the golden files."""
    if isinstance(v, NumV):
        return str(v.n)
    if isinstance(v, EnumV):
        return v.name
    if isinstance(v, StarV):
        return "*"
    if isinstance(v, PairV):
        return f"(pair {to_sexpr(v.left)} {to_sexpr(v.right)})"
    if isinstance(v, InlV):
        return f"(inl {to_sexpr(v.arg)})"
    if isinstance(v, InrV):
        return f"(inr {to_sexpr(v.arg)})"
    if isinstance(v, StreamV):
        items = [to_sexpr(x) for x in prefix(v)]
        tail = " *" if _ends_in_star(v) else ""
        return "(str " + " ".join(items) + tail + ")"
    if isinstance(v, LaterV):
        return f"(next {to_sexpr(v.arg)})"
    if isinstance(v, DistV):
        return "(dist " + " ".join(f"[{to_sexpr(x)} {p}]" for x, p in v.dist.items()) + ")"
    if isinstance(v, (ClosV, ConstFnV)):
        return "<fun>"
    if isinstance(v, BoxV):
        return "<box>"
    return repr(v)


def dist_sort(d: FiniteDist):
    return sorted(d.items(), key=lambda kv: canon_key(kv[0]))
