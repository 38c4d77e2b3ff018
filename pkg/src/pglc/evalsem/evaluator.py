"""Stage-indexed evaluation, restriction and distribution extraction."""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Mapping, Optional, Tuple

from .. import coupling as C
from ..surface import ast as A
from ..surface.pretty import pretty
from ..typesys import Signature
from .values import (STAR, BoxV, ClosV, ConstFnV, ConstG, DistV, EnumV, InlV, InrV, LaterV, NumV,
                     PairV, StarV, StreamV, Value)

DEFAULT_FUEL = 10 ** 6
APP_MEMO_LIMIT = 200_000


def default_fuel() -> int:
    raw = os.environ.get("PGLC_FUEL")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return DEFAULT_FUEL


class EvalError(Exception):
    pass


class FuelExhausted(EvalError):
    pass


# ---------------------------------------------------------------- restriction


def restrict(v: Value, frm: int, to: int) -> Value:
    """Restriction map from stage ``frm`` down to stage ``to``."""
    if to > frm:
        raise EvalError(f"cannot restrict from stage {frm} up to {to}")
    if to == frm:
        return v
    if isinstance(v, (StarV, NumV, EnumV, BoxV)):
        return v
    if isinstance(v, LaterV):
        if to == 0:
            return STAR
        return LaterV(restrict(v.arg, frm - 1, to - 1))
    if isinstance(v, StreamV):
        return StreamV(restrict(v.head, frm, to), restrict(v.tail, frm, to))
    if isinstance(v, PairV):
        return PairV(restrict(v.left, frm, to), restrict(v.right, frm, to))
    if isinstance(v, InlV):
        return InlV(restrict(v.arg, frm, to))
    if isinstance(v, InrV):
        return InrV(restrict(v.arg, frm, to))
    if isinstance(v, DistV):
        return DistV(v.dist.map(lambda w: restrict(w, frm, to)))
    if isinstance(v, ClosV):
        return ClosV(v.env, v.var, v.body, to)
    if isinstance(v, ConstFnV):
        return v
    raise EvalError(f"cannot restrict {v!r}")


def promote(v: Value, frm: int, to: int) -> Value:
    """Move a value of constant type to any stage (identity on first-order data)."""
    if to <= frm:
        return restrict(v, frm, to)
    if isinstance(v, (StarV, NumV, EnumV, BoxV, ConstFnV)):
        return v
    if isinstance(v, PairV):
        return PairV(promote(v.left, frm, to), promote(v.right, frm, to))
    if isinstance(v, InlV):
        return InlV(promote(v.arg, frm, to))
    if isinstance(v, InrV):
        return InrV(promote(v.arg, frm, to))
    if isinstance(v, DistV):
        return DistV(v.dist.map(lambda w: promote(w, frm, to)))
    if isinstance(v, ClosV):
        return ConstFnV(v)
    raise EvalError(f"value {v!r} is not of constant type and cannot be promoted")


# ---------------------------------------------------------------- environments


@dataclass(frozen=True)
class Env:
    gamma: Mapping[str, Tuple[Value, int]] = field(default_factory=dict)
    delta: Mapping[str, object] = field(default_factory=dict)  # BoxV or ConstG
    ev: Optional["Evaluator"] = field(default=None, compare=False)

    def bind(self, name: str, v: Value, stage: int) -> "Env":
        g = dict(self.gamma)
        g[name] = (v, stage)
        return Env(g, self.delta, self.ev)

    def bind_delta(self, name: str, g: object) -> "Env":
        d = dict(self.delta)
        d[name] = g
        gm = {k: v for k, v in self.gamma.items() if k != name}
        return Env(gm, d, self.ev)

    def without_gamma(self) -> "Env":
        return Env({}, self.delta, self.ev)

    def peek(self, name: str, stage: int):
        """Value of ``name`` seen at ``stage`` (used for closure equality)."""
        if name in self.gamma:
            v, s = self.gamma[name]
            return restrict(v, s, stage) if s >= stage else ("stage", v, s)
        if name in self.delta:
            return self.delta[name]
        return ("global", name)


# ---------------------------------------------------------------- evaluator


class Evaluator:
    """Evaluates terms of one program.  Global definitions are memoised per stage."""

    def __init__(self, sig: Signature, fuel: Optional[int] = None):
        self.sig = sig
        self.fuel_limit = default_fuel() if fuel is None else fuel
        self.fuel = self.fuel_limit
        self._globals: Dict[Tuple[str, int], Value] = {}
        self._apps: Dict[tuple, Value] = {}

    def env(self) -> Env:
        return Env({}, {}, self)

    def reset_fuel(self) -> None:
        self.fuel = self.fuel_limit

    def _tick(self) -> None:
        self.fuel -= 1
        if self.fuel < 0:
            raise FuelExhausted(f"evaluation exceeded its fuel budget of {self.fuel_limit} steps")

    def global_at(self, name: str, i: int) -> Value:
        key = (name, i)
        hit = self._globals.get(key)
        if hit is None:
            body = self.sig.bodies.get(name)
            if body is None:
                raise EvalError(f"unbound variable {name}")
            hit = self.eval(body, self.env(), i)
            self._globals[key] = hit
        return hit

    def section_at(self, g: object, j: int) -> Value:
        if isinstance(g, BoxV):
            hit = g.cache.get(j)
            if hit is None:
                hit = self.eval(g.term, Env({}, g.delta, self), j)
                g.cache[j] = hit
            return hit
        if isinstance(g, ConstG):
            return promote(g.value, g.stage, j)
        raise EvalError(f"not a global section: {g!r}")

    def lookup(self, env: Env, name: str, i: int) -> Value:
        if name in env.gamma:
            v, s = env.gamma[name]
            if s < i:
                raise EvalError(f"variable {name} bound at stage {s} used at stage {i}")
            return restrict(v, s, i)
        if name in env.delta:
            return self.section_at(env.delta[name], i)
        return self.global_at(name, i)

    def apply(self, f: Value, a: Value, i: int) -> Value:
        if isinstance(f, ClosV):
            if f.stage != i:
                if f.stage > i:
                    f = restrict(f, f.stage, i)
                else:
                    raise EvalError(f"closure from stage {f.stage} applied at stage {i}")
            # evaluation is pure, so equal code, captures and argument give equal results
            try:
                key = (id(f.body), f.var, i, f.captured(), a)
                hit = self._apps.get(key)
            except TypeError:
                return self.eval(f.body, f.env.bind(f.var, a, i), i)
            if hit is None:
                hit = self.eval(f.body, f.env.bind(f.var, a, i), i)
                if len(self._apps) >= APP_MEMO_LIMIT:
                    self._apps.clear()
                self._apps[key] = (f.body, hit)
                return hit
            return hit[1]
        if isinstance(f, ConstFnV):
            s = f.inner.stage
            arg = promote(a, i, s)
            return promote(self.apply(f.inner, arg, s), s, i)
        raise EvalError(f"applying a non-function {f!r}")

    def eval(self, t: A.Term, env: Env, i: int) -> Value:
        self._tick()
        if isinstance(t, A.Var):
            return self.lookup(env, t.name, i)
        if isinstance(t, A.Ctor):
            return EnumV(t.name)
        if isinstance(t, (A.NatLit, A.IntLit, A.RatLit)):
            return NumV(t.value)
        if isinstance(t, A.Ann):
            return self.eval(t.term, env, i)
        if isinstance(t, A.Succ):
            return NumV(self._num(self.eval(t.arg, env, i)) + 1)
        if isinstance(t, A.CaseNat):
            n = self._num(self.eval(t.scrut, env, i))
            if n == 0:
                return self.eval(t.zero, env, i)
            return self.eval(t.succ, env.bind(t.var, NumV(n - 1), i), i)
        if isinstance(t, A.Pair):
            return PairV(self.eval(t.left, env, i), self.eval(t.right, env, i))
        if isinstance(t, (A.Fst, A.Snd)):
            p = self.eval(t.arg, env, i)
            if not isinstance(p, PairV):
                raise EvalError(f"projection from {p!r}")
            return p.left if isinstance(t, A.Fst) else p.right
        if isinstance(t, A.Inl):
            return InlV(self.eval(t.arg, env, i))
        if isinstance(t, A.Inr):
            return InrV(self.eval(t.arg, env, i))
        if isinstance(t, A.CaseSum):
            s = self.eval(t.scrut, env, i)
            if isinstance(s, InlV):
                return self.eval(t.left, env.bind(t.lvar, s.arg, i), i)
            if isinstance(s, InrV):
                return self.eval(t.right, env.bind(t.rvar, s.arg, i), i)
            raise EvalError(f"case on {s!r}")
        if isinstance(t, A.Lam):
            return ClosV(env, t.var, t.body, i)
        if isinstance(t, A.App):
            f = self.eval(t.fn, env, i)
            return self.apply(f, self.eval(t.arg, env, i), i)
        if isinstance(t, A.Fix):
            rec = STAR if i == 0 else LaterV(self.eval(t, env, i - 1))
            return self.eval(t.body, env.bind(t.var, rec, i), i)
        if isinstance(t, A.Cons):
            return StreamV(self.eval(t.head, env, i), self.eval(t.tail, env, i))
        if isinstance(t, (A.Head, A.Tail)):
            s = self.eval(t.arg, env, i)
            if not isinstance(s, StreamV):
                raise EvalError(f"{'hd' if isinstance(t, A.Head) else 'tl'} of {s!r}")
            return s.head if isinstance(t, A.Head) else s.tail
        if isinstance(t, A.Next):
            if i == 0:
                return STAR
            inner = env
            for x, u in zip(t.names, t.args):
                w = self.eval(u, env, i)
                if not isinstance(w, LaterV):
                    raise EvalError(f"delayed substitution {x} expects a later value, got {w!r}")
                inner = inner.bind(x, w.arg, i - 1)
            return LaterV(self.eval(t.body, inner, i - 1))
        if isinstance(t, A.Prev):
            w = self.eval(t.arg, env.without_gamma(), i + 1)
            if not isinstance(w, LaterV):
                raise EvalError(f"prev of {w!r}")
            return w.arg
        if isinstance(t, A.Box):
            names = A.free_vars(t.arg)
            return BoxV(t.arg, {k: v for k, v in env.delta.items() if k in names})
        if isinstance(t, A.LetBox):
            b = self.eval(t.bound, env, i)
            if not isinstance(b, BoxV):
                raise EvalError(f"let box of {b!r}")
            return self.eval(t.body, env.bind_delta(t.var, b), i)
        if isinstance(t, A.LetConst):
            v = self.eval(t.bound, env, i)
            g = v if isinstance(v, BoxV) else ConstG(v, i)
            return self.eval(t.body, env.bind_delta(t.var, g), i)
        if isinstance(t, A.Return):
            return DistV(C.unit_dist(self.eval(t.arg, env, i)))
        if isinstance(t, A.MLet):
            mu = self._dist(self.eval(t.bound, env, i))
            acc: Dict[Value, Fraction] = {}
            for v, p in mu.items():
                nu = self._dist(self.eval(t.body, env.bind(t.var, v, i), i))
                for w, q in nu.items():
                    acc[w] = acc.get(w, Fraction(0)) + p * q
            return DistV(C.FiniteDist(acc))
        if isinstance(t, A.Unif):
            return DistV(C.uniform(self.eval(v, env, i) for v in t.values))
        if isinstance(t, A.Bern):
            p = self._num(self.eval(t.prob, env, i))
            if not 0 <= p <= 1:
                raise EvalError(f"bern parameter {p} outside [0,1]")
            return DistV(C.FiniteDist({NumV(1): p, NumV(0): 1 - Fraction(p)}))
        if isinstance(t, A.PrimOp):
            return self._prim(t, env, i)
        raise EvalError(f"cannot evaluate {pretty(t)}")

    def _num(self, v: Value):
        if not isinstance(v, NumV):
            raise EvalError(f"expected a number, got {v!r}")
        return v.n

    def _dist(self, v: Value) -> C.FiniteDist:
        if not isinstance(v, DistV):
            raise EvalError(f"expected a distribution, got {v!r}")
        return v.dist

    def _prim(self, t: A.PrimOp, env: Env, i: int) -> Value:
        op = t.op
        if op == "swap":
            v = self.eval(t.args[0], env, i)
            if isinstance(v, StarV):
                return DistV(C.unit_dist(STAR))
            if isinstance(v, LaterV):
                return DistV(self._dist(v.arg).map(LaterV))
            raise EvalError(f"swap of {v!r}")
        args = [self.eval(a, env, i) for a in t.args]
        if op in ("add", "sub", "mul", "div", "xor"):
            a, b = (self._num(x) for x in args)
            if op == "add":
                return NumV(a + b)
            if op == "sub":
                return NumV(a - b)
            if op == "mul":
                return NumV(a * b)
            if op == "div":
                if b == 0:
                    raise EvalError("division by zero")
                return NumV(Fraction(a) / Fraction(b))
            if a < 0 or b < 0 or not isinstance(a, int) or not isinstance(b, int):
                raise EvalError("xor needs natural numbers")
            return NumV(a ^ b)
        if op in ("splus", "stimes"):
            fn = (lambda x, y: x + y) if op == "splus" else (lambda x, y: x * y)
            return _pointwise(args[0], args[1], fn)
        raise EvalError(f"unknown primitive {op}")


def _pointwise(s1: Value, s2: Value, fn) -> Value:
    if isinstance(s1, StarV) and isinstance(s2, StarV):
        return STAR
    if isinstance(s1, LaterV) and isinstance(s2, LaterV):
        return LaterV(_pointwise(s1.arg, s2.arg, fn))
    if isinstance(s1, StreamV) and isinstance(s2, StreamV):
        if not (isinstance(s1.head, NumV) and isinstance(s2.head, NumV)):
            raise EvalError("pointwise arithmetic on non-numeric streams")
        return StreamV(NumV(fn(s1.head.n, s2.head.n)), _pointwise(s1.tail, s2.tail, fn))
    raise EvalError(f"pointwise arithmetic on mismatched stages {s1!r} / {s2!r}")


# ---------------------------------------------------------------- convenience API


def evaluate(t: A.Term, sig: Signature, stage: int, env: Optional[Env] = None,
             fuel: Optional[int] = None) -> Value:
    ev = Evaluator(sig, fuel)
    e = env if env is not None else ev.env()
    if e.ev is None:
        e = Env(e.gamma, e.delta, ev)
    return ev.eval(t, e, stage)


def dist_of(t: A.Term, sig: Signature, stage: int, fuel: Optional[int] = None) -> C.FiniteDist:
    """Distribution denoted by a closed term of distribution type at ``stage``."""
    v = evaluate(t, sig, stage, fuel=fuel)
    if not isinstance(v, DistV):
        raise EvalError(f"term does not evaluate to a distribution: {v!r}")
    return v.dist
