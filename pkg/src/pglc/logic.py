"""Bounded model checking of formulas at a stage.

Kripke-style clauses: implication and universal quantification range over
every earlier stage (with restriction), ``later`` drops one stage, ``always``
is checked at every stage up to the current one, and the probabilistic
diamond asks for a coupling via max-flow.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from . import coupling as C
from .evalsem.evaluator import Env, EvalError, Evaluator, restrict
from .evalsem.values import BoxV, DistV, EnumV, LaterV, NumV, StreamV, Value, prefix
from .surface import ast as A
from .surface.pretty import pretty, pretty_formula
from .typesys import Signature, all_mn


# stages compared when deciding equality of two boxed values
BOX_EQ_HORIZON = 6


class UnboundedQuantifier(Exception):
    pass


@dataclass
class StageAssertion:
    """``formula`` at ``stage`` with variables bound to values computed at that stage."""

    formula: A.Formula
    stage: int
    bindings: Mapping[str, Value] = field(default_factory=dict)
    delta: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class CheckResult:
    holds: bool
    stage: int
    bounded: bool = False  # an always-formula was only checked up to ``stage``

    def __bool__(self) -> bool:
        return self.holds

    @property
    def qualifier(self) -> str:
        return f"verified up to stage {self.stage}" if self.bounded else f"at stage {self.stage}"


def _stream_drop(v: Value, k: int) -> Optional[Value]:
    for _ in range(k):
        if not isinstance(v, StreamV) or not isinstance(v.tail, LaterV):
            return None
        v = v.tail.arg
    return v


class LogicChecker:
    def __init__(self, sig: Signature, evaluator: Optional[Evaluator] = None,
                 bounds: Optional[Mapping[str, Sequence[A.Term]]] = None):
        self.sig = sig
        self.ev = evaluator or Evaluator(sig)
        self.bounds = dict(bounds or {})
        self.bounded = False
        self._memo: Dict[Any, bool] = {}
        self._fv: Dict[int, Tuple[A.Formula, Tuple[str, ...]]] = {}

    # -- entry
    def check(self, a: StageAssertion) -> CheckResult:
        self.bounded = False
        env = self.ev.env()
        for k, g in a.delta.items():
            env = env.bind_delta(k, g)
        for k, v in a.bindings.items():
            env = env.bind(k, v, a.stage)
        ok = self.holds(a.formula, env, a.stage)
        return CheckResult(ok, a.stage, self.bounded)

    def _eval(self, t: A.Term, env: Env, i: int) -> Value:
        return self.ev.eval(t, env, i)

    def _domain(self, var: str, ty: A.Type, dom, env: Env, j: int) -> List[Value]:
        if dom is None:
            dom = self.bounds.get(var)
        if dom is not None:
            return [self._eval(t, env.without_gamma(), j) for t in dom]
        if isinstance(ty, A.TEnum) and ty.name in self.sig.enums:
            return [EnumV(c) for c in self.sig.enums[ty.name]]
        raise UnboundedQuantifier(f"quantifier over {var} has no finite domain; give one with 'in {{...}}'")

    def _equal(self, a: Value, b: Value, i: int) -> bool:
        # global sections are equal when equal at every stage; only a prefix is checked
        if isinstance(a, BoxV) and isinstance(b, BoxV) and a != b:
            self.bounded = True
            return all(self.ev.section_at(a, j) == self.ev.section_at(b, j)
                       for j in range(max(i, BOX_EQ_HORIZON) + 1))
        return a == b

    def holds(self, f: A.Formula, env: Env, i: int) -> bool:
        # nested Kripke clauses revisit the same (formula, stage, values) many times
        if isinstance(f, (A.Top, A.Bot)):
            return isinstance(f, A.Top)
        ent = self._fv.get(id(f))
        if ent is None or ent[0] is not f:
            ent = (f, tuple(sorted(A.free_vars(f))))
            self._fv[id(f)] = ent
        try:
            key = (id(f), i, tuple((x, env.peek(x, i)) for x in ent[1]))
            hash(key)
        except TypeError:
            return self._holds(f, env, i)
        hit = self._memo.get(key)
        if hit is None:
            hit = self._memo[key] = self._holds(f, env, i)
        return hit

    def _holds(self, f: A.Formula, env: Env, i: int) -> bool:
        if isinstance(f, A.Top):
            return True
        if isinstance(f, A.Bot):
            return False
        if isinstance(f, A.And):
            return self.holds(f.left, env, i) and self.holds(f.right, env, i)
        if isinstance(f, A.Or):
            return self.holds(f.left, env, i) or self.holds(f.right, env, i)
        if isinstance(f, A.Implies):
            return all((not self.holds(f.left, env, j)) or self.holds(f.right, env, j)
                       for j in range(i + 1))
        if isinstance(f, A.Not):
            return all(not self.holds(f.arg, env, j) for j in range(i + 1))
        if isinstance(f, A.Forall):
            for j in range(i + 1):
                for v in self._domain(f.var, f.ty, f.dom, env, j):
                    if not self.holds(f.body, env.bind(f.var, v, j), j):
                        return False
            return True
        if isinstance(f, A.Exists):
            return any(self.holds(f.body, env.bind(f.var, v, i), i)
                       for v in self._domain(f.var, f.ty, f.dom, env, i))
        if isinstance(f, A.Eq):
            return self._equal(self._eval(f.left, env, i), self._eval(f.right, env, i), i)
        if isinstance(f, A.Leq):
            a, b = self._eval(f.left, env, i), self._eval(f.right, env, i)
            if not (isinstance(a, NumV) and isinstance(b, NumV)):
                raise EvalError("<= on non-numbers")
            return a.n <= b.n
        if isinstance(f, A.Later):
            if i == 0:
                return True
            inner = env
            for x, t in zip(f.names, f.args):
                w = self._eval(t, env, i)
                if not isinstance(w, LaterV):
                    raise EvalError(f"later-substitution {x} expects a later value, got {w!r}")
                inner = inner.bind(x, w.arg, i - 1)
            return self.holds(f.body, inner, i - 1)
        if isinstance(f, A.Always):
            self.bounded = True
            return all(self.holds(f.body, env, j) for j in range(i + 1))
        if isinstance(f, A.Dia2):
            mu1 = self._dist(self._eval(f.arg1, env, i))
            mu2 = self._dist(self._eval(f.arg2, env, i))
            rel = lambda a, b: self.holds(f.body, env.bind(f.var1, a, i).bind(f.var2, b, i), i)
            return C.strassen_flow(mu1, mu2, rel) is not None
        if isinstance(f, A.Dia1):
            mu = self._dist(self._eval(f.arg, env, i))
            return all(self.holds(f.body, env.bind(f.var, v, i), i) for v in mu.support())
        if isinstance(f, A.Pred):
            return self._pred(f, env, i)
        raise EvalError(f"cannot check formula {pretty_formula(f)}")

    def _dist(self, v: Value) -> C.FiniteDist:
        if not isinstance(v, DistV):
            raise EvalError(f"diamond over a non-distribution {v!r}")
        return v.dist

    def _pred(self, f: A.Pred, env: Env, i: int) -> bool:
        mn = all_mn(f.name)
        if f.name == "All" and len(f.args) == 2:
            mn = (1,)
        elif f.name in ("All", "All2") and len(f.args) == 3:
            mn = (1, 1)
        if mn is not None:
            streams = [self._eval(a, env, i) for a in f.args[:-1]]
            ab = f.args[-1]
            if not isinstance(ab, A.FAbs):
                raise EvalError(f"{f.name} needs a formula abstraction")
            return self._all(streams, mn, ab, env, i)
        decl = self.sig.preds.get(f.name)
        if decl is None:
            raise EvalError(f"unknown predicate {f.name}")
        body = A.subst(decl.body, {x: a for (x, _), a in zip(decl.params, f.args)})
        return self.holds(body, env, i)

    def _all(self, streams: List[Value], steps: Tuple[int, ...], ab: A.FAbs, env: Env, i: int) -> bool:
        depth = max(steps)
        while True:
            inner = env
            for x, s in zip(ab.params, streams):
                if not isinstance(s, StreamV):
                    raise EvalError(f"All over a non-stream {s!r}")
                inner = inner.bind(x, s.head, i)
            if not self.holds(ab.body, inner, i):
                return False
            if i < depth:
                return True
            nxt = []
            for s, k in zip(streams, steps):
                d = _stream_drop(s, k)
                nxt.append(restrict(d, i - k, i - depth))
            streams = nxt
            i -= depth


def check_formula(a: StageAssertion, sig: Signature, bounds: Optional[Mapping[str, Sequence[A.Term]]] = None,
                  evaluator: Optional[Evaluator] = None) -> CheckResult:
    """Decide a stage assertion.  Bounds supply finite domains for unannotated quantifiers."""
    return LogicChecker(sig, evaluator, bounds).check(a)


def eval_predicate(name: str, streams: Sequence[Value], phi: Callable[..., bool]) -> bool:
    """Guarded-predicate truth on concrete prefixes; vacuous once a prefix is exhausted.

    ``All`` takes one or two streams, ``All_m_n`` two; ``phi`` receives Python
    renderings of the elements being related.
    """
    from .evalsem.values import to_py
    if name == "All":
        steps: Tuple[int, ...] = (1,) * len(streams)
    elif name == "All2":
        steps = (1, 1)
    else:
        mn = all_mn(name)
        if mn is None:
            raise ValueError(f"unknown guarded predicate {name}")
        steps = mn
    if len(steps) != len(streams):
        raise ValueError(f"{name} expects {len(steps)} stream(s)")
    pres = [prefix(s) for s in streams]
    k = 0
    while all(step * k < len(p) for step, p in zip(steps, pres)):
        if not phi(*[to_py(p[step * k]) for step, p in zip(steps, pres)]):
            return False
        k += 1
    return True
