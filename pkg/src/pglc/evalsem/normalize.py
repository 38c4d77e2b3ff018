"""Directed equational normalisation and hint-guided equivalence.

Rewrites, tried leftmost-outermost until none applies:

* beta, projections, case on injections and numerals, arithmetic on literals
* ``prev (next t)`` to ``t``; ``let box x = box u in t`` and ``let const`` to substitution
* ``hd``/``tl`` of an explicit cons
* the delayed-substitution laws: unused bindings are dropped, a binding of
  ``next[xi] t`` is merged into the outer substitution, ``next [x <- t] x``
  becomes ``t``, and bindings are put in a canonical order
* the three monad laws

Fixed-point unfolding and stream eta are never applied here; they are only
available as explicit hints to :func:`equiv`.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from ..surface import ast as A
from ..surface.parser import Hint
from ..surface.pretty import pretty
from .evaluator import FuelExhausted, default_fuel


class HintError(Exception):
    pass


class _Budget:
    def __init__(self, fuel: Optional[int]):
        self.left = default_fuel() if fuel is None else fuel

    def tick(self) -> None:
        self.left -= 1
        if self.left < 0:
            raise FuelExhausted("normalisation exceeded its fuel budget")


def _lit(v) -> A.Term:
    q = Fraction(v)
    if q.denominator != 1:
        return A.RatLit(q)
    n = q.numerator
    return A.NatLit(n) if n >= 0 else A.IntLit(n)


def _lit_value(t: A.Term):
    if isinstance(t, (A.NatLit, A.IntLit)):
        return t.value
    if isinstance(t, A.RatLit):
        return Fraction(t.value)
    return None


def _merge_next(names: Tuple[str, ...], args: Tuple[A.Term, ...], body: A.Node, k: int):
    """Fold binding ``k`` (whose argument is a ``next``) into the outer substitution."""
    inner = args[k]
    assert isinstance(inner, A.Next)
    x = names[k]
    others = [(n, a) for j, (n, a) in enumerate(zip(names, args)) if j != k]
    # names that must stay clear: every name around
    avoid = set(A.all_names(body)) | set(names) | set(A.all_names(inner))
    for _, a in others:
        avoid |= A.all_names(a)
    # outer binders must not capture free variables of the inner body
    danger = A.free_vars(inner.body) - set(inner.names)
    renamed_outer = []
    ren: Dict[str, A.Term] = {}
    for n, a in others:
        if n in danger:
            nn = A.fresh(n, avoid)
            avoid.add(nn)
            ren[n] = A.Var(nn)
            renamed_outer.append((nn, a))
        else:
            renamed_outer.append((n, a))
    if ren:
        body = A.subst(body, ren)
    inner_ren: Dict[str, A.Term] = {}
    new_inner = []
    for n, a in zip(inner.names, inner.args):
        nn = A.fresh(n, avoid)
        avoid.add(nn)
        inner_ren[n] = A.Var(nn)
        new_inner.append((nn, a))
    t2 = A.subst(inner.body, inner_ren)
    body = A.subst(body, {x: t2})
    binds = renamed_outer + new_inner
    return tuple(n for n, _ in binds), tuple(a for _, a in binds), body


def _first_use(name: str, body: A.Node) -> int:
    for k, s in enumerate(A.subterms(body)):
        if isinstance(s, A.Var) and s.name == name:
            return k
    return -1


def _delayed_step(names, args, body):
    """One delayed-substitution law at the root of a next/later node, or None."""
    fv = A.free_vars(body)
    for k, n in enumerate(names):
        if n not in fv:
            return (names[:k] + names[k + 1:], args[:k] + args[k + 1:], body)
    for k, a in enumerate(args):
        if isinstance(a, A.Next):
            return _merge_next(names, args, body, k)
    # ties between equal arguments are broken by first use in the body (alpha-invariant)
    keys = [(pretty(a), _first_use(n, body)) for n, a in zip(names, args)]
    order = sorted(range(len(names)), key=lambda j: keys[j])
    if order != list(range(len(names))):
        return (tuple(names[j] for j in order), tuple(args[j] for j in order), body)
    return None


def root_step(t: A.Term) -> Optional[A.Term]:
    """Contract the redex at the root of ``t``, if any."""
    if isinstance(t, A.App) and isinstance(t.fn, A.Lam):
        return A.subst(t.fn.body, {t.fn.var: t.arg})
    if isinstance(t, A.Ann):
        return t.term
    if isinstance(t, A.Fst) and isinstance(t.arg, A.Pair):
        return t.arg.left
    if isinstance(t, A.Snd) and isinstance(t.arg, A.Pair):
        return t.arg.right
    if isinstance(t, A.CaseSum):
        if isinstance(t.scrut, A.Inl):
            return A.subst(t.left, {t.lvar: t.scrut.arg})
        if isinstance(t.scrut, A.Inr):
            return A.subst(t.right, {t.rvar: t.scrut.arg})
    if isinstance(t, A.CaseNat):
        v = _lit_value(t.scrut)
        if v == 0 and isinstance(t.scrut, A.NatLit):
            return t.zero
        if isinstance(t.scrut, A.NatLit) and v > 0:
            return A.subst(t.succ, {t.var: A.NatLit(v - 1)})
        if isinstance(t.scrut, A.Succ):
            return A.subst(t.succ, {t.var: t.scrut.arg})
    if isinstance(t, A.Succ) and isinstance(t.arg, A.NatLit):
        return A.NatLit(t.arg.value + 1)
    if isinstance(t, A.PrimOp) and t.op in ("add", "sub", "mul", "div", "xor"):
        vals = [_lit_value(a) for a in t.args]
        if all(v is not None for v in vals):
            a, b = vals
            if t.op == "add":
                return _lit(a + b)
            if t.op == "sub":
                return _lit(a - b)
            if t.op == "mul":
                return _lit(a * b)
            if t.op == "div" and b != 0:
                return _lit(Fraction(a) / Fraction(b))
            if t.op == "xor" and isinstance(a, int) and isinstance(b, int) and a >= 0 and b >= 0:
                return _lit(a ^ b)
    if isinstance(t, A.Head) and isinstance(t.arg, A.Cons):
        return t.arg.head
    if isinstance(t, A.Tail) and isinstance(t.arg, A.Cons):
        return t.arg.tail
    if isinstance(t, A.Prev) and isinstance(t.arg, A.Next) and not t.arg.names:
        return t.arg.body
    if isinstance(t, A.LetBox) and isinstance(t.bound, A.Box):
        return A.subst(t.body, {t.var: t.bound.arg})
    if isinstance(t, A.LetConst):
        return A.subst(t.body, {t.var: t.bound})
    if isinstance(t, A.Next):
        if len(t.names) == 1 and isinstance(t.body, A.Var) and t.body.name == t.names[0]:
            return t.args[0]
        r = _delayed_step(t.names, t.args, t.body)
        if r is not None:
            return A.Next(r[0], r[1], r[2], span=t.span)
    if isinstance(t, A.MLet):
        if isinstance(t.bound, A.Return):
            return A.subst(t.body, {t.var: t.bound.arg})
        if isinstance(t.body, A.Return) and isinstance(t.body.arg, A.Var) and t.body.arg.name == t.var:
            return t.bound
        if isinstance(t.bound, A.MLet):
            inner = t.bound
            x = inner.var
            fv_u = A.free_vars(t.body) - {t.var}
            body2 = inner.body
            if x in fv_u:
                x2 = A.fresh(x, fv_u | A.all_names(inner.body) | {t.var})
                body2 = A.rename_var(inner.body, x, x2)
                x = x2
            return A.MLet(x, inner.bound, A.MLet(t.var, body2, t.body), span=t.span)
    return None


def normalize(t: A.Term, fuel: Optional[int] = None) -> A.Term:
    """Normal form under the directed rewrites listed in the module docstring."""
    return _norm(t, _Budget(fuel))


def _norm(t: A.Node, budget: _Budget) -> A.Node:
    while True:
        if isinstance(t, A.Term):
            r = root_step(t)
        elif isinstance(t, A.Later):
            step = _delayed_step(t.names, t.args, t.body)
            r = A.Later(step[0], step[1], step[2], span=t.span) if step else None
        else:
            r = None
        if r is None:
            break
        budget.tick()
        t = r
    t2 = A.map_children(t, lambda c, b: _norm(c, budget))
    if t2 is t:
        return t
    budget.tick()
    again = root_step(t2) if isinstance(t2, A.Term) else (
        _delayed_step(t2.names, t2.args, t2.body) if isinstance(t2, A.Later) else None)
    return _norm(t2, budget) if again is not None else t2


def normalize_formula(f: A.Formula, fuel: Optional[int] = None) -> A.Formula:
    """Normalise every term in ``f`` and apply the delayed-substitution laws to laters."""
    return _norm(f, _Budget(fuel))


def term_eq(a: A.Term, b: A.Term, fuel: Optional[int] = None) -> bool:
    return A.alpha_eq(normalize(a, fuel), normalize(b, fuel))


def formula_eq(a: A.Formula, b: A.Formula, fuel: Optional[int] = None) -> bool:
    return A.alpha_eq(normalize_formula(a, fuel), normalize_formula(b, fuel))


# ---------------------------------------------------------------- hints


def unfold_global(t: A.Node, name: str, body: A.Term) -> A.Node:
    """Replace free occurrences of global ``name`` by its definition."""
    return A.subst(t, {name: body})


def _nth(t: A.Term, k: int, pred) -> Optional[A.Term]:
    count = 0
    for s in A.subterms(t):
        if pred(s):
            if count == k:
                return s
            count += 1
    return None


def _replace_nth(t: A.Node, k: int, pred, fn) -> Tuple[A.Node, int]:
    """Replace the ``k``-th subterm (pre-order) satisfying ``pred``; returns (new, remaining)."""
    state = [k]

    def go(n: A.Node) -> A.Node:
        if state[0] < 0:
            return n
        if pred(n):
            if state[0] == 0:
                state[0] = -1
                return fn(n)
            state[0] -= 1
        return A.map_children(n, lambda c, b: go(c))

    out = go(t)
    return out, state[0]


def fix_unfold(t: A.Term, k: int) -> A.Term:
    """Unfold the ``k``-th fixed point: ``fix f. u`` becomes ``u[next (fix f. u)/f]``."""
    out, rem = _replace_nth(t, k, lambda n: isinstance(n, A.Fix),
                            lambda n: A.subst(n.body, {n.var: A.Next((), (), n)}))
    if rem != -1:
        raise HintError(f"bad hint position: no fixed point number {k} in {pretty(t)}")
    return out


def stream_eta(t: A.Term, k: int) -> A.Term:
    """Expand the ``k``-th subterm (pre-order) ``s`` to ``hd s :: tl s``."""
    out, rem = _replace_nth(t, k, lambda n: isinstance(n, A.Term),
                            lambda n: A.Cons(A.Head(n), A.Tail(n)))
    if rem != -1:
        raise HintError(f"bad hint position: no subterm number {k} in {pretty(t)}")
    return out


def apply_hints(t: A.Term, hints: Sequence[Hint], side: str, globals_: Dict[str, A.Term],
                fuel: Optional[int] = None) -> A.Term:
    """Apply the hints addressed to ``side`` (``left`` or ``right``) in order.

    The term is normalised after each hint, so positions always refer to the
    normal form produced by the previous step.
    """
    for h in hints:
        if h.side not in ("both", side):
            continue
        if h.kind == "unfold":
            if h.target not in globals_:
                raise HintError(f"unknown definition {h.target} in unfold hint")
            t = unfold_global(t, h.target, globals_[h.target])
        elif h.kind == "fix":
            t = fix_unfold(t, int(h.target))
        elif h.kind == "eta":
            t = stream_eta(t, int(h.target))
        else:
            raise HintError(f"unknown hint {h.kind}")
        t = normalize(t, fuel)
    return t


def equiv(t: A.Term, u: A.Term, hints: Sequence[Hint] = (), fuel: Optional[int] = None,
          globals_: Optional[Dict[str, A.Term]] = None) -> bool:
    """Equality in the equational theory, helped by explicit unfold/fix/eta hints."""
    g = globals_ or {}
    t2 = apply_hints(t, hints, "left", g, fuel)
    u2 = apply_hints(u, hints, "right", g, fuel)
    return term_eq(t2, u2, fuel)
