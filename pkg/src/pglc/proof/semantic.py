"""Semantic discharge of proof leaves and the soundness probe.

Free context variables are valued from explicit finite bounds.  Hypotheses
whose variables are not all valued are dropped, which only makes a check
harder to pass.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from .. import coupling as C
from ..evalsem.evaluator import Env, EvalError, Evaluator
from ..evalsem.values import BoxV, ConstG, DistV, Value
from ..logic import LogicChecker, UnboundedQuantifier
from ..surface import ast as A
from ..surface.pretty import pretty_formula
from ..typesys import Signature
from .judgement import (R, R1, R2, Ghol, Judgement, Rhol, StrassenPremise, Uhol, as_ghol,
                        delta_names, gamma_names)

Bounds = Mapping[str, Sequence[A.Term]]

# brute-force Strassen cross-check is only run below this support size
BRUTE_LIMIT = 10


class SemanticFailure(Exception):
    pass


@dataclass(frozen=True)
class LeafRecord:
    kind: str  # semantic | strassen
    judgement: str
    depth: int
    instances: int


def _order(ctx, needed: set) -> List[Tuple[str, bool]]:
    out = [(n, True) for n in delta_names(ctx) if n in needed]
    out += [(n, False) for n in gamma_names(ctx) if n in needed]
    return out


def valuations(ctx, needed: set, bounds: Bounds, ev: Evaluator, i: int) -> Iterator[Env]:
    """Every environment assigning bound values to the ``needed`` context variables."""
    order = _order(ctx, needed)
    missing = [n for n, _ in order if n not in bounds]
    if missing:
        raise SemanticFailure(f"no bounds for context variable(s) {', '.join(missing)}")

    def go(k: int, env: Env) -> Iterator[Env]:
        if k == len(order):
            yield env
            return
        name, is_delta = order[k]
        for t in bounds[name]:
            if is_delta:
                v = ev.eval(t, env.without_gamma(), i)
                g = v if isinstance(v, BoxV) else ConstG(v, i)
                yield from go(k + 1, env.bind_delta(name, g))
            else:
                v = ev.eval(t, env, i)
                yield from go(k + 1, env.bind(name, v, i))

    yield from go(0, ev.env())


def _ctx_vars(ctx) -> set:
    return set(delta_names(ctx)) | set(gamma_names(ctx))


def _needed(ctx, base: set, bounds: Bounds) -> set:
    """``base`` plus the variables of every hypothesis whose variables all have bounds."""
    names = _ctx_vars(ctx)
    out = set(base)
    for f in ctx.sigma + ctx.psi:
        fv = A.free_vars(f) & names
        if fv <= set(bounds) | base:
            out |= fv
    return out


def _hyps(ctx, valued: set) -> List[A.Formula]:
    names = _ctx_vars(ctx)
    return [f for f in ctx.sigma + ctx.psi if (A.free_vars(f) & names) <= valued]


def _checker(sig: Signature, ev: Evaluator, bounds: Bounds) -> LogicChecker:
    return LogicChecker(sig, ev, {k: tuple(v) for k, v in bounds.items()})


def check_ghol(j: Ghol, sig: Signature, depth: int, bounds: Bounds,
               ev: Optional[Evaluator] = None) -> int:
    """Check ``j`` at stages 0..depth for every bounded valuation; returns the instance count."""
    ev = ev or Evaluator(sig)
    lc = _checker(sig, ev, bounds)
    needed = _needed(j.ctx, A.free_vars(j.phi) & _ctx_vars(j.ctx), bounds)
    hyps = _hyps(j.ctx, set(needed))
    count = 0
    try:
        for i in range(depth + 1):
            for env in valuations(j.ctx, set(needed), bounds, ev, i):
                if not all(lc.holds(h, env, i) for h in hyps):
                    continue
                count += 1
                if not lc.holds(j.phi, env, i):
                    raise SemanticFailure(f"formula fails at stage {i}: {pretty_formula(j.phi)}")
    except (EvalError, UnboundedQuantifier) as e:
        raise SemanticFailure(str(e)) from e
    return count


def check_strassen(j: StrassenPremise, sig: Signature, depth: int, bounds: Bounds,
                   ev: Optional[Evaluator] = None) -> int:
    """Decide the coupling premise by max-flow on every bounded closed instance."""
    ev = ev or Evaluator(sig)
    lc = _checker(sig, ev, bounds)
    fv = (A.free_vars(j.t1) | A.free_vars(j.t2) | (A.free_vars(j.phi) - {j.y1, j.y2}))
    needed = _needed(j.ctx, fv & _ctx_vars(j.ctx), bounds)
    hyps = _hyps(j.ctx, set(needed))
    count = 0
    try:
        for i in range(depth + 1):
            for env in valuations(j.ctx, set(needed), bounds, ev, i):
                if not all(lc.holds(h, env, i) for h in hyps):
                    continue
                count += 1
                mu1, mu2 = _dist(ev.eval(j.t1, env, i)), _dist(ev.eval(j.t2, env, i))

                def rel(a, b, env=env, i=i):
                    return lc.holds(j.phi, env.bind(j.y1, a, i).bind(j.y2, b, i), i)

                w = C.strassen_flow(mu1, mu2, rel)
                if w is not None and not C.is_coupling(w, mu1, mu2, rel):
                    raise SemanticFailure("max-flow produced an invalid coupling witness")
                if len(mu1) <= BRUTE_LIMIT and len(mu2) <= BRUTE_LIMIT:
                    if C.strassen_check(mu1, mu2, rel) != (w is not None):
                        raise SemanticFailure("max-flow and subset enumeration disagree")
                if w is None:
                    raise SemanticFailure(f"no coupling exists at stage {i}")
    except (EvalError, UnboundedQuantifier) as e:
        raise SemanticFailure(str(e)) from e
    return count


def _dist(v: Value) -> C.FiniteDist:
    if not isinstance(v, DistV):
        raise SemanticFailure(f"expected a distribution, got {v!r}")
    return v.dist


def check_leaf(j: Judgement, sig: Signature, depth: int, bounds: Bounds,
               ev: Optional[Evaluator] = None) -> int:
    if isinstance(j, StrassenPremise):
        raise SemanticFailure("a coupling premise needs a STRASSEN leaf")
    return check_ghol(as_ghol(j), sig, depth, bounds, ev)


def soundness_probe(j: Judgement, sig: Signature, depth: int, bounds: Optional[Bounds] = None,
                    ev: Optional[Evaluator] = None) -> bool:
    """Evaluate the refined terms and check the refinement at every stage up to ``depth``."""
    bounds = dict(bounds or {})
    ev = ev or Evaluator(sig)
    lc = _checker(sig, ev, bounds)
    if isinstance(j, StrassenPremise):
        try:
            check_strassen(j, sig, depth, bounds, ev)
            return True
        except SemanticFailure:
            return False
    terms: Dict[str, A.Term] = {}
    if isinstance(j, Uhol):
        terms = {R: j.term}
    elif isinstance(j, Rhol):
        terms = {R1: j.t1, R2: j.t2}
    fv = set(A.free_vars(j.phi))
    for t in terms.values():
        fv |= A.free_vars(t)
    needed = _needed(j.ctx, fv & _ctx_vars(j.ctx), bounds)
    hyps = _hyps(j.ctx, set(needed))
    try:
        for i in range(depth + 1):
            for env in valuations(j.ctx, set(needed), bounds, ev, i):
                if not all(lc.holds(h, env, i) for h in hyps):
                    continue
                inner = env
                for name, t in terms.items():
                    inner = inner.bind(name, ev.eval(t, env, i), i)
                if not lc.holds(j.phi, inner, i):
                    return False
    except (EvalError, UnboundedQuantifier, SemanticFailure):
        return False
    return True
