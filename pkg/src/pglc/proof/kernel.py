"""Derivation checking.

A proof is checked goal-directed: each rule receives the judgement its node
must establish and returns the premises its children must establish, or
raises :class:`RuleError`.  Leaves (``ASSUME``, ``SEMANTIC``, ``STRASSEN``)
return no premises and are recorded in the report.  Failures of sibling
subtrees are all collected, in premise order.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from ..evalsem.evaluator import Evaluator, FuelExhausted, default_fuel
from ..evalsem.normalize import normalize, normalize_formula
from ..surface import ast as A
from ..surface.parser import ProofNode, ProofScript
from ..surface.pretty import pretty, pretty_formula, pretty_type
from ..typesys import Checker, PglcTypeError, Signature
from .judgement import (DISTINGUISHED, Judgement, StrassenPremise, check_judgement, delta_names,
                        from_syntax, gamma_names, judgement_names, pretty_judgement, tctx)
from .semantic import LeafRecord

# names for premises that are referred to in error reports
PREMISE_LABELS: Dict[str, Tuple[str, ...]] = {
    "MARKOV": ("(initial states)", "(psi3 step)", "(psi4 unfolding)"),
    "MARKOV_M_N": ("(initial states)", "(iterated step)"),
    "MARKOV_2_1": ("(initial states)", "(iterated step)"),
    "COUPLING": ("(Strassen premise)",),
}

RuleFn = Callable[["Kernel", Judgement, ProofNode], List[Judgement]]


class RuleError(Exception):
    def __init__(self, message: str, kind: str = "schema mismatch",
                 diff: Optional[Tuple[str, str]] = None):
        super().__init__(message)
        self.kind = kind
        self.diff = diff


@dataclass(frozen=True)
class Failure:
    path: Tuple[int, ...]
    rules: Tuple[str, ...]
    kind: str
    message: str
    judgement: str
    diff: Optional[Tuple[str, str]] = None
    span: Optional[str] = None
    labels: Tuple[str, ...] = ()

    @property
    def rule(self) -> str:
        return self.rules[-1]

    def render(self) -> str:
        labels = ("",) + (self.labels or ("",) * len(self.path))
        where = " > ".join(f"{r}" if i == 0 else f"#{p + 1}{' ' + l if l else ''} {r}"
                           for i, (p, r, l) in enumerate(zip((0,) + self.path, self.rules, labels)))
        out = [f"{self.kind} at {where}" + (f" ({self.span})" if self.span else ""),
               f"  {self.message}",
               f"  goal: {self.judgement}"]
        if self.diff:
            out.append(f"  first difference: {self.diff[0]}  vs  {self.diff[1]}")
        return "\n".join(out)


@dataclass(frozen=True)
class NodeTiming:
    path: Tuple[int, ...]
    rule: str
    seconds: float


@dataclass
class Report:
    goal: Judgement
    failures: List[Failure] = field(default_factory=list)
    assumptions: List[str] = field(default_factory=list)
    leaves: List[LeafRecord] = field(default_factory=list)
    timings: List[NodeTiming] = field(default_factory=list)

    @property
    def accepted(self) -> bool:
        return not self.failures

    @property
    def fully_discharged(self) -> bool:
        return self.accepted and not self.assumptions

    def strassen_leaves(self) -> int:
        return sum(1 for l in self.leaves if l.kind == "strassen")

    def summary(self) -> str:
        if not self.accepted:
            return f"REJECTED, {len(self.failures)} failure(s)"
        n = len(self.assumptions)
        return f"ACCEPTED, {n} assumption{'s' if n != 1 else ''}"

    def render(self) -> str:
        lines = [self.summary(), f"goal: {pretty_judgement(self.goal)}"]
        for f in self.failures:
            lines.append(f.render())
        if self.accepted:
            if self.assumptions:
                lines.append("assumptions:")
                lines += [f"  {a}" for a in self.assumptions]
            else:
                lines.append("fully discharged")
        for l in self.leaves:
            lines.append(f"{l.kind} leaf: {l.instances} instance(s) to stage {l.depth}")
        return "\n".join(lines)

    def to_json(self) -> Dict:
        return {
            "accepted": self.accepted,
            "goal": pretty_judgement(self.goal),
            "assumptions": list(self.assumptions),
            "fully_discharged": self.fully_discharged,
            "failures": [{"path": list(f.path), "rules": list(f.rules), "labels": list(f.labels), "kind": f.kind,
                          "message": f.message, "diff": list(f.diff) if f.diff else None}
                         for f in self.failures],
            "leaves": [{"kind": l.kind, "depth": l.depth, "instances": l.instances} for l in self.leaves],
            "timing": [{"path": list(t.path), "rule": t.rule, "seconds": round(t.seconds, 6)}
                       for t in self.timings],
        }

    def json(self) -> str:
        return json.dumps(self.to_json(), indent=2)


# ---------------------------------------------------------------- comparison helpers


def _quant_types(n: A.Node) -> List[A.Type]:
    return [s.ty for s in A.subterms(n) if isinstance(s, (A.Forall, A.Exists))]


def _show(n: A.Node) -> str:
    if isinstance(n, A.Formula):
        return pretty_formula(n)
    if isinstance(n, A.Term):
        return pretty(n)
    return repr(n)


def first_diff(a: A.Node, b: A.Node) -> Tuple[str, str]:
    """The outermost pair of corresponding subterms that are not alpha-equivalent."""
    while True:
        if type(a) is not type(b):
            return _show(a), _show(b)
        ka = [c for _, c, _ in A.children(a)]
        kb = [c for _, c, _ in A.children(b)]
        if len(ka) != len(kb):
            return _show(a), _show(b)
        bad = [(x, y) for x, y in zip(ka, kb) if not A.alpha_eq(x, y)]
        if not bad:
            return _show(a), _show(b)
        a, b = bad[0]


# ---------------------------------------------------------------- kernel


class Kernel:
    def __init__(self, program: A.Program, sig: Optional[Signature] = None,
                 fuel: Optional[int] = None, rules: Optional[Dict[str, RuleFn]] = None):
        from .rules import RULES
        self.program = program
        self.sig = sig or Signature.of_program(program)
        self.fuel = default_fuel() if fuel is None else fuel
        self.rules = rules or RULES
        self.ev = Evaluator(self.sig, self.fuel)
        self._report: Optional[Report] = None

    # -- entry point
    def check(self, root: ProofNode, goal: Judgement) -> Report:
        rep = Report(goal)
        self._report = rep
        try:
            check_judgement(goal, self.sig)
        except PglcTypeError as e:
            rep.failures.append(Failure((), (root.rule,), "ill-typed goal", str(e), pretty_judgement(goal)))
            return rep
        self._prove(goal, root, (), ())
        return rep

    def _prove(self, goal: Judgement, node: ProofNode, path: Tuple[int, ...], rules: Tuple[str, ...],
               labels: Tuple[str, ...] = ()) -> None:
        rules = rules + (node.rule,)
        t0 = time.perf_counter()

        def fail(kind: str, msg: str, diff=None) -> None:
            self._report.failures.append(Failure(path, rules, kind, msg, pretty_judgement(goal), diff,
                                                 str(node.span) if node.span else None, labels))

        fn = self.rules.get(node.rule)
        if fn is None:
            fail("unknown rule", f"no rule named {node.rule}")
            return
        self._path = path
        try:
            premises = fn(self, goal, node)
        except RuleError as e:
            fail(e.kind, str(e), e.diff)
            return
        except PglcTypeError as e:
            fail("ill-typed instantiation", str(e))
            return
        except FuelExhausted as e:
            fail("fuel exhausted", str(e))
            return
        except ValueError as e:  # wrong instantiation kind
            fail("bad instantiation", str(e))
            return
        if len(premises) != len(node.children):
            fail("arity", f"rule {node.rule} has {len(premises)} premise(s) here, proof gives {len(node.children)}")
            return
        for p in premises:
            try:
                check_judgement(p, self.sig)
            except PglcTypeError as e:
                fail("ill-typed instantiation", f"{e} in premise {pretty_judgement(p)}")
                return
        self._report.timings.append(NodeTiming(path, node.rule, time.perf_counter() - t0))
        names = PREMISE_LABELS.get(node.rule, ())
        for k, (p, child) in enumerate(zip(premises, node.children)):
            self._prove(p, child, path + (k,), rules, labels + (names[k] if k < len(names) else "",))

    # -- recording
    def assume(self, text: str) -> None:
        self._report.assumptions.append(text)

    def leaf(self, rec: LeafRecord) -> None:
        self._report.leaves.append(rec)

    # -- instantiations
    def need(self, node: ProofNode, key: str, kind: str):
        v = node.get(key, kind)
        if v is None:
            raise RuleError(f"rule {node.rule} needs instantiation {key} := {kind} ...", "missing instantiation")
        return v

    def opt(self, node: ProofNode, key: str, kind: str, default=None):
        v = node.get(key, kind)
        return default if v is None else v

    # -- terms and types
    def is_global(self, name: str, j: Judgement) -> bool:
        return (name in self.sig.bodies and name not in gamma_names(j.ctx)
                and name not in delta_names(j.ctx))

    def view(self, t: A.Term, j: Judgement) -> A.Term:
        """Strip annotations and unfold a global at the head once."""
        while isinstance(t, A.Ann):
            t = t.term
        if isinstance(t, A.Var) and self.is_global(t.name, j):
            t = self.sig.bodies[t.name]
            while isinstance(t, A.Ann):
                t = t.term
        return t

    def synth(self, j: Judgement, t: A.Term) -> A.Type:
        return Checker(self.sig).synth_closed(t, tctx(j.ctx))

    def fresh(self, base: str, avoid: set) -> str:
        n = A.fresh(base, avoid | set(DISTINGUISHED) | set(self.sig.globals))
        avoid.add(n)
        return n

    def avoid(self, j: Judgement, *nodes: A.Node) -> set:
        out = set(judgement_names(j)) | set(DISTINGUISHED)
        for n in nodes:
            out |= A.all_names(n)
        return out

    # -- comparison
    def norm_f(self, f: A.Formula) -> A.Formula:
        return normalize_formula(f, self.fuel)

    def norm_t(self, t: A.Term) -> A.Term:
        return normalize(t, self.fuel)

    def same_form(self, a: A.Formula, b: A.Formula) -> bool:
        na, nb = self.norm_f(a), self.norm_f(b)
        return A.alpha_eq(na, nb) and _quant_types(na) == _quant_types(nb)

    def same_term(self, a: A.Term, b: A.Term) -> bool:
        return A.alpha_eq(self.norm_t(a), self.norm_t(b))

    def expect_form(self, actual: A.Formula, expected: A.Formula, what: str = "formula") -> None:
        na, nb = self.norm_f(actual), self.norm_f(expected)
        if A.alpha_eq(na, nb):
            ta, tb = _quant_types(na), _quant_types(nb)
            if ta == tb:
                return
            for x, y in zip(ta, tb):
                if x != y:
                    raise RuleError(f"{what} does not match the rule's conclusion: quantifier types differ",
                                    diff=(pretty_type(x), pretty_type(y)))
        raise RuleError(f"{what} does not match the rule's conclusion; expected {pretty_formula(expected)}",
                        diff=first_diff(na, nb))

    def expect_term(self, actual: A.Term, expected: A.Term, what: str = "term") -> None:
        na, nb = self.norm_t(actual), self.norm_t(expected)
        if not A.alpha_eq(na, nb):
            raise RuleError(f"{what} does not match; expected {pretty(expected)}", diff=first_diff(na, nb))

    def expect_type(self, actual: A.Type, expected: A.Type, what: str = "type") -> None:
        if actual != expected:
            raise RuleError(f"{what} mismatch", diff=(pretty_type(actual), pretty_type(expected)))


def check_proof(root: ProofNode, goal: Judgement, program: A.Program,
                fuel: Optional[int] = None) -> Report:
    return Kernel(program, fuel=fuel).check(root, goal)


def check_script(script: ProofScript, fuel: Optional[int] = None) -> Report:
    return check_proof(script.root, from_syntax(script.goal), script.program, fuel)
