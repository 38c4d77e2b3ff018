"""Rule registry and the leaf rules."""
from __future__ import annotations

from ..surface import parser as P
from . import ghol, rhol, uhol
from .common import goal_as
from .judgement import Ghol, StrassenPremise, as_ghol, pretty_judgement
from .kernel import RuleError
from .semantic import LeafRecord, SemanticFailure, check_leaf, check_strassen

DEFAULT_LEAF_DEPTH = 3


def _bounds(n) -> dict:
    return {x: list(dom) for x, dom in (n.get("bounds", "bounds") or ())}


def assume(k, g, n):
    k.assume(pretty_judgement(g))
    return []


def semantic(k, g, n):
    depth = k.opt(n, "depth", "nat", DEFAULT_LEAF_DEPTH)
    try:
        count = check_leaf(g, k.sig, depth, _bounds(n), k.ev)
    except SemanticFailure as e:
        raise RuleError(str(e), "undischarged leaf")
    k.leaf(LeafRecord("semantic", pretty_judgement(g), depth, count))
    return []


def strassen(k, g, n):
    g = goal_as(g, StrassenPremise, n.rule)
    depth = k.opt(n, "depth", "nat", DEFAULT_LEAF_DEPTH)
    try:
        count = check_strassen(g, k.sig, depth, _bounds(n), k.ev)
    except SemanticFailure as e:
        raise RuleError(str(e), "undischarged leaf")
    k.leaf(LeafRecord("strassen", pretty_judgement(g), depth, count))
    return []


def to_ghol(k, g, n):
    # a refinement judgement holds iff its logical reading does
    if isinstance(g, (Ghol, StrassenPremise)):
        raise RuleError(f"{n.rule} applies to unary or relational judgements only")
    return [as_ghol(g)]


LEAVES = {"ASSUME": assume, "SEMANTIC": semantic, "STRASSEN": strassen}

RULES = {}
ARITY = {}
for mod in (ghol, rhol, uhol):
    RULES.update(mod.RULES)
    ARITY.update(mod.ARITY)
RULES.update(LEAVES)
RULES["TO_GHOL"] = to_ghol
ARITY.update({k: 0 for k in LEAVES})
ARITY["TO_GHOL"] = 1

missing = set(RULES) ^ set(ARITY)
assert not missing, missing


def register() -> None:
    """Make the parser reject unknown rules and wrong premise counts."""
    P.RULE_ARITY.update(ARITY)


register()
