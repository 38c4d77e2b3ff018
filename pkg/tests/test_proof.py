from __future__ import annotations

import json

import pytest

from helpers import CORPUS, PROOFS, program, script

from pglc.proof import Rhol, Uhol, check_proof, check_script, embed_uhol, from_syntax, soundness_probe
from pglc.proof.embed import EmbedError
from pglc.surface import PglcSyntaxError, parse_judgement, parse_proof
from pglc.surface.parser import ProofNode

MUTANTS = sorted((CORPUS / "mutants").glob("*.pgp"))

# (failure kind, failing rule) of the first failure, frozen from the kernel
FIRST_FAILURE = {
    "coins_reversed_step": ("undischarged leaf", "STRASSEN"),
    "coins_semantic_coupling": ("undischarged leaf", "SEMANTIC"),
    "coins_weak_invariant": ("schema mismatch", "AXIOM"),
    "every2_relational_fix": ("schema mismatch", "FIX"),
    "every2_wrong_tail": ("schema mismatch", "SUBST"),
    "otp_identity_coupling": ("side condition", "AX_U"),
    "otp_unbounded_leaf": ("undischarged leaf", "STRASSEN"),
    "otp_unit_for_coupling": ("schema mismatch", "UNIT_P"),
    "rwalk_bad_coupling": ("undischarged leaf", "STRASSEN"),
    "rwalk_lockstep": ("side condition", "MARKOV_M_N"),
    "zipwith_head_leq": ("schema mismatch", "SUBST"),
    "zipwith_lost_pairing": ("side condition", "AX_U"),
}


def inline(goal: str, proof: str, imports: str = "zipwith.pgl"):
    return parse_proof(f'import "{imports}"\ngoal {goal}\nproof\n{proof}\n', "<test>", CORPUS)


@pytest.mark.parametrize("name", PROOFS)
def test_corpus_proofs_are_fully_discharged(name):
    r = check_script(script(CORPUS / f"{name}.pgp"))
    assert r.accepted and r.fully_discharged, r.render()
    assert r.summary() == "ACCEPTED, 0 assumptions"


@pytest.mark.parametrize("path", MUTANTS, ids=lambda p: p.stem)
def test_mutants_are_rejected_at_the_expected_rule(path):
    assert path.read_text().startswith("-- Mutant of ")
    r = check_script(script(path))
    assert not r.accepted
    f = r.failures[0]
    assert (f.kind, f.rule) == FIRST_FAILURE[path.stem]
    assert r.summary().startswith("REJECTED")
    assert f.render()


def test_every_mutant_has_an_expectation():
    assert {p.stem for p in MUTANTS} == set(FIRST_FAILURE)


def test_failure_labels_name_the_premise():
    r = check_script(script(CORPUS / "mutants" / "coins_weak_invariant.pgp"))
    assert "(psi4 unfolding)" in r.failures[0].labels


def test_sibling_failures_are_all_reported():
    r = check_script(script(CORPUS / "mutants" / "coins_reversed_step.pgp"))
    assert [f.rule for f in r.failures] == ["STRASSEN", "SEMANTIC"]


def test_report_json_shape():
    r = check_script(script(CORPUS / "otp.pgp"))
    data = json.loads(r.json())
    assert data["accepted"] and data["fully_discharged"] and data["failures"] == []
    assert {l["kind"] for l in data["leaves"]} == {"strassen"}
    assert r.strassen_leaves() == 1
    assert all(set(t) == {"path", "rule", "seconds"} for t in data["timing"])


def test_assume_counts_as_an_assumption():
    s = inline("uhol |- ones : Str Nat | hd r = 1", "ASSUME")
    r = check_script(s)
    assert r.accepted and not r.fully_discharged
    assert r.summary() == "ACCEPTED, 1 assumption"
    assert "assumptions:" in r.render()


def test_semantic_leaf_rejects_a_false_goal():
    r = check_script(inline("uhol |- ones : Str Nat | hd r = 2", "SEMANTIC"))
    assert not r.accepted and r.failures[0].kind == "undischarged leaf"


def test_unknown_rule_is_a_parse_error():
    with pytest.raises(PglcSyntaxError, match="unknown rule"):
        inline("uhol |- ones : Str Nat | hd r = 1", "NO_SUCH_RULE")


def test_soundness_probe_separates_true_and_false_goals():
    prog, sig = program("zipwith")
    good = from_syntax(parse_judgement("uhol |- nats : Str Nat | All(r, x. 0 <= x)", prog))
    bad = from_syntax(parse_judgement("uhol |- nats : Str Nat | All(r, x. x <= 2)", prog))
    assert soundness_probe(good, sig, 4)
    assert soundness_probe(bad, sig, 2)
    assert not soundness_probe(bad, sig, 4)


@pytest.mark.parametrize("name", PROOFS)
def test_soundness_probe_on_corpus_goals(name):
    s = script(CORPUS / f"{name}.pgp")
    sig = program(name)[1]
    assert soundness_probe(from_syntax(s.goal), sig, 2)


def test_embedding_two_unary_derivations():
    prog, _ = program("zipwith")
    j1 = from_syntax(parse_judgement("uhol |- ones : Str Nat | hd r = 1", prog))
    j2 = from_syntax(parse_judgement("uhol |- nats : Str Nat | hd r = 0", prog))
    assert isinstance(j1, Uhol)
    goal, root = embed_uhol((j1, ProofNode("SEMANTIC", {}, [])), (j2, ProofNode("SEMANTIC", {}, [])))
    assert isinstance(goal, Rhol) and root.rule == "CONJ"
    r = check_proof(root, goal, prog)
    assert r.accepted, r.render()


def test_embedding_needs_matching_contexts():
    prog, _ = program("zipwith")
    j1 = from_syntax(parse_judgement("uhol |- ones : Str Nat | hd r = 1", prog))
    j2 = from_syntax(parse_judgement("uhol gamma x : Nat; |- nats : Str Nat | hd r = 0", prog))
    with pytest.raises(EmbedError):
        embed_uhol((j1, ProofNode("ASSUME", {}, [])), (j2, ProofNode("ASSUME", {}, [])))
