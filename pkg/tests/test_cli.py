from __future__ import annotations

import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

import oracles as O
from helpers import CORPUS

from pglc.cli import DEMOS, golden_path, main


def run(*argv: str):
    buf = io.StringIO()
    code = main(list(argv), stdout=buf)
    return code, buf.getvalue()


def support(text: str):
    return {e["value"]: Fraction(e["prob"]) for e in json.loads(text)["support"]}


def test_typecheck_lists_declarations():
    code, out = run("typecheck", "zipwith.pgl")
    assert code == 0
    assert "zipWith : (Nat -> Nat -> Nat) -> Str Nat -> Str Nat -> Str Nat" in out
    assert "formula zip_comm : ok" in out


def test_typecheck_reports_type_errors(tmp_path):
    bad = tmp_path / "bad.pgl"
    bad.write_text("def bad : Nat = 3 - 1\n")
    code, out = run("typecheck", str(bad))
    assert code == 1 and "type error" in out


def test_eval_text_and_json():
    code, out = run("eval", "cassini.pgl", "--term", "fib", "--depth", "4")
    assert code == 0 and out.strip() == "(str 1 1 2 3 5 *) : Str Int @ stage 4"
    code, out = run("eval", "cassini.pgl", "--term", "fib", "--depth", "2", "--json")
    assert json.loads(out) == {"value": "(str 1 1 2 *)", "type": "Str Int", "stage": 2}


def test_dist_of_one_time_pad():
    code, out = run("dist", "otp.pgl", "--term", "otp 1")
    assert code == 0
    probs = [e["prob"] for e in json.loads(out)["support"]]
    assert probs == ["1/4"] * 4


def test_dist_probabilities_are_always_fractions():
    code, out = run("dist", "otp.pgl", "--term", "return 3")
    assert json.loads(out) == {"support": [{"value": "3", "prob": "1/1"}]}


def test_dist_of_walk_matches_oracle():
    code, out = run("dist", "rwalk-shift.pgl", "--term", "rwalk", "--depth", "2")
    want = O.markov_prefix(0, lambda x: O.uniform([x - 1, x + 1]), 2)
    assert sorted(Fraction(e["prob"]) for e in json.loads(out)["support"]) == sorted(want.values())


def test_dist_rejects_non_distribution():
    code, _ = run("dist", "otp.pgl", "--term", "3")
    assert code == 1


@pytest.mark.parametrize("rel, expected", [("le", 0), ("eq", 1), ("ge", 1), ("ne", 0), ("gt", 1)])
def test_couple_builtin_relations(rel, expected):
    code, out = run("couple", "--left", "bern 1/3", "--right", "bern 2/3", "--rel", rel)
    assert code == expected
    assert out.splitlines()[0] == ("EXISTS" if expected == 0 else "NOT-EXISTS")


def test_couple_witness_has_the_right_marginals():
    code, out = run("couple", "--left", "bern 1/3", "--right", "bern 2/3", "--rel", "le", "--witness")
    assert code == 0
    joint = support(out.split("\n", 1)[1])
    left: dict = {}
    right: dict = {}
    for pair, p in joint.items():
        a, b = pair.removeprefix("(pair ").removesuffix(")").split()
        assert int(a) <= int(b)
        left[int(a)] = left.get(int(a), 0) + p
        right[int(b)] = right.get(int(b), 0) + p
    assert left == O.bern(Fraction(1, 3)) and right == O.bern(Fraction(2, 3))


def test_couple_formula_relation(tmp_path):
    code, _ = run("couple", "otp.pgl", "--left", "otp 0", "--right", "otp 3", "--rel", "z1 = z2")
    assert code == 0
    rel = tmp_path / "rel.fml"
    rel.write_text("z1 <= z2 + 1\n")
    code, _ = run("couple", "--left", "unif {1, 2}", "--right", "unif {0, 1}", "--rel", str(rel))
    assert code == 0


def test_check_formula_by_name_and_text():
    assert run("check-formula", "zipwith.pgl", "--formula", "zip_comm", "--depth", "3") == (0, "true\n")
    code, out = run("check-formula", "zipwith.pgl", "--formula", "ones_always", "--depth", "5")
    assert code == 0 and out.strip() == "true (verified up to stage 5)"
    code, out = run("check-formula", "zipwith.pgl", "--formula", "All(nats, x. x <= 2)", "--depth", "3")
    assert code == 1 and out.strip() == "false"


def test_check_formula_unbounded_quantifier_is_an_error():
    code, _ = run("check-formula", "zipwith.pgl", "--formula", "forall x : Nat. x = x")
    assert code == 1


def test_prove_text_and_json():
    code, out = run("prove", "coins.pgp")
    assert code == 0 and out.startswith("ACCEPTED, 0 assumptions")
    code, out = run("prove", "otp.pgp", "--json", "--soundness-depth", "1")
    data = json.loads(out)
    assert code == 0 and data["accepted"] and data["soundness_probe"] == {"depth": 1, "holds": True}


def test_prove_rejected_mutant_exits_one():
    code, out = run("prove", str(CORPUS / "mutants" / "otp_identity_coupling.pgp"))
    assert code == 1 and out.startswith("REJECTED")


@pytest.mark.parametrize("argv", [
    (), ("frobnicate",), ("eval", "otp.pgl"), ("demo", "nosuchdemo"),
    ("eval", "no/such/file.pgl", "--term", "1"), ("eval", "otp.pgl", "--term", "(1 +"),
    ("eval", "otp.pgl", "--term", "1", "--depth", "-1"),
])
def test_usage_and_parse_errors_exit_two(argv):
    assert run(*argv)[0] == 2


@pytest.mark.parametrize("name", DEMOS)
def test_demo_matches_golden(name):
    code, out = run("demo", name)
    assert code == 0, out
    assert f"golden {name}-d4.json: match" in out


def test_demo_aliases_and_missing_golden():
    code, out = run("demo", "sqrt", "--depth", "2")
    assert code == 0 and "no golden for depth 2" in out


def test_demo_regen_is_idempotent():
    gp = golden_path("coins", 4)
    before = gp.read_bytes()
    try:
        code, out = run("demo", "coins", "--regen")
        assert code == 0 and "golden written" in out
        assert gp.read_bytes() == before
    finally:
        gp.write_bytes(before)


def test_output_is_deterministic():
    assert run("demo", "zipwith") == run("demo", "zipwith")
    assert run("dist", "coins.pgl", "--term", "coins (1/3)", "--depth", "3") == \
        run("dist", "coins.pgl", "--term", "coins (1/3)", "--depth", "3")


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "pglc.cli", "eval", "otp.pgl", "--term", "1 + 2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("3 : Nat")
