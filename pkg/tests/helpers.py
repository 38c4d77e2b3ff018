"""Shared loading helpers for the test-suite."""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Dict, Tuple

from pglc import coupling as C
from pglc.cli import corpus_dir
from pglc.evalsem import evaluate, prefix, to_py
from pglc.surface import ast as A
from pglc.surface import parse_program, parse_proof, parse_term
from pglc.typesys import Signature

CORPUS = corpus_dir()
PROGRAMS = ("otp", "coins", "rwalk-shift", "lump-4d-3d", "zipwith", "approx-sqrt", "cassini", "every2")
PROOFS = ("otp", "coins", "zipwith", "rwalk-shift", "every2")


@lru_cache(maxsize=None)
def program(name: str) -> Tuple[A.Program, Signature]:
    path = CORPUS / f"{name}.pgl"
    prog = parse_program(path.read_text(), str(path))
    return prog, Signature.of_program(prog)


def term(name: str, src: str) -> A.Term:
    return parse_term(src, program(name)[0])


def value(name: str, src: str, stage: int):
    return evaluate(term(name, src), program(name)[1], stage)


def dist(name: str, src: str, stage: int) -> C.FiniteDist:
    return value(name, src, stage).dist


def py_dist(d: C.FiniteDist) -> Dict:
    """Plain-Python view of a distribution: streams become tuples."""
    out: Dict = {}
    for v, p in d.items():
        k = to_py(v)
        out[k] = out.get(k, Fraction(0)) + p
    return out


def stream(name: str, src: str, stage: int, laters: int = 0):
    v = value(name, src, stage + laters)
    for _ in range(laters):
        v = v.arg
    return tuple(to_py(x) for x in prefix(v))


def script(path: Path):
    return parse_proof(path.read_text(), str(path), path.parent)
