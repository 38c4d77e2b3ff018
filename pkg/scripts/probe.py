#!/usr/bin/env python3
"""Check every corpus proof, then probe its goal semantically at stages 0..depth."""
import argparse
import time

from pglc.cli import corpus_dir
from pglc.proof import check_script, from_syntax, soundness_probe
from pglc.surface import parse_proof
from pglc.typesys import Signature


def probe(path, depth: int) -> str:
    script = parse_proof(path.read_text(), str(path), path.parent)
    t0 = time.perf_counter()
    rep = check_script(script)
    sig = Signature.of_program(script.program)
    holds = [soundness_probe(from_syntax(script.goal), sig, d) for d in range(depth + 1)]
    dt = time.perf_counter() - t0
    marks = "".join("+" if h else "-" for h in holds)
    return f"{path.stem:24s} {rep.summary():28s} probe {marks}  {dt:6.2f}s"


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--depth", type=int, default=3)
    ap.add_argument("--mutants", action="store_true", help="also run the rejected mutants")
    args = ap.parse_args()
    paths = sorted(corpus_dir().glob("*.pgp"))
    if args.mutants:
        paths += sorted((corpus_dir() / "mutants").glob("*.pgp"))
    for p in paths:
        print(probe(p, args.depth))
