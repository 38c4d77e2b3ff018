"""Command-line front end: ``pglc <subcommand> ...``.

Exit codes: 0 success, 1 verification failure, 2 usage or parse error.
"""
from __future__ import annotations

import argparse
import difflib
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from . import coupling as C
from .evalsem import (DistV, EvalError, Evaluator, StreamV, Value, evaluate, prefix, to_py,
                      to_sexpr)
from .logic import StageAssertion, UnboundedQuantifier, check_formula
from .surface import (PglcSyntaxError, parse_formula, parse_program, parse_proof, parse_term,
                      pretty_type)
from .surface import ast as A
from .typesys import Checker, Ctx, PglcTypeError, Signature

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEMOS = ("otp", "coins", "rwalk-shift", "lump-4d-3d", "zipwith", "approx-sqrt", "cassini", "every2")
ALIASES = {"lump": "lump-4d-3d", "rwalk": "rwalk-shift", "sqrt": "approx-sqrt"}


class UsageError(Exception):
    pass


class Out:
    """Line printer bound to a stream (stdout unless a test passes its own)."""

    def __init__(self, stream=None):
        self.stream = stream or sys.stdout

    def __call__(self, line: str = "") -> None:
        print(line, file=self.stream)


# ---------------------------------------------------------------- files


def corpus_dir() -> Path:
    return Path(str(resources.files("pglc") / "corpus"))


def resolve(path: str) -> Path:
    """An existing path, or the packaged corpus file with the same basename."""
    p = Path(path)
    if p.exists():
        return p
    alt = corpus_dir() / p.name
    if alt.exists():
        return alt
    raise UsageError(f"no such file: {path}")


def load_program(path: str) -> Tuple[A.Program, Signature]:
    p = resolve(path)
    prog = parse_program(p.read_text(), str(p))
    return prog, Signature.of_program(prog)


def prelude_only() -> Tuple[A.Program, Signature]:
    prog = parse_program("", "<prelude>")
    return prog, Signature.of_program(prog)


# ---------------------------------------------------------------- rendering


def frac(p: Fraction) -> str:
    p = Fraction(p)
    return f"{p.numerator}/{p.denominator}"


def render_value(v: Any) -> str:
    if isinstance(v, tuple) and len(v) == 2 and all(isinstance(x, Value) for x in v):
        return f"(pair {to_sexpr(v[0])} {to_sexpr(v[1])})"
    if isinstance(v, Value):
        return to_sexpr(v)
    return str(v)


def dist_json(d: C.FiniteDist, render: Callable[[Any], str] = render_value) -> Dict[str, Any]:
    return {"support": [{"value": render(v), "prob": frac(p)} for v, p in d.items()]}


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)


# ---------------------------------------------------------------- relations


def _lift(op: Callable[[Any, Any], bool]) -> Callable[[Any, Any], bool]:
    # numbers directly; stream prefixes and pairs pointwise
    def rel(a: Any, b: Any) -> bool:
        if isinstance(a, tuple) and isinstance(b, tuple):
            return len(a) == len(b) and all(rel(x, y) for x, y in zip(a, b))
        if isinstance(a, tuple) or isinstance(b, tuple):
            return False
        return op(a, b)
    return rel


BUILTIN_RELS: Dict[str, Callable[[Any, Any], bool]] = {
    "eq": lambda a, b: a == b,
    "ne": lambda a, b: a != b,
    "le": _lift(lambda a, b: a <= b),
    "lt": _lift(lambda a, b: a < b),
    "ge": _lift(lambda a, b: a >= b),
    "gt": _lift(lambda a, b: a > b),
}


def relation(spec: str, prog: A.Program, sig: Signature, stage: int) -> Callable[[Value, Value], bool]:
    """A builtin relation name, or a formula (inline or in a file) over ``z1`` and ``z2``."""
    if spec in BUILTIN_RELS:
        base = BUILTIN_RELS[spec]
        return lambda a, b: base(to_py(a), to_py(b))
    p = Path(spec)
    text = p.read_text() if p.exists() else spec
    f = parse_formula(text.strip(), prog, str(p) if p.exists() else "<rel>")
    ev = Evaluator(sig)

    def holds(a: Value, b: Value) -> bool:
        return bool(check_formula(StageAssertion(f, stage, {"z1": a, "z2": b}), sig, evaluator=ev))
    return holds


# ---------------------------------------------------------------- subcommands


def cmd_typecheck(args, out: Out) -> int:
    p = resolve(args.file)
    prog = parse_program(p.read_text(), str(p), with_prelude=True)
    user = parse_program(p.read_text(), str(p), with_prelude=False)
    try:
        sig = Signature.of_program(prog)
    except PglcTypeError as e:
        out(f"type error: {e}")
        return EXIT_FAIL
    for d in user.decls:
        if isinstance(d, A.Def):
            tvars, ty = sig.globals[d.name]
            quant = "".join(f"forall {'const ' if c else ''}{n}. " for n, c in tvars)
            out(f"{d.name} : {quant}{pretty_type(ty)}")
        elif isinstance(d, A.FormulaDecl):
            out(f"{'axiom' if d.axiom else 'formula'} {d.name} : ok")
        elif isinstance(d, A.PredDecl):
            out(f"pred {d.name} : ok")
    return EXIT_OK


def _closed_term(args, sig: Signature, prog: A.Program) -> Tuple[A.Term, A.Type]:
    t = parse_term(args.term, prog, "<term>")
    ty = Checker(sig).synth_closed(t)
    return t, ty


def cmd_eval(args, out: Out) -> int:
    prog, sig = load_program(args.file)
    t, ty = _closed_term(args, sig, prog)
    v = evaluate(t, sig, args.depth)
    if args.json:
        if isinstance(v, DistV):
            out(dumps(dist_json(v.dist)))
        else:
            out(dumps({"value": to_sexpr(v), "type": pretty_type(ty), "stage": args.depth}))
    else:
        out(f"{to_sexpr(v)} : {pretty_type(ty)} @ stage {args.depth}")
    return EXIT_OK


def cmd_dist(args, out: Out) -> int:
    prog, sig = load_program(args.file)
    t, ty = _closed_term(args, sig, prog)
    if not isinstance(ty, A.TDist):
        raise PglcTypeError(f"dist needs a term of distribution type, found {pretty_type(ty)}")
    v = evaluate(t, sig, args.depth)
    assert isinstance(v, DistV)
    out(dumps(dist_json(v.dist)))
    return EXIT_OK


def cmd_couple(args, out: Out) -> int:
    prog, sig = load_program(args.file) if args.file else prelude_only()
    dists = []
    for src in (args.left, args.right):
        t = parse_term(src, prog, "<term>")
        ty = Checker(sig).synth_closed(t)
        if not isinstance(ty, A.TDist):
            raise PglcTypeError(f"couple needs terms of distribution type, found {pretty_type(ty)}")
        dists.append(evaluate(t, sig, args.depth).dist)
    rel = relation(args.rel, prog, sig, args.depth)
    w = C.strassen_flow(dists[0], dists[1], rel)
    out("EXISTS" if w is not None else "NOT-EXISTS")
    if w is not None and args.witness:
        out(dumps(dist_json(w)))
    return EXIT_OK if w is not None else EXIT_FAIL


def cmd_check_formula(args, out: Out) -> int:
    prog, sig = load_program(args.file)
    if args.formula in sig.formulas:
        f = sig.formulas[args.formula].body
    else:
        f = parse_formula(args.formula, prog, "<formula>")
        Checker(sig).check_formula(Ctx(), f)
    res = check_formula(StageAssertion(f, args.depth), sig)
    out(("true" if res.holds else "false") + (f" ({res.qualifier})" if res.bounded else ""))
    return EXIT_OK if res.holds else EXIT_FAIL


def prove_file(path: Path, soundness_depth: Optional[int] = None):
    from .proof import check_script, from_syntax, soundness_probe
    script = parse_proof(path.read_text(), str(path), path.parent)
    rep = check_script(script)
    probe = None
    if soundness_depth is not None:
        sig = Signature.of_program(script.program)
        probe = soundness_probe(from_syntax(script.goal), sig, soundness_depth)
    return rep, probe


def cmd_prove(args, out: Out) -> int:
    rep, probe = prove_file(resolve(args.file), args.soundness_depth)
    if args.json:
        obj = rep.to_json()
        if probe is not None:
            obj["soundness_probe"] = {"depth": args.soundness_depth, "holds": probe}
        out(dumps(obj))
    else:
        out(rep.render())
        if probe is not None:
            out(f"soundness probe to stage {args.soundness_depth}: {'holds' if probe else 'FAILS'}")
    return EXIT_OK if rep.accepted and probe is not False else EXIT_FAIL


# ---------------------------------------------------------------- demos


@dataclass
class DemoResult:
    lines: List[str] = field(default_factory=list)
    ok: bool = True
    data: Dict[str, Any] = field(default_factory=dict)

    def say(self, line: str) -> None:
        self.lines.append(line)

    def check(self, label: str, ok: bool) -> None:
        self.ok &= ok
        self.say(f"{label}: {'ok' if ok else 'FAILED'}")


def _corpus(name: str) -> Tuple[A.Program, Signature]:
    return load_program(str(corpus_dir() / f"{name}.pgl"))


def _dist(sig: Signature, src: str, prog: A.Program, stage: int) -> C.FiniteDist:
    return evaluate(parse_term(src, prog), sig, stage).dist


def _stream(sig: Signature, src: str, prog: A.Program, stage: int, laters: int = 0) -> Tuple[Any, ...]:
    v = evaluate(parse_term(src, prog), sig, stage + laters)
    for _ in range(laters):
        v = v.arg
    return tuple(to_py(x) for x in prefix(v))


def _prefix_rel(op: Callable[[Any, Any], bool]) -> Callable[[Value, Value], bool]:
    return lambda a, b: _lift(op)(to_py(a), to_py(b))


def demo_otp(depth: int, r: DemoResult) -> None:
    prog, sig = _corpus("otp")
    keys = _dist(sig, "keys", prog, depth)
    ds = {m: _dist(sig, f"otp {m}", prog, depth) for m in range(4)}
    for m, d in ds.items():
        r.check(f"otp {m} is uniform over 4 ciphertexts", d == keys and len(d) == 4)
        r.data[f"otp {m}"] = dist_json(d)
    pairs = all(C.strassen_flow(ds[a], ds[b], lambda x, y: x == y) is not None
                for a in range(4) for b in range(4))
    r.check("equality coupling between every pair of messages", pairs)


def demo_coins(depth: int, r: DemoResult) -> None:
    prog, sig = _corpus("coins")
    lo = _dist(sig, "coins (1/3)", prog, depth)
    hi = _dist(sig, "coins (2/3)", prog, depth)
    w = C.strassen_flow(lo, hi, _prefix_rel(lambda a, b: a <= b))
    r.say(f"coins 1/3 vs coins 2/3 under pointwise <= at stage {depth}: coupling "
          f"{'EXISTS' if w is not None else 'NOT-EXISTS'}")
    r.ok &= w is not None
    if w is not None:
        r.check("witness is a coupling", C.is_coupling(w, lo, hi, _prefix_rel(lambda a, b: a <= b)))
        r.data["witness"] = dist_json(w)
    rev = C.strassen_flow(hi, lo, _prefix_rel(lambda a, b: a <= b))
    r.check("reverse direction has no coupling", rev is None)


def demo_rwalk(depth: int, r: DemoResult) -> None:
    prog, sig = _corpus("rwalk-shift")
    walk = _dist(sig, "rwalk", prog, 2 * depth)
    lazy = _dist(sig, "lwalk2", prog, depth)
    evens = walk.map(lambda s: tuple(to_py(s))[::2])
    lazy_p = lazy.map(lambda s: tuple(to_py(s)))
    r.check(f"even positions of rwalk at stage {2 * depth} match lwalk2 at stage {depth}", evens == lazy_p)
    w = C.strassen_flow(evens, lazy_p, lambda a, b: a == b)
    r.check("equality coupling (All_2_1)", w is not None)
    r.data["lwalk2"] = dist_json(lazy_p, _render_py)


def demo_lump(depth: int, r: DemoResult) -> None:
    prog, sig = _corpus("lump-4d-3d")
    n = max(depth - 1, 0)
    walk = _dist(sig, "rwalk4", prog, n)
    lazy = _dist(sig, "lwalk3", prog, n)
    pr = lambda v: (v[0], v[1][0], v[1][1][0])  # noqa: E731
    pushed = walk.map(lambda s: tuple(pr(x) for x in to_py(s)))
    lazy_p = lazy.map(lambda s: tuple(to_py(x) for x in prefix(s)))
    lazy_p = C.FiniteDist((tuple((x[0], x[1][0], x[1][1]) for x in v), p) for v, p in lazy_p.items())
    r.say(f"stage {n}: {len(walk)} paths in Z^4, {len(lazy)} paths in Z^3")
    r.check("pushforward along pr43 equals the lazy walk", pushed == lazy_p)
    r.check("equality coupling", C.strassen_flow(pushed, lazy_p, lambda a, b: a == b) is not None)
    r.data["lwalk3 paths"] = len(lazy_p)
    r.data["lwalk3 total"] = frac(lazy_p.total())


def demo_zipwith(depth: int, r: DemoResult) -> None:
    prog, sig = _corpus("zipwith")
    a = _stream(sig, "zipWith plus nats ones", prog, depth)
    b = _stream(sig, "zipWith plus ones nats", prog, depth)
    r.say(f"zipWith plus nats ones = {list(a)}")
    r.check("prefixes agree with the arguments swapped", a == b)
    r.data["prefix"] = [str(x) for x in a]


def demo_approx(depth: int, r: DemoResult) -> None:
    prog, sig = _corpus("approx-sqrt")
    f1 = _stream(sig, "approx (1/2) 2 2", prog, depth)
    f2 = _stream(sig, "approx (3/4) 2 2", prog, depth)
    inv = all(0 <= x <= y and 2 <= x * x for x, y in zip(f1, f2))
    r.say(f"p = 1/2: {[str(x) for x in f1]}")
    r.say(f"p = 3/4: {[str(x) for x in f2]}")
    r.check("0 <= f(1/2,i) <= f(3/4,i) and 2 <= f(1/2,i)^2", inv and len(f1) == depth + 1)
    r.data["p=1/2"] = [str(x) for x in f1]
    r.data["p=3/4"] = [str(x) for x in f2]


def demo_cassini(depth: int, r: DemoResult) -> None:
    prog, sig = _corpus("cassini")
    lhs = _stream(sig, "lhs", prog, depth, laters=2)
    rhs = _stream(sig, "rhs", prog, depth, laters=1)
    r.say(f"F <.> tl (tl F)      = {list(lhs)}")
    r.say(f"tl (F <.> F) <+> A   = {list(rhs)}")
    r.check("prefixes agree", lhs == rhs and len(lhs) == depth + 1)
    r.data["prefix"] = [str(x) for x in lhs]


def demo_every2(depth: int, r: DemoResult) -> None:
    prog, sig = _corpus("every2")
    a = _stream(sig, "every2 ones", prog, depth)
    b = _stream(sig, "let box x = ones in x", prog, depth)
    c = _stream(sig, "every2 nats", prog, depth)
    r.say(f"every2 nats = {list(c)}")
    r.check("every2 ones has the prefix of ones", a == b)
    r.data["every2 nats"] = [str(x) for x in c]


def _render_py(v: Any) -> str:
    if isinstance(v, tuple):
        return "(" + " ".join(_render_py(x) for x in v) + ")"
    return str(v)


DEMO_FNS: Dict[str, Callable[[int, DemoResult], None]] = {
    "otp": demo_otp, "coins": demo_coins, "rwalk-shift": demo_rwalk, "lump-4d-3d": demo_lump,
    "zipwith": demo_zipwith, "approx-sqrt": demo_approx, "cassini": demo_cassini, "every2": demo_every2,
}


def golden_path(name: str, depth: int) -> Path:
    return corpus_dir() / "goldens" / f"{name}-d{depth}.json"


def run_demo(name: str, depth: int) -> DemoResult:
    r = DemoResult()
    DEMO_FNS[name](depth, r)
    proof = corpus_dir() / f"{name}.pgp"
    if proof.exists():
        rep, _ = prove_file(proof)
        r.say(f"proof {proof.name}: {rep.summary()}")
        r.ok &= rep.accepted
        r.data["proof"] = rep.summary()
    return r


def golden_text(name: str, depth: int, r: DemoResult) -> str:
    return json.dumps({"demo": name, "depth": depth, "lines": r.lines, "data": r.data}, indent=1) + "\n"


def cmd_demo(args, out: Out) -> int:
    name = ALIASES.get(args.name, args.name)
    if name not in DEMO_FNS:
        raise UsageError(f"unknown demo {args.name}; choose from {', '.join(DEMOS)}")
    r = run_demo(name, args.depth)
    for line in r.lines:
        out(line)
    text = golden_text(name, args.depth, r)
    gp = golden_path(name, args.depth)
    if args.regen:
        gp.parent.mkdir(parents=True, exist_ok=True)
        gp.write_text(text)
        out(f"golden written: {gp.name}")
    elif gp.exists():
        old = gp.read_text()
        if old != text:
            out("golden mismatch:")
            for line in difflib.unified_diff(old.splitlines(), text.splitlines(), "golden", "current",
                                             lineterm=""):
                out(line)
            return EXIT_FAIL
        out(f"golden {gp.name}: match")
    else:
        out(f"no golden for depth {args.depth}")
    return EXIT_OK if r.ok else EXIT_FAIL


# ---------------------------------------------------------------- argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="pglc", description="Evaluator, coupling checker and proof checker.")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("typecheck", help="print the type of every declaration")
    p.add_argument("file")
    p.set_defaults(fn=cmd_typecheck)

    for name, fn, helptext in (("eval", cmd_eval, "evaluate a closed term at a stage"),
                               ("dist", cmd_dist, "print the distribution of a closed term as JSON")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("file")
        p.add_argument("--term", required=True)
        p.add_argument("--depth", type=int, default=0)
        if name == "eval":
            p.add_argument("--json", action="store_true")
        p.set_defaults(fn=fn)

    p = sub.add_parser("couple", help="decide whether a coupling exists")
    p.add_argument("file", nargs="?")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--rel", required=True, help="eq, ne, le, lt, ge, gt, or a formula over z1 z2")
    p.add_argument("--depth", type=int, default=0)
    p.add_argument("--witness", action="store_true")
    p.set_defaults(fn=cmd_couple)

    p = sub.add_parser("check-formula", help="decide a closed formula at a stage")
    p.add_argument("file")
    p.add_argument("--formula", required=True, help="a declared formula name or formula text")
    p.add_argument("--depth", type=int, default=0)
    p.set_defaults(fn=cmd_check_formula)

    p = sub.add_parser("prove", help="check a proof script")
    p.add_argument("file")
    p.add_argument("--soundness-depth", type=int, default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_prove)

    p = sub.add_parser("demo", help="run a corpus example end to end")
    p.add_argument("name")
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--regen", action="store_true", help="rewrite the golden file")
    p.set_defaults(fn=cmd_demo)
    return ap


def main(argv: Optional[Sequence[str]] = None, stdout=None) -> int:
    out = Out(stdout)
    err = Out(sys.stderr)
    try:
        args = build_parser().parse_args(list(sys.argv[1:] if argv is None else argv))
        if getattr(args, "depth", 0) is not None and getattr(args, "depth", 0) < 0:
            raise UsageError("--depth must be non-negative")
        return args.fn(args, out)
    except UsageError as e:
        err(f"usage error: {e}")
        return EXIT_USAGE
    except PglcSyntaxError as e:
        err(f"parse error: {e}")
        return EXIT_USAGE
    except PglcTypeError as e:
        err(f"type error: {e}")
        return EXIT_FAIL
    except (EvalError, UnboundedQuantifier, ValueError) as e:
        err(f"error: {e}")
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
