"""The eleven acceptance criteria, exact arithmetic throughout.

Each criterion prints one ``PASS``/``FAIL`` line.  Run directly with
``python tests/test_acceptance.py`` for the summary alone.
"""
from __future__ import annotations

import random
import sys
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, List, Tuple

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import oracles as O  # noqa: E402
from helpers import CORPUS, PROOFS, dist, program, py_dist, script, stream, term  # noqa: E402

from pglc import coupling as C  # noqa: E402
from pglc.evalsem import Evaluator, evaluate, normalize, restrict, to_py  # noqa: E402
from pglc.evalsem.values import BoxV  # noqa: E402
from pglc.proof import check_script, from_syntax, soundness_probe  # noqa: E402
from pglc.surface import ast as A  # noqa: E402
from pglc.surface import parse_term  # noqa: E402

CRITERIA: List[Tuple[int, str, Callable[[], Tuple[bool, str]]]] = []


def criterion(n: int, title: str):
    def reg(fn):
        CRITERIA.append((n, title, fn))
        return fn
    return reg


def _le_pointwise(a, b) -> bool:
    ta, tb = to_py(a), to_py(b)
    return len(ta) == len(tb) and all(x <= y for x, y in zip(ta, tb))


def _random_dist(rng: random.Random, support: List, n: int) -> C.FiniteDist:
    pts = rng.sample(support, n)
    w = [rng.randint(1, 6) for _ in pts]
    tot = sum(w)
    return C.FiniteDist({v: Fraction(x, tot) for v, x in zip(pts, w)})


# ---------------------------------------------------------------- 1


@criterion(1, "coupling table for Bern(3/10), Bern(6/10) under <=")
def c1():
    p, q = Fraction(3, 10), Fraction(6, 10)
    joint = C.FiniteDist({(0, 0): Fraction(2, 5), (0, 1): Fraction(3, 10), (1, 0): 0, (1, 1): Fraction(3, 10)})
    ok = C.is_coupling(joint, C.bernoulli(p), C.bernoulli(q), lambda a, b: a <= b)
    return ok, "is_coupling"


# ---------------------------------------------------------------- 2


@criterion(2, "strassen_check agrees with strassen_flow on 500 random instances")
def c2():
    rng = random.Random(20261016)
    bad = 0
    for _ in range(500):
        mu1 = _random_dist(rng, list(range(12)), rng.randint(1, 8))
        mu2 = _random_dist(rng, list(range(12)), rng.randint(1, 8))
        density = rng.random()
        pairs = {(a, b) for a in mu1 for b in mu2 if rng.random() < density}
        rel = lambda a, b, s=pairs: (a, b) in s  # noqa: E731
        w = C.strassen_flow(mu1, mu2, rel)
        if C.strassen_check(mu1, mu2, rel) != (w is not None):
            bad += 1
        elif w is not None and not C.is_coupling(w, mu1, mu2, rel):
            bad += 1
    return bad == 0, f"{bad} disagreement(s)"


# ---------------------------------------------------------------- 3


@criterion(3, "equality couplings match distribution equality; >= couplings give tail bounds")
def c3():
    rng = random.Random(7)
    bad = 0
    for k in range(200):
        mu1 = _random_dist(rng, list(range(6)), rng.randint(1, 5))
        mu2 = mu1 if k % 2 == 0 else _random_dist(rng, list(range(6)), rng.randint(1, 5))
        if (C.strassen_flow(mu1, mu2, lambda a, b: a == b) is not None) != (mu1 == mu2):
            bad += 1
    for k in range(200):
        mu2 = _random_dist(rng, list(range(6)), rng.randint(1, 5))
        # half the instances are shifted upwards so that a >= coupling exists
        mu1 = mu2.map(lambda v: v + rng.choice((0, 1, 2))) if k % 2 == 0 else \
            _random_dist(rng, list(range(6)), rng.randint(1, 5))
        if C.strassen_flow(mu1, mu2, lambda a, b: a >= b) is not None:
            top = max(list(mu1) + list(mu2)) + 1
            if any(mu1.mass(lambda v: v >= t) < mu2.mass(lambda v: v >= t) for t in range(top + 1)):
                bad += 1
    return bad == 0, f"{bad} violation(s)"


# ---------------------------------------------------------------- 4


@criterion(4, "coins 1/3 is dominated by coins 2/3 for n <= 5; the reverse fails at n = 1")
def c4():
    for n in range(6):
        lo, hi = dist("coins", "coins (1/3)", n), dist("coins", "coins (2/3)", n)
        step = lambda p: lambda x: O.bind(O.bern(p), lambda b: {x + b: Fraction(1)})  # noqa: E731
        if py_dist(lo) != O.markov_prefix(0, step(Fraction(1, 3)), n):
            return False, f"coins 1/3 differs from the path oracle at n={n}"
        w = C.strassen_flow(lo, hi, _le_pointwise)
        if w is None or not C.is_coupling(w, lo, hi, _le_pointwise):
            return False, f"no coupling at n={n}"
    rev = C.strassen_flow(dist("coins", "coins (2/3)", 1), dist("coins", "coins (1/3)", 1), _le_pointwise)
    return rev is None, "reverse direction at n=1"


# ---------------------------------------------------------------- 5


@criterion(5, "one-time pad with 2-bit keys")
def c5():
    keys = dist("otp", "keys", 0)
    unif = C.uniform(range(4))
    ds = {m: dist("otp", f"otp {m}", 0) for m in range(4)}
    if any(py_dist(d) != O.uniform(range(4)) for d in ds.values()):
        return False, "otp m is not uniform"
    if any(d.map(to_py) != unif for d in ds.values()):
        return False, "otp m differs from the uniform distribution"
    for m1 in range(4):
        for m2 in range(4):
            shifted = C.strassen_flow(keys, keys, lambda k1, k2: (to_py(k1) ^ m1) == (to_py(k2) ^ m2))
            if shifted is None or C.strassen_flow(ds[m1], ds[m2], lambda a, b: a == b) is None:
                return False, f"no equality coupling for messages {m1}, {m2}"
    return True, ""


# ---------------------------------------------------------------- 6


@criterion(6, "even positions of the walk match the lazy walk of step 2 for k <= 3")
def c6():
    step = lambda x: O.uniform([x - 1, x + 1])  # noqa: E731
    lstep = lambda x: O.bind(O.uniform([-1, 1]),  # noqa: E731
                             lambda z: O.bind(O.uniform([0, 1]), lambda b: {x + 2 * z * b: Fraction(1)}))
    for k in range(4):
        evens = C.FiniteDist(py_dist(dist("rwalk-shift", "rwalk", 2 * k))).map(lambda s: s[::2])
        lazy = C.FiniteDist(py_dist(dist("rwalk-shift", "lwalk2", k)))
        if evens != lazy:
            return False, f"k={k}"
        if lazy.as_dict() != O.markov_prefix(0, lstep, k):
            return False, f"lazy walk differs from the path oracle at k={k}"
        if C.FiniteDist(O.pushforward(O.markov_prefix(0, step, 2 * k), lambda s: s[::2])) != evens:
            return False, f"walk differs from the path oracle at k={k}"
        if C.strassen_flow(evens, lazy, lambda a, b: a == b) is None:
            return False, f"no equality coupling at k={k}"
    return True, ""


# ---------------------------------------------------------------- 7


def _flat(v):
    # nested pairs (a, (b, (c, d))) to flat tuples
    out = []
    while isinstance(v, tuple) and len(v) == 2 and isinstance(v[1], tuple):
        out.append(v[0])
        v = v[1]
    return tuple(out) + (tuple(v) if isinstance(v, tuple) else (v,))


@criterion(7, "pr43 pushforward of the 4D walk equals the lazy 3D walk at stage 3")
def c7():
    walk = C.FiniteDist(py_dist(dist("lump-4d-3d", "rwalk4", 3))).map(lambda s: tuple(_flat(x)[:3] for x in s))
    lazy = C.FiniteDist(py_dist(dist("lump-4d-3d", "lwalk3", 3))).map(lambda s: tuple(_flat(x) for x in s))
    step4 = lambda z: O.bind(O.uniform(O.unit_vectors(4)), lambda x: {O.vadd(z, x): Fraction(1)})  # noqa: E731
    lstep3 = lambda z: O.bind(O.uniform(O.unit_vectors(3)),  # noqa: E731
                              lambda x: O.bind(O.bern(Fraction(3, 4)),
                                               lambda b: {O.vadd(z, tuple(b * c for c in x)): Fraction(1)}))
    oracle4 = O.pushforward(O.markov_prefix((0, 0, 0, 0), step4, 3), lambda s: tuple(x[:3] for x in s))
    oracle3 = O.markov_prefix((0, 0, 0), lstep3, 3)
    if walk.as_dict() != oracle4 or lazy.as_dict() != oracle3:
        return False, "evaluator differs from the path oracle"
    return walk == lazy, f"{len(walk)} vs {len(lazy)} support points"


# ---------------------------------------------------------------- 8 and 9

CLOSED_TERMS: Dict[str, Tuple[str, ...]] = {
    "otp": ("keys", "otp 0", "otp 1", "otp 2", "otp 3"),
    "coins": ("coins 0", "coins (1/3)", "coins (2/3)", "coins 1"),
    "rwalk-shift": ("start", "step 0", "lstep2 3", "rwalk", "lwalk2"),
    "lump-4d-3d": ("origin4", "origin3", "pr43 (1, (2, (3, 4)))", "step4 origin4", "lstep3 origin3",
                   "step4 (1, (0, (-1, 0)))", "add4 origin4 (1, (0, (0, 0)))", "scale3 2 (1, (0, -1))"),
    "zipwith": ("ones", "nats", "evens", "from 3", "plus 2 3", "zipWith plus nats ones",
                "zipWith times nats evens"),
    "approx-sqrt": ("newton", "slow", "approx (2/3) 3 5"),
    "cassini": ("fib", "alt", "lhs", "rhs", "(fib <+> alt)", "(fib <.> fib)"),
    "every2": ("ones", "nats", "every2 ones", "every2 nats", "hdhat nats", "tlhat nats"),
}



@criterion(8, "naturality: restrict(eval(t, n+1), n) = eval(t, n) for n <= 5")
def c8():
    count = 0
    for name, srcs in CLOSED_TERMS.items():
        sig = program(name)[1]
        for src in srcs:
            t = term(name, src)
            vals = [evaluate(t, sig, n) for n in range(7)]
            for n in range(6):
                if restrict(vals[n + 1], n + 1, n) != vals[n]:
                    return False, f"{src} at n={n}"
                count += 1
    return True, f"{count} checks"


def _inline(t: A.Term, sig) -> A.Term:
    # unfold every global once so the normaliser has redexes to contract
    return A.subst(t, {g: sig.bodies[g] for g in A.free_vars(t) if g in sig.bodies})


MONAD_LAWS = (
    ("let x <~ return 2 in unif {x, 3}", "unif {2, 3}"),
    ("let x <~ unif {1, 2} in return x", "unif {1, 2}"),
    ("let y <~ (let x <~ unif {1, 2} in unif {x, 5}) in return (y + 1)",
     "let x <~ unif {1, 2} in let y <~ unif {x, 5} in return (y + 1)"),
)
DELAYED_LAWS = (
    ("next [x <- tl nats] 3", "next 3"),
    ("next [x <- next [y <- tl nats] hd y] (x + 1)", "next [y <- tl nats] (hd y + 1)"),
    ("next [x <- tl nats] x", "tl nats"),
    ("next [x <- tl nats, y <- tl ones] (x <+> y)", "next [y <- tl ones, x <- tl nats] (x <+> y)"),
)
ELIM_LAWS = (
    ("prev (next 3)", "3"),
    ("let box x = box nats in hd x", "hd nats"),
    ("let const x = 4 in x + 1", "5"),
    ("hd (2 :: tl nats)", "2"),
    ("tl (2 :: tl nats)", "tl nats"),
)


def _same(u, v, ev) -> bool:
    # boxed values are global sections: compare them section by section
    if isinstance(u, BoxV) and isinstance(v, BoxV):
        return all(_same(ev.section_at(u, j), ev.section_at(v, j), ev) for j in range(7))
    return u == v


def _eval_agrees(a: A.Term, b: A.Term, sig, stages=range(6)) -> bool:
    ev = Evaluator(sig)
    return all(_same(ev.eval(a, ev.env(), n), ev.eval(b, ev.env(), n), ev) for n in stages)


@criterion(9, "normalisation preserves evaluation; directed equational laws")
def c9():
    for name, srcs in CLOSED_TERMS.items():
        sig = program(name)[1]
        for src in srcs:
            t = _inline(term(name, src), sig)
            if not _eval_agrees(t, normalize(t), sig):
                return False, f"normalising {src} changed its value"
    prog, sig = program("zipwith")
    for group, laws in (("monad", MONAD_LAWS), ("delayed", DELAYED_LAWS), ("elimination", ELIM_LAWS)):
        for lhs, rhs in laws:
            a, b = parse_term(lhs, prog), parse_term(rhs, prog)
            if not A.alpha_eq(normalize(a), normalize(b)):
                return False, f"{group} law {lhs} = {rhs} not derived"
            if not _eval_agrees(a, b, sig):
                return False, f"{group} law {lhs} = {rhs} changes the value"
    return True, f"{len(MONAD_LAWS)} monad, {len(DELAYED_LAWS)} delayed, {len(ELIM_LAWS)} elimination laws"


# ---------------------------------------------------------------- 10


@criterion(10, "proof kernel: shipped proofs accepted, mutants rejected, probes hold")
def c10():
    from pglc.typesys import Signature
    for name in PROOFS:
        s = script(CORPUS / f"{name}.pgp")
        rep = check_script(s)
        if not rep.fully_discharged:
            return False, f"{name}: {rep.summary()}"
        sig = Signature.of_program(s.program)
        if not soundness_probe(from_syntax(s.goal), sig, 4):
            return False, f"{name}: soundness probe fails"
    mutants = sorted((CORPUS / "mutants").glob("*.pgp"))
    accepted = [m.name for m in mutants if check_script(script(m)).accepted]
    if len(mutants) < 10 or accepted:
        return False, f"{len(mutants)} mutants, accepted: {accepted}"
    return True, f"{len(PROOFS)} proofs, {len(mutants)} mutants rejected"


# ---------------------------------------------------------------- 11


@criterion(11, "zipWith commutativity, Cassini prefix and the approximation series")
def c11():
    a = stream("zipwith", "zipWith plus nats evens", 6)
    b = stream("zipwith", "zipWith plus evens nats", 6)
    if a != b or len(a) != 7:
        return False, "zipWith plus is not commutative on the prefix"
    lhs = stream("cassini", "lhs", 6, laters=2)
    rhs = stream("cassini", "rhs", 6, laters=1)
    expected = (2, 3, 10, 24, 65, 168, 442)
    if not (lhs == rhs == expected == O.cassini_prefix(6)):
        return False, f"Cassini prefix {lhs} / {rhs}"
    if any(O.fib(k) * O.fib(k + 2) != O.fib(k + 1) ** 2 + (-1) ** k for k in range(7)):
        return False, "Fibonacci oracle"
    f1 = stream("approx-sqrt", "approx (1/2) 2 2", 5)
    f2 = stream("approx-sqrt", "approx (3/4) 2 2", 5)
    if f1 != O.approx_series(Fraction(1, 2), 2, 2, 5) or f2 != O.approx_series(Fraction(3, 4), 2, 2, 5):
        return False, "series differ from the recurrence"
    ok = all(0 <= x <= y and 2 <= x * x for x, y in zip(f1, f2))
    return ok, "approximation invariant"


# ---------------------------------------------------------------- drivers


def run(n: int, title: str, fn) -> bool:
    try:
        ok, detail = fn()
    except Exception as e:  # report, then let pytest show the failure
        ok, detail = False, f"{type(e).__name__}: {e}"
    line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}"
    print(line + (f"  [{detail}]" if detail else ""))
    return ok


@pytest.mark.parametrize("n,title,fn", CRITERIA, ids=[f"c{n:02d}" for n, _, _ in CRITERIA])
def test_criterion(n, title, fn, capsys):
    with capsys.disabled():
        print()
        ok = run(n, title, fn)
    assert ok, title


if __name__ == "__main__":
    results = [run(*c) for c in CRITERIA]
    sys.exit(0 if all(results) else 1)
