"""Brute-force reference computations written without the package.

Distributions are plain ``dict`` objects from values to ``Fraction``.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Callable, Dict, Hashable, Iterable, Tuple

Dist = Dict[Hashable, Fraction]


def uniform(vals: Iterable[Hashable]) -> Dist:
    vals = list(vals)
    out: Dist = {}
    for v in vals:
        out[v] = out.get(v, Fraction(0)) + Fraction(1, len(vals))
    return out


def bern(p) -> Dist:
    p = Fraction(p)
    return {v: q for v, q in ((1, p), (0, 1 - p)) if q}


def bind(mu: Dist, k: Callable[[Hashable], Dist]) -> Dist:
    out: Dist = {}
    for a, p in mu.items():
        for b, q in k(a).items():
            out[b] = out.get(b, Fraction(0)) + p * q
    return out


def markov_prefix(x0, step: Callable[[Hashable], Dist], n: int) -> Dist:
    """Distribution of (x0, ..., xn) by enumerating every path."""
    paths: Dist = {(x0,): Fraction(1)}
    for _ in range(n):
        paths = bind(paths, lambda path: {path + (y,): q for y, q in step(path[-1]).items()})
    return paths


def pushforward(mu: Dist, f) -> Dist:
    return bind(mu, lambda v: {f(v): Fraction(1)})


def coupling_exists_dual(mu1: Dist, mu2: Dist, rel) -> bool:
    """Hall-type test over subsets of the right support: mu2(Y) <= mu1(R^-1 Y)."""
    if sum(mu1.values()) != sum(mu2.values()):
        return False
    right = list(mu2)
    for k in range(1, len(right) + 1):
        for ys in combinations(right, k):
            pre = sum((p for a, p in mu1.items() if any(rel(a, b) for b in ys)), Fraction(0))
            if sum(mu2[b] for b in ys) > pre:
                return False
    return True


def fib(n: int) -> int:
    a, b = 1, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def cassini_prefix(n: int) -> Tuple[int, ...]:
    """F(k) * F(k+2) for k = 0..n with F(0) = F(1) = 1."""
    return tuple(fib(k) * fib(k + 2) for k in range(n + 1))


def approx_series(p, a, x0, n: int) -> Tuple[Fraction, ...]:
    p, a, x = Fraction(p), Fraction(a), Fraction(x0)
    out = [x]
    for _ in range(n):
        x = p * x + (1 - p) * a / x
        out.append(x)
    return tuple(out)


def unit_vectors(dim: int):
    out = []
    for i in range(dim):
        for s in (1, -1):
            out.append(tuple(s if j == i else 0 for j in range(dim)))
    return out


def vadd(u, v):
    return tuple(a + b for a, b in zip(u, v))
