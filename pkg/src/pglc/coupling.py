"""Finite discrete distributions, couplings and the Strassen criterion.

All probabilities are :class:`fractions.Fraction`; nothing here uses floats.
Values are arbitrary hashable Python objects.  Ordering of supports is made
deterministic through :func:`canon_key`.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Any, Callable, Dict, Hashable, Iterable, Iterator, Optional, Tuple, Union

Relation = Union[Callable[[Any, Any], bool], Iterable[Tuple[Any, Any]]]

#: support-size ceiling for the brute-force subset enumeration
BRUTE_FORCE_LIMIT = 20


def canon_key(v: Any) -> tuple:
    """Total, deterministic ordering key for values that may appear in a support."""
    if v is None:
        return (0,)
    if isinstance(v, bool):
        return (1, int(v))
    if isinstance(v, (int, Fraction)):
        return (1, v)
    if isinstance(v, str):
        return (2, v)
    if isinstance(v, tuple):
        return (3, tuple(canon_key(x) for x in v))
    sk = getattr(v, "sort_key", None)
    if sk is not None:
        return (4, sk())
    return (5, repr(v))


def _frac(p: Any) -> Fraction:
    q = Fraction(p)
    if q < 0:
        raise ValueError(f"negative probability {q}")
    return q


@dataclass(frozen=True)
class FiniteDist:
    """An immutable finitely supported (sub-)distribution.

    Zero-mass entries are dropped and equal values are merged, so two
    distributions compare equal exactly when they assign the same mass to
    every value.
    """

    entries: Tuple[Tuple[Hashable, Fraction], ...]

    def __init__(self, masses: Union[Dict[Hashable, Any], Iterable[Tuple[Hashable, Any]]] = ()):
        acc: Dict[Hashable, Fraction] = {}
        items = masses.items() if isinstance(masses, dict) else masses
        for v, p in items:
            q = _frac(p)
            if q:
                acc[v] = acc.get(v, Fraction(0)) + q
        ordered = tuple(sorted(acc.items(), key=lambda kv: canon_key(kv[0])))
        object.__setattr__(self, "entries", ordered)

    # mapping-like access
    def __iter__(self) -> Iterator[Hashable]:
        return (v for v, _ in self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def items(self) -> Tuple[Tuple[Hashable, Fraction], ...]:
        return self.entries

    def support(self) -> Tuple[Hashable, ...]:
        return tuple(v for v, _ in self.entries)

    def prob(self, v: Hashable) -> Fraction:
        for w, p in self.entries:
            if w == v:
                return p
        return Fraction(0)

    def as_dict(self) -> Dict[Hashable, Fraction]:
        return dict(self.entries)

    def total(self) -> Fraction:
        return sum((p for _, p in self.entries), Fraction(0))

    def mass(self, pred: Callable[[Any], bool]) -> Fraction:
        return sum((p for v, p in self.entries if pred(v)), Fraction(0))

    def map(self, f: Callable[[Any], Hashable]) -> "FiniteDist":
        return FiniteDist((f(v), p) for v, p in self.entries)

    def bind(self, k: Callable[[Any], "FiniteDist"]) -> "FiniteDist":
        return bind_dist(self, k)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FiniteDist):
            return NotImplemented
        return self.as_dict() == other.as_dict()

    def __hash__(self) -> int:
        return hash(frozenset(self.entries))

    def sort_key(self) -> tuple:
        return tuple((canon_key(v), p) for v, p in self.entries)

    def __repr__(self) -> str:
        body = ", ".join(f"{v!r}: {p}" for v, p in self.entries)
        return "FiniteDist({" + body + "})"


def unit_dist(v: Hashable) -> FiniteDist:
    return FiniteDist({v: 1})


def bind_dist(mu: FiniteDist, k: Callable[[Any], FiniteDist]) -> FiniteDist:
    out: Dict[Hashable, Fraction] = {}
    for v, p in mu.items():
        for w, q in k(v).items():
            out[w] = out.get(w, Fraction(0)) + p * q
    return FiniteDist(out)


def uniform(values: Iterable[Hashable]) -> FiniteDist:
    vs = list(values)
    if not vs:
        raise ValueError("uniform over an empty set")
    w = Fraction(1, len(vs))
    return FiniteDist((v, w) for v in vs)


def bernoulli(p: Any) -> FiniteDist:
    q = _frac(p)
    if q > 1:
        raise ValueError(f"bernoulli parameter {q} exceeds 1")
    return FiniteDist({1: q, 0: 1 - q})


def product(mu1: FiniteDist, mu2: FiniteDist) -> FiniteDist:
    return FiniteDist(((a, b), p * q) for a, p in mu1.items() for b, q in mu2.items())


def convex_combine(weighted: Iterable[Tuple[Any, FiniteDist]]) -> FiniteDist:
    """Mix distributions with the given weights (weights must sum to 1)."""
    pairs = [(_frac(w), d) for w, d in weighted]
    if sum((w for w, _ in pairs), Fraction(0)) != 1:
        raise ValueError("convex weights must sum to 1")
    out: Dict[Hashable, Fraction] = {}
    for w, d in pairs:
        for v, p in d.items():
            out[v] = out.get(v, Fraction(0)) + w * p
    return FiniteDist(out)


def marginal1(mu: FiniteDist) -> FiniteDist:
    return mu.map(lambda ab: ab[0])


def marginal2(mu: FiniteDist) -> FiniteDist:
    return mu.map(lambda ab: ab[1])


def as_predicate(rel: Relation) -> Callable[[Any, Any], bool]:
    if callable(rel):
        return rel
    pairs = set(rel)
    return lambda a, b: (a, b) in pairs


def is_coupling(mu: FiniteDist, mu1: FiniteDist, mu2: FiniteDist, rel: Relation) -> bool:
    """Marginals are ``mu1`` and ``mu2`` and the support lies inside ``rel``."""
    r = as_predicate(rel)
    for v in mu.support():
        if not (isinstance(v, tuple) and len(v) == 2):
            return False
        if not r(v[0], v[1]):
            return False
    return marginal1(mu) == mu1 and marginal2(mu) == mu2


def strassen_check(mu1: FiniteDist, mu2: FiniteDist, rel: Relation,
                   limit: int = BRUTE_FORCE_LIMIT) -> bool:
    """Decide coupling existence by enumerating every subset of ``supp(mu1)``.

    Exponential; refuses supports larger than ``limit``.
    """
    if mu1.total() != mu2.total():
        return False
    s1 = mu1.support()
    if len(s1) > limit:
        raise ValueError(f"support of size {len(s1)} exceeds brute-force limit {limit}")
    r = as_predicate(rel)
    image = {a: frozenset(b for b in mu2.support() if r(a, b)) for a in s1}
    p2 = mu2.as_dict()
    p1 = mu1.as_dict()
    for k in range(1, len(s1) + 1):
        for xs in combinations(s1, k):
            left = sum((p1[a] for a in xs), Fraction(0))
            img = frozenset().union(*(image[a] for a in xs))
            right = sum((p2[b] for b in img), Fraction(0))
            if left > right:
                return False
    return True


# Infinite middle capacity; any value above the total mass of 1 will do.
_INF = Fraction(2)


def strassen_flow(mu1: FiniteDist, mu2: FiniteDist, rel: Relation) -> Optional[FiniteDist]:
    """Max-flow (Edmonds-Karp, exact) construction of an ``rel``-coupling.

    Returns the witness joint distribution, or ``None`` when none exists.
    """
    if mu1.total() != mu2.total():
        return None
    r = as_predicate(rel)
    left = list(mu1.items())
    right = list(mu2.items())
    n1, n2 = len(left), len(right)
    src, snk = 0, n1 + n2 + 1
    # residual graph as adjacency of dicts
    cap: list[Dict[int, Fraction]] = [dict() for _ in range(n1 + n2 + 2)]

    def add(u: int, v: int, c: Fraction) -> None:
        cap[u][v] = cap[u].get(v, Fraction(0)) + c
        cap[v].setdefault(u, Fraction(0))

    for i, (_, p) in enumerate(left):
        add(src, 1 + i, p)
    for j, (_, q) in enumerate(right):
        add(1 + n1 + j, snk, q)
    for i, (a, _) in enumerate(left):
        for j, (b, _) in enumerate(right):
            if r(a, b):
                add(1 + i, 1 + n1 + j, _INF)

    flow = Fraction(0)
    while True:
        parent = {src: src}
        queue = deque([src])
        while queue and snk not in parent:
            u = queue.popleft()
            for v, c in cap[u].items():
                if c > 0 and v not in parent:
                    parent[v] = u
                    queue.append(v)
        if snk not in parent:
            break
        bottleneck = _INF
        v = snk
        while v != src:
            u = parent[v]
            bottleneck = min(bottleneck, cap[u][v])
            v = u
        v = snk
        while v != src:
            u = parent[v]
            cap[u][v] -= bottleneck
            cap[v][u] += bottleneck
            v = u
        flow += bottleneck

    if flow != mu1.total():
        return None
    joint: Dict[Tuple[Any, Any], Fraction] = {}
    for i, (a, _) in enumerate(left):
        for j, (b, _) in enumerate(right):
            if r(a, b):
                sent = _INF - cap[1 + i][1 + n1 + j]
                if sent > 0:
                    joint[(a, b)] = sent
    return FiniteDist(joint)


def lift_check_rel(mu1: FiniteDist, mu2: FiniteDist, rel: Relation) -> bool:
    """Relational lifting: does an ``rel``-coupling of ``mu1`` and ``mu2`` exist?"""
    return strassen_flow(mu1, mu2, rel) is not None


def lift_check_un(mu: FiniteDist, pred: Callable[[Any], bool]) -> bool:
    """Unary lifting: every support point satisfies ``pred`` (probability one)."""
    return all(pred(v) for v in mu.support())


def compose_relations(r: Relation, s: Relation, middle: Iterable[Any]) -> Callable[[Any, Any], bool]:
    """Relational composition over an explicit finite middle carrier."""
    rp, sp = as_predicate(r), as_predicate(s)
    mids = list(middle)
    return lambda a, c: any(rp(a, b) and sp(b, c) for b in mids)
