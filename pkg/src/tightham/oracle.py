"""Brute-force verifiers and small-instance oracles.

Nothing here shares code paths with the constructive algorithms; the
functions only depend on the hypergraph container.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import networkx as nx
import numpy as np

from .errors import TooLarge
from .hypergraph import Hypergraph, canonical, one_density


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    first_violation: str | None = None
    index: int | None = None

    def __bool__(self) -> bool:
        return self.accepted


def _edge_test(g) -> Callable[[tuple], bool]:
    if isinstance(g, Hypergraph):
        return g.has_edge
    if callable(g):
        return lambda e: bool(g(canonical(e)))
    edges = {canonical(e) for e in g}
    return lambda e: canonical(e) in edges


def verify_tight_path(g, seq: Sequence[int], r: int | None = None) -> Verdict:
    """Accept iff ``seq`` has distinct vertices and each r-window is an edge of ``g``.

    ``g`` may be a Hypergraph, an iterable of edges or a predicate on
    canonical r-sets; in the latter two cases ``r`` is required.
    """
    r = g.r if isinstance(g, Hypergraph) else r
    if r is None:
        raise ValueError("r is required when g is not a Hypergraph")
    seq = list(seq)
    seen: set[int] = set()
    for i, v in enumerate(seq):
        if v in seen:
            return Verdict(False, f"duplicate vertex {v} at position {i}", i)
        seen.add(v)
    has = _edge_test(g)
    for i in range(len(seq) - r + 1):
        w = seq[i:i + r]
        if not has(w):
            return Verdict(False, f"window {i} {tuple(w)} is not an edge", i)
    return Verdict(True)


def verify_tight_cycle(g, seq: Sequence[int], r: int | None = None,
                       vertices: Iterable[int] | None = None) -> Verdict:
    """Accept iff ``seq`` covers the vertex set once and all cyclic windows are edges."""
    r = g.r if isinstance(g, Hypergraph) else r
    if r is None:
        raise ValueError("r is required when g is not a Hypergraph")
    if vertices is None:
        if not isinstance(g, Hypergraph):
            raise ValueError("vertices are required when g is not a Hypergraph")
        vertices = g.vertices
    target = set(vertices)
    seq = list(seq)
    if len(seq) != len(set(seq)):
        dup = next(v for v in seq if seq.count(v) > 1)
        return Verdict(False, f"duplicate vertex {dup}", seq.index(dup))
    if set(seq) != target:
        missing = sorted(target - set(seq))[:5]
        extra = sorted(set(seq) - target)[:5]
        return Verdict(False, f"coverage mismatch: missing {missing} extra {extra}")
    if len(seq) <= r:
        return Verdict(False, f"a tight cycle needs more than {r} vertices")
    has = _edge_test(g)
    ext = seq + seq[: r - 1]
    for i in range(len(seq)):
        w = ext[i:i + r]
        if not has(w):
            return Verdict(False, f"window {i} {tuple(w)} is not an edge", i)
    return Verdict(True)


def brute_m1(h: Hypergraph, max_vertices: int = 24) -> tuple[Fraction, frozenset[int]]:
    """Exact maximum 1-density over induced subgraphs, with a maximising vertex set."""
    vs = sorted(h.vertices)
    v = len(vs)
    if v > max_vertices:
        raise TooLarge(f"brute_m1 is capped at {max_vertices} vertices, got {v}")
    if v <= 1:
        return Fraction(0), frozenset(vs)
    pos = {x: i for i, x in enumerate(vs)}
    masks = np.arange(1 << v, dtype=np.uint32)
    counts = np.zeros(1 << v, dtype=np.int32)
    for e in h.edges:
        em = np.uint32(sum(1 << pos[x] for x in e))
        counts += (masks & em) == em
    sizes = np.bitwise_count(masks)
    best, witness = Fraction(0), frozenset(vs[:1])
    for k in range(2, v + 1):
        sel = np.flatnonzero(sizes == k)
        i = sel[np.argmax(counts[sel])]
        d = Fraction(int(counts[i]), k - 1)
        if d > best or (d == best and k > len(witness)):
            best = d
            witness = frozenset(vs[j] for j in range(v) if int(i) >> j & 1)
    return best, witness


def is_one_degenerate(h: Hypergraph) -> bool:
    """True iff repeatedly deleting vertices of degree <= 1 empties ``h``."""
    alive_edges = set(h.edges)
    incident: dict[int, set] = {x: set() for x in h.vertices}
    for e in alive_edges:
        for x in e:
            incident[x].add(e)
    stack = [x for x, es in incident.items() if len(es) <= 1]
    removed: set[int] = set()
    while stack:
        x = stack.pop()
        if x in removed or len(incident[x]) > 1:
            continue
        removed.add(x)
        for e in list(incident[x]):
            alive_edges.discard(e)
            for y in e:
                if y != x:
                    incident[y].discard(e)
                    if y not in removed and len(incident[y]) <= 1:
                        stack.append(y)
        incident[x].clear()
    return len(removed) == len(incident)


def dp_has_tight_hamilton_cycle(g: Hypergraph, max_n: int = 16) -> tuple[bool, list[int] | None]:
    """Exact existence of a tight Hamilton cycle, with one witness.

    Search over (visited set, ordered last (r-1)-tuple) with the smallest
    vertex anchored at position 0, memoising dead states per start prefix.
    """
    vs = sorted(g.vertices)
    n, r = len(vs), g.r
    if n > max_n:
        raise TooLarge(f"exact cycle search is capped at n={max_n}")
    if n <= r:
        return False, None
    idx = {x: i for i, x in enumerate(vs)}
    full = (1 << n) - 1
    comp: dict[tuple, list[int]] = {}

    def completions(t: tuple[int, ...]) -> list[int]:
        key = canonical(t)
        if key not in comp:
            comp[key] = sorted(g._index().get(key, ()))
        return comp[key]

    anchor = vs[0]
    for rest in itertools.permutations(vs[1:], r - 2):
        prefix = (anchor,) + rest
        mask0 = 0
        for x in prefix:
            mask0 |= 1 << idx[x]
        dead: set[tuple[int, tuple]] = set()
        seq = list(prefix)

        def closes() -> bool:
            ext = seq[-(r - 1):] + seq[: r - 1]
            return all(g.has_edge(ext[i:i + r]) for i in range(r - 1))

        def dfs(mask: int) -> bool:
            tail = tuple(seq[-(r - 1):])
            if mask == full:
                return closes()
            state = (mask, tail)
            if state in dead:
                return False
            for c in completions(tail):
                bit = 1 << idx[c]
                if mask & bit:
                    continue
                seq.append(c)
                if dfs(mask | bit):
                    return True
                seq.pop()
            dead.add(state)
            return False

        if dfs(mask0):
            return True, list(seq)
    return False, None


def brute_connect_exists(g: Hypergraph, u: Sequence[int], v: Sequence[int],
                         x: Iterable[int], max_len: int,
                         max_x: int = 20) -> tuple[bool, list[int] | None]:
    """Exact existence of a tight u-v path with interior in ``x`` and at most ``max_len`` vertices."""
    r = g.r
    u, v = list(u), list(v)
    xs = sorted(set(x) - set(u) - set(v))
    if len(xs) > max_x:
        raise TooLarge(f"|X| is capped at {max_x}")
    seq = list(u)
    used = set(u) | set(v)

    def finishes() -> bool:
        tail = seq[-(r - 1):]
        ext = tail + v
        return all(g.has_edge(ext[i:i + r]) for i in range(r - 1))

    def dfs() -> bool:
        if len(seq) + len(v) > max_len:
            return False
        if finishes():
            return True
        for c in xs:
            if c in used or not g.has_edge(seq[-(r - 1):] + [c]):
                continue
            seq.append(c)
            used.add(c)
            if dfs():
                return True
            seq.pop()
            used.discard(c)
        return False

    if dfs():
        return True, seq + v
    return False, None


def _max_excess(h: Hypergraph, lam: Fraction, forced: int) -> tuple[Fraction, frozenset[int]]:
    """max over W containing ``forced`` of e(W) - lam*(|W|-1), by a min cut."""
    p, q = lam.numerator, lam.denominator
    g = nx.DiGraph()
    src, sink = ("s",), ("t",)
    for e in h.edges:
        g.add_edge(src, e, capacity=q)
        for x in e:
            g.add_edge(e, x)
    for x in h.vertices:
        cap = p if x != forced else 0
        g.add_edge(x, sink, capacity=cap)
    g.add_edge(src, forced)
    _, (side, _) = nx.minimum_cut(g, src, sink)
    w = frozenset(x for x in side if isinstance(x, int))
    e_w = sum(1 for e in h.edges if w.issuperset(e))
    return Fraction(e_w) - lam * (len(w) - 1), w


def flow_m1(h: Hypergraph) -> tuple[Fraction, frozenset[int]]:
    """Exact maximum 1-density by parametric min cuts (Dinkelbach iteration)."""
    vs = sorted(h.vertices)
    if len(vs) <= 1:
        return Fraction(0), frozenset(vs)
    lam = one_density(h)
    best_w = frozenset(vs)
    while True:
        improved = False
        for x in vs:
            gain, w = _max_excess(h, lam, x)
            if gain > 0 and len(w) > 1:
                e_w = sum(1 for e in h.edges if w.issuperset(e))
                lam, best_w, improved = Fraction(e_w, len(w) - 1), w, True
        if not improved:
            return lam, best_w
