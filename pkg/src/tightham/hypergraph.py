"""Uniform hypergraphs, vertex tuples and the 1-density functional.

Vertices are dense 0-based integers. Edges are stored as ascending tuples,
while paths and tuples keep their order.
"""
from __future__ import annotations

import io
import itertools
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import InvalidInput, UnsupportedUniformity, VertexOutOfRange, WrongArity

Edge = tuple[int, ...]


def canonical(vertices: Iterable[int]) -> Edge:
    return tuple(sorted(vertices))


def reverse(t: Sequence[int]) -> tuple[int, ...]:
    return tuple(reversed(tuple(t)))


def windows(seq: Sequence[int], r: int) -> Iterator[Edge]:
    """Canonical r-windows of ``seq`` read as a path."""
    for i in range(len(seq) - r + 1):
        yield canonical(seq[i:i + r])


def cyclic_windows(seq: Sequence[int], r: int) -> Iterator[Edge]:
    m = len(seq)
    if m < r:
        return
    ext = list(seq) + list(seq[: r - 1])
    for i in range(m):
        yield canonical(ext[i:i + r])


class Hypergraph:
    """An r-uniform hypergraph on a declared vertex set.

    ``n`` bounds the labels; ``vertices`` is the declared vertex set (all of
    ``range(n)`` unless given), so isolated vertices count towards v(H).
    The completion index maps every (r-1)-subset of an edge to the set of
    vertices completing it.
    """

    def __init__(self, n: int, r: int, edges: Iterable[Iterable[int]] = (),
                 vertices: Iterable[int] | None = None):
        if r < 3:
            raise UnsupportedUniformity(f"uniformity r={r} is not supported (need r >= 3)")
        if n < 0:
            raise InvalidInput("n must be non-negative")
        self.n = int(n)
        self.r = int(r)
        if vertices is None:
            self._vertices: frozenset[int] | None = None
        else:
            vs = frozenset(int(v) for v in vertices)
            for v in vs:
                self._check_vertex(v)
            self._vertices = vs
        self._edges: set[Edge] = set()
        self._completion: dict[Edge, set[int]] | None = None
        self._sorted: list[Edge] | None = None
        for e in edges:
            self.add_edge(e)

    @classmethod
    def _trusted(cls, n: int, r: int, edges: set[Edge], vertices: frozenset[int] | None = None) -> "Hypergraph":
        """Wrap a set of canonical, in-range edges without re-validating them."""
        h = cls(n, r)
        h._vertices = vertices
        h._edges = edges
        return h

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise VertexOutOfRange(f"vertex {v} outside [0, {self.n})")

    # construction -------------------------------------------------------
    def add_edge(self, e: Iterable[int]) -> Edge:
        ce = canonical(int(v) for v in e)
        if len(ce) != self.r or len(set(ce)) != self.r:
            raise WrongArity(f"edge {ce} does not have {self.r} distinct vertices")
        for v in ce:
            self._check_vertex(v)
            if self._vertices is not None and v not in self._vertices:
                raise VertexOutOfRange(f"vertex {v} is not declared in this hypergraph")
        if ce in self._edges:
            return ce
        self._edges.add(ce)
        self._sorted = None
        if self._completion is not None:
            self._index_edge(ce)
        return ce

    def _index_edge(self, ce: Edge) -> None:
        for i in range(self.r):
            key = ce[:i] + ce[i + 1:]
            self._completion.setdefault(key, set()).add(ce[i])

    def _index(self) -> dict[Edge, set[int]]:
        if self._completion is None:
            self._completion = {}
            for ce in self._edges:
                self._index_edge(ce)
        return self._completion

    def add_edges(self, edges: Iterable[Iterable[int]]) -> None:
        for e in edges:
            self.add_edge(e)

    def copy(self) -> "Hypergraph":
        h = Hypergraph(self.n, self.r, vertices=self._vertices)
        h._edges = set(self._edges)
        return h

    # queries --------------------------------------------------------------
    @property
    def vertices(self) -> frozenset[int]:
        if self._vertices is None:
            return frozenset(range(self.n))
        return self._vertices

    @property
    def edges(self) -> frozenset[Edge]:
        return frozenset(self._edges)

    def sorted_edges(self) -> list[Edge]:
        if self._sorted is None:
            self._sorted = sorted(self._edges)
        return list(self._sorted)

    def num_vertices(self) -> int:
        return self.n if self._vertices is None else len(self._vertices)

    def num_edges(self) -> int:
        return len(self._edges)

    def __len__(self) -> int:
        return len(self._edges)

    def __contains__(self, e) -> bool:
        return self.has_edge(e)

    def __iter__(self) -> Iterator[Edge]:
        return iter(sorted(self._edges))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Hypergraph):
            return NotImplemented
        return (self.r == other.r and self.vertices == other.vertices
                and self._edges == other._edges)

    def __repr__(self) -> str:
        return f"Hypergraph(n={self.n}, r={self.r}, v={self.num_vertices()}, e={len(self._edges)})"

    def has_edge(self, e: Iterable[int]) -> bool:
        return canonical(e) in self._edges

    def completions(self, s: Iterable[int]) -> frozenset[int]:
        key = canonical(s)
        if len(key) != self.r - 1:
            raise WrongArity(f"expected an ({self.r - 1})-set, got {key}")
        return frozenset(self._index().get(key, ()))

    def degree(self, v: int) -> int:
        return sum(1 for e in self._edges if v in e)

    def degrees(self) -> dict[int, int]:
        deg = dict.fromkeys(self.vertices, 0)
        for e in self._edges:
            for v in e:
                deg[v] += 1
        return deg

    def induced(self, w: Iterable[int]) -> "Hypergraph":
        ws = frozenset(w)
        for v in ws:
            self._check_vertex(v)
        h = Hypergraph(self.n, self.r, vertices=ws)
        for e in self._edges:
            if ws.issuperset(e):
                h.add_edge(e)
        return h

    def remove_vertices(self, xs: Iterable[int]) -> "Hypergraph":
        return self.induced(self.vertices - frozenset(xs))

    def union(self, other: "Hypergraph") -> "Hypergraph":
        h = self.copy()
        h.add_edges(other._edges)
        return h


def induced_subhypergraph(g: Hypergraph, w: Iterable[int]) -> Hypergraph:
    return g.induced(w)


def one_density(h: Hypergraph) -> Fraction:
    """e(H)/(v(H)-1), and 0 when H has at most one vertex."""
    v = h.num_vertices()
    if v <= 1:
        return Fraction(0)
    return Fraction(h.num_edges(), v - 1)


def tight_cycle(ell: int, r: int, labels: Sequence[int] | None = None,
                n: int | None = None) -> Hypergraph:
    """The r-uniform tight cycle on ``ell`` vertices."""
    if ell < r + 1:
        raise InvalidInput("a tight cycle needs more than r vertices")
    seq = list(range(ell)) if labels is None else list(labels)
    bound = n if n is not None else max(seq) + 1
    declared = None if labels is None and bound == ell else seq
    h = Hypergraph(bound, r, vertices=declared)
    h.add_edges(cyclic_windows(seq, r))
    return h


def complete(n: int, r: int) -> Hypergraph:
    return Hypergraph(n, r, itertools.combinations(range(n), r))


# edge-list text format ----------------------------------------------------

def dumps_edgelist(h: Hypergraph) -> str:
    out = io.StringIO()
    out.write(f"{h.r} {h.n} {h.num_edges()}\n")
    for e in h.sorted_edges():
        out.write(" ".join(map(str, e)) + "\n")
    return out.getvalue()


def write_edgelist(h: Hypergraph, path) -> None:
    Path(path).write_text(dumps_edgelist(h))


def loads_edgelist(text: str) -> Hypergraph:
    rows = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            rows.append(line.split())
    if not rows:
        raise InvalidInput("empty edge-list")
    try:
        header = [int(x) for x in rows[0]]
        body = [[int(x) for x in row] for row in rows[1:]]
    except ValueError as exc:
        raise InvalidInput(f"malformed edge-list: {exc}") from None
    if len(header) != 3:
        raise InvalidInput("edge-list header must be 'r n m'")
    r, n, m = header
    if len(body) != m:
        raise InvalidInput(f"header announces {m} edges, found {len(body)}")
    h = Hypergraph(n, r)
    for row in body:
        if len(row) != r:
            raise WrongArity(f"edge line {row} does not have {r} entries")
        h.add_edge(row)
    return h


def read_edgelist(path) -> Hypergraph:
    return loads_edgelist(Path(path).read_text())
