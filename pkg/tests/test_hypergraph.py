import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from tightham.errors import UnsupportedUniformity, VertexOutOfRange, WrongArity
from tightham.hypergraph import (Hypergraph, complete, cyclic_windows, dumps_edgelist, loads_edgelist,
                                 one_density, reverse, tight_cycle, windows)


def test_add_edge_is_canonical():
    h = Hypergraph(5, 3)
    assert h.add_edge([4, 0, 2]) == (0, 2, 4)
    assert h.has_edge((2, 4, 0))
    assert h.num_edges() == 1
    h.add_edge((0, 4, 2))
    assert h.num_edges() == 1


def test_bad_edges_rejected():
    h = Hypergraph(5, 3)
    with pytest.raises(WrongArity):
        h.add_edge((0, 1))
    with pytest.raises(WrongArity):
        h.add_edge((0, 1, 1))
    with pytest.raises(VertexOutOfRange):
        h.add_edge((0, 1, 5))
    with pytest.raises(UnsupportedUniformity):
        Hypergraph(5, 2)


def test_completions_on_c6():
    c6 = tight_cycle(6, 3)
    assert c6.num_edges() == 6
    assert c6.completions((1, 2)) == {0, 3}
    assert c6.completions((2, 1)) == {0, 3}
    assert c6.completions((0, 3)) == set()
    assert all(c6.degree(v) == 3 for v in range(6))


def test_one_density_examples():
    assert one_density(tight_cycle(6, 3)) == Fraction(6, 5)
    assert one_density(Hypergraph(3, 3, [(0, 1, 2)])) == Fraction(1, 2)
    assert one_density(Hypergraph(1, 3)) == 0
    assert one_density(complete(5, 3)) == Fraction(10, 4)


def test_isolated_vertices_count():
    h = Hypergraph(10, 3, [(0, 1, 2)])
    assert h.num_vertices() == 10
    assert one_density(h) == Fraction(1, 9)
    assert h.induced([0, 1, 2, 3]).num_edges() == 1
    assert h.induced([0, 1, 3]).num_edges() == 0


def test_windows():
    assert list(windows([0, 1, 2, 3], 3)) == [(0, 1, 2), (1, 2, 3)]
    assert len(list(cyclic_windows([0, 1, 2, 3], 3))) == 4
    assert reverse((1, 2, 3)) == (3, 2, 1)


def test_edgelist_round_trip():
    h = tight_cycle(7, 3)
    g = loads_edgelist(dumps_edgelist(h))
    assert g.edges == h.edges and g.n == h.n and g.r == h.r
    assert dumps_edgelist(g) == dumps_edgelist(h)


@st.composite
def hypergraphs(draw, max_n=8):
    n = draw(st.integers(3, max_n))
    allr = list(itertools.combinations(range(n), 3))
    picks = draw(st.lists(st.sampled_from(allr), max_size=20))
    return Hypergraph(n, 3, picks)


@settings(max_examples=60, deadline=None)
@given(hypergraphs(), st.randoms(use_true_random=False))
def test_relabelling_preserves_counts(h, rnd):
    perm = list(range(h.n))
    rnd.shuffle(perm)
    g = Hypergraph(h.n, 3, [[perm[x] for x in e] for e in h.edges])
    assert g.num_edges() == h.num_edges()
    assert one_density(g) == one_density(h)
    assert sorted(g.degrees().values()) == sorted(h.degrees().values())


@settings(max_examples=60, deadline=None)
@given(hypergraphs())
def test_completion_index_matches_edges(h):
    for s in itertools.combinations(range(h.n), 2):
        want = {x for x in range(h.n) if x not in s and h.has_edge(s + (x,))}
        assert h.completions(s) == want
