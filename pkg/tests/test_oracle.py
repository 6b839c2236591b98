import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tightham.hypergraph import Hypergraph, complete, one_density, tight_cycle
from tightham.oracle import (brute_connect_exists, brute_m1, dp_has_tight_hamilton_cycle, flow_m1,
                             is_one_degenerate, verify_tight_cycle, verify_tight_path)


def test_verify_path_examples():
    c6 = tight_cycle(6, 3)
    assert verify_tight_path(c6, [0, 1, 2, 3, 4])
    v = verify_tight_path(c6, [0, 1, 3])
    assert not v and v.index == 0
    assert not verify_tight_path(c6, [0, 1, 2, 1])
    assert verify_tight_path([(0, 1, 2)], [2, 1, 0], r=3)
    assert verify_tight_path(lambda e: e == (0, 1, 2), [1, 0, 2], r=3)


def test_verify_cycle_examples():
    c6 = tight_cycle(6, 3)
    assert verify_tight_cycle(c6, [0, 1, 2, 3, 4, 5])
    assert verify_tight_cycle(c6, [3, 2, 1, 0, 5, 4])
    assert not verify_tight_cycle(c6, [0, 1, 2, 3, 5, 4])
    assert not verify_tight_cycle(c6, [0, 1, 2, 3, 4])
    assert verify_tight_cycle(c6, [0, 1, 2, 3, 4], vertices=range(5)).accepted is False


def test_brute_m1_examples():
    assert brute_m1(Hypergraph(3, 3, [(0, 1, 2)]))[0] == Fraction(1, 2)
    assert brute_m1(tight_cycle(5, 3))[0] == Fraction(5, 4)
    m, w = brute_m1(Hypergraph(10, 3, [(0, 1, 2)] + list(tight_cycle(6, 3, labels=range(4, 10)).edges)))
    assert m == Fraction(6, 5) and w == frozenset(range(4, 10))


def test_dp_examples():
    c6 = tight_cycle(6, 3)
    ok, cyc = dp_has_tight_hamilton_cycle(c6)
    assert ok and verify_tight_cycle(c6, cyc)
    for e in sorted(c6.edges):
        h = Hypergraph(6, 3, c6.edges - {e})
        assert dp_has_tight_hamilton_cycle(h) == (False, None)
    assert dp_has_tight_hamilton_cycle(complete(7, 3))[0]
    assert not dp_has_tight_hamilton_cycle(Hypergraph(7, 3))[0]


def test_one_degenerate():
    assert is_one_degenerate(Hypergraph(5, 3, [(0, 1, 2), (2, 3, 4)]))
    assert not is_one_degenerate(tight_cycle(6, 3))
    assert is_one_degenerate(Hypergraph(4, 3))


def test_brute_connect_exists():
    c8 = tight_cycle(8, 3)
    ok, path = brute_connect_exists(c8, (0, 1), (4, 5), range(8), 6)
    assert ok and path == [0, 1, 2, 3, 4, 5]
    assert not brute_connect_exists(c8, (0, 1), (4, 5), range(8), 5)[0]
    assert not brute_connect_exists(c8, (0, 1), (4, 5), [2], 6)[0]
    assert not brute_connect_exists(c8, (1, 0), (4, 5), range(8), 8)[0]


@st.composite
def small_graphs(draw, lo=4, hi=8):
    n = draw(st.integers(lo, hi))
    allr = list(itertools.combinations(range(n), 3))
    mask = draw(st.lists(st.booleans(), min_size=len(allr), max_size=len(allr)))
    return Hypergraph(n, 3, [e for e, b in zip(allr, mask) if b])


def _m1_by_loop(h):
    best = Fraction(0)
    vs = sorted(h.vertices)
    for k in range(2, len(vs) + 1):
        for w in itertools.combinations(vs, k):
            best = max(best, one_density(h.induced(w)))
    return best


@settings(max_examples=40, deadline=None)
@given(small_graphs(hi=7))
def test_brute_m1_matches_loop(h):
    assert brute_m1(h)[0] == _m1_by_loop(h)


@settings(max_examples=40, deadline=None)
@given(small_graphs(hi=9))
def test_flow_m1_matches_brute(h):
    m, w = flow_m1(h)
    assert m == brute_m1(h)[0]
    if m > 0:
        assert one_density(h.induced(w)) == m


@settings(max_examples=40, deadline=None)
@given(small_graphs(hi=9))
def test_one_degenerate_bounds_density(h):
    if is_one_degenerate(h):
        assert brute_m1(h)[0] <= 1


@settings(max_examples=40, deadline=None)
@given(small_graphs(lo=5, hi=8))
def test_dp_witness_and_permutation_search(h):
    ok, cyc = dp_has_tight_hamilton_cycle(h)
    if ok:
        assert verify_tight_cycle(h, cyc)
    n = h.n
    found = any(verify_tight_cycle(h, (0,) + p) for p in itertools.permutations(range(1, n)))
    assert ok == found


def test_dp_size_guard():
    from tightham.errors import TooLarge
    with pytest.raises(TooLarge):
        dp_has_tight_hamilton_cycle(complete(17, 3))


def test_verify_rejects_numpy_duplicates():
    c6 = tight_cycle(6, 3)
    assert verify_tight_cycle(c6, np.array([0, 1, 2, 3, 4, 5]))
    assert not verify_tight_path(c6, np.array([0, 1, 2, 0]))
