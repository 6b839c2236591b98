import numpy as np
import pytest

from tightham.errors import EpsOutOfRange, InvalidInput, LengthInfeasible, NotReservoirVertex, UnsupportedUniformity
from tightham.exposure import ExposureConfig, ExposureLedger
from tightham.hypergraph import Hypergraph, complete
from tightham.oracle import verify_tight_cycle, verify_tight_path
from tightham.pipeline import (PipelineConfig, appeared_test, chain_pairs, check_lengths, eps_from_p,
                               find_disjoint_tight_cycles, find_tight_hamilton_cycle,
                               remove_reservoir_subset, step1_find_reservoir_copies,
                               step2_link_reservoirs)
from tightham.reservoir import build_reservoir_graph


def test_config_validation():
    with pytest.raises(UnsupportedUniformity):
        PipelineConfig(n=400, r=2, p=1.0)
    with pytest.raises(InvalidInput):
        PipelineConfig(n=10, p=1.0)
    with pytest.raises(EpsOutOfRange):
        PipelineConfig(n=400, eps=1.5)


def test_round_probabilities():
    assert PipelineConfig(n=400, p=1.0).round_probabilities() == [1.0] * 5
    assert PipelineConfig(n=400, p=0.0).round_probabilities() == [0.0] * 5
    probs = PipelineConfig(n=400, p=0.3).round_probabilities()
    q2 = probs[1]
    assert all(x == q2 for x in probs[1:])
    assert probs[0] >= q2
    assert abs((1 - probs[0]) * (1 - q2) ** 4 - 0.7) < 1e-12
    assert eps_from_p(1000, 1000 ** -0.4) == pytest.approx(0.6)


def test_chain_pairs():
    assert chain_pairs(0) == ([(0, 1)], [])
    assert chain_pairs(1) == ([(0, 1)], [(1, 2)])
    even, odd = chain_pairs(5)
    links = sorted(even + odd)
    assert links == [(i, i + 1) for i in range(6)]


def test_p_one_succeeds():
    rep = find_tight_hamilton_cycle(PipelineConfig(n=400, p=1.0, seed=7))
    assert rep.success
    assert verify_tight_cycle(lambda e: True, rep.cycle, r=3, vertices=range(400))
    assert rep.counts["duplicate_events"] == 0
    assert [s["stage"] for s in rep.stages][:4] == ["step1", "step2", "step3", "step45"]


def test_absorbs_forced_leftover():
    rep = find_tight_hamilton_cycle(PipelineConfig(n=3000, p=1.0, seed=2, greedy_stop=3))
    assert rep.success
    assert rep.counts["leftover"] == 3 and rep.counts["gadgets"] == 5
    assert sorted(rep.cycle) == list(range(3000))


def test_capacity_failure_is_reported():
    rep = find_tight_hamilton_cycle(PipelineConfig(n=1000, p=1.0, seed=2, greedy_stop=20))
    assert not rep.success and rep.cycle is None
    assert rep.failure["stage"] == "step45"


def test_p_zero_fails_at_step1():
    rep = find_tight_hamilton_cycle(PipelineConfig(n=600, p=0.0, seed=1))
    assert not rep.success
    assert rep.failure["stage"] == "step1"


def test_sparse_runs_are_sound():
    for seed in range(3):
        rep = find_tight_hamilton_cycle(PipelineConfig(n=500, p=0.5, seed=seed))
        assert rep.counts["duplicate_events"] == 0
        if rep.success:
            assert verify_tight_cycle(lambda e: True, rep.cycle, r=3, vertices=range(500))


def test_determinism():
    a = find_tight_hamilton_cycle(PipelineConfig(n=1000, p=1.0, seed=4)).as_dict()
    b = find_tight_hamilton_cycle(PipelineConfig(n=1000, p=1.0, seed=4)).as_dict()
    a.pop("timings")
    b.pop("timings")
    assert a == b


def test_explicit_graph_input():
    g = complete(60, 3)
    with pytest.raises(InvalidInput):
        find_tight_hamilton_cycle(PipelineConfig(n=50, p=1.0), g)
    rep = find_tight_hamilton_cycle(PipelineConfig(n=60, p=1.0, seed=1), g)
    assert rep.success and verify_tight_cycle(g, rep.cycle)
    rep = find_tight_hamilton_cycle(PipelineConfig(n=60, p=1.0, seed=1), Hypergraph(60, 3))
    assert not rep.success


@pytest.fixture(scope="module")
def reservoir_path():
    n = 3000
    L = ExposureLedger(ExposureConfig(n, 3, 5, [1.0] * 5))
    st = step1_find_reservoir_copies(L.round(1), build_reservoir_graph(3, 3), 5, 20, seed=5)
    X = [x for x in range(n) if x not in st.vertices()]
    cfg = PipelineConfig(n=n, p=1.0, seed=5).connector(2, 1.0, len(X) / n)
    path = step2_link_reservoirs(L.round(2), st, cfg, X, seed=5)
    return L, st, path


def test_splice(reservoir_path):
    L, st, path = reservoir_path
    test = appeared_test(L)
    assert verify_tight_path(test, path, 3)
    rng = np.random.default_rng(1)
    W = sorted(st.W_star)
    for _ in range(100):
        w = rng.choice(W, rng.integers(0, len(W) + 1), replace=False).tolist()
        out = remove_reservoir_subset(path, w, st, test)
        assert out[:2] == path[:2] and out[-2:] == path[-2:]
        assert set(path) - set(out) == set(w)
        assert verify_tight_path(test, out, 3)


def test_splice_rejects_other_vertices(reservoir_path):
    L, st, path = reservoir_path
    outside = next(x for x in path if x not in st.W_star)
    with pytest.raises(NotReservoirVertex):
        remove_reservoir_subset(path, [outside], st)


def test_factor():
    rep = find_disjoint_tight_cycles(PipelineConfig(n=400, p=1.0, seed=1), [300, 50, 50])
    assert rep.success
    assert [len(c) for c in rep.cycles] == [300, 50, 50]
    seen = set()
    for c in rep.cycles:
        assert verify_tight_cycle(lambda e: True, c, r=3, vertices=c)
        assert not seen & set(c)
        seen |= set(c)


def test_factor_lengths_checked():
    cfg = PipelineConfig(n=400, p=1.0, eps=0.5)
    with pytest.raises(LengthInfeasible):
        check_lengths(cfg, [300, 50, 10])
    with pytest.raises(LengthInfeasible):
        check_lengths(cfg, [300, 100, 50])
    with pytest.raises(LengthInfeasible):
        check_lengths(cfg, [100, 50])
