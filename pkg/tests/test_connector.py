import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tightham.connector import (ConnectionRequest, ConnectorConfig, ConnectState, Fan, TempDanger,
                                bridge_windows, compute_danger_sets, connect_all, connect_pair,
                                grow_fan, is_blocked, partition_X)
from tightham.errors import BridgeFailure, InvalidInput, TuplesIntersect, WrongArity, XTooSmall
from tightham.exposure import ExposureConfig, ExposureLedger
from tightham.hypergraph import reverse
from tightham.oracle import verify_tight_path


def lazy(n, p=1.0, seed=0, r=3):
    return ExposureLedger(ExposureConfig(n, r, seed, [p] * 5))


def contract_ok(req, paths, ledger, r, cap=None):
    """Independent check of the connection contract."""
    appeared = set(ledger.round(req.round).appeared_edges())
    seen = set()
    for (u, v), path in zip(req.pairs, paths):
        if tuple(path[:r - 1]) != u or tuple(path[-(r - 1):]) != v:
            return False
        if not verify_tight_path(appeared, path, r=r):
            return False
        inner = path[r - 1:len(path) - (r - 1)]
        if not set(inner) <= req.X or seen & set(path):
            return False
        if cap is not None and len(path) > cap:
            return False
        seen |= set(path)
    return len(paths) == len(req.pairs)


def test_partition_sizes():
    ys, yps = partition_X(range(48), 3, seed=1)
    assert [len(y) for y in ys + yps] == [4] * 12
    ys, yps = partition_X(range(49), 3, seed=1)
    assert sorted(len(y) for y in ys + yps) == [4] * 11 + [5]
    assert sorted(np.concatenate(ys + yps).tolist()) == list(range(49))
    again = partition_X(range(49), 3, seed=1)
    assert all((a == b).all() for a, b in zip(ys + yps, again[0] + again[1]))
    with pytest.raises(XTooSmall):
        partition_X(range(11), 3, seed=0)


def test_danger_sets():
    n = 50
    rl = lazy(n).round(2)
    rl.snapshot()
    d = compute_danger_sets(rl, 0.1, n)
    assert all(v.size == 0 for v in d.values())
    for c in range(2, 7):
        rl.expose_rows(np.array([[0, 1, c]]))
    rl.snapshot()
    d = compute_danger_sets(rl, 0.1, n)
    assert rl.codec.decode(d[2], 2).tolist() == [[0, 1]]
    assert d[1].size == 0
    d = compute_danger_sets(rl, 0.12, n)
    assert d[2].size == 0


def test_is_blocked():
    rl = lazy(20).round(2)
    assert bridge_windows((0, 1), (2, 3), 3) == [(0, 1, 2), (1, 2, 3)]
    assert not is_blocked((0, 1), (2, 3), rl)
    rl.expose_rows(np.array([[0, 1, 3]]))
    assert not is_blocked((0, 1), (2, 3), rl)
    rl.expose_rows(np.array([[1, 2, 3]]))
    assert is_blocked((0, 1), (2, 3), rl)


def test_temp_danger():
    n = 30
    rl = lazy(n).round(2)
    rl.snapshot()
    yprime = np.arange(10, 30)
    td = TempDanger([(0, 1)], rl, 0.5, yprime, n)
    code = rl.codec.encode(np.array([[10, 11]]))
    assert not td.member(2, code)[0]
    rl.expose_rows(np.array([[1, 10, 11]]))
    rl.snapshot()
    td = TempDanger([(0, 1)], rl, 0.5, yprime, n)
    assert td.member(2, code)[0]


def _state(n, X, cfg, used=()):
    rl = lazy(n).round(2)
    th = cfg.thresholds(n)
    ys, yps = partition_X(X, 3, 0)
    mask = np.zeros(n, dtype=bool)
    mask[list(X)] = True
    u = np.zeros(n, dtype=bool)
    u[list(used)] = True
    st_ = ConnectState(rl, th, mask, u, ys, yps)
    st_.begin_phase(0)
    return rl, st_


def test_bad_vertices():
    cfg = ConnectorConfig(3, 0.5, delta=0.8)
    rl, state = _state(60, range(4, 60), cfg)
    cand = np.arange(4, 60)
    assert not state.bad_mask((0, 1), cand, None).any()
    rl.expose_rows(np.array([[0, 1, 5]]))
    assert state.bad_mask((0, 1), cand, None)[cand == 5].all()
    cfg = ConnectorConfig(3, 0.5, delta=0.8, mult_caps={1: 0})
    rl, state = _state(60, range(4, 60), cfg)
    state.phase.mult1[7] = 1
    bad = state.bad_mask((0, 1), cand, None)
    assert bad[cand == 7].all() and bad.sum() == 1


def test_threshold_examples():
    th = ConnectorConfig(3, 0.5, delta=0.5, mode="strict").thresholds(10 ** 4)
    assert th.width == 1000
    assert math.isclose(th.c_min, 0.5 * 100 / 48) and math.isclose(th.c_max, 0.5 * 100 / 6)


def test_fan_coherence():
    n = 400
    cfg = ConnectorConfig(3, 0.6, delta=0.9)
    rl, state = _state(n, range(4, n), cfg, used=(0, 1, 2, 3))
    fan = grow_fan((0, 1), state.ys, state)
    assert len(fan.paths) >= state.th.width
    assert len(set(fan.paths)) == len(fan.paths)
    appeared = set(rl.appeared_edges())
    seen = {}
    h = math.ceil(3 / 2)
    for p in fan.paths:
        assert p[:2] == (0, 1)
        assert verify_tight_path(appeared, p, r=3)
        for i in range(len(p) - h + 1):
            key = frozenset(p[i:i + h])
            prefix = p[:i + h]
            if key in seen:
                assert seen[key] == prefix
            else:
                seen[key] = prefix
    assert len(fan.leaves) == len(fan.paths)


def test_connect_pair_and_bridge_failure():
    fan_u = Fan((0, 1), [(0, 1, 2, 3)], 2)
    fan_v = Fan((9, 8), [(9, 8, 7, 6)], 2)
    rl = lazy(20).round(2)
    path, stats = connect_pair(fan_u, fan_v, rl)
    assert path == [0, 1, 2, 3, 6, 7, 8, 9]
    assert stats["unblocked"] == 1
    rl = lazy(20).round(2)
    rl.expose_rows(np.array([[2, 3, 6]]))
    with pytest.raises(BridgeFailure) as err:
        connect_pair(fan_u, fan_v, rl)
    assert err.value.details["unblocked"] == 0


def test_connect_all_k0():
    L = lazy(40)
    res = connect_all(ConnectionRequest([], range(4, 40)), L, ConnectorConfig(3, 0.5))
    assert res.success and res.paths == [] and len(L.round(2)) == 0


def test_connect_all_k1():
    L = lazy(100)
    req = ConnectionRequest([((0, 1), (2, 3))], range(4, 100))
    cfg = ConnectorConfig(3, 0.9, delta=0.96)
    res = connect_all(req, L, cfg, seed=3)
    assert res.success
    assert contract_ok(req, res.paths, L, 3, cfg.path_cap(100))


def test_connect_all_k2_disjoint():
    L = lazy(100)
    req = ConnectionRequest([((0, 1), (2, 3)), ((4, 5), (6, 7))], range(8, 100))
    cfg = ConnectorConfig(3, 0.9, delta=0.92)
    res = connect_all(req, L, cfg, seed=1)
    assert res.success
    assert not set(res.paths[0]) & set(res.paths[1])
    assert contract_ok(req, res.paths, L, 3, cfg.path_cap(100))


def test_exact_lengths():
    for n, lengths in ((20, [8]), (200, [8, 11])):
        L = lazy(n)
        pairs = [((0, 1), (2, 3)), ((4, 5), (6, 7))][:len(lengths)]
        req = ConnectionRequest(pairs, range(8, n), target_lengths=lengths)
        res = connect_all(req, L, ConnectorConfig(3, 0.9, delta=(n - 8) / n), seed=2)
        assert res.success
        assert [len(p) for p in res.paths] == lengths
        assert contract_ok(req, res.paths, L, 3)


def test_request_validation():
    L = lazy(40)
    cfg = ConnectorConfig(3, 0.5)
    with pytest.raises(WrongArity):
        connect_all(ConnectionRequest([((0, 1, 2), (3, 4))], range(5, 40)), L, cfg)
    with pytest.raises(TuplesIntersect):
        connect_all(ConnectionRequest([((0, 1), (1, 4))], range(5, 40)), L, cfg)
    with pytest.raises(InvalidInput):
        connect_all(ConnectionRequest([((0, 1), (2, 3))], range(4, 40), target_lengths=[5]), L, cfg)
    with pytest.raises(XTooSmall):
        connect_all(ConnectionRequest([((0, 1), (2, 3))], range(4, 12)), L, cfg)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([1.0, 0.6, 0.3]), st.integers(1, 3))
def test_successful_paths_satisfy_contract(seed, p, k):
    n = 300
    L = lazy(n, p, seed)
    pairs = [((4 * i, 4 * i + 1), (4 * i + 2, 4 * i + 3)) for i in range(k)]
    req = ConnectionRequest(pairs, range(4 * k, n))
    eps = 0.9 if p == 1.0 else 1 + math.log(p) / math.log(n)
    cfg = ConnectorConfig(3, eps, delta=(n - 4 * k) / n, early_exit_bridge=True)
    res = connect_all(req, L, cfg, seed=seed)
    assert L.duplicate_events == 0
    if res.success:
        assert contract_ok(req, res.paths, L, 3, cfg.path_cap(n))
    else:
        assert len(res.paths) == res.failure.phase


def test_reversed_target_orientation():
    L = lazy(100)
    req = ConnectionRequest([((0, 1), (3, 2))], range(4, 100))
    res = connect_all(req, L, ConnectorConfig(3, 0.9, delta=0.96), seed=5)
    assert res.success and tuple(res.paths[0][-2:]) == (3, 2)
    assert reverse(res.paths[0][-2:]) == (2, 3)
