"""The five-round construction of a tight Hamilton cycle, and its factor variant.

Round 1 embeds reservoir gadgets, round 2 links them into one path, round 3
extends that path greedily, and rounds 4 and 5 absorb the leftover vertices
by routing connections through reservoir vertices, which are then spliced
out of the gadgets they belong to.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .connector import ConnectionRequest, ConnectorConfig, bridge_windows, connect_all
from .errors import (AbsorbCapacityExceeded, EmbeddingBudgetExhausted, EpsOutOfRange,
                     InternalVerificationFailure, InvalidInput,
                     LengthInfeasible, NotReservoirVertex, StageFailure, UnsupportedUniformity)
from .exposure import (ExposureConfig, ExposureLedger, RoundLedger, round_key,
                       round_probabilities, solve_q_double_prime, split_explicit)
from .hypergraph import Hypergraph, canonical, reverse
from .oracle import verify_tight_cycle, verify_tight_path
from .reservoir import ReservoirGraph, build_reservoir_graph, choose_ell, reservoir_size

SCHEMA_VERSION = 1
P_ONE_EPS = 0.9


def eps_from_p(n: int, p: float) -> float:
    """Exponent with p = n^(-1+eps), clamped into (0, 1)."""
    if p <= 0:
        return 0.05
    if p >= 1:
        return P_ONE_EPS
    return min(P_ONE_EPS, max(0.05, 1 + math.log(p) / math.log(n)))


@dataclass
class PipelineConfig:
    """Parameters of one run; ``None`` fields take mode defaults.

    ``p`` is the input edge probability (default n^(-1+eps)). ``nu`` and
    ``eta1`` only enter the strict reservoir count.
    """

    n: int
    r: int = 3
    eps: float | None = None
    p: float | None = None
    mode: str = "practical"
    seed: int = 0
    reservoir_count: int | None = None
    gadget_ell: int | None = None
    gadget_k: int | None = None
    greedy_stop: int | None = None
    step1_retry_budget: int = 20
    safety: float = 4.0
    nu: float = 1.0
    eta1: float = 1.0
    q_prime: float | None = None
    early_exit_bridge: bool = True
    connector_overrides: dict[int, dict] = field(default_factory=dict)
    factor_delta: float = 0.5

    def __post_init__(self):
        if self.r < 3:
            raise UnsupportedUniformity(f"uniformity r={self.r} is not supported (need r >= 3)")
        if self.mode not in ("strict", "practical"):
            raise InvalidInput(f"unknown mode {self.mode!r}")
        if self.n < 4 * self.r:
            raise InvalidInput(f"n={self.n} is below the minimum {4 * self.r}")
        if self.p is not None and not 0.0 <= self.p <= 1.0:
            raise InvalidInput(f"p={self.p} outside [0, 1]")
        if self.eps is None:
            self.eps = eps_from_p(self.n, 1.0 if self.p is None else self.p)
        if not 0 < self.eps < 1:
            raise EpsOutOfRange(f"eps={self.eps} outside (0, 1)")
        if self.p is None:
            self.p = min(1.0, self.n ** (-1.0 + self.eps))

    @property
    def strict(self) -> bool:
        return self.mode == "strict"

    def round_probabilities(self) -> list[float]:
        """[q'', q', q', q', q'] for the five rounds."""
        q = self.p
        if q >= 1.0:
            return [1.0] * 5
        if q <= 0.0:
            return [0.0] * 5
        if self.q_prime is not None:
            qp = self.q_prime
        elif self.strict:
            return _strict_rounds(self.n, self.eps, q)
        else:
            qp = (1.0 - (1.0 - q) ** 0.2) * (1.0 - 1e-9)
        qpp = solve_q_double_prime(q, qp)
        return [qpp, qp, qp, qp, qp]

    def ell(self) -> int:
        if self.gadget_ell is not None:
            return self.gadget_ell
        return choose_ell(self.r, self.eps) if self.strict else 3

    def connector(self, rnd: int, prob: float, delta: float) -> ConnectorConfig:
        kw = {"early_exit_bridge": self.early_exit_bridge}
        kw.update(self.connector_overrides.get(rnd, {}))
        return ConnectorConfig(self.r, eps_from_p(self.n, prob), delta=min(1.0, max(delta, 1e-6)),
                               mode=self.mode, **kw)


def _strict_rounds(n: int, eps: float, q: float) -> list[float]:
    q, qp, qpp = round_probabilities(n, eps, q)
    return [qpp, qp, qp, qp, qp]


@dataclass
class RunReport:
    """Everything a run did; ``cycle`` is present iff every stage succeeded."""

    seed: int
    n: int
    r: int
    mode: str
    eps: float
    p: float
    stages: list[dict] = field(default_factory=list)
    counts: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    cycle: list[int] | None = None
    cycles: list[list[int]] | None = None
    failure: dict | None = None
    ledger: ExposureLedger | None = field(default=None, repr=False, compare=False)

    @property
    def success(self) -> bool:
        return self.failure is None and (self.cycle is not None or self.cycles is not None)

    def as_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "success": self.success, "seed": self.seed,
                "n": self.n, "r": self.r, "mode": self.mode, "eps": self.eps, "p": self.p,
                "stages": self.stages, "counts": self.counts, "timings": self.timings,
                "failure": self.failure, "cycle": self.cycle, "cycles": self.cycles}


# ---------------------------------------------------------------------------
# reservoir copies

@dataclass
class GadgetCopy:
    image: tuple[int, ...]          # host vertex of each gadget label
    path_with: list[int]
    path_without: list[int]
    w_star: int
    edges: frozenset[tuple[int, ...]]


@dataclass
class ReservoirState:
    gadget: ReservoirGraph | None
    copies: list[GadgetCopy] = field(default_factory=list)

    @property
    def W_star(self) -> frozenset[int]:
        return frozenset(c.w_star for c in self.copies)

    def owner(self) -> dict[int, int]:
        return {c.w_star: i for i, c in enumerate(self.copies)}

    def vertices(self) -> set[int]:
        return {x for c in self.copies for x in c.image}


def recall_or_expose(rl: RoundLedger, rows: np.ndarray) -> np.ndarray:
    """Coins of ascending rows, exposing only those not yet exposed.

    Sets exposed earlier report whether they appeared (leaf-pair marks
    never appeared).
    """
    rows = np.asarray(rows, dtype=np.int64).reshape(-1, rl.r)
    out = np.zeros(rows.shape[0], dtype=bool)
    if rows.shape[0] == 0:
        return out
    codes = rl.codec.encode(rows)
    seen = rl.contains_codes(codes)
    fresh = np.flatnonzero(~seen)
    if fresh.size:
        uniq, first, inv = np.unique(codes[fresh], return_index=True, return_inverse=True)
        coins = rl.expose_rows(rows[fresh[first]], fresh=True)
        out[fresh] = coins[inv.reshape(-1)]
    old = np.flatnonzero(seen)
    if old.size:
        app = rl.appeared
        out[old] = [c in app for c in codes[old].tolist()]
    return out


def _placement_plan(rg: ReservoirGraph) -> tuple[list[int], list[list[tuple[int, ...]]]]:
    """Gadget labels in reverse min-degree peeling order, and per slot the
    earlier parts of the edges it completes.

    Peeling order keeps the number of edges a slot must complete at the
    degeneracy of the gadget.
    """
    edges = rg.H_star.sorted_edges()
    inc: dict[int, list[int]] = {x: [] for x in rg.H_star.vertices}
    for i, e in enumerate(edges):
        for x in e:
            inc[x].append(i)
    deg = {x: len(v) for x, v in inc.items()}
    dead = [False] * len(edges)
    peel = []
    while deg:
        x = min(deg, key=lambda y: (deg[y], y))
        peel.append(x)
        del deg[x]
        for i in inc[x]:
            if not dead[i]:
                dead[i] = True
                for y in edges[i]:
                    if y in deg:
                        deg[y] -= 1
    order = peel[::-1]
    pos = {x: i for i, x in enumerate(order)}
    need: list[list[tuple[int, ...]]] = [[] for _ in order]
    for e in edges:
        last = max(e, key=pos.__getitem__)
        need[pos[last]].append(tuple(x for x in e if x != last))
    return order, need


def step1_find_reservoir_copies(rl: RoundLedger, gadget: ReservoirGraph | None, count: int,
                                budget: int, available: np.ndarray | None = None,
                                seed: int = 0) -> ReservoirState:
    """Greedily embed ``count`` disjoint gadget copies, exposing edges as slots fill."""
    state = ReservoirState(gadget)
    if count == 0:
        return state
    n = rl.cfg.n
    v = gadget.num_vertices()
    free = np.ones(n, dtype=bool) if available is None else available.copy()
    if 2 * count * v > int(free.sum()):
        raise InvalidInput(f"{count} copies of a {v}-vertex gadget exceed half of the vertices")
    order, need = _placement_plan(gadget)
    attempts = 0
    while len(state.copies) < count:
        image = _embed_once(rl, order, need, free, v, attempts,
                            round_key(seed, f"embed-{len(state.copies)}-{attempts}"))
        if image is None:
            attempts += 1
            if attempts > budget:
                raise EmbeddingBudgetExhausted(
                    f"found {len(state.copies)} of {count} gadget copies within {budget} restarts",
                    stage="step1", found=len(state.copies), wanted=count)
            continue
        free[list(image)] = False
        f = image.__getitem__
        edges = frozenset(canonical(map(f, e)) for e in gadget.H_star.edges)
        state.copies.append(GadgetCopy(tuple(image), [f(x) for x in gadget.path_with],
                                       [f(x) for x in gadget.path_without], f(gadget.w_star), edges))
    return state


def _embed_once(rl, order, need, free, v, attempt, key, max_jumps: int = 32) -> list[int] | None:
    """One embedding attempt with conflict-directed backjumping.

    A slot with no fitting candidate sends the search back to the latest
    slot its edges depend on, which then tries its next candidate.
    """
    image = [-1] * v
    taken = free.copy()
    pool = np.flatnonzero(taken)
    if attempt:
        pool = np.random.default_rng(key).permutation(pool)
    pos = {x: i for i, x in enumerate(order)}
    blame = [max((pos[y] for part in parts for y in part), default=-1) for parts in need]
    cursor = [0] * len(order)
    j = jumps = 0
    while j < len(order):
        chosen, cursor[j] = _next_fit(rl, pool, cursor[j], taken, image, need[j])
        if chosen >= 0:
            image[order[j]] = chosen
            taken[chosen] = False
            j += 1
            continue
        b = blame[j]
        jumps += 1
        if b < 0 or jumps > max_jumps:
            return None
        for i in range(j, b - 1, -1):
            x = order[i]
            if image[x] >= 0:
                taken[image[x]] = True
                image[x] = -1
            if i > b:
                cursor[i] = 0
        j = b
    return image


def _next_fit(rl, pool, start, taken, image, parts, chunk=256) -> tuple[int, int]:
    """First pool entry at or after ``start`` completing every edge; (-1, end) if none."""
    for s in range(start, pool.size, chunk):
        cand = pool[s:s + chunk]
        live = np.flatnonzero(taken[cand])
        if live.size == 0:
            continue
        ok = np.ones(live.size, dtype=bool)
        for part in parts:
            base = np.array([image[y] for y in part], dtype=np.int64)
            idx = np.flatnonzero(ok)
            rows = np.sort(np.concatenate([np.broadcast_to(base, (idx.size, base.size)),
                                           cand[live[idx], None]], axis=1), axis=1)
            ok[idx] = recall_or_expose(rl, rows)
            if not ok.any():
                break
        hit = np.flatnonzero(ok)
        if hit.size:
            k = int(live[hit[0]])
            return int(cand[k]), s + k + 1
    return -1, pool.size


# ---------------------------------------------------------------------------
# steps 2-5

def _join(first: list[int], link: list[int], r: int) -> list[int]:
    """Append a connection path that starts with the end tuple of ``first``."""
    return first + link[r - 1:]


def step2_link_reservoirs(rl: RoundLedger, state: ReservoirState, cfg: ConnectorConfig,
                          X: Sequence[int], seed: int = 0, start: Sequence[int] | None = None) -> list[int]:
    """Join the copies' path_with images into one tight path.

    With no copies the path is ``start`` (an (r-1)-tuple).
    """
    r = rl.r
    if not state.copies:
        if start is None or len(start) != r - 1:
            raise InvalidInput("an empty reservoir needs a starting tuple")
        return list(start)
    if len(state.copies) == 1:
        return list(state.copies[0].path_with)
    pairs = [(tuple(a.path_with[-(r - 1):]), tuple(b.path_with[:r - 1]))
             for a, b in zip(state.copies, state.copies[1:])]
    res = _connect(rl, pairs, X, cfg, seed, "step2")
    path = list(state.copies[0].path_with)
    for link, c in zip(res, state.copies[1:]):
        path = _join(path, link, r) + c.path_with[r - 1:]
    return path


def _connect(rl: RoundLedger, pairs, X, cfg: ConnectorConfig, seed: int, stage: str,
             target_lengths=None) -> list[list[int]]:
    req = ConnectionRequest(pairs, frozenset(X), rl.round, target_lengths)
    try:
        res = connect_all(req, rl, cfg, seed=seed)
    except InvalidInput as exc:
        raise StageFailure(f"connector rejected the request: {exc}", stage=stage) from exc
    if not res.success:
        f = res.failure
        raise StageFailure(f"{f.stage}: {f}", stage=stage, phase=f.phase, connector_stage=f.stage)
    return res.paths


def step3_greedy_extend(rl: RoundLedger, path: list[int], allowed: np.ndarray, stop: int = 0,
                        chunk: int | None = None, limit: int | None = None) -> tuple[list[int], list[int]]:
    """Append vertices to the end while an extending edge appears.

    ``allowed`` marks the vertices the path may use; growth stops once at
    most ``stop`` of them are left or the path has ``limit`` vertices.
    Returns the extended path and the allowed vertices it misses.
    """
    r = rl.r
    path = list(path)
    free = allowed.copy()
    free[path] = False
    prob = rl.cfg.probability(rl.round)
    chunk = chunk or max(32, math.ceil(4 / prob) if prob > 0 else 32)
    while True:
        cand = np.flatnonzero(free)
        if cand.size <= stop or cand.size == 0 or (limit is not None and len(path) >= limit):
            break
        a = np.array(sorted(path[-(r - 1):]), dtype=np.int64)
        nxt = -1
        for s in range(0, cand.size, chunk):
            part = cand[s:s + chunk]
            rows = np.sort(np.concatenate([np.broadcast_to(a, (part.size, r - 1)), part[:, None]], axis=1), axis=1)
            hit = np.flatnonzero(recall_or_expose(rl, rows))
            if hit.size:
                nxt = int(part[hit[0]])
                break
        if nxt < 0:
            break
        path.append(nxt)
        free[nxt] = False
    return path, np.flatnonzero(free).tolist()


def chain_pairs(t: int) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    """Index pairs of the round-4 (even) and round-5 (odd) connections of Y_0..Y_{t+1}."""
    even = [(2 * i, 2 * i + 1) for i in range((t + 2) // 2)]
    odd = [(2 * i + 1, 2 * i + 2) for i in range((t + 1) // 2)]
    return even, odd


def _direct_bridge(rl: RoundLedger, y0: Sequence[int], y1: Sequence[int]) -> list[int] | None:
    rows = np.array(bridge_windows(y0, y1, rl.r), dtype=np.int64)
    if recall_or_expose(rl, rows).all():
        return list(y0) + list(y1)
    return None


def _connect_or_bridge(rl: RoundLedger, pairs, X, cfg: ConnectorConfig, seed: int,
                       stage: str) -> list[list[int]]:
    """Connect through X; pairs the connector cannot serve try a direct bridge."""
    r = rl.r
    paths: list[list[int]] = []
    reason = "too few vertices to route through"
    if len(X) >= 4 * r * cfg.min_part_size and pairs:
        req = ConnectionRequest(pairs, frozenset(X), rl.round)
        try:
            res = connect_all(req, rl, cfg, seed=seed)
            paths = list(res.paths)
            if res.failure is not None:
                reason = f"{res.failure.stage}: {res.failure}"
        except InvalidInput as exc:
            reason = str(exc)
    for u, v in pairs[len(paths):]:
        link = _direct_bridge(rl, u, v)
        if link is None:
            raise StageFailure(f"pair {len(paths)} not connected ({reason}) and its direct bridge "
                               f"did not appear", stage=stage, phase=len(paths))
        paths.append(link)
    return paths


def step45_absorb(rl4: RoundLedger, rl5: RoundLedger, path: list[int], leftover: Sequence[int],
                  state: ReservoirState, cfg4: ConnectorConfig, cfg5: ConnectorConfig,
                  seed: int = 0) -> tuple[list[list[int]], set[int], dict]:
    """Absorb ``leftover`` through round-4 and round-5 connections in the reservoir.

    Returns the chain of connection paths (Y_0 to Y_{t+1}), the reservoir
    vertices W they consume (padding included) and counts.
    """
    r = rl4.r
    w_star = sorted(state.W_star)
    L = sorted(leftover)
    pad = (-len(L)) % (r - 1)
    if pad > len(w_star) or len(L) > len(w_star):
        need = math.ceil(4 * (len(L) + r))
        raise AbsorbCapacityExceeded(
            f"{len(L)} leftover vertices exceed the reservoir of {len(w_star)}; "
            f"try reservoir_count >= {need}", stage="step45", suggested_count=need)
    padding = w_star[:pad]
    L = sorted(L + padding)
    t = len(L) // (r - 1)
    Y = [reverse(path[:r - 1])]
    Y += [tuple(L[i * (r - 1):(i + 1) * (r - 1)]) for i in range(t)]
    Y.append(reverse(path[-(r - 1):]))
    even, odd = chain_pairs(t)
    X4 = sorted(set(w_star) - set(L))
    p4 = _connect_or_bridge(rl4, [(Y[a], Y[b]) for a, b in even], X4, cfg4, seed, "step4")
    used4 = {x for p in p4 for x in p[r - 1:len(p) - (r - 1)]}
    X5 = sorted(set(X4) - used4)
    p5 = _connect_or_bridge(rl5, [(Y[a], Y[b]) for a, b in odd], X5, cfg5, seed + 1, "step5")
    chain: list[list[int]] = []
    for i in range(t + 1):
        chain.append(p4[i // 2] if i % 2 == 0 else p5[i // 2])
    W = set(padding) | used4 | {x for p in p5 for x in p[r - 1:len(p) - (r - 1)]}
    counts = {"leftover": len(leftover), "padding": pad, "t": t, "W_star": len(w_star),
              "W_double_star": len(X5), "W_used": len(W)}
    return chain, W, counts


def remove_reservoir_subset(path: list[int], W, state: ReservoirState,
                            edge_test: Callable[[tuple], bool] | None = None) -> list[int]:
    """Splice the alternate path into every copy owning a vertex of W."""
    W = set(W)
    owner = state.owner()
    bad = sorted(W - set(owner))
    if bad:
        raise NotReservoirVertex(f"{bad[:5]} are not reservoir vertices")
    if not W:
        return list(path)
    r = state.gadget.r
    pos = {x: i for i, x in enumerate(path)}
    out = list(path)
    spans = []
    for w in W:
        c = state.copies[owner[w]]
        i = pos.get(c.path_with[0])
        if i is None or path[i:i + len(c.path_with)] != c.path_with:
            raise NotReservoirVertex(f"the copy owning {w} is not a contiguous part of the path")
        spans.append((i, c))
    for i, c in sorted(spans, key=lambda s: -s[0]):
        out[i:i + len(c.path_with)] = c.path_without
    test = edge_test
    if test is None:
        edges = set().union(*(c.edges for _, c in spans))
        test = lambda e: canonical(e) in edges  # noqa: E731
        for _, c in spans:
            if not verify_tight_path(test, c.path_without, r):
                raise InternalVerificationFailure("an alternate path is not tight")
    else:
        verdict = verify_tight_path(test, out, r)
        if not verdict:
            raise InternalVerificationFailure(f"spliced path rejected: {verdict.first_violation}")
    if out[:r - 1] != path[:r - 1] or out[-(r - 1):] != path[-(r - 1):]:
        raise InternalVerificationFailure("splicing moved an end tuple")
    return out


def close_cycle(path: list[int], chain: list[list[int]], r: int) -> list[int]:
    """P(W) followed by the reversed chain, minus the shared end tuples."""
    q = list(chain[0])
    for link in chain[1:]:
        q = _join(q, link, r)
    back = q[::-1]
    return list(path) + back[r - 1:len(back) - (r - 1)]


# ---------------------------------------------------------------------------
# orchestration

def appeared_test(ledger: ExposureLedger) -> Callable[[tuple], bool]:
    """Predicate: did this r-set appear in any round?"""
    codec = ledger.cfg.codec
    rounds = [ledger.round(k) for k in range(1, ledger.cfg.num_rounds + 1)]

    def has(e) -> bool:
        code = codec.encode_one(canonical(e))
        return any(code in rl.appeared for rl in rounds)
    return has


def default_reservoir_count(cfg: PipelineConfig, v: int, q3: float) -> int:
    cap = cfg.n // (2 * v)
    if cfg.reservoir_count is not None:
        return cfg.reservoir_count
    if cfg.strict:
        c = min(1 / (2 * v), cfg.nu / v, cfg.eta1)
        return min(cap, math.floor(c * cfg.n))
    r = cfg.r
    leftover = 0 if q3 >= 1 else (cfg.n if q3 <= 0 else math.ceil(1 / q3))
    t = math.ceil(leftover / (r - 1))
    return min(cap, math.ceil(cfg.safety * leftover + (t + 1) * 2 * r))


def make_ledger(cfg: PipelineConfig, graph: Hypergraph | None = None) -> ExposureLedger:
    probs = cfg.round_probabilities()
    if graph is None:
        ecfg = ExposureConfig(cfg.n, cfg.r, cfg.seed, probs)
    else:
        if graph.n != cfg.n or graph.r != cfg.r:
            raise InvalidInput(f"graph has n={graph.n}, r={graph.r}; config has n={cfg.n}, r={cfg.r}")
        q = cfg.p
        if q >= 1:
            parts = [graph.copy() for _ in range(5)]
        elif q <= 0:
            parts = [Hypergraph(graph.n, graph.r) for _ in range(5)]
        else:
            parts, _ = split_explicit(graph, q, probs[1], probs[0], round_key(cfg.seed, "split"))
        ecfg = ExposureConfig(cfg.n, cfg.r, cfg.seed, probs, mode="explicit-graph", graphs=parts)
    return ExposureLedger(ecfg, on_duplicate="raise")


class _Run:
    def __init__(self, cfg: PipelineConfig, graph: Hypergraph | None):
        self.cfg = cfg
        self.ledger = make_ledger(cfg, graph)
        self.probs = self.ledger.cfg.rounds
        self.report = RunReport(cfg.seed, cfg.n, cfg.r, cfg.mode, cfg.eps, cfg.p, ledger=self.ledger)
        self.report.counts["round_probabilities"] = list(self.probs)
        self.state: ReservoirState | None = None
        self.path: list[int] = []

    def stage(self, name: str, fn):
        t0 = time.perf_counter()
        try:
            out = fn()
        except StageFailure as exc:
            self.report.stages.append({"stage": name, "ok": False, "reason": str(exc)})
            self.report.failure = {"stage": name, "type": type(exc).__name__, "message": str(exc)}
            raise
        finally:
            self.report.timings[name] = round(time.perf_counter() - t0, 6)
        self.report.stages.append({"stage": name, "ok": True})
        return out

    def delta(self, size: int) -> float:
        return size / self.cfg.n

    def reservoir(self, universe: np.ndarray) -> None:
        cfg, r = self.cfg, self.cfg.r
        ell = cfg.ell()
        nv, _ = reservoir_size(r, ell, cfg.gadget_k)
        count = default_reservoir_count(cfg, nv, self.probs[2])
        count = min(count, int(universe.sum()) // (2 * nv))
        gadget = build_reservoir_graph(r, ell, cfg.gadget_k) if count else None
        rl1 = self.ledger.round(1)
        self.state = self.stage("step1", lambda: step1_find_reservoir_copies(
            rl1, gadget, count, cfg.step1_retry_budget, universe, cfg.seed))
        self.report.counts["gadgets"] = count
        self.report.counts["gadget_vertices"] = nv
        gv = self.state.vertices()
        X = sorted(set(np.flatnonzero(universe).tolist()) - gv)
        start = X[:r - 1] if not self.state.copies else None
        delta = 0.5 if cfg.strict else self.delta(len(X))
        ccfg = cfg.connector(2, self.probs[1], delta)
        self.path = self.stage("step2", lambda: step2_link_reservoirs(
            self.ledger.round(2), self.state, ccfg, X, round_key(cfg.seed, "step2"), start))
        self.report.counts["path_after_step2"] = len(self.path)

    def absorb(self, universe: np.ndarray) -> list[int]:
        cfg, r = self.cfg, self.cfg.r
        stop = cfg.greedy_stop
        if stop is None:
            eps_p = eps_from_p(cfg.n, self.probs[2])
            stop = math.floor(cfg.n ** (1 - eps_p / 2)) if cfg.strict else 0

        def step3():
            out = step3_greedy_extend(self.ledger.round(3), self.path, universe, stop)
            if len(out[0]) < 2 * (r - 1):
                raise StageFailure(f"path of {len(out[0])} vertices is too short to close", stage="step3")
            return out
        path, left = self.stage("step3", step3)
        self.report.counts["path_after_step3"] = len(path)
        self.report.counts["leftover"] = len(left)
        w = len(self.state.W_star)
        if cfg.strict:
            d4 = d5 = max(w / (2 * cfg.n), 1e-6)
        else:
            d4 = d5 = self.delta(max(w, 1))
        c4 = cfg.connector(4, self.probs[3], d4)
        c5 = cfg.connector(5, self.probs[4], d5)
        chain, W, counts = self.stage("step45", lambda: step45_absorb(
            self.ledger.round(4), self.ledger.round(5), path, left, self.state, c4, c5,
            round_key(cfg.seed, "step45")))
        self.report.counts.update(counts)
        spliced = self.stage("splice", lambda: remove_reservoir_subset(path, W, self.state))
        return close_cycle(spliced, chain, r)

    def verify(self, cycle: list[int], vertices) -> None:
        verdict = verify_tight_cycle(appeared_test(self.ledger), cycle, self.cfg.r, vertices)
        if not verdict:
            err = InternalVerificationFailure(f"final cycle rejected: {verdict.first_violation}")
            self.report.stages.append({"stage": "verify", "ok": False, "reason": str(err)})
            self.report.failure = {"stage": "verify", "type": type(err).__name__, "message": str(err)}
            raise err
        self.report.stages.append({"stage": "verify", "ok": True})

    def finish(self) -> None:
        stats = self.ledger.stats()
        self.report.counts["exposed"] = {str(k): s["exposed"] for k, s in stats.items()}
        self.report.counts["appeared"] = {str(k): s["appeared"] for k, s in stats.items()}
        self.report.counts["duplicate_events"] = self.ledger.duplicate_events


def find_tight_hamilton_cycle(cfg: PipelineConfig, graph: Hypergraph | None = None) -> RunReport:
    """Run all five steps; the report carries the verified cycle on success."""
    run = _Run(cfg, graph)
    universe = np.ones(cfg.n, dtype=bool)
    try:
        run.reservoir(universe)
        cycle = run.absorb(universe)
        run.verify(cycle, range(cfg.n))
        run.report.cycle = [int(x) for x in cycle]
    except StageFailure:
        pass
    finally:
        run.finish()
    return run.report


def check_lengths(cfg: PipelineConfig, lengths: Sequence[int]) -> list[int]:
    lengths = [int(x) for x in lengths]
    r, n, eps = cfg.r, cfg.n, cfg.eps
    if not lengths:
        raise LengthInfeasible("no cycle lengths given")
    if sum(lengths) > n:
        raise LengthInfeasible(f"lengths sum to {sum(lengths)} > n={n}")
    if lengths[0] < cfg.factor_delta * n:
        raise LengthInfeasible(f"first length {lengths[0]} is below {cfg.factor_delta}*n")
    floor = max(2 * r / eps, 2 * (r - 1) + 2)
    for x in lengths[1:]:
        if x < floor:
            raise LengthInfeasible(f"length {x} is below 2r/eps={2 * r / eps:.3g}")
    return lengths


def _short_paths(run: _Run, lengths: Sequence[int], free: np.ndarray) -> tuple[list[list[int]], list[int]]:
    """Greedy round-3 paths a little shorter than each requested length."""
    r = run.cfg.r
    rl3 = run.ledger.round(3)
    paths, inner = [], []
    for m in lengths:
        k = max(2, min(6, m - 2 * (r - 1)))
        start = np.flatnonzero(free)[:r - 1].tolist()
        if len(start) < r - 1:
            raise StageFailure("no vertices left for a short cycle", stage="factor-greedy")
        path, _ = step3_greedy_extend(rl3, start, free, limit=m - k)
        if len(path) < m - k:
            raise StageFailure(f"greedy path stalled at {len(path)} of {m - k} vertices",
                               stage="factor-greedy")
        free[path] = False
        paths.append(path)
        inner.append(k)
    return paths, inner


def find_disjoint_tight_cycles(cfg: PipelineConfig, lengths: Sequence[int],
                               graph: Hypergraph | None = None) -> RunReport:
    """Vertex-disjoint tight cycles of exactly the given lengths (first one long)."""
    lengths = check_lengths(cfg, lengths)
    run = _Run(cfg, graph)
    r, n = cfg.r, cfg.n
    try:
        universe = np.ones(n, dtype=bool)
        run.reservoir(universe)
        free = np.ones(n, dtype=bool)
        free[run.path] = False
        free[list(run.state.vertices())] = False
        shorts, inner = run.stage("factor-greedy", lambda: _short_paths(run, lengths[1:], free))
        cycles: list[list[int]] = []
        if shorts:
            pairs = [(tuple(p[-(r - 1):]), tuple(p[:r - 1])) for p in shorts]
            targets = [k + 2 * (r - 1) for k in inner]
            X = np.flatnonzero(free).tolist()
            ccfg = cfg.connector(2, run.probs[1], run.delta(len(X)))
            links = run.stage("factor-close", lambda: _connect(
                run.ledger.round(2), pairs, X, ccfg, round_key(cfg.seed, "factor"), "factor-close", targets))
            for p, link in zip(shorts, links):
                cycles.append(p + link[r - 1:len(link) - (r - 1)])
                free[link] = False
        big = np.zeros(n, dtype=bool)
        big[np.flatnonzero(free)] = True
        big[run.path] = True
        big[list(run.state.vertices())] = True
        extra = int(big.sum()) - lengths[0]
        if extra < 0:
            raise StageFailure(f"only {int(big.sum())} vertices remain for a cycle of {lengths[0]}",
                               stage="factor-greedy")
        if extra:
            spare = np.flatnonzero(free)[::-1][:extra]
            big[spare] = False
        cycle = run.absorb(big)
        run.verify(cycle, np.flatnonzero(big).tolist())
        test = appeared_test(run.ledger)
        for c in cycles:
            verdict = verify_tight_cycle(test, c, r, c)
            if not verdict:
                raise InternalVerificationFailure(f"short cycle rejected: {verdict.first_violation}")
        everything = [cycle] + cycles
        if len({x for c in everything for x in c}) != sum(map(len, everything)):
            raise InternalVerificationFailure("cycles are not vertex-disjoint")
        if [len(c) for c in everything] != lengths:
            raise InternalVerificationFailure(f"cycle lengths {[len(c) for c in everything]} != {lengths}")
        run.report.cycles = [[int(x) for x in c] for c in everything]
    except StageFailure:
        pass
    finally:
        run.finish()
    return run.report
