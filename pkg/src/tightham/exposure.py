"""Seeded per-r-set coins, the exposure ledger, and the five-round split.

Coins are a pure function of ``(master_seed, round, canonical r-set)``: a
64-bit round key is derived with BLAKE2b and every r-set is mixed into it
with a SplitMix64-style finaliser, so any coin can be replayed without
stored state. Everything that touches many r-sets at once works on
integer-encoded sets (mixed radix ``n``) held in numpy arrays.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import AlreadyExposed, InfeasibleProbabilities, InvalidInput, WrongArity
from .codes import Codec, with_vertex
from .hypergraph import Hypergraph, canonical
from .leaves import LeafIndex

ROUNDS = 5
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_TWO53 = 1 << 53


# ---------------------------------------------------------------------------
# keyed coins

def round_key(master_seed: int, round_tag) -> int:
    digest = hashlib.blake2b(f"{int(master_seed)}|{round_tag}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def hash_rows(key: int, rows: np.ndarray) -> np.ndarray:
    """64-bit keyed hash of each (ascending) row."""
    rows = np.asarray(rows, dtype=np.int64)
    h = np.full(rows.shape[0], key, dtype=np.uint64)
    with np.errstate(over="ignore"):
        for col in rows.T:
            h = _mix(h + _GOLDEN + col.astype(np.uint64))
    return h


def coin_rows(key: int, rows: np.ndarray, p: float) -> np.ndarray:
    threshold = min(_TWO53, int(math.floor(p * _TWO53)))
    return (hash_rows(key, rows) >> np.uint64(11)).astype(np.int64) < threshold


def solve_q_double_prime(q: float, q_prime: float) -> float:
    """The round-1 probability with ``1-q = (1-q'')(1-q')^4``."""
    qpp = 1.0 - (1.0 - q) / (1.0 - q_prime) ** 4
    if qpp < q_prime * (1 - 1e-12):
        raise InfeasibleProbabilities(f"q={q} is below 1-(1-q')^5 for q'={q_prime}")
    return qpp


def round_probabilities(n: int, eps: float, q: float | None = None) -> tuple[float, float, float]:
    """(q, q', q'') for target exponent ``eps``; q defaults to n^(eps-1)."""
    q = min(1.0, n ** (-1.0 + eps)) if q is None else q
    q_prime = min(1.0, n ** (-1.0 + eps / 2))
    if q < 1.0 - (1.0 - q_prime) ** 5:
        raise InfeasibleProbabilities(f"q={q} is below 1-(1-q')^5 for q'={q_prime}")
    return q, q_prime, solve_q_double_prime(q, q_prime)


@dataclass
class ExposureConfig:
    """Where the coins of each round come from.

    ``rounds[k-1]`` is the inclusion probability of round ``k``. In
    ``explicit-graph`` mode ``graphs[k-1]`` holds that round's edges and a
    coin is plain membership.
    """

    n: int
    r: int
    master_seed: int = 0
    rounds: list[float] = field(default_factory=lambda: [1.0] * ROUNDS)
    mode: str = "lazy-coin"
    graphs: list[Hypergraph] | None = None

    def __post_init__(self):
        if self.mode not in ("lazy-coin", "explicit-graph"):
            raise InvalidInput(f"unknown exposure mode {self.mode!r}")
        for p in self.rounds:
            if not 0.0 <= p <= 1.0:
                raise InvalidInput(f"round probability {p} outside [0, 1]")
        if self.mode == "explicit-graph":
            if self.graphs is None or len(self.graphs) != len(self.rounds):
                raise InvalidInput("explicit-graph mode needs one graph per round")
        self.codec = Codec(self.n, self.r)
        self._keys = {}
        self._graph_codes = {}

    @property
    def num_rounds(self) -> int:
        return len(self.rounds)

    def probability(self, rnd: int) -> float:
        self._check_round(rnd)
        return self.rounds[rnd - 1]

    def _check_round(self, rnd: int) -> None:
        if not 1 <= rnd <= len(self.rounds):
            raise InvalidInput(f"round {rnd} outside 1..{len(self.rounds)}")

    def key(self, rnd: int) -> int:
        if rnd not in self._keys:
            self._keys[rnd] = round_key(self.master_seed, f"round-{rnd}")
        return self._keys[rnd]

    def coins(self, rnd: int, rows: np.ndarray) -> np.ndarray:
        """Coins for ascending rows of r vertices."""
        self._check_round(rnd)
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, self.r)
        if self.mode == "explicit-graph":
            if rnd not in self._graph_codes:
                g = self.graphs[rnd - 1]
                edges = np.array(g.sorted_edges(), dtype=np.int64).reshape(-1, self.r)
                self._graph_codes[rnd] = np.sort(self.codec.encode(edges))
            ref = self._graph_codes[rnd]
            codes = self.codec.encode(rows)
            if ref.size == 0:
                return np.zeros(codes.shape[0], dtype=bool)
            idx = np.minimum(np.searchsorted(ref, codes), ref.size - 1)
            return ref[idx] == codes
        return coin_rows(self.key(rnd), rows, self.rounds[rnd - 1])


def coin(cfg: ExposureConfig, rnd: int, e: Iterable[int]) -> bool:
    ce = canonical(e)
    if len(ce) != cfg.r:
        raise WrongArity(f"expected an {cfg.r}-set, got {ce}")
    return bool(cfg.coins(rnd, np.array([ce]))[0])


# ---------------------------------------------------------------------------
# five-round split of an explicit graph

def _colour_subsets() -> list[frozenset[int]]:
    out = []
    for mask in range(1, 1 << ROUNDS):
        out.append(frozenset(i + 1 for i in range(ROUNDS) if mask >> i & 1))
    return out


COLOURS = _colour_subsets()


def colour_distribution(q: float, q_prime: float, q_double_prime: float) -> list[float]:
    """Probability of each colour in ``COLOURS`` for an edge of G(n, q)."""
    probs = []
    for c in COLOURS:
        k = len(c)
        if 1 in c:
            probs.append(q_prime ** (k - 1) * (1 - q_prime) ** (5 - k) * q_double_prime / q)
        else:
            probs.append(q_prime ** k * (1 - q_prime) ** (4 - k) * (1 - q_double_prime) / q)
    return probs


def check_split_identity(q: float, q_prime: float, q_double_prime: float) -> None:
    if not 0.0 < q <= 1.0 or not 0.0 <= q_prime <= 1.0 or not 0.0 <= q_double_prime <= 1.0:
        raise InfeasibleProbabilities("probabilities must lie in [0, 1] with q > 0")
    lhs, rhs = 1.0 - q, (1.0 - q_double_prime) * (1.0 - q_prime) ** 4
    if not math.isclose(lhs, rhs, rel_tol=1e-12, abs_tol=1e-15):
        raise InfeasibleProbabilities(f"1-q={lhs!r} but (1-q'')(1-q')^4={rhs!r}")
    if q_double_prime < q_prime * (1 - 1e-12):
        raise InfeasibleProbabilities(f"q''={q_double_prime} is below q'={q_prime}")


def split_explicit(g: Hypergraph, q: float, q_prime: float, q_double_prime: float,
                   seed: int) -> tuple[list[Hypergraph], list[frozenset[int]]]:
    """Colour every edge with a non-empty subset of the five rounds.

    Returns the five round graphs and the colour of each edge (in sorted
    edge order).
    """
    check_split_identity(q, q_prime, q_double_prime)
    probs = np.array(colour_distribution(q, q_prime, q_double_prime))
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum()
    edges = g.sorted_edges()
    rng = np.random.default_rng([int(seed) & (2 ** 63 - 1), 0x5EED])
    picks = rng.choice(len(COLOURS), size=len(edges), p=probs)
    member = np.array([[i in c for i in range(1, ROUNDS + 1)] for c in COLOURS], dtype=bool)
    parts = []
    for i in range(ROUNDS):
        idx = np.flatnonzero(member[picks, i]).tolist()
        parts.append(Hypergraph._trusted(g.n, g.r, {edges[j] for j in idx}, g._vertices))
    colours = [COLOURS[k] for k in picks.tolist()]
    return parts, colours


# ---------------------------------------------------------------------------
# exposure ledger

class SortedRuns:
    """A set of int64 codes kept as a few sorted runs merged by size tier."""

    def __init__(self):
        self.runs: list[np.ndarray] = []
        self.size = 0

    def add(self, codes: np.ndarray) -> None:
        codes = np.unique(np.asarray(codes, dtype=np.int64))
        if codes.size == 0:
            return
        self.runs.append(codes)
        self.size += codes.size
        while len(self.runs) > 1 and self.runs[-2].size <= 2 * self.runs[-1].size:
            b = self.runs.pop()
            a = self.runs.pop()
            self.runs.append(np.union1d(a, b))

    def compact(self) -> None:
        if len(self.runs) > 1:
            self.runs = [np.unique(np.concatenate(self.runs))]

    def update(self, other: "SortedRuns") -> None:
        for run in other.runs:
            self.add(run)

    def contains(self, codes: np.ndarray) -> np.ndarray:
        codes = np.asarray(codes, dtype=np.int64)
        hit = np.zeros(codes.shape[0], dtype=bool)
        if not self.runs or codes.size == 0:
            return hit
        order = np.argsort(codes, kind="stable")    # sorted needles are cache friendly
        needles = codes[order]
        found = np.zeros(codes.shape[0], dtype=bool)
        for run in self.runs:
            idx = np.minimum(np.searchsorted(run, needles), run.size - 1)
            found |= run[idx] == needles
        hit[order] = found
        return hit

    def array(self) -> np.ndarray:
        if not self.runs:
            return np.zeros(0, dtype=np.int64)
        return np.unique(np.concatenate(self.runs))

    def __len__(self) -> int:
        return self.size


class RoundLedger:
    """The exposé hypergraph H of one round.

    ``frozen`` holds H as of the last phase snapshot, ``live`` everything
    exposed since. Degrees of (r-1)-sets are tabulated for the frozen part
    only, which is what the per-phase danger computation reads.
    """

    def __init__(self, cfg: ExposureConfig, rnd: int, on_duplicate: str = "raise"):
        self.cfg = cfg
        self.round = rnd
        self.r = cfg.r
        self.codec = cfg.codec
        self.on_duplicate = on_duplicate
        self.frozen = SortedRuns()
        self.live = SortedRuns()
        self._live_pending: list[np.ndarray] = []
        self.appeared: set[int] = set()
        self.deg_keys = np.zeros(0, dtype=np.int64)
        self.deg_counts = np.zeros(0, dtype=np.int64)
        self._incidence: list[tuple[np.ndarray, np.ndarray]] = []
        self._link_cache: dict[int, np.ndarray] = {}
        self.leaves = LeafIndex(cfg.codec, cfg.n)
        self._dirty_keys: list[np.ndarray] = []
        self._heavy_key: tuple | None = None
        self._heavy = np.zeros(0, dtype=np.int64)
        self._heavy_recs = 0
        self.phase = 0
        self.coin_exposures = 0
        self.marked = 0
        self.duplicate_events = 0

    def __len__(self) -> int:
        return len(self.frozen) + len(self.live)

    # membership -----------------------------------------------------------
    def contains_codes(self, codes: np.ndarray, snapshot: bool = False) -> np.ndarray:
        codes = np.asarray(codes, dtype=np.int64)
        return self._contains(codes, None, snapshot)

    def contains_rows(self, rows: np.ndarray, snapshot: bool = False) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, self.r)
        return self._contains(self.codec.encode(rows), rows, snapshot)

    def _contains(self, codes: np.ndarray, rows: np.ndarray | None, snapshot: bool) -> np.ndarray:
        hit = self.frozen.contains(codes)
        if not snapshot:
            hit |= self.live.contains(codes)
        if self.leaves.active(snapshot) and codes.size and not hit.all():
            rest = np.flatnonzero(~hit)
            sub = self.codec.decode(codes[rest], self.r) if rows is None else rows[rest]
            hit[rest] = self.leaves.contains_rows(sub, snapshot)
        return hit

    def marked_rows(self, rows: np.ndarray, snapshot: bool = False) -> np.ndarray:
        """Membership of sorted r-rows in the leaf-pair records alone."""
        return self.leaves.contains_rows(np.asarray(rows, dtype=np.int64).reshape(-1, self.r), snapshot)

    def is_exposed(self, e: Iterable[int], snapshot: bool = False) -> bool:
        return bool(self.contains_codes(np.array([self.codec.encode_one(e)]), snapshot)[0])

    # exposure -------------------------------------------------------------
    def _admit(self, codes: np.ndarray, fresh: bool = False) -> np.ndarray:
        """Mask of codes that may be exposed now; raises on repeats in strict mode."""
        uniq, counts = np.unique(codes, return_counts=True)
        seen = np.zeros(codes.shape[0], dtype=bool) if fresh else self.contains_codes(codes)
        repeated = seen.copy()
        if np.any(counts > 1):
            dup_codes = uniq[counts > 1]
            first = np.zeros(codes.shape[0], dtype=bool)
            _, first_idx = np.unique(codes, return_index=True)
            first[first_idx] = True
            repeated |= np.isin(codes, dup_codes) & ~first
        if repeated.any():
            self.duplicate_events += int(repeated.sum())
            if self.on_duplicate == "raise":
                bad = self.codec.decode_one(int(codes[np.argmax(repeated)]), self.r)
                raise AlreadyExposed(f"round {self.round}: r-set {bad} exposed twice")
        return ~repeated

    def _record(self, codes: np.ndarray) -> None:
        if codes.size:
            self.live.add(codes)
            self._live_pending.append(codes)

    def expose_rows(self, rows: np.ndarray, fresh: bool = False) -> np.ndarray:
        """Expose ascending rows; returns which appeared (False for skipped repeats).

        ``fresh`` asserts the caller has already checked the rows are unexposed.
        """
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, self.r)
        if rows.shape[0] == 0:
            return np.zeros(0, dtype=bool)
        codes = self.codec.encode(rows)
        ok = self._admit(codes, fresh)
        coins = self.cfg.coins(self.round, rows) & ok
        self._record(codes[ok])
        self.coin_exposures += int(ok.sum())
        self.appeared.update(codes[coins].tolist())
        return coins

    def reveal_rows(self, rows: np.ndarray) -> np.ndarray:
        """Coins of rows in a fully revealed round; first-time rows are recorded."""
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, self.r)
        if rows.shape[0] == 0:
            return np.zeros(0, dtype=bool)
        codes = self.codec.encode(rows)
        coins = self.cfg.coins(self.round, rows)
        fresh = ~self.contains_codes(codes)
        if fresh.any():
            new = np.unique(codes[fresh])
            self._record(new)
            self.coin_exposures += int(new.size)
        self.appeared.update(codes[coins].tolist())
        return coins

    def mark_leaf_pairs(self, leaves_u: np.ndarray, leaves_v: np.ndarray) -> int:
        """Add every r-subset of x ∪ y (x in ``leaves_u``, y in ``leaves_v``) to H."""
        leaves_u = np.asarray(leaves_u, dtype=np.int64).reshape(-1, self.r - 1)
        leaves_v = np.asarray(leaves_v, dtype=np.int64).reshape(-1, self.r - 1)
        if leaves_u.shape[0] == 0 or leaves_v.shape[0] == 0:
            return 0
        pairs = self.leaves.add(leaves_u, leaves_v)
        self.marked += pairs
        return pairs

    # snapshots and degrees ---------------------------------------------------
    def snapshot(self, phase: int | None = None) -> None:
        """Freeze H as H_i: later degree queries read this state."""
        self.phase = self.phase + 1 if phase is None else phase
        self.leaves.freeze()
        if not self._live_pending:
            return
        new = np.unique(np.concatenate(self._live_pending))
        self._live_pending = []
        self.frozen.update(self.live)
        self.frozen.compact()
        self.live = SortedRuns()
        rows = self.codec.decode(new, self.r)
        subs = [self.codec.encode(np.delete(rows, i, axis=1)) for i in range(self.r)]
        keys, counts = np.unique(np.concatenate(subs), return_counts=True)
        self._merge_degrees(keys, counts)
        self._dirty_keys.append(keys)
        owner = rows.ravel()
        order = np.argsort(owner, kind="stable")
        starts = np.searchsorted(owner[order], np.arange(self.cfg.n + 1))
        self._incidence.append((starts, np.repeat(new, self.r)[order]))
        self._link_cache = {}

    def snapshot_link(self, z: Sequence[int]) -> np.ndarray:
        """Rows of the frozen r-sets containing every vertex of ``z``."""
        z = tuple(int(v) for v in z)
        v0 = z[0]
        if v0 not in self._link_cache:
            if len(self._link_cache) >= 256:
                self._link_cache = {}
            parts = [codes[starts[v0]:starts[v0 + 1]] for starts, codes in self._incidence]
            codes = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
            self._link_cache[v0] = self.codec.decode(codes, self.r)
        rows = self._link_cache[v0]
        for v in z[1:]:
            rows = rows[(rows == v).any(axis=1)]
        return rows

    def _merge_degrees(self, keys: np.ndarray, counts: np.ndarray) -> None:
        if self.deg_keys.size == 0:
            self.deg_keys, self.deg_counts = keys, counts.astype(np.int64)
            return
        idx = np.searchsorted(self.deg_keys, keys)
        safe = np.minimum(idx, self.deg_keys.size - 1)
        found = self.deg_keys[safe] == keys
        np.add.at(self.deg_counts, safe[found], counts[found])
        if (~found).any():
            self.deg_keys = np.insert(self.deg_keys, idx[~found], keys[~found])
            self.deg_counts = np.insert(self.deg_counts, idx[~found], counts[~found])

    def _exposed_degrees(self, sub_codes: np.ndarray) -> np.ndarray:
        if self.deg_keys.size == 0:
            return np.zeros(sub_codes.shape[0], dtype=np.int64)
        idx = np.minimum(np.searchsorted(self.deg_keys, sub_codes), self.deg_keys.size - 1)
        return np.where(self.deg_keys[idx] == sub_codes, self.deg_counts[idx], 0)

    def _marked_bound(self, sub_codes: np.ndarray) -> np.ndarray:
        if not self.leaves.active(True) or sub_codes.size == 0:
            return np.zeros(sub_codes.shape[0], dtype=np.int64)
        return self.leaves.degree_bound(self.codec.decode(sub_codes, self.r - 1))

    def snapshot_touched(self, sub_codes: np.ndarray) -> np.ndarray:
        """Mask of (r-1)-sets that may have positive degree in H_i (never a false negative)."""
        sub_codes = np.asarray(sub_codes, dtype=np.int64)
        return (self._exposed_degrees(sub_codes) > 0) | (self._marked_bound(sub_codes) > 0)

    def snapshot_degrees(self, sub_codes: np.ndarray) -> np.ndarray:
        """deg_{H_i} of (r-1)-sets given by their codes."""
        sub_codes = np.asarray(sub_codes, dtype=np.int64)
        out = self._exposed_degrees(sub_codes)
        ub = self._marked_bound(sub_codes)
        for i in np.flatnonzero(ub > 0).tolist():
            y = self.codec.decode_one(int(sub_codes[i]), self.r - 1)
            out[i] += self._marked_degree(y)
        return out

    def _marked_degree(self, y: tuple[int, ...]) -> int:
        """Completions of y among the frozen leaf-pair sets that are not exposed r-sets."""
        cs = self.leaves.completions(y, snapshot=True)
        if cs.size == 0:
            return 0
        return int((~self.frozen.contains(self.codec.encode(with_vertex(y, cs)))).sum())

    def heavy_sets(self, thr: float, complete: bool = True, x_mask: np.ndarray | None = None) -> np.ndarray:
        """Codes of (r-1)-sets inside ``x_mask`` with deg_{H_i} at least ``thr``, ascending.

        Degrees only grow, so sets found heavy stay heavy and later calls
        with the same threshold only re-examine sets whose degree changed.
        With ``complete=False`` only sets inside an exposed r-set or inside a
        single leaf are considered, which skips enumerating leaf-pair products.
        """
        key = (thr, complete)
        if self._heavy_key != key:
            self._heavy_key, self._heavy = key, np.zeros(0, dtype=np.int64)
            self._heavy_recs = 0
            dirty = self.deg_keys
        else:
            dirty = np.unique(np.concatenate(self._dirty_keys)) if self._dirty_keys else self.deg_keys[:0]
        self._dirty_keys = []
        start, stop = self._heavy_recs, self.leaves.frozen_count
        if stop > start:
            fresh = np.zeros(self.cfg.n, dtype=bool)
            for verts in self.leaves.vertex_sets[start:stop]:
                fresh[verts] = True
            near = self.deg_keys[fresh[self.codec.decode(self.deg_keys, self.r - 1)].all(axis=1)]
            extra = self.leaves.product_sets(True, start) if complete else self.leaves.full_sets(True, start)
            dirty = np.union1d(dirty, np.union1d(near, extra))
        self._heavy_recs = stop
        cand = np.setdiff1d(dirty, self._heavy)
        if cand.size:
            self._heavy = np.union1d(self._heavy, cand[self._is_heavy(cand, thr)])
        out = self._heavy
        if x_mask is not None and out.size:
            out = out[x_mask[self.codec.decode(out, self.r - 1)].all(axis=1)]
        return out

    def _is_heavy(self, cand: np.ndarray, thr: float) -> np.ndarray:
        exposed = self._exposed_degrees(cand)
        sure = exposed >= thr
        if not self.leaves.active(True):
            return sure
        rest = np.flatnonzero(~sure)
        rows = self.codec.decode(cand[rest], self.r - 1)
        sure[rest] = self.leaves.degree_floor(rows) >= thr
        rest = rest[~sure[rest]]
        ub = self._marked_bound(cand[rest])
        maybe = rest[exposed[rest] + ub >= thr]
        if maybe.size:
            sure[maybe] = self.snapshot_degrees(cand[maybe]) >= thr
        return sure

    def degree(self, s: Iterable[int], snapshot: bool = False) -> int:
        """Number of exposed r-sets containing the (r-1)-set ``s`` (direct count)."""
        s = canonical(s)
        if len(s) != self.r - 1:
            raise WrongArity(f"expected an ({self.r - 1})-set, got {s}")
        others = np.setdiff1d(np.arange(self.cfg.n), np.array(s))
        return int(self.contains_rows(with_vertex(s, others), snapshot).sum())

    def appeared_edges(self) -> list[tuple[int, ...]]:
        codes = np.array(sorted(self.appeared), dtype=np.int64)
        return [tuple(map(int, row)) for row in self.codec.decode(codes, self.r)]

    def stats(self) -> dict:
        return {"round": self.round, "exposed": len(self), "coin_exposures": self.coin_exposures,
                "leaf_pairs": self.marked, "leaf_records": self.leaves.count, "appeared": len(self.appeared),
                "duplicate_events": self.duplicate_events, "phases": self.phase}


class ExposureLedger:
    """Per-round exposé hypergraphs for one pipeline run."""

    def __init__(self, cfg: ExposureConfig, on_duplicate: str = "raise"):
        if on_duplicate not in ("raise", "skip"):
            raise InvalidInput("on_duplicate must be 'raise' or 'skip'")
        self.cfg = cfg
        self.on_duplicate = on_duplicate
        self._rounds: dict[int, RoundLedger] = {}

    def round(self, rnd: int) -> RoundLedger:
        self.cfg._check_round(rnd)
        if rnd not in self._rounds:
            self._rounds[rnd] = RoundLedger(self.cfg, rnd, self.on_duplicate)
        return self._rounds[rnd]

    def expose(self, rnd: int, e: Iterable[int]) -> bool:
        ce = canonical(e)
        if len(ce) != self.cfg.r:
            raise WrongArity(f"expected an {self.cfg.r}-set, got {ce}")
        return bool(self.round(rnd).expose_rows(np.array([ce]))[0])

    def expose_at(self, rnd: int, a: Sequence[int], candidates: Iterable[int]) -> list[int]:
        """Expose every {a, c}; return the candidates whose r-set appeared."""
        cand = np.array(sorted(set(candidates)), dtype=np.int64)
        if len(a) != self.cfg.r - 1:
            raise WrongArity(f"expected an ({self.cfg.r - 1})-tuple, got {tuple(a)}")
        if cand.size == 0:
            return []
        hit = self.round(rnd).expose_rows(with_vertex(a, cand))
        return cand[hit].tolist()

    def is_exposed(self, rnd: int, e: Iterable[int]) -> bool:
        return self.round(rnd).is_exposed(e)

    def degree(self, rnd: int, s: Iterable[int], snapshot: bool = False) -> int:
        return self.round(rnd).degree(s, snapshot)

    def snapshot_phase(self, rnd: int, phase: int | None = None) -> None:
        self.round(rnd).snapshot(phase)

    @property
    def duplicate_events(self) -> int:
        return sum(rl.duplicate_events for rl in self._rounds.values())

    def stats(self) -> dict[int, dict]:
        return {k: rl.stats() for k, rl in sorted(self._rounds.items())}
