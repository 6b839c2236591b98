"""Connecting pairs of (r-1)-tuples by tight paths through a working set X.

Each pair gets two fans, one grown from ``u`` inside the Y-parts and one
from ``reverse(v)`` inside the Y'-parts; a leaf of each is then joined by a
freshly exposed bridge of 2(r-1) vertices. All exposures go through one
``RoundLedger`` so no r-set is flipped twice.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (BridgeFailure, InternalVerificationFailure, InvalidInput, LevelBudgetExceeded,
                     StageFailure, TuplesIntersect, WidthWindowFailure, WrongArity, XTooSmall)
from .exposure import ExposureLedger, RoundLedger, with_vertex
from .hypergraph import reverse


# ---------------------------------------------------------------------------
# configuration

@dataclass
class Thresholds:
    n: int
    xi: float
    xi_prime: float
    eta: float
    c_min: float
    c_max: float
    width: int
    caps: dict[int, float]
    max_levels: int
    truncate: bool
    temp_lower: bool
    drop_short: bool
    exact_danger: bool = True


@dataclass
class ConnectorConfig:
    """Thresholds of the fan construction; ``None`` fields take mode defaults.

    ``strict`` uses the analysis constants verbatim. ``practical`` keeps the
    algorithm but widens the |C| window, relaxes the multiplicity caps of
    small sets, truncates oversized C and drops paths with too small C
    (failing only when a whole fan dies), so runs are feasible at desk scale.
    """

    r: int
    eps: float
    delta: float = 0.5
    mode: str = "practical"
    xi: float | None = None
    xi_prime: float | None = None
    eta: float | None = None
    c_min: float | None = None
    c_max: float | None = None
    width_target: float | None = None
    mult_caps: dict[int, float] | None = None
    max_fan_levels: int | None = None
    truncate_overflow: bool | None = None
    drop_short_paths: bool | None = None
    early_exit_bridge: bool = False
    temp_danger_lower: bool | None = None
    min_part_size: int = 1

    def __post_init__(self):
        if self.mode not in ("strict", "practical"):
            raise InvalidInput(f"unknown connector mode {self.mode!r}")
        if self.r < 3:
            raise InvalidInput("connections need r >= 3")
        if not 0 < self.eps < 1:
            raise InvalidInput(f"eps={self.eps} outside (0, 1)")
        if not 0 < self.delta <= 1:
            raise InvalidInput(f"delta={self.delta} outside (0, 1]")

    @property
    def strict(self) -> bool:
        return self.mode == "strict"

    def thresholds(self, n: int) -> Thresholds:
        r, eps, delta = self.r, self.eps, self.delta
        xi_p = delta / (48 * r * r)
        xi_strict = xi_p ** r / (r * r * math.factorial(r - 1))
        eta = delta / (16 * r)
        if self.strict:
            xi, c_min, c_max = xi_strict, delta * n ** eps / (16 * r), delta * n ** eps / (2 * r)
        else:
            xi = delta / (8 * r)
            c_min, c_max = 1, max(8, math.ceil(delta * n ** eps / (2 * r)))
        xi = self.xi if self.xi is not None else xi
        xi_p = self.xi_prime if self.xi_prime is not None else xi_p
        eta = self.eta if self.eta is not None else eta
        c_min = self.c_min if self.c_min is not None else c_min
        c_max = self.c_max if self.c_max is not None else c_max
        if c_min > c_max:
            raise InvalidInput(f"empty |C| window [{c_min}, {c_max}]")
        width = self.width_target if self.width_target is not None else n ** ((r - 1) / 2 - eps / 2)
        width = max(1, math.ceil(width - 1e-9))
        caps = {}
        for j in range(1, r):
            formula = xi ** (r - j) * n ** ((r - 1) / 2 - j * (1 - eps))
            if self.strict or j >= math.ceil(r / 2):
                caps[j] = formula
            else:
                caps[j] = max(1.0, formula)
        if self.mult_caps:
            caps.update(self.mult_caps)
        levels = self.max_fan_levels if self.max_fan_levels is not None else math.ceil(4 * r / eps)
        truncate = (not self.strict) if self.truncate_overflow is None else self.truncate_overflow
        lower = self.strict if self.temp_danger_lower is None else self.temp_danger_lower
        drop = (not self.strict) if self.drop_short_paths is None else self.drop_short_paths
        return Thresholds(n, xi, xi_p, eta, c_min, c_max, width, caps, levels, truncate, lower, drop,
                          exact_danger=self.strict)

    def path_cap(self, n: int) -> int:
        """Maximum vertex count of a connecting path."""
        return 2 * (self.r - 1) + 2 * self.thresholds(n).max_levels


# ---------------------------------------------------------------------------
# small helpers

def partition_X(X: Iterable[int], r: int, seed: int, min_size: int = 1) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Random equipartition of X into Y_1..Y_2r and Y'_1..Y'_2r (each sorted)."""
    xs = np.array(sorted(set(int(x) for x in X)), dtype=np.int64)
    if xs.size < 4 * r * max(1, min_size):
        raise XTooSmall(f"|X|={xs.size} is below {4 * r * max(1, min_size)}")
    rng = np.random.default_rng([int(seed) & (2 ** 63 - 1), 0xC0FFEE])
    chunks = np.array_split(rng.permutation(xs), 4 * r)
    ys = [np.sort(chunks[2 * i]) for i in range(2 * r)]
    yps = [np.sort(chunks[2 * i + 1]) for i in range(2 * r)]
    return ys, yps


def _in_sorted(ref: np.ndarray, codes: np.ndarray) -> np.ndarray:
    if ref.size == 0 or codes.size == 0:
        return np.zeros(codes.shape[0], dtype=bool)
    idx = np.minimum(np.searchsorted(ref, codes), ref.size - 1)
    return ref[idx] == codes


def bridge_windows(x: Sequence[int], y: Sequence[int], r: int) -> list[tuple[int, ...]]:
    """The r-1 consecutive r-windows of the concatenation (x, y)."""
    seq = list(x) + list(y)
    return [tuple(sorted(seq[i:i + r])) for i in range(r - 1)]


def is_blocked(x: Sequence[int], y: Sequence[int], ledger: RoundLedger, snapshot: bool = False) -> bool:
    """True iff some r-window of (x, y) is already exposed."""
    r = ledger.r
    if len(x) != r - 1 or len(y) != r - 1:
        raise WrongArity(f"blocked pairs need two ({r - 1})-tuples")
    if set(x) & set(y):
        raise TuplesIntersect(f"{tuple(x)} and {tuple(y)} share vertices")
    rows = np.array(bridge_windows(x, y, r), dtype=np.int64)
    return bool(ledger.contains_rows(rows, snapshot).any())


def compute_danger_sets(ledger: RoundLedger, xi: float, n: int,
                        x_mask: np.ndarray | None = None, complete: bool = True) -> dict[int, np.ndarray]:
    """Dangerous j-sets (as sorted codes) from the degrees frozen at the last snapshot."""
    r, codec = ledger.r, ledger.codec
    thr = xi * n
    danger: dict[int, np.ndarray] = {}
    keys = ledger.heavy_sets(thr, complete, x_mask)
    rows = codec.decode(keys, r - 1)
    danger[r - 1] = codec.encode(rows) if rows.shape[0] else np.zeros(0, dtype=np.int64)
    for j in range(r - 2, 0, -1):
        if rows.shape[0] == 0:
            danger[j] = np.zeros(0, dtype=np.int64)
            continue
        subs = np.concatenate([codec.encode(np.delete(rows, i, axis=1)) for i in range(j + 1)])
        uniq, counts = np.unique(subs, return_counts=True)
        danger[j] = uniq[counts >= thr]
        rows = codec.decode(danger[j], j)
    return danger


class TempDanger:
    """Temporarily dangerous sets of Y' for the second fan of a phase.

    An (r-1)-set y is dangerous when at least ``xi' |L|`` leaves x make
    (x, y) blocked by H_i for some ordering of y. The top level is evaluated
    on demand; lower levels (threshold ``xi' n``) only when ``lower`` is set,
    since they need enumeration over Y'.
    """

    def __init__(self, leaves: Sequence[tuple[int, ...]], ledger: RoundLedger, xi_prime: float,
                 yprime: np.ndarray, n: int, lower: bool = False):
        self.ledger = ledger
        self.r = r = ledger.r
        self.codec = ledger.codec
        self.n = n
        self.lower = lower
        self.yprime = np.sort(np.asarray(yprime, dtype=np.int64))
        self.ymask = np.zeros(n, dtype=bool)
        self.ymask[self.yprime] = True
        self.leaves = np.array(leaves, dtype=np.int64).reshape(-1, r - 1)
        self.threshold = xi_prime * len(leaves)
        self.threshold_lower = xi_prime * n
        self.lasts = self.leaves[:, -1] if self.leaves.shape[0] else np.zeros(0, dtype=np.int64)
        self.last_mask = np.zeros(n, dtype=bool)
        self.last_mask[self.lasts] = True
        # leaves x with x + {c} in H_i, indexed by the completing vertex c in Y'
        self.by_vertex: dict[int, np.ndarray] = {}
        self.completes = np.zeros(n, dtype=bool)
        if self.leaves.shape[0] and self.yprime.size:
            codes = self.codec.encode(np.sort(self.leaves, axis=1))
            touched = ledger.snapshot_touched(codes)
            for li in np.flatnonzero(touched).tolist():
                x = tuple(sorted(self.leaves[li].tolist()))
                link = ledger.snapshot_link(x)
                cs = np.union1d(link[~np.isin(link, x)], ledger.leaves.completions(x, snapshot=True))
                for c in cs[self.ymask[cs] & ~np.isin(cs, x)].tolist():
                    self.by_vertex.setdefault(c, []).append(li)
            self.by_vertex = {c: np.array(v) for c, v in self.by_vertex.items()}
            self.completes[list(self.by_vertex)] = True
        self._vl_index = np.full(n, -1, dtype=np.int64)
        self._vl = np.zeros((len(self.by_vertex), self.leaves.shape[0]), dtype=bool)
        for i, (c, lis) in enumerate(sorted(self.by_vertex.items())):
            self._vl_index[c] = i
            self._vl[i, lis] = True
        self._lasts_order = np.argsort(self.lasts, kind="stable")
        self._lasts_sorted = self.lasts[self._lasts_order]
        self._memo: dict[tuple[int, int], bool] = {}
        self._memo_top: dict[int, bool] = {}

    def _middle_hits(self, y: tuple[int, ...]) -> np.ndarray:
        """Leaves blocked through a Q with 1 < |Q| < r-1 (only for r >= 4)."""
        r, L = self.r, self.leaves
        hit = np.zeros(L.shape[0], dtype=bool)
        for q in range(2, r - 1):
            for Q in itertools.combinations(y, q):
                suff = L[:, q - 1:]
                rows = np.sort(np.concatenate([suff, np.broadcast_to(np.array(Q), (L.shape[0], q))], axis=1), axis=1)
                hit |= self.ledger.contains_rows(rows, snapshot=True)
        return hit

    def _direct_hits(self, ys: np.ndarray, touched: np.ndarray) -> np.ndarray:
        """Leaves x with y + {last of x} in H_i, for each row y (Q = y)."""
        r, n = self.r, self.n
        ys, inv = np.unique(ys, axis=0, return_inverse=True)
        inv = inv.reshape(-1)
        hit = np.zeros(ys.shape[0], dtype=bool)
        hit[inv[np.flatnonzero(touched)]] = True
        out = np.zeros((ys.shape[0], self.leaves.shape[0]), dtype=bool)
        pending = np.flatnonzero(hit)
        while pending.size:
            sub = ys[pending]
            common = [v for v in sub[0].tolist() if (sub == v).any(axis=1).all()]
            if len(common) >= r - 2:
                z = tuple(common[:r - 2])
                group, pending = pending, pending[:0]
            else:
                # group the rows around their most common (r-2)-subset
                count: dict[tuple[int, ...], int] = {}
                for row in sub.tolist():
                    for zz in itertools.combinations(row, r - 2):
                        count[zz] = count.get(zz, 0) + 1
                z = max(count, key=lambda k: (count[k], k))
                inz = np.isin(sub, z).sum(axis=1) == r - 2
                group, pending = pending[inz], pending[~inz]
            rest = ys[group][~np.isin(ys[group], z)]
            tpos = np.full(n, -1, dtype=np.int64)
            tpos[rest] = group
            link = self.ledger.snapshot_link(z)
            pair = link[~np.isin(link, z)].reshape(-1, 2)      # the two vertices outside z
            c = np.concatenate([pair[:, 0], pair[:, 1]])
            ell = np.concatenate([pair[:, 1], pair[:, 0]])
            keep = (tpos[c] >= 0) & self.last_mask[ell]
            t, ell = tpos[c[keep]], ell[keep]
            lo = np.searchsorted(self._lasts_sorted, ell, side="left")
            cnt = np.searchsorted(self._lasts_sorted, ell, side="right") - lo
            if cnt.sum():
                offs = np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt)
                out[np.repeat(t, cnt), self._lasts_order[np.repeat(lo, cnt) + offs]] = True
        leaves = self.ledger.leaves
        if leaves.active(True):
            ub = leaves.degree_bound(ys)
            for t in np.flatnonzero(ub > 0).tolist():
                cs = leaves.completions(tuple(ys[t].tolist()), snapshot=True)
                if cs.size:
                    out[t] |= np.isin(self.lasts, cs)
        return out[inv]

    def top(self, codes: np.ndarray) -> np.ndarray:
        """Membership of (r-1)-sets (by code) in the top level."""
        r, L = self.r, self.leaves
        out = np.zeros(codes.shape[0], dtype=bool)
        if codes.size == 0 or L.shape[0] == 0:
            return out
        rows = self.codec.decode(codes, r - 1)
        inside = self.ymask[rows].all(axis=1)
        touched = np.zeros(codes.shape[0], dtype=bool)
        idx = np.flatnonzero(inside)
        touched[idx] = self.ledger.snapshot_touched(codes[idx])
        maybe = np.flatnonzero(inside & (touched | self.completes[rows].any(axis=1) | (r >= 4)))
        memo = self._memo_top
        known = np.array([memo.get(c, -1) for c in codes[maybe].tolist()], dtype=np.int64)
        todo = maybe[known < 0]
        if todo.size:
            uniq, first = np.unique(codes[todo], return_index=True)
            todo = todo[first]
            ys = rows[todo]
            blocked = self._direct_hits(ys, touched[todo])
            if self._vl.shape[0]:           # Q = {c}, suffix = all of x
                vi = self._vl_index[ys]
                for col in range(r - 1):
                    sel = vi[:, col] >= 0
                    blocked[sel] |= self._vl[vi[sel, col]]
            if r >= 4:
                for t in range(todo.size):
                    blocked[t] |= self._middle_hits(tuple(ys[t].tolist()))
            verdict = blocked.sum(axis=1) >= self.threshold
            memo.update(zip(uniq.tolist(), verdict.tolist()))
        out[maybe] = [memo[c] for c in codes[maybe].tolist()]
        if self.threshold <= 0:
            out |= inside
        return out

    def _top(self, code: int) -> bool:
        return bool(self.top(np.array([code], dtype=np.int64))[0])

    def _level(self, j: int, code: int) -> bool:
        if j == self.r - 1:
            return self._top(code)
        key = (j, code)
        if key not in self._memo:
            z = self.codec.decode_one(code, j)
            if not all(self.ymask[v] for v in z):
                self._memo[key] = False
            else:
                others = np.setdiff1d(self.yprime, np.array(z))
                codes = self.codec.encode(with_vertex(z, others))
                count = sum(1 for c in codes.tolist() if self._level(j + 1, c))
                self._memo[key] = count >= self.threshold_lower
        return self._memo[key]

    def member(self, j: int, codes: np.ndarray) -> np.ndarray:
        if j == self.r - 1:
            return self.top(codes)
        if not self.lower:
            return np.zeros(codes.shape[0], dtype=bool)
        return np.array([self._level(j, c) for c in codes.tolist()], dtype=bool)


# ---------------------------------------------------------------------------
# fans

@dataclass
class Fan:
    root: tuple[int, ...]
    paths: list[tuple[int, ...]]
    levels: int
    widths: list[int] = field(default_factory=list)
    truncations: int = 0
    dropped: int = 0

    def __post_init__(self):
        self._by_leaf: dict[tuple[int, ...], tuple[int, ...]] | None = None

    @property
    def r(self) -> int:
        return len(self.root) + 1

    @property
    def leaves(self) -> list[tuple[int, ...]]:
        return sorted(self._index())

    def _index(self) -> dict:
        if self._by_leaf is None:
            k = len(self.root)
            self._by_leaf = {}
            for p in sorted(self.paths):
                self._by_leaf.setdefault(p[-k:], p)
        return self._by_leaf

    def path_to(self, leaf: Sequence[int]) -> tuple[int, ...]:
        return self._index()[tuple(leaf)]


class _Phase:
    """Mutable state of one phase: danger sets, used-set multiplicities."""

    def __init__(self, state: "ConnectState", danger: dict[int, np.ndarray]):
        self.state = state
        self.danger = danger
        self.reset_used()

    def reset_used(self) -> None:
        self.mult1 = np.zeros(self.state.n, dtype=np.int64)
        self.multk: dict[int, dict[int, int]] = {j: {} for j in range(2, self.state.r)}

    def max_multiplicity(self) -> dict[int, int]:
        out = {1: int(self.mult1.max()) if self.mult1.size else 0}
        out.update({j: max(mk.values()) for j, mk in self.multk.items() if mk})
        return out


class ConnectState:
    """Everything a connect_all run shares across phases."""

    def __init__(self, ledger: RoundLedger, th: Thresholds, x_mask: np.ndarray,
                 used: np.ndarray, ys: list[np.ndarray], yps: list[np.ndarray]):
        self.ledger = ledger
        self.codec = ledger.codec
        self.r = ledger.r
        self.n = th.n
        self.th = th
        self.x_mask = x_mask
        self.used = used
        self.ys = ys
        self.yps = yps
        self.phase: _Phase | None = None

    def begin_phase(self, index: int) -> None:
        self.ledger.snapshot()
        danger = compute_danger_sets(self.ledger, self.th.xi, self.n, self.x_mask, self.th.exact_danger)
        self.phase = _Phase(self, danger)

    def bad_mask(self, a: tuple[int, ...], cand: np.ndarray, temp: TempDanger | None) -> np.ndarray:
        """Mask of candidates violating conditions (i)-(iii) at end tuple ``a``."""
        r, codec, ph = self.r, self.codec, self.phase
        bad = self.ledger.contains_rows(with_vertex(a, cand))
        for j in range(1, r):
            idx = np.flatnonzero(~bad)
            if idx.size == 0:
                break
            sub = cand[idx]
            prefix = a[len(a) - (j - 1):] if j > 1 else ()
            codes = codec.encode(with_vertex(prefix, sub))
            hit = _in_sorted(ph.danger.get(j, np.zeros(0, dtype=np.int64)), codes)
            if temp is not None:
                rest = np.flatnonzero(~hit)
                if rest.size:
                    hit[rest] |= temp.member(j, codes[rest])
            cap = self.th.caps[j]
            if j == 1:
                hit |= ph.mult1[sub] > cap
            elif ph.multk[j]:
                mk = ph.multk[j]
                hit |= np.array([mk.get(c, 0) > cap for c in codes.tolist()], dtype=bool)
            bad[idx[hit]] = True
        return bad

    def extend(self, path: tuple[int, ...], part: np.ndarray, temp: TempDanger | None,
               fan: Fan) -> np.ndarray:
        """One pass of the foreach body: expose at the end tuple and return C."""
        r, th, ph = self.r, self.th, self.phase
        a = path[-(r - 1):]
        cand = part[~self.used[part]]
        if cand.size:
            cand = cand[~np.isin(cand, np.array(path))]
        if cand.size:
            cand = cand[~self.bad_mask(a, cand, temp)]
        hits = self.ledger.expose_rows(with_vertex(a, cand), fresh=True) if cand.size else np.zeros(0, dtype=bool)
        C = cand[hits]
        if C.size < th.c_min and th.drop_short:
            fan.dropped += 1
            return C[:0]
        if C.size < th.c_min:
            raise WidthWindowFailure(f"|C|={C.size} below {th.c_min:.3g} at end tuple {a}",
                                     size=int(C.size), end_tuple=list(a))
        if C.size > th.c_max:
            if not th.truncate:
                raise WidthWindowFailure(f"|C|={C.size} above {th.c_max:.3g} at end tuple {a}",
                                         size=int(C.size), end_tuple=list(a))
            C = C[:int(math.floor(th.c_max))]
            fan.truncations += 1
        ph.mult1[C] += 1
        for j in range(2, r):
            prefix = a[len(a) - (j - 1):]
            mk = ph.multk[j]
            for code in self.codec.encode(with_vertex(prefix, C)).tolist():
                mk[code] = mk.get(code, 0) + 1
        return C


def grow_fan(root: Sequence[int], parts: list[np.ndarray], state: ConnectState,
             temp: TempDanger | None = None, levels: int | None = None) -> Fan:
    """Grow a fan level by level, cycling through ``parts``.

    With ``levels=None`` growth stops as soon as the fan is wide enough,
    possibly mid-level. With a fixed level count every path ends up with
    exactly that many added vertices; once a level is wide enough the
    remaining paths of that level are dropped.
    """
    th = state.th
    root = tuple(int(x) for x in root)
    state.phase.reset_used()
    fan = Fan(root, [root], 0)
    paths = [root]
    t = 0
    while True:
        if levels is None and fan.levels >= th.max_levels:
            raise LevelBudgetExceeded(f"fan at {root} needs more than {th.max_levels} levels",
                                      levels=fan.levels, width=len(paths))
        part = parts[t]
        current = sorted(paths)
        grown: list[tuple[int, ...]] = []
        for idx, p in enumerate(current):
            C = state.extend(p, part, temp, fan)
            grown.extend(p + (int(c),) for c in C.tolist())
            if levels is None:
                if len(grown) + len(current) - idx - 1 >= th.width:
                    fan.levels += 1
                    fan.paths = grown + current[idx + 1:]
                    fan.widths.append(len(fan.paths))
                    return fan
            elif len(grown) >= th.width:
                break
        if not grown:
            raise WidthWindowFailure(f"every path of the fan at {root} died at level {fan.levels + 1}",
                                     levels=fan.levels, dropped=fan.dropped)
        paths = grown
        fan.levels += 1
        fan.widths.append(len(paths))
        fan.paths = paths
        if levels is not None and fan.levels >= levels:
            return fan
        t = (t + 1) % len(parts)


# ---------------------------------------------------------------------------
# bridges

def find_bridge(leaves_u: np.ndarray, leaves_v_rev: np.ndarray, ledger: RoundLedger,
                early_exit: bool = False, chunk: int | None = None) -> tuple[int | None, int | None, dict]:
    """Expose the windows of unblocked leaf pairs and pick the first appearing pair.

    Pairs are scanned in lexicographic (u-leaf, v-leaf) order; blocking is
    judged against H as it was when the search started.
    """
    r, codec = ledger.r, ledger.codec
    nu, nv = leaves_u.shape[0], leaves_v_rev.shape[0]
    total = nu * nv
    chunk = chunk or (4096 if early_exit else 65536)
    step_codes = np.zeros(0, dtype=np.int64)
    step_coins = np.zeros(0, dtype=bool)
    found: tuple[int, int] | None = None
    unblocked = 0
    exposed = 0
    for start in range(0, total, chunk):
        k = np.arange(start, min(total, start + chunk))
        I, J = k // nv, k % nv
        seq = np.concatenate([leaves_u[I], leaves_v_rev[J]], axis=1)
        wcodes = np.stack([codec.encode(np.sort(seq[:, w:w + r], axis=1)) for w in range(r - 1)], axis=1)
        flat = wcodes.ravel()
        in_step = _in_sorted(step_codes, flat)
        prior = ledger.contains_codes(flat) & ~in_step
        ok = ~prior.reshape(wcodes.shape).any(axis=1)
        unblocked += int(ok.sum())
        if ok.any():
            cand = np.unique(wcodes[ok].ravel())
            new = cand[~_in_sorted(step_codes, cand)]
            if new.size:
                coins = ledger.expose_rows(codec.decode(new, r))
                exposed += int(new.size)
                merged = np.concatenate([step_codes, new])
                order = np.argsort(merged, kind="stable")
                step_codes = merged[order]
                step_coins = np.concatenate([step_coins, coins])[order]
            pos = np.searchsorted(step_codes, wcodes[ok])
            appear = step_coins[pos].all(axis=1)
            if appear.any() and found is None:
                first = int(np.flatnonzero(ok)[np.argmax(appear)])
                found = (int(I[first]), int(J[first]))
                if early_exit:
                    break
    stats = {"pairs": total, "unblocked": unblocked, "bridge_exposures": exposed}
    if found is None:
        return None, None, stats
    return found[0], found[1], stats


def connect_pair(fan_u: Fan, fan_v: Fan, ledger: RoundLedger,
                 early_exit: bool = False) -> tuple[list[int], dict]:
    """Join the two fans by a bridge; ``fan_v`` is rooted at the reversed target tuple."""
    lu = fan_u.leaves
    lv = sorted(reverse(y) for y in fan_v.leaves)
    Lu = np.array(lu, dtype=np.int64).reshape(-1, ledger.r - 1)
    Lv = np.array(lv, dtype=np.int64).reshape(-1, ledger.r - 1)
    i, j, stats = find_bridge(Lu, Lv, ledger, early_exit=early_exit)
    if i is None:
        raise BridgeFailure("no leaf pair bridge appeared", **stats)
    pu = fan_u.path_to(lu[i])
    pv = fan_v.path_to(reverse(lv[j]))
    stats["marked"] = ledger.mark_leaf_pairs(Lu, np.array([reverse(y) for y in lv], dtype=np.int64))
    return list(pu) + list(reversed(pv)), stats


# ---------------------------------------------------------------------------
# many pairs

@dataclass
class ConnectionRequest:
    pairs: list[tuple[tuple[int, ...], tuple[int, ...]]]
    X: frozenset[int]
    round: int = 2
    target_lengths: list[int] | None = None

    def __post_init__(self):
        self.pairs = [(tuple(int(x) for x in u), tuple(int(x) for x in v)) for u, v in self.pairs]
        self.X = frozenset(int(x) for x in self.X)


@dataclass
class ConnectionResult:
    paths: list[list[int]]
    phases: list[dict]
    failure: StageFailure | None = None
    diagnostics: list[str] = field(default_factory=list)

    @property
    def success(self) -> bool:
        return self.failure is None

    def as_dict(self) -> dict:
        out = {"success": self.success, "paths": self.paths, "phases": self.phases,
               "diagnostics": self.diagnostics}
        if self.failure is not None:
            out["failure"] = {"stage": self.failure.stage, "phase": self.failure.phase,
                              "message": str(self.failure), "details": self.failure.details}
        return out


def _validate(request: ConnectionRequest, r: int, n: int) -> None:
    seen: set[int] = set()
    for u, v in request.pairs:
        for t in (u, v):
            if len(t) != r - 1:
                raise WrongArity(f"tuple {t} does not have {r - 1} vertices")
            if len(set(t)) != len(t):
                raise TuplesIntersect(f"tuple {t} repeats a vertex")
            for x in t:
                if not 0 <= x < n:
                    raise InvalidInput(f"vertex {x} outside [0, {n})")
            if seen & set(t):
                raise TuplesIntersect(f"tuple {t} meets another requested tuple")
            seen |= set(t)
    if request.target_lengths is not None:
        if len(request.target_lengths) != len(request.pairs):
            raise InvalidInput("one target length per pair is required")
        for length in request.target_lengths:
            if length < 2 * (r - 1) + 2:
                raise InvalidInput(f"target length {length} is below {2 * (r - 1) + 2}")


def check_paths(request: ConnectionRequest, paths: list[list[int]], r: int,
                cap: int | None = None) -> list[str]:
    """Structural contract violations of a connection result (empty when fine)."""
    problems = []
    tuple_vertices = {x for u, v in request.pairs for x in (*u, *v)}
    interiors: set[int] = set()
    for i, ((u, v), p) in enumerate(zip(request.pairs, paths)):
        if tuple(p[:r - 1]) != u or tuple(p[-(r - 1):]) != v:
            problems.append(f"path {i} has wrong end tuples")
        if len(set(p)) != len(p):
            problems.append(f"path {i} repeats a vertex")
        inner = set(p[r - 1:len(p) - (r - 1)])
        if not inner <= request.X or inner & tuple_vertices:
            problems.append(f"path {i} leaves X")
        if inner & interiors:
            problems.append(f"path {i} meets an earlier path")
        interiors |= inner
        if cap is not None and len(p) > cap:
            problems.append(f"path {i} has {len(p)} vertices, above the cap {cap}")
        if request.target_lengths is not None and len(p) != request.target_lengths[i]:
            problems.append(f"path {i} has {len(p)} vertices, not {request.target_lengths[i]}")
    return problems


def connect_all(request: ConnectionRequest, ledger: ExposureLedger | RoundLedger, cfg: ConnectorConfig,
                seed: int = 0, raise_on_failure: bool = False) -> ConnectionResult:
    """Connect every requested pair; failures are reported (or raised) with their phase."""
    rl = ledger.round(request.round) if isinstance(ledger, ExposureLedger) else ledger
    n, r = rl.cfg.n, rl.r
    if r != cfg.r:
        raise InvalidInput(f"connector configured for r={cfg.r}, ledger has r={r}")
    _validate(request, r, n)
    k = len(request.pairs)
    if k == 0:
        return ConnectionResult([], [])
    th = cfg.thresholds(n)
    if cfg.strict and k > th.eta * n:
        raise InvalidInput(f"k={k} pairs exceed eta*n={th.eta * n:.3g}")
    ys, yps = partition_X(request.X, r, seed, cfg.min_part_size)
    x_mask = np.zeros(n, dtype=bool)
    x_mask[list(request.X)] = True
    used = np.zeros(n, dtype=bool)
    for u, v in request.pairs:
        used[list(u) + list(v)] = True
    state = ConnectState(rl, th, x_mask, used, ys, yps)
    yprime = np.concatenate(yps)
    paths: list[list[int]] = []
    phases: list[dict] = []
    diagnostics: list[str] = []
    result = ConnectionResult(paths, phases, None, diagnostics)
    for i, (u, v) in enumerate(request.pairs):
        info: dict = {"phase": i}
        phases.append(info)
        before = len(rl)
        try:
            state.begin_phase(i)
            info["danger_sizes"] = {j: int(d.size) for j, d in state.phase.danger.items()}
            lev_u = lev_v = None
            if request.target_lengths is not None:
                inner = request.target_lengths[i] - 2 * (r - 1)
                lev_u, lev_v = inner // 2, inner - inner // 2
            fan_u = grow_fan(u, ys, state, None, lev_u)
            info["fan_u"] = {"levels": fan_u.levels, "width": len(fan_u.paths), "truncations": fan_u.truncations, "dropped": fan_u.dropped}
            temp = TempDanger(fan_u.leaves, rl, th.xi_prime, yprime, n, th.temp_lower)
            fan_v = grow_fan(reverse(v), yps, state, temp, lev_v)
            info["fan_v"] = {"levels": fan_v.levels, "width": len(fan_v.paths), "truncations": fan_v.truncations, "dropped": fan_v.dropped}
            path, bstats = connect_pair(fan_u, fan_v, rl, cfg.early_exit_bridge)
            info.update(bstats)
        except StageFailure as exc:
            exc.phase = i
            info["failure"] = exc.stage
            info["exposed"] = len(rl) - before
            result.failure = exc
            if raise_on_failure:
                raise
            return result
        info["exposed"] = len(rl) - before
        info["length"] = len(path)
        paths.append(path)
        used[path] = True
        if cfg.strict:
            bound = 2 ** (2 * r + 1) * (i + 1) * n ** (r - 1 - cfg.eps / 2)
            if len(rl) > bound:
                diagnostics.append(f"phase {i}: {len(rl)} exposed r-sets exceed the bound {bound:.3g}")
    problems = check_paths(request, paths, r, cap=None if request.target_lengths else cfg.path_cap(n))
    if problems:
        raise InternalVerificationFailure("; ".join(problems))
    return result
