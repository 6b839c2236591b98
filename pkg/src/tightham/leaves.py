"""Implicit storage of the r-sets spanned by connected leaf pairs.

Connecting a u-fan to a v-fan adds every r-subset of x ∪ y to H, for every
u-leaf x and v-leaf y. Such an r-set splits into an m-subset of a u-leaf and
an (r-m)-subset of a v-leaf of the same connection, so it is enough to keep,
for every subset of a leaf, the set of connections (one bit each) it came
from.
"""
from __future__ import annotations

import itertools

import numpy as np

from .codes import Codec, with_vertex


def subset_rows(rows: np.ndarray, m: int) -> np.ndarray:
    """All sorted m-subsets of the given rows, deduplicated."""
    rows = np.asarray(rows, dtype=np.int64)
    subs = [np.sort(rows[:, list(c)], axis=1) for c in itertools.combinations(range(rows.shape[1]), m)]
    return np.unique(np.concatenate(subs), axis=0)


class _BitTable:
    """Sorted set codes, each with a bitmask of the records containing it."""

    def __init__(self):
        self.keys = np.zeros(0, dtype=np.int64)
        self.bits = np.zeros((0, 1), dtype=np.uint64)

    def widen(self, words: int) -> None:
        if self.bits.shape[1] < words:
            pad = np.zeros((self.bits.shape[0], words - self.bits.shape[1]), dtype=np.uint64)
            self.bits = np.concatenate([self.bits, pad], axis=1)

    def add(self, codes: np.ndarray, k: int) -> None:
        word, bit = divmod(k, 64)
        merged = np.union1d(self.keys, codes)
        bits = np.zeros((merged.size, self.bits.shape[1]), dtype=np.uint64)
        bits[np.searchsorted(merged, self.keys)] = self.bits
        bits[np.searchsorted(merged, codes), word] |= np.uint64(1 << bit)
        self.keys, self.bits = merged, bits

    def lookup(self, codes: np.ndarray) -> np.ndarray:
        out = np.zeros((codes.shape[0], self.bits.shape[1]), dtype=np.uint64)
        if self.keys.size and codes.size:
            idx = np.minimum(np.searchsorted(self.keys, codes), self.keys.size - 1)
            found = self.keys[idx] == codes
            out[found] = self.bits[idx[found]]
        return out

    def members(self, sel: np.ndarray) -> np.ndarray:
        return self.keys[(self.bits & sel).any(axis=1)]


class LeafIndex:
    """The union over all recorded connections of their leaf-pair r-sets."""

    def __init__(self, codec: Codec, n: int):
        self.codec = codec
        self.r = r = codec.r
        self.n = n
        self.count = 0
        self.frozen_count = 0
        self.words = 1
        self.pairs = 0
        self.u = {m: _BitTable() for m in range(1, r)}
        self.v = {m: _BitTable() for m in range(1, r)}
        self.sizes: list[tuple[int, int]] = []
        self.vertex_sets: list[np.ndarray] = []
        self.mask = np.zeros(n, dtype=bool)
        self.mask_frozen = np.zeros(n, dtype=bool)
        self._ext_cache: dict[tuple[str, int], tuple[np.ndarray, np.ndarray, np.ndarray]] = {}

    # building -------------------------------------------------------------
    def add(self, leaves_u: np.ndarray, leaves_v: np.ndarray) -> int:
        k = self.count
        self.count += 1
        if self.count > 64 * self.words:
            self.words += 1
            for table in (*self.u.values(), *self.v.values()):
                table.widen(self.words)
        for side, leaves in ((self.u, leaves_u), (self.v, leaves_v)):
            for m in range(1, self.r):
                side[m].add(self.codec.encode(subset_rows(leaves, m)), k)
        verts_u, verts_v = np.unique(leaves_u), np.unique(leaves_v)
        self.sizes.append((verts_u.size, verts_v.size))
        self.vertex_sets.append(np.union1d(verts_u, verts_v))
        self.mask[verts_u] = True
        self.mask[verts_v] = True
        self._ext_cache = {}
        pairs = int(leaves_u.shape[0]) * int(leaves_v.shape[0])
        self.pairs += pairs
        return pairs

    def freeze(self) -> None:
        self.frozen_count = self.count
        self.mask_frozen = self.mask.copy()

    def active(self, snapshot: bool) -> bool:
        return (self.frozen_count if snapshot else self.count) > 0

    def _sel(self, snapshot: bool) -> np.ndarray:
        limit = self.frozen_count if snapshot else self.count
        sel = np.zeros(self.words, dtype=np.uint64)
        for w in range(self.words):
            bits = min(64, max(0, limit - 64 * w))
            sel[w] = np.uint64((1 << bits) - 1) if bits < 64 else np.uint64(2 ** 64 - 1)
        return sel

    def _vmask(self, snapshot: bool) -> np.ndarray:
        return self.mask_frozen if snapshot else self.mask

    def _ext_table(self, side: str, sz: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """CSR map from an sz-set S to the vertices c with S + c inside a leaf of ``side``."""
        key = (side, sz)
        if key not in self._ext_cache:
            codec = self.codec
            rows = codec.decode((self.u if side == "u" else self.v)[sz + 1].keys, sz + 1)
            keys = np.concatenate([codec.encode(np.delete(rows, i, axis=1)) for i in range(sz + 1)])
            vals = np.concatenate([rows[:, i] for i in range(sz + 1)])
            order = np.lexsort((vals, keys))
            keys, vals = keys[order], vals[order]
            uniq, starts = np.unique(keys, return_index=True)
            self._ext_cache[key] = (uniq, np.append(starts, keys.size), vals)
        return self._ext_cache[key]

    def _ext_size(self, side: str, sz: int, codes: np.ndarray) -> np.ndarray:
        uniq, bounds, _ = self._ext_table(side, sz)
        if uniq.size == 0:
            return np.zeros(codes.shape[0], dtype=np.int64)
        idx = np.minimum(np.searchsorted(uniq, codes), uniq.size - 1)
        return np.where(uniq[idx] == codes, bounds[idx + 1] - bounds[idx], 0)

    def _ext(self, side: str, sz: int, code: int) -> np.ndarray:
        uniq, bounds, vals = self._ext_table(side, sz)
        i = int(np.searchsorted(uniq, code))
        if i < uniq.size and uniq[i] == code:
            return vals[bounds[i]:bounds[i + 1]]
        return vals[:0]

    def _splits(self, k: int):
        for bits in range(1 << k):
            yield ([i for i in range(k) if bits >> i & 1],
                   [i for i in range(k) if not bits >> i & 1])

    # queries --------------------------------------------------------------
    def contains_rows(self, rows: np.ndarray, snapshot: bool = False) -> np.ndarray:
        """Membership of sorted r-rows."""
        r, enc = self.r, self.codec.encode
        out = np.zeros(rows.shape[0], dtype=bool)
        if not self.active(snapshot) or rows.shape[0] == 0:
            return out
        sel = self._sel(snapshot)
        idx = np.flatnonzero(self._vmask(snapshot)[rows].all(axis=1))
        for S, T in self._splits(r):
            if not S or not T or idx.size == 0:
                continue
            sub = rows[idx]
            both = self.u[len(S)].lookup(enc(sub[:, S])) & self.v[len(T)].lookup(enc(sub[:, T])) & sel
            got = both.any(axis=1)
            out[idx[got]] = True
            idx = idx[~got]
        return out

    def completions(self, y: tuple[int, ...], snapshot: bool = True) -> np.ndarray:
        """Sorted vertices c outside y with y + c a recorded r-set."""
        r, enc = self.r, self.codec.encode
        if not self.active(snapshot) or not self._vmask(snapshot)[list(y)].all():
            return np.zeros(0, dtype=np.int64)
        sel = self._sel(snapshot)
        y_arr = np.array(y, dtype=np.int64)
        out = []
        for S, T in self._splits(r - 1):
            S, T = y_arr[S], y_arr[T]
            if S.size == 0:
                b = self.v[r - 1].lookup(enc(T[None, :]))[0] & sel
                if b.any():
                    out.append(self.u[1].members(b))
            elif T.size == 0:
                b = self.u[r - 1].lookup(enc(S[None, :]))[0] & sel
                if b.any():
                    out.append(self.v[1].members(b))
            else:
                for side, A, B, other in (("u", S, T, self.v), ("v", T, S, self.u)):
                    own = self.u if side == "u" else self.v
                    b = other[B.size].lookup(enc(B[None, :]))[0] & sel
                    if not b.any():
                        continue
                    cs = self._ext(side, A.size, int(enc(A[None, :])[0]))
                    if cs.size:
                        hit = (own[A.size + 1].lookup(enc(with_vertex(tuple(A.tolist()), cs))) & b).any(axis=1)
                        out.append(cs[hit])
        if not out:
            return np.zeros(0, dtype=np.int64)
        return np.setdiff1d(np.concatenate(out), y_arr)

    def degree_bound(self, rows: np.ndarray, snapshot: bool = True) -> np.ndarray:
        """Upper bound on the number of completions of sorted (r-1)-rows."""
        r, enc = self.r, self.codec.encode
        ub = np.zeros(rows.shape[0], dtype=np.int64)
        if not self.active(snapshot) or rows.shape[0] == 0:
            return ub
        sel = self._sel(snapshot)
        idx = np.flatnonzero(self._vmask(snapshot)[rows].all(axis=1))
        if idx.size == 0:
            return ub
        sub = rows[idx]
        acc = np.zeros(idx.size, dtype=np.int64)
        for S, T in self._splits(r - 1):
            if not S:
                acc += (self.v[r - 1].lookup(enc(sub)) & sel).any(axis=1) * self.u[1].members(sel).size
            elif not T:
                acc += (self.u[r - 1].lookup(enc(sub)) & sel).any(axis=1) * self.v[1].members(sel).size
            else:
                cs, ct = enc(sub[:, S]), enc(sub[:, T])
                acc += (self.v[len(T)].lookup(ct) & sel).any(axis=1) * self._ext_size("u", len(S), cs)
                acc += (self.u[len(S)].lookup(cs) & sel).any(axis=1) * self._ext_size("v", len(T), ct)
        ub[idx] = acc
        return ub

    def degree_floor(self, rows: np.ndarray, snapshot: bool = True) -> np.ndarray:
        """Lower bound from (r-1)-sets lying inside a single leaf."""
        r = self.r
        lo = np.zeros(rows.shape[0], dtype=np.int64)
        if not self.active(snapshot) or rows.shape[0] == 0:
            return lo
        limit = self.frozen_count if snapshot else self.count
        codes = self.codec.encode(rows)
        for table, which in ((self.v[r - 1], 0), (self.u[r - 1], 1)):
            b = table.lookup(codes)
            rows_hit = np.flatnonzero(b.any(axis=1))
            if rows_hit.size == 0:
                continue
            b = b[rows_hit]
            best = np.zeros(rows_hit.size, dtype=np.int64)
            for k in range(limit):
                has = (b[:, k // 64] >> np.uint64(k % 64)) & np.uint64(1)
                best = np.maximum(best, has.astype(np.int64) * self.sizes[k][which])
            lo[rows_hit] = np.maximum(lo[rows_hit], best - (r - 1))
        return lo

    def _range_sel(self, start: int, stop: int) -> np.ndarray:
        sel = np.zeros(self.words, dtype=np.uint64)
        for k in range(start, stop):
            sel[k // 64] |= np.uint64(1 << (k % 64))
        return sel

    def full_sets(self, snapshot: bool = True, start: int = 0) -> np.ndarray:
        """Codes of (r-1)-sets lying inside a single leaf of record ``start`` onwards."""
        sel = self._range_sel(start, self.frozen_count if snapshot else self.count)
        return np.union1d(self.u[self.r - 1].members(sel), self.v[self.r - 1].members(sel))

    def product_sets(self, snapshot: bool = True, start: int = 0) -> np.ndarray:
        """Codes of every (r-1)-set with a completion in record ``start`` onwards."""
        r, codec = self.r, self.codec
        out = [self.full_sets(snapshot, start)]
        limit = self.frozen_count if snapshot else self.count
        for k in range(start, limit):
            sel = np.zeros(self.words, dtype=np.uint64)
            sel[k // 64] = np.uint64(1 << (k % 64))
            for sz in range(1, r - 1):
                A = codec.decode(self.u[sz].members(sel), sz)
                B = codec.decode(self.v[r - 1 - sz].members(sel), r - 1 - sz)
                if A.shape[0] and B.shape[0]:
                    rows = np.concatenate([np.repeat(A, B.shape[0], axis=0), np.tile(B, (A.shape[0], 1))], axis=1)
                    rows = rows[(rows[:, :sz, None] != rows[:, None, sz:]).all(axis=(1, 2))]
                    out.append(codec.encode(np.sort(rows, axis=1)))
        return np.unique(np.concatenate(out))
