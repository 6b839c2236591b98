"""Mixed-radix integer codes for vertex sets."""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import TooLarge



class Codec:
    """Mixed-radix integer codes for ascending vertex tuples of fixed size."""

    def __init__(self, n: int, r: int):
        if n ** r >= 1 << 63:
            raise TooLarge(f"n={n}, r={r} overflows 63-bit set codes")
        self.n = n
        self.r = r
        self._weights = {k: np.array([n ** (k - 1 - i) for i in range(k)], dtype=np.int64)
                         for k in range(1, r + 1)}

    def encode(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        if rows.ndim == 1:
            rows = rows[None, :]
        if rows.shape[0] == 0:
            return np.zeros(0, dtype=np.int64)
        return rows @ self._weights[rows.shape[1]]

    def encode_one(self, s: Iterable[int]) -> int:
        code = 0
        for v in sorted(s):
            code = code * self.n + int(v)
        return code

    def decode(self, codes: np.ndarray, k: int) -> np.ndarray:
        codes = np.asarray(codes, dtype=np.int64)
        out = np.empty((codes.shape[0], k), dtype=np.int64)
        rest = codes.copy()
        for i in range(k - 1, -1, -1):
            out[:, i] = rest % self.n
            rest //= self.n
        return out

    def decode_one(self, code: int, k: int) -> tuple[int, ...]:
        out = []
        for _ in range(k):
            code, v = divmod(code, self.n)
            out.append(v)
        return tuple(reversed(out))


def with_vertex(prefix: Sequence[int], candidates: np.ndarray) -> np.ndarray:
    """Rows ``sorted(prefix + (c,))`` for every candidate ``c``."""
    cand = np.asarray(candidates, dtype=np.int64).reshape(-1, 1)
    base = np.broadcast_to(np.asarray(sorted(prefix), dtype=np.int64), (cand.shape[0], len(prefix)))
    return np.sort(np.concatenate([base, cand], axis=1), axis=1)
