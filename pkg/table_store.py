"""Open-addressed count table over packed int64 keys, plus its disk cache"""

import os
import sys
from typing import Tuple

import numpy as np

EMPTY = -1
GOLDEN = np.uint64(0x9E3779B97F4A7C15)
MAX_LOAD = 0.7

CACHE_MAGIC = b"VINTAB01"
HEADER_BYTES = len(CACHE_MAGIC) + 3 * 8


class PackedTable:
    """Linear-probing hash table from non-negative int64 keys to int64 counts.

    Built once from unique keys; probing and insertion are vectorized over
    whole key arrays.
    """

    def __init__(self, keys: np.ndarray, counts: np.ndarray):
        keys = np.asarray(keys, dtype=np.int64)
        counts = np.asarray(counts, dtype=np.int64)
        bits = 3
        while (1 << bits) * MAX_LOAD < max(len(keys), 1):
            bits += 1
        self.capacity = 1 << bits
        self._shift = np.uint64(64 - bits)
        self.slots = np.full(self.capacity, EMPTY, dtype=np.int64)
        self.values = np.zeros(self.capacity, dtype=np.int64)
        self.size = 0
        self._insert_unique(keys, counts)

    def __len__(self) -> int:
        return self.size

    @property
    def load_factor(self) -> float:
        return self.size / self.capacity

    def _home(self, keys: np.ndarray) -> np.ndarray:
        return ((keys.astype(np.uint64) * GOLDEN) >> self._shift).astype(np.int64)

    def _insert_unique(self, keys: np.ndarray, counts: np.ndarray) -> None:
        pending = np.arange(len(keys))
        where = self._home(keys)
        mask = self.capacity - 1
        while pending.size:
            slot = where[pending]
            free = self.slots[slot] == EMPTY
            claim = pending[free]
            # first claimant wins each free slot
            taken, first = np.unique(where[claim], return_index=True)
            winners = claim[first]
            self.slots[taken] = keys[winners]
            self.values[taken] = counts[winners]
            self.size += winners.size
            placed = np.zeros(len(keys), dtype=bool)
            placed[winners] = True
            pending = pending[~placed[pending]]
            where[pending] = (where[pending] + 1) & mask

    def lookup(self, keys: np.ndarray) -> np.ndarray:
        """Counts for each key; absent keys give 0."""
        keys = np.asarray(keys, dtype=np.int64)
        out = np.zeros(len(keys), dtype=np.int64)
        active = np.arange(len(keys))
        where = self._home(keys)
        mask = self.capacity - 1
        while active.size:
            found = self.slots[where[active]]
            hit = found == keys[active]
            out[active[hit]] = self.values[where[active[hit]]]
            active = active[~(hit | (found == EMPTY))]
            where[active] = (where[active] + 1) & mask
        return out

    def entries(self) -> Tuple[np.ndarray, np.ndarray]:
        """Stored keys and counts sorted by key."""
        used = self.slots != EMPTY
        keys = self.slots[used]
        counts = self.values[used]
        order = np.argsort(keys, kind="stable")
        return keys[order], counts[order]


def aggregate(keys: np.ndarray, weights: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Sum weights of equal keys; returns sorted unique keys and exact int64 sums."""
    if keys.size == 0:
        return keys.astype(np.int64), weights.astype(np.int64)
    order = np.argsort(keys, kind="stable")
    k = keys[order]
    w = weights[order].astype(np.int64)
    starts = np.flatnonzero(np.concatenate(([True], k[1:] != k[:-1])))
    return k[starts], np.add.reduceat(w, starts)


def cache_path(cache_dir: str, s: int, X: int) -> str:
    return os.path.join(cache_dir, f"table_s{s}_X{X}.vintab")


def save_table(path: str, s: int, X: int, keys: np.ndarray, counts: np.ndarray) -> None:
    """Write sorted (key, count) pairs behind the versioned header."""
    order = np.argsort(keys, kind="stable")
    body = np.empty((len(keys), 2), dtype="<u8")
    body[:, 0] = keys[order]
    body[:, 1] = counts[order]
    header = CACHE_MAGIC + np.array([s, X, len(keys)], dtype="<u8").tobytes()
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(body.tobytes())
    os.replace(tmp, path)


def load_table(path: str, s: int, X: int) -> Tuple[np.ndarray, np.ndarray]:
    """Read a cache file; raises ValueError when it is corrupt or for other (s, X)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < HEADER_BYTES or raw[:len(CACHE_MAGIC)] != CACHE_MAGIC:
        raise ValueError("bad magic")
    file_s, file_X, count = (int(v) for v in np.frombuffer(raw[len(CACHE_MAGIC):HEADER_BYTES], dtype="<u8"))
    if (file_s, file_X) != (s, X):
        raise ValueError(f"cache holds s={file_s}, X={file_X}")
    if len(raw) != HEADER_BYTES + 16 * count:
        raise ValueError("truncated body")
    body = np.frombuffer(raw[HEADER_BYTES:], dtype="<u8").reshape(count, 2)
    keys = body[:, 0].astype(np.int64)
    if count > 1 and np.any(keys[1:] <= keys[:-1]):
        raise ValueError("keys out of order")
    return keys, body[:, 1].astype(np.int64)


def try_load_table(path: str, s: int, X: int):
    """Best-effort cache read: None when missing or unusable."""
    if not os.path.exists(path):
        return None
    try:
        return load_table(path, s, X)
    except Exception as e:
        print(f"Cache: ignoring {path} ({e})", file=sys.stderr)
        return None
