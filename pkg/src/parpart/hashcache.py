"""Cache-aware hash table with tabular hashing.

The hash splits a key into one low chunk of ``low_bits`` bits that passes
through untouched and ``chunk_bits``-wide chunks that index tables of random
32-bit words, XORed together. XOR carries nothing across bit positions, so two
keys that differ only in their low bits hash into the same aligned window of
2**low_bits slots: neighboring keys probe neighboring cache lines, and one
window costs at most 2**low_bits extra collisions versus fully random hashing.

The map uses linear probing with doubling growth at load factor 0.5,
an insertion journal so clearing costs O(occupied), and -1 as the empty key.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ._rng import np_rng

__all__ = ["TabularHasher", "CacheAwareMap", "tabular_hash"]

EMPTY = -1


@njit(cache=True, nogil=True, inline="always")
def tab_hash(tables, chunk_bits, low_bits, key):
    """Jitted tabular hash; key must be a non-negative int64 within key_bits."""
    low_mask = np.int64((1 << low_bits) - 1)
    chunk_mask = np.int64((1 << chunk_bits) - 1)
    x = key >> low_bits
    h = np.int64(0)
    for i in range(len(tables)):
        h ^= tables[i, (x >> (i * chunk_bits)) & chunk_mask]
    return h ^ (key & low_mask)


class TabularHasher:
    """Seeded tabulation hash over fixed-width integer keys.

    Args:
        seed: table seed; equal seeds give identical hash functions.
        key_bits: width of supported keys (keys must fit in this many bits).
        chunk_bits: bits per table index (table size 2**chunk_bits).
        low_bits: low bits that bypass the tables entirely.
    """

    def __init__(self, seed: int = 0, key_bits: int = 25,
                 chunk_bits: int = 10, low_bits: int = 5):
        if not (0 < low_bits < key_bits <= 62):
            raise ValueError("need 0 < low_bits < key_bits <= 62")
        if chunk_bits < 1:
            raise ValueError("chunk_bits must be >= 1")
        self.key_bits = int(key_bits)
        self.chunk_bits = int(chunk_bits)
        self.low_bits = int(low_bits)
        self.n_tables = max(1, -(-(key_bits - low_bits) // chunk_bits))
        rng = np_rng(seed, 0xAB1E5)
        self.tables = rng.integers(
            0, 1 << 32, size=(self.n_tables, 1 << chunk_bits)
        ).astype(np.int64)
        self.tables.setflags(write=False)

    def hash(self, key: int) -> int:
        if not (0 <= key < (1 << self.key_bits)):
            raise ValueError(f"key {key} outside {self.key_bits}-bit range")
        return int(tab_hash(self.tables, self.chunk_bits, self.low_bits, np.int64(key)))

    def hash_array(self, keys) -> np.ndarray:
        """Vectorized hash of an int64 key array."""
        keys = np.asarray(keys, dtype=np.int64)
        if keys.size and (keys.min() < 0 or keys.max() >= (1 << self.key_bits)):
            raise ValueError("key outside key_bits range")
        x = keys >> self.low_bits
        h = np.zeros(len(keys), dtype=np.int64)
        cmask = (1 << self.chunk_bits) - 1
        for i in range(self.n_tables):
            h ^= self.tables[i][(x >> (i * self.chunk_bits)) & cmask]
        return h ^ (keys & ((1 << self.low_bits) - 1))


def tabular_hash(hasher: TabularHasher, key: int) -> int:
    return hasher.hash(key)


@njit(cache=True, nogil=True)
def _map_upsert_add(keys, vals, journal, meta, tables, chunk_bits, low_bits, key, value):
    mask = len(keys) - 1
    s = tab_hash(tables, chunk_bits, low_bits, key) & mask
    while True:
        k = keys[s]
        if k == key:
            vals[s] += value
            return s
        if k == EMPTY:
            keys[s] = key
            vals[s] = value
            journal[meta[1]] = s
            meta[1] += 1
            meta[0] += 1
            return s
        s = (s + 1) & mask


@njit(cache=True, nogil=True)
def _map_find(keys, tables, chunk_bits, low_bits, key):
    mask = len(keys) - 1
    s = tab_hash(tables, chunk_bits, low_bits, key) & mask
    while True:
        k = keys[s]
        if k == key:
            return s
        if k == EMPTY:
            return np.int64(-1)
        s = (s + 1) & mask


@njit(cache=True, nogil=True)
def _map_put(keys, vals, journal, meta, tables, chunk_bits, low_bits, key, value):
    mask = len(keys) - 1
    s = tab_hash(tables, chunk_bits, low_bits, key) & mask
    while True:
        k = keys[s]
        if k == key:
            vals[s] = value
            return s
        if k == EMPTY:
            keys[s] = key
            vals[s] = value
            journal[meta[1]] = s
            meta[1] += 1
            meta[0] += 1
            return s
        s = (s + 1) & mask


class CacheAwareMap:
    """int64 -> int64 open-addressing map keyed by the tabular hash.

    upsert combines with the stored value (addition by default); lookup
    returns None for absent keys; clear resets only journaled slots. Items
    iterate in insertion order. Load factor stays at or below one half.
    """

    def __init__(self, seed: int = 0, initial_capacity: int = 64, key_bits: int = 25):
        cap = 64
        while cap < initial_capacity:
            cap *= 2
        self.hasher = TabularHasher(seed, key_bits=key_bits)
        self._keys = np.full(cap, EMPTY, dtype=np.int64)
        self._vals = np.zeros(cap, dtype=np.int64)
        self._journal = np.zeros(cap, dtype=np.int64)
        self._meta = np.zeros(2, dtype=np.int64)  # [count, journal length]

    @property
    def capacity(self) -> int:
        return len(self._keys)

    def __len__(self) -> int:
        return int(self._meta[0])

    def _check_key(self, key: int) -> np.int64:
        if not (0 <= key < (1 << self.hasher.key_bits)):
            raise ValueError(f"key {key} outside {self.hasher.key_bits}-bit range")
        return np.int64(key)

    def _grow(self) -> None:
        items = list(self.items())
        cap = len(self._keys) * 2
        self._keys = np.full(cap, EMPTY, dtype=np.int64)
        self._vals = np.zeros(cap, dtype=np.int64)
        self._journal = np.zeros(cap, dtype=np.int64)
        self._meta[:] = 0
        h = self.hasher
        for k, v in items:
            _map_put(self._keys, self._vals, self._journal, self._meta,
                     h.tables, h.chunk_bits, h.low_bits, np.int64(k), np.int64(v))

    def _ensure_room(self) -> None:
        if 2 * (int(self._meta[0]) + 1) > len(self._keys):
            self._grow()

    def upsert(self, key: int, value: int, combine=None) -> int:
        """Insert key or combine value into it; returns the stored value."""
        key = self._check_key(key)
        self._ensure_room()
        h = self.hasher
        if combine is None:
            s = _map_upsert_add(self._keys, self._vals, self._journal, self._meta,
                                h.tables, h.chunk_bits, h.low_bits, key, np.int64(value))
        else:
            s = _map_find(self._keys, h.tables, h.chunk_bits, h.low_bits, key)
            if s < 0:
                s = _map_put(self._keys, self._vals, self._journal, self._meta,
                             h.tables, h.chunk_bits, h.low_bits, key, np.int64(value))
            else:
                self._vals[s] = np.int64(combine(int(self._vals[s]), int(value)))
        return int(self._vals[s])

    def put(self, key: int, value: int) -> None:
        """Insert or overwrite."""
        key = self._check_key(key)
        self._ensure_room()
        h = self.hasher
        _map_put(self._keys, self._vals, self._journal, self._meta,
                 h.tables, h.chunk_bits, h.low_bits, key, np.int64(value))

    def lookup(self, key: int):
        key = self._check_key(key)
        h = self.hasher
        s = _map_find(self._keys, h.tables, h.chunk_bits, h.low_bits, key)
        return None if s < 0 else int(self._vals[s])

    def clear(self) -> None:
        jl = int(self._meta[1])
        self._keys[self._journal[:jl]] = EMPTY
        self._meta[:] = 0

    def items(self):
        """(key, value) pairs in insertion order."""
        jl = int(self._meta[1])
        for s in self._journal[:jl]:
            if self._keys[s] != EMPTY:
                yield int(self._keys[s]), int(self._vals[s])
