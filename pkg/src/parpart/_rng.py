"""Deterministic seeding helpers.

Every randomized stage derives its stream from (seed, tags...) with splitmix64,
so a fixed seed pins the whole pipeline regardless of how work is chunked.
The same mixing function exists as a jitted twin for use inside kernels.
"""

import numpy as np
from numba import njit

_GAMMA = 0x9E3779B97F4A7C15
_MASK = 0xFFFFFFFFFFFFFFFF

# stream tags for the pipeline stages
TAG_COARSEN = 0x11
TAG_INIT = 0x22
TAG_REFINE = 0x33
TAG_MLS = 0x44
TAG_SHUFFLE = 0x55


def mix(seed: int, *tags: int) -> int:
    """Derive a new 64-bit seed from seed and a tag sequence (splitmix64 chain)."""
    z = seed & _MASK
    for t in tags:
        z = (z + _GAMMA + (t & _MASK)) & _MASK
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        z = z ^ (z >> 31)
    return z


def np_rng(seed: int, *tags: int) -> np.random.Generator:
    return np.random.default_rng(mix(seed, *tags))


@njit(cache=True, nogil=True, inline="always")
def mix2(a, b):
    """Jitted splitmix64 step combining two uint64 values into one."""
    z = np.uint64(a) + np.uint64(0x9E3779B97F4A7C15) + np.uint64(b)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True, nogil=True, inline="always")
def next_u64(state):
    """Advance a splitmix64 state; returns (new_state, value)."""
    s = np.uint64(state) + np.uint64(0x9E3779B97F4A7C15)
    z = s
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return s, z ^ (z >> np.uint64(31))


@njit(cache=True, nogil=True, inline="always")
def next_below(state, n):
    """Advance state and draw a uniform integer in [0, n)."""
    state, v = next_u64(state)
    return state, np.int64(v % np.uint64(n))
