"""Deterministic, algorithm-independent random number stream.

The generators in :mod:`ostf.fields` must be reproducible bit-for-bit from a
64-bit seed, independently of any library RNG implementation.  We therefore
fix a counter-based scheme built on the splitmix64 finalizer:

    mix64(x):  x ^= x >> 30;  x *= 0xBF58476D1CE4E5B9
               x ^= x >> 27;  x *= 0x94D049BB133111EB
               x ^= x >> 31                                (mod 2**64)

    member_key(seed, m) = mix64(seed + (m + 1) * GAMMA)
    draw(key, j)        = mix64(key + (j + 1) * GAMMA)     j = 0, 1, 2, ...
    uniform(key, j)     = (draw(key, j) >> 11) * 2**-53    in [0, 1)

with GAMMA = 0x9E3779B97F4A7C15 (the golden-ratio increment).  The stream is
splittable per ensemble member and addressable by counter, so draws do not
depend on evaluation order.
"""

from __future__ import annotations

import numpy as np

GAMMA = np.uint64(0x9E3779B97F4A7C15)

_C1 = np.uint64(0xBF58476D1CE4E5B9)
_C2 = np.uint64(0x94D049BB133111EB)


def mix64(x: np.ndarray | int) -> np.ndarray:
    """splitmix64 finalizer, vectorized over uint64 arrays (wraps mod 2^64)."""
    x = np.atleast_1d(np.asarray(x, dtype=np.uint64)).copy()
    with np.errstate(over="ignore"):
        x ^= x >> np.uint64(30)
        x *= _C1
        x ^= x >> np.uint64(27)
        x *= _C2
        x ^= x >> np.uint64(31)
    return x


def member_key(seed: int, member: int) -> np.uint64:
    """Per-member sub-stream key, splittable from the root seed."""
    with np.errstate(over="ignore"):
        base = np.uint64(seed) + (np.uint64(member) + np.uint64(1)) * GAMMA
    return mix64(base)[0]


def uniforms(key: np.uint64, count: int, offset: int = 0) -> np.ndarray:
    """`count` uniforms in [0, 1) at counters offset .. offset+count-1."""
    j = np.arange(offset, offset + count, dtype=np.uint64)
    with np.errstate(over="ignore"):
        u = mix64(key + (j + np.uint64(1)) * GAMMA)
    return (u >> np.uint64(11)).astype(np.float64) * 2.0**-53
