"""Seed derivation for reproducible parallel Monte Carlo.

Every stochastic routine in the package takes a root seed (an int) or an
already-derived stream. Streams are derived with numpy's SeedSequence using
the rule

    stream(root, key) = Generator(PCG64(SeedSequence(root, spawn_key=key)))

where ``key`` is a tuple of small ints identifying the replica, component,
or grid index. The same (root, key) always yields the same stream, and
distinct keys yield statistically independent streams.

Numba kernels cannot consume Generator objects, so the same SeedSequence is
also used to produce raw 4-word xoshiro256++ states (``xoshiro_state``).
"""

from __future__ import annotations

import zlib

import numpy as np

__all__ = ["stream", "xoshiro_state", "spawn_keys"]


def _coerce_key(key):
    """Spawn keys must be nonnegative ints; strings hash via crc32."""
    out = []
    for part in key:
        if isinstance(part, str):
            out.append(zlib.crc32(part.encode()))
        else:
            out.append(int(part))
    return tuple(out)


def stream(root_seed, key=()) -> np.random.Generator:
    """Return the Generator for (root_seed, key)."""
    ss = np.random.SeedSequence(root_seed, spawn_key=_coerce_key(key))
    return np.random.Generator(np.random.PCG64(ss))


def xoshiro_state(root_seed, key=()) -> np.ndarray:
    """Return a 4-word uint64 xoshiro256++ state for (root_seed, key).

    SeedSequence output is never all-zero in practice; guard anyway since an
    all-zero xoshiro state is a fixed point.
    """
    ss = np.random.SeedSequence(root_seed, spawn_key=_coerce_key(key))
    st = ss.generate_state(4, np.uint64)
    if not st.any():
        st[0] = np.uint64(0x9E3779B97F4A7C15)
    return st


def spawn_keys(n, prefix=()):
    """Keys for n parallel replicas under a common prefix."""
    return [tuple(prefix) + (i,) for i in range(n)]
