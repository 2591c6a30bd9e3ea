"""Hierarchical random substreams.

Every stream is addressed by a root seed plus an integer key path, e.g.
``substream(seed, replicate, chunk)``.  The key path is passed to
:class:`numpy.random.SeedSequence` as its ``spawn_key``, so streams are
statistically independent and their contents never depend on the order in
which workers request them.
"""

from __future__ import annotations

import secrets

import numpy as np

SEED_MASK = (1 << 64) - 1


def check_seed(seed: int) -> int:
    seed = int(seed)
    if seed < 0 or seed > SEED_MASK:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def fresh_seed() -> int:
    """Draw a new 64-bit seed from the OS entropy pool."""
    return secrets.randbits(64)


def substream(seed: int, *key: int) -> np.random.Generator:
    """Return the generator addressed by ``(seed, *key)``."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def as_generator(gen) -> np.random.Generator:
    """Accept a Generator, an int seed or None and return a Generator."""
    if isinstance(gen, np.random.Generator):
        return gen
    return np.random.default_rng(gen)
