"""Seed-stream derivation and an order-preserving process map.

Every independent unit of work (bootstrap replicate, simulation replicate)
gets its own stream keyed by its index, so results do not depend on how
work is split across processes.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

import numpy as np


def seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def child_sequence(seed, *key: int) -> np.random.SeedSequence:
    ss = seed_sequence(seed)
    return np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + tuple(int(k) for k in key))


def child_rng(seed, *key: int) -> np.random.Generator:
    return np.random.default_rng(child_sequence(seed, *key))


def chunked(items: list, n_chunks: int) -> list[list]:
    n_chunks = max(1, min(n_chunks, len(items)))
    size, extra = divmod(len(items), n_chunks)
    out, start = [], 0
    for i in range(n_chunks):
        stop = start + size + (1 if i < extra else 0)
        out.append(items[start:stop])
        start = stop
    return out


def map_chunks(fn, chunks: list, threads: int = 1) -> list:
    """``[fn(c) for c in chunks]``, run in worker processes when ``threads > 1``."""
    if threads <= 1 or len(chunks) <= 1:
        return [fn(c) for c in chunks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, chunks))
