"""Seeded random streams.

All sampling uses numpy's PCG64 bit generator seeded through a
``SeedSequence``. Work split across ``workers`` chunks draws from
``SeedSequence(seed).spawn(workers)``, so a fixed ``(seed, workers)`` pair
always reproduces the same numbers regardless of scheduling.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")


def make_rng(seed: int | np.random.SeedSequence) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def worker_streams(seed: int, workers: int) -> list[np.random.Generator]:
    if workers < 1:
        raise ValueError("workers must be >= 1")
    return [make_rng(s) for s in np.random.SeedSequence(int(seed)).spawn(workers)]


def split_count(n: int, workers: int) -> list[int]:
    """Split ``n`` into ``workers`` near-equal chunks, larger chunks first."""
    q, r = divmod(int(n), workers)
    return [q + (1 if i < r else 0) for i in range(workers)]


def run_partitioned(
    task: Callable[[np.random.Generator, int], T],
    n: int,
    seed: int,
    workers: int = 1,
) -> list[T]:
    """Run ``task(rng, n_chunk)`` on each worker chunk; results in worker order."""
    streams = worker_streams(seed, workers)
    sizes = split_count(n, workers)
    if workers == 1:
        return [task(streams[0], sizes[0])]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, streams, sizes))


def chunked(n: int, chunk: int) -> Sequence[int]:
    full, rest = divmod(n, chunk)
    return [chunk] * full + ([rest] if rest else [])


def derived_seeds(seed: int, count: int) -> list[int]:
    """Independent 64-bit integer seeds for ``count`` sub-tasks of ``seed``."""
    return [int(s.generate_state(1, np.uint64)[0]) for s in np.random.SeedSequence(int(seed)).spawn(count)]
