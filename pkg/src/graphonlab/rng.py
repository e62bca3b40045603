"""Seeded RNG streams and deterministic chunked Monte Carlo.

Reproducibility contract: a (seed, stream) pair defines every draw
bit-for-bit. Parallel estimators split their sample budget into
fixed-size chunks, one stream per chunk, so the merged result does not
depend on the number of worker threads.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

CHUNK = 32768

T = TypeVar("T")


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Generator for stream `index` of `seed`; same pair, same bits."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def thread_count(explicit: int | None = None) -> int:
    """Resolve a thread cap: explicit flag, else GRAPHONLAB_THREADS, else 1."""
    if explicit is not None:
        if explicit < 1:
            raise ValueError("thread count must be >= 1")
        return explicit
    env = os.environ.get("GRAPHONLAB_THREADS")
    return max(1, int(env)) if env else 1


def chunk_sizes(total: int, chunk: int = CHUNK) -> list[int]:
    sizes = [chunk] * (total // chunk)
    if total % chunk:
        sizes.append(total % chunk)
    return sizes


def run_chunked(
    fn: Callable[[int, int, np.random.Generator], T],
    total: int,
    seed: int,
    threads: int = 1,
    chunk: int = CHUNK,
    stream_base: int = 0,
) -> list[T]:
    """Run fn(chunk_index, count, rng) over fixed chunks; results in chunk order.

    The chunk layout depends only on `total`, never on `threads`, so any
    thread count produces identical results. `stream_base` offsets the
    stream indices so independent estimators never share a stream.
    """
    sizes = chunk_sizes(total, chunk)
    jobs = [(i, count) for i, count in enumerate(sizes)]
    if threads <= 1 or len(jobs) <= 1:
        return [fn(i, count, stream(seed, stream_base + i)) for i, count in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(fn, i, count, stream(seed, stream_base + i)) for i, count in jobs]
        return [f.result() for f in futures]


def merge_means(partials: Sequence[tuple[int, float]]) -> float:
    """Count-weighted average of per-chunk (count, mean) pairs."""
    total = sum(c for c, _ in partials)
    if total == 0:
        return 0.0
    return sum(c * m for c, m in partials) / total
