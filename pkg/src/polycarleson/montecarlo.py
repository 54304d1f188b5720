"""Deterministic parallel Monte Carlo batching.

A run is split into a fixed batch layout that depends only on (budget,
batch_size).  Each batch draws from its own RNG stream derived as
``SeedSequence(entropy=seed, spawn_key=(crc32(label), batch_index))``, and the
per-batch results are reduced in batch order.  Thread count therefore never
influences the output: it only schedules which batch runs when.
"""

from __future__ import annotations

import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

from .config import DEFAULTS

T = TypeVar("T")

ENV_THREADS = "POLYCARLESON_THREADS"


def resolve_threads(threads: int | None) -> int:
    """Explicit value wins; then the POLYCARLESON_THREADS env var; then 1."""
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get(ENV_THREADS)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def stream(seed: int, label: str, batch_index: int) -> np.random.Generator:
    """Independent generator for one batch: label and batch index mixed into the seed."""
    key = zlib.crc32(label.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(key, batch_index)))


def batch_layout(total: int, batch_size: int = DEFAULTS.batch_size) -> list[int]:
    """Batch sizes for a budget; depends only on (total, batch_size)."""
    if total <= 0:
        raise ValueError("sample budget must be positive")
    full, rem = divmod(total, batch_size)
    sizes = [batch_size] * full
    if rem:
        sizes.append(rem)
    return sizes


def run_batches(
    total: int,
    seed: int,
    label: str,
    worker: Callable[[np.random.Generator, int], T],
    threads: int | None = None,
    batch_size: int = DEFAULTS.batch_size,
) -> list[T]:
    """Run ``worker(rng, count)`` over the batch layout; results in batch order."""
    sizes = batch_layout(total, batch_size)
    threads = resolve_threads(threads)

    def one(idx_count):
        idx, count = idx_count
        return worker(stream(seed, label, idx), count)

    if threads == 1 or len(sizes) == 1:
        return [one(ic) for ic in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, enumerate(sizes)))


def sum_counts(results: Sequence[tuple]) -> tuple:
    """Reduce per-batch tuples of integers by exact (order-free) summation."""
    return tuple(int(sum(col)) for col in zip(*results))
