"""Per-replicate random streams.

Every replicate gets its own counter-based generator (Philox) keyed on
``(master_seed, replicate_index)``, so a replicate's draws do not depend on
how replicates are scheduled across threads.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")


def replicate_seed(master_seed: int, index: int, stream: int | None = None) -> int:
    """64-bit seed identifying replicate ``index`` of a run.

    ``stream`` separates independent families of replicates (e.g. one per
    method) under the same master seed.
    """
    key = [int(master_seed), int(index)] if stream is None else [int(master_seed), int(stream), int(index)]
    ss = np.random.SeedSequence(key)
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def replicate_rng(master_seed: int, index: int, stream: int | None = None) -> tuple[np.random.Generator, int]:
    seed = replicate_seed(master_seed, index, stream)
    return np.random.Generator(np.random.Philox(seed)), seed


def thread_count(default: int = 1) -> int:
    raw = os.environ.get("DEBIAS_THREADS")
    if not raw:
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        return default


def map_replicates(
    fn: Callable[[int, np.random.Generator, int], T],
    n: int,
    master_seed: int,
    threads: int | None = None,
    stream: int | None = None,
) -> list[T]:
    """Evaluate ``fn(index, rng, seed)`` for ``index in range(n)``.

    Results come back ordered by replicate index whatever the thread count.
    """
    threads = thread_count() if threads is None else max(1, threads)

    def run(i: int) -> T:
        rng, seed = replicate_rng(master_seed, i, stream)
        return fn(i, rng, seed)

    if threads == 1 or n < 2:
        return [run(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, range(n)))


def standard_error(values: Sequence[float] | np.ndarray) -> float:
    x = np.asarray(values, dtype=float)
    if x.size < 2:
        return float("nan")
    return float(np.std(x, ddof=1) / np.sqrt(x.size))
