"""Reproducible chunked Monte-Carlo.

Samples are split into fixed-size chunks; chunk ``k`` draws from its own
Philox stream keyed by ``(seed, k)``. Chunks are reduced in index order, so
results depend only on ``(seed, samples, chunk_size)``, never on the number
of worker threads.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

import numpy as np

CHUNK_SIZE = 1 << 16
T = TypeVar("T")


def substream(seed: int, index: int) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), int(index)])
    return np.random.Generator(np.random.Philox(ss))


def chunked(fn: Callable[[np.random.Generator, int], T], samples: int, seed: int,
            threads: int = 1, chunk_size: int = CHUNK_SIZE) -> list[T]:
    """Run ``fn(rng, n)`` over all chunks; results in chunk order."""
    sizes = [chunk_size] * (samples // chunk_size)
    if samples % chunk_size:
        sizes.append(samples % chunk_size)

    def job(k: int) -> T:
        return fn(substream(seed, k), sizes[k])

    if threads <= 1:
        return [job(k) for k in range(len(sizes))]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(job, range(len(sizes))))


def hit_fraction(inside: Callable[[np.ndarray], np.ndarray], lower: np.ndarray, upper: np.ndarray,
                 samples: int, seed: int, threads: int = 1) -> tuple[float, float]:
    """Fraction of uniform box samples for which ``inside`` holds, with its standard error."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)

    def count(rng, n):
        x = lower + (upper - lower) * rng.random((n, lower.size))
        return int(np.count_nonzero(inside(x)))

    hits = sum(chunked(count, samples, seed, threads))
    p = hits / samples
    return p, float(np.sqrt(max(p * (1 - p), 0.0) / samples))


def box_volume_estimate(inside, lower, upper, samples: int, seed: int,
                        threads: int = 1) -> tuple[float, float]:
    """Rejection estimate of a volume inside a box: ``(estimate, standard_error)``."""
    vol = float(np.prod(np.asarray(upper, float) - np.asarray(lower, float)))
    p, se = hit_fraction(inside, lower, upper, samples, seed, threads)
    return vol * p, vol * se
