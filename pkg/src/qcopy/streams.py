"""Seeded random streams for reproducible, parallelizable Monte Carlo.

Trials are grouped into fixed-size blocks and block ``b`` draws from the
stream seeded by ``(seed, b)``. Block boundaries do not depend on how many
worker processes run, so results are identical for any ``jobs`` setting.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Callable, TypeVar

import numpy as np

BLOCK_SIZE = 4096

T = TypeVar("T")


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Independent generator for the ``index``-th stream under ``seed``."""
    if seed < 0 or index < 0:
        raise ValueError("seed and stream index must be non-negative")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, index])))


def derive_seed(seed: int, *keys: int) -> int:
    """A 64-bit seed for a sub-experiment tagged by ``keys``."""
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1, np.uint64)[0])


def block_counts(trials: int, block_size: int = BLOCK_SIZE) -> list[int]:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    full, rest = divmod(trials, block_size)
    return [block_size] * full + ([rest] if rest else [])


def _run_block(fn, seed, block_size, args):
    index, count = args
    return fn(stream(seed, index), count, index * block_size)


def run_blocks(
    fn: Callable[[np.random.Generator, int, int], T],
    seed: int,
    trials: int,
    jobs: int = 1,
    block_size: int = BLOCK_SIZE,
) -> list[T]:
    """Call ``fn(rng, count, first_trial)`` per block; results in block order.

    ``fn`` must be picklable (module-level or a ``functools.partial``) when
    ``jobs > 1``.
    """
    work = list(enumerate(block_counts(trials, block_size)))
    if jobs <= 1 or len(work) == 1:
        return [_run_block(fn, seed, block_size, w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(partial(_run_block, fn, seed, block_size), work))
