"""Deterministic batched Monte Carlo.

Samples are processed in fixed-size batches. Batch ``b`` draws from
``numpy.random.default_rng([seed, b])`` and batch results are always merged in
batch order, so the output depends only on ``(seed, num_samples, batch_size)``
and never on how many worker threads ran the batches.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, TypeVar

import numpy as np

from .errors import InvalidInput

T = TypeVar("T")

DEFAULT_BATCH = 1024


def batch_sizes(num_samples: int, batch_size: int) -> list[int]:
    if num_samples < 1:
        raise InvalidInput(f"need at least one sample, got {num_samples}")
    if batch_size < 1:
        raise InvalidInput(f"batch size must be positive, got {batch_size}")
    full, rest = divmod(num_samples, batch_size)
    return [batch_size] * full + ([rest] if rest else [])


def batch_rng(seed: int, index: int, *extra: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(index), *extra])


def run_batches(fn: Callable[[np.random.Generator, int], T], num_samples: int, seed: int,
                batch_size: int = DEFAULT_BATCH, threads: int = 1) -> list[T]:
    """Evaluate ``fn(rng, size)`` on every batch, returning results in batch order."""
    sizes = batch_sizes(num_samples, batch_size)
    jobs = [(batch_rng(seed, b), s) for b, s in enumerate(sizes)]
    if threads <= 1 or len(jobs) == 1:
        return [fn(rng, s) for rng, s in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


@dataclass
class RunningStats:
    """Count, mean and centred second moment, merged with Chan's update."""

    count: int = 0
    mean: np.ndarray | float = 0.0
    m2: np.ndarray | float = 0.0

    @classmethod
    def of(cls, values: np.ndarray) -> "RunningStats":
        values = np.asarray(values, dtype=float)
        mean = values.mean(axis=0)
        return cls(values.shape[0], mean, ((values - mean) ** 2).sum(axis=0))

    def merge(self, other: "RunningStats") -> "RunningStats":
        if self.count == 0:
            return other
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * (other.count / n)
        m2 = self.m2 + other.m2 + delta ** 2 * (self.count * other.count / n)
        return RunningStats(n, mean, m2)

    @property
    def stderr(self):
        if self.count < 2:
            return np.full_like(np.asarray(self.mean, dtype=float), np.nan)
        return np.sqrt(self.m2 / (self.count - 1) / self.count)


def mc_mean(stat: Callable[[np.random.Generator, int], np.ndarray], num_samples: int, seed: int,
            batch_size: int = DEFAULT_BATCH, threads: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Mean and standard error of a per-sample statistic.

    ``stat(rng, size)`` returns an array ``(size, k)`` of per-sample values.
    """
    total = RunningStats()
    for values in run_batches(lambda rng, s: RunningStats.of(stat(rng, s)), num_samples, seed,
                              batch_size, threads):
        total = total.merge(values)
    return np.asarray(total.mean, dtype=float), np.asarray(total.stderr, dtype=float)


def jackknife(estimator: Callable[[np.ndarray], np.ndarray], group_sums: np.ndarray,
              group_counts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Delete-one-group jackknife for a nonlinear function of a sample mean.

    ``group_sums[g]`` is the sum of the per-sample quantity over group ``g``;
    ``estimator`` maps a mean to the statistic. Returns the full-sample value
    and its jackknife standard error (NaN with fewer than two groups).
    """
    group_counts = np.asarray(group_counts, dtype=float)
    total = group_sums.sum(axis=0)
    n = group_counts.sum()
    full = np.asarray(estimator(total / n))
    g = len(group_counts)
    if g < 2:
        return full, np.full_like(full, np.nan, dtype=float)
    loo = np.stack([np.asarray(estimator((total - group_sums[k]) / (n - group_counts[k])))
                    for k in range(g)])
    spread = loo - loo.mean(axis=0)
    se = np.sqrt((g - 1) / g * np.array([math.fsum(col) for col in (spread ** 2).reshape(g, -1).T]))
    return full, se.reshape(full.shape)
