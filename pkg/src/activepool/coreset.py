"""Coreset-based diversity strategies: greedy k-center and lightweight sampling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import SelectionError
from .geometry import Metric, distances_to_point
from .pool import Pool, SelectionBatch
from .rng import RngStream


@dataclass
class CoresetSamplingWeights:
    """Sampling distribution over the pool's unlabeled indices."""

    indices: np.ndarray  # sorted unlabeled pool indices
    q: np.ndarray  # probabilities aligned with indices

    def __post_init__(self) -> None:
        if np.any(self.q < 0):
            raise ValueError("sampling weights must be non-negative")
        if abs(float(self.q.sum()) - 1.0) > 1e-9:
            raise ValueError("sampling weights must sum to 1")


def update_min_distances(
    embeddings: np.ndarray,
    cache: np.ndarray,
    center: int,
    metric: Metric,
) -> np.ndarray:
    """Fold one new center into a min-distance-to-centers cache (in place)."""
    d = distances_to_point(embeddings, embeddings[center], metric)
    np.minimum(cache, d, out=cache)
    return cache


def select_greedy_coreset(
    pool: Pool,
    m: int,
    metric: Metric,
    rng: RngStream,
    min_dist_cache: Optional[np.ndarray] = None,
) -> SelectionBatch:
    """Greedy k-center: repeatedly add the candidate farthest from all centers.

    Warm-starts from the labeled set when it is non-empty; otherwise the first
    center is a uniform-random unlabeled pick counted toward m. An optional
    ``min_dist_cache`` (length = pool size, min distance of every point to the
    current labeled centers) skips the warm-start recomputation; callers keep
    it current with ``update_min_distances``.
    """
    candidates = pool.unlabeled_indices()
    n = len(candidates)
    if m > n:
        raise SelectionError(f"m={m} exceeds {n} unlabeled instances")
    if metric == Metric.COSINE:
        norms = np.linalg.norm(pool.embeddings, axis=1)
        if np.any(norms == 0.0):
            raise ValueError("cosine metric: pool contains a zero-norm embedding")

    name = "pool-greedy" if metric == Metric.EUCLIDEAN else "pool-greedy-cosine"
    labeled = pool.labeled_indices()
    picked: list[int] = []

    if len(labeled) == 0 and min_dist_cache is None:
        gen = rng.generator()
        first = int(candidates[gen.integers(n)])
        picked.append(first)
        if m == 1:
            return SelectionBatch(picked, name)
        min_dist = distances_to_point(
            pool.embeddings[candidates], pool.embeddings[first], metric
        )
        alive = candidates != first
    else:
        if min_dist_cache is not None:
            min_dist = min_dist_cache[candidates].astype(float)
        else:
            min_dist = np.full(n, np.inf)
            for c in labeled:
                d = distances_to_point(
                    pool.embeddings[candidates], pool.embeddings[int(c)], metric
                )
                np.minimum(min_dist, d, out=min_dist)
        alive = np.ones(n, dtype=bool)

    while len(picked) < m:
        scores = np.where(alive, min_dist, -np.inf)
        pos = int(np.argmax(scores))  # first max -> lowest pool index on ties
        idx = int(candidates[pos])
        picked.append(idx)
        alive[pos] = False
        d = distances_to_point(pool.embeddings[candidates], pool.embeddings[idx], metric)
        np.minimum(min_dist, d, out=min_dist)
    return SelectionBatch(picked, name)


def coreset_radius(pool: Pool, centers: Iterable[int], metric: Metric) -> float:
    """Max over pool points of the distance to their nearest center."""
    centers = list(centers)
    if not centers:
        raise SelectionError("centers must be non-empty")
    min_dist = np.full(len(pool), np.inf)
    for c in centers:
        d = distances_to_point(pool.embeddings, pool.embeddings[int(c)], metric)
        np.minimum(min_dist, d, out=min_dist)
    return float(min_dist.max())


def lightweight_weights(pool: Pool) -> CoresetSamplingWeights:
    """Importance-sampling distribution: q = 1/(2n) + d^2(x, mean) / (2 * sum d^2).

    Computed over the unlabeled pool. Falls back to uniform when the total
    variance is zero.
    """
    indices = pool.unlabeled_indices()
    if len(indices) == 0:
        raise SelectionError("pool has no unlabeled instances")
    X = pool.embeddings[indices]
    n = len(indices)
    mu = X.mean(axis=0)
    sq = np.sum((X - mu) ** 2, axis=1)
    total = float(sq.sum())
    if total == 0.0:
        q = np.full(n, 1.0 / n)
    else:
        q = 0.5 / n + sq / (2.0 * total)
        q = q / q.sum()  # exact normalization against rounding
    return CoresetSamplingWeights(indices=indices, q=q)


def select_lightweight_coreset(pool: Pool, m: int, rng: RngStream) -> SelectionBatch:
    """Sample m distinct indices, renormalizing the weights after each draw."""
    weights = lightweight_weights(pool)
    n = len(weights.indices)
    if m > n:
        raise SelectionError(f"m={m} exceeds {n} unlabeled instances")
    gen = rng.generator()
    q = weights.q.copy()
    alive = np.ones(n, dtype=bool)
    picked: list[int] = []
    for _ in range(m):
        p = np.where(alive, q, 0.0)
        p = p / p.sum()
        pos = int(gen.choice(n, p=p))
        picked.append(int(weights.indices[pos]))
        alive[pos] = False
    return SelectionBatch(picked, "pool-lightweight")
