"""Distance metrics and the four average-distance selection strategies.

Each strategy starts from a random cold-start pick and then grows the batch
by scoring every remaining unlabeled candidate with its average distance to
the picks made so far. Ties always break toward the lowest pool index.
"""

from __future__ import annotations

import enum
from typing import Iterable

import numpy as np

from .errors import SelectionError
from .pool import Pool, SelectionBatch
from .rng import RngStream


class Metric(str, enum.Enum):
    COSINE = "cosine"
    EUCLIDEAN = "euclidean"


def cosine_distance(a, b) -> float:
    """1 - cos(angle between a and b); lies in [0, 2]."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine distance undefined for zero-norm vector")
    return float(1.0 - np.dot(a, b) / (na * nb))


def euclidean_distance(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def distances_to_point(X: np.ndarray, v: np.ndarray, metric: Metric) -> np.ndarray:
    """Distances from every row of X to vector v, vectorized."""
    if metric == Metric.EUCLIDEAN:
        return np.linalg.norm(X - v, axis=1)
    norms = np.linalg.norm(X, axis=1)
    nv = np.linalg.norm(v)
    if nv == 0.0 or np.any(norms == 0.0):
        raise ValueError("cosine distance undefined for zero-norm vector")
    return 1.0 - (X @ v) / (norms * nv)


def mean_distance_to_set(
    candidate: int, selected: Iterable[int], pool: Pool, metric: Metric
) -> float:
    """Arithmetic mean of distances from a candidate to every selected member."""
    selected = list(selected)
    if not selected:
        raise SelectionError("selected set must be non-empty")
    if candidate in selected:
        raise SelectionError("candidate must not already be selected")
    dist = cosine_distance if metric == Metric.COSINE else euclidean_distance
    v = pool.embeddings[candidate]
    return float(np.mean([dist(v, pool.embeddings[s]) for s in selected]))


def _cold_start(candidates: np.ndarray, gen: np.random.Generator) -> int:
    return int(candidates[gen.integers(len(candidates))])


def _check_cosine_ok(pool: Pool, candidates: np.ndarray, metric: Metric) -> None:
    if metric == Metric.COSINE:
        norms = np.linalg.norm(pool.embeddings[candidates], axis=1)
        if np.any(norms == 0.0):
            raise ValueError("cosine metric: pool contains a zero-norm embedding")


def _avg_distance_select(
    pool: Pool,
    m: int,
    metric: Metric,
    rng: RngStream,
    mode: str,
    strategy_name: str,
) -> SelectionBatch:
    """Shared engine for max/min/cycle/max-min-rand average-distance picks.

    Running distance sums give O(n * m) total cost: after each pick only the
    distances to the new point are added to each candidate's sum.
    """
    candidates = pool.unlabeled_indices()
    n = len(candidates)
    if m < 1:
        raise SelectionError("m must be >= 1")
    if m > n:
        raise SelectionError(f"m={m} exceeds {n} unlabeled instances")
    _check_cosine_ok(pool, candidates, metric)

    gen = rng.generator()
    X = pool.embeddings[candidates]
    first_pos = int(gen.integers(n))
    picked_pos = [first_pos]
    alive = np.ones(n, dtype=bool)
    alive[first_pos] = False
    sum_dist = distances_to_point(X, X[first_pos], metric)

    def pick_extreme(maximize: bool) -> int:
        scores = sum_dist.copy()  # equal divisor, so sums rank like means
        scores[~alive] = -np.inf if maximize else np.inf
        pos = int(np.argmax(scores) if maximize else np.argmin(scores))
        return pos

    step = 1
    while len(picked_pos) < m:
        if mode == "max":
            maximize = True
        elif mode == "min":
            maximize = False
        elif mode == "cycle":
            # pick 2 is max, pick 3 is min, alternating thereafter
            maximize = step % 2 == 1
        elif mode == "max-min-rand":
            phase = (step - 1) % 3
            if phase == 2:
                remaining = np.flatnonzero(alive)
                pos = int(remaining[gen.integers(len(remaining))])
                picked_pos.append(pos)
                alive[pos] = False
                sum_dist += distances_to_point(X, X[pos], metric)
                step += 1
                continue
            maximize = phase == 0
        else:  # pragma: no cover
            raise ValueError(f"unknown mode {mode}")
        pos = pick_extreme(maximize)
        picked_pos.append(pos)
        alive[pos] = False
        sum_dist += distances_to_point(X, X[pos], metric)
        step += 1

    indices = [int(candidates[p]) for p in picked_pos]
    return SelectionBatch(indices, strategy_name)


def select_max_avg(pool: Pool, m: int, metric: Metric, rng: RngStream) -> SelectionBatch:
    """Greedy picks maximizing average distance to the batch so far."""
    return _avg_distance_select(pool, m, metric, rng, "max", f"{metric.value}-max")


def select_min_avg(pool: Pool, m: int, metric: Metric, rng: RngStream) -> SelectionBatch:
    """Greedy picks minimizing average distance to the batch so far."""
    return _avg_distance_select(pool, m, metric, rng, "min", f"{metric.value}-min")


def select_max_min_cycle(pool: Pool, m: int, metric: Metric, rng: RngStream) -> SelectionBatch:
    """Alternates max- and min-average-distance picks after the cold start."""
    return _avg_distance_select(pool, m, metric, rng, "cycle", f"{metric.value}-cycle")


def select_max_min_rand(pool: Pool, m: int, metric: Metric, rng: RngStream) -> SelectionBatch:
    """Repeated (max, min, random) triples after the cold-start pick."""
    return _avg_distance_select(
        pool, m, metric, rng, "max-min-rand", f"{metric.value}-max-min-rand"
    )
