"""K-means primitive and the clustering-driven strategies.

Covers cluster-center selection over surprisal embeddings and anchor-based
subpool selection from class-representative labeled instances.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import SelectionError
from .pool import Pool, SelectionBatch
from .rng import RngStream


@dataclass
class KMeansResult:
    centroids: np.ndarray  # k x d
    assignments: np.ndarray  # n cluster ids
    inertia: float
    iterations: int


@dataclass
class AnchorConfig:
    anchors_per_class: int = 10
    subpool_factor: int = 10
    inner_strategy: str = "entropy"  # or "random"

    def __post_init__(self) -> None:
        if self.anchors_per_class < 1 or self.subpool_factor < 1:
            raise ValueError("anchor config counts must be positive")
        if self.inner_strategy not in ("entropy", "random"):
            raise ValueError(f"unknown inner strategy {self.inner_strategy!r}")


def _plusplus_init(X: np.ndarray, k: int, gen: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centroids = np.empty((k, X.shape[1]))
    centroids[0] = X[gen.integers(n)]
    closest = np.sum((X - centroids[0]) ** 2, axis=1)
    for j in range(1, k):
        total = closest.sum()
        if total == 0.0:
            pos = int(gen.integers(n))
        else:
            pos = int(gen.choice(n, p=closest / total))
        centroids[j] = X[pos]
        np.minimum(closest, np.sum((X - centroids[j]) ** 2, axis=1), out=closest)
    return centroids


def kmeans(
    points: np.ndarray,
    k: int,
    rng: RngStream,
    max_iter: int = 100,
    tol: float = 1e-6,
) -> KMeansResult:
    """Lloyd iterations with k-means++ seeding.

    Stops when the largest centroid displacement falls below tol. An empty
    cluster is repaired by reseeding its centroid at the point currently
    farthest from its assigned centroid.
    """
    X = np.asarray(points, dtype=float)
    n = X.shape[0]
    if k == 0:
        raise SelectionError("k must be >= 1")
    if k > n:
        raise SelectionError(f"k={k} exceeds {n} points")
    if max_iter < 1 or tol < 0:
        raise SelectionError("max_iter must be >= 1 and tol >= 0")

    gen = rng.generator()
    centroids = _plusplus_init(X, k, gen)
    assignments = np.zeros(n, dtype=int)
    prev_inertia = np.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        d2 = (
            np.sum(X**2, axis=1)[:, None]
            - 2.0 * (X @ centroids.T)
            + np.sum(centroids**2, axis=1)[None, :]
        )
        np.maximum(d2, 0.0, out=d2)
        assignments = np.argmin(d2, axis=1)
        point_d2 = d2[np.arange(n), assignments]

        for j in range(k):
            if not np.any(assignments == j):
                far = int(np.argmax(point_d2))
                centroids[j] = X[far]
                assignments[far] = j
                point_d2[far] = 0.0

        inertia = float(point_d2.sum())
        assert inertia <= prev_inertia + 1e-9, "k-means inertia increased"
        prev_inertia = inertia

        new_centroids = centroids.copy()
        for j in range(k):
            members = assignments == j
            if np.any(members):
                new_centroids[j] = X[members].mean(axis=0)
        shift = float(np.max(np.linalg.norm(new_centroids - centroids, axis=1)))
        centroids = new_centroids
        if shift < tol:
            break

    d2 = (
        np.sum(X**2, axis=1)[:, None]
        - 2.0 * (X @ centroids.T)
        + np.sum(centroids**2, axis=1)[None, :]
    )
    np.maximum(d2, 0.0, out=d2)
    assignments = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(n), assignments].sum())
    return KMeansResult(
        centroids=centroids,
        assignments=assignments,
        inertia=inertia,
        iterations=iterations,
    )


def _claim_nearest(
    centroids: np.ndarray,
    X: np.ndarray,
    indices: np.ndarray,
    claimed: set[int],
) -> list[int]:
    """Per centroid (ascending id), the nearest not-yet-claimed row of X."""
    picks = []
    for j in range(centroids.shape[0]):
        d = np.linalg.norm(X - centroids[j], axis=1)
        order = np.argsort(d, kind="stable")
        for pos in order:
            idx = int(indices[pos])
            if idx not in claimed:
                claimed.add(idx)
                picks.append(idx)
                break
    return picks


def select_alps(
    pool: Pool, surprisal: np.ndarray, m: int, rng: RngStream
) -> SelectionBatch:
    """Cluster surprisal rows of the unlabeled set with k = m and take the
    instance nearest each cluster center."""
    surprisal = np.asarray(surprisal, dtype=float)
    if surprisal.shape[0] != len(pool):
        raise SelectionError("surprisal rows must cover the pool")
    candidates = pool.unlabeled_indices()
    if m > len(candidates):
        raise SelectionError(f"m={m} exceeds {len(candidates)} unlabeled instances")
    S = surprisal[candidates]
    result = kmeans(S, m, rng)
    picks = _claim_nearest(result.centroids, S, candidates, set())
    return SelectionBatch(picks, "pool-alps")


def select_anchor_subpool(
    pool: Pool,
    probs: Optional[np.ndarray],
    m: int,
    cfg: AnchorConfig,
    rng: RngStream,
) -> SelectionBatch:
    """Restrict selection to the subpool most similar to class anchors.

    Anchors per class are the labeled instances nearest the centroids of a
    k-means over that class's embeddings. Unlabeled instances are ranked by
    mean cosine similarity to all anchors; the final m come from the top
    subpool via the configured inner strategy. ``probs`` rows must align with
    the sorted unlabeled indices when the inner strategy is entropy.
    """
    from .signals import select_entropy  # local import avoids a cycle

    candidates = pool.unlabeled_indices()
    if m > len(candidates):
        raise SelectionError(f"m={m} exceeds {len(candidates)} unlabeled instances")
    labeled = pool.labeled_indices()
    labels = {int(i): pool.records[int(i)].gold_label for i in labeled}
    classes = sorted({v for v in labels.values() if v is not None})
    if len(classes) < 2:
        raise SelectionError("anchor strategy needs >= 1 labeled instance per class")

    anchors: list[int] = []
    for c in classes:
        members = np.array([i for i in labeled if labels[int(i)] == c], dtype=int)
        if len(members) == 0:
            raise SelectionError(f"class {c} absent from labeled set")
        k = min(cfg.anchors_per_class, len(members))
        result = kmeans(pool.embeddings[members], k, rng.child(f"anchors/{c}"))
        anchors.extend(
            _claim_nearest(result.centroids, pool.embeddings[members], members, set())
        )

    A = pool.embeddings[anchors]
    A_norm = np.linalg.norm(A, axis=1)
    X = pool.embeddings[candidates]
    X_norm = np.linalg.norm(X, axis=1)
    if np.any(A_norm == 0.0) or np.any(X_norm == 0.0):
        raise ValueError("cosine similarity undefined for zero-norm embedding")
    sims = (X @ A.T) / np.outer(X_norm, A_norm)
    mean_sim = sims.mean(axis=1)

    subpool_size = min(cfg.subpool_factor * m, len(candidates))
    # stable sort on -similarity keeps lowest-index-first on ties
    order = np.argsort(-mean_sim, kind="stable")[:subpool_size]
    order = np.sort(order)  # subpool in ascending pool order
    subpool = candidates[order]

    if cfg.inner_strategy == "entropy":
        if probs is None:
            raise SelectionError("entropy inner strategy requires a probability matrix")
        sub_probs = np.asarray(probs, dtype=float)[order]
        inner = select_entropy(sub_probs, m, indices=subpool)
        picks = inner.indices
    else:
        gen = rng.child("inner-random").generator()
        picks = [int(i) for i in gen.choice(subpool, size=m, replace=False)]
    return SelectionBatch(picks, "pool-anchor")
