"""Selection strategies driven by predicted class distributions.

Uncertainty scoring (entropy, least confidence, breaking ties) plus the
contrastive strategy that compares a candidate's distribution against its
nearest labeled neighbors via KL divergence. All logarithms are natural.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .errors import SelectionError
from .pool import Pool, SelectionBatch

_KL_EPS = 1e-12


def validate_probability_matrix(probs: np.ndarray) -> np.ndarray:
    P = np.asarray(probs, dtype=float)
    if P.ndim != 2:
        raise ValueError(f"probability matrix must be 2-D, got shape {P.shape}")
    if np.any(P < -1e-12) or np.any(P > 1 + 1e-12):
        raise ValueError("probabilities must lie in [0, 1]")
    if np.any(np.abs(P.sum(axis=1) - 1.0) > 1e-6):
        raise ValueError("each probability row must sum to 1")
    return P


def prediction_entropy(row) -> float:
    """Shannon entropy of one class distribution, in nats."""
    p = validate_probability_matrix(np.asarray(row, dtype=float)[None, :])[0]
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


def _row_entropies(P: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(P > 0, P * np.log(np.where(P > 0, P, 1.0)), 0.0)
    return -terms.sum(axis=1)


def _top_m(scores: np.ndarray, m: int, descending: bool) -> np.ndarray:
    """Top-m positions by score; ties break toward the lowest position."""
    key = -scores if descending else scores
    return np.argsort(key, kind="stable")[:m]


def _resolve_indices(n: int, indices) -> np.ndarray:
    if indices is None:
        return np.arange(n)
    indices = np.asarray(indices, dtype=int)
    if len(indices) != n:
        raise SelectionError("indices must align with probability rows")
    return indices


def select_entropy(probs, m: int, indices=None) -> SelectionBatch:
    """Top-m rows by descending prediction entropy."""
    P = validate_probability_matrix(probs)
    if m > P.shape[0]:
        raise SelectionError(f"m={m} exceeds {P.shape[0]} rows")
    idx = _resolve_indices(P.shape[0], indices)
    picks = _top_m(_row_entropies(P), m, descending=True)
    return SelectionBatch([int(idx[p]) for p in picks], "pool-entropy")


def select_least_confidence(probs, m: int, indices=None) -> SelectionBatch:
    """Top-m rows by ascending confidence in the most likely class."""
    P = validate_probability_matrix(probs)
    if m > P.shape[0]:
        raise SelectionError(f"m={m} exceeds {P.shape[0]} rows")
    idx = _resolve_indices(P.shape[0], indices)
    picks = _top_m(P.max(axis=1), m, descending=False)
    return SelectionBatch([int(idx[p]) for p in picks], "pool-lc")


def select_breaking_ties(probs, m: int, indices=None) -> SelectionBatch:
    """Top-m rows by ascending margin between the two most likely classes."""
    P = validate_probability_matrix(probs)
    if m > P.shape[0]:
        raise SelectionError(f"m={m} exceeds {P.shape[0]} rows")
    idx = _resolve_indices(P.shape[0], indices)
    part = np.sort(P, axis=1)
    margin = part[:, -1] - part[:, -2]
    picks = _top_m(margin, m, descending=False)
    return SelectionBatch([int(idx[p]) for p in picks], "pool-bt")


def kl_divergence(p, q) -> float:
    """KL(p || q) in nats; zero p-terms are skipped, q is floored at 1e-12."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {q.shape}")
    mask = p > 0
    return float(np.sum(p[mask] * np.log(p[mask] / np.maximum(q[mask], _KL_EPS))))


def select_cal(
    pool: Pool,
    probs_unlabeled,
    probs_labeled,
    k_neighbors: int = 10,
    m: int = 1,
    unlabeled_indices: Optional[np.ndarray] = None,
    labeled_indices: Optional[np.ndarray] = None,
) -> SelectionBatch:
    """Contrastive selection: rank unlabeled candidates by the mean KL
    divergence of their labeled nearest neighbors' distributions from their
    own.

    Probability rows align with the sorted unlabeled/labeled index lists
    unless explicit index arrays are given. Neighbors are found by euclidean
    distance on pool embeddings; k clamps to the labeled-set size.
    """
    Pu = validate_probability_matrix(probs_unlabeled)
    Pl = validate_probability_matrix(probs_labeled)
    unl = (
        pool.unlabeled_indices()
        if unlabeled_indices is None
        else np.asarray(unlabeled_indices, dtype=int)
    )
    lab = (
        pool.labeled_indices()
        if labeled_indices is None
        else np.asarray(labeled_indices, dtype=int)
    )
    if len(lab) == 0:
        raise SelectionError("CAL requires a non-empty labeled set")
    if Pu.shape[0] != len(unl) or Pl.shape[0] != len(lab):
        raise SelectionError("probability rows must align with the index lists")
    if m > len(unl):
        raise SelectionError(f"m={m} exceeds {len(unl)} unlabeled instances")
    k = min(k_neighbors, len(lab))

    Xu = pool.embeddings[unl]
    Xl = pool.embeddings[lab]
    d2 = (
        np.sum(Xu**2, axis=1)[:, None]
        - 2.0 * (Xu @ Xl.T)
        + np.sum(Xl**2, axis=1)[None, :]
    )
    neighbor_pos = np.argsort(d2, axis=1, kind="stable")[:, :k]

    logs = np.log(np.maximum(Pu, _KL_EPS))
    scores = np.empty(len(unl))
    for i in range(len(unl)):
        N = Pl[neighbor_pos[i]]
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(N > 0, N * (np.log(np.where(N > 0, N, 1.0)) - logs[i]), 0.0)
        scores[i] = terms.sum() / k
    picks = _top_m(scores, m, descending=True)
    return SelectionBatch([int(unl[p]) for p in picks], "pool-cal")
