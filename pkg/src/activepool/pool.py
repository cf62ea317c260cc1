"""The data universe: sentence records, embeddings, and label visibility.

A Pool holds the full record list with an aligned embedding matrix and a
disjoint labeled/unlabeled index partition. Labels are hidden until a
simulated oracle reveals them via ``reveal_labels``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DataFormatError, PoolStateError, SelectionError
from .matrixio import KIND_EMBEDDING, PathLike, read_matrix, read_sentences
from .rng import RngStream

LANGUAGES = ("ca", "eu", "sq", "synthetic")


@dataclass
class SentenceRecord:
    id: str
    text: str
    gold_label: Optional[int] = None
    language: str = "synthetic"

    def __post_init__(self) -> None:
        if self.gold_label is not None and self.gold_label not in (0, 1):
            raise DataFormatError(f"record {self.id!r}: label must be 0 or 1")
        if self.language not in LANGUAGES:
            raise DataFormatError(f"record {self.id!r}: unknown language {self.language!r}")


@dataclass
class SelectionBatch:
    """Ordered indices chosen by one strategy invocation."""

    indices: list[int]
    strategy: str
    iteration: int = 0

    def __post_init__(self) -> None:
        if len(set(self.indices)) != len(self.indices):
            raise SelectionError("selection batch contains duplicate indices")
        if self.iteration < 0:
            raise SelectionError("iteration must be non-negative")


class Pool:
    """Immutable records/embeddings plus a mutable labeled/unlabeled split."""

    def __init__(self, records: Sequence[SentenceRecord], embeddings: np.ndarray):
        embeddings = np.asarray(embeddings, dtype=float)
        if embeddings.ndim != 2:
            raise DataFormatError(f"embeddings must be 2-D, got shape {embeddings.shape}")
        if len(records) != embeddings.shape[0]:
            raise DataFormatError(
                f"{len(records)} records but {embeddings.shape[0]} embedding rows"
            )
        if embeddings.size and not np.all(np.isfinite(embeddings)):
            raise DataFormatError("embeddings contain non-finite entries")
        if len(records) and embeddings.shape[1] < 1:
            raise DataFormatError("embedding dimension must be >= 1")
        ids = [r.id for r in records]
        if len(set(ids)) != len(ids):
            raise DataFormatError("duplicate record ids in pool")
        self.records: list[SentenceRecord] = list(records)
        self.embeddings = embeddings
        self._labeled: set[int] = set()
        self._unlabeled: set[int] = set(range(len(records)))
        self._unlabeled_sorted: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.records)

    @property
    def labeled(self) -> frozenset[int]:
        return frozenset(self._labeled)

    @property
    def unlabeled(self) -> frozenset[int]:
        return frozenset(self._unlabeled)

    def unlabeled_indices(self) -> np.ndarray:
        """Sorted unlabeled indices (cached between partition changes)."""
        if self._unlabeled_sorted is None:
            self._unlabeled_sorted = np.array(sorted(self._unlabeled), dtype=int)
        return self._unlabeled_sorted

    def labeled_indices(self) -> np.ndarray:
        return np.array(sorted(self._labeled), dtype=int)

    def mark_labeled(self, index: int) -> None:
        if index not in self._unlabeled:
            raise PoolStateError(f"index {index} is not unlabeled")
        self._unlabeled.discard(index)
        self._labeled.add(index)
        self._unlabeled_sorted = None

    def check_partition(self) -> None:
        assert not (self._labeled & self._unlabeled)
        assert self._labeled | self._unlabeled == set(range(len(self.records)))


def ingest_pool(dataset_path: PathLike, embeddings_path: PathLike) -> Pool:
    """Load a sentence file plus aligned embedding file into a fresh Pool.

    All indices start unlabeled; record order equals file order.
    """
    raw = read_sentences(dataset_path)
    records = []
    for i, obj in enumerate(raw):
        if "id" not in obj or "text" not in obj:
            raise DataFormatError(f"{dataset_path}: record {i} lacks id/text")
        records.append(
            SentenceRecord(
                id=str(obj["id"]),
                text=str(obj["text"]),
                gold_label=obj.get("label"),
                language=obj.get("language", "synthetic"),
            )
        )
    kind, matrix = read_matrix(embeddings_path)
    if kind != KIND_EMBEDDING:
        raise DataFormatError(f"{embeddings_path}: expected an embedding file (kind 1)")
    if matrix.shape[0] != len(records):
        raise DataFormatError(
            f"{len(records)} sentences but {matrix.shape[0]} embedding rows"
        )
    return Pool(records, matrix.astype(float))


def reveal_labels(pool: Pool, batch: SelectionBatch) -> list[tuple[int, int]]:
    """Simulated oracle: return gold labels and move indices to labeled."""
    for idx in batch.indices:
        if idx in pool.labeled:
            raise PoolStateError(f"index {idx} is already labeled")
        if idx not in pool.unlabeled:
            raise PoolStateError(f"index {idx} is not in the pool's unlabeled set")
        if pool.records[idx].gold_label is None:
            raise PoolStateError(
                f"index {idx} has no gold label; pool is not usable for simulation"
            )
    out = []
    for idx in batch.indices:
        pool.mark_labeled(idx)
        out.append((idx, pool.records[idx].gold_label))
    return out


def select_random(pool: Pool, m: int, rng: RngStream) -> SelectionBatch:
    """Uniform random baseline over the unlabeled set."""
    candidates = pool.unlabeled_indices()
    if m > len(candidates):
        raise SelectionError(f"m={m} exceeds {len(candidates)} unlabeled instances")
    gen = rng.generator()
    chosen = gen.choice(candidates, size=m, replace=False)
    return SelectionBatch([int(i) for i in chosen], "random")
