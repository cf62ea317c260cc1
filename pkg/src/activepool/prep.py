"""Corpus processing: TF-IDF near-duplicate removal, class balancing,
multi-round few-shot dataset construction, and linguistic profiling."""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import sparse

from .errors import SelectionError
from .rng import RngStream

DEFAULT_DEDUP_THRESHOLD = 0.8


def tokenize(text: str) -> list[str]:
    """Lowercased whitespace-split words with edge punctuation stripped."""
    tokens = []
    for raw in text.lower().split():
        start, end = 0, len(raw)
        while start < end and unicodedata.category(raw[start]).startswith("P"):
            start += 1
        while end > start and unicodedata.category(raw[end - 1]).startswith("P"):
            end -= 1
        if end > start:
            tokens.append(raw[start:end])
    return tokens


def tfidf_vectors(texts: Sequence[str]) -> list[dict[str, float]]:
    """L2-normalized TF-IDF vectors with raw tf and smoothed idf:
    idf = ln((1 + N) / (1 + df)) + 1."""
    if len(texts) == 0:
        raise ValueError("corpus must be non-empty")
    docs = [tokenize(t) for t in texts]
    df: dict[str, int] = {}
    for doc in docs:
        for term in set(doc):
            df[term] = df.get(term, 0) + 1
    n = len(docs)
    idf = {t: np.log((1 + n) / (1 + c)) + 1.0 for t, c in df.items()}
    vectors = []
    for doc in docs:
        counts: dict[str, int] = {}
        for term in doc:
            counts[term] = counts.get(term, 0) + 1
        vec = {t: c * idf[t] for t, c in counts.items()}
        norm = np.sqrt(sum(w * w for w in vec.values()))
        if norm > 0:
            vec = {t: w / norm for t, w in vec.items()}
        vectors.append(vec)
    return vectors


def sparse_cosine(a: dict[str, float], b: dict[str, float]) -> float:
    """Dot product of two L2-normalized sparse vectors."""
    if len(b) < len(a):
        a, b = b, a
    return float(sum(w * b[t] for t, w in a.items() if t in b))


class DedupIndex:
    """Incremental near-duplicate filter over a growing accepted corpus.

    Each ``filter`` call vectorizes the accepted texts plus the new batch
    with TF-IDF (idf over that combined corpus), keeps a new text only if
    its cosine similarity to every already-kept text is <= threshold, and
    absorbs the survivors into the accepted set.
    """

    def __init__(self, threshold: float = DEFAULT_DEDUP_THRESHOLD):
        if not 0.0 < threshold <= 1.0:
            raise ValueError("threshold must lie in (0, 1]")
        self.threshold = threshold
        self._vocab: dict[str, int] = {}
        self._df: list[int] = []
        self._rows: list[tuple[np.ndarray, np.ndarray]] = []  # (term ids, counts)

    def __len__(self) -> int:
        return len(self._rows)

    def _encode(self, text: str, grow: bool) -> tuple[np.ndarray, np.ndarray]:
        counts: dict[int, int] = {}
        for term in tokenize(text):
            tid = self._vocab.get(term)
            if tid is None:
                if not grow:
                    continue
                tid = len(self._vocab)
                self._vocab[term] = tid
                self._df.append(0)
            counts[tid] = counts.get(tid, 0) + 1
        ids = np.fromiter(counts.keys(), dtype=np.int64, count=len(counts))
        vals = np.fromiter(counts.values(), dtype=np.float64, count=len(counts))
        order = np.argsort(ids)
        return ids[order], vals[order]

    def _matrix(self, rows: list[tuple[np.ndarray, np.ndarray]], idf: np.ndarray):
        indptr = np.zeros(len(rows) + 1, dtype=np.int64)
        for i, (ids, _) in enumerate(rows):
            indptr[i + 1] = indptr[i] + len(ids)
        if indptr[-1] == 0:
            return sparse.csr_matrix((len(rows), len(idf)))
        indices = np.concatenate([ids for ids, _ in rows]) if rows else np.empty(0)
        data = np.concatenate([vals for _, vals in rows]) * idf[indices]
        mat = sparse.csr_matrix(
            (data, indices, indptr), shape=(len(rows), len(idf))
        )
        norms = np.sqrt(np.asarray(mat.multiply(mat).sum(axis=1)).ravel())
        norms[norms == 0] = 1.0
        return sparse.diags(1.0 / norms) @ mat

    def filter(self, texts: Sequence[str]) -> list[int]:
        """Positions (into ``texts``) of the entries kept by the greedy scan."""
        new_rows = [self._encode(t, grow=True) for t in texts]
        for ids, _ in new_rows:
            for tid in ids:
                self._df[tid] += 1
        n_total = len(self._rows) + len(new_rows)
        df = np.asarray(self._df, dtype=np.float64)
        idf = np.log((1.0 + n_total) / (1.0 + df)) + 1.0

        kept_mat = self._matrix(self._rows, idf) if self._rows else None
        new_mat = self._matrix(new_rows, idf)
        vs_kept = (new_mat @ kept_mat.T).toarray() if kept_mat is not None else None
        vs_new = (new_mat @ new_mat.T).toarray()

        kept_positions: list[int] = []
        dropped: list[int] = []
        for i in range(len(new_rows)):
            too_similar = False
            if vs_kept is not None and np.any(vs_kept[i] > self.threshold):
                too_similar = True
            if not too_similar:
                for j in kept_positions:
                    if vs_new[i, j] > self.threshold:
                        too_similar = True
                        break
            if too_similar:
                dropped.append(i)
            else:
                kept_positions.append(i)

        for i in kept_positions:
            self._rows.append(new_rows[i])
        # dropped docs leave the corpus again: remove their df contribution
        for i in dropped:
            for tid in new_rows[i][0]:
                self._df[tid] -= 1
        return kept_positions


def dedup_similar(
    texts: Sequence[str], threshold: float = DEFAULT_DEDUP_THRESHOLD
) -> list[int]:
    """Greedy scan in input order; a text is dropped when its TF-IDF cosine
    similarity to any already-kept text strictly exceeds the threshold."""
    return DedupIndex(threshold).filter(texts)


def balance_undersample(
    indices_by_class: dict[int, Sequence[int]], rng: RngStream
) -> dict[int, list[int]]:
    """Uniformly subsample every majority class down to the minority size."""
    if len(indices_by_class) < 2:
        raise SelectionError("balancing requires both classes present")
    for c, idx in indices_by_class.items():
        if len(idx) == 0:
            raise SelectionError(f"class {c} is empty")
    minority = min(len(idx) for idx in indices_by_class.values())
    out: dict[int, list[int]] = {}
    for c in sorted(indices_by_class):
        idx = list(indices_by_class[c])
        if len(idx) == minority:
            out[c] = idx
        else:
            gen = rng.child(f"balance/{c}").generator()
            chosen = gen.choice(len(idx), size=minority, replace=False)
            out[c] = [idx[i] for i in sorted(chosen)]
    return out


@dataclass
class RoundPlan:
    """Disjoint rounds with nested cumulative subsets per class."""

    rounds: list[dict[int, list[int]]]
    subsets_per_round: int

    @property
    def n_rounds(self) -> int:
        return len(self.rounds)

    @property
    def per_class_round_size(self) -> int:
        first = self.rounds[0]
        return len(next(iter(first.values())))

    @property
    def step(self) -> int:
        return self.per_class_round_size // self.subsets_per_round

    @property
    def shot_grid(self) -> list[int]:
        return [self.step * (k + 1) for k in range(self.subsets_per_round)]

    def subset(self, round_idx: int, shots: int) -> dict[int, list[int]]:
        """Cumulative subset with ``shots`` indices per class."""
        if shots % self.step or not 0 < shots <= self.per_class_round_size:
            raise ValueError(f"shots={shots} not on the {self.step}-step grid")
        return {c: idx[:shots] for c, idx in self.rounds[round_idx].items()}

    def to_manifest(self) -> dict:
        return {
            "subsets_per_round": self.subsets_per_round,
            "rounds": [
                {str(c): idx for c, idx in sorted(r.items())} for r in self.rounds
            ],
        }

    @classmethod
    def from_manifest(cls, obj: dict) -> "RoundPlan":
        return cls(
            rounds=[
                {int(c): list(idx) for c, idx in r.items()} for r in obj["rounds"]
            ],
            subsets_per_round=int(obj["subsets_per_round"]),
        )


def partition_rounds(
    balanced: dict[int, Sequence[int]],
    rng: RngStream,
    rounds: int = 6,
    subsets: int = 10,
) -> RoundPlan:
    """Shuffle each class and split into disjoint equal rounds; subsets are
    nested prefixes in per-round shuffle order."""
    sizes = {len(idx) for idx in balanced.values()}
    if len(sizes) != 1:
        raise SelectionError("all classes must have the same index count")
    n = sizes.pop()
    if n % rounds:
        raise SelectionError(f"{n} indices per class not divisible by {rounds} rounds")
    per_round = n // rounds
    if per_round % subsets:
        raise SelectionError(
            f"round size {per_round} not divisible by {subsets} subsets"
        )
    plan_rounds: list[dict[int, list[int]]] = [dict() for _ in range(rounds)]
    for c in sorted(balanced):
        gen = rng.child(f"partition/{c}").generator()
        order = np.asarray(list(balanced[c]), dtype=int)[gen.permutation(n)]
        for r in range(rounds):
            plan_rounds[r][c] = [int(i) for i in order[r * per_round : (r + 1) * per_round]]
    return RoundPlan(rounds=plan_rounds, subsets_per_round=subsets)


@dataclass
class LinguisticProfile:
    unique_word_count: int
    total_tokens: int
    type_token_ratio: float
    vocabulary_richness: float
    avg_words_per_sentence: float
    avg_word_length: float


def linguistic_profile(texts: Sequence[str]) -> LinguisticProfile:
    """Six corpus-level metrics; vocabulary richness is the Guiraud index
    unique / sqrt(total)."""
    tokens = [t for text in texts for t in tokenize(text)]
    total = len(tokens)
    unique = len(set(tokens))
    if total == 0 or len(texts) == 0:
        return LinguisticProfile(0, 0, 0.0, 0.0, 0.0, 0.0)
    return LinguisticProfile(
        unique_word_count=unique,
        total_tokens=total,
        type_token_ratio=unique / total,
        vocabulary_richness=float(unique / np.sqrt(total)),
        avg_words_per_sentence=total / len(texts),
        avg_word_length=float(np.mean([len(t) for t in tokens])),
    )
