import numpy as np
import pytest

from activepool import (
    RngStream,
    SelectionError,
    balance_undersample,
    dedup_similar,
    linguistic_profile,
    partition_rounds,
    tfidf_vectors,
)
from activepool.prep import DedupIndex, RoundPlan, sparse_cosine, tokenize


class TestTokenize:
    def test_lowercase_split(self):
        assert tokenize("The Quick fox") == ["the", "quick", "fox"]

    def test_edge_punctuation_stripped(self):
        assert tokenize('"Hello," she said.') == ["hello", "she", "said"]

    def test_interior_punctuation_kept(self):
        assert tokenize("don't re-use") == ["don't", "re-use"]

    def test_unicode_punctuation(self):
        assert tokenize("«cita» ’word’") == ["cita", "word"]

    def test_pure_punctuation_dropped(self):
        assert tokenize("... -- !") == []


class TestTfidf:
    def test_two_doc_hand_value(self):
        vecs = tfidf_vectors(["a b", "a c"])
        idf_a = np.log(3 / 3) + 1
        idf_b = np.log(3 / 2) + 1
        norm = np.sqrt(idf_a**2 + idf_b**2)
        assert vecs[0]["a"] == pytest.approx(idf_a / norm)
        assert vecs[0]["b"] == pytest.approx(idf_b / norm)
        assert sparse_cosine(vecs[0], vecs[1]) == pytest.approx(idf_a**2 / norm**2)

    def test_unit_norm(self):
        vecs = tfidf_vectors(["x y z", "x x y", "w"])
        for v in vecs:
            assert sum(w * w for w in v.values()) == pytest.approx(1.0)

    def test_identical_docs_cosine_one(self):
        vecs = tfidf_vectors(["same words here", "same words here"])
        assert sparse_cosine(vecs[0], vecs[1]) == pytest.approx(1.0)

    def test_disjoint_docs_cosine_zero(self):
        vecs = tfidf_vectors(["a b", "c d"])
        assert sparse_cosine(vecs[0], vecs[1]) == 0.0

    def test_raw_tf(self):
        vecs = tfidf_vectors(["a a b", "c"])
        assert vecs[0]["a"] / vecs[0]["b"] == pytest.approx(
            2 * (np.log(3 / 2) + 1) / (np.log(3 / 2) + 1)
        )

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            tfidf_vectors([])


def naive_dedup(texts, threshold):
    """Independent oracle: quadratic greedy scan over full-corpus vectors."""
    vecs = tfidf_vectors(texts)
    kept = []
    for i in range(len(texts)):
        if all(sparse_cosine(vecs[i], vecs[j]) <= threshold for j in kept):
            kept.append(i)
    return kept


class TestDedup:
    def test_exact_duplicate_dropped_earliest_kept(self):
        kept = dedup_similar(["alpha beta gamma", "unrelated words", "alpha beta gamma"])
        assert kept == [0, 1]

    def test_threshold_is_strict(self):
        # identical singleton docs have cosine exactly 1.0; threshold 1.0
        # keeps them because the rule is strictly greater
        assert dedup_similar(["x", "x"], threshold=1.0) == [0, 1]
        assert dedup_similar(["x", "x"], threshold=0.99) == [0]

    def test_planted_near_duplicates(self):
        texts = [
            "the committee approved the budget for the coming fiscal year",
            "the committee approved the budget for the next fiscal year",
            "rainfall in the highlands doubled compared with last spring",
            "a completely different sentence about marine biology research",
        ]
        vecs = tfidf_vectors(texts)
        sim01 = sparse_cosine(vecs[0], vecs[1])
        sim02 = sparse_cosine(vecs[0], vecs[2])
        assert sim01 > 0.8 > sim02
        assert dedup_similar(texts, threshold=0.8) == [0, 2, 3]

    def test_matches_naive_oracle(self):
        gen = np.random.default_rng(55)
        words = [f"w{i}" for i in range(12)]
        for trial in range(30):
            texts = [
                " ".join(gen.choice(words, size=gen.integers(3, 8)))
                for _ in range(15)
            ]
            for thr in (0.5, 0.8):
                assert dedup_similar(texts, thr) == naive_dedup(texts, thr), trial

    def test_idempotent(self):
        texts = ["a b c", "a b c d", "x y", "a b"]
        kept = dedup_similar(texts, 0.8)
        survivors = [texts[i] for i in kept]
        assert dedup_similar(survivors, 0.8) == list(range(len(survivors)))

    def test_incremental_index_spans_batches(self):
        index = DedupIndex(0.8)
        assert index.filter(["alpha beta gamma delta", "one two three"]) == [0, 1]
        # same sentence arriving in a later batch is caught against history
        assert index.filter(["alpha beta gamma delta", "brand new content here"]) == [1]
        assert len(index) == 3

    def test_bad_threshold(self):
        with pytest.raises(ValueError):
            dedup_similar(["a"], threshold=0.0)
        with pytest.raises(ValueError):
            dedup_similar(["a"], threshold=1.5)


class TestBalance:
    def test_minority_kept_whole(self):
        out = balance_undersample({0: [1, 2, 3, 4, 5], 1: [10, 11]}, RngStream(3, "b"))
        assert out[1] == [10, 11]
        assert len(out[0]) == 2
        assert set(out[0]) <= {1, 2, 3, 4, 5}
        assert out[0] == sorted(out[0])

    def test_already_balanced_identity(self):
        src = {0: [7, 8], 1: [1, 2]}
        assert balance_undersample(src, RngStream(0, "b")) == {0: [7, 8], 1: [1, 2]}

    def test_deterministic(self):
        src = {0: list(range(100)), 1: list(range(100, 110))}
        a = balance_undersample(src, RngStream(9, "b"))
        b = balance_undersample(src, RngStream(9, "b"))
        assert a == b

    def test_empty_class_rejected(self):
        with pytest.raises(SelectionError):
            balance_undersample({0: [], 1: [1]}, RngStream(0, "b"))

    def test_single_class_rejected(self):
        with pytest.raises(SelectionError):
            balance_undersample({0: [1, 2]}, RngStream(0, "b"))


class TestPartition:
    def _plan(self, n=60, rounds=6, subsets=10, seed=4):
        balanced = {0: list(range(n)), 1: list(range(1000, 1000 + n))}
        return partition_rounds(balanced, RngStream(seed, "p"), rounds, subsets), balanced

    def test_rounds_disjoint_and_exhaustive(self):
        plan, balanced = self._plan()
        for c in (0, 1):
            seen = [i for r in plan.rounds for i in r[c]]
            assert sorted(seen) == sorted(balanced[c])
            assert len(set(seen)) == len(seen)

    def test_subsets_nested(self):
        plan, _ = self._plan()
        assert plan.shot_grid == [1, 2, 3, 4, 5, 6, 7, 8, 9, 10]
        for r in range(plan.n_rounds):
            prev = None
            for shots in plan.shot_grid:
                sub = plan.subset(r, shots)
                if prev is not None:
                    for c in sub:
                        assert sub[c][: len(prev[c])] == prev[c]
                prev = sub

    def test_full_schedule_shape(self):
        plan, _ = self._plan(n=3000, rounds=6, subsets=10)
        assert plan.per_class_round_size == 500
        assert plan.shot_grid == list(range(50, 501, 50))

    def test_off_grid_shots_rejected(self):
        plan, _ = self._plan()
        with pytest.raises(ValueError):
            plan.subset(0, 0)
        with pytest.raises(ValueError):
            plan.subset(0, plan.per_class_round_size + plan.step)

    def test_indivisible_rejected(self):
        with pytest.raises(SelectionError):
            partition_rounds({0: list(range(7)), 1: list(range(7))}, RngStream(0, "p"), 6, 10)
        with pytest.raises(SelectionError):
            partition_rounds({0: [1], 1: [1, 2]}, RngStream(0, "p"), 1, 1)

    def test_manifest_round_trip(self):
        plan, _ = self._plan()
        clone = RoundPlan.from_manifest(plan.to_manifest())
        assert clone.rounds == plan.rounds
        assert clone.subsets_per_round == plan.subsets_per_round

    def test_deterministic(self):
        a, _ = self._plan(seed=11)
        b, _ = self._plan(seed=11)
        c, _ = self._plan(seed=12)
        assert a.rounds == b.rounds
        assert a.rounds != c.rounds


class TestLinguisticProfile:
    def test_hand_counts(self):
        prof = linguistic_profile(["The cat sat.", "The cat ran fast."])
        # tokens: the cat sat / the cat ran fast -> 7 total, 5 unique
        assert prof.total_tokens == 7
        assert prof.unique_word_count == 5
        assert prof.type_token_ratio == pytest.approx(5 / 7)
        assert prof.vocabulary_richness == pytest.approx(5 / np.sqrt(7))
        assert prof.avg_words_per_sentence == pytest.approx(3.5)
        assert prof.avg_word_length == pytest.approx((3 + 3 + 3 + 3 + 3 + 3 + 4) / 7)

    def test_empty(self):
        prof = linguistic_profile([])
        assert prof.total_tokens == 0
        assert prof.vocabulary_richness == 0.0
