import numpy as np

from activepool import Pool, RngStream, SentenceRecord


def make_pool(embeddings, labels=None, texts=None, language="synthetic"):
    """Pool from a raw embedding array; 1-D input becomes an n x 1 matrix."""
    X = np.asarray(embeddings, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    records = [
        SentenceRecord(
            id=f"s{i}",
            text=texts[i] if texts else f"sentence {i}",
            gold_label=None if labels is None else labels[i],
            language=language,
        )
        for i in range(n)
    ]
    return Pool(records, X)


def find_cold_start_seed(pool, want_pos, substream="test"):
    """Seed whose generator's first uniform pick lands on the wanted position."""
    n = len(pool.unlabeled_indices())
    for seed in range(10_000):
        gen = RngStream(seed, substream).generator()
        if int(gen.integers(n)) == want_pos:
            return seed
    raise AssertionError("no seed found")
