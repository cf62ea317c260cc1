"""Pool-based active-learning data selection engine and simulation harness."""

from .cluster import AnchorConfig, KMeansResult, kmeans, select_alps, select_anchor_subpool
from .coreset import (
    coreset_radius,
    lightweight_weights,
    select_greedy_coreset,
    select_lightweight_coreset,
)
from .errors import DataFormatError, PoolStateError, SelectionError, ShortfallError
from .experiment import (
    ExperimentConfig,
    RunResult,
    cumulative_improvement,
    incremental_improvement,
    reduction_percentage,
    run_experiment,
    run_fsl_phase,
    run_selection_phase,
    strategy_registry,
    strategy_vs_random_diff,
)
from .geometry import (
    Metric,
    cosine_distance,
    euclidean_distance,
    mean_distance_to_set,
    select_max_avg,
    select_max_min_cycle,
    select_max_min_rand,
    select_min_avg,
)
from .learner import LinearModel, TrainConfig, macro_f1, predict, predict_proba, train
from .matrixio import (
    KIND_EMBEDDING,
    KIND_PROBABILITY,
    KIND_SURPRISAL,
    read_matrix,
    read_sentences,
    write_matrix,
    write_sentences,
)
from .pool import Pool, SelectionBatch, SentenceRecord, ingest_pool, reveal_labels, select_random
from .prep import (
    LinguisticProfile,
    RoundPlan,
    balance_undersample,
    dedup_similar,
    linguistic_profile,
    partition_rounds,
    tfidf_vectors,
)
from .pvp import (
    MASK_TOKEN,
    Pattern,
    Verbalizer,
    all_patterns,
    build_cloze,
    load_pattern,
    load_verbalizer,
    predict_label,
    score_labels,
)
from .rng import RngStream
from .signals import (
    kl_divergence,
    prediction_entropy,
    select_breaking_ties,
    select_cal,
    select_entropy,
    select_least_confidence,
    validate_probability_matrix,
)

__version__ = "0.1.0"
