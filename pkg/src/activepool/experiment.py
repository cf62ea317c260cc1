"""End-to-end simulation: iterative selection, processing, multi-round
few-shot training, and the derived comparison analyses."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import coreset, geometry, signals
from .cluster import AnchorConfig, select_alps, select_anchor_subpool
from .errors import SelectionError, ShortfallError
from .learner import TrainConfig, macro_f1, predict, predict_proba, train
from .pool import Pool, SelectionBatch, SentenceRecord, reveal_labels, select_random
from .prep import DedupIndex, RoundPlan, balance_undersample, partition_rounds
from .rng import RngStream


@dataclass
class ExperimentConfig:
    strategies: list[str] = field(default_factory=lambda: ["random"])
    seed: int = 0
    per_iteration: int = 60
    iterations: int = 100
    budget_per_class: int = 3000
    rounds: int = 6
    subsets_per_round: int = 10
    dev_per_class: int = 250
    test_per_class: int = 250
    dedup_threshold: float = 0.8
    k_neighbors: int = 10
    language: str = "synthetic"
    train: TrainConfig = field(default_factory=TrainConfig)
    anchor: AnchorConfig = field(default_factory=AnchorConfig)
    dataset_path: Optional[str] = None
    embeddings_path: Optional[str] = None
    surprisal_path: Optional[str] = None

    def __post_init__(self) -> None:
        for name in (
            "per_iteration",
            "iterations",
            "budget_per_class",
            "rounds",
            "subsets_per_round",
            "dev_per_class",
            "test_per_class",
        ):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


@dataclass
class RunResult:
    """Per-(round, shots) macro-F1 cells for one strategy."""

    strategy: str
    cells: dict[tuple[int, int], float]
    shot_grid: list[int]
    n_rounds: int

    def averaged_curve(self) -> dict[int, float]:
        """Mean F1 over rounds per shot size."""
        return {
            s: float(np.mean([self.cells[(r, s)] for r in range(self.n_rounds)]))
            for s in self.shot_grid
        }


@dataclass
class _StrategySpec:
    needs_probs: bool
    needs_surprisal: bool
    select: Callable


def _geometry_spec(fn, metric: geometry.Metric) -> _StrategySpec:
    return _StrategySpec(
        needs_probs=False,
        needs_surprisal=False,
        select=lambda pool, m, rng, ctx: fn(pool, m, metric, rng),
    )


def _greedy_spec(metric: geometry.Metric) -> _StrategySpec:
    return _StrategySpec(
        needs_probs=False,
        needs_surprisal=False,
        select=lambda pool, m, rng, ctx: coreset.select_greedy_coreset(
            pool, m, metric, rng, min_dist_cache=ctx.get("greedy_cache")
        ),
    )


def strategy_registry() -> dict[str, _StrategySpec]:
    g = geometry
    reg: dict[str, _StrategySpec] = {
        "random": _StrategySpec(
            False, False, lambda pool, m, rng, ctx: select_random(pool, m, rng)
        ),
        "pool-lightweight": _StrategySpec(
            False,
            False,
            lambda pool, m, rng, ctx: coreset.select_lightweight_coreset(pool, m, rng),
        ),
        "pool-greedy": _greedy_spec(g.Metric.EUCLIDEAN),
        "pool-greedy-cosine": _greedy_spec(g.Metric.COSINE),
        "pool-alps": _StrategySpec(
            False,
            True,
            lambda pool, m, rng, ctx: select_alps(pool, ctx["surprisal"], m, rng),
        ),
        "pool-entropy": _StrategySpec(
            True,
            False,
            lambda pool, m, rng, ctx: signals.select_entropy(
                ctx["probs_unlabeled"], m, indices=pool.unlabeled_indices()
            ),
        ),
        "pool-lc": _StrategySpec(
            True,
            False,
            lambda pool, m, rng, ctx: signals.select_least_confidence(
                ctx["probs_unlabeled"], m, indices=pool.unlabeled_indices()
            ),
        ),
        "pool-bt": _StrategySpec(
            True,
            False,
            lambda pool, m, rng, ctx: signals.select_breaking_ties(
                ctx["probs_unlabeled"], m, indices=pool.unlabeled_indices()
            ),
        ),
        "pool-cal": _StrategySpec(
            True,
            False,
            lambda pool, m, rng, ctx: signals.select_cal(
                pool,
                ctx["probs_unlabeled"],
                ctx["probs_labeled"],
                k_neighbors=ctx["k_neighbors"],
                m=m,
            ),
        ),
        "pool-anchor": _StrategySpec(
            True,
            False,
            lambda pool, m, rng, ctx: select_anchor_subpool(
                pool, ctx["probs_unlabeled"], m, ctx["anchor"], rng
            ),
        ),
    }
    for metric in (g.Metric.COSINE, g.Metric.EUCLIDEAN):
        reg[f"{metric.value}-max"] = _geometry_spec(g.select_max_avg, metric)
        reg[f"{metric.value}-min"] = _geometry_spec(g.select_min_avg, metric)
        reg[f"{metric.value}-cycle"] = _geometry_spec(g.select_max_min_cycle, metric)
        reg[f"{metric.value}-max-min-rand"] = _geometry_spec(
            g.select_max_min_rand, metric
        )
    return reg


def run_selection_phase(
    pool: Pool,
    strategy: str,
    cfg: ExperimentConfig,
    rng: RngStream,
    surprisal: Optional[np.ndarray] = None,
) -> dict[int, list[int]]:
    """Iterative selection with per-iteration dedup, then balancing to the
    configured per-class budget.

    Warm-start strategies retrain the stand-in learner on the currently
    labeled set each iteration; while the labeled set lacks a second class
    they fall back to random selection.
    """
    reg = strategy_registry()
    if strategy not in reg:
        raise SelectionError(f"unknown strategy {strategy!r}")
    spec = reg[strategy]
    if spec.needs_surprisal and surprisal is None:
        raise SelectionError(f"strategy {strategy!r} requires a surprisal matrix")

    dedup = DedupIndex(cfg.dedup_threshold)
    accepted: list[int] = []
    revealed_labels: dict[int, int] = {}
    greedy_cache: Optional[np.ndarray] = None
    uses_greedy_cache = strategy in ("pool-greedy", "pool-greedy-cosine")
    greedy_metric = (
        geometry.Metric.COSINE if strategy == "pool-greedy-cosine" else geometry.Metric.EUCLIDEAN
    )

    for it in range(cfg.iterations):
        if cfg.per_iteration > len(pool.unlabeled):
            raise SelectionError(
                f"pool exhausted at iteration {it}: "
                f"{len(pool.unlabeled)} unlabeled < {cfg.per_iteration}"
            )
        it_rng = rng.child(f"{strategy}/iter/{it}")
        ctx: dict = {
            "surprisal": surprisal,
            "k_neighbors": cfg.k_neighbors,
            "anchor": cfg.anchor,
            "greedy_cache": greedy_cache,
        }
        fallback = False
        if spec.needs_probs:
            labeled = pool.labeled_indices()
            classes = {revealed_labels[int(i)] for i in labeled}
            if len(classes) < 2:
                fallback = True  # cold start: no trainable signal yet
            else:
                model = train(
                    pool.embeddings[labeled],
                    [revealed_labels[int(i)] for i in labeled],
                    cfg.train,
                )
                ctx["probs_unlabeled"] = predict_proba(
                    model, pool.embeddings[pool.unlabeled_indices()]
                )
                ctx["probs_labeled"] = predict_proba(model, pool.embeddings[labeled])
        if fallback:
            batch = select_random(pool, cfg.per_iteration, it_rng)
        else:
            batch = spec.select(pool, cfg.per_iteration, it_rng, ctx)

        kept = dedup.filter([pool.records[i].text for i in batch.indices])
        survivors = [batch.indices[p] for p in kept]
        for idx, label in reveal_labels(pool, SelectionBatch(survivors, strategy, it)):
            accepted.append(idx)
            revealed_labels[idx] = label
        if uses_greedy_cache and survivors:
            if greedy_cache is None:
                greedy_cache = np.full(len(pool), np.inf)
            for idx in survivors:
                coreset.update_min_distances(
                    pool.embeddings, greedy_cache, idx, greedy_metric
                )

    by_class: dict[int, list[int]] = {}
    for idx in accepted:
        by_class.setdefault(revealed_labels[idx], []).append(idx)
    if len(by_class) < 2:
        raise ShortfallError("selection revealed fewer than two classes")
    balanced = balance_undersample(by_class, rng.child(f"{strategy}/balance"))
    size = len(next(iter(balanced.values())))
    if size < cfg.budget_per_class:
        raise ShortfallError(
            f"minority class has {size} accepted instances, "
            f"below the {cfg.budget_per_class} budget"
        )
    if size > cfg.budget_per_class:
        for c in sorted(balanced):
            gen = rng.child(f"{strategy}/trim/{c}").generator()
            chosen = gen.choice(size, size=cfg.budget_per_class, replace=False)
            balanced[c] = [balanced[c][i] for i in sorted(chosen)]
    return balanced


def run_fsl_phase(
    plan: RoundPlan,
    pool: Pool,
    dev: tuple[np.ndarray, np.ndarray],
    test: tuple[np.ndarray, np.ndarray],
    cfg: ExperimentConfig,
    strategy: str,
    dev_test_pool_indices: Optional[set[int]] = None,
) -> RunResult:
    """Train the stand-in learner per (round, shots) cell and score macro F1
    on the fixed test set.

    ``dev_test_pool_indices`` holds pool indices reserved for dev/test when
    those sets were carved from the same pool; any overlap with a training
    subset is a hard leakage error.
    """
    cells: dict[tuple[int, int], float] = {}
    test_X, test_y = test
    for r in range(plan.n_rounds):
        for shots in plan.shot_grid:
            subset = plan.subset(r, shots)
            train_idx = [i for c in sorted(subset) for i in subset[c]]
            if dev_test_pool_indices and set(train_idx) & dev_test_pool_indices:
                raise SelectionError("train/test leakage: overlapping indices")
            labels = [c for c in sorted(subset) for _ in subset[c]]
            model = train(pool.embeddings[train_idx], labels, cfg.train)
            f1 = macro_f1(predict(model, test_X), test_y)
            cells[(r, shots)] = f1
    return RunResult(
        strategy=strategy,
        cells=cells,
        shot_grid=plan.shot_grid,
        n_rounds=plan.n_rounds,
    )


# ---------------------------------------------------------------------------
# Derived analyses over averaged F1 curves


def incremental_improvement(curve: dict[int, float]) -> dict[int, float]:
    """F1 delta between consecutive grid points."""
    shots = sorted(curve)
    if len(shots) < 2:
        raise ValueError("curve needs at least two grid points")
    return {s: curve[s] - curve[prev] for prev, s in zip(shots, shots[1:])}


def cumulative_improvement(
    curve: dict[int, float], base_shots: Optional[int] = None
) -> dict[int, float]:
    """F1 delta of every grid point from the base (smallest) point."""
    shots = sorted(curve)
    base = shots[0] if base_shots is None else base_shots
    if base not in curve:
        raise ValueError(f"curve is missing the {base}-shot base point")
    return {s: curve[s] - curve[base] for s in shots}


def reduction_percentage(
    strategy_curve: dict[int, float], baseline_curve: dict[int, float]
) -> Optional[float]:
    """Labeling reduction: compare the strategy's smallest-shot F1 with the
    first baseline point matching it. None when the baseline never matches."""
    s0 = min(strategy_curve)
    target = strategy_curve[s0]
    for s in sorted(baseline_curve):
        if baseline_curve[s] >= target:
            return (s - s0) / s * 100.0
    return None


def strategy_vs_random_diff(
    curves: dict[str, dict[int, float]], baseline: str = "random"
) -> dict[str, dict[int, float]]:
    """Per (strategy, shots): F1(random) - F1(strategy); negative means the
    strategy beat random."""
    if baseline not in curves:
        raise ValueError(f"baseline curve {baseline!r} missing")
    base = curves[baseline]
    return {
        name: {s: base[s] - curve[s] for s in sorted(curve)}
        for name, curve in curves.items()
        if name != baseline
    }


# ---------------------------------------------------------------------------
# Full pipeline


def _split_dev_test(
    records: Sequence[SentenceRecord],
    embeddings: np.ndarray,
    cfg: ExperimentConfig,
    rng: RngStream,
) -> tuple[list[int], dict[str, list[int]]]:
    """Reserve dev/test indices per class; returns (selection indices, reserved)."""
    by_class: dict[int, list[int]] = {}
    for i, rec in enumerate(records):
        if rec.gold_label is not None:
            by_class.setdefault(rec.gold_label, []).append(i)
    reserved: dict[str, list[int]] = {"dev": [], "test": []}
    taken: set[int] = set()
    for split, per_class in (("test", cfg.test_per_class), ("dev", cfg.dev_per_class)):
        for c in sorted(by_class):
            available = [i for i in by_class[c] if i not in taken]
            if len(available) < per_class:
                raise ShortfallError(
                    f"class {c}: {len(available)} instances available for the "
                    f"{split} split, need {per_class}"
                )
            gen = rng.child(f"split/{split}/{c}").generator()
            chosen = gen.choice(len(available), size=per_class, replace=False)
            picked = [available[i] for i in sorted(chosen)]
            reserved[split].extend(picked)
            taken.update(picked)
    selection = [i for i in range(len(records)) if i not in taken]
    return selection, reserved


def run_experiment(
    records: Sequence[SentenceRecord],
    embeddings: np.ndarray,
    cfg: ExperimentConfig,
    surprisal: Optional[np.ndarray] = None,
) -> dict:
    """Run every configured strategy end to end.

    Returns {"results": [RunResult...], "curves": {...}, "analyses": {...}}.
    """
    rng = RngStream(cfg.seed)
    embeddings = np.asarray(embeddings, dtype=float)
    selection_idx, reserved = _split_dev_test(records, embeddings, cfg, rng)

    dev = (
        embeddings[reserved["dev"]],
        np.array([records[i].gold_label for i in reserved["dev"]], dtype=int),
    )
    test = (
        embeddings[reserved["test"]],
        np.array([records[i].gold_label for i in reserved["test"]], dtype=int),
    )
    sel_records = [records[i] for i in selection_idx]
    sel_embeddings = embeddings[selection_idx]
    sel_surprisal = surprisal[selection_idx] if surprisal is not None else None

    results: list[RunResult] = []
    for strategy in cfg.strategies:
        pool = Pool(sel_records, sel_embeddings)
        balanced = run_selection_phase(
            pool, strategy, cfg, rng, surprisal=sel_surprisal
        )
        plan = partition_rounds(
            balanced,
            rng.child(f"{strategy}/partition"),
            rounds=cfg.rounds,
            subsets=cfg.subsets_per_round,
        )
        result = run_fsl_phase(plan, pool, dev, test, cfg, strategy)
        results.append(result)
        pool.check_partition()

    curves = {r.strategy: r.averaged_curve() for r in results}
    analyses: dict = {
        "incremental": {s: incremental_improvement(c) for s, c in curves.items()},
        "cumulative": {s: cumulative_improvement(c) for s, c in curves.items()},
    }
    if "random" in curves:
        analyses["reduction_vs_random"] = {
            s: reduction_percentage(c, curves["random"])
            for s, c in curves.items()
            if s != "random"
        }
        analyses["vs_random"] = strategy_vs_random_diff(curves)
    return {"results": results, "curves": curves, "analyses": analyses}


def write_results_csv(path, results: Sequence[RunResult], language: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["language", "strategy", "round", "shots", "f1"])
        for result in results:
            for (r, shots) in sorted(result.cells):
                writer.writerow(
                    [language, result.strategy, r, shots, f"{result.cells[(r, shots)]:.10f}"]
                )


def write_summary_json(path, outcome: dict, cfg: ExperimentConfig) -> None:
    payload = {
        "language": cfg.language,
        "seed": cfg.seed,
        "curves": {
            s: {str(k): v for k, v in sorted(c.items())}
            for s, c in sorted(outcome["curves"].items())
        },
        "analyses": _jsonify(outcome["analyses"]),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _jsonify(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))}
    if isinstance(obj, float):
        return obj
    return obj
