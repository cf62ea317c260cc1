"""Umbrella command-line interface.

Exit codes: 0 success, 1 usage error, 2 data/format error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import matrixio
from .cluster import AnchorConfig
from .errors import DataFormatError, PoolStateError, SelectionError, ShortfallError
from .experiment import (
    ExperimentConfig,
    cumulative_improvement,
    incremental_improvement,
    reduction_percentage,
    run_experiment,
    strategy_registry,
    strategy_vs_random_diff,
    write_results_csv,
    write_summary_json,
)
from .learner import TrainConfig
from .pool import ingest_pool
from .prep import (
    balance_undersample,
    dedup_similar,
    linguistic_profile,
    partition_rounds,
)
from .rng import RngStream

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="activepool",
        description="Pool-based active-learning data selection and simulation",
    )
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--quiet", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a sentence + embedding file pair")
    p.add_argument("--dataset", required=True)
    p.add_argument("--embeddings", required=True)

    p = sub.add_parser("select", help="run one strategy over an ingested pool")
    p.add_argument("--dataset", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--strategy", required=True, choices=sorted(strategy_registry()))
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--surprisal", help="surprisal matrix file (pool-alps)")
    p.add_argument("--probs", help="probability matrix file (warm-start strategies)")

    p = sub.add_parser("dedup", help="drop near-duplicate sentences")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--threshold", type=float, default=0.8)

    p = sub.add_parser("balance", help="undersample the majority class")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)

    p = sub.add_parser("partition", help="build the multi-round subset manifest")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--rounds", type=int, default=6)
    p.add_argument("--subsets", type=int, default=10)

    p = sub.add_parser("profile", help="corpus-level linguistic metrics")
    p.add_argument("--in", dest="input", required=True)

    p = sub.add_parser("run", help="full simulation from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default=".")

    p = sub.add_parser("report", help="analyses over a results CSV")
    p.add_argument("--results", required=True)
    p.add_argument(
        "--analysis",
        required=True,
        choices=["incremental", "cumulative", "reduction", "vs-random"],
    )
    return parser


def load_config(path) -> ExperimentConfig:
    """Plain key=value config mirroring ExperimentConfig fields.

    `strategies` is comma-separated; `train.*` and `anchor.*` prefixes set the
    nested learner/anchor settings.
    """
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DataFormatError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()

    cfg_kwargs: dict = {}
    train_kwargs: dict = {}
    anchor_kwargs: dict = {}
    field_types = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}
    for key, value in values.items():
        if key.startswith("train."):
            sub = key[len("train.") :]
            train_kwargs[sub] = float(value) if sub != "epochs" else int(value)
        elif key.startswith("anchor."):
            sub = key[len("anchor.") :]
            anchor_kwargs[sub] = value if sub == "inner_strategy" else int(value)
        elif key == "strategies":
            cfg_kwargs[key] = [s.strip() for s in value.split(",") if s.strip()]
        elif key in field_types:
            if key in ("dataset_path", "embeddings_path", "surprisal_path", "language"):
                cfg_kwargs[key] = value
            elif key == "dedup_threshold":
                cfg_kwargs[key] = float(value)
            else:
                cfg_kwargs[key] = int(value)
        else:
            raise DataFormatError(f"{path}: unknown config key {key!r}")
    if train_kwargs:
        cfg_kwargs["train"] = TrainConfig(**train_kwargs)
    if anchor_kwargs:
        cfg_kwargs["anchor"] = AnchorConfig(**anchor_kwargs)
    return ExperimentConfig(**cfg_kwargs)


def _read_labeled_records(path):
    records = matrixio.read_sentences(path)
    by_class: dict[int, list[int]] = {}
    for i, obj in enumerate(records):
        if "label" not in obj:
            raise DataFormatError(f"{path}: record {i} lacks a label")
        by_class.setdefault(int(obj["label"]), []).append(i)
    return records, by_class


def _cmd_ingest(args) -> int:
    pool = ingest_pool(args.dataset, args.embeddings)
    counts: dict[str, int] = {}
    for rec in pool.records:
        key = "unlabeled" if rec.gold_label is None else f"label_{rec.gold_label}"
        counts[key] = counts.get(key, 0) + 1
    _emit(args, {"records": len(pool), "dim": pool.embeddings.shape[1], **counts})
    return EXIT_OK


def _cmd_select(args) -> int:
    pool = ingest_pool(args.dataset, args.embeddings)
    spec = strategy_registry()[args.strategy]
    rng = RngStream(args.seed, args.strategy)
    ctx: dict = {"k_neighbors": 10, "anchor": AnchorConfig(), "greedy_cache": None}
    if spec.needs_surprisal:
        if not args.surprisal:
            raise SelectionError(f"{args.strategy} requires --surprisal")
        kind, ctx["surprisal"] = matrixio.read_matrix(args.surprisal)
        if kind != matrixio.KIND_SURPRISAL:
            raise DataFormatError("surprisal file must have kind 2")
    if spec.needs_probs:
        if not args.probs:
            raise SelectionError(f"{args.strategy} requires --probs")
        kind, probs = matrixio.read_matrix(args.probs)
        if kind != matrixio.KIND_PROBABILITY:
            raise DataFormatError("probability file must have kind 3")
        ctx["probs_unlabeled"] = np.asarray(probs, dtype=float)
        ctx["probs_labeled"] = np.empty((0, probs.shape[1]))
    batch = spec.select(pool, args.m, rng, ctx)
    _emit(args, {"strategy": batch.strategy, "indices": batch.indices})
    return EXIT_OK


def _cmd_dedup(args) -> int:
    records = matrixio.read_sentences(args.input)
    kept = dedup_similar([str(r.get("text", "")) for r in records], args.threshold)
    matrixio.write_sentences(args.output, [records[i] for i in kept])
    _emit(args, {"input": len(records), "kept": len(kept)})
    return EXIT_OK


def _cmd_balance(args) -> int:
    records, by_class = _read_labeled_records(args.input)
    balanced = balance_undersample(by_class, RngStream(args.seed, "balance"))
    kept = sorted(i for idx in balanced.values() for i in idx)
    matrixio.write_sentences(args.output, [records[i] for i in kept])
    _emit(args, {c: len(idx) for c, idx in balanced.items()})
    return EXIT_OK


def _cmd_partition(args) -> int:
    _, by_class = _read_labeled_records(args.input)
    plan = partition_rounds(
        by_class, RngStream(args.seed, "partition"), rounds=args.rounds, subsets=args.subsets
    )
    with open(args.output, "w", encoding="utf-8") as fh:
        json.dump(plan.to_manifest(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    _emit(args, {"rounds": plan.n_rounds, "shot_grid": plan.shot_grid})
    return EXIT_OK


def _cmd_profile(args) -> int:
    records = matrixio.read_sentences(args.input)
    profile = linguistic_profile([str(r.get("text", "")) for r in records])
    _emit(args, dataclasses.asdict(profile))
    return EXIT_OK


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.seed:
        cfg.seed = args.seed
    if not cfg.dataset_path or not cfg.embeddings_path:
        raise DataFormatError("config must set dataset_path and embeddings_path")
    pool = ingest_pool(cfg.dataset_path, cfg.embeddings_path)
    surprisal = None
    if cfg.surprisal_path:
        kind, surprisal = matrixio.read_matrix(cfg.surprisal_path)
        if kind != matrixio.KIND_SURPRISAL:
            raise DataFormatError("surprisal file must have kind 2")
        surprisal = np.asarray(surprisal, dtype=float)
    outcome = run_experiment(pool.records, pool.embeddings, cfg, surprisal=surprisal)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_results_csv(out_dir / "results.csv", outcome["results"], cfg.language)
    write_summary_json(out_dir / "summary.json", outcome, cfg)
    _emit(args, {"strategies": cfg.strategies, "out_dir": str(out_dir)})
    return EXIT_OK


def _cmd_report(args) -> int:
    import csv as _csv

    curves: dict[str, dict[int, list[float]]] = {}
    with open(args.results, "r", encoding="utf-8", newline="") as fh:
        for row in _csv.DictReader(fh):
            curves.setdefault(row["strategy"], {}).setdefault(
                int(row["shots"]), []
            ).append(float(row["f1"]))
    averaged = {
        s: {shots: float(np.mean(v)) for shots, v in sorted(c.items())}
        for s, c in curves.items()
    }
    if args.analysis == "incremental":
        out = {s: incremental_improvement(c) for s, c in averaged.items()}
    elif args.analysis == "cumulative":
        out = {s: cumulative_improvement(c) for s, c in averaged.items()}
    elif args.analysis == "reduction":
        if "random" not in averaged:
            raise DataFormatError("reduction analysis needs a random baseline curve")
        out = {
            s: reduction_percentage(c, averaged["random"])
            for s, c in averaged.items()
            if s != "random"
        }
    else:
        out = strategy_vs_random_diff(averaged)
    print(json.dumps(out, indent=2, sort_keys=True, default=str))
    return EXIT_OK


def _emit(args, payload: dict) -> None:
    if not getattr(args, "quiet", False):
        print(json.dumps(payload, indent=2, sort_keys=True, default=str))


_COMMANDS = {
    "ingest": _cmd_ingest,
    "select": _cmd_select,
    "dedup": _cmd_dedup,
    "balance": _cmd_balance,
    "partition": _cmd_partition,
    "profile": _cmd_profile,
    "run": _cmd_run,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except (DataFormatError, PoolStateError, SelectionError, ShortfallError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    raise SystemExit(main())
