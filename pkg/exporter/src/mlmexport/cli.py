"""Command-line entry point for the exporter.

Exit codes mirror the selection engine's CLI: 0 success, 1 usage error,
2 data/model error.
"""

from __future__ import annotations

import argparse
import sys

from activepool import DataFormatError, load_pattern, load_verbalizer

from .export import (
    DEFAULT_MODEL,
    ExportError,
    ExportJob,
    export_embeddings,
    export_pet_probs,
    export_surprisal,
    load_model,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlmexport",
        description="Export masked-LM features in the selection engine's matrix format",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("export", help="write one matrix file")
    p.add_argument("--mode", required=True, choices=["embed", "surprisal", "pet-probs"])
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--model", default=DEFAULT_MODEL)
    p.add_argument("--max-length", type=int, default=256)
    p.add_argument("--surprisal-length", type=int, default=128)
    p.add_argument("--pattern-id", type=int, default=1)
    p.add_argument("--language", choices=["ca", "eu", "sq"])
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        job = ExportJob(
            input_path=args.input,
            output_path=args.output,
            mode=args.mode,
            model_name=args.model,
            max_length=args.max_length,
            surprisal_length=args.surprisal_length,
        )
        if args.mode == "embed":
            matrix = export_embeddings(job)
        elif args.mode == "surprisal":
            matrix = export_surprisal(job)
        else:
            if not args.language:
                print("error: --mode pet-probs requires --language", file=sys.stderr)
                return EXIT_USAGE
            pattern = load_pattern(args.language, args.pattern_id)
            verbalizer = load_verbalizer(args.language)
            model_pair = load_model(job.model_name)
            matrix = export_pet_probs(job, pattern, verbalizer, model_pair=model_pair)
        print(f"wrote {matrix.shape[0]}x{matrix.shape[1]} matrix to {args.output}")
        return EXIT_OK
    except (ExportError, DataFormatError, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    raise SystemExit(main())
