"""Command-line surface.

Subcommands: ``fit``, ``tokenize``, ``features``, ``stats``, ``eval``,
``synth``.  Every run is driven by a JSON config document; a handful of
flags override individual fields so a recorded config plus the command line
fully determines the outputs.

Exit codes: 0 on success, 2 for input or configuration problems, 3 for data
contract violations, 4 for internal failures.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback

from . import pipeline
from .config import PipelineConfig, load_config
from .errors import (
    AlignmentError,
    BoundsError,
    CalibrationError,
    ChannelLookupError,
    ContractError,
    DataError,
    FormatError,
    InsufficientDataError,
    ParameterError,
    ParseError,
    ShapeError,
    TruncationError,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONTRACT = 3
EXIT_INTERNAL = 4

_INPUT_ERRORS = (
    ParseError,
    FormatError,
    TruncationError,
    CalibrationError,
    ParameterError,
    ChannelLookupError,
    InsufficientDataError,
    FileNotFoundError,
    IsADirectoryError,
    PermissionError,
)
_CONTRACT_ERRORS = (ContractError, AlignmentError, ShapeError, BoundsError, DataError)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mstok",
        description="Microstate tokenization pipeline over EEG recordings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=False, help="JSON config document")
        p.add_argument("--out", help="override the output directory")
        p.add_argument("--seed", type=int, help="override the seed")
        p.add_argument("--k", type=int, help="override the cluster count")
        p.add_argument("--batch-size", type=int, help="override the batch size")
        p.add_argument(
            "--mode", choices=("literal", "weighted"), help="override the update rule"
        )
        return p

    common(sub.add_parser("fit", help="fit a codebook on GFP peaks"))
    p = common(sub.add_parser("tokenize", help="apply a codebook, window, persist"))
    p.add_argument("--codebook", required=True, help="codebook file from `fit`")
    common(sub.add_parser("features", help="band-power baseline features"))
    p = common(sub.add_parser("stats", help="rank microstates per group and label"))
    p.add_argument("--dataset", required=True, help="directory written by `tokenize`")
    p = common(sub.add_parser("eval", help="train and score the classifier"))
    p.add_argument("--dataset", required=True, help="windowed dataset directory")
    common(sub.add_parser("synth", help="emit a synthetic labeled corpus"))
    return parser


def _resolve_config(args) -> PipelineConfig:
    config = load_config(args.config) if args.config else PipelineConfig()
    if args.out is not None:
        config.out_dir = args.out
    if args.seed is not None:
        config.seed = args.seed
    if args.k is not None:
        config.k = args.k
    if args.batch_size is not None:
        config.batch_size = args.batch_size
    if args.mode is not None:
        config.mode = args.mode
    return config


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    command = args.command
    try:
        config = _resolve_config(args)
        if command == "fit":
            report = pipeline.cmd_fit(config)
            summary = {
                "iterations": report["iterations"],
                "final_shift": report["final_shift"],
                "converged": report["converged"],
                "codebook": report["codebook"],
            }
        elif command == "tokenize":
            summary = pipeline.cmd_tokenize(config, args.codebook)
        elif command == "features":
            summary = pipeline.cmd_features(config)
        elif command == "stats":
            report = pipeline.cmd_stats(config, args.dataset)
            print(report.pop("text"), end="")
            summary = report
        elif command == "eval":
            report = pipeline.cmd_eval(config, args.dataset)
            summary = {
                "representation": report["representation"],
                "test": report["test"],
            }
        elif command == "synth":
            summary = pipeline.cmd_synth(config)
        else:  # pragma: no cover - argparse enforces the choices
            raise ParameterError(f"unknown command {command!r}")
    except _INPUT_ERRORS as exc:
        print(f"mstok {command}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except _CONTRACT_ERRORS as exc:
        print(f"mstok {command}: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except Exception:
        print(f"mstok {command}: internal failure", file=sys.stderr)
        traceback.print_exc()
        return EXIT_INTERNAL

    print(json.dumps(summary, indent=2, sort_keys=True, default=str))
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
