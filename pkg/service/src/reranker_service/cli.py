"""Command line: initialize a base checkpoint, fine-tune it on the engine's
dataset files, and serve the scoring endpoint.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .data import (
    build_pair_groups,
    read_answers,
    read_qrels,
    read_questions,
    read_run,
    read_splits,
)
from .encoding import FORMATS
from .errors import ServiceError
from .model import (
    EncoderConfig,
    base_metadata,
    fresh_model,
    save_checkpoint,
)
from .training import TrainConfig, train
from .vocab import base_vocabulary

TRAIN_DEFAULTS = {
    "learning_rate": 7e-6,
    "batch_size": 32,
    "max_sequence_length": 512,
    "negatives_per_positive": 4,
    "epochs": 2,
    "seed": 13,
}


def _cmd_init(args: argparse.Namespace) -> int:
    config = EncoderConfig(
        hidden_size=args.hidden_size,
        num_layers=args.num_layers,
        num_heads=args.num_heads,
        intermediate_size=args.intermediate_size,
        max_position=args.max_position,
        dropout=args.dropout,
    )
    vocab = base_vocabulary()
    metadata = base_metadata(args.format, len(vocab), config, args.seed)
    model = fresh_model(metadata["vocab_size"], config, args.seed)
    out = save_checkpoint(args.out, model, vocab, metadata)
    print(
        f"initialized format={args.format} vocab={metadata['vocab_size']} "
        f"params={sum(p.numel() for p in model.parameters())} -> {out}",
        flush=True,
    )
    return 0


def _train_config(args: argparse.Namespace) -> TrainConfig:
    overrides: dict[str, object] = {}
    if args.config is not None:
        try:
            payload = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ServiceError(f"--config {args.config}: {exc}")
        if not isinstance(payload, dict):
            raise ServiceError(f"--config {args.config}: expected a JSON object")
        unknown = set(payload) - set(TRAIN_DEFAULTS)
        if unknown:
            raise ServiceError(
                f"--config {args.config}: unknown keys {sorted(unknown)!r}, "
                f"expected among {sorted(TRAIN_DEFAULTS)!r}"
            )
        overrides = payload

    values: dict[str, object] = {}
    for name, default in TRAIN_DEFAULTS.items():
        from_cli = getattr(args, name)
        if from_cli is not None:
            values[name] = from_cli
        elif name in overrides:
            values[name] = overrides[name]
        else:
            values[name] = default
    return TrainConfig(base_encoder=str(args.base), **values)


def _cmd_train(args: argparse.Namespace) -> int:
    config = _train_config(args)
    questions = read_questions(args.questions)
    answers = read_answers(args.answers)
    relevant = read_qrels(args.qrels)
    splits = read_splits(args.splits)
    run = read_run(args.run) if args.run else None

    from .model import load_checkpoint

    format = load_checkpoint(config.base_encoder).metadata["format"]
    groups = {
        name: build_pair_groups(
            questions,
            answers,
            relevant,
            splits[name],
            format,
            config.negatives_per_positive,
            config.seed,
            run,
        )
        for name in ("train", "validation")
    }
    result = train(config, groups["train"], groups["validation"], args.out)
    print(
        f"trained format={format} steps={len(result.training_log['steps'])} "
        f"best_epoch={result.metadata['best_epoch']} "
        f"validation_map={result.metadata['validation_map']:.4f} "
        f"-> {result.directory}",
        flush=True,
    )
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.checkpoint)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reranker-service",
        description="cross-encoder training and batch-scoring service",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("init", help="create an untrained base checkpoint")
    p.add_argument("--out", required=True, help="checkpoint directory to create")
    p.add_argument("--format", required=True, choices=FORMATS)
    p.add_argument("--seed", type=int, default=13)
    p.add_argument("--hidden-size", type=int, default=128)
    p.add_argument("--num-layers", type=int, default=2)
    p.add_argument("--num-heads", type=int, default=4)
    p.add_argument("--intermediate-size", type=int, default=256)
    p.add_argument("--max-position", type=int, default=512)
    p.add_argument("--dropout", type=float, default=0.1)
    p.set_defaults(handler=_cmd_init)

    p = commands.add_parser("train", help="fine-tune a base checkpoint")
    p.add_argument("--base", required=True, help="base checkpoint directory")
    p.add_argument("--questions", required=True, help="questions JSONL")
    p.add_argument("--answers", required=True, help="answers JSONL")
    p.add_argument("--qrels", required=True, help="TREC qrels file")
    p.add_argument("--splits", required=True, help="splits manifest")
    p.add_argument("--run", help="first-stage run file for sampled negatives")
    p.add_argument("--out", required=True, help="checkpoint directory to write")
    p.add_argument("--config", help="JSON file with hyperparameter defaults")
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--max-len", dest="max_sequence_length", type=int)
    p.add_argument(
        "--negatives-per-positive", dest="negatives_per_positive", type=int
    )
    p.add_argument("--epochs", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=_cmd_train)

    p = commands.add_parser("serve", help="serve the scoring endpoint")
    p.add_argument("--checkpoint", required=True, help="checkpoint directory")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8400)
    p.set_defaults(handler=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ServiceError as exc:
        print(f"error: {exc}", file=sys.stderr, flush=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
