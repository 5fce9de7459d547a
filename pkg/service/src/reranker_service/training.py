"""Fine-tuning: binary cross-entropy on the relevance logit, Adam, per-step
loss logging, per-epoch validation scoring, and best-epoch selection.
"""

from __future__ import annotations

import math
import random
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import NamedTuple

import torch
from torch import nn

from .data import NEGATIVE_SAMPLING_SPEC, PairGroup
from .encoding import EncodedPair, encode_pair
from .errors import InputDataError, TrainingDivergedError
from .model import (
    CrossEncoder,
    load_checkpoint,
    save_checkpoint,
    score_encoded,
    VOCAB_FILE,
)

VALIDATION_CUTOFF = 10


@dataclass(frozen=True)
class TrainConfig:
    base_encoder: str
    learning_rate: float = 7e-6
    batch_size: int = 32
    max_sequence_length: int = 512
    negatives_per_positive: int = 4
    epochs: int = 2
    seed: int = 13

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise InputDataError(
                f"learning_rate must be positive, got {self.learning_rate}"
            )
        if self.batch_size < 2:
            raise InputDataError(
                f"batch_size must be at least 2, got {self.batch_size}"
            )
        if self.max_sequence_length < 8:
            raise InputDataError(
                f"max_sequence_length {self.max_sequence_length} is too small"
            )
        if self.negatives_per_positive < 1:
            raise InputDataError(
                "negatives_per_positive must be positive, got "
                f"{self.negatives_per_positive}"
            )
        if self.epochs < 1:
            raise InputDataError(f"epochs must be positive, got {self.epochs}")


class TrainResult(NamedTuple):
    directory: Path
    metadata: dict
    training_log: dict


def _collate(batch: list[tuple[EncodedPair, float]]) -> tuple[torch.Tensor, ...]:
    width = max(len(pair.input_ids) for pair, _ in batch)
    ids = torch.zeros((len(batch), width), dtype=torch.long)
    types = torch.zeros((len(batch), width), dtype=torch.long)
    mask = torch.zeros((len(batch), width), dtype=torch.long)
    labels = torch.zeros(len(batch), dtype=torch.float32)
    for row, (pair, label) in enumerate(batch):
        n = len(pair.input_ids)
        ids[row, :n] = torch.tensor(pair.input_ids, dtype=torch.long)
        types[row, :n] = torch.tensor(pair.token_type_ids, dtype=torch.long)
        mask[row, :n] = 1
        labels[row] = label
    return ids, types, mask, labels


def average_precision_at(
    ranked_labels: list[float], k: int = VALIDATION_CUTOFF
) -> float:
    relevant_total = sum(1 for label in ranked_labels if label > 0)
    if relevant_total == 0:
        return 0.0
    hits = 0
    precision_sum = 0.0
    for position, label in enumerate(ranked_labels[:k], start=1):
        if label > 0:
            hits += 1
            precision_sum += hits / position
    return precision_sum / relevant_total


def validation_map(
    model: CrossEncoder,
    encoded_groups: list[tuple[PairGroup, list[EncodedPair]]],
    k: int = VALIDATION_CUTOFF,
) -> float:
    """Mean average precision at k over pair groups, ranked by model score
    (ties keep the group's pair order).
    """
    if not encoded_groups:
        raise InputDataError("validation needs at least one pair group")
    total = 0.0
    for group, encoded in encoded_groups:
        scores = score_encoded(model, encoded)
        order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
        ranked_labels = [group.pairs[i].label for i in order]
        total += average_precision_at(ranked_labels, k)
    return total / len(encoded_groups)


def _encode_groups(
    tokenizer, groups: list[PairGroup], format: str, max_len: int
) -> list[tuple[PairGroup, list[EncodedPair]]]:
    return [
        (
            group,
            [
                encode_pair(
                    tokenizer, list(pair.segments), pair.answer_text, format, max_len
                )
                for pair in group.pairs
            ],
        )
        for group in groups
    ]


def train(
    config: TrainConfig,
    train_groups: list[PairGroup],
    validation_groups: list[PairGroup],
    out_dir: Path | str,
) -> TrainResult:
    """Fine-tunes the base checkpoint and writes the best-validation epoch.

    The training log records the loss of every optimizer step and the
    validation score of every epoch; a non-finite loss aborts immediately.
    """
    base = load_checkpoint(config.base_encoder)
    format = base.metadata["format"]
    max_position = base.metadata["encoder"]["max_position"]
    if config.max_sequence_length > max_position:
        raise InputDataError(
            f"max_sequence_length {config.max_sequence_length} exceeds the "
            f"encoder's positional limit {max_position}"
        )
    if not train_groups:
        raise InputDataError("training split produced no pairs")
    if not validation_groups:
        raise InputDataError("validation split produced no pairs")

    max_len = config.max_sequence_length
    train_pairs = [
        (encoded, pair.label)
        for group, encoded_list in _encode_groups(
            base.tokenizer, train_groups, format, max_len
        )
        for pair, encoded in zip(group.pairs, encoded_list)
    ]
    encoded_validation = _encode_groups(
        base.tokenizer, validation_groups, format, max_len
    )

    torch.manual_seed(config.seed)
    order_rng = random.Random(config.seed)
    model = base.model
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    loss_fn = nn.BCEWithLogitsLoss()

    steps: list[dict] = []
    epochs: list[dict] = []
    best_map = -math.inf
    best_epoch = 0
    best_state: dict[str, torch.Tensor] = {}
    step = 0
    for epoch in range(1, config.epochs + 1):
        model.train()
        indices = list(range(len(train_pairs)))
        order_rng.shuffle(indices)
        for start in range(0, len(indices), config.batch_size):
            batch = [train_pairs[i] for i in indices[start : start + config.batch_size]]
            ids, types, mask, labels = _collate(batch)
            optimizer.zero_grad()
            logits = model(ids, mask, types)
            loss = loss_fn(logits, labels)
            loss_value = float(loss.item())
            if not math.isfinite(loss_value):
                raise TrainingDivergedError(
                    f"loss {loss_value} at step {step + 1} (epoch {epoch}); "
                    f"last finite losses: {[s['loss'] for s in steps[-3:]]}"
                )
            loss.backward()
            optimizer.step()
            step += 1
            steps.append({"step": step, "epoch": epoch, "loss": loss_value})

        epoch_map = validation_map(model, encoded_validation)
        epochs.append({"epoch": epoch, "validation_map": epoch_map})
        if epoch_map > best_map:
            best_map = epoch_map
            best_epoch = epoch
            best_state = {
                key: value.detach().clone()
                for key, value in model.state_dict().items()
            }

    model.load_state_dict(best_state)
    model.eval()

    metadata = {
        key: base.metadata[key]
        for key in (
            "format",
            "markers",
            "base_vocab_size",
            "vocab_size",
            "encoder",
            "scoring_head",
            "loss",
            "optimizer",
        )
    }
    metadata.update(asdict(config))
    metadata.update(
        {
            "trained": True,
            "negative_sampling": NEGATIVE_SAMPLING_SPEC,
            "best_epoch": best_epoch,
            "validation_map": best_map,
        }
    )
    training_log = {"steps": steps, "epochs": epochs, "best_epoch": best_epoch}

    base_vocab = (
        (Path(config.base_encoder) / VOCAB_FILE)
        .read_text(encoding="utf-8")
        .splitlines()
    )
    directory = save_checkpoint(out_dir, model, base_vocab, metadata, training_log)
    return TrainResult(directory, metadata, training_log)
