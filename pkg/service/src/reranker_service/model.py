"""Cross-encoder model: compact bidirectional transformer with one linear
scoring head on the start-token representation, plus checkpoint IO.

Checkpoint directory layout:
    vocab.txt          base vocabulary, one token per line (markers excluded)
    weights.pt         state dict of encoder and scoring head
    metadata.json      format, vocabulary sizes, encoder shape, loss and
                       optimizer identifiers, and (for trained models) every
                       training hyperparameter plus the negative-sampling
                       rule, best epoch, and its validation score
    training_log.json  per-step loss and per-epoch validation score
                       (trained checkpoints only)
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import NamedTuple

import torch
from torch import nn
from transformers import BertConfig, BertModel, BertTokenizer

from .encoding import EncodedPair, FORMATS
from .errors import CheckpointError
from .tokenizer import MARKER_TOKENS, extend_vocabulary, load_tokenizer

VOCAB_FILE = "vocab.txt"
WEIGHTS_FILE = "weights.pt"
METADATA_FILE = "metadata.json"
TRAINING_LOG_FILE = "training_log.json"

LOSS_SPEC = "binary cross-entropy on a sigmoid over the single relevance logit"
OPTIMIZER_SPEC = "adam"
HEAD_SPEC = "single linear layer on the start-token representation"


@dataclass(frozen=True)
class EncoderConfig:
    hidden_size: int = 128
    num_layers: int = 2
    num_heads: int = 4
    intermediate_size: int = 256
    max_position: int = 512
    dropout: float = 0.1

    def __post_init__(self) -> None:
        if self.hidden_size % self.num_heads != 0:
            raise CheckpointError(
                f"hidden_size {self.hidden_size} is not a multiple of "
                f"num_heads {self.num_heads}"
            )
        if min(self.hidden_size, self.num_layers, self.num_heads,
               self.intermediate_size, self.max_position) < 1:
            raise CheckpointError("encoder dimensions must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise CheckpointError(f"dropout {self.dropout} out of range")


class CrossEncoder(nn.Module):
    def __init__(self, vocab_size: int, config: EncoderConfig) -> None:
        super().__init__()
        self.encoder_config = config
        bert_config = BertConfig(
            vocab_size=vocab_size,
            hidden_size=config.hidden_size,
            num_hidden_layers=config.num_layers,
            num_attention_heads=config.num_heads,
            intermediate_size=config.intermediate_size,
            max_position_embeddings=config.max_position,
            type_vocab_size=2,
            hidden_dropout_prob=config.dropout,
            attention_probs_dropout_prob=config.dropout,
            pad_token_id=0,
        )
        self.encoder = BertModel(bert_config, add_pooling_layer=False)
        self.head = nn.Linear(config.hidden_size, 1)

    @property
    def vocab_size(self) -> int:
        return self.encoder.get_input_embeddings().num_embeddings

    def forward(
        self,
        input_ids: torch.Tensor,
        attention_mask: torch.Tensor,
        token_type_ids: torch.Tensor,
    ) -> torch.Tensor:
        hidden = self.encoder(
            input_ids=input_ids,
            attention_mask=attention_mask,
            token_type_ids=token_type_ids,
        ).last_hidden_state
        return self.head(hidden[:, 0]).squeeze(-1)


def fresh_model(vocab_size: int, config: EncoderConfig, seed: int) -> CrossEncoder:
    """Deterministically initialized model: same seed, same weights."""
    torch.manual_seed(seed)
    return CrossEncoder(vocab_size, config)


def score_encoded(model: CrossEncoder, encoded: list[EncodedPair]) -> list[float]:
    """Scores one pair per forward pass, so a pair's score never depends on
    its batch companions and identical inputs give bit-identical outputs.
    """
    model.eval()
    scores: list[float] = []
    with torch.no_grad():
        for pair in encoded:
            ids = torch.tensor([pair.input_ids], dtype=torch.long)
            types = torch.tensor([pair.token_type_ids], dtype=torch.long)
            mask = torch.ones_like(ids)
            scores.append(float(model(ids, mask, types).item()))
    return scores


class LoadedCheckpoint(NamedTuple):
    model: CrossEncoder
    tokenizer: BertTokenizer
    metadata: dict


def base_metadata(
    format: str,
    base_vocab_size: int,
    config: EncoderConfig,
    seed: int,
    max_sequence_length: int | None = None,
) -> dict:
    if format not in FORMATS:
        raise CheckpointError(f"unknown format {format!r}")
    markers = list(MARKER_TOKENS) if format == "fs" else []
    return {
        "format": format,
        "markers": markers,
        "base_vocab_size": base_vocab_size,
        "vocab_size": base_vocab_size + len(markers),
        "max_sequence_length": max_sequence_length or config.max_position,
        "encoder": asdict(config),
        "scoring_head": HEAD_SPEC,
        "loss": LOSS_SPEC,
        "optimizer": OPTIMIZER_SPEC,
        "seed": seed,
        "trained": False,
    }


def save_checkpoint(
    directory: Path | str,
    model: CrossEncoder,
    base_vocab: list[str],
    metadata: dict,
    training_log: dict | None = None,
) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if model.vocab_size != metadata["vocab_size"]:
        raise CheckpointError(
            f"model embeds {model.vocab_size} tokens but metadata says "
            f"{metadata['vocab_size']}"
        )
    if len(base_vocab) != metadata["base_vocab_size"]:
        raise CheckpointError(
            f"vocabulary has {len(base_vocab)} entries but metadata says "
            f"{metadata['base_vocab_size']}"
        )
    (directory / VOCAB_FILE).write_text("\n".join(base_vocab) + "\n", encoding="utf-8")
    torch.save(model.state_dict(), directory / WEIGHTS_FILE)
    (directory / METADATA_FILE).write_text(
        json.dumps(metadata, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    if training_log is not None:
        (directory / TRAINING_LOG_FILE).write_text(
            json.dumps(training_log, indent=2) + "\n", encoding="utf-8"
        )
    return directory


def load_checkpoint(directory: Path | str) -> LoadedCheckpoint:
    directory = Path(directory)
    for name in (VOCAB_FILE, WEIGHTS_FILE, METADATA_FILE):
        if not (directory / name).is_file():
            raise CheckpointError(f"{directory} is missing {name}")
    try:
        metadata = json.loads((directory / METADATA_FILE).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{directory}/{METADATA_FILE}: not valid JSON: {exc}")
    for key in ("format", "base_vocab_size", "vocab_size", "encoder",
                "max_sequence_length"):
        if key not in metadata:
            raise CheckpointError(f"{directory}: metadata lacks {key!r}")
    if metadata["format"] not in FORMATS:
        raise CheckpointError(f"{directory}: unknown format {metadata['format']!r}")

    tokenizer = load_tokenizer(directory / VOCAB_FILE)
    if len(tokenizer) != metadata["base_vocab_size"]:
        raise CheckpointError(
            f"{directory}: vocabulary file has {len(tokenizer)} entries, "
            f"metadata says {metadata['base_vocab_size']}"
        )
    if metadata["format"] == "fs":
        extend_vocabulary(tokenizer)
    if len(tokenizer) != metadata["vocab_size"]:
        raise CheckpointError(
            f"{directory}: tokenizer has {len(tokenizer)} tokens after marker "
            f"extension, metadata says {metadata['vocab_size']}"
        )

    try:
        config = EncoderConfig(**metadata["encoder"])
    except TypeError as exc:
        raise CheckpointError(f"{directory}: bad encoder configuration: {exc}")
    model = CrossEncoder(metadata["vocab_size"], config)
    state = torch.load(directory / WEIGHTS_FILE, map_location="cpu")
    try:
        model.load_state_dict(state)
    except RuntimeError as exc:
        raise CheckpointError(f"{directory}: weights do not fit the model: {exc}")
    model.eval()
    return LoadedCheckpoint(model, tokenizer, metadata)
