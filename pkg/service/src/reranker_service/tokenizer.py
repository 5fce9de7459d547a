"""Tokenizer construction and marker-token vocabulary extension."""

from __future__ import annotations

from pathlib import Path

from transformers import BertTokenizer

from .errors import VocabularyError

MARKER_TOKENS = ("[S]", "[D]", "[T]")


def load_tokenizer(vocab_file: Path | str) -> BertTokenizer:
    """WordPiece tokenizer over a local vocabulary file; no remote lookups.

    The vocabulary path is passed positionally: the parameter was renamed
    between transformers major versions but stayed first.
    """
    return BertTokenizer(str(vocab_file), do_lower_case=True)


def extend_vocabulary(
    tokenizer: BertTokenizer, markers: tuple[str, ...] = MARKER_TOKENS
) -> list[int]:
    """Add the marker tokens as atomic special tokens; returns their ids.

    Preconditions: no marker may already be a special token or tokenize to a
    single id (it must be genuinely new). Ids are appended after the base
    vocabulary in the order given, so they are stable across loads.
    """
    existing = set(tokenizer.all_special_tokens)
    for marker in markers:
        if marker in existing:
            raise VocabularyError(
                f"marker {marker!r} collides with an existing special token"
            )
        if len(tokenizer.encode(marker, add_special_tokens=False)) <= 1:
            raise VocabularyError(
                f"marker {marker!r} is already an atomic vocabulary entry"
            )
    added = tokenizer.add_special_tokens(
        {"additional_special_tokens": list(markers)}
    )
    if added != len(markers):
        raise VocabularyError(
            f"expected to add {len(markers)} marker tokens, added {added}"
        )
    return marker_ids(tokenizer, markers)


def marker_ids(
    tokenizer: BertTokenizer, markers: tuple[str, ...] = MARKER_TOKENS
) -> list[int]:
    """Ids of the marker tokens, verifying each is a single atomic entry."""
    ids: list[int] = []
    for marker in markers:
        encoded = tokenizer.encode(marker, add_special_tokens=False)
        if len(encoded) != 1 or encoded[0] == tokenizer.unk_token_id:
            raise VocabularyError(f"marker {marker!r} is not an atomic token")
        ids.append(encoded[0])
    return ids
