"""Pair encoding: [CLS] query side [SEP] answer [SEP] with marker layout,
segment-aware truncation, and the format conventions of the wire protocol.
"""

from __future__ import annotations

from typing import NamedTuple

from transformers import BertTokenizer

from .errors import EncodingError
from .tokenizer import MARKER_TOKENS, marker_ids

FORMAT_FS = "fs"
FORMAT_CAT = "cat"
FORMATS = (FORMAT_FS, FORMAT_CAT)

MARKER_NAMES = ("S", "D", "T")
MARKER_TOKEN_BY_NAME = dict(zip(MARKER_NAMES, MARKER_TOKENS))
DESCRIPTION_MARKER = "D"

# [CLS] + [SEP] + [SEP]
_STRUCTURAL_TOKENS = 3


class Segment(NamedTuple):
    text: str
    marker: str | None


class EncodedPair(NamedTuple):
    input_ids: list[int]
    token_type_ids: list[int]


def render_fs_segments(
    subject: str, description: str, tags: tuple[str, ...] | list[str]
) -> list[Segment]:
    """Marked segments: (subject, S), (description, D), ('; '-joined tags, T).

    Empty text keeps its marker so every query shows the same skeleton.
    """
    return [
        Segment(subject, "S"),
        Segment(description, "D"),
        Segment("; ".join(tags), "T"),
    ]


def render_cat_segment(
    subject: str, description: str, tags: tuple[str, ...] | list[str]
) -> list[Segment]:
    """One unmarked segment: subject, description, and tags joined by spaces
    (the tags part is omitted when there are none).
    """
    parts = [subject, description]
    if tags:
        parts.append("; ".join(tags))
    return [Segment(" ".join(parts), None)]


def _reject_literal_markers(text: str, where: str) -> None:
    for token in MARKER_TOKENS:
        if token in text:
            raise EncodingError(f"{where} contains reserved marker {token!r}")


def _check_segments(segments: list[Segment], format: str) -> None:
    if format not in FORMATS:
        raise EncodingError(f"unknown format {format!r}, expected one of {FORMATS}")
    if not segments:
        raise EncodingError("at least one query segment is required")
    if format == FORMAT_CAT:
        if len(segments) != 1 or segments[0].marker is not None:
            raise EncodingError("cat format takes exactly one unmarked segment")
    seen: set[str] = set()
    for position, segment in enumerate(segments):
        where = f"query segment {position}"
        if segment.marker is not None:
            if segment.marker not in MARKER_NAMES:
                raise EncodingError(f"{where}: unknown marker {segment.marker!r}")
            if segment.marker in seen:
                raise EncodingError(f"{where}: duplicate marker {segment.marker!r}")
            seen.add(segment.marker)
        _reject_literal_markers(segment.text, where)


def encode_pair(
    tokenizer: BertTokenizer,
    segments: list[Segment],
    answer_text: str,
    format: str,
    max_len: int,
) -> EncodedPair:
    """Token ids and type ids for one query/answer pair.

    Layout: [CLS], then per segment its text tokens followed by its marker
    token (fs), then [SEP], answer tokens, [SEP]. Over-length sequences lose
    answer tokens from the tail first, then description tokens from the
    tail; markers are never dropped. If the query side cannot fit even with
    an empty description, the pair is unencodable.
    """
    _check_segments(segments, format)
    _reject_literal_markers(answer_text, "answer text")
    if max_len < _STRUCTURAL_TOKENS + 1:
        raise EncodingError(f"max_len {max_len} cannot hold any content")

    marker_id_by_name: dict[str, int] = {}
    if any(segment.marker is not None for segment in segments):
        ids = marker_ids(tokenizer)
        marker_id_by_name = dict(zip(MARKER_NAMES, ids))

    segment_tokens: list[list[int]] = [
        tokenizer.encode(segment.text, add_special_tokens=False)
        for segment in segments
    ]
    answer_tokens = tokenizer.encode(answer_text, add_special_tokens=False)

    def query_length() -> int:
        return sum(
            len(tokens) + (1 if segment.marker is not None else 0)
            for tokens, segment in zip(segment_tokens, segments)
        )

    budget = max_len - _STRUCTURAL_TOKENS - query_length()
    if budget < 0:
        # Answer is fully dropped; recover the deficit from the description.
        deficit = -budget
        description = next(
            (
                position
                for position, segment in enumerate(segments)
                if segment.marker == DESCRIPTION_MARKER
            ),
            None,
        )
        if description is None or len(segment_tokens[description]) < deficit:
            raise EncodingError(
                f"query side alone exceeds max_len {max_len} even after "
                "description truncation"
            )
        kept = len(segment_tokens[description]) - deficit
        segment_tokens[description] = segment_tokens[description][:kept]
        answer_tokens = []
    else:
        answer_tokens = answer_tokens[:budget]

    input_ids = [tokenizer.cls_token_id]
    for tokens, segment in zip(segment_tokens, segments):
        input_ids.extend(tokens)
        if segment.marker is not None:
            input_ids.append(marker_id_by_name[segment.marker])
    input_ids.append(tokenizer.sep_token_id)
    query_side = len(input_ids)
    input_ids.extend(answer_tokens)
    input_ids.append(tokenizer.sep_token_id)

    token_type_ids = [0] * query_side + [1] * (len(input_ids) - query_side)
    return EncodedPair(input_ids, token_type_ids)
