"""Wire protocol (version 1): request validation and response bodies.

Mirrors the engine's normative protocol document: POST /score with a JSON
object; every structural violation is answered with HTTP 400 and an error
body, and the response maps exactly the request's pair ids to finite
numbers.
"""

from __future__ import annotations

import math
from typing import NamedTuple

from .encoding import FORMATS, MARKER_NAMES, MARKER_TOKEN_BY_NAME, Segment
from .errors import WireError

PROTOCOL_VERSION = 1
SCORE_PATH = "/score"


class WirePair(NamedTuple):
    pair_id: str
    segments: list[Segment]
    answer_text: str


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise WireError(message)


def _require_clean_text(text: str, where: str) -> None:
    for token in MARKER_TOKEN_BY_NAME.values():
        _require(
            token not in text, f"{where} contains reserved marker {token!r}"
        )


def parse_request(payload: object) -> tuple[str, list[WirePair]]:
    _require(isinstance(payload, dict), "request body must be a JSON object")
    version = payload.get("version")
    _require(
        isinstance(version, int)
        and not isinstance(version, bool)
        and version == PROTOCOL_VERSION,
        f"unsupported protocol version {version!r}",
    )
    format = payload.get("format")
    _require(
        format in FORMATS, f"format must be one of {FORMATS}, got {format!r}"
    )
    raw_pairs = payload.get("pairs")
    _require(
        isinstance(raw_pairs, list) and bool(raw_pairs),
        "pairs must be a non-empty array",
    )

    pairs: list[WirePair] = []
    seen: set[str] = set()
    for position, raw in enumerate(raw_pairs):
        where = f"pairs[{position}]"
        _require(isinstance(raw, dict), f"{where} must be an object")
        pair_id = raw.get("pair_id")
        _require(
            isinstance(pair_id, str) and bool(pair_id),
            f"{where}.pair_id must be a non-empty string",
        )
        _require(pair_id not in seen, f"duplicate pair_id {pair_id!r}")
        seen.add(pair_id)

        raw_segments = raw.get("query_segments")
        _require(
            isinstance(raw_segments, list) and bool(raw_segments),
            f"{where}.query_segments must be a non-empty array",
        )
        segments: list[Segment] = []
        for seg_position, raw_segment in enumerate(raw_segments):
            seg_where = f"{where}.query_segments[{seg_position}]"
            _require(isinstance(raw_segment, dict), f"{seg_where} must be an object")
            text = raw_segment.get("text")
            _require(isinstance(text, str), f"{seg_where}.text must be a string")
            _require_clean_text(text, f"{seg_where}.text")
            marker = raw_segment.get("marker")
            _require(
                marker is None or marker in MARKER_NAMES,
                f"{seg_where}.marker must be one of {MARKER_NAMES} or null",
            )
            segments.append(Segment(text, marker))

        answer_text = raw.get("answer_text")
        _require(
            isinstance(answer_text, str), f"{where}.answer_text must be a string"
        )
        _require_clean_text(answer_text, f"{where}.answer_text")
        pairs.append(WirePair(pair_id, segments, answer_text))
    return format, pairs


def response_body(scores: dict[str, float]) -> dict:
    for pair_id, score in scores.items():
        if not math.isfinite(score):
            raise WireError(f"score for {pair_id!r} is not finite")
    return {"scores": {pair_id: float(score) for pair_id, score in scores.items()}}


def error_body(message: str) -> dict:
    return {"error": message}
