"""Wire protocol for batch scoring: JSON messages exchanged with the scorer
service over HTTP POST.

docs/protocol.md is the normative description; this module is the reference
encoder/decoder used by the engine, the test mocks, and the service.
"""

from __future__ import annotations

import math
from typing import Any

from .errors import CqarankError
from .inputs import FORMATS, MARKER_ORDER, QuerySegment, StructuredInput

PROTOCOL_VERSION = 1
SCORE_PATH = "/score"


class ProtocolError(CqarankError):
    """Message violates the wire protocol."""


def request_to_json(format: str, pairs: list[tuple[str, StructuredInput]]) -> dict[str, Any]:
    return {
        "version": PROTOCOL_VERSION,
        "format": format,
        "pairs": [
            {
                "pair_id": pair_id,
                "query_segments": [
                    {"text": segment.text, "marker": segment.marker}
                    for segment in structured.query_segments
                ],
                "answer_text": structured.answer_text,
            }
            for pair_id, structured in pairs
        ],
    }


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ProtocolError(message)


def request_from_json(payload: Any) -> tuple[str, list[tuple[str, StructuredInput]]]:
    """Validate and decode a scoring request; raises ProtocolError on any
    structural violation (the service answers these with HTTP 400).
    """
    _require(isinstance(payload, dict), "request body must be a JSON object")
    _require(
        payload.get("version") == PROTOCOL_VERSION,
        f"unsupported protocol version {payload.get('version')!r}",
    )
    format = payload.get("format")
    _require(format in FORMATS, f"format must be one of {FORMATS}, got {format!r}")
    raw_pairs = payload.get("pairs")
    _require(isinstance(raw_pairs, list) and raw_pairs, "pairs must be a non-empty array")

    pairs: list[tuple[str, StructuredInput]] = []
    seen: set[str] = set()
    for position, raw in enumerate(raw_pairs):
        where = f"pairs[{position}]"
        _require(isinstance(raw, dict), f"{where} must be an object")
        pair_id = raw.get("pair_id")
        _require(
            isinstance(pair_id, str) and bool(pair_id), f"{where}.pair_id must be a non-empty string"
        )
        _require(pair_id not in seen, f"duplicate pair_id {pair_id!r}")
        seen.add(pair_id)
        raw_segments = raw.get("query_segments")
        _require(
            isinstance(raw_segments, list) and raw_segments,
            f"{where}.query_segments must be a non-empty array",
        )
        segments: list[QuerySegment] = []
        for seg_pos, raw_segment in enumerate(raw_segments):
            seg_where = f"{where}.query_segments[{seg_pos}]"
            _require(isinstance(raw_segment, dict), f"{seg_where} must be an object")
            text = raw_segment.get("text")
            marker = raw_segment.get("marker")
            _require(isinstance(text, str), f"{seg_where}.text must be a string")
            _require(
                marker is None or marker in MARKER_ORDER,
                f"{seg_where}.marker must be one of {MARKER_ORDER} or null",
            )
            segments.append(QuerySegment(text, marker))
        answer_text = raw.get("answer_text")
        _require(isinstance(answer_text, str), f"{where}.answer_text must be a string")
        try:
            structured = StructuredInput(
                query_segments=tuple(segments), answer_text=answer_text
            )
        except CqarankError as exc:
            raise ProtocolError(f"{where}: {exc}") from exc
        pairs.append((pair_id, structured))
    return format, pairs


def response_to_json(scores: dict[str, float]) -> dict[str, Any]:
    return {"scores": {pair_id: float(score) for pair_id, score in scores.items()}}


def response_from_json(payload: Any, expected_pair_ids: list[str]) -> dict[str, float]:
    """Validate and decode a scoring response against the request's pair ids.

    Raises ProtocolError on malformed, partial, or non-finite responses; a
    partial response invalidates the whole batch.
    """
    _require(isinstance(payload, dict), "response body must be a JSON object")
    raw_scores = payload.get("scores")
    _require(isinstance(raw_scores, dict), "response must carry a scores object")
    expected = set(expected_pair_ids)
    got = set(raw_scores)
    missing = expected - got
    extra = got - expected
    _require(not missing, f"response missing scores for {sorted(missing)!r}")
    _require(not extra, f"response has scores for unknown pair ids {sorted(extra)!r}")
    scores: dict[str, float] = {}
    for pair_id in expected_pair_ids:
        value = raw_scores[pair_id]
        _require(
            isinstance(value, (int, float)) and not isinstance(value, bool),
            f"score for {pair_id!r} must be a number",
        )
        score = float(value)
        _require(math.isfinite(score), f"score for {pair_id!r} is not finite")
        scores[pair_id] = score
    return scores


def error_to_json(message: str) -> dict[str, Any]:
    return {"error": message}
