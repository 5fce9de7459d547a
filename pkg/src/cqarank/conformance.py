"""Scorer conformance checks.

Any scorer handle (in-process mock or the HTTP service) must pass
`check_scorer`; a live HTTP endpoint must additionally pass
`check_http_endpoint`, which exercises the wire-level error contract. The
service's own test suite imports and runs both, keeping mocks and the real
scorer interchangeable.
"""

from __future__ import annotations

import math

import requests

from .errors import DataError
from .inputs import FORMAT_CAT, FORMAT_FS, QuerySegment, StructuredInput
from .protocol import PROTOCOL_VERSION, SCORE_PATH, request_to_json
from .rerank import ScorePair, Scorer, score_batch


class ConformanceFailure(AssertionError):
    """A scorer violated the protocol contract."""


def _expect(condition: bool, message: str) -> None:
    if not condition:
        raise ConformanceFailure(message)


def sample_input(seed: int = 0) -> StructuredInput:
    return StructuredInput(
        query_segments=(
            QuerySegment(f"Can I keep my car after filing {seed}?", "S"),
            QuerySegment(
                f"I filed for chapter 7 protection last month, case {seed}.", "D"
            ),
            QuerySegment("bankruptcy; chapter 7", "T"),
        ),
        answer_text=f"Generally yes, if you reaffirm the loan. Case {seed}.",
    )


def sample_cat_input(seed: int = 0) -> StructuredInput:
    fs = sample_input(seed)
    flat = " ".join(segment.text for segment in fs.query_segments if segment.text)
    return StructuredInput(
        query_segments=(QuerySegment(flat, None),), answer_text=fs.answer_text
    )


def check_scorer(scorer: Scorer) -> None:
    """Handle-level checks: determinism, duplicate consistency, batch
    independence, finiteness, and the empty-batch precondition.
    """
    for format, make in ((FORMAT_FS, sample_input), (FORMAT_CAT, sample_cat_input)):
        batch = [ScorePair(f"p{i}", make(i)) for i in range(4)]
        batch.append(ScorePair("dup-of-p0", make(0)))

        first = score_batch(batch, scorer, format)
        _expect(
            set(first) == {p.pair_id for p in batch},
            f"{format}: response pair ids do not match the request",
        )
        _expect(
            all(math.isfinite(v) for v in first.values()),
            f"{format}: scorer produced non-finite scores",
        )
        _expect(
            first["p0"] == first["dup-of-p0"],
            f"{format}: identical pairs in one batch scored differently",
        )

        again = score_batch(batch, scorer, format)
        _expect(first == again, f"{format}: identical batch scored differently on repeat")

        reversed_scores = score_batch(list(reversed(batch)), scorer, format)
        _expect(
            first == reversed_scores,
            f"{format}: scores depend on batch order",
        )

        solo = score_batch([batch[0]], scorer, format)
        _expect(
            solo["p0"] == first["p0"],
            f"{format}: score depends on batch companions",
        )

    try:
        score_batch([], scorer, FORMAT_FS)
    except DataError:
        pass
    else:
        raise ConformanceFailure("empty batch was not rejected")


def _post(endpoint: str, body: object, timeout: float) -> requests.Response:
    return requests.post(endpoint.rstrip("/") + SCORE_PATH, json=body, timeout=timeout)


def check_http_endpoint(endpoint: str, timeout: float = 30.0) -> None:
    """Wire-level checks: well-formed requests succeed, malformed requests
    get HTTP 400 without crashing the service.
    """
    good = request_to_json(FORMAT_FS, [("p0", sample_input(0))])
    reply = _post(endpoint, good, timeout)
    _expect(reply.status_code == 200, f"valid request answered {reply.status_code}")
    payload = reply.json()
    _expect(
        isinstance(payload, dict) and set(payload.get("scores", {})) == {"p0"},
        "valid request did not return exactly the requested pair id",
    )
    _expect(
        isinstance(payload["scores"]["p0"], (int, float))
        and not isinstance(payload["scores"]["p0"], bool)
        and math.isfinite(float(payload["scores"]["p0"])),
        "score is not a finite JSON number",
    )

    bad_bodies: list[tuple[str, object]] = [
        ("empty pairs array", {"version": PROTOCOL_VERSION, "format": FORMAT_FS, "pairs": []}),
        ("missing pairs", {"version": PROTOCOL_VERSION, "format": FORMAT_FS}),
        ("unknown format", {**good, "format": "tsv"}),
        ("unsupported version", {**good, "version": PROTOCOL_VERSION + 1}),
        ("non-object body", [1, 2, 3]),
        (
            "duplicate pair ids",
            {**good, "pairs": [good["pairs"][0], dict(good["pairs"][0])]},
        ),
    ]
    for label, body in bad_bodies:
        reply = _post(endpoint, body, timeout)
        _expect(
            reply.status_code == 400,
            f"{label}: expected HTTP 400, got {reply.status_code}",
        )

    raw = requests.post(
        endpoint.rstrip("/") + SCORE_PATH,
        data=b"not json",
        headers={"content-type": "application/json"},
        timeout=timeout,
    )
    _expect(raw.status_code == 400, f"non-JSON body: expected HTTP 400, got {raw.status_code}")

    follow_up = _post(endpoint, good, timeout)
    _expect(
        follow_up.status_code == 200,
        "service stopped answering valid requests after malformed ones",
    )
