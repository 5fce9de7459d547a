"""Second-stage re-ranking: score candidate lists with a pluggable scorer
(the neural service over HTTP, or deterministic in-process mocks) and
re-order by score.
"""

from __future__ import annotations

import math
from typing import Callable, Iterable, NamedTuple, Protocol

import requests

from .corpus import Corpus
from .errors import DataError, ScorerTransportError
from .inputs import AblationSpec, StructuredInput, build_input
from .protocol import (
    SCORE_PATH,
    ProtocolError,
    request_to_json,
    response_from_json,
)
from .retrieval import RankedEntry, RankedList

DEFAULT_BATCH_SIZE = 32
DEFAULT_TIMEOUT_SECONDS = 60.0


class ScorePair(NamedTuple):
    pair_id: str
    input: StructuredInput


class Scorer(Protocol):
    def score_pairs(
        self, format: str, pairs: list[tuple[str, StructuredInput]]
    ) -> dict[str, float]: ...


class FunctionScorer:
    """In-process mock: applies a pure function to every pair."""

    def __init__(self, fn: Callable[[str, StructuredInput], float]) -> None:
        self._fn = fn

    def score_pairs(
        self, format: str, pairs: list[tuple[str, StructuredInput]]
    ) -> dict[str, float]:
        return {pair_id: float(self._fn(format, structured)) for pair_id, structured in pairs}


def constant_scorer(value: float = 0.0) -> FunctionScorer:
    return FunctionScorer(lambda _format, _structured: value)


def answer_length_scorer() -> FunctionScorer:
    """Echo mock: the answer's character length as its score."""
    return FunctionScorer(lambda _format, structured: float(len(structured.answer_text)))


class HttpScorer:
    """Scorer handle speaking the wire protocol to a running service.

    Safe to share across threads: each call builds an independent request.
    """

    def __init__(self, endpoint: str, timeout: float = DEFAULT_TIMEOUT_SECONDS) -> None:
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout

    def score_pairs(
        self, format: str, pairs: list[tuple[str, StructuredInput]]
    ) -> dict[str, float]:
        url = self.endpoint + SCORE_PATH
        try:
            reply = requests.post(
                url, json=request_to_json(format, pairs), timeout=self.timeout
            )
        except requests.RequestException as exc:
            raise ScorerTransportError(f"scorer at {url} unreachable: {exc}") from exc
        if reply.status_code != 200:
            detail = reply.text.strip()
            raise ScorerTransportError(
                f"scorer at {url} answered HTTP {reply.status_code}: {detail[:500]}"
            )
        try:
            payload = reply.json()
        except ValueError as exc:
            raise ScorerTransportError(f"scorer at {url} returned non-JSON body") from exc
        try:
            return response_from_json(payload, [pair_id for pair_id, _ in pairs])
        except ProtocolError as exc:
            raise ScorerTransportError(f"scorer at {url} broke protocol: {exc}") from exc


def score_batch(
    pairs: list[ScorePair],
    scorer: Scorer,
    format: str,
    max_batch_size: int = DEFAULT_BATCH_SIZE,
) -> dict[str, float]:
    """Score one batch, enforcing batch preconditions and validating that the
    scorer returned exactly one finite score per pair.
    """
    if not pairs:
        raise DataError("batch must not be empty")
    if len(pairs) > max_batch_size:
        raise DataError(f"batch of {len(pairs)} exceeds maximum {max_batch_size}")
    pair_ids = [p.pair_id for p in pairs]
    if len(set(pair_ids)) != len(pair_ids):
        raise DataError("pair ids must be distinct within a batch")

    scores = scorer.score_pairs(format, [(p.pair_id, p.input) for p in pairs])
    missing = set(pair_ids) - set(scores)
    if missing:
        raise ScorerTransportError(f"scorer returned no score for {sorted(missing)!r}")
    extra = set(scores) - set(pair_ids)
    if extra:
        raise ScorerTransportError(f"scorer returned scores for unknown {sorted(extra)!r}")
    for pair_id in pair_ids:
        if not math.isfinite(scores[pair_id]):
            raise ScorerTransportError(
                f"scorer returned non-finite score for {pair_id!r}"
            )
    return {pair_id: scores[pair_id] for pair_id in pair_ids}


def rerank(
    ranked: RankedList,
    corpus: Corpus,
    scorer: Scorer,
    format: str,
    ablation: AblationSpec | None = None,
    batch_size: int = DEFAULT_BATCH_SIZE,
) -> RankedList:
    """Re-order a candidate list by scorer score descending, ties broken by
    the original first-stage rank; the answer-id set is preserved exactly.
    """
    if batch_size <= 0:
        raise DataError(f"batch size must be positive, got {batch_size}")
    if not ranked.entries:
        return ranked

    question = corpus.question(ranked.question_id)
    pairs = [
        ScorePair(
            pair_id=f"p{entry.rank}",
            input=build_input(question, corpus.answer(entry.answer_id).text, format, ablation),
        )
        for entry in ranked.entries
    ]

    scores: dict[str, float] = {}
    for start in range(0, len(pairs), batch_size):
        scores.update(
            score_batch(pairs[start : start + batch_size], scorer, format, batch_size)
        )

    reordered = sorted(
        ranked.entries, key=lambda entry: (-scores[f"p{entry.rank}"], entry.rank)
    )
    entries = tuple(
        RankedEntry(answer_id=entry.answer_id, score=scores[f"p{entry.rank}"], rank=position)
        for position, entry in enumerate(reordered, start=1)
    )
    return RankedList(question_id=ranked.question_id, entries=entries)


def rerank_run(
    run: Iterable[RankedList],
    corpus: Corpus,
    scorer: Scorer,
    format: str,
    ablation: AblationSpec | None = None,
    batch_size: int = DEFAULT_BATCH_SIZE,
) -> list[RankedList]:
    return [rerank(r, corpus, scorer, format, ablation, batch_size) for r in run]
