"""First-stage lexical retrieval: BM25 and Dirichlet-smoothed query
likelihood (LMD) over the inverted index, plus TREC-format run files.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

from ._kernels import bm25_accumulate, lmd_accumulate
from .corpus import Question
from .errors import DataError
from .indexing import InvertedIndex, tokenize

QUERY_FIELDS = ("subject", "description", "tags")


class RankedEntry(NamedTuple):
    answer_id: str
    score: float
    rank: int


@dataclass(frozen=True)
class RankedList:
    """Scores non-increasing, ranks consecutive from 1, ids distinct."""

    question_id: str
    entries: tuple[RankedEntry, ...]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        previous = math.inf
        for position, entry in enumerate(self.entries, start=1):
            if entry.rank != position:
                raise DataError(
                    f"query {self.question_id!r}: rank {entry.rank} at position {position}"
                )
            if entry.score > previous:
                raise DataError(
                    f"query {self.question_id!r}: score increases at rank {entry.rank}"
                )
            if entry.answer_id in seen:
                raise DataError(
                    f"query {self.question_id!r}: duplicate answer {entry.answer_id!r}"
                )
            seen.add(entry.answer_id)
            previous = entry.score

    def answer_ids(self) -> list[str]:
        return [e.answer_id for e in self.entries]


def ranked_list_from_scores(question_id: str, scored: Iterable[tuple[str, float]]) -> RankedList:
    """Order (answer id, score) pairs by score descending, ties by ascending
    answer id, and number ranks from 1.
    """
    ordered = sorted(scored, key=lambda item: (-item[1], item[0]))
    entries = tuple(
        RankedEntry(answer_id=aid, score=float(score), rank=rank)
        for rank, (aid, score) in enumerate(ordered, start=1)
    )
    return RankedList(question_id=question_id, entries=entries)


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 1.2
    b: float = 0.75

    def __post_init__(self) -> None:
        if self.k1 < 0:
            raise DataError(f"k1 must be non-negative, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise DataError(f"b must be in [0, 1], got {self.b}")


@dataclass(frozen=True)
class LmdParams:
    mu: float = 1000.0

    def __post_init__(self) -> None:
        if self.mu <= 0:
            raise DataError(f"mu must be positive, got {self.mu}")


class UnscoreableQueryError(DataError):
    """No query term occurs anywhere in the collection."""


def idf(index: InvertedIndex, term: str) -> float:
    """Non-negative BM25 idf: ln(1 + (N - df + 0.5) / (df + 0.5))."""
    df = index.document_frequency(term)
    return math.log(1.0 + (index.doc_count - df + 0.5) / (df + 0.5))


def bm25_score(query: list[str], answer_id: str, index: InvertedIndex, params: Bm25Params) -> float:
    """Sum over unique query terms of idf(t) * saturated tf with length
    normalization; terms absent from the document contribute nothing.
    """
    length_norm = 1.0 - params.b
    if index.average_doc_length > 0:
        length_norm += params.b * index.doc_length(answer_id) / index.average_doc_length
    else:
        index.position(answer_id)
    score = 0.0
    for term in set(query):
        tf = index.term_frequency(term, answer_id)
        if tf == 0:
            continue
        score += idf(index, term) * (tf * (params.k1 + 1.0)) / (tf + params.k1 * length_norm)
    return score


def lmd_score(query: list[str], answer_id: str, index: InvertedIndex, params: LmdParams) -> float:
    """Dirichlet-smoothed log query likelihood, summed over query token
    occurrences whose term occurs somewhere in the collection.
    """
    doc_length = index.doc_length(answer_id)
    known = [t for t in query if index.collection_tf.get(t, 0) > 0]
    if not known:
        raise UnscoreableQueryError(
            f"no query term occurs in the collection: {sorted(set(query))!r}"
        )
    score = 0.0
    for term in known:
        tf = index.term_frequency(term, answer_id)
        smoothed = (tf + params.mu * index.collection_probability(term)) / (doc_length + params.mu)
        score += math.log(smoothed)
    return score


def compose_query_text(question: Question, fields: Iterable[str] = QUERY_FIELDS) -> str:
    """First-stage query text: selected fields joined by single spaces, tags
    themselves space-joined.
    """
    parts: list[str] = []
    for name in fields:
        if name == "subject":
            parts.append(question.subject)
        elif name == "description":
            parts.append(question.description)
        elif name == "tags":
            parts.extend(question.tags)
        else:
            raise DataError(f"unknown query field {name!r}")
    return " ".join(parts)


def _bm25_candidates(
    query_terms: Counter[str], index: InvertedIndex, params: Bm25Params
) -> tuple[np.ndarray, np.ndarray]:
    scores = np.zeros(index.doc_count, dtype=np.float64)
    matched = np.zeros(index.doc_count, dtype=bool)
    if index.average_doc_length > 0:
        norm = index.doc_lengths.astype(np.float64) / index.average_doc_length
    else:
        norm = np.zeros(index.doc_count, dtype=np.float64)
    denom = params.k1 * (1.0 - params.b + params.b * norm)
    for term in query_terms:
        entry = index.postings.get(term)
        if entry is None:
            continue
        positions, tfs = entry
        bm25_accumulate(positions, tfs, idf(index, term), params.k1, denom, scores)
        matched[positions] = True
    candidates = np.flatnonzero(matched)
    return candidates, scores[candidates]


def _lmd_candidates(
    query_terms: Counter[str], index: InvertedIndex, params: LmdParams
) -> tuple[np.ndarray, np.ndarray]:
    known = {t: n for t, n in query_terms.items() if index.collection_tf.get(t, 0) > 0}
    if not known:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.float64)

    matched = np.zeros(index.doc_count, dtype=bool)
    for term in known:
        matched[index.postings[term][0]] = True
    candidates = np.flatnonzero(matched)

    # Background part: sum_t qtf * ln(mu * p_c(t)) - Q * ln(|d| + mu); the
    # kernel then adds the per-posting correction qtf * (ln(tf + mu*p_c) -
    # ln(mu*p_c)), recovering the full log likelihood.
    base = 0.0
    total_qtf = 0
    for term, qtf in known.items():
        base += qtf * math.log(params.mu * index.collection_probability(term))
        total_qtf += qtf
    scores = np.full(
        index.doc_count, base, dtype=np.float64
    ) - total_qtf * np.log(index.doc_lengths.astype(np.float64) + params.mu)
    for term, qtf in known.items():
        positions, tfs = index.postings[term]
        mu_pc = params.mu * index.collection_probability(term)
        lmd_accumulate(positions, tfs, mu_pc, float(qtf), scores)
    return candidates, scores[candidates]


def retrieve(
    question: Question,
    index: InvertedIndex,
    scorer: str = "bm25",
    k: int = 1000,
    bm25: Bm25Params | None = None,
    lmd: LmdParams | None = None,
    fields: Iterable[str] = QUERY_FIELDS,
) -> RankedList:
    """Top-k answers for a question, ties broken by ascending answer id.

    Only answers sharing at least one collection-known query term are
    candidates; for LMD this deviates from strict query likelihood when
    document lengths differ, but never affects which matching documents
    outrank each other.
    """
    if k <= 0:
        raise DataError(f"k must be positive, got {k}")
    if index.doc_count == 0:
        raise DataError("cannot retrieve from an empty index")

    query_terms = Counter(tokenize(compose_query_text(question, fields)))
    if scorer == "bm25":
        candidates, scores = _bm25_candidates(query_terms, index, bm25 or Bm25Params())
    elif scorer == "lmd":
        candidates, scores = _lmd_candidates(query_terms, index, lmd or LmdParams())
    else:
        raise DataError(f"unknown scorer {scorer!r}, expected 'bm25' or 'lmd'")

    scored = [(index.doc_ids[pos], float(s)) for pos, s in zip(candidates, scores)]
    scored.sort(key=lambda item: (-item[1], item[0]))
    return ranked_list_from_scores(question.id, scored[:k])


def write_run(ranked_lists: Iterable[RankedList], path: Path | str, tag: str) -> None:
    """TREC run format: `<qid> Q0 <aid> <rank> <score> <tag>`, scores at a
    fixed 6 decimals.
    """
    if not tag or any(c.isspace() for c in tag):
        raise DataError(f"run tag must be non-empty and whitespace-free, got {tag!r}")
    lines = []
    for ranked in ranked_lists:
        for entry in ranked.entries:
            lines.append(
                f"{ranked.question_id} Q0 {entry.answer_id} {entry.rank} "
                f"{entry.score:.6f} {tag}"
            )
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def read_run(path: Path | str) -> list[RankedList]:
    """Parse a TREC run file, grouped per query in file order."""
    path = Path(path)
    per_query: dict[str, list[RankedEntry]] = {}
    with path.open(encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 6 or parts[1] != "Q0":
                raise DataError(f"{path}:{line_no}: malformed run line {line!r}")
            qid, _, aid, rank_text, score_text, _tag = parts
            try:
                rank = int(rank_text)
                score = float(score_text)
            except ValueError as exc:
                raise DataError(f"{path}:{line_no}: malformed run line {line!r}") from exc
            if not math.isfinite(score):
                raise DataError(f"{path}:{line_no}: non-finite score {score_text!r}")
            per_query.setdefault(qid, []).append(RankedEntry(aid, score, rank))

    ranked_lists = []
    for qid, entries in per_query.items():
        entries.sort(key=lambda e: e.rank)
        try:
            ranked_lists.append(RankedList(question_id=qid, entries=tuple(entries)))
        except DataError as exc:
            raise DataError(f"{path}: {exc}") from exc
    return ranked_lists
