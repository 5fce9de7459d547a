"""Tokenization and an inverted index over the answer collection.

The index stores postings as parallel position/frequency arrays so the
scoring kernels can accumulate over them without per-document dictionary
lookups.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Answer
from .errors import DataError

INDEX_FORMAT = "cqarank.index"
INDEX_VERSION = 1

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercased alphanumeric runs; no stemming, no stopword removal."""
    return _TOKEN_RE.findall(text.lower())


@dataclass
class InvertedIndex:
    """Immutable index over a document collection.

    Documents are addressed by position internally; `doc_ids[pos]` maps back
    to the external id. `postings` holds, per term, ascending document
    positions and the matching term frequencies as int32 arrays.
    """

    doc_ids: tuple[str, ...]
    doc_lengths: np.ndarray
    postings: dict[str, tuple[np.ndarray, np.ndarray]]
    _pos_by_id: dict[str, int] = field(init=False, repr=False)
    collection_tf: dict[str, int] = field(init=False, repr=False)
    collection_length: int = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._pos_by_id = {doc_id: pos for pos, doc_id in enumerate(self.doc_ids)}
        if len(self._pos_by_id) != len(self.doc_ids):
            raise DataError("duplicate document id in index")
        if self.doc_lengths.shape != (len(self.doc_ids),):
            raise DataError("doc_lengths does not match document count")
        self.collection_tf = {
            term: int(tfs.sum()) for term, (_, tfs) in self.postings.items()
        }
        self.collection_length = int(self.doc_lengths.sum())

        token_sums = np.zeros(len(self.doc_ids), dtype=np.int64)
        for term, (positions, tfs) in self.postings.items():
            if len(positions) != len(tfs) or len(positions) == 0:
                raise DataError(f"term {term!r} has a malformed postings list")
            if (np.diff(positions) <= 0).any():
                raise DataError(f"term {term!r} postings are not strictly ascending")
            if (tfs <= 0).any():
                raise DataError(f"term {term!r} has a non-positive term frequency")
            np.add.at(token_sums, positions, tfs)
        if not np.array_equal(token_sums, self.doc_lengths):
            raise DataError("postings frequencies do not add up to document lengths")

    @property
    def doc_count(self) -> int:
        return len(self.doc_ids)

    @property
    def average_doc_length(self) -> float:
        if not self.doc_ids:
            return 0.0
        return self.collection_length / len(self.doc_ids)

    def has_doc(self, doc_id: str) -> bool:
        return doc_id in self._pos_by_id

    def position(self, doc_id: str) -> int:
        try:
            return self._pos_by_id[doc_id]
        except KeyError:
            raise DataError(f"unknown document id {doc_id!r}") from None

    def doc_length(self, doc_id: str) -> int:
        return int(self.doc_lengths[self.position(doc_id)])

    def document_frequency(self, term: str) -> int:
        entry = self.postings.get(term)
        return len(entry[0]) if entry else 0

    def term_frequency(self, term: str, doc_id: str) -> int:
        entry = self.postings.get(term)
        if entry is None:
            return 0
        positions, tfs = entry
        hit = np.searchsorted(positions, self.position(doc_id))
        if hit < len(positions) and positions[hit] == self.position(doc_id):
            return int(tfs[hit])
        return 0

    def postings_for(self, term: str) -> list[tuple[str, int]]:
        """Postings in the external (document id, tf) shape."""
        entry = self.postings.get(term)
        if entry is None:
            return []
        positions, tfs = entry
        return [(self.doc_ids[p], int(tf)) for p, tf in zip(positions, tfs)]

    def collection_probability(self, term: str) -> float:
        """Maximum-likelihood probability of `term` in the whole collection."""
        if self.collection_length == 0:
            return 0.0
        return self.collection_tf.get(term, 0) / self.collection_length


def build_index_from_texts(docs: list[tuple[str, str]]) -> InvertedIndex:
    """Index (document id, text) pairs. Ids must be distinct."""
    seen: set[str] = set()
    for doc_id, _ in docs:
        if doc_id in seen:
            raise DataError(f"duplicate document id {doc_id!r}")
        seen.add(doc_id)

    doc_ids = tuple(doc_id for doc_id, _ in docs)
    lengths = np.zeros(len(docs), dtype=np.intc)
    by_term: dict[str, dict[int, int]] = {}
    for pos, (_, text) in enumerate(docs):
        tokens = tokenize(text)
        lengths[pos] = len(tokens)
        for token in tokens:
            term_docs = by_term.setdefault(token, {})
            term_docs[pos] = term_docs.get(pos, 0) + 1

    postings = {
        term: (
            np.fromiter(term_docs.keys(), dtype=np.intc, count=len(term_docs)),
            np.fromiter(term_docs.values(), dtype=np.intc, count=len(term_docs)),
        )
        for term, term_docs in sorted(by_term.items())
    }
    return InvertedIndex(doc_ids=doc_ids, doc_lengths=lengths, postings=postings)


def build_index(answers: list[Answer]) -> InvertedIndex:
    """Index answer texts keyed by answer id."""
    return build_index_from_texts([(a.id, a.text) for a in answers])


def save_index(index: InvertedIndex, path: Path | str) -> None:
    """Write the index as versioned JSON, byte-identical across runs."""
    payload = {
        "format": INDEX_FORMAT,
        "version": INDEX_VERSION,
        "doc_ids": list(index.doc_ids),
        "doc_lengths": index.doc_lengths.tolist(),
        "postings": {
            term: [positions.tolist(), tfs.tolist()]
            for term, (positions, tfs) in index.postings.items()
        },
    }
    Path(path).write_text(
        json.dumps(payload, ensure_ascii=False, sort_keys=True, separators=(",", ":"))
        + "\n",
        encoding="utf-8",
    )


def load_index(path: Path | str) -> InvertedIndex:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not a valid index file: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != INDEX_FORMAT:
        raise DataError(f"{path}: not a {INDEX_FORMAT} file")
    if payload.get("version") != INDEX_VERSION:
        raise DataError(f"{path}: unsupported index version {payload.get('version')!r}")
    try:
        doc_ids = tuple(payload["doc_ids"])
        doc_lengths = np.asarray(payload["doc_lengths"], dtype=np.intc)
        postings = {
            term: (
                np.asarray(entry[0], dtype=np.intc),
                np.asarray(entry[1], dtype=np.intc),
            )
            for term, entry in payload["postings"].items()
        }
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise DataError(f"{path}: malformed index payload: {exc}") from exc
    return InvertedIndex(doc_ids=doc_ids, doc_lengths=doc_lengths, postings=postings)
