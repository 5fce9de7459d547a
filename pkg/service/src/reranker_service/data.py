"""Readers for the retrieval engine's file formats (questions and answers as
JSONL, TREC qrels and run files, the splits manifest) and construction of
labeled training pairs with negative sampling.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .encoding import (
    FORMAT_CAT,
    FORMAT_FS,
    FORMATS,
    Segment,
    render_cat_segment,
    render_fs_segments,
)
from .errors import InputDataError

SPLITS_FORMAT = "cqarank.splits"
SPLIT_NAMES = ("train", "validation", "test")
RUN_POOL_DEPTH = 100

NEGATIVE_SAMPLING_SPEC = (
    "per judged question: all non-relevant answers to the same question "
    "first, then answers sampled without replacement from the question's "
    f"run entries (top {RUN_POOL_DEPTH}, own answers excluded), "
    "negatives_per_positive in total"
)


@dataclass(frozen=True)
class Question:
    id: str
    subject: str
    description: str
    tags: tuple[str, ...]


@dataclass(frozen=True)
class Answer:
    id: str
    question_id: str
    text: str


@dataclass(frozen=True)
class TrainingPair:
    question_id: str
    answer_id: str
    segments: tuple[Segment, ...]
    answer_text: str
    label: float


@dataclass(frozen=True)
class PairGroup:
    """All labeled pairs of one question; the unit of validation scoring."""

    question_id: str
    pairs: tuple[TrainingPair, ...]


def _read_jsonl(path: Path | str) -> list[dict]:
    path = Path(path)
    if not path.is_file():
        raise InputDataError(f"{path}: no such file")
    rows: list[dict] = []
    with path.open(encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputDataError(f"{path}:{line_no}: not valid JSON: {exc}")
            if not isinstance(row, dict):
                raise InputDataError(f"{path}:{line_no}: expected a JSON object")
            rows.append(row)
    return rows


def _field(row: dict, name: str, where: str) -> object:
    if name not in row:
        raise InputDataError(f"{where}: missing field {name!r}")
    return row[name]


def read_questions(path: Path | str) -> dict[str, Question]:
    questions: dict[str, Question] = {}
    for position, row in enumerate(_read_jsonl(path)):
        where = f"{path} question {position}"
        qid = str(_field(row, "id", where))
        tags = _field(row, "tags", where)
        if not isinstance(tags, list):
            raise InputDataError(f"{where}: tags must be an array")
        if qid in questions:
            raise InputDataError(f"{where}: duplicate question id {qid!r}")
        questions[qid] = Question(
            id=qid,
            subject=str(_field(row, "subject", where)),
            description=str(_field(row, "description", where)),
            tags=tuple(str(tag) for tag in tags),
        )
    return questions


def read_answers(path: Path | str) -> dict[str, Answer]:
    answers: dict[str, Answer] = {}
    for position, row in enumerate(_read_jsonl(path)):
        where = f"{path} answer {position}"
        aid = str(_field(row, "id", where))
        if aid in answers:
            raise InputDataError(f"{where}: duplicate answer id {aid!r}")
        answers[aid] = Answer(
            id=aid,
            question_id=str(_field(row, "question_id", where)),
            text=str(_field(row, "text", where)),
        )
    return answers


def read_qrels(path: Path | str) -> dict[str, set[str]]:
    """TREC qrels lines `<qid> 0 <aid> <rel>`; positive rel means relevant."""
    path = Path(path)
    if not path.is_file():
        raise InputDataError(f"{path}: no such file")
    relevant: dict[str, set[str]] = {}
    with path.open(encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 4:
                raise InputDataError(f"{path}:{line_no}: malformed qrels line")
            qid, _, aid, rel_text = parts
            try:
                rel = int(rel_text)
            except ValueError:
                raise InputDataError(f"{path}:{line_no}: malformed qrels line")
            if rel > 0:
                relevant.setdefault(qid, set()).add(aid)
    return relevant


def read_run(path: Path | str) -> dict[str, list[str]]:
    """TREC run lines `<qid> Q0 <aid> <rank> <score> <tag>`, kept per query
    in rank order.
    """
    path = Path(path)
    if not path.is_file():
        raise InputDataError(f"{path}: no such file")
    entries: dict[str, list[tuple[int, str]]] = {}
    with path.open(encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 6 or parts[1] != "Q0":
                raise InputDataError(f"{path}:{line_no}: malformed run line")
            try:
                rank = int(parts[3])
            except ValueError:
                raise InputDataError(f"{path}:{line_no}: malformed run line")
            entries.setdefault(parts[0], []).append((rank, parts[2]))
    return {
        qid: [aid for _, aid in sorted(ranked)] for qid, ranked in entries.items()
    }


def read_splits(path: Path | str) -> dict[str, list[str]]:
    path = Path(path)
    if not path.is_file():
        raise InputDataError(f"{path}: no such file")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputDataError(f"{path}: not valid JSON: {exc}")
    if not isinstance(payload, dict) or payload.get("format") != SPLITS_FORMAT:
        raise InputDataError(f"{path}: not a {SPLITS_FORMAT} file")
    splits: dict[str, list[str]] = {}
    for name in SPLIT_NAMES:
        ids = payload.get(name)
        if not isinstance(ids, list):
            raise InputDataError(f"{path}: missing split list {name!r}")
        splits[name] = [str(qid) for qid in ids]
    return splits


def render_segments(question: Question, format: str) -> tuple[Segment, ...]:
    if format == FORMAT_FS:
        rendered = render_fs_segments(
            question.subject, question.description, question.tags
        )
    elif format == FORMAT_CAT:
        rendered = render_cat_segment(
            question.subject, question.description, question.tags
        )
    else:
        raise InputDataError(f"unknown format {format!r}, expected one of {FORMATS}")
    return tuple(rendered)


def build_pair_groups(
    questions: dict[str, Question],
    answers: dict[str, Answer],
    relevant: dict[str, set[str]],
    question_ids: list[str],
    format: str,
    negatives_per_positive: int,
    seed: int,
    run: dict[str, list[str]] | None = None,
) -> list[PairGroup]:
    """Labeled pair groups for the given questions.

    Positives are the judged relevant answers; negatives follow
    NEGATIVE_SAMPLING_SPEC. Questions without a usable positive are skipped.
    Sampling is deterministic per (seed, question id).
    """
    if negatives_per_positive < 1:
        raise InputDataError(
            f"negatives_per_positive must be positive, got {negatives_per_positive}"
        )
    answers_by_question: dict[str, list[Answer]] = {}
    for answer in answers.values():
        answers_by_question.setdefault(answer.question_id, []).append(answer)
    for own in answers_by_question.values():
        own.sort(key=lambda answer: answer.id)

    groups: list[PairGroup] = []
    for qid in question_ids:
        question = questions.get(qid)
        if question is None:
            raise InputDataError(f"split names unknown question {qid!r}")
        positives = [
            aid for aid in sorted(relevant.get(qid, ())) if aid in answers
        ]
        if not positives:
            continue
        segments = render_segments(question, format)
        own = answers_by_question.get(qid, [])
        own_ids = {answer.id for answer in own}
        intra = [answer.id for answer in own if answer.id not in relevant.get(qid, ())]
        pool = []
        if run is not None:
            seen = set(intra) | own_ids
            for aid in run.get(qid, [])[:RUN_POOL_DEPTH]:
                if aid not in seen and aid in answers:
                    seen.add(aid)
                    pool.append(aid)

        rng = random.Random(f"{seed}:{qid}")
        wanted = negatives_per_positive * len(positives)
        negative_ids = intra[:wanted]
        missing = wanted - len(negative_ids)
        if missing > 0 and pool:
            negative_ids.extend(rng.sample(pool, min(missing, len(pool))))

        pairs = [
            TrainingPair(qid, aid, segments, answers[aid].text, 1.0)
            for aid in positives
        ] + [
            TrainingPair(qid, aid, segments, answers[aid].text, 0.0)
            for aid in negative_ids
        ]
        groups.append(PairGroup(qid, tuple(pairs)))
    return groups
