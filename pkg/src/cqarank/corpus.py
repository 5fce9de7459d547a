"""Data model and file formats for the question/answer/judgment corpus.

Storage is line-delimited JSON (one record per line) for questions and
answers, and TREC qrels format for judgments. Text fields are stored
verbatim; normalization is left to the tokenizer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable

from .errors import DataError

QUESTIONS_FILE = "questions.jsonl"
ANSWERS_FILE = "answers.jsonl"
QRELS_FILE = "qrels.txt"


class CorpusError(DataError):
    """A corpus file or record violates the format or an invariant."""


def _require_str(record: dict, key: str, where: str) -> str:
    value = record.get(key)
    if not isinstance(value, str):
        raise CorpusError(f"{where}: field '{key}' missing or not a string")
    return value


def _no_whitespace_id(value: str, key: str, where: str) -> str:
    if not value or any(ch.isspace() for ch in value):
        raise CorpusError(f"{where}: field '{key}' must be a non-empty id without whitespace")
    return value


def parse_timestamp(raw: str, where: str = "timestamp") -> datetime:
    """Parse an RFC 3339 instant; the result is timezone-aware UTC."""
    try:
        dt = datetime.fromisoformat(raw.replace("Z", "+00:00"))
    except ValueError as exc:
        raise CorpusError(f"{where}: invalid timestamp {raw!r}") from exc
    if dt.tzinfo is None:
        raise CorpusError(f"{where}: timestamp {raw!r} has no UTC offset")
    return dt.astimezone(timezone.utc)


def format_timestamp(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class Question:
    id: str
    subject: str
    description: str
    tags: tuple[str, ...]
    timestamp: datetime
    asker_id: str

    def __post_init__(self) -> None:
        where = f"question {self.id!r}"
        _no_whitespace_id(self.id, "id", where)
        if not self.subject.strip():
            raise CorpusError(f"{where}: subject is empty")
        if not self.description.strip():
            raise CorpusError(f"{where}: description is empty")
        for tag in self.tags:
            if not tag or ";" in tag:
                raise CorpusError(f"{where}: tag {tag!r} is empty or contains ';'")
        if self.timestamp.tzinfo is None:
            raise CorpusError(f"{where}: timestamp must be timezone-aware")


@dataclass(frozen=True)
class Answer:
    id: str
    question_id: str
    text: str
    lawyer_id: str
    questioner_helpful: bool
    lawyer_agree_count: int

    def __post_init__(self) -> None:
        where = f"answer {self.id!r}"
        _no_whitespace_id(self.id, "id", where)
        _no_whitespace_id(self.question_id, "question_id", where)
        if not self.text.strip():
            raise CorpusError(f"{where}: text is empty")
        if self.lawyer_agree_count < 0:
            raise CorpusError(f"{where}: lawyer_agree_count is negative")


@dataclass(frozen=True)
class Judgment:
    question_id: str
    best_answer_id: str


@dataclass
class Corpus:
    """Immutable-by-convention container with referential integrity checks."""

    questions: list[Question] = field(default_factory=list)
    answers: list[Answer] = field(default_factory=list)
    judgments: list[Judgment] = field(default_factory=list)

    def __post_init__(self) -> None:
        self._questions_by_id: dict[str, Question] = {}
        for q in self.questions:
            if q.id in self._questions_by_id:
                raise CorpusError(f"duplicate question id {q.id!r}")
            self._questions_by_id[q.id] = q

        self._answers_by_id: dict[str, Answer] = {}
        self._answers_by_question: dict[str, list[Answer]] = {}
        helpful_seen: set[str] = set()
        for a in self.answers:
            if a.id in self._answers_by_id:
                raise CorpusError(f"duplicate answer id {a.id!r}")
            if a.question_id not in self._questions_by_id:
                raise CorpusError(
                    f"answer {a.id!r} references unknown question {a.question_id!r}"
                )
            if a.questioner_helpful:
                if a.question_id in helpful_seen:
                    raise CorpusError(
                        f"question {a.question_id!r} has more than one questioner-helpful answer"
                    )
                helpful_seen.add(a.question_id)
            self._answers_by_id[a.id] = a
            self._answers_by_question.setdefault(a.question_id, []).append(a)

        judged: set[str] = set()
        for j in self.judgments:
            if j.question_id in judged:
                raise CorpusError(f"question {j.question_id!r} has more than one judgment")
            judged.add(j.question_id)
            answer = self._answers_by_id.get(j.best_answer_id)
            if answer is None or answer.question_id != j.question_id:
                raise CorpusError(
                    f"judgment for question {j.question_id!r} names "
                    f"{j.best_answer_id!r}, which is not one of its answers"
                )

    def question(self, question_id: str) -> Question:
        try:
            return self._questions_by_id[question_id]
        except KeyError:
            raise CorpusError(f"unknown question id {question_id!r}") from None

    def answer(self, answer_id: str) -> Answer:
        try:
            return self._answers_by_id[answer_id]
        except KeyError:
            raise CorpusError(f"unknown answer id {answer_id!r}") from None

    def answers_for(self, question_id: str) -> list[Answer]:
        return list(self._answers_by_question.get(question_id, []))

    def has_question(self, question_id: str) -> bool:
        return question_id in self._questions_by_id

    def has_answer(self, answer_id: str) -> bool:
        return answer_id in self._answers_by_id


def _question_from_record(record: dict, where: str) -> Question:
    tags_raw = record.get("tags")
    if not isinstance(tags_raw, list) or any(not isinstance(t, str) for t in tags_raw):
        raise CorpusError(f"{where}: field 'tags' must be an array of strings")
    try:
        return Question(
            id=_require_str(record, "id", where),
            subject=_require_str(record, "subject", where),
            description=_require_str(record, "description", where),
            tags=tuple(tags_raw),
            timestamp=parse_timestamp(_require_str(record, "timestamp", where), where),
            asker_id=_require_str(record, "asker_id", where),
        )
    except CorpusError as exc:
        raise CorpusError(f"{where}: {exc}") from None


def _answer_from_record(record: dict, where: str) -> Answer:
    helpful = record.get("questioner_helpful")
    if not isinstance(helpful, bool):
        raise CorpusError(f"{where}: field 'questioner_helpful' missing or not a boolean")
    agrees = record.get("lawyer_agree_count")
    if not isinstance(agrees, int) or isinstance(agrees, bool):
        raise CorpusError(f"{where}: field 'lawyer_agree_count' missing or not an integer")
    try:
        return Answer(
            id=_require_str(record, "id", where),
            question_id=_require_str(record, "question_id", where),
            text=_require_str(record, "text", where),
            lawyer_id=_require_str(record, "lawyer_id", where),
            questioner_helpful=helpful,
            lawyer_agree_count=agrees,
        )
    except CorpusError as exc:
        raise CorpusError(f"{where}: {exc}") from None


def _iter_jsonl(path: Path) -> Iterable[tuple[int, dict]]:
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path.name}:{lineno}: malformed record: {exc}") from None
            if not isinstance(record, dict):
                raise CorpusError(f"{path.name}:{lineno}: record is not an object")
            yield lineno, record


def load_questions(path: Path | str) -> list[Question]:
    path = Path(path)
    return [_question_from_record(rec, f"{path.name}:{lineno}") for lineno, rec in _iter_jsonl(path)]


def load_answers(path: Path | str) -> list[Answer]:
    path = Path(path)
    return [_answer_from_record(rec, f"{path.name}:{lineno}") for lineno, rec in _iter_jsonl(path)]


def load_qrels(path: Path | str) -> list[Judgment]:
    """Read judgments from a TREC qrels file: `<qid> 0 <aid> <rel>`.

    Zero-relevance lines are accepted and skipped so externally produced
    qrels remain loadable.
    """
    path = Path(path)
    judgments = []
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 4:
                raise CorpusError(f"{path.name}:{lineno}: expected 4 fields, got {len(parts)}")
            qid, _, aid, rel = parts
            try:
                relevance = int(rel)
            except ValueError:
                raise CorpusError(f"{path.name}:{lineno}: relevance {rel!r} is not an integer") from None
            if relevance > 0:
                judgments.append(Judgment(question_id=qid, best_answer_id=aid))
    return judgments


def load_corpus(directory: Path | str) -> Corpus:
    """Load a corpus from a directory holding the three canonical files."""
    directory = Path(directory)
    if not directory.is_dir():
        raise CorpusError(f"corpus directory {directory} does not exist")
    questions = load_questions(directory / QUESTIONS_FILE)
    answers = load_answers(directory / ANSWERS_FILE)
    qrels_path = directory / QRELS_FILE
    judgments = load_qrels(qrels_path) if qrels_path.exists() else []
    return Corpus(questions=questions, answers=answers, judgments=judgments)


def write_questions(questions: Iterable[Question], path: Path | str) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for q in questions:
            record = {
                "id": q.id,
                "subject": q.subject,
                "description": q.description,
                "tags": list(q.tags),
                "timestamp": format_timestamp(q.timestamp),
                "asker_id": q.asker_id,
            }
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")


def write_answers(answers: Iterable[Answer], path: Path | str) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for a in answers:
            record = {
                "id": a.id,
                "question_id": a.question_id,
                "text": a.text,
                "lawyer_id": a.lawyer_id,
                "questioner_helpful": a.questioner_helpful,
                "lawyer_agree_count": a.lawyer_agree_count,
            }
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")


def write_qrels(judgments: Iterable[Judgment], path: Path | str) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for j in judgments:
            handle.write(f"{j.question_id} 0 {j.best_answer_id} 1\n")


def write_corpus(corpus: Corpus, directory: Path | str) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_questions(corpus.questions, directory / QUESTIONS_FILE)
    write_answers(corpus.answers, directory / ANSWERS_FILE)
    write_qrels(corpus.judgments, directory / QRELS_FILE)
