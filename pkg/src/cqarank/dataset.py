"""Benchmark construction: best-answer adjudication, near-duplicate
collapse, and chronological train/validation/test splitting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from ._kernels import levenshtein_distance, levenshtein_within
from .corpus import Answer, Corpus, Judgment, Question
from .errors import DataError

AGREE_VOTE_THRESHOLD = 3


def select_best_answer(question: Question, answers: list[Answer]) -> str | None:
    """Pick the single best answer, or None when no answer qualifies.

    The questioner's helpful choice wins outright; otherwise the answer
    needs at least AGREE_VOTE_THRESHOLD peer-lawyer agree votes, ties broken
    by vote count then smallest answer id.
    """
    for a in answers:
        if a.question_id != question.id:
            raise DataError(f"answer {a.id!r} does not belong to question {question.id!r}")
    helpful = [a for a in answers if a.questioner_helpful]
    if helpful:
        return helpful[0].id
    endorsed = [a for a in answers if a.lawyer_agree_count >= AGREE_VOTE_THRESHOLD]
    if not endorsed:
        return None
    best = min(endorsed, key=lambda a: (-a.lawyer_agree_count, a.id))
    return best.id


def question_text(question: Question) -> str:
    """The text near-duplicate similarity is measured over."""
    return question.subject + " " + question.description


def similarity_ratio(text_a: str, text_b: str) -> float:
    """Normalized edit-distance similarity on a 0-100 scale.

    ratio = 100 * (1 - distance / max(len_a, len_b)); two empty strings
    count as identical.
    """
    longest = max(len(text_a), len(text_b))
    if longest == 0:
        return 100.0
    return 100.0 * (longest - levenshtein_distance(text_a, text_b)) / longest


class DuplicatePair(NamedTuple):
    id_a: str
    id_b: str
    ratio: float


def _exceeds(distance: int, longest: int, threshold: float) -> bool:
    # Exact integer form of 100*(1 - d/L) > threshold, immune to float rounding.
    return 100.0 * (longest - distance) > threshold * longest


def find_near_duplicates(questions: list[Question], threshold: float = 90.0) -> list[DuplicatePair]:
    """All unordered question pairs whose similarity ratio strictly exceeds
    `threshold`, in lexicographic id order.

    Candidates are pruned by length first: a pair can only qualify when the
    shorter text is at least threshold% of the longer, so questions are
    scanned in a sliding length window before the (capped) edit distance runs.
    """
    if not 0.0 < threshold <= 100.0:
        raise DataError(f"threshold must be in (0, 100], got {threshold}")

    texts = [question_text(q) for q in questions]
    order = sorted(range(len(questions)), key=lambda i: len(texts[i]))
    pairs: list[DuplicatePair] = []
    for wi, i in enumerate(order):
        len_i = len(texts[i])
        for j in order[wi + 1 :]:
            len_j = len(texts[j])  # >= len_i by sort order
            if not _exceeds(len_j - len_i, len_j, threshold):
                break
            # Generous cap: one above the largest admissible distance, the
            # exact check below makes the final call.
            limit = int(math.floor(len_j * (100.0 - threshold) / 100.0)) + 1
            distance = levenshtein_within(texts[i], texts[j], limit)
            if distance <= limit and _exceeds(distance, len_j, threshold):
                id_a, id_b = sorted((questions[i].id, questions[j].id))
                ratio = 100.0 * (len_j - distance) / len_j if len_j else 100.0
                pairs.append(DuplicatePair(id_a, id_b, ratio))
    pairs.sort(key=lambda p: (p.id_a, p.id_b))
    return pairs


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict[str, str] = {}

    def find(self, x: str) -> str:
        root = self.parent.setdefault(x, x)
        if root != x:
            root = self.find(root)
            self.parent[x] = root
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def collapse_duplicates(corpus: Corpus, pairs: list[DuplicatePair] | list[tuple[str, str]]) -> Corpus:
    """Merge near-duplicate questions: per connected component one question
    survives (longest text, ties by earliest timestamp then smallest id) and
    absorbs the answers of the removed ones.

    Judgments of removed questions are dropped when the survivor already has
    one, otherwise reassigned. A removed question's helpful flag is cleared
    when it would collide with the survivor's own helpful answer.
    """
    uf = _UnionFind()
    for pair in pairs:
        id_a, id_b = pair[0], pair[1]
        corpus.question(id_a)
        corpus.question(id_b)
        uf.union(id_a, id_b)

    components: dict[str, list[Question]] = {}
    for q in corpus.questions:
        if q.id in uf.parent:
            components.setdefault(uf.find(q.id), []).append(q)

    replaced: dict[str, str] = {}
    for members in components.values():
        survivor = min(
            members,
            key=lambda q: (-(len(q.subject) + len(q.description)), q.timestamp, q.id),
        )
        for q in members:
            if q.id != survivor.id:
                replaced[q.id] = survivor.id

    questions = [q for q in corpus.questions if q.id not in replaced]

    answers: list[Answer] = []
    helpful_keeper: dict[str, str] = {}
    for a in corpus.answers:
        if a.questioner_helpful:
            qid = replaced.get(a.question_id, a.question_id)
            current = helpful_keeper.get(qid)
            if current is None:
                helpful_keeper[qid] = a.id
            else:
                # Prefer the survivor question's own choice, then smallest id.
                holder = corpus.answer(current)
                holder_native = holder.question_id not in replaced
                a_native = a.question_id not in replaced
                if (not holder_native, holder.id) > (not a_native, a.id):
                    helpful_keeper[qid] = a.id
    for a in corpus.answers:
        qid = replaced.get(a.question_id, a.question_id)
        helpful = a.questioner_helpful and helpful_keeper.get(qid) == a.id
        if qid != a.question_id or helpful != a.questioner_helpful:
            a = Answer(
                id=a.id,
                question_id=qid,
                text=a.text,
                lawyer_id=a.lawyer_id,
                questioner_helpful=helpful,
                lawyer_agree_count=a.lawyer_agree_count,
            )
        answers.append(a)

    judged: set[str] = {j.question_id for j in corpus.judgments if j.question_id not in replaced}
    judgments: list[Judgment] = []
    for j in corpus.judgments:
        qid = replaced.get(j.question_id, j.question_id)
        if j.question_id in replaced:
            if qid in judged:
                continue
            judged.add(qid)
            j = Judgment(question_id=qid, best_answer_id=j.best_answer_id)
        judgments.append(j)

    return Corpus(questions=questions, answers=answers, judgments=judgments)


def _as_fraction(value: float | str | Fraction) -> Fraction:
    # Floats go through their decimal string so 0.7 means 7/10, not the
    # binary neighbor; floor arithmetic on split sizes depends on this.
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: Fraction
    validation_fraction: Fraction
    test_fraction: Fraction

    def __init__(
        self,
        train_fraction: float | str | Fraction = Fraction(7, 10),
        validation_fraction: float | str | Fraction = Fraction(1, 10),
        test_fraction: float | str | Fraction = Fraction(2, 10),
    ) -> None:
        train = _as_fraction(train_fraction)
        validation = _as_fraction(validation_fraction)
        test = _as_fraction(test_fraction)
        for name, frac in (("train", train), ("validation", validation), ("test", test)):
            if not 0 < frac < 1:
                raise DataError(f"{name} fraction {frac} outside (0, 1)")
        if train + validation + test != 1:
            raise DataError(
                f"split fractions must sum to 1, got {train + validation + test}"
            )
        object.__setattr__(self, "train_fraction", train)
        object.__setattr__(self, "validation_fraction", validation)
        object.__setattr__(self, "test_fraction", test)


@dataclass(frozen=True)
class DatasetSplits:
    train: list[str]
    validation: list[str]
    test: list[str]


def chronological_split(questions: list[Question], spec: SplitSpec | None = None) -> DatasetSplits:
    """Partition question ids by post time: earliest floor(train*N) to train,
    next floor(validation*N) to validation, remainder to test.
    """
    spec = spec or SplitSpec()
    ids = [q.id for q in questions]
    if len(set(ids)) != len(ids):
        raise DataError("questions must have distinct ids")

    n = len(questions)
    n_train = math.floor(spec.train_fraction * n)
    n_validation = math.floor(spec.validation_fraction * n)
    n_test = n - n_train - n_validation
    if min(n_train, n_validation, n_test) == 0:
        raise DataError(
            f"cannot populate three non-empty splits from {n} questions "
            f"(sizes {n_train}/{n_validation}/{n_test})"
        )

    ordered = sorted(questions, key=lambda q: (q.timestamp, q.id))
    return DatasetSplits(
        train=[q.id for q in ordered[:n_train]],
        validation=[q.id for q in ordered[n_train : n_train + n_validation]],
        test=[q.id for q in ordered[n_train + n_validation :]],
    )
