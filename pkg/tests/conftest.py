"""Shared fixture builders for the test suite."""

from __future__ import annotations

from datetime import datetime, timedelta, timezone

import pytest

from cqarank.corpus import Answer, Corpus, Judgment, Question

BASE_TIME = datetime(2019, 3, 1, 12, 0, 0, tzinfo=timezone.utc)

# Verdict lines recorded by the acceptance tests; echoed after the run so
# they stay visible regardless of output capture.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config) -> None:
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_question(
    qid: str = "q1",
    subject: str = "Can I keep my car?",
    description: str = "I filed for chapter 7 protection last month.",
    tags: tuple[str, ...] = ("bankruptcy", "chapter 7"),
    hours: int = 0,
    asker_id: str = "asker-1",
) -> Question:
    return Question(
        id=qid,
        subject=subject,
        description=description,
        tags=tags,
        timestamp=BASE_TIME + timedelta(hours=hours),
        asker_id=asker_id,
    )


def make_answer(
    aid: str = "a1",
    question_id: str = "q1",
    text: str = "Generally yes, if you keep paying the loan.",
    lawyer_id: str = "lawyer-1",
    helpful: bool = False,
    agrees: int = 0,
) -> Answer:
    return Answer(
        id=aid,
        question_id=question_id,
        text=text,
        lawyer_id=lawyer_id,
        questioner_helpful=helpful,
        lawyer_agree_count=agrees,
    )


@pytest.fixture
def small_corpus() -> Corpus:
    """Three questions, five answers, two judgments."""
    questions = [
        make_question("q1", hours=0),
        make_question(
            "q2",
            subject="Security deposit not returned",
            description="My landlord kept the deposit without an itemized list.",
            tags=("landlord", "tenant"),
            hours=5,
        ),
        make_question(
            "q3",
            subject="Speeding ticket from a camera",
            description="Got a ticket by mail, never stopped by an officer.",
            tags=(),
            hours=9,
        ),
    ]
    answers = [
        make_answer("a1", "q1", "You can usually reaffirm the car loan.", helpful=True),
        make_answer("a2", "q1", "Chapter 7 has exemptions for vehicles.", agrees=4),
        make_answer("a3", "q2", "Landlords must provide an itemized statement.", agrees=3),
        make_answer("a4", "q2", "Small claims court handles deposit disputes."),
        make_answer("a5", "q3", "Camera tickets are often civil violations."),
    ]
    judgments = [Judgment("q1", "a1"), Judgment("q2", "a3")]
    return Corpus(questions=questions, answers=answers, judgments=judgments)
