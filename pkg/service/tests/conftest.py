"""Shared fixtures: toy corpora in the engine's file formats, base and
fine-tuned checkpoints, and a live scoring server.

Everything shared is exposed as a fixture (not module attributes) so the
suite behaves the same no matter which directory pytest is invoked from.
"""

from __future__ import annotations

import json
import random
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import pytest
import uvicorn

from reranker_service import category_words, create_app
from reranker_service.cli import main as cli_main

SECONDARY_LINES: list[str] = []

_FILLERS = (
    "about because court money going every other letter record notice "
    "people think supposed received working payment want house help "
    "before against paper question member really number change office"
).split()


@dataclass
class ToyCorpus:
    root: Path
    questions: Path = field(init=False)
    answers: Path = field(init=False)
    qrels: Path = field(init=False)
    splits: Path = field(init=False)
    question_ids: list[str] = field(default_factory=list)
    best_answer: dict[str, str] = field(default_factory=dict)
    candidates: dict[str, list[str]] = field(default_factory=dict)
    split_ids: dict[str, list[str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.questions = self.root / "questions.jsonl"
        self.answers = self.root / "answers.jsonl"
        self.qrels = self.root / "qrels.txt"
        self.splits = self.root / "splits.json"


def _write_toy_corpus(
    root: Path, n_questions: int, n_distractors: int, seed: int
) -> ToyCorpus:
    """Corpus where each question's best answer copies its tags verbatim
    and the distractors draw from a disjoint word pool.
    """
    root.mkdir(parents=True, exist_ok=True)
    corpus = ToyCorpus(root)
    rng = random.Random(seed)
    tagpool = list(category_words())
    questions, answers, qrels = [], [], []
    for i in range(n_questions):
        qid = f"q{i:02d}"
        corpus.question_ids.append(qid)
        tags = rng.sample(tagpool, 2)
        questions.append(
            {
                "id": qid,
                "subject": " ".join(rng.choice(_FILLERS) for _ in range(5)) + "?",
                "description": " ".join(rng.choice(_FILLERS) for _ in range(12)) + ".",
                "tags": tags,
                "timestamp": f"2019-03-{(i % 27) + 1:02d}T12:00:00Z",
                "asker_id": f"asker-{i}",
            }
        )
        best = f"{qid}-a00"
        corpus.best_answer[qid] = best
        corpus.candidates[qid] = [best]
        answers.append(
            {
                "id": best,
                "question_id": qid,
                "text": " ".join(tags) + " is what applies here.",
                "lawyer_id": "lawyer-1",
                "questioner_helpful": True,
                "lawyer_agree_count": 0,
            }
        )
        qrels.append(f"{qid} 0 {best} 1")
        for j in range(1, n_distractors + 1):
            aid = f"{qid}-a{j:02d}"
            corpus.candidates[qid].append(aid)
            answers.append(
                {
                    "id": aid,
                    "question_id": qid,
                    "text": " ".join(rng.choice(_FILLERS) for _ in range(8)) + ".",
                    "lawyer_id": f"lawyer-{j}",
                    "questioner_helpful": False,
                    "lawyer_agree_count": 0,
                }
            )

    n_train = max(1, int(n_questions * 0.7))
    n_validation = max(1, int(n_questions * 0.1))
    corpus.split_ids = {
        "train": corpus.question_ids[:n_train],
        "validation": corpus.question_ids[n_train : n_train + n_validation],
        "test": corpus.question_ids[n_train + n_validation :],
    }
    corpus.questions.write_text(
        "\n".join(json.dumps(row) for row in questions) + "\n", encoding="utf-8"
    )
    corpus.answers.write_text(
        "\n".join(json.dumps(row) for row in answers) + "\n", encoding="utf-8"
    )
    corpus.qrels.write_text("\n".join(qrels) + "\n", encoding="utf-8")
    corpus.splits.write_text(
        json.dumps({"format": "cqarank.splits", "version": 1, **corpus.split_ids}),
        encoding="utf-8",
    )
    return corpus


@pytest.fixture(scope="session")
def toy_corpus_factory(tmp_path_factory):
    def build(name: str, n_questions: int, n_distractors: int = 9, seed: int = 401):
        return _write_toy_corpus(
            tmp_path_factory.mktemp(name), n_questions, n_distractors, seed
        )

    return build


@pytest.fixture(scope="session")
def toy_corpus(toy_corpus_factory) -> ToyCorpus:
    return toy_corpus_factory("toy50", 50)


@pytest.fixture(scope="session")
def base_fs_checkpoint(tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("checkpoints") / "base-fs"
    assert cli_main(["init", "--out", str(out), "--format", "fs", "--seed", "7"]) == 0
    return out


@pytest.fixture(scope="session")
def base_cat_checkpoint(tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("checkpoints") / "base-cat"
    assert cli_main(["init", "--out", str(out), "--format", "cat", "--seed", "7"]) == 0
    return out


@dataclass
class TrainedCheckpoint:
    path: Path
    base: Path
    corpus: ToyCorpus
    elapsed_seconds: float


@pytest.fixture(scope="session")
def trained_checkpoint(
    tmp_path_factory, base_fs_checkpoint, toy_corpus
) -> TrainedCheckpoint:
    out = tmp_path_factory.mktemp("checkpoints") / "tuned-fs"
    started = time.perf_counter()
    rc = cli_main(
        [
            "train",
            "--base", str(base_fs_checkpoint),
            "--questions", str(toy_corpus.questions),
            "--answers", str(toy_corpus.answers),
            "--qrels", str(toy_corpus.qrels),
            "--splits", str(toy_corpus.splits),
            "--out", str(out),
            "--learning-rate", "3e-4",
            "--batch-size", "16",
            "--epochs", "4",
            "--seed", "5",
        ]
    )
    elapsed = time.perf_counter() - started
    assert rc == 0
    return TrainedCheckpoint(out, base_fs_checkpoint, toy_corpus, elapsed)


@pytest.fixture(scope="session")
def live_server(trained_checkpoint):
    app = create_app(trained_checkpoint.path)
    config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 30
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("scoring server did not start")
        time.sleep(0.02)
    port = server.servers[0].sockets[0].getsockname()[1]
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=10)


@pytest.fixture
def acceptance_line():
    return SECONDARY_LINES.append


def pytest_terminal_summary(terminalreporter, exitstatus, config) -> None:
    if SECONDARY_LINES:
        terminalreporter.section("acceptance criteria (secondary)")
        for line in SECONDARY_LINES:
            terminalreporter.write_line(line)
