import json

import pytest

from cqarank.cli import ENDPOINT_ENV_VAR, main, read_splits
from cqarank.corpus import (
    Corpus,
    Judgment,
    load_answers,
    load_questions,
    write_answers,
    write_corpus,
    write_questions,
)
from cqarank.errors import DataError
from cqarank.protocol import request_from_json
from cqarank.retrieval import ranked_list_from_scores, read_run, write_run

from conftest import make_answer, make_question
from wire_mock import mock_service, overlap_score

DISTINCT_QUESTIONS = [
    ("Security deposit was never returned", "My landlord kept the whole deposit without an itemized statement."),
    ("Speeding ticket from a traffic camera", "Got a ticket by mail although no officer ever stopped me."),
    ("Contesting a will written under pressure", "My late uncle changed his will weeks before passing away."),
    ("Noise complaints against my business", "Neighbors filed repeated complaints about the workshop noise."),
    ("Unpaid overtime at a warehouse job", "My employer refuses to pay for hours worked past forty."),
    ("Custody schedule after moving states", "I relocated for work and need to adjust the parenting plan."),
    ("Dog bite liability on my property", "A delivery worker was bitten inside my fenced yard."),
    ("Trademark dispute over a cafe name", "Another shop two towns over uses nearly the same name."),
    ("Insurance denied a storm damage claim", "The adjuster says the roof damage predates the policy."),
]


@pytest.fixture
def raw_paths(tmp_path):
    """Eleven raw questions (one near-duplicate pair), two answers each."""
    dup_subject = "Can I keep my car after filing for chapter seven bankruptcy?"
    questions = [
        make_question(
            "q01",
            subject=dup_subject,
            description="I filed last month and still owe money on the car loan to my bank.",
            tags=("bankruptcy",),
            hours=0,
        ),
        make_question(
            "q02",
            subject=dup_subject,
            description="I filed last month and still owe money on the car loans to my bank.",
            tags=("bankruptcy", "vehicles"),
            hours=1,
        ),
    ]
    for i, (subject, description) in enumerate(DISTINCT_QUESTIONS, start=3):
        questions.append(
            make_question(
                f"q{i:02d}",
                subject=subject,
                description=description,
                tags=(subject.split()[0].lower(),),
                hours=i - 1,
            )
        )

    answers = []
    for question in questions:
        qid = question.id
        n = int(qid[1:])
        best_kwargs = {}
        if qid == "q01":
            best_kwargs = {"helpful": True}
        elif 3 <= n <= 9:
            best_kwargs = {"helpful": True}
        elif n == 10:
            best_kwargs = {"agrees": 4}
        answers.append(
            make_answer(
                f"a{n:02d}-1",
                qid,
                text=f"You should review {question.subject.lower()} with local counsel.",
                **best_kwargs,
            )
        )
        answers.append(
            make_answer(
                f"a{n:02d}-2",
                qid,
                text=f"Courts weigh the facts; {question.description.lower()}",
            )
        )

    questions_path = tmp_path / "raw_questions.jsonl"
    answers_path = tmp_path / "raw_answers.jsonl"
    write_questions(questions, questions_path)
    write_answers(answers, answers_path)
    return {"questions": questions_path, "answers": answers_path, "tmp": tmp_path}


@pytest.fixture
def dataset(raw_paths):
    out_dir = raw_paths["tmp"] / "dataset"
    code = main(
        [
            "build-dataset",
            "--questions", str(raw_paths["questions"]),
            "--answers", str(raw_paths["answers"]),
            "--output-dir", str(out_dir),
        ]
    )
    assert code == 0
    return out_dir


@pytest.fixture
def bm25_run(dataset, tmp_path):
    index_path = tmp_path / "answers.idx"
    run_path = tmp_path / "bm25.run"
    assert main(["index", "--answers", str(dataset / "answers.jsonl"), "--output", str(index_path)]) == 0
    assert (
        main(
            [
                "retrieve",
                "--questions", str(dataset / "questions.jsonl"),
                "--index", str(index_path),
                "--scorer", "bm25",
                "--output", str(run_path),
            ]
        )
        == 0
    )
    return {"index": index_path, "run": run_path}


class TestBuildDataset:
    def test_collapses_duplicates_and_splits(self, raw_paths, capsys):
        dataset = raw_paths["tmp"] / "dataset"
        code = main(
            [
                "build-dataset",
                "--questions", str(raw_paths["questions"]),
                "--answers", str(raw_paths["answers"]),
                "--output-dir", str(dataset),
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "questions=10" in out
        assert "answers=22" in out
        assert "judged=9" in out
        assert "splits=7/1/2" in out

        questions = load_questions(dataset / "questions.jsonl")
        ids = {q.id for q in questions}
        assert "q01" not in ids
        assert "q02" in ids
        assert len(questions) == 10

    def test_duplicate_answers_reassigned_to_survivor(self, dataset):
        answers = load_answers(dataset / "answers.jsonl")
        assert len(answers) == 22
        moved = [a for a in answers if a.id.startswith("a01")]
        assert {a.question_id for a in moved} == {"q02"}

    def test_splits_manifest(self, dataset):
        splits = read_splits(dataset / "splits.json")
        assert len(splits["train"]) == 7
        assert splits["validation"] == ["q09"]
        assert splits["test"] == ["q10", "q11"]
        assert splits["train"][0] == "q02"

    def test_qrels_written_for_judged_questions(self, dataset):
        lines = (dataset / "qrels.txt").read_text().splitlines()
        assert len(lines) == 9
        judged = {line.split()[0] for line in lines}
        assert "q02" in judged
        assert "q11" not in judged

    def test_missing_input_file_exits_one(self, tmp_path, capsys):
        code = main(
            [
                "build-dataset",
                "--questions", str(tmp_path / "absent.jsonl"),
                "--answers", str(tmp_path / "absent2.jsonl"),
                "--output-dir", str(tmp_path / "out"),
            ]
        )
        assert code == 1
        assert "error" in capsys.readouterr().err


class TestRetrieve:
    def test_run_file_parses_and_respects_k(self, dataset, tmp_path):
        index_path = tmp_path / "answers.idx"
        main(["index", "--answers", str(dataset / "answers.jsonl"), "--output", str(index_path)])
        run_path = tmp_path / "top3.run"
        code = main(
            [
                "retrieve",
                "--questions", str(dataset / "questions.jsonl"),
                "--index", str(index_path),
                "--k", "3",
                "--output", str(run_path),
            ]
        )
        assert code == 0
        run = read_run(run_path)
        assert run
        assert all(len(r.entries) <= 3 for r in run)

    def test_split_subset_restricts_queries(self, dataset, bm25_run, tmp_path):
        run_path = tmp_path / "test-split.run"
        code = main(
            [
                "retrieve",
                "--questions", str(dataset / "questions.jsonl"),
                "--index", str(bm25_run["index"]),
                "--split", str(dataset / "splits.json"),
                "--subset", "test",
                "--output", str(run_path),
            ]
        )
        assert code == 0
        assert {r.question_id for r in read_run(run_path)} <= {"q10", "q11"}

    def test_custom_tag_lands_in_run_file(self, dataset, bm25_run, tmp_path):
        run_path = tmp_path / "tagged.run"
        main(
            [
                "retrieve",
                "--questions", str(dataset / "questions.jsonl"),
                "--index", str(bm25_run["index"]),
                "--tag", "mytag",
                "--output", str(run_path),
            ]
        )
        assert " mytag" in run_path.read_text().splitlines()[0]

    def test_subset_without_split_exits_one(self, dataset, bm25_run, tmp_path, capsys):
        code = main(
            [
                "retrieve",
                "--questions", str(dataset / "questions.jsonl"),
                "--index", str(bm25_run["index"]),
                "--subset", "test",
                "--output", str(tmp_path / "x.run"),
            ]
        )
        assert code == 1
        assert "--split" in capsys.readouterr().err


class TestEvaluate:
    def test_single_run_table_and_json(self, dataset, bm25_run, tmp_path, capsys):
        json_path = tmp_path / "metrics.json"
        code = main(
            [
                "evaluate",
                "--qrels", str(dataset / "qrels.txt"),
                "--runs", str(bm25_run["run"]),
                "--cutoffs", "1,2,10",
                "--json", str(json_path),
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "MAP@1" in out and "Recall@10" in out
        assert "bm25" in out
        payload = json.loads(json_path.read_text())
        metrics = payload["metrics"]["bm25"]
        assert set(metrics) == {"MAP@1", "MAP@2", "MAP@10", "Recall@1", "Recall@2", "Recall@10"}
        assert all(0.0 <= v <= 1.0 for v in metrics.values())
        assert payload["significance"] == []

    def test_two_runs_require_comparisons(self, dataset, bm25_run, tmp_path, capsys):
        lmd_path = tmp_path / "lmd.run"
        main(
            [
                "retrieve",
                "--questions", str(dataset / "questions.jsonl"),
                "--index", str(bm25_run["index"]),
                "--scorer", "lmd",
                "--output", str(lmd_path),
            ]
        )
        code = main(
            [
                "evaluate",
                "--qrels", str(dataset / "qrels.txt"),
                "--runs", str(bm25_run["run"]), str(lmd_path),
            ]
        )
        assert code == 1
        assert "--comparisons" in capsys.readouterr().err

        code = main(
            [
                "evaluate",
                "--qrels", str(dataset / "qrels.txt"),
                "--runs", str(bm25_run["run"]), str(lmd_path),
                "--cutoffs", "1,10",
                "--comparisons", "12",
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "paired t-tests" in out
        assert "bm25 vs lmd" in out

    def test_split_restriction(self, dataset, bm25_run, capsys):
        code = main(
            [
                "evaluate",
                "--qrels", str(dataset / "qrels.txt"),
                "--runs", str(bm25_run["run"]),
                "--cutoffs", "1",
                "--split", str(dataset / "splits.json"),
                "--subset", "test",
            ]
        )
        assert code == 0
        assert "bm25" in capsys.readouterr().out

    def test_duplicate_run_names_rejected(self, dataset, bm25_run, capsys):
        code = main(
            [
                "evaluate",
                "--qrels", str(dataset / "qrels.txt"),
                "--runs", str(bm25_run["run"]), str(bm25_run["run"]),
                "--comparisons", "10",
            ]
        )
        assert code == 1
        assert "share the name" in capsys.readouterr().err


class TestRerank:
    def test_rerank_with_live_mock(self, dataset, bm25_run, tmp_path):
        out_path = tmp_path / "ce.run"
        with mock_service(overlap_score) as endpoint:
            code = main(
                [
                    "rerank",
                    "--run", str(bm25_run["run"]),
                    "--corpus-dir", str(dataset),
                    "--endpoint", endpoint,
                    "--output", str(out_path),
                ]
            )
        assert code == 0
        before = {r.question_id: set(r.answer_ids()) for r in read_run(bm25_run["run"])}
        after = {r.question_id: set(r.answer_ids()) for r in read_run(out_path)}
        assert after == before
        assert " ce-fs" in out_path.read_text().splitlines()[0]

    def test_endpoint_from_environment(self, dataset, bm25_run, tmp_path, monkeypatch):
        out_path = tmp_path / "ce-env.run"
        with mock_service(overlap_score) as endpoint:
            monkeypatch.setenv(ENDPOINT_ENV_VAR, endpoint)
            code = main(
                [
                    "rerank",
                    "--run", str(bm25_run["run"]),
                    "--corpus-dir", str(dataset),
                    "--format", "cat",
                    "--tag", "mytag",
                    "--output", str(out_path),
                ]
            )
        assert code == 0
        assert " mytag" in out_path.read_text().splitlines()[0]

    def test_missing_endpoint_exits_one(self, dataset, bm25_run, tmp_path, monkeypatch, capsys):
        monkeypatch.delenv(ENDPOINT_ENV_VAR, raising=False)
        code = main(
            [
                "rerank",
                "--run", str(bm25_run["run"]),
                "--corpus-dir", str(dataset),
                "--output", str(tmp_path / "x.run"),
            ]
        )
        assert code == 1
        assert ENDPOINT_ENV_VAR in capsys.readouterr().err

    def test_dead_endpoint_exits_three(self, dataset, bm25_run, tmp_path, capsys):
        code = main(
            [
                "rerank",
                "--run", str(bm25_run["run"]),
                "--corpus-dir", str(dataset),
                "--endpoint", "http://127.0.0.1:9",
                "--timeout", "0.5",
                "--output", str(tmp_path / "x.run"),
            ]
        )
        assert code == 3
        assert "scorer error" in capsys.readouterr().err

    def test_drop_with_cat_format_exits_one(self, dataset, bm25_run, tmp_path, capsys):
        code = main(
            [
                "rerank",
                "--run", str(bm25_run["run"]),
                "--corpus-dir", str(dataset),
                "--endpoint", "http://127.0.0.1:9",
                "--format", "cat",
                "--drop", "T",
                "--output", str(tmp_path / "x.run"),
            ]
        )
        assert code == 1
        assert "fs format" in capsys.readouterr().err


class TestAblate:
    @pytest.fixture
    def tag_signal(self, tmp_path):
        """One query whose relevant answer matches only through the tags."""
        question = make_question(
            "qa1",
            subject="can i keep my car",
            description="i filed for protection last month",
            tags=("alpha beta gamma",),
        )
        answers = [
            make_answer("aR", "qa1", text="alpha beta gamma"),
            make_answer("aD", "qa1", text="keep car advice"),
        ]
        corpus = Corpus(
            questions=[question],
            answers=answers,
            judgments=[Judgment("qa1", "aR")],
        )
        corpus_dir = tmp_path / "tagsig"
        write_corpus(corpus, corpus_dir)
        run_path = tmp_path / "first.run"
        write_run(
            [ranked_list_from_scores("qa1", [("aD", 5.0), ("aR", 4.0)])],
            run_path,
            "bm25",
        )
        return {"corpus": corpus_dir, "run": run_path}

    def test_tag_ablation_changes_ranking(self, tag_signal, tmp_path, capsys):
        json_path = tmp_path / "ablate.json"
        runs_dir = tmp_path / "variant-runs"
        with mock_service(overlap_score) as endpoint:
            code = main(
                [
                    "ablate",
                    "--run", str(tag_signal["run"]),
                    "--corpus-dir", str(tag_signal["corpus"]),
                    "--qrels", str(tag_signal["corpus"] / "qrels.txt"),
                    "--endpoint", endpoint,
                    "--cutoffs", "1,2",
                    "--json", str(json_path),
                    "--runs-dir", str(runs_dir),
                ]
            )
        assert code == 0
        payload = json.loads(json_path.read_text())
        assert set(payload) == {"full", "drop-S", "drop-D", "drop-T"}
        assert payload["full"]["MAP@1"] == 1.0
        assert payload["drop-T"]["MAP@1"] == 0.0
        assert all(payload[v]["Recall@2"] == 1.0 for v in payload)
        assert sorted(p.name for p in runs_dir.iterdir()) == [
            "ce-fs-drop-D.run",
            "ce-fs-drop-S.run",
            "ce-fs-drop-T.run",
            "ce-fs-full.run",
        ]
        out = capsys.readouterr().out
        assert "full" in out and "drop-T" in out


class TestRender:
    def test_render_emits_valid_wire_request(self, dataset, capsys):
        code = main(
            [
                "render",
                "--corpus-dir", str(dataset),
                "--question-id", "q02",
                "--answer-id", "a01-1",
            ]
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        format, pairs = request_from_json(payload)
        assert format == "fs"
        assert [pair_id for pair_id, _ in pairs] == ["debug"]
        markers = [s.marker for s in pairs[0][1].query_segments]
        assert markers == ["S", "D", "T"]

    def test_render_with_drop(self, dataset, capsys):
        code = main(
            [
                "render",
                "--corpus-dir", str(dataset),
                "--question-id", "q02",
                "--answer-id", "a01-1",
                "--drop", "T",
            ]
        )
        assert code == 0
        _, pairs = request_from_json(json.loads(capsys.readouterr().out))
        assert [s.marker for s in pairs[0][1].query_segments] == ["S", "D"]


class TestConfig:
    def test_config_sets_defaults_and_cli_overrides(self, dataset, bm25_run, tmp_path):
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps({"retrieve": {"k": 2}}))
        run_path = tmp_path / "configured.run"
        code = main(
            [
                "--config", str(config_path),
                "retrieve",
                "--questions", str(dataset / "questions.jsonl"),
                "--index", str(bm25_run["index"]),
                "--output", str(run_path),
            ]
        )
        assert code == 0
        assert all(len(r.entries) <= 2 for r in read_run(run_path))

        override_path = tmp_path / "override.run"
        code = main(
            [
                "--config", str(config_path),
                "retrieve",
                "--questions", str(dataset / "questions.jsonl"),
                "--index", str(bm25_run["index"]),
                "--k", "1",
                "--output", str(override_path),
            ]
        )
        assert code == 0
        assert all(len(r.entries) == 1 for r in read_run(override_path))

    def test_unknown_config_key_exits_one(self, tmp_path, capsys):
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps({"retrieve": {"kk": 2}}))
        code = main(
            [
                "--config", str(config_path),
                "retrieve",
                "--questions", "x.jsonl",
                "--index", "x.idx",
                "--output", "x.run",
            ]
        )
        assert code == 1
        assert "matches no flag" in capsys.readouterr().err

    def test_unknown_config_subcommand_exits_one(self, tmp_path, capsys):
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps({"frobnicate": {"k": 2}}))
        code = main(
            [
                "--config", str(config_path),
                "retrieve",
                "--questions", "x.jsonl",
                "--index", "x.idx",
                "--output", "x.run",
            ]
        )
        assert code == 1
        assert "unknown subcommand" in capsys.readouterr().err

    def test_invalid_config_json_exits_one(self, tmp_path, capsys):
        config_path = tmp_path / "config.json"
        config_path.write_text("{not json")
        code = main(
            [
                "--config", str(config_path),
                "retrieve",
                "--questions", "x.jsonl",
                "--index", "x.idx",
                "--output", "x.run",
            ]
        )
        assert code == 1
        assert "JSON" in capsys.readouterr().err


class TestUsage:
    def test_missing_required_flag_exits_two(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["retrieve"])
        assert excinfo.value.code == 2

    def test_unknown_subcommand_exits_two(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["frobnicate"])
        assert excinfo.value.code == 2
