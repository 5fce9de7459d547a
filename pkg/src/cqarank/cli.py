"""Command-line entry point wiring the pipeline stages together.

Exit codes: 0 success, 1 data error, 3 scorer transport error (argparse
itself exits 2 on usage errors).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Sequence

from . import corpus as corpus_io
from . import evaluation, inputs, retrieval
from .dataset import (
    SplitSpec,
    chronological_split,
    collapse_duplicates,
    find_near_duplicates,
    select_best_answer,
)
from .errors import CqarankError, DataError, ScorerTransportError
from .indexing import build_index, load_index, save_index
from .protocol import request_to_json
from .rerank import DEFAULT_BATCH_SIZE, DEFAULT_TIMEOUT_SECONDS, HttpScorer, rerank_run

log = logging.getLogger("cqarank")

ENDPOINT_ENV_VAR = "CQARANK_SCORER_ENDPOINT"
SPLITS_FORMAT = "cqarank.splits"
SPLITS_VERSION = 1
SPLIT_NAMES = ("train", "validation", "test")

EXIT_OK = 0
EXIT_DATA_ERROR = 1
EXIT_SCORER_ERROR = 3


def _write_splits(path: Path, splits: dict[str, list[str]]) -> None:
    payload = {"format": SPLITS_FORMAT, "version": SPLITS_VERSION, **splits}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_splits(path: Path | str) -> dict[str, list[str]]:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not a valid splits file: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != SPLITS_FORMAT:
        raise DataError(f"{path}: not a {SPLITS_FORMAT} file")
    missing = [name for name in SPLIT_NAMES if not isinstance(payload.get(name), list)]
    if missing:
        raise DataError(f"{path}: missing split lists {missing}")
    return {name: [str(qid) for qid in payload[name]] for name in SPLIT_NAMES}


def _fields_argument(raw: str) -> tuple[str, ...]:
    fields = tuple(part.strip() for part in raw.split(",") if part.strip())
    if not fields:
        raise argparse.ArgumentTypeError("expected a comma-separated field list")
    return fields


def _drop_argument(raw: str) -> tuple[str, ...]:
    return tuple(part.strip().upper() for part in raw.split(",") if part.strip())


def _resolve_endpoint(args: argparse.Namespace) -> str:
    endpoint = args.endpoint or os.environ.get(ENDPOINT_ENV_VAR)
    if not endpoint:
        raise DataError(
            f"no scorer endpoint: pass --endpoint or set {ENDPOINT_ENV_VAR}"
        )
    return endpoint


def cmd_build_dataset(args: argparse.Namespace) -> int:
    questions = corpus_io.load_questions(args.questions)
    answers = corpus_io.load_answers(args.answers)
    raw = corpus_io.Corpus(questions=questions, answers=answers, judgments=[])
    log.info("loaded %d questions, %d answers", len(questions), len(answers))

    pairs = find_near_duplicates(questions, threshold=args.threshold)
    log.info("found %d near-duplicate pairs above %s%%", len(pairs), args.threshold)
    collapsed = collapse_duplicates(raw, pairs)
    log.info("retained %d questions after collapse", len(collapsed.questions))

    judgments = []
    for question in collapsed.questions:
        best = select_best_answer(question, collapsed.answers_for(question.id))
        if best is not None:
            judgments.append(corpus_io.Judgment(question_id=question.id, best_answer_id=best))
    log.info("adjudicated best answers for %d questions", len(judgments))

    spec = SplitSpec(args.train_fraction, args.validation_fraction, args.test_fraction)
    splits = chronological_split(collapsed.questions, spec)

    final = corpus_io.Corpus(
        questions=collapsed.questions, answers=collapsed.answers, judgments=judgments
    )
    out_dir = Path(args.output_dir)
    corpus_io.write_corpus(final, out_dir)
    _write_splits(
        out_dir / "splits.json",
        {"train": splits.train, "validation": splits.validation, "test": splits.test},
    )
    print(
        f"questions={len(final.questions)} answers={len(final.answers)} "
        f"judged={len(judgments)} splits={len(splits.train)}/"
        f"{len(splits.validation)}/{len(splits.test)} -> {out_dir}"
    )
    return EXIT_OK


def cmd_index(args: argparse.Namespace) -> int:
    answers = corpus_io.load_answers(args.answers)
    index = build_index(answers)
    save_index(index, args.output)
    print(
        f"indexed {index.doc_count} answers, {len(index.postings)} terms, "
        f"{index.collection_length} tokens -> {args.output}"
    )
    return EXIT_OK


def _select_questions(args: argparse.Namespace) -> list:
    questions = corpus_io.load_questions(args.questions)
    if args.split is None:
        if args.subset is not None:
            raise DataError("--subset requires --split")
        return questions
    if args.subset is None:
        raise DataError("--split requires --subset")
    wanted = set(read_splits(args.split)[args.subset])
    selected = [q for q in questions if q.id in wanted]
    missing = wanted - {q.id for q in selected}
    if missing:
        raise DataError(
            f"split lists {len(missing)} question ids absent from {args.questions}"
        )
    return selected


def cmd_retrieve(args: argparse.Namespace) -> int:
    questions = _select_questions(args)
    index = load_index(args.index)
    bm25 = retrieval.Bm25Params(k1=args.k1, b=args.b)
    lmd = retrieval.LmdParams(mu=args.mu)
    tag = args.tag or args.scorer

    ranked_lists = []
    for question in questions:
        ranked = retrieval.retrieve(
            question, index, scorer=args.scorer, k=args.k, bm25=bm25, lmd=lmd,
            fields=args.fields,
        )
        if ranked.entries:
            ranked_lists.append(ranked)
        else:
            log.info("query %s matched nothing", question.id)
    retrieval.write_run(ranked_lists, args.output, tag)
    print(
        f"retrieved top-{args.k} ({args.scorer}) for {len(ranked_lists)}/"
        f"{len(questions)} queries -> {args.output}"
    )
    return EXIT_OK


def _ablation_from_drop(drop: tuple[str, ...]) -> inputs.AblationSpec | None:
    return inputs.AblationSpec(drop) if drop else None


def cmd_rerank(args: argparse.Namespace) -> int:
    corpus = corpus_io.load_corpus(args.corpus_dir)
    run = retrieval.read_run(args.run)
    scorer = HttpScorer(_resolve_endpoint(args), timeout=args.timeout)
    ablation = _ablation_from_drop(args.drop)
    if args.format == inputs.FORMAT_CAT and ablation is not None:
        raise DataError("--drop applies to the fs format only")
    tag = args.tag or f"ce-{args.format}"

    reranked = rerank_run(
        run, corpus, scorer, args.format, ablation, batch_size=args.batch_size
    )
    retrieval.write_run(reranked, args.output, tag)
    print(f"reranked {len(reranked)} queries ({tag}) -> {args.output}")
    return EXIT_OK


def _metric_label(report: evaluation.MetricReport) -> str:
    return f"{report.metric_name}@{report.k}"


def _print_metric_table(named_reports: dict[str, list[evaluation.MetricReport]]) -> None:
    systems = list(named_reports)
    labels = [_metric_label(r) for r in named_reports[systems[0]]]
    name_width = max(len("system"), max(len(s) for s in systems))
    print(f"{'system':<{name_width}}  " + "  ".join(f"{label:>9}" for label in labels))
    for system in systems:
        cells = "  ".join(f"{r.aggregate:>9.4f}" for r in named_reports[system])
        print(f"{system:<{name_width}}  {cells}")


def cmd_evaluate(args: argparse.Namespace) -> int:
    qrels = evaluation.read_qrels(args.qrels)
    if args.split is not None:
        if args.subset is None:
            raise DataError("--split requires --subset")
        wanted = set(read_splits(args.split)[args.subset])
        qrels = {qid: rel for qid, rel in qrels.items() if qid in wanted}
    elif args.subset is not None:
        raise DataError("--subset requires --split")
    if not qrels:
        raise DataError("no judged queries left to evaluate")

    named_reports: dict[str, list[evaluation.MetricReport]] = {}
    for run_path in args.runs:
        name = Path(run_path).stem
        if name in named_reports:
            raise DataError(f"two runs share the name {name!r}")
        run = retrieval.read_run(run_path)
        named_reports[name] = evaluation.evaluate_run(run, qrels, args.cutoffs)
    _print_metric_table(named_reports)

    significance: list[evaluation.SignificanceResult] = []
    if len(named_reports) >= 2:
        if args.comparisons is None:
            raise DataError("--comparisons is required when evaluating several runs")
        comparisons = []
        systems = list(named_reports)
        for i, system_a in enumerate(systems):
            for system_b in systems[i + 1 :]:
                for report_a, report_b in zip(
                    named_reports[system_a], named_reports[system_b]
                ):
                    outcome = evaluation.paired_t_test(report_a.per_query, report_b.per_query)
                    comparisons.append(
                        evaluation.Comparison(
                            metric_name=_metric_label(report_a),
                            system_a=system_a,
                            system_b=system_b,
                            t_statistic=outcome.t_statistic,
                            p_value=outcome.p_value,
                        )
                    )
        significance = evaluation.bonferroni(comparisons, args.alpha, args.comparisons)
        print()
        print(f"paired t-tests, alpha={args.alpha}, m={args.comparisons}:")
        for result in significance:
            verdict = "significant" if result.significant else "not significant"
            print(
                f"  {result.system_a} vs {result.system_b} on {result.metric_name}: "
                f"t={result.t_statistic:.4f} p={result.p_value:.6g} ({verdict})"
            )

    if args.json is not None:
        payload: dict[str, Any] = {
            "metrics": {
                system: {_metric_label(r): r.aggregate for r in reports}
                for system, reports in named_reports.items()
            },
            "significance": [
                {
                    "metric": s.metric_name,
                    "system_a": s.system_a,
                    "system_b": s.system_b,
                    "t_statistic": s.t_statistic,
                    "p_value": s.p_value,
                    "corrected_alpha": s.corrected_alpha,
                    "significant": s.significant,
                }
                for s in significance
            ],
        }
        Path(args.json).write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return EXIT_OK


ABLATION_VARIANTS: tuple[tuple[str, tuple[str, ...]], ...] = (
    ("full", ()),
    ("drop-S", ("S",)),
    ("drop-D", ("D",)),
    ("drop-T", ("T",)),
)


def cmd_ablate(args: argparse.Namespace) -> int:
    corpus = corpus_io.load_corpus(args.corpus_dir)
    run = retrieval.read_run(args.run)
    qrels = evaluation.read_qrels(args.qrels)
    if not qrels:
        raise DataError("no judged queries to evaluate")
    scorer = HttpScorer(_resolve_endpoint(args), timeout=args.timeout)

    named_reports: dict[str, list[evaluation.MetricReport]] = {}
    for variant, drop in ABLATION_VARIANTS:
        reranked = rerank_run(
            run, corpus, scorer, inputs.FORMAT_FS,
            _ablation_from_drop(drop), batch_size=args.batch_size,
        )
        if args.runs_dir is not None:
            runs_dir = Path(args.runs_dir)
            runs_dir.mkdir(parents=True, exist_ok=True)
            retrieval.write_run(reranked, runs_dir / f"ce-fs-{variant}.run", f"ce-fs-{variant}")
        named_reports[variant] = evaluation.evaluate_run(reranked, qrels, args.cutoffs)
        log.info("ablation variant %s evaluated", variant)
    _print_metric_table(named_reports)

    if args.json is not None:
        payload = {
            variant: {_metric_label(r): r.aggregate for r in reports}
            for variant, reports in named_reports.items()
        }
        Path(args.json).write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return EXIT_OK


def cmd_render(args: argparse.Namespace) -> int:
    corpus = corpus_io.load_corpus(args.corpus_dir)
    question = corpus.question(args.question_id)
    answer = corpus.answer(args.answer_id)
    structured = inputs.build_input(
        question, answer.text, args.format, _ablation_from_drop(args.drop)
    )
    print(json.dumps(request_to_json(args.format, [("debug", structured)]), indent=2))
    return EXIT_OK


def _load_config(path: str | None) -> dict[str, dict[str, Any]]:
    if path is None:
        return {}
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(payload, dict) or not all(
        isinstance(v, dict) for v in payload.values()
    ):
        raise DataError(f"{path}: config must map subcommand names to flag objects")
    return payload


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="cqarank",
        description="Two-stage answer retrieval: lexical retrieval plus neural re-ranking.",
    )
    parser.add_argument("--config", help="JSON file with per-subcommand flag defaults")
    parser.add_argument(
        "-v", "--verbose", action="count", default=0,
        help="-v for progress, -vv for debug output",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    subparsers: dict[str, argparse.ArgumentParser] = {}

    p = commands.add_parser("build-dataset", help="dedup, adjudicate, and split a raw corpus")
    p.add_argument("--questions", required=True, help="raw questions JSONL")
    p.add_argument("--answers", required=True, help="raw answers JSONL")
    p.add_argument("--output-dir", required=True)
    p.add_argument("--threshold", type=float, default=90.0,
                   help="near-duplicate similarity threshold in percent")
    p.add_argument("--train-fraction", default="0.7")
    p.add_argument("--validation-fraction", default="0.1")
    p.add_argument("--test-fraction", default="0.2")
    p.set_defaults(func=cmd_build_dataset)
    subparsers["build-dataset"] = p

    p = commands.add_parser("index", help="build the inverted index over answers")
    p.add_argument("--answers", required=True, help="answers JSONL")
    p.add_argument("--output", required=True, help="index file to write")
    p.set_defaults(func=cmd_index)
    subparsers["index"] = p

    p = commands.add_parser("retrieve", help="first-stage lexical retrieval")
    p.add_argument("--questions", required=True, help="questions JSONL")
    p.add_argument("--index", required=True)
    p.add_argument("--scorer", choices=("bm25", "lmd"), default="bm25")
    p.add_argument("--k", type=int, default=1000)
    p.add_argument("--k1", type=float, default=1.2)
    p.add_argument("--b", type=float, default=0.75)
    p.add_argument("--mu", type=float, default=1000.0)
    p.add_argument("--fields", type=_fields_argument, default=retrieval.QUERY_FIELDS,
                   help="comma-separated query fields (subject,description,tags)")
    p.add_argument("--split", help="splits manifest from build-dataset")
    p.add_argument("--subset", choices=SPLIT_NAMES, help="which split to retrieve for")
    p.add_argument("--tag", help="run tag (defaults to the scorer name)")
    p.add_argument("--output", required=True, help="run file to write")
    p.set_defaults(func=cmd_retrieve)
    subparsers["retrieve"] = p

    p = commands.add_parser("rerank", help="re-order a run with the scorer service")
    p.add_argument("--run", required=True, help="first-stage run file")
    p.add_argument("--corpus-dir", required=True)
    p.add_argument("--format", choices=inputs.FORMATS, default=inputs.FORMAT_FS)
    p.add_argument("--drop", type=_drop_argument, default=(),
                   help="comma-separated segments to ablate (S,D,T); fs only")
    p.add_argument("--endpoint", help=f"scorer service URL (or {ENDPOINT_ENV_VAR})")
    p.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT_SECONDS)
    p.add_argument("--batch-size", type=int, default=DEFAULT_BATCH_SIZE)
    p.add_argument("--tag", help="run tag (defaults to ce-<format>)")
    p.add_argument("--output", required=True, help="run file to write")
    p.set_defaults(func=cmd_rerank)
    subparsers["rerank"] = p

    p = commands.add_parser("evaluate", help="score runs against qrels")
    p.add_argument("--qrels", required=True)
    p.add_argument("--runs", nargs="+", required=True, help="one or more run files")
    p.add_argument("--cutoffs", type=lambda s: [int(x) for x in s.split(",")],
                   default=[1, 2, 10, 100, 1000])
    p.add_argument("--split", help="splits manifest to restrict judged queries")
    p.add_argument("--subset", choices=SPLIT_NAMES)
    p.add_argument("--alpha", type=float, default=0.001)
    p.add_argument("--comparisons", type=int,
                   help="Bonferroni m; required when evaluating several runs")
    p.add_argument("--json", help="also write metrics as JSON")
    p.set_defaults(func=cmd_evaluate)
    subparsers["evaluate"] = p

    p = commands.add_parser("ablate", help="rerank+evaluate the structured format and its single-segment drops")
    p.add_argument("--run", required=True, help="first-stage run file")
    p.add_argument("--corpus-dir", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--endpoint", help=f"scorer service URL (or {ENDPOINT_ENV_VAR})")
    p.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT_SECONDS)
    p.add_argument("--batch-size", type=int, default=DEFAULT_BATCH_SIZE)
    p.add_argument("--cutoffs", type=lambda s: [int(x) for x in s.split(",")],
                   default=[1, 10, 100, 1000])
    p.add_argument("--runs-dir", help="directory to keep the per-variant run files")
    p.add_argument("--json", help="also write the report as JSON")
    p.set_defaults(func=cmd_ablate)
    subparsers["ablate"] = p

    p = commands.add_parser("render", help="print the wire request for one pair")
    p.add_argument("--corpus-dir", required=True)
    p.add_argument("--question-id", required=True)
    p.add_argument("--answer-id", required=True)
    p.add_argument("--format", choices=inputs.FORMATS, default=inputs.FORMAT_FS)
    p.add_argument("--drop", type=_drop_argument, default=())
    p.set_defaults(func=cmd_render)
    subparsers["render"] = p

    return parser, subparsers


def _apply_config(
    config: dict[str, dict[str, Any]],
    subparsers: dict[str, argparse.ArgumentParser],
) -> None:
    for command, overrides in config.items():
        sub = subparsers.get(command)
        if sub is None:
            raise DataError(f"config names unknown subcommand {command!r}")
        valid = {action.dest for action in sub._actions}
        for key in overrides:
            if key.replace("-", "_") not in valid:
                raise DataError(f"config key {command}.{key} matches no flag")
        sub.set_defaults(**{k.replace("-", "_"): v for k, v in overrides.items()})


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subparsers = build_parser()

    # Config defaults must be installed before the real parse.
    probe, _ = parser.parse_known_args(argv)

    try:
        _apply_config(_load_config(probe.config), subparsers)
        args = parser.parse_args(argv)
        level = logging.WARNING - 10 * min(args.verbose, 2)
        logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except ScorerTransportError as exc:
        print(f"cqarank: scorer error: {exc}", file=sys.stderr)
        return EXIT_SCORER_ERROR
    except (CqarankError, OSError) as exc:
        print(f"cqarank: error: {exc}", file=sys.stderr)
        return EXIT_DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
