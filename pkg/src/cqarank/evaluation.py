"""Run evaluation: MAP@k and Recall@k against relevance judgments, plus
paired t-tests with Bonferroni correction for system comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from scipy import stats

from .errors import DataError
from .retrieval import RankedList

METRIC_MAP = "MAP"
METRIC_RECALL = "Recall"


def read_qrels(path: Path | str) -> dict[str, set[str]]:
    """TREC qrels: `<qid> 0 <aid> <rel>`; positive rel means relevant.

    Unlike corpus judgments, a query may have several relevant answers.
    """
    path = Path(path)
    relevant: dict[str, set[str]] = {}
    with path.open(encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 4:
                raise DataError(f"{path}:{line_no}: malformed qrels line {line!r}")
            qid, _, aid, rel_text = parts
            try:
                rel = int(rel_text)
            except ValueError as exc:
                raise DataError(f"{path}:{line_no}: malformed qrels line {line!r}") from exc
            if rel > 0:
                if aid in relevant.get(qid, ()):
                    raise DataError(f"{path}:{line_no}: duplicate judgment for ({qid}, {aid})")
                relevant.setdefault(qid, set()).add(aid)
    return relevant


def average_precision_at_k(ranked: RankedList, relevant: set[str], k: int) -> float:
    """TREC AP truncated at k: mean of precision at each relevant hit,
    divided by the number of judged relevant documents.
    """
    if k < 1:
        raise DataError(f"cutoff must be >= 1, got {k}")
    if not relevant:
        raise DataError(f"query {ranked.question_id!r} has no relevant answers")
    hits = 0
    precision_sum = 0.0
    for entry in ranked.entries[:k]:
        if entry.answer_id in relevant:
            hits += 1
            precision_sum += hits / entry.rank
    return precision_sum / len(relevant)


def recall_at_k(ranked: RankedList, relevant: set[str], k: int) -> float:
    """Fraction of the relevant answers present in the top k."""
    if k < 1:
        raise DataError(f"cutoff must be >= 1, got {k}")
    if not relevant:
        raise DataError(f"query {ranked.question_id!r} has no relevant answers")
    found = sum(1 for entry in ranked.entries[:k] if entry.answer_id in relevant)
    return found / len(relevant)


@dataclass(frozen=True)
class MetricReport:
    metric_name: str
    k: int
    per_query: dict[str, float]
    aggregate: float = field(init=False)

    def __post_init__(self) -> None:
        if not self.per_query:
            raise DataError("metric report needs at least one evaluated query")
        for qid, value in self.per_query.items():
            if not 0.0 <= value <= 1.0:
                raise DataError(f"metric value {value} for query {qid!r} outside [0, 1]")
        object.__setattr__(
            self, "aggregate", sum(self.per_query.values()) / len(self.per_query)
        )


def evaluate_run(
    run: Iterable[RankedList],
    qrels: Mapping[str, set[str]],
    cutoffs: Iterable[int],
) -> list[MetricReport]:
    """Metric reports over every judged query; judged queries missing from
    the run score 0, run queries without judgments are ignored.
    """
    cutoffs = list(cutoffs)
    if not cutoffs or any(k < 1 for k in cutoffs):
        raise DataError(f"cutoffs must be positive, got {cutoffs}")
    if not qrels:
        raise DataError("no judged queries to evaluate")

    by_query: dict[str, RankedList] = {}
    for ranked in run:
        if ranked.question_id in by_query:
            raise DataError(f"run contains query {ranked.question_id!r} twice")
        by_query[ranked.question_id] = ranked

    empty = RankedList(question_id="", entries=())
    reports = []
    for metric_name in (METRIC_MAP, METRIC_RECALL):
        compute = average_precision_at_k if metric_name == METRIC_MAP else recall_at_k
        for k in cutoffs:
            per_query = {}
            for qid in sorted(qrels):
                ranked = by_query.get(qid, empty)
                per_query[qid] = compute(ranked, qrels[qid], k) if ranked.entries else 0.0
            reports.append(MetricReport(metric_name=metric_name, k=k, per_query=per_query))
    return reports


@dataclass(frozen=True)
class TTestResult:
    t_statistic: float
    p_value: float
    zero_variance: bool = False
    saturated: bool = False


def paired_t_test(
    values_a: Mapping[str, float], values_b: Mapping[str, float]
) -> TTestResult:
    """Two-sided paired t-test on per-query differences.

    Identical samples report p = 1.0 with the zero-variance flag; zero
    variance with nonzero mean saturates to an infinite t with p = 0.
    """
    if set(values_a) != set(values_b):
        raise DataError("paired test requires identical query sets")
    keys = sorted(values_a)
    n = len(keys)
    if n < 2:
        raise DataError(f"paired test requires at least 2 queries, got {n}")

    diffs = [values_a[key] - values_b[key] for key in keys]
    mean = sum(diffs) / n
    variance = sum((d - mean) ** 2 for d in diffs) / (n - 1)
    if variance == 0.0:
        if mean == 0.0:
            return TTestResult(t_statistic=0.0, p_value=1.0, zero_variance=True)
        t = math.inf if mean > 0 else -math.inf
        return TTestResult(t_statistic=t, p_value=0.0, saturated=True)

    t = mean / math.sqrt(variance / n)
    p = 2.0 * float(stats.t.sf(abs(t), df=n - 1))
    return TTestResult(t_statistic=t, p_value=min(p, 1.0))


@dataclass(frozen=True)
class Comparison:
    metric_name: str
    system_a: str
    system_b: str
    t_statistic: float
    p_value: float


@dataclass(frozen=True)
class SignificanceResult:
    metric_name: str
    system_a: str
    system_b: str
    t_statistic: float
    p_value: float
    corrected_alpha: float
    significant: bool


def bonferroni(
    comparisons: list[Comparison], alpha: float, m: int
) -> list[SignificanceResult]:
    """Bonferroni correction: each comparison is significant iff its p-value
    is below alpha / m.
    """
    if not 0.0 < alpha < 1.0:
        raise DataError(f"alpha must be in (0, 1), got {alpha}")
    if m < len(comparisons):
        raise DataError(
            f"comparison count m={m} below the {len(comparisons)} supplied comparisons"
        )
    corrected = alpha / m
    return [
        SignificanceResult(
            metric_name=c.metric_name,
            system_a=c.system_a,
            system_b=c.system_b,
            t_statistic=c.t_statistic,
            p_value=c.p_value,
            corrected_alpha=corrected,
            significant=c.p_value < corrected,
        )
        for c in comparisons
    ]
