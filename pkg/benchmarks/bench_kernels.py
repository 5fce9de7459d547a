"""Benchmark the compiled kernels against the pure fallback.

Runs the same workloads through both backends, checks they agree, and
prints a timing table. Usage:

    python3 benchmarks/bench_kernels.py [--repeats 5] [--seed 7]

The numbers cover the two hot loops: capped edit distance over question
pairs (near-duplicate detection) and the per-term scoring accumulators
(first-stage retrieval over a batch of candidate documents).
"""

from __future__ import annotations

import argparse
import importlib
import random
import string
import time

import numpy as np

from cqarank._kernels import _pure

try:
    from cqarank._kernels import _native
except ImportError:
    _native = None


def random_text(rng: random.Random, length: int) -> str:
    alphabet = string.ascii_lowercase + "     "
    return "".join(rng.choice(alphabet) for _ in range(length))


def mutate(rng: random.Random, text: str, edits: int) -> str:
    chars = list(text)
    for _ in range(edits):
        op = rng.choice(("sub", "ins", "del"))
        pos = rng.randrange(max(1, len(chars)))
        if op == "sub" and chars:
            chars[pos] = rng.choice(string.ascii_lowercase)
        elif op == "ins":
            chars.insert(pos, rng.choice(string.ascii_lowercase))
        elif chars:
            del chars[pos]
    return "".join(chars)


def build_pairs(rng: random.Random, count: int) -> list[tuple[str, str, int]]:
    """Mixed workload: near-duplicates (the cap rarely triggers) and
    unrelated texts (the row-minimum exit triggers early).
    """
    pairs = []
    for i in range(count):
        length = rng.randint(80, 300)
        a = random_text(rng, length)
        if i % 2 == 0:
            b = mutate(rng, a, rng.randint(0, 8))
        else:
            b = random_text(rng, rng.randint(80, 300))
        limit = max(len(a), len(b)) // 10 + 1
        pairs.append((a, b, limit))
    return pairs


def build_scoring_workload(rng: random.Random, n_docs: int, n_terms: int):
    denom = np.asarray(
        [1.2 * (0.25 + 0.75 * rng.uniform(0.2, 3.0)) for _ in range(n_docs)],
        dtype=np.float64,
    )
    terms = []
    for _ in range(n_terms):
        df = rng.randint(1, n_docs)
        pos = np.asarray(sorted(rng.sample(range(n_docs), df)), dtype=np.intc)
        tfs = np.asarray([rng.randint(1, 12) for _ in range(df)], dtype=np.intc)
        idf = rng.uniform(0.05, 4.0)
        mu_pc = rng.uniform(0.01, 50.0)
        qtf = float(rng.randint(1, 3))
        terms.append((pos, tfs, idf, mu_pc, qtf))
    return denom, terms


def time_levenshtein(backend, pairs, repeats: int) -> tuple[float, list[int]]:
    best = float("inf")
    results: list[int] = []
    for _ in range(repeats):
        started = time.perf_counter()
        out = [backend.levenshtein_within(a, b, limit) for a, b, limit in pairs]
        best = min(best, time.perf_counter() - started)
        results = out
    return best, results


def time_scoring(backend, denom, terms, repeats: int) -> tuple[float, np.ndarray]:
    n_docs = denom.shape[0]
    best = float("inf")
    scores = np.zeros(n_docs)
    for _ in range(repeats):
        scores = np.zeros(n_docs)
        started = time.perf_counter()
        for pos, tfs, idf, mu_pc, qtf in terms:
            backend.bm25_accumulate(pos, tfs, idf, 1.2, denom, scores)
            backend.lmd_accumulate(pos, tfs, mu_pc, qtf, scores)
        best = min(best, time.perf_counter() - started)
    return best, scores


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5, help="best-of-N timing")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--pairs", type=int, default=400, help="edit-distance pairs")
    parser.add_argument("--docs", type=int, default=50_000, help="candidate documents")
    parser.add_argument("--terms", type=int, default=24, help="query terms to accumulate")
    args = parser.parse_args()

    rng = random.Random(args.seed)
    pairs = build_pairs(rng, args.pairs)
    denom, terms = build_scoring_workload(rng, args.docs, args.terms)

    backends = [("pure", _pure)]
    if _native is not None:
        backends.insert(0, ("native", _native))
    else:
        print("compiled extension not importable; timing the pure backend only")

    rows = []
    reference: dict[str, object] = {}
    for name, backend in backends:
        lev_time, lev_out = time_levenshtein(backend, pairs, args.repeats)
        score_time, scores = time_scoring(backend, denom, terms, args.repeats)
        rows.append((name, lev_time, score_time))
        if "lev" in reference:
            assert lev_out == reference["lev"], "backends disagree on edit distances"
            assert np.allclose(scores, reference["scores"], rtol=1e-12), (
                "backends disagree on accumulated scores"
            )
        reference["lev"] = lev_out
        reference["scores"] = scores

    print(f"\nworkload: {args.pairs} capped edit distances, "
          f"{args.terms} terms x {args.docs} docs, best of {args.repeats}")
    print(f"{'backend':<8}  {'levenshtein':>12}  {'accumulators':>12}")
    for name, lev_time, score_time in rows:
        print(f"{name:<8}  {lev_time * 1e3:>10.2f}ms  {score_time * 1e3:>10.2f}ms")
    if len(rows) == 2:
        native_row, pure_row = rows[0], rows[1]
        print(
            f"{'speedup':<8}  {pure_row[1] / native_row[1]:>11.1f}x  "
            f"{pure_row[2] / native_row[2]:>11.1f}x"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
