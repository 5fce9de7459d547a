"""Pure fallbacks for the compiled kernels.

Same contracts as the extension module: scoring accumulators take int32
document positions / term frequencies and add into a float64 score array;
the edit-distance routines work on plain strings.
"""

from __future__ import annotations

import numpy as np


def levenshtein_distance(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def levenshtein_within(a: str, b: str, limit: int) -> int:
    """Edit distance capped at `limit`: returns limit + 1 once it is exceeded."""
    if limit < 0:
        raise ValueError("limit must be non-negative")
    if abs(len(a) - len(b)) > limit:
        return limit + 1
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        row_min = i
        for j, cb in enumerate(b, 1):
            value = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb))
            cur.append(value)
            if value < row_min:
                row_min = value
        if row_min > limit:
            return limit + 1
        prev = cur
    return prev[-1] if prev[-1] <= limit else limit + 1


def bm25_accumulate(doc_pos, tfs, idf: float, k1: float, denom, scores) -> None:
    """Add one query term's saturated-tf contribution to candidate scores.

    `denom` is the per-document length normalizer k1 * (1 - b + b*dl/avgdl);
    positions within one postings list are distinct, so fancy-index += is safe.
    """
    pos = np.asarray(doc_pos)
    tf = np.asarray(tfs, dtype=np.float64)
    scores[pos] += idf * (tf * (k1 + 1.0)) / (tf + np.asarray(denom)[pos])


def lmd_accumulate(doc_pos, tfs, mu_pc: float, qtf: float, scores) -> None:
    """Add a query term's matched-document log-likelihood adjustment.

    Adds qtf * (ln(tf + mu*p_c) - ln(mu*p_c)); the background part shared by
    all documents is applied vectorized by the caller.
    """
    pos = np.asarray(doc_pos)
    tf = np.asarray(tfs, dtype=np.float64)
    scores[pos] += qtf * (np.log(tf + mu_pc) - np.log(mu_pc))
