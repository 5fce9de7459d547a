"""Hot-loop kernels: compiled extension when available, pure fallback otherwise.

Set CQARANK_PURE_KERNELS=1 to force the fallback; `benchmarks/bench_kernels.py`
compares the two backends directly.
"""

import os

if os.environ.get("CQARANK_PURE_KERNELS") == "1":
    from . import _pure as _impl

    BACKEND = "pure"
else:
    try:
        from . import _native as _impl  # type: ignore[no-redef]

        BACKEND = "native"
    except ImportError:
        from . import _pure as _impl

        BACKEND = "pure"

levenshtein_distance = _impl.levenshtein_distance
levenshtein_within = _impl.levenshtein_within
bm25_accumulate = _impl.bm25_accumulate
lmd_accumulate = _impl.lmd_accumulate

__all__ = [
    "BACKEND",
    "bm25_accumulate",
    "levenshtein_distance",
    "levenshtein_within",
    "lmd_accumulate",
]
