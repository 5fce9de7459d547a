"""Two-stage answer retrieval for community question answering: corpus
tooling, lexical first-stage retrieval, structured re-ranker inputs, and
evaluation with significance testing.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .corpus import Answer, Corpus, CorpusError, Judgment, Question, load_corpus, write_corpus
from .dataset import (
    DatasetSplits,
    DuplicatePair,
    SplitSpec,
    chronological_split,
    collapse_duplicates,
    find_near_duplicates,
    select_best_answer,
)
from .errors import CqarankError, DataError, ScorerTransportError
from .evaluation import (
    Comparison,
    MetricReport,
    SignificanceResult,
    TTestResult,
    average_precision_at_k,
    bonferroni,
    evaluate_run,
    paired_t_test,
    recall_at_k,
)
from .indexing import InvertedIndex, build_index, load_index, save_index, tokenize
from .inputs import (
    AblationSpec,
    StructuredInput,
    build_cat_input,
    build_fs_input,
    build_input,
    render_tags,
)
from .rerank import HttpScorer, ScorePair, Scorer, rerank, rerank_run, score_batch
from .retrieval import (
    Bm25Params,
    LmdParams,
    RankedEntry,
    RankedList,
    bm25_score,
    lmd_score,
    read_run,
    retrieve,
    write_run,
)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "Answer",
    "Corpus",
    "CorpusError",
    "Judgment",
    "Question",
    "load_corpus",
    "write_corpus",
    "DatasetSplits",
    "DuplicatePair",
    "SplitSpec",
    "chronological_split",
    "collapse_duplicates",
    "find_near_duplicates",
    "select_best_answer",
    "CqarankError",
    "DataError",
    "ScorerTransportError",
    "Comparison",
    "MetricReport",
    "SignificanceResult",
    "TTestResult",
    "average_precision_at_k",
    "bonferroni",
    "evaluate_run",
    "paired_t_test",
    "recall_at_k",
    "InvertedIndex",
    "build_index",
    "load_index",
    "save_index",
    "tokenize",
    "AblationSpec",
    "StructuredInput",
    "build_cat_input",
    "build_fs_input",
    "build_input",
    "render_tags",
    "HttpScorer",
    "ScorePair",
    "Scorer",
    "rerank",
    "rerank_run",
    "score_batch",
    "Bm25Params",
    "LmdParams",
    "RankedEntry",
    "RankedList",
    "bm25_score",
    "lmd_score",
    "read_run",
    "retrieve",
    "write_run",
    "__version__",
]
