"""Cross-encoder scorer: training tools and the batch-scoring HTTP service
that the retrieval engine's rerank stage talks to.
"""

from .data import (
    NEGATIVE_SAMPLING_SPEC,
    PairGroup,
    TrainingPair,
    build_pair_groups,
)
from .encoding import (
    FORMAT_CAT,
    FORMAT_FS,
    FORMATS,
    EncodedPair,
    Segment,
    encode_pair,
    render_cat_segment,
    render_fs_segments,
)
from .errors import (
    CheckpointError,
    EncodingError,
    InputDataError,
    ServiceError,
    TrainingDivergedError,
    VocabularyError,
    WireError,
)
from .model import (
    CrossEncoder,
    EncoderConfig,
    LoadedCheckpoint,
    base_metadata,
    fresh_model,
    load_checkpoint,
    save_checkpoint,
    score_encoded,
)
from .service import create_app
from .tokenizer import MARKER_TOKENS, extend_vocabulary, load_tokenizer, marker_ids
from .training import TrainConfig, TrainResult, train, validation_map
from .vocab import base_vocabulary, category_words, write_vocabulary
from .wire import PROTOCOL_VERSION, SCORE_PATH, parse_request, response_body

__all__ = [
    "NEGATIVE_SAMPLING_SPEC",
    "PairGroup",
    "TrainingPair",
    "build_pair_groups",
    "FORMAT_CAT",
    "FORMAT_FS",
    "FORMATS",
    "EncodedPair",
    "Segment",
    "encode_pair",
    "render_cat_segment",
    "render_fs_segments",
    "CheckpointError",
    "EncodingError",
    "InputDataError",
    "ServiceError",
    "TrainingDivergedError",
    "VocabularyError",
    "WireError",
    "CrossEncoder",
    "EncoderConfig",
    "LoadedCheckpoint",
    "base_metadata",
    "fresh_model",
    "load_checkpoint",
    "save_checkpoint",
    "score_encoded",
    "create_app",
    "MARKER_TOKENS",
    "extend_vocabulary",
    "load_tokenizer",
    "marker_ids",
    "TrainConfig",
    "TrainResult",
    "train",
    "validation_map",
    "base_vocabulary",
    "category_words",
    "write_vocabulary",
    "PROTOCOL_VERSION",
    "SCORE_PATH",
    "parse_request",
    "response_body",
]
